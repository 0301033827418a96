import sys, math
sys.path.insert(0, "src")
import mpmath as mp
from scipy.integrate import quad

mp.mp.dps = 50

def ml_ref(alpha, beta, z, dps=50):
    with mp.workdps(dps):
        za = mp.mpf(repr(z))
        s = mp.mpf(0)
        k = 0
        while True:
            t = za**k / mp.gamma(alpha * k + beta)
            s += t
            if abs(t) < mp.mpf(10) ** (-dps) * max(1, abs(s)) and k > 4:
                break
            k += 1
        return s

alpha, beta, x = 0.2621, 1.0, 2.1186
inv_alpha = 1.0 / alpha
power = (1.0 - beta) * inv_alpha
s_beta = math.sin(math.pi * (1.0 - beta))
s_mix = math.sin(math.pi * (1.0 - beta + alpha))
cos_pa = math.cos(math.pi * alpha)
x2 = x * x

def kernel(r):
    den = r * r + 2.0 * r * x * cos_pa + x2
    num = r * s_beta + x * s_mix
    rp = r**power if power != 0.0 else 1.0
    return rp * math.exp(-(r**inv_alpha)) * num / den

r_max = 745.0**alpha
print("r_max", r_max)
val, err = quad(kernel, 0.0, r_max, limit=400, epsabs=1e-300, epsrel=1e-13)
val /= alpha * math.pi; err /= alpha * math.pi
print("scipy quad:", val, "abserr", err)

# mpmath quadrature of the same kernel
def mk(r):
    r = mp.mpf(r)
    den = r * r + 2 * r * x * mp.cos(mp.pi * alpha) + x2
    num = r * mp.sin(mp.pi * (1 - beta)) + x * mp.sin(mp.pi * (1 - beta + alpha))
    rp = r**mp.mpf(power) if power != 0.0 else mp.mpf(1)
    return rp * mp.exp(-(r**mp.mpf(inv_alpha))) * num / den

mval = mp.quad(mk, [0, 1, 2, r_max, 40]) / (alpha * mp.pi)
print("mp quad:", float(mval))
ref = ml_ref(alpha, beta, -x)
print("series ref:", float(ref))
print("scipy-vs-ref rel:", float(abs(val - ref) / abs(ref)))
print("mp-vs-ref rel:", float(abs(mval - ref) / abs(ref)))

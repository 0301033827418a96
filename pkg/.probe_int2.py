import sys, math
sys.path.insert(0, "src")
import mpmath as mp
from scipy.integrate import quad

def ml_ref(alpha, beta, z, dps=80):
    with mp.workdps(dps):
        za = mp.mpf(repr(z))
        s = mp.mpf(0)
        k = 0
        while True:
            t = za**k / mp.gamma(mp.mpf(repr(alpha)) * k + mp.mpf(repr(beta)))
            s += t
            if abs(t) < mp.mpf(10) ** (-dps) * max(1, abs(s)) and k > 4:
                break
            k += 1
        return s

def integral(alpha, beta, x):
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
    val, err = quad(kernel, 0.0, r_max, limit=400, epsabs=1e-300, epsrel=1e-13)
    return val / (alpha * math.pi)

x, beta = 3.0, 1.0
for alpha in (0.2, 0.26, 0.3, 0.35, 0.4, 0.45, 0.49, 0.499, 0.5, 0.51, 0.6, 0.7, 0.8, 0.9):
    got = integral(alpha, beta, x)
    ref = float(ml_ref(alpha, beta, -x))
    rel = abs(got - ref) / abs(ref)
    # predicted magnitude of an exponential correction term exp(x^{1/a} cos(pi/a)) style
    xa = x ** (1.0 / alpha)
    pred = math.exp(xa * math.cos(math.pi / alpha)) if math.cos(math.pi / alpha) < 0 else float("nan")
    print(f"alpha={alpha:6.3f} rel={rel:10.3e}  exp(x^(1/a)cos(pi/a))={pred:10.3e} x^(1/a)={xa:9.3f}")

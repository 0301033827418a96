import sys, math, random, time
sys.path.insert(0, "src")
import mpmath as mp
from fuzzyfrac.mlf import ml_one, ml_two, ml_conv_integral

def ml_ref(alpha, beta, z):
    """Arbitrary-precision series oracle with exact mpf arithmetic and
    precision adapted to the cancellation scale exp((-z)**(1/alpha))."""
    need = 40
    if z < 0:
        need += int(0.4343 * (-z) ** (1.0 / alpha)) + 10
        if alpha > 0.9:
            need += int(0.4343 * (-z)) + 10  # result itself may be tiny
    if need > 400:
        return None
    with mp.workdps(need):
        a = mp.mpf(repr(alpha)); b = mp.mpf(repr(beta)); za = mp.mpf(repr(z))
        s = mp.mpf(0); k = 0
        while True:
            t = za**k / mp.gamma(a * k + b)
            s += t
            if abs(t) < mp.mpf(10) ** (-need) * max(1, abs(s)) and k > 4:
                return s
            k += 1
            if k > 200000:
                return None

random.seed(7)
worst, worst_at, nfail, nskip = 0.0, None, 0, 0
t0 = time.time()
cases = []
for _ in range(250):
    q = random.uniform(0.1, 1.0)
    z = -math.exp(random.uniform(math.log(1e-3), math.log(200.0)))
    cases.append((q, 1.0, z)); cases.append((q, q, z))
    cases.append((q, random.uniform(0.05, 2.0), z))
for _ in range(40):
    cases.append((random.uniform(0.5, 1.0), 1.0, random.uniform(0.0, 5.0)))
for z in (-6.0, -12.0, -30.0, -80.0, -200.0):
    for q in (0.97, 0.985, 0.999, 1.0):
        cases.append((q, 1.0, z)); cases.append((q, 0.6, z)); cases.append((q, 2.0, z))

for q, b, z in cases:
    ref = ml_ref(q, b, z)
    if ref is None:
        nskip += 1
        continue
    try:
        got = ml_two(q, b, z)
    except Exception as e:
        print("RAISE", (round(q,4), round(b,4), round(z,4)), type(e).__name__, e)
        nfail += 1
        continue
    rel = abs(got - float(ref)) / max(abs(float(ref)), 1e-300)
    if rel > worst:
        worst, worst_at = rel, (round(q,4), round(b,4), round(z,4))
    if rel > 5e-11:
        print("BAD", (round(q,4), round(b,4), round(z,4)), f"rel={rel:.2e}")
        nfail += 1
print(f"{len(cases)} cases ({nskip} beyond oracle), worst rel {worst:.3e} at {worst_at}, failures {nfail}, {time.time()-t0:.1f}s")

print("E_{1/2}(-1)", ml_one(0.5, -1.0), float(mp.exp(1)*mp.erfc(1)))
print("E_{1/2,1/2}(-1)", ml_two(0.5, 0.5, -1.0), float(1/mp.sqrt(mp.pi) - mp.exp(1)*mp.erfc(1)))
print("E_{1,2}(1)", ml_two(1.0, 2.0, 1.0), math.e - 1)
print("conv(1,2,1)", ml_conv_integral(1.0, 2.0, 1.0), (1 - math.exp(-2)) / 2)
print("conv(0.5,1,1)", ml_conv_integral(0.5, 1.0, 1.0), float(1 - mp.exp(1)*mp.erfc(1)))

import sys
sys.path.insert(0, "src")
import numpy as np
from fuzzyfrac._kernels._pure import correction_weights, pece_weights

for q in (0.3, 0.5):
    h = 2.0**-7
    N = 128
    out = correction_weights(q, h, N)
    Wp, Wc = out
    print(f"q={q}: J={Wp.shape[1]}")
    print("  |Wp| max per node:", np.max(np.abs(Wp), axis=0))
    print("  |Wc| max per node:", np.max(np.abs(Wc), axis=0))
    print("  Wp rows 0..3:", Wp[:4])
    print("  Wc row N-1:", Wc[-1])
    # residual check: quadrature exactness for s^gamma at a few n
    import math
    from scipy.special import beta as beta_fn
    b, c, a0 = pece_weights(q, N)
    gam1 = h**q / math.gamma(q + 1)
    gam2 = h**q / math.gamma(q + 2)
    gammas = [0.0] + [i * q for i in range(1, 10) if i * q < 1 - 1e-9]
    for gamma in gammas:
        n = N
        t_n = n * h
        jp = (np.arange(N + 1) * h) ** gamma
        exact = t_n ** (q + gamma) * beta_fn(q, gamma + 1.0) / math.gamma(q)
        disc = gam2 * (a0[n-1] * jp[0] + np.dot(c[:n-1][::-1], jp[1:n]) + jp[n])
        corr = np.dot(Wc[n-1], jp[1:Wp.shape[1]+1])
        print(f"  gamma={gamma:.2f}: exact={exact:.6e} disc_err={disc-exact:+.3e} corrected_err={disc+corr-exact:+.3e}")

import sys, math
sys.path.insert(0, "src")
import numpy as np
from scipy.special import beta as beta_fn
from fuzzyfrac._kernels._pure import correction_weights, pece_weights
from fuzzyfrac.scenario import make_scenario
from fuzzyfrac.solver import solve_caputo, exact_linear
from fuzzyfrac.fuzzy import crisp

q = 0.3
# error profile
for h in (2.0**-7, 2.0**-9):
    scn = make_scenario(q=q, horizon=1.0, step=h, initial={"crisp": 1.0}, rhs="-u")
    traj = solve_caputo(scn)
    ref = exact_linear([[-1.0]], crisp(1.0), q, traj.times)
    err = np.abs(traj.norms - ref.norms)
    k = int(np.argmax(err))
    print(f"h=2^{math.log2(h):.0f}: maxerr={err.max():.3e} at node {k}/{len(err)-1} (t={traj.times[k]:.4f}); "
          f"err@T={err[-1]:.3e} err@node1={err[1]:.3e} err@node8={err[8]:.3e} err@node32={err[32]:.3e}")

# exactness at early n
h = 2.0**-7
N = 128
Wp, Wc = correction_weights(q, h, N)
P = Wp.shape[1]
b, c, a0 = pece_weights(q, N)
gam1 = h**q / math.gamma(q + 1)
gam2 = h**q / math.gamma(q + 2)
for gamma in (0.3, 0.6, 0.9):
    errs_c, errs_p = [], []
    for n in range(1, 13):
        t_n = n * h
        jp = (np.arange(N + 1) * h) ** gamma
        exact = t_n ** (q + gamma) * beta_fn(q, gamma + 1.0) / math.gamma(q)
        disc_c = gam2 * (a0[n-1] * jp[0] + (np.dot(c[:n-1][::-1], jp[1:n]) if n > 1 else 0.0) + jp[n])
        corr_c = float(np.dot(Wc[n-1], jp[1:P+1]))
        disc_p = gam1 * np.dot(b[:n][::-1], jp[:n])
        corr_p = float(np.dot(Wp[n-1], jp[1:P+1]))
        errs_c.append(disc_c + corr_c - exact)
        errs_p.append(disc_p + corr_p - exact)
    print(f"gamma={gamma}: corrector resid {['%.1e' % e for e in errs_c[:6]]}")
    print(f"           predictor resid {['%.1e' % e for e in errs_p[:6]]}")

import sys, math
sys.path.insert(0, "src")
import numpy as np
from fuzzyfrac._kernels._pure import correction_weights, pece_weights

q, h = 0.3, 2.0**-9
N = 512
Wp, Wc = correction_weights(q, h, N)
P = Wp.shape[1]
b, c, a0 = pece_weights(q, N)
gam1 = h**q / math.gamma(q + 1)
gam2 = h**q / math.gamma(q + 2)

# Jacobian of the startup map for f = -u (f_u = -1):
# F_i = -y_i ;  y_i = y0 + gam2*(a0, c..., fp) + Wc.F ; fp = -pred ; pred = y0 + gam1*b.F + Wp.F
# dy_i/dF_j  (i = 1..P, j = 1..P):
Jm = np.zeros((P, P))
for i in range(1, P + 1):
    n = i - 1  # step producing node i
    for j in range(1, P + 1):
        d = 0.0
        if j <= n:  # regular trapezoid weight c_{n-j}
            d += gam2 * c[n - j]
        d += Wc[n, j - 1]
        # fp = f(pred) = -pred contributes gam2 * (-1) * dpred/dFj
        dpred = Wp[n, j - 1]
        if j <= n:
            dpred += gam1 * b[n - j]
        d += gam2 * (-1.0) * dpred
        Jm[i - 1, j - 1] = -d  # dF_i/dF_j = f_u * dy/dF = -dy/dF
eig = np.linalg.eigvals(Jm)
print("P =", P, "spectral radius of startup map:", np.max(np.abs(eig)))
print("|Wc| rows 0..2:", np.abs(Wc[:3]).max(axis=1))
print("|Wp| rows 0..2:", np.abs(Wp[:3]).max(axis=1))

# convergence of the startup block across sweep counts
from fuzzyfrac._kernels import _pure
import importlib

def run(sweeps):
    _pure._STARTUP_SWEEPS = sweeps
    def rhs(t, y, yd):
        return -y
    Y = _pure.caputo_pece(q, h, N, np.array([1.0]), rhs, corrections=(Wp, Wc))
    return Y[:, 0]

for s in (10, 40, 100, 400):
    Y = run(s)
    print(f"sweeps={s}: node1={Y[1]!r} node{P}={Y[P]!r}")

import sys, math
sys.path.insert(0, "src")
import numpy as np
from fuzzyfrac.mlf import ml_one

def graded_volterra(q, targets, y0, rhs, M=128, r=None):
    """Product-trapezoid Volterra solve of D^q u = rhs on a graded mesh
    covering [0, max(targets)]; returns values at `targets` (which are
    inserted into the mesh). rhs(t, u) -> same-shape."""
    T = float(max(targets))
    if r is None:
        r = 2.0 / q
    base = T * (np.arange(M + 1) / M) ** r
    mesh = np.union1d(np.round(base, 18), np.round(np.asarray(targets, float), 18))
    mesh = np.unique(mesh)
    K = len(mesh)
    C = np.atleast_1d(np.asarray(y0, float)).shape[0]
    U = np.empty((K, C)); F = np.empty((K, C))
    U[0] = y0
    F[0] = rhs(mesh[0], U[0])
    ginv = 1.0 / math.gamma(q)
    for k in range(1, K):
        Tk = mesh[k]
        sa = mesh[:k]; sb = mesh[1:k+1]
        A = Tk - sa; B = Tk - sb
        Aq = A**q; Bq = B**q
        Aq1 = A**(q+1); Bq1 = B**(q+1)
        d = sb - sa
        # int (Tk-s)^{q-1} (sb - s) ds over [sa, sb]  (weight for F_a)
        wa = (-B * (Aq - Bq) / q + (Aq1 - Bq1) / (q + 1.0)) / d
        # int (Tk-s)^{q-1} (s - sa) ds
        wb = (A * (Aq - Bq) / q - (Aq1 - Bq1) / (q + 1.0)) / d
        conv = wa @ F[:k] + wb[:k-1] @ F[1:k] if k > 1 else wa * F[0]
        conv = (wa @ F[:k]) + (wb[:-1] @ F[1:k] if k > 1 else 0.0)
        # implicit in F_k: u_k = y0 + ginv*(conv + wb[-1]*F_k)
        u = U[k-1].copy()
        for _ in range(8):
            fk = rhs(Tk, u)
            u_new = y0 + ginv * (conv + wb[-1] * fk)
            if np.max(np.abs(u_new - u)) <= 1e-15 * max(1.0, np.max(np.abs(u_new))):
                u = u_new; break
            u = u_new
        U[k] = u
        F[k] = rhs(Tk, U[k])
    tidx = [int(np.argmin(np.abs(mesh - t))) for t in targets]
    return np.array([U[i] for i in tidx]), mesh

q = 0.3
def rhs(t, u): return -u
print("node errors at coarse nodes t_j = j*h, j=1..8:")
for k in (7, 8, 9, 10):
    h = 2.0**-k
    targets = np.arange(1, 9) * h
    vals, mesh = graded_volterra(q, targets, np.array([1.0]), rhs, M=128)
    ref = np.array([ml_one(q, -t**q) for t in targets])
    err = np.abs(vals[:, 0] - ref)
    print(f"h=2^-{k}: K={len(mesh)} maxerr={err.max():.3e}  vs h^{{1+q}}={h**1.3:.3e}  errs={['%.1e' % e for e in err]}")

# sensitivity to M
h = 2.0**-10
for M in (64, 128, 256):
    targets = np.arange(1, 9) * h
    vals, mesh = graded_volterra(q, targets, np.array([1.0]), rhs, M=M)
    ref = np.array([ml_one(q, -t**q) for t in targets])
    print(f"M={M}: maxerr={np.abs(vals[:,0]-ref).max():.3e}")

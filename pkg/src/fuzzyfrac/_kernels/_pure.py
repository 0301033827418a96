"""Pure-numpy fractional predictor-corrector kernel.

This is the fallback twin of the compiled extension ``_core``; both expose
``caputo_pece`` with identical semantics.  The memory convolution is the
hot loop: step ``n`` costs two dot products of length ``n`` per channel,
O(N^2) work overall, executed here as BLAS matrix-vector products over the
stored right-hand-side history.

A "channel" is one scalar endpoint trajectory; callers batch every level
endpoint (and every Monte-Carlo path) into the channel axis so the kernel
never needs to know about fuzzy structure.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import beta as _beta_fn

from ..errors import NonFiniteError

__all__ = ["caputo_pece", "pece_weights", "correction_weights", "graded_startup"]

# graded-mesh resolution for the startup block solve
_STARTUP_MESH = 128


def pece_weights(q: float, n_steps: int):
    """Quadrature weights of the fractional Adams scheme, by lag k = n - j.

    Returns (b, c, a0) where

    * ``b[k] = (k+1)**q - k**q``              (rectangle / predictor),
    * ``c[k] = (k+2)**p + k**p - 2*(k+1)**p``  with ``p = q+1``
                                              (trapezoid / corrector, j >= 1),
    * ``a0[n] = n**p - (n-q)*(n+1)**q``       (corrector weight of j = 0).
    """
    k = np.arange(n_steps, dtype=float)
    p = q + 1.0
    b = (k + 1.0) ** q - k**q
    c = (k + 2.0) ** p + k**p - 2.0 * (k + 1.0) ** p
    n = k
    a0 = n**p - (n - q) * (n + 1.0) ** q
    return b, c, a0


def correction_weights(q: float, h: float, n_steps: int, max_powers: int = 8):
    """Starting weights that restore O(h^(1+q)) near the origin.

    The solution of a fractional problem behaves like ``y0 + sum c_i t**(i*q)``
    at t = 0+, and the base rectangle/trapezoid product rules integrate the
    fractional powers t**g with g < 1 too crudely (the observed grid-max
    order collapses to ~2q).  This builds per-step weights on the first few
    nodes that make both rules exact on ``{1, t**q, t**(2q), ...}`` for every
    power below 1 (the constant is included so the weights leave constant
    right-hand sides untouched).

    Returns (Wp, Wc) of shape (n_steps, J), applying to nodes 1..J, or None
    when q = 1 (nothing to correct) or the grid is shorter than the needed
    node block.
    """
    gammas = []
    g = q
    while g < 1.0 - 1e-9 and len(gammas) < max_powers:
        gammas.append(g)
        g += q
    if not gammas:
        return None
    gammas = [0.0] + gammas
    J = len(gammas)
    # Generalized Vandermonde systems in the fractional powers are badly
    # conditioned when the exponent set is dense (small q); spreading the
    # exactness conditions over more nodes and taking the minimum-norm
    # solution keeps the weights small, which the start-up fixed point
    # needs to converge.
    P = 2 * J
    N = int(n_steps)
    if N < P:
        return None

    b, c, a0 = pece_weights(q, N)
    gam1 = h**q / math.gamma(q + 1.0)
    gam2 = h**q / math.gamma(q + 2.0)
    n_arr = np.arange(1, N + 1, dtype=float)
    t_n = n_arr * h

    M = np.empty((J, P))
    Rp = np.empty((J, N))
    Rc = np.empty((J, N))
    nodes = np.arange(1, P + 1, dtype=float)
    for i, gamma in enumerate(gammas):
        M[i] = (nodes * h) ** gamma
        jpow = np.arange(N + 1, dtype=float) ** gamma  # 0**0 == 1 by numpy
        exact = t_n ** (q + gamma) * (_beta_fn(q, gamma + 1.0) / math.gamma(q))
        # rectangle rule: nodes j = 0..n-1 weighted b[n-1-j]
        conv_b = np.convolve(b, jpow)[:N]
        Rp[i] = exact - gam1 * h**gamma * conv_b
        # trapezoid rule: a0 at j=0, c[n-1-j] for 1<=j<=n-1, weight 1 at j=n
        jz = jpow.copy()
        jz[0] = 0.0
        conv_c = np.convolve(c, jz)[:N]
        disc = np.empty(N)
        disc[0] = a0[0] * jpow[0] + jpow[1]
        if N > 1:
            disc[1:] = a0[1:N] * jpow[0] + conv_c[1:N] + jpow[2 : N + 1]
        Rc[i] = exact - gam2 * h**gamma * disc
    pinv = np.linalg.pinv(M, rcond=1e-13)
    Wp = (pinv @ Rp).T.copy()
    Wc = (pinv @ Rc).T.copy()
    return np.ascontiguousarray(Wp), np.ascontiguousarray(Wc)


def graded_startup(
    q: float,
    h: float,
    n_nodes: int,
    y0: np.ndarray,
    rhs,
    delay_steps: int = 0,
    history_fn=None,
    mesh_size: int = _STARTUP_MESH,
):
    """Solve the first ``n_nodes`` uniform grid steps on a graded mesh.

    Near t = 0 the solution behaves like ``y0 + sum c_i t**(i*q)`` and the
    uniform-step rules lose accuracy there no matter how the weights are
    corrected.  This integrates the equivalent Volterra equation over
    [0, n_nodes*h] with a product-trapezoid rule on the mesh
    ``t_P * (i/M)**(2/q)`` (grading concentrates nodes at the singularity,
    restoring uniform second order in the mesh index), then reads off the
    uniform nodes, which are inserted into the mesh exactly.

    Each mesh step is implicit in its own node only and is resolved by a
    short fixed-point loop.  Returns (U, F, converged) with U, F of shape
    (n_nodes+1, C); on non-convergence the caller falls back to plain
    stepping.
    """
    P = int(n_nodes)
    C = y0.shape[0]
    t_end = P * h
    targets = np.arange(P + 1) * h
    m = int(delay_steps)
    tau = m * h

    grading = 2.0 / q
    base = t_end * (np.arange(mesh_size + 1) / mesh_size) ** grading
    # drop graded nodes sitting on top of a uniform node (sliver panels
    # would wreck the panel-weight cancellation)
    gap = np.min(np.abs(base[:, None] - targets[None, :]), axis=1)
    base = base[gap > 1e-9 * t_end]
    mesh = np.unique(np.concatenate([base, targets]))
    dm = np.diff(mesh)
    mesh = np.concatenate([mesh[:1], mesh[1:][dm > 1e-12 * t_end]])
    K = len(mesh) - 1

    def delayed_at(s: float, U, k_known: int):
        if m == 0:
            return None
        sd = s - tau
        if sd <= 0.0:
            return history_fn(sd)
        # delayed time inside the startup window: read the nearest earlier
        # mesh node (only reachable when the lag is below the window)
        idx = min(int(np.searchsorted(mesh, sd)), k_known)
        return U[idx]

    U = np.empty((K + 1, C))
    F = np.empty((K + 1, C))
    U[0] = y0
    F[0] = np.asarray(rhs(mesh[0], U[0], delayed_at(mesh[0], U, 0)), dtype=float)
    ginv = 1.0 / math.gamma(q)
    ok = True
    for k in range(1, K + 1):
        Tk = mesh[k]
        sa = mesh[:k]
        sb = mesh[1 : k + 1]
        A = Tk - sa
        B = Tk - sb
        Aq = A**q
        Bq = B**q
        Aq1 = A ** (q + 1.0)
        Bq1 = B ** (q + 1.0)
        d = sb - sa
        # product-trapezoid panel weights for (Tk - s)**(q-1) times the
        # linear interpolant hat functions
        wa = (-B * (Aq - Bq) / q + (Aq1 - Bq1) / (q + 1.0)) / d
        wb = (A * (Aq - Bq) / q - (Aq1 - Bq1) / (q + 1.0)) / d
        conv = wa @ F[:k]
        if k > 1:
            conv = conv + wb[:-1] @ F[1:k]
        yd = delayed_at(Tk, U, k - 1)
        u = U[k - 1].copy()
        w_last = ginv * wb[-1]
        settled = False
        for _ in range(60):
            fk = np.asarray(rhs(Tk, u, yd), dtype=float)
            u_new = y0 + ginv * conv + w_last * fk
            if not np.all(np.isfinite(u_new)):
                return U[: P + 1], F[: P + 1], False
            if np.max(np.abs(u_new - u)) <= 1e-14 * max(
                1.0, float(np.max(np.abs(u_new)))
            ):
                u = u_new
                settled = True
                break
            u = u_new
        ok = ok and settled
        U[k] = u
        F[k] = np.asarray(rhs(Tk, U[k], yd), dtype=float)

    tidx = np.searchsorted(mesh, targets)
    if not np.allclose(mesh[tidx], targets, rtol=0.0, atol=1e-12 * max(h, 1.0)):
        return U[: P + 1], F[: P + 1], False
    return U[tidx].copy(), F[tidx].copy(), ok


def caputo_pece(
    q: float,
    h: float,
    n_steps: int,
    y0: np.ndarray,
    rhs,
    delay_steps: int = 0,
    history_fn=None,
    noise: np.ndarray | None = None,
    corrections=None,
) -> np.ndarray:
    """Integrate ``D^q y = rhs`` channelwise on the grid ``t_i = i*h``.

    rhs(t, y, yd) -> array(C,); ``yd`` is None unless ``delay_steps > 0``,
    in which case the delayed state is read ``delay_steps`` grid nodes back
    (``history_fn(t) -> array(C,)`` supplies times before 0).

    ``noise`` (n_steps, C), when given, holds pre-scaled per-step increments
    and switches the scheme to the explicit rectangle rule with the
    accumulated noise added on top (the corrector stage is skipped).

    ``corrections`` is the (Wp, Wc) pair from :func:`correction_weights`
    (ignored in the stochastic branch).  The weights reference the first
    block of nodes, which is computed up front by :func:`graded_startup`;
    if that solve reports failure the block falls back to plain stepping.

    Returns Y with shape (n_steps + 1, C).
    """
    y0 = np.ascontiguousarray(y0, dtype=float)
    C = y0.shape[0]
    N = int(n_steps)
    if N < 1:
        raise ValueError("need at least one step")
    m = int(delay_steps)
    if m > 0 and history_fn is None:
        raise ValueError("delay_steps > 0 requires history_fn")

    b, c, a0 = pece_weights(q, N)
    b_rev = np.ascontiguousarray(b[::-1])
    c_rev = np.ascontiguousarray(c[::-1])
    gam1 = h**q / math.gamma(q + 1.0)
    gam2 = h**q / math.gamma(q + 2.0)

    cum_noise = None
    if noise is not None:
        noise = np.ascontiguousarray(noise, dtype=float)
        if noise.shape != (N, C):
            raise ValueError(f"noise must have shape ({N}, {C})")
        cum_noise = np.cumsum(noise, axis=0)

    Wp = Wc = None
    J = 0
    if corrections is not None and cum_noise is None:
        Wp, Wc = corrections
        J = Wp.shape[1]

    Y = np.empty((N + 1, C))
    F = np.empty((N + 1, C))
    Y[0] = y0

    def delayed(j: int):
        if m == 0:
            return None
        if j >= m:
            return Y[j - m]
        return np.asarray(history_fn((j - m) * h), dtype=float)

    F[0] = np.asarray(rhs(0.0, Y[0], delayed(0)), dtype=float)

    def do_step(n: int) -> None:
        t1 = (n + 1) * h
        yd = delayed(n + 1)
        pred = y0 + gam1 * (b_rev[N - n - 1 :] @ F[: n + 1])
        if J:
            pred = pred + Wp[n] @ F[1 : J + 1]
        if cum_noise is not None:
            Y[n + 1] = pred + cum_noise[n]
        else:
            base = y0 + gam2 * (
                a0[n] * F[0] + (c_rev[N - n :] @ F[1 : n + 1] if n >= 1 else 0.0)
            )
            if J:
                base = base + Wc[n] @ F[1 : J + 1]
            # two corrector sweeps: the once-corrected value feeds a second
            # evaluation, which removes the predictor's low-order residue
            y = base + gam2 * np.asarray(rhs(t1, pred, yd), dtype=float)
            y = base + gam2 * np.asarray(rhs(t1, y, yd), dtype=float)
            Y[n + 1] = y
        if not np.all(np.isfinite(Y[n + 1])):
            raise NonFiniteError(f"trajectory blew up at t = {t1}", time=t1)
        F[n + 1] = np.asarray(rhs(t1, Y[n + 1], yd), dtype=float)

    start = 0
    if J:
        U, Fs, converged = graded_startup(
            q, h, J, y0, rhs, delay_steps=m, history_fn=history_fn
        )
        if converged:
            Y[: J + 1] = U
            F[: J + 1] = Fs
            start = J
        else:
            # fall back to plain stepping: exactness of the corrections on
            # the startup block is lost, stability is not
            J = 0
    for n in range(start, N):
        do_step(n)

    return Y

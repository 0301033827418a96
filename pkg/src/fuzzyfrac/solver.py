"""Levelwise integration of fuzzy Caputo-fractional systems.

Every level endpoint is a scalar trajectory ("channel"); the endpointwise
convention applies the scalar right-hand side to each endpoint
independently, so a solve is one batched kernel call over all channels.
Validity of the fuzzy states (ordered, nested cuts) is re-checked on every
grid node; systems that break the ordering raise
:class:`~fuzzyfrac.errors.OrderingViolation` instead of silently producing
states that are not fuzzy numbers.

Plain, delayed and stochastic variants share the stepper in
``fuzzyfrac._kernels``; the stochastic variant is an explicit scheme with
crisp additive noise shared across the endpoints of a path, so path
diameters are preserved and per-path randomness comes from counter-split
generator streams (deterministic for a fixed seed regardless of execution
order).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import expr as expr_mod
from ._kernels import caputo_pece, correction_weights
from .errors import (
    NonFiniteError,
    OrderingViolation,
    ScenarioError,
    UnsupportedMatrixError,
)
from .fuzzy import FuzzyNumber, FuzzyVector, crisp
from .mlf import ml_one
from .scenario import Scenario

__all__ = [
    "FuzzyTrajectory",
    "MomentTrajectory",
    "solve_caputo",
    "solve_delay",
    "solve_stochastic",
    "exact_linear",
]

# slack for the per-node validity check; genuine order breaking grows far
# beyond roundoff jitter
_ORDER_SLACK = 1e-9


@dataclass(frozen=True)
class FuzzyTrajectory:
    """Grid times paired with one fuzzy state per node.

    For delay problems the stored grid starts at -tau; ``history_len`` many
    leading nodes lie before t = 0.
    """

    q: float
    times: np.ndarray
    states: tuple
    norms: np.ndarray
    history_len: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        t.setflags(write=False)
        object.__setattr__(self, "times", t)
        n = np.asarray(self.norms, dtype=float)
        n.setflags(write=False)
        object.__setattr__(self, "norms", n)

    def __len__(self):
        return len(self.times)

    @property
    def dim(self) -> int:
        s = self.states[0]
        return len(s) if isinstance(s, FuzzyVector) else 1

    def state_at(self, t: float):
        i = int(np.argmin(np.abs(self.times - t)))
        return self.states[i]

    def from_zero(self) -> "FuzzyTrajectory":
        """Drop any pre-history nodes (t < 0)."""
        if self.history_len == 0:
            return self
        k = self.history_len
        return FuzzyTrajectory(
            q=self.q,
            times=self.times[k:],
            states=self.states[k:],
            norms=self.norms[k:],
            history_len=0,
            meta=dict(self.meta),
        )

    def diameters(self) -> np.ndarray:
        return np.array([s.diameter() for s in self.states])

    def component_norm_history(self, i: int) -> np.ndarray:
        """Per-node norm of one vector component."""
        return np.array(
            [
                s[i].norm() if isinstance(s, FuzzyVector) else s.norm()
                for s in self.states
            ]
        )


@dataclass(frozen=True)
class MomentTrajectory:
    """Monte-Carlo estimates of E[dist(u(t), 0)**a] with standard errors."""

    q: float
    times: np.ndarray
    moment: np.ndarray
    stderr: np.ndarray
    a: float
    paths: int

    def __post_init__(self):
        for name in ("times", "moment", "stderr"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.moment < 0) or np.any(self.stderr < 0):
            raise ScenarioError("moment and stderr must be nonnegative")

    def __len__(self):
        return len(self.times)


# ---------------------------------------------------------------------------
# channel packing


def _pack_scalar(u: FuzzyNumber) -> np.ndarray:
    return np.concatenate([u.lower, u.upper])


def _pack_vector(v: FuzzyVector) -> np.ndarray:
    # rows = endpoint slots (lower levels, then upper levels), cols = components
    K1 = len(v.levels)
    n = len(v)
    out = np.empty((2 * K1, n))
    for i, comp in enumerate(v.components):
        out[:K1, i] = comp.lower
        out[K1:, i] = comp.upper
    return out.ravel()


def _unpack_scalar(row: np.ndarray, levels: np.ndarray, t: float) -> FuzzyNumber:
    K1 = len(levels)
    lo, up = row[:K1], row[K1:]
    _check_ordering(lo, up, t)
    return FuzzyNumber(levels, lo.copy(), up.copy())


def _unpack_vector(row: np.ndarray, levels: np.ndarray, n: int, t: float) -> FuzzyVector:
    K1 = len(levels)
    grid = row.reshape(2 * K1, n)
    comps = []
    for i in range(n):
        lo, up = grid[:K1, i], grid[K1:, i]
        _check_ordering(lo, up, t)
        comps.append(FuzzyNumber(levels, lo.copy(), up.copy()))
    return FuzzyVector(tuple(comps))


def _check_ordering(lo: np.ndarray, up: np.ndarray, t: float) -> None:
    scale = max(float(np.max(np.abs(lo))), float(np.max(np.abs(up))), 1.0)
    tol = _ORDER_SLACK * scale
    if np.any(up - lo < -tol):
        raise OrderingViolation(
            f"endpoints crossed at t = {t:g}: the right-hand side is not "
            "order-preserving under the endpointwise convention",
            time=t,
        )
    if np.any(np.diff(lo) < -tol) or np.any(np.diff(up) > tol):
        raise OrderingViolation(
            f"level cuts lost nesting at t = {t:g}", time=t
        )


def _scalar_norms(Y: np.ndarray) -> np.ndarray:
    return np.max(np.abs(Y), axis=1)


def _vector_norms(Y: np.ndarray, K1: int, n: int) -> np.ndarray:
    grid = np.abs(Y).reshape(Y.shape[0], 2, K1, n)
    corner = np.max(grid, axis=1)  # worst endpoint per (node, level, comp)
    return np.max(np.sqrt(np.sum(corner**2, axis=2)), axis=1)


# ---------------------------------------------------------------------------
# right-hand sides


def _scalar_rhs(scn: Scenario):
    tree = scn.rhs
    env_base = dict(scn.params)
    dist = scn.disturbance

    def rhs(t, y, yd):
        env = dict(env_base)
        env["t"] = t
        env["u"] = y
        if yd is not None:
            env["ud"] = yd
        out = expr_mod.evaluate(tree, env)
        if dist is not None:
            out = out + expr_mod.evaluate(dist, {**env_base, "t": t})
        arr = np.asarray(out, dtype=float)
        if arr.ndim == 0:
            arr = np.full(y.shape, float(arr))
        return arr

    return rhs


def _matrix_rhs(scn: Scenario, rows: int, n: int):
    A_T = np.ascontiguousarray(scn.matrix.T)

    def rhs(t, y, yd):
        return (y.reshape(rows, n) @ A_T).ravel()

    return rhs


# ---------------------------------------------------------------------------
# public solvers


def solve_caputo(scn: Scenario) -> FuzzyTrajectory:
    """Integrate a plain (no delay, no noise) fuzzy Caputo system."""
    if scn.delay is not None:
        raise ScenarioError("scenario has a delay block; use solve_delay")
    if scn.noise is not None:
        raise ScenarioError("scenario has a noise block; use solve_stochastic")
    return _solve_deterministic(scn)


def solve_delay(scn: Scenario) -> FuzzyTrajectory:
    """Integrate a constant-lag fuzzy Caputo system.

    The delayed argument is read from the solution buffer ``tau`` grid steps
    back (the history expression supplies nodes before t = 0); the history
    segment is prepended to the returned trajectory.
    """
    if scn.delay is None:
        raise ScenarioError("scenario has no delay block")
    if scn.noise is not None:
        raise ScenarioError("delay and noise cannot be combined")
    return _solve_deterministic(scn)


def _solve_deterministic(scn: Scenario) -> FuzzyTrajectory:
    levels = scn.initial.levels
    K1 = len(levels)
    if scn.is_linear:
        n = scn.dim
        y0 = _pack_vector(scn.initial)
        rhs = _matrix_rhs(scn, 2 * K1, n)
    else:
        n = 1
        y0 = _pack_scalar(scn.initial)
        rhs = _scalar_rhs(scn)

    delay_steps = 0
    history_fn = None
    hist_times = np.empty(0)
    hist_vals = None
    if scn.delay is not None:
        m = scn.delay.steps
        delay_steps = m
        channels = y0.shape[0]
        hist_expr = scn.delay.history
        params = scn.params

        def history_fn(t, _e=hist_expr, _p=params, _c=channels):
            return np.full(_c, float(expr_mod.evaluate(_e, {**_p, "t": float(t)})))

        hist_times = (np.arange(m) - m) * scn.step
        hist_vals = np.array([history_fn(t)[0] for t in hist_times])

    corrections = correction_weights(scn.q, scn.step, scn.n_steps)
    if corrections is not None and scn.delay is not None:
        # the startup solve reads the lag at off-grid times before 0; a lag
        # shorter than the startup window would need in-window interpolation
        if scn.delay.steps < corrections[0].shape[1]:
            corrections = None

    Y = caputo_pece(
        scn.q,
        scn.step,
        scn.n_steps,
        y0,
        rhs,
        delay_steps=delay_steps,
        history_fn=history_fn,
        corrections=corrections,
    )

    times = scn.times
    if scn.is_linear:
        states = [_unpack_vector(Y[i], levels, n, times[i]) for i in range(len(times))]
        norms = _vector_norms(Y, K1, n)
    else:
        states = [_unpack_scalar(Y[i], levels, times[i]) for i in range(len(times))]
        norms = _scalar_norms(Y)

    history_len = 0
    if scn.delay is not None:
        history_len = scn.delay.steps
        hist_states = [crisp(v, levels) for v in hist_vals]
        states = hist_states + states
        times = np.concatenate([hist_times, times])
        norms = np.concatenate([np.abs(hist_vals), norms])

    return FuzzyTrajectory(
        q=scn.q,
        times=times,
        states=tuple(states),
        norms=norms,
        history_len=history_len,
        meta={"notes": list(scn.notes)},
    )


def path_increments(seed: int, n_steps: int, n_paths: int, h: float) -> np.ndarray:
    """Brownian increments (n_steps, n_paths), one counter-split Philox
    stream per path: path p uses key (seed << 64) | p, so the draw is
    deterministic and independent of path execution order."""
    out = np.empty((n_steps, n_paths))
    base = int(seed) & ((1 << 64) - 1)
    scale = math.sqrt(h)
    for p in range(n_paths):
        gen = np.random.Generator(np.random.Philox(key=(base << 64) | p))
        out[:, p] = gen.standard_normal(n_steps)
    out *= scale
    return out


def solve_stochastic(scn: Scenario, a: float = 2.0) -> MomentTrajectory:
    """Monte-Carlo moments of a fuzzy Caputo system with additive noise.

    Explicit scheme: fractional rectangle rule for the drift plus a crisp
    ``sigma * dW`` increment per step, identical across the endpoints of a
    path (diameters are preserved).  With ``sigma == 0`` the run degenerates
    to the deterministic corrector scheme and stderr is identically zero.
    """
    if scn.noise is None:
        raise ScenarioError("scenario has no noise block")
    if scn.delay is not None:
        raise ScenarioError("delay and noise cannot be combined")
    if not (isinstance(a, (int, float)) and math.isfinite(a) and a > 0):
        raise ScenarioError(f"moment exponent must be positive, got {a}")

    noise = scn.noise
    times = scn.times
    if noise.sigma == 0.0:
        # noiseless degeneration: defer to the deterministic solver
        det = solve_caputo(scn.without("noise"))
        moment = det.norms**a
        return MomentTrajectory(
            q=scn.q,
            times=times,
            moment=moment,
            stderr=np.zeros_like(moment),
            a=float(a),
            paths=noise.paths,
        )

    # Only the outermost level cut can realize the distance to zero, and
    # endpointwise dynamics make it self-contained: simulate just the
    # support endpoints of each path (one channel when the data is crisp).
    u = scn.initial
    support = u.support
    crisp_init = support[0] == support[1]
    per_path = 1 if crisp_init else 2
    P = noise.paths
    C = per_path * P

    y0 = np.empty(C)
    if crisp_init:
        y0[:] = support[0]
    else:
        y0[0::2] = support[0]
        y0[1::2] = support[1]

    N = scn.n_steps
    dW = path_increments(noise.seed, N, P, scn.step) * noise.sigma
    if per_path == 2:
        dW = np.repeat(dW, 2, axis=1)

    rhs = _scalar_rhs(scn)
    Y = caputo_pece(scn.q, scn.step, N, y0, rhs, noise=dW)

    if crisp_init:
        dist = np.abs(Y)  # (N+1, P)
    else:
        pair = np.abs(Y).reshape(Y.shape[0], P, 2)
        lo, up = pair[:, :, 0], pair[:, :, 1]
        if np.any(Y[:, 1::2] - Y[:, 0::2] < -_ORDER_SLACK * (1.0 + np.abs(Y).max())):
            raise OrderingViolation("path endpoints crossed during simulation")
        dist = np.maximum(lo, up)

    powd = dist**a
    moment = powd.mean(axis=1)
    if P > 1:
        stderr = powd.std(axis=1, ddof=1) / math.sqrt(P)
    else:
        stderr = np.zeros_like(moment)
    return MomentTrajectory(
        q=scn.q,
        times=times,
        moment=moment,
        stderr=stderr,
        a=float(a),
        paths=P,
    )


def exact_linear(
    A,
    u0: Union[FuzzyNumber, FuzzyVector, Sequence],
    q: float,
    times,
) -> FuzzyTrajectory:
    """Reference solution of ``D^q x = A x`` through the eigendecomposition.

    Requires A real-diagonalizable with a real spectrum and a usable
    eigenbasis (condition number <= 1e8); endpoints are transported through
    ``V diag(E_q(lam_i t^q)) V^{-1}``.  Intended as an oracle for solver
    order tests, not as a production path.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise UnsupportedMatrixError(f"matrix must be square, got {A.shape}")
    n = A.shape[0]
    if isinstance(u0, FuzzyNumber):
        u0 = FuzzyVector((u0,))
    elif not isinstance(u0, FuzzyVector):
        u0 = FuzzyVector(tuple(u0))
    if len(u0) != n:
        raise UnsupportedMatrixError(
            f"matrix is {n}x{n} but initial data has {len(u0)} components"
        )

    w, V = np.linalg.eig(A)
    scale = max(1.0, float(np.max(np.abs(w))))
    if np.max(np.abs(w.imag)) > 1e-10 * scale:
        raise UnsupportedMatrixError("matrix has complex eigenvalues")
    w = w.real
    V = V.real
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > 1e8:
        raise UnsupportedMatrixError(
            f"eigenbasis too ill-conditioned (cond = {cond:.3g})"
        )
    Vinv = np.linalg.inv(V)

    times = np.asarray(times, dtype=float)
    levels = u0.levels
    K1 = len(levels)
    Y0 = np.empty((2 * K1, n))
    for i, comp in enumerate(u0.components):
        Y0[:K1, i] = comp.lower
        Y0[K1:, i] = comp.upper
    coords0 = Y0 @ Vinv.T

    states = []
    rows = np.empty((len(times), 2 * K1 * n))
    for idx, t in enumerate(times):
        decay = np.array([ml_one(q, lam * t**q) if t > 0 else 1.0 for lam in w])
        Yt = (coords0 * decay) @ V.T
        if not np.all(np.isfinite(Yt)):
            raise NonFiniteError(f"reference solution overflowed at t = {t:g}", time=t)
        rows[idx] = Yt.ravel()
        states.append(_unpack_vector(rows[idx], levels, n, float(t)))

    norms = _vector_norms(rows, K1, n)
    if n == 1:
        states = [FuzzyNumber(levels, s[0].lower, s[0].upper) for s in states]
        norms = _scalar_norms(np.abs(rows))
    return FuzzyTrajectory(q=float(q), times=times, states=tuple(states), norms=norms)

"""Problem descriptions consumed by the solvers.

A Scenario bundles the fractional order, the dynamics (a scalar expression
or a constant matrix), fuzzy initial data, the time grid, and the optional
disturbance / delay / noise blocks.  Construction validates everything and
normalizes the delay to a whole number of grid steps (with a warning when
rounding was needed).
"""

from __future__ import annotations

import math
import warnings as _warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from . import expr as expr_mod
from .errors import ScenarioError
from .fuzzy import FuzzyNumber, FuzzyVector, default_levels, from_spec

__all__ = ["Delay", "Noise", "Scenario", "make_scenario"]


@dataclass(frozen=True)
class Delay:
    tau: float  # requested lag
    steps: int  # grid-aligned lag in steps (>= 1)
    tau_effective: float  # steps * h
    history_src: str
    history: expr_mod.Expr


@dataclass(frozen=True)
class Noise:
    sigma: float
    paths: int
    seed: int


@dataclass(frozen=True)
class Scenario:
    q: float
    horizon: float
    step: float
    initial: Union[FuzzyNumber, FuzzyVector]
    rhs_src: Optional[str] = None
    rhs: Optional[expr_mod.Expr] = None
    params: dict = field(default_factory=dict)
    matrix: Optional[np.ndarray] = None
    disturbance_src: Optional[str] = None
    disturbance: Optional[expr_mod.Expr] = None
    disturbance_sup: Optional[float] = None
    delay: Optional[Delay] = None
    noise: Optional[Noise] = None
    notes: tuple = ()

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.step))

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.step

    @property
    def is_linear(self) -> bool:
        return self.matrix is not None

    @property
    def dim(self) -> int:
        return len(self.initial) if isinstance(self.initial, FuzzyVector) else 1

    def with_initial(self, initial) -> "Scenario":
        return replace(self, initial=initial)

    def without(self, *blocks: str) -> "Scenario":
        """Copy with the named optional blocks ('delay', 'noise', ...) removed."""
        kw = {}
        for b in blocks:
            if b == "delay":
                kw["delay"] = None
            elif b == "noise":
                kw["noise"] = None
            elif b == "disturbance":
                kw.update(disturbance=None, disturbance_src=None, disturbance_sup=None)
            else:
                raise ValueError(f"unknown block {b!r}")
        return replace(self, **kw)


def make_scenario(
    q: float,
    horizon: float,
    step: float,
    initial,
    rhs: Optional[str] = None,
    params: Optional[dict] = None,
    matrix=None,
    disturbance: Optional[str] = None,
    disturbance_sup: Optional[float] = None,
    delay_tau: Optional[float] = None,
    delay_history: Optional[str] = None,
    noise_sigma: Optional[float] = None,
    noise_paths: Optional[int] = None,
    noise_seed: int = 0,
    levels: Optional[int] = None,
) -> Scenario:
    """Validate raw inputs and build a Scenario.

    ``initial`` may be a FuzzyNumber/FuzzyVector, a serialized fuzzy-number
    form, or a list of those (vector case).  ``levels`` picks the level-grid
    resolution used when building fuzzy numbers from serialized forms.
    """
    notes = []
    if not (isinstance(q, (int, float)) and math.isfinite(q) and 0.0 < q <= 1.0):
        raise ScenarioError(f"order q must lie in (0, 1], got {q}")
    if not (math.isfinite(horizon) and horizon > 0.0):
        raise ScenarioError(f"horizon must be positive, got {horizon}")
    if not (math.isfinite(step) and 0.0 < step <= horizon):
        raise ScenarioError(f"step must satisfy 0 < h <= horizon, got {step}")
    n_steps = int(round(horizon / step))
    if n_steps < 1 or abs(n_steps * step - horizon) > 1e-9 * max(1.0, horizon):
        raise ScenarioError(
            f"horizon {horizon} is not a whole number of steps of size {step}"
        )

    params = dict(params or {})
    for name, value in params.items():
        if name in expr_mod.VARIABLES or name in expr_mod.FUNCTIONS:
            raise ScenarioError(f"parameter name {name!r} shadows a builtin")
        if not (isinstance(value, (int, float)) and math.isfinite(value)):
            raise ScenarioError(f"parameter {name!r} must be a finite number")

    if (rhs is None) == (matrix is None):
        raise ScenarioError("exactly one of rhs / matrix must be given")

    rhs_expr = None
    if rhs is not None:
        rhs_expr = expr_mod.parse(rhs, params)

    mat = None
    if matrix is not None:
        mat = np.asarray(matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.size == 0:
            raise ScenarioError(f"matrix must be square, got shape {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise ScenarioError("matrix entries must be finite")
        mat.setflags(write=False)

    grid = default_levels(levels) if levels is not None else None
    init = _build_initial(initial, grid, mat)

    dist_expr = None
    if disturbance is not None:
        if mat is not None:
            raise ScenarioError(
                "disturbance is only supported for scalar rhs systems"
            )
        dist_expr = expr_mod.parse(disturbance, params)
        _reject_state_vars(dist_expr, "disturbance")
    if disturbance_sup is not None and not (
        math.isfinite(disturbance_sup) and disturbance_sup >= 0.0
    ):
        raise ScenarioError("disturbance sup bound must be >= 0")

    delay = None
    if delay_tau is not None or delay_history is not None:
        if delay_tau is None or delay_history is None:
            raise ScenarioError("delay needs both tau and history")
        if not (math.isfinite(delay_tau) and delay_tau > 0.0):
            raise ScenarioError(f"delay tau must be positive, got {delay_tau}")
        if mat is not None:
            raise ScenarioError("delay is only supported for scalar rhs systems")
        steps = int(round(delay_tau / step))
        if steps < 1:
            raise ScenarioError(
                f"delay tau = {delay_tau} is below one grid step h = {step}"
            )
        tau_eff = steps * step
        if abs(tau_eff - delay_tau) > 1e-12 * max(1.0, delay_tau):
            msg = (
                f"delay tau = {delay_tau} rounded to the grid: "
                f"tau_eff = {tau_eff} ({steps} steps)"
            )
            _warnings.warn(msg, stacklevel=2)
            notes.append(msg)
        hist_expr = expr_mod.parse(delay_history, params)
        _reject_state_vars(hist_expr, "delay history")
        delay = Delay(
            tau=float(delay_tau),
            steps=steps,
            tau_effective=tau_eff,
            history_src=delay_history,
            history=hist_expr,
        )

    noise = None
    if noise_sigma is not None or noise_paths is not None:
        if noise_sigma is None:
            raise ScenarioError("noise needs sigma")
        if not (math.isfinite(noise_sigma) and noise_sigma >= 0.0):
            raise ScenarioError(f"noise sigma must be >= 0, got {noise_sigma}")
        paths = int(noise_paths) if noise_paths is not None else 1
        if paths < 1:
            raise ScenarioError("noise needs paths >= 1")
        if mat is not None:
            raise ScenarioError("noise is only supported for scalar rhs systems")
        if delay is not None:
            raise ScenarioError("delay and noise cannot be combined")
        noise = Noise(sigma=float(noise_sigma), paths=paths, seed=int(noise_seed))

    return Scenario(
        q=float(q),
        horizon=float(horizon),
        step=float(step),
        initial=init,
        rhs_src=rhs,
        rhs=rhs_expr,
        params=params,
        matrix=mat,
        disturbance_src=disturbance,
        disturbance=dist_expr,
        disturbance_sup=disturbance_sup,
        delay=delay,
        noise=noise,
        notes=tuple(notes),
    )


def _reject_state_vars(tree, what: str) -> None:
    for name in _free_names(tree):
        if name in ("u", "ud"):
            raise ScenarioError(f"{what} may only depend on t, not on {name!r}")


def _free_names(tree) -> set:
    if isinstance(tree, expr_mod.Name):
        return {tree.ident}
    if isinstance(tree, expr_mod.Neg):
        return _free_names(tree.operand)
    if isinstance(tree, expr_mod.BinOp):
        return _free_names(tree.left) | _free_names(tree.right)
    if isinstance(tree, expr_mod.Call):
        out = set()
        for a in tree.args:
            out |= _free_names(a)
        return out
    return set()


def _build_initial(initial, grid, mat):
    if isinstance(initial, (FuzzyNumber, FuzzyVector)):
        built = initial
    elif isinstance(initial, (list, tuple)):
        built = FuzzyVector(tuple(from_spec(c, grid) for c in initial))
    else:
        built = from_spec(initial, grid)
    if mat is not None:
        n = mat.shape[0]
        if isinstance(built, FuzzyNumber):
            if n != 1:
                raise ScenarioError(
                    f"matrix is {n}x{n} but initial data is scalar"
                )
            built = FuzzyVector((built,))
        elif len(built) != n:
            raise ScenarioError(
                f"matrix is {n}x{n} but initial data has {len(built)} components"
            )
    else:
        if isinstance(built, FuzzyVector):
            raise ScenarioError("scalar rhs needs a scalar initial value")
    return built

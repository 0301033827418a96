"""Fuzzy numbers as discretized alpha-cut families.

A fuzzy number is stored as a sorted grid of membership levels
``0 = a_0 < a_1 < ... < a_K = 1`` together with the interval endpoints of
each level cut.  Validity means the cuts are proper intervals
(``lower <= upper``) and nested (lower endpoints nondecreasing, upper
endpoints nonincreasing in the level).  The supremum over levels that
defines the metric is approximated by the maximum over the grid, which is
exact whenever the endpoint functions are monotone in the level (true for
triangular and crisp data; see README).

All values are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import DomainError, GHDifferenceError, GridMismatchError

__all__ = [
    "FuzzyNumber",
    "FuzzyVector",
    "default_levels",
    "crisp",
    "triangular",
    "hausdorff",
    "gh_diff",
    "fuzzy_add",
    "fuzzy_scale",
    "resample",
    "from_spec",
]

DEFAULT_LEVEL_COUNT = 10  # K: grid {0, 1/K, ..., 1}

# Ordering slack for values produced by floating-point integration; user
# supplied data is expected to satisfy the invariants up to this tolerance.
ORDER_ATOL = 1e-9


def default_levels(count: int = DEFAULT_LEVEL_COUNT) -> np.ndarray:
    if count < 1:
        raise DomainError(f"need at least 1 level interval, got {count}")
    return np.linspace(0.0, 1.0, count + 1)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FuzzyNumber:
    """Discretized alpha-cut family: one interval per membership level."""

    levels: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "levels", _freeze(self.levels))
        object.__setattr__(self, "lower", _freeze(self.lower))
        object.__setattr__(self, "upper", _freeze(self.upper))
        self.validate()

    def validate(self) -> None:
        lv, lo, up = self.levels, self.lower, self.upper
        if lv.ndim != 1 or lo.shape != lv.shape or up.shape != lv.shape:
            raise DomainError("levels/lower/upper must be 1-d arrays of equal length")
        if lv.size < 2 or lv[0] != 0.0 or lv[-1] != 1.0 or np.any(np.diff(lv) <= 0):
            raise DomainError("levels must be strictly increasing from 0 to 1")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(up))):
            raise DomainError("endpoints must be finite")
        scale = max(float(np.max(np.abs(lo))), float(np.max(np.abs(up))), 1.0)
        tol = ORDER_ATOL * scale
        if np.any(up - lo < -tol):
            raise DomainError("invalid interval: lower > upper at some level")
        if np.any(np.diff(lo) < -tol) or np.any(np.diff(up) > tol):
            raise DomainError("cuts are not nested across levels")

    # -- conveniences ------------------------------------------------------

    @property
    def support(self) -> tuple[float, float]:
        return float(self.lower[0]), float(self.upper[0])

    @property
    def core(self) -> tuple[float, float]:
        return float(self.lower[-1]), float(self.upper[-1])

    def diameter(self) -> float:
        """Width of the widest cut (the level-0 support)."""
        return float(np.max(self.upper - self.lower))

    def norm(self) -> float:
        """Distance to the crisp zero embedding."""
        return max(float(np.max(np.abs(self.lower))), float(np.max(np.abs(self.upper))))

    def is_crisp(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.upper - self.lower) <= tol))

    def same_grid(self, other: "FuzzyNumber") -> bool:
        return self.levels.shape == other.levels.shape and bool(
            np.all(self.levels == other.levels)
        )

    def to_dict(self) -> dict:
        return {
            "levels": self.levels.tolist(),
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, FuzzyNumber):
            return NotImplemented
        return (
            self.same_grid(other)
            and bool(np.all(self.lower == other.lower))
            and bool(np.all(self.upper == other.upper))
        )

    def __hash__(self):
        return hash((self.levels.tobytes(), self.lower.tobytes(), self.upper.tobytes()))


def crisp(value: float, levels: np.ndarray | None = None) -> FuzzyNumber:
    """Embed a real number: every cut collapses to the point."""
    lv = default_levels() if levels is None else np.asarray(levels, dtype=float)
    v = np.full(lv.shape, float(value))
    return FuzzyNumber(lv, v, v.copy())


def triangular(
    left: float, mode: float, right: float, levels: np.ndarray | None = None
) -> FuzzyNumber:
    """Triangular fuzzy number (l; m; r): level a maps to
    [l + a*(m-l), r - a*(r-m)]."""
    if not (left <= mode <= right):
        raise DomainError(f"need left <= mode <= right, got ({left}; {mode}; {right})")
    lv = default_levels() if levels is None else np.asarray(levels, dtype=float)
    lo = left + lv * (mode - left)
    up = right - lv * (right - mode)
    return FuzzyNumber(lv, lo, up)


def _require_same_grid(u: FuzzyNumber, v: FuzzyNumber, allow_resample: bool):
    if u.same_grid(v):
        return u, v
    if not allow_resample:
        raise GridMismatchError(
            "fuzzy numbers use different level grids; pass allow_resample=True "
            "to interpolate (may lose accuracy)"
        )
    merged = np.union1d(u.levels, v.levels)
    return resample(u, merged), resample(v, merged)


def resample(u: FuzzyNumber, levels: Iterable[float]) -> FuzzyNumber:
    """Linear interpolation of the endpoint functions onto a new level grid."""
    lv = np.asarray(levels, dtype=float)
    lo = np.interp(lv, u.levels, u.lower)
    up = np.interp(lv, u.levels, u.upper)
    return FuzzyNumber(lv, lo, up)


def hausdorff(u: FuzzyNumber, v: FuzzyNumber, allow_resample: bool = False) -> float:
    """Levelwise-supremum Hausdorff distance between two fuzzy numbers.

    On a shared grid this is the max over levels of the endpoint gaps; it is
    the metric every stability statement in this package is phrased in.
    """
    u, v = _require_same_grid(u, v, allow_resample)
    return max(
        float(np.max(np.abs(u.lower - v.lower))),
        float(np.max(np.abs(u.upper - v.upper))),
    )


def gh_diff(
    u: FuzzyNumber, v: FuzzyNumber, allow_resample: bool = False
) -> tuple[FuzzyNumber, int]:
    """Generalized Hukuhara difference w with u = v + w (case 1) or
    v = u + (-1)w (case 2).

    Returns (w, case).  Prefers case 1 when both are valid (they then
    coincide up to interval orientation).  Raises GHDifferenceError when
    neither endpoint arrangement is a valid fuzzy number.
    """
    u, v = _require_same_grid(u, v, allow_resample)
    lo = u.lower - v.lower
    up = u.upper - v.upper
    for case, (a, b) in enumerate(((lo, up), (up, lo)), start=1):
        try:
            return FuzzyNumber(u.levels, a, b), case
        except DomainError:
            continue
    raise GHDifferenceError("gH-difference does not exist for these operands")


def fuzzy_add(u: FuzzyNumber, v: FuzzyNumber, allow_resample: bool = False) -> FuzzyNumber:
    """Levelwise interval sum."""
    u, v = _require_same_grid(u, v, allow_resample)
    return FuzzyNumber(u.levels, u.lower + v.lower, u.upper + v.upper)


def fuzzy_scale(c: float, u: FuzzyNumber) -> FuzzyNumber:
    """Levelwise scaling; a negative factor swaps the endpoints."""
    c = float(c)
    if not np.isfinite(c):
        raise DomainError("scale factor must be finite")
    if c >= 0.0:
        return FuzzyNumber(u.levels, c * u.lower, c * u.upper)
    return FuzzyNumber(u.levels, c * u.upper, c * u.lower)


def from_spec(spec, levels: np.ndarray | None = None) -> FuzzyNumber:
    """Build a fuzzy number from its serialized form.

    Accepts {"crisp": x}, {"triangular": [l, m, r]} or
    {"levels": [...], "lower": [...], "upper": [...]}; plain numbers embed
    as crisp values.
    """
    if isinstance(spec, (int, float)):
        return crisp(float(spec), levels)
    if not isinstance(spec, dict):
        raise DomainError(f"cannot interpret {spec!r} as a fuzzy number")
    if "crisp" in spec:
        return crisp(float(spec["crisp"]), levels)
    if "triangular" in spec:
        tri = spec["triangular"]
        if len(tri) != 3:
            raise DomainError("triangular form needs [left, mode, right]")
        return triangular(float(tri[0]), float(tri[1]), float(tri[2]), levels)
    if {"levels", "lower", "upper"} <= set(spec):
        return FuzzyNumber(
            np.asarray(spec["levels"], dtype=float),
            np.asarray(spec["lower"], dtype=float),
            np.asarray(spec["upper"], dtype=float),
        )
    raise DomainError(
        "fuzzy number spec must contain 'crisp', 'triangular' or explicit arrays"
    )


@dataclass(frozen=True)
class FuzzyVector:
    """A vector of fuzzy numbers sharing one level grid (a fuzzy box)."""

    components: tuple[FuzzyNumber, ...] = field(default_factory=tuple)

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise DomainError("FuzzyVector needs at least one component")
        first = comps[0]
        for c in comps[1:]:
            if not first.same_grid(c):
                raise GridMismatchError("all components must share the level grid")

    def __len__(self):
        return len(self.components)

    def __getitem__(self, i) -> FuzzyNumber:
        return self.components[i]

    @property
    def levels(self) -> np.ndarray:
        return self.components[0].levels

    def norm(self) -> float:
        """Distance to the zero vector: worst level of the Euclidean norm of
        the farthest box corner."""
        worst = np.abs(
            np.stack(
                [np.maximum(np.abs(c.lower), np.abs(c.upper)) for c in self.components]
            )
        )  # (n, K+1)
        return float(np.max(np.sqrt(np.sum(worst**2, axis=0))))

    def component_norms(self) -> tuple[float, ...]:
        return tuple(c.norm() for c in self.components)

    def diameter(self) -> float:
        return max(c.diameter() for c in self.components)

    def is_crisp(self, tol: float = 0.0) -> bool:
        return all(c.is_crisp(tol) for c in self.components)

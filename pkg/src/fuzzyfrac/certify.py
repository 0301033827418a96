"""Stability certificates and envelope curves for fuzzy fractional systems.

Each certificate turns verifiable side conditions (Lyapunov-type constant
bounds, a linear-matrix inequality, gain coefficients, ...) into an explicit
decay envelope

    B(t) = M * baseline * E_q(-lambda * t**q) ** (1/a) + offset

that a simulated trajectory norm can be checked against pointwise.  The
module also provides the scalar comparison solution that underlies every
envelope, a numerically constructed converse Lyapunov functional (truncated
trajectory-norm integral), and a LaSalle-style monotonicity diagnostic.

Exponent caveat: the root-splitting step ((x+y)**(1/a) <= x**(1/a) +
y**(1/a)) is only valid for a >= 1.  For a < 1 the corrected constant
2**(1/a - 1) restores validity; it is applied only when explicitly allowed
and the envelope is flagged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.linalg import eigh as _generalized_eigh
from scipy.linalg import solve_continuous_lyapunov

from .errors import (
    ConverseNotApplicable,
    DomainError,
    GainTooLarge,
    NotHurwitz,
)
from .fuzzy import FuzzyNumber
from .mlf import ml_one
from .scenario import Scenario
from .solver import FuzzyTrajectory, solve_caputo

__all__ = [
    "Envelope",
    "LyapConstants",
    "LmiCertificate",
    "SmallGainResult",
    "ConverseReport",
    "LaSalleReport",
    "scalar_comparison_solution",
    "iss_envelope",
    "ultimate_bound",
    "lmi_certificate",
    "lmi_certificate_from_p",
    "delay_envelope",
    "small_gain",
    "stochastic_bound",
    "stochastic_bound_envelope",
    "converse_lyapunov",
    "lasalle_check",
]

ENVELOPE_KINDS = ("ML", "ISS", "Ultimate", "Delay", "SmallGain", "Stochastic")


def _require_positive(**kwargs) -> None:
    for name, value in kwargs.items():
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise DomainError(f"{name} must be finite and > 0, got {value}")


def _require_nonnegative(**kwargs) -> None:
    for name, value in kwargs.items():
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0):
            raise DomainError(f"{name} must be finite and >= 0, got {value}")


@dataclass(frozen=True)
class Envelope:
    """Explicit decay bound B(t) = M*baseline*E_q(-lam*t^q)^(1/a) + offset.

    ``offset`` may be a constant or a callable of t (the input-to-state
    bound uses the running supremum of the disturbance, which grows in t).
    ``curve_fn``, when set, overrides the evaluation rule entirely (used by
    the stochastic moment bound, whose transient is not of the canonical
    root form); offset still reports the t -> infinity level.
    """

    kind: str
    q: float
    a: float
    M: float
    lam: float
    offset: Union[float, Callable[[float], float]] = 0.0
    baseline: float = 1.0
    flags: tuple = ()
    curve_fn: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if self.kind not in ENVELOPE_KINDS:
            raise DomainError(f"unknown envelope kind {self.kind!r}")
        if not (0.0 < self.q <= 1.0):
            raise DomainError(f"order must lie in (0, 1], got {self.q}")
        _require_positive(a=self.a)
        _require_nonnegative(M=self.M, lam=self.lam, baseline=self.baseline)
        # an envelope with M < 1 and no additive term starts below the
        # initial norm: suspicious but not invalid
        if self.M < 1.0 and not callable(self.offset) and self.offset == 0.0:
            if "overshoot-below-one" not in self.flags:
                object.__setattr__(
                    self, "flags", tuple(self.flags) + ("overshoot-below-one",)
                )

    def offset_at(self, t: float) -> float:
        if callable(self.offset):
            return float(self.offset(t))
        return float(self.offset)

    def __call__(self, t: float) -> float:
        if self.curve_fn is not None:
            return float(self.curve_fn(t))
        decay = ml_one(self.q, -self.lam * t**self.q) if t > 0 else 1.0
        return self.M * self.baseline * decay ** (1.0 / self.a) + self.offset_at(t)

    def evaluate(self, times) -> np.ndarray:
        return np.array([self(float(t)) for t in np.asarray(times, dtype=float)])

    def describe(self) -> dict:
        off = self.offset_at(math.inf) if callable(self.offset) else float(self.offset)
        return {
            "kind": self.kind,
            "q": self.q,
            "a": self.a,
            "M": self.M,
            "lambda": self.lam,
            "offset": off,
            "baseline": self.baseline,
            "flags": list(self.flags),
        }


@dataclass(frozen=True)
class LyapConstants:
    """Power-type Lyapunov sandwich constants:
    c1*d^a <= V <= c2*d^a and a decay/gain pair (c3, c4)."""

    c1: float
    c2: float
    c3: float
    c4: float = 0.0
    a: float = 1.0

    def __post_init__(self):
        _require_positive(c1=self.c1, c2=self.c2, c3=self.c3, a=self.a)
        _require_nonnegative(c4=self.c4)
        if self.c1 > self.c2:
            raise DomainError(f"need c1 <= c2, got c1={self.c1} > c2={self.c2}")

    @property
    def kappa(self) -> float:
        return self.c3 / self.c2


def scalar_comparison_solution(
    w0: float, kappa: float, R: float, q: float, t: float
) -> float:
    """Exact solution of the linear scalar comparison problem
    D^q y + kappa*y = R, y(0) = w0:

        y(t) = w0*E_q(-kappa t^q) + (R/kappa)*(1 - E_q(-kappa t^q)).

    Monotone toward R/kappa; every envelope bound reduces to it.
    """
    _require_positive(kappa=kappa)
    _require_nonnegative(w0=w0, R=R)
    if not (math.isfinite(t) and t >= 0):
        raise DomainError(f"t must be finite and >= 0, got {t}")
    decay = ml_one(q, -kappa * t**q) if t > 0 else 1.0
    return w0 * decay + (R / kappa) * (1.0 - decay)


def _root_split_factor(a: float, allow_small_exponent: bool):
    """Handle the a < 1 case of the root-splitting inequality."""
    if a >= 1.0:
        return 1.0, ()
    if not allow_small_exponent:
        raise DomainError(
            f"exponent a = {a} < 1: the root-splitting step needs the corrected "
            "constant; pass allow_small_exponent=True to apply it"
        )
    return 2.0 ** (1.0 / a - 1.0), ("small-exponent-corrected",)


def iss_envelope(
    lc: LyapConstants,
    u0_norm: float,
    g_sup: Union[float, Callable[[float], float]],
    q: float,
    allow_small_exponent: bool = False,
) -> Envelope:
    """Input-to-state envelope from the Lyapunov constants:

        B(t) = M*u0*E_q(-kappa t^q)^(1/a) + C*sup_{s<=t} |g|,
        kappa = c3/c2,  M = (c2/c1)^(1/a),  C = (c4/(c1*kappa))^(1/a).

    ``g_sup`` is either the global disturbance bound or a callable giving
    the running supremum up to t (nondecreasing).
    """
    _require_nonnegative(u0_norm=u0_norm)
    factor, flags = _root_split_factor(lc.a, allow_small_exponent)
    kappa = lc.kappa
    M = factor * (lc.c2 / lc.c1) ** (1.0 / lc.a)
    C = factor * (lc.c4 / (lc.c1 * kappa)) ** (1.0 / lc.a) if lc.c4 > 0 else 0.0
    if callable(g_sup):
        offset = (lambda t, _C=C, _g=g_sup: _C * float(_g(t))) if C > 0 else 0.0
    else:
        _require_nonnegative(g_sup=g_sup)
        offset = C * float(g_sup)
    return Envelope(
        kind="ISS",
        q=q,
        a=lc.a,
        M=M,
        lam=kappa,
        offset=offset,
        baseline=u0_norm,
        flags=flags,
    )


def ultimate_bound(alpha: float, beta: float, a: float, g_sup_star: float) -> float:
    """Asymptotic ceiling under a persistent disturbance:
    (beta * g_sup_star / alpha)^(1/a); zero iff the disturbance is zero."""
    _require_positive(alpha=alpha, beta=beta, a=a)
    _require_nonnegative(g_sup_star=g_sup_star)
    return (beta * g_sup_star / alpha) ** (1.0 / a)


def ultimate_envelope(
    lc: LyapConstants,
    alpha: float,
    beta: float,
    u0_norm: float,
    g_sup_star: float,
    q: float,
    allow_small_exponent: bool = False,
) -> Envelope:
    """Transient + ultimate-bound envelope for a persistently disturbed
    system: decay at rate alpha/c2 toward the ultimate ceiling."""
    _require_positive(alpha=alpha, beta=beta)
    _require_nonnegative(u0_norm=u0_norm, g_sup_star=g_sup_star)
    factor, flags = _root_split_factor(lc.a, allow_small_exponent)
    kappa = alpha / lc.c2
    M = factor * (lc.c2 / lc.c1) ** (1.0 / lc.a)
    offset = factor * (
        (beta * g_sup_star / (lc.c1 * kappa)) ** (1.0 / lc.a) if g_sup_star > 0 else 0.0
    )
    return Envelope(
        kind="Ultimate",
        q=q,
        a=lc.a,
        M=M,
        lam=kappa,
        offset=offset,
        baseline=u0_norm,
        flags=flags,
    )


@dataclass(frozen=True)
class LmiCertificate:
    """Quadratic certificate for D^q x = A x from A'P + PA + mu*P <= 0."""

    P: np.ndarray
    mu: float
    M: float
    q: float
    residual: float  # largest eigenvalue of A'P + PA + mu*P (should be <= 0)
    a: float = 2.0

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        P.setflags(write=False)
        object.__setattr__(self, "P", P)

    @property
    def lam(self) -> float:
        return self.mu

    def envelope(self, u0_norm: float) -> Envelope:
        _require_nonnegative(u0_norm=u0_norm)
        return Envelope(
            kind="ML", q=self.q, a=2.0, M=self.M, lam=self.mu, baseline=u0_norm
        )

    def describe(self) -> dict:
        return {
            "P": self.P.tolist(),
            "mu": self.mu,
            "M": self.M,
            "lambda": self.mu,
            "a": 2.0,
            "residual": self.residual,
        }


_LMI_RESIDUAL_TOL = 1e-9


def lmi_certificate(A, q: float) -> LmiCertificate:
    """Construct the quadratic certificate by solving A'P + PA = -I.

    With that P the largest admissible decay rate is mu = 1/eigmax(P), and
    the envelope overshoot is M = sqrt(eigmax(P)/eigmin(P)).  Raises
    NotHurwitz when no positive-definite solution exists.  For a user
    supplied P see :func:`lmi_certificate_from_p`.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"matrix must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix entries must be finite")
    eigs = np.linalg.eigvals(A)
    if np.max(eigs.real) >= 0.0:
        raise NotHurwitz(
            f"matrix has an eigenvalue with Re >= 0 (max Re = {np.max(eigs.real):.3g})"
        )
    P = solve_continuous_lyapunov(A.T, -np.eye(A.shape[0]))
    P = 0.5 * (P + P.T)
    return lmi_certificate_from_p(A, P, q)


def lmi_certificate_from_p(A, P, q: float) -> LmiCertificate:
    """Certificate from a user-supplied positive-definite P: takes the
    largest mu such that A'P + PA + mu*P stays negative semidefinite."""
    A = np.asarray(A, dtype=float)
    P = np.asarray(P, dtype=float)
    if not np.allclose(P, P.T, rtol=1e-10, atol=1e-12):
        raise DomainError("P must be symmetric")
    pe = np.linalg.eigvalsh(P)
    if pe[0] <= 0.0 or not np.all(np.isfinite(pe)):
        raise NotHurwitz("Lyapunov solution is not positive definite")
    S = A.T @ P + P @ A
    # largest mu with S + mu*P <= 0: generalized eigenproblem -S x = mu P x
    mu = float(np.min(_generalized_eigh(-S, P, eigvals_only=True)))
    if mu <= 0.0:
        raise NotHurwitz("no positive decay rate: A'P + PA is not negative definite")
    residual = float(np.max(np.linalg.eigvalsh(S + mu * P)))
    if residual > _LMI_RESIDUAL_TOL:
        raise NotHurwitz(
            f"matrix-inequality residual {residual:.3e} exceeds tolerance"
        )
    M = math.sqrt(pe[-1] / pe[0])
    return LmiCertificate(P=P, mu=mu, M=M, q=float(q), residual=residual)


def delay_envelope(
    c1: float,
    c2: float,
    alpha: float,
    a: float,
    q: float,
    phi_sup: float,
    allow_small_exponent: bool = False,
) -> Envelope:
    """Envelope for a constant-lag system from Krasovskii-functional
    constants: M = (c2/c1)^(1/a), lambda = alpha/c2, baseline = the
    supremum of the history-segment norm."""
    _require_positive(c1=c1, c2=c2, alpha=alpha, a=a)
    _require_nonnegative(phi_sup=phi_sup)
    if c1 > c2:
        raise DomainError(f"need c1 <= c2, got c1={c1} > c2={c2}")
    factor, flags = _root_split_factor(a, allow_small_exponent)
    return Envelope(
        kind="Delay",
        q=q,
        a=a,
        M=factor * (c2 / c1) ** (1.0 / a),
        lam=alpha / c2,
        baseline=phi_sup,
        flags=flags,
    )


@dataclass(frozen=True)
class SmallGainResult:
    """Uniform bounds for two interconnected decaying subsystems."""

    x_bound: float
    y_bound: float
    envelope: Envelope
    gain_product: float

    def describe(self) -> dict:
        d = self.envelope.describe()
        d.update(
            x_bound=self.x_bound, y_bound=self.y_bound, gain_product=self.gain_product
        )
        return d


def small_gain(
    M1: float,
    M2: float,
    kappa1: float,
    kappa2: float,
    gamma12: float,
    gamma21: float,
    x0_norm: float,
    y0_norm: float,
    q: float,
) -> SmallGainResult:
    """Combine two cross-gain decay estimates when gamma12*gamma21 < 1.

    Returns uniform bounds on the running suprema of both subsystem norms
    plus a conservative composite decay envelope on the sum (decay rate
    min(kappa1, kappa2)).  Raises GainTooLarge at gamma12*gamma21 >= 1:
    the certificate simply does not apply.
    """
    _require_positive(M1=M1, M2=M2, kappa1=kappa1, kappa2=kappa2)
    _require_nonnegative(
        gamma12=gamma12, gamma21=gamma21, x0_norm=x0_norm, y0_norm=y0_norm
    )
    flags = ()
    if M1 < 1.0 or M2 < 1.0:
        flags = ("overshoot-below-one",)
    product = gamma12 * gamma21
    if product >= 1.0:
        raise GainTooLarge(
            f"gain product gamma12*gamma21 = {product:.6g} >= 1: "
            "the interconnection bound does not apply"
        )
    denom = 1.0 - product
    x_bound = (M1 * x0_norm + gamma12 * M2 * y0_norm) / denom
    y_bound = (M2 * y0_norm + gamma21 * M1 * x0_norm) / denom
    M_combined = (M1 + M2 + gamma12 * M2 + gamma21 * M1) / denom
    env = Envelope(
        kind="SmallGain",
        q=q,
        a=1.0,
        M=M_combined,
        lam=min(kappa1, kappa2),
        baseline=x0_norm + y0_norm,
        flags=flags,
    )
    return SmallGainResult(
        x_bound=x_bound, y_bound=y_bound, envelope=env, gain_product=product
    )


def stochastic_bound(
    alpha: float,
    beta: float,
    c1: float,
    c2: float,
    a: float,
    w0: float,
    q: float,
    t: float,
) -> float:
    """Moment bound for additive-noise dynamics:

        E[d(u(t),0)^a] <= (w0/c1)*E_q(-kappa t^q)
                          + (beta/(c1*kappa))*(1 - E_q(-kappa t^q)),

    kappa = alpha/c2; the t -> infinity level is beta/(c1*kappa).
    """
    _require_positive(alpha=alpha, c1=c1, c2=c2, a=a)
    _require_nonnegative(beta=beta, w0=w0)
    kappa = alpha / c2
    return scalar_comparison_solution(w0, kappa, beta, q, t) / c1


def stochastic_bound_envelope(
    alpha: float,
    beta: float,
    c1: float,
    c2: float,
    a: float,
    w0: float,
    q: float,
) -> Envelope:
    """The same moment bound wrapped as an envelope curve (compared against
    E[d^a] directly, so no root is taken)."""
    _require_positive(alpha=alpha, c1=c1, c2=c2, a=a)
    _require_nonnegative(beta=beta, w0=w0)
    kappa = alpha / c2
    level = beta / (c1 * kappa)

    def curve(t: float) -> float:
        return stochastic_bound(alpha, beta, c1, c2, a, w0, q, t)

    flags = () if w0 / c1 >= level else ("rising-toward-level",)
    return Envelope(
        kind="Stochastic",
        q=q,
        a=a,
        M=1.0 / c1,
        lam=kappa,
        offset=level,
        baseline=w0,
        flags=flags,
        curve_fn=curve,
    )


@dataclass(frozen=True)
class ConverseReport:
    """Numerical converse construction: V(u0) as a truncated integral of
    trajectory norms, with fitted sandwich constants."""

    values: tuple  # V per sample
    initial_norms: tuple
    c1: float
    c2: float
    ratio: float  # c2/c1
    a: float
    t_trunc: float
    decrement_max_upjump: float
    decrement_pass: bool
    checkpoint_values: tuple  # per sample: tuple of V along the trajectory

    def describe(self) -> dict:
        return {
            "V": list(self.values),
            "initial_norms": list(self.initial_norms),
            "c1": self.c1,
            "c2": self.c2,
            "ratio": self.ratio,
            "a": self.a,
            "t_trunc": self.t_trunc,
            "decrement_max_upjump": self.decrement_max_upjump,
            "decrement_pass": self.decrement_pass,
        }


_DECAY_SCREEN_FRACTION = 0.1


def converse_lyapunov(
    template: Scenario,
    samples: Sequence[FuzzyNumber],
    t_trunc: float,
    a: float = 1.0,
    n_checkpoints: int = 6,
    decrement_rtol: float = 1e-6,
) -> ConverseReport:
    """Construct V(u0) = integral_0^T d(u(s; u0), 0)^a ds numerically.

    The truncation at T = t_trunc replaces the unbounded integral; it is
    meaningful only when trajectories have decayed well below their initial
    norm by T, which is enforced by a screen (norm at T below 10% of the
    initial norm for every nonzero sample; ConverseNotApplicable otherwise).

    The decrement check re-solves from states sampled along each
    trajectory and verifies t -> V(u(t)) never rises by more than
    decrement_rtol * V(u0).
    """
    if not samples:
        raise DomainError("need at least one sample")
    _require_positive(t_trunc=t_trunc, a=a)
    scn = template
    if scn.delay is not None or scn.noise is not None:
        raise DomainError("converse construction is defined for plain dynamics")
    n_steps = int(round(t_trunc / scn.step))
    horizon = n_steps * scn.step

    def v_of(u0: FuzzyNumber):
        from dataclasses import replace

        run = replace(scn, initial=u0, horizon=horizon)
        traj = solve_caputo(run)
        v = float(np.trapezoid(traj.norms**a, traj.times))
        return v, traj

    values = []
    norms0 = []
    checkpoint_values = []
    max_upjump = 0.0
    for u0 in samples:
        d0 = u0.norm()
        norms0.append(d0)
        v0, traj = v_of(u0)
        values.append(v0)
        if d0 > 0.0 and traj.norms[-1] > _DECAY_SCREEN_FRACTION * d0:
            raise ConverseNotApplicable(
                f"norm at t = {horizon:g} is {traj.norms[-1]:.3g}, not below "
                f"{_DECAY_SCREEN_FRACTION:.0%} of the initial norm {d0:.3g}; "
                "increase t_trunc"
            )
        # decrement along the trajectory: V evaluated by re-solving from
        # sampled states
        idx = np.linspace(0, len(traj.times) - 1, n_checkpoints + 1).astype(int)[1:]
        vs = [v0]
        for i in idx:
            vi, _ = v_of(traj.states[i])
            vs.append(vi)
        checkpoint_values.append(tuple(vs))
        jumps = np.diff(vs)
        if len(jumps):
            max_upjump = max(max_upjump, float(np.max(jumps)))

    tol_global = decrement_rtol * max(max(values), 1e-300)
    decrement_pass = max_upjump <= tol_global

    ratios = [v / d**a for v, d in zip(values, norms0) if d > 0.0]
    if not ratios:
        raise DomainError("all samples are the zero state; nothing to fit")
    c1 = min(ratios)
    c2 = max(ratios)
    return ConverseReport(
        values=tuple(values),
        initial_norms=tuple(norms0),
        c1=c1,
        c2=c2,
        ratio=c2 / c1 if c1 > 0 else math.inf,
        a=a,
        t_trunc=horizon,
        decrement_max_upjump=max_upjump,
        decrement_pass=decrement_pass,
        checkpoint_values=tuple(checkpoint_values),
    )


@dataclass(frozen=True)
class LaSalleReport:
    """Monotonicity diagnostic of a candidate V along a trajectory."""

    max_upjump: float
    monotone_pass: bool
    terminal_distance: float
    v_limit_estimate: float

    def describe(self) -> dict:
        return {
            "max_upjump": self.max_upjump,
            "monotone_pass": self.monotone_pass,
            "terminal_distance": self.terminal_distance,
            "v_limit_estimate": self.v_limit_estimate,
        }


def lasalle_check(
    traj: FuzzyTrajectory,
    v_rule: Callable,
    equilibria: Sequence[FuzzyNumber],
    tol: float = 1e-8,
) -> LaSalleReport:
    """Check that V(u(t)) is nonincreasing along the trajectory (within
    tol), estimate its limit, and report the terminal distance to the
    nearest listed equilibrium.  Purely diagnostic."""
    from .fuzzy import hausdorff

    if not equilibria:
        raise DomainError("need at least one equilibrium candidate")
    values = np.array([float(v_rule(s)) for s in traj.states])
    if not np.all(np.isfinite(values)):
        raise DomainError("V produced non-finite values")
    jumps = np.diff(values)
    max_up = float(np.max(jumps)) if len(jumps) else 0.0
    max_up = max(max_up, 0.0)
    terminal = traj.states[-1]
    dist = min(hausdorff(terminal, e) for e in equilibria)
    tail = values[max(1, int(0.9 * len(values))) :]
    return LaSalleReport(
        max_upjump=max_up,
        monotone_pass=max_up <= tol,
        terminal_distance=float(dist),
        v_limit_estimate=float(np.mean(tail)),
    )

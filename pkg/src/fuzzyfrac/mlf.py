"""Mittag-Leffler functions on the real line.

Evaluates the one- and two-parameter Mittag-Leffler functions

    E_a(z) = E_{a,1}(z),        E_{a,b}(z) = sum_k z^k / Gamma(a*k + b)

for orders ``0 < a <= 1`` and real arguments, plus the closed-form memory
convolution integral that turns E_{a,a} kernels into 1 - E_a values.

The negative axis is the accuracy-critical regime (decay profiles of
fractional dynamics are E_a(-lam * t**a)); there the implementation
guarantees ~1e-11 relative error by switching between three algorithms:

* power series with compensated (Kahan) summation while the largest series
  term stays small enough that cancellation cannot eat more than ~3 digits
  (threshold ``(-z)**(1/a) <= SERIES_EXPONENT_CAP``, capped at |z| <= 5);
* a certified truncation of the algebraic large-argument expansion
  ``-sum_k z**-k / Gamma(b - a*k)`` once |z| >= 30 (skipped for a > 0.98,
  where its remainder decays too slowly);
* otherwise the real integral representation obtained from the Hankel
  contour, integrated adaptively with breakpoints on the near-pole of its
  rational factor (the factor sharpens as a -> 1).

Positive arguments are supported best-effort for z <= 50 through the
(positive-term, cancellation-free) series; anything that cannot be
certified raises :class:`~fuzzyfrac.errors.AccuracyError` instead of
returning a silently wrong value.

Gamma values come from ``math.gamma`` / ``math.lgamma`` (CPython's libm
wrappers, accurate to a few ulp on (0, 172)) and ``scipy.special.rgamma``
for the reciprocal at negative arguments.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy.integrate import IntegrationWarning, quad
from scipy.special import hyp1f1, rgamma

from .errors import AccuracyError, DomainError

__all__ = ["MLParams", "ml_one", "ml_two", "ml_conv_integral"]

# Largest positive argument served at all (series overflows past this for
# small orders anyway; callers needing growth regimes are out of scope).
MAX_POSITIVE_Z = 50.0

# The series loses ~log10(e) * (-z)**(1/a) digits to cancellation for z < 0.
# exp(4) ~ 55 keeps the largest term small enough that even values of order
# 1e-3 (the E_{a,a} kernel decays fast) come out to ~1e-12 relative error;
# past the cap the integral representation takes over.
SERIES_EXPONENT_CAP = 4.0
# Never trust the float series past |z| = 5 even for a = 1.
SERIES_Z_CAP = 5.0

ASYMPTOTIC_MIN_X = 30.0
ASYMPTOTIC_MAX_ALPHA = 0.98

_RELTOL = 1e-11
_MAX_SERIES_TERMS = 2000


@dataclass(frozen=True)
class MLParams:
    """Validated (alpha, beta) parameter pair of E_{alpha,beta}."""

    alpha: float
    beta: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise DomainError(f"alpha must be finite and > 0, got {self.alpha}")
        if not math.isfinite(self.beta):
            raise DomainError(f"beta must be finite, got {self.beta}")


def ml_one(q: float, z: float) -> float:
    """One-parameter Mittag-Leffler function E_q(z) for 0 < q <= 1.

    Accuracy-guaranteed for z <= 0; best-effort (series) for 0 < z <= 50.
    """
    _check_order(q)
    _check_argument(z)
    return _evaluate(MLParams(q, 1.0), z)


def ml_two(q: float, b: float, z: float) -> float:
    """Two-parameter Mittag-Leffler function E_{q,b}(z).

    Supports 0 < q <= 1 and 0 < b <= 2; ``ml_two(q, 1.0, z)`` returns
    exactly the same value as ``ml_one(q, z)``.
    """
    _check_order(q)
    _check_argument(z)
    if not (math.isfinite(b) and 0.0 < b <= 2.0):
        raise DomainError(f"second parameter must lie in (0, 2], got {b}")
    return _evaluate(MLParams(q, b), z)


def ml_conv_integral(q: float, kappa: float, t: float) -> float:
    """Closed form of the memory-kernel convolution

        integral_0^t (t-s)**(q-1) * E_{q,q}(-kappa*(t-s)**q) ds
            = (1 - E_q(-kappa * t**q)) / kappa.

    Nonnegative, nondecreasing in t, with limit 1/kappa.
    """
    _check_order(q)
    if not (math.isfinite(kappa) and kappa > 0.0):
        raise DomainError(f"kappa must be finite and > 0, got {kappa}")
    if not (math.isfinite(t) and t >= 0.0):
        raise DomainError(f"t must be finite and >= 0, got {t}")
    if t == 0.0:
        return 0.0
    return (1.0 - ml_one(q, -kappa * t**q)) / kappa


# ---------------------------------------------------------------------------
# dispatch


def _check_order(q: float) -> None:
    if not (isinstance(q, (int, float)) and math.isfinite(q) and 0.0 < q <= 1.0):
        raise DomainError(f"order must lie in (0, 1], got {q}")


def _check_argument(z: float) -> None:
    if not (isinstance(z, (int, float)) and math.isfinite(float(z))):
        raise DomainError(f"argument must be finite, got {z}")
    if z > MAX_POSITIVE_Z:
        raise AccuracyError(
            f"accuracy not guaranteed for z = {z} > {MAX_POSITIVE_Z}; "
            "the growth regime is out of scope"
        )


def series_switch(alpha: float) -> float:
    """Largest |z| for which the float64 power series is trusted at z < 0."""
    return min(SERIES_Z_CAP, SERIES_EXPONENT_CAP**alpha)


def _evaluate(p: MLParams, z: float) -> float:
    z = float(z)
    alpha, beta = p.alpha, p.beta
    if z == 0.0:
        return 1.0 / math.gamma(beta)
    if z > 0.0:
        # Positive terms, no cancellation: the series is reliable whenever
        # it converges without overflow.
        return _series(alpha, beta, z)
    x = -z
    if alpha == 1.0:
        return _alpha_one(beta, z)
    if x <= series_switch(alpha):
        return _series(alpha, beta, z)
    if beta > 1.0:
        # Step beta down into (0, 1] where the integral representation is
        # integrable at r = 0:  E_{a,b}(z) = (E_{a,b-a}(z) - 1/Gamma(b-a)) / z.
        # No cancellation: for |z| past the series switch the subtracted
        # E-value is far smaller than 1/Gamma(b-a).
        steps = math.ceil((beta - 1.0) / alpha - 1e-12)
        b_low = beta - steps * alpha
        if b_low <= 0.0:  # land inside (0, 1]
            steps -= 1
            b_low = beta - steps * alpha
        value = _evaluate(MLParams(alpha, b_low), z)
        b = b_low
        for _ in range(steps):
            value = (value - 1.0 / math.gamma(b)) / z
            b += alpha
        return value
    if x >= ASYMPTOTIC_MIN_X and alpha <= ASYMPTOTIC_MAX_ALPHA:
        ok, value = _asymptotic(alpha, beta, z)
        if ok:
            return value
    return _integral_negative(alpha, beta, x)


def _alpha_one(beta: float, z: float) -> float:
    if beta == 1.0:
        return math.exp(z)
    if abs(z) <= SERIES_Z_CAP:
        return _series(1.0, beta, z)
    if beta == 2.0:
        return math.expm1(z) / z
    # E_{1,b}(z) = 1F1(1; b; z) / Gamma(b)
    value = float(hyp1f1(1.0, beta, z)) / math.gamma(beta)
    if not math.isfinite(value):
        raise AccuracyError(f"confluent-hypergeometric path failed at beta={beta}, z={z}")
    return value


# ---------------------------------------------------------------------------
# power series


def _series(alpha: float, beta: float, z: float) -> float:
    """Kahan-compensated power series; raises on overflow/non-convergence."""
    log_az = math.log(abs(z))
    sign_neg = z < 0.0
    total = 0.0
    comp = 0.0
    max_term = 0.0
    prev = math.inf
    decreasing = False
    for k in range(_MAX_SERIES_TERMS):
        log_term = k * log_az - math.lgamma(alpha * k + beta)
        if log_term > 700.0:
            raise AccuracyError(
                f"series term overflow at k={k} for E_({alpha},{beta})({z})"
            )
        term = math.exp(log_term)
        if sign_neg and (k & 1):
            term = -term
        mag = abs(term)
        max_term = max(max_term, mag)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if mag < prev:
            decreasing = True
        if decreasing and mag <= 1e-17 * max(abs(total), 1e-300):
            return total
        prev = mag
    raise AccuracyError(
        f"series did not converge within {_MAX_SERIES_TERMS} terms "
        f"for E_({alpha},{beta})({z})"
    )


# ---------------------------------------------------------------------------
# algebraic expansion for z -> -inf


def _asymptotic(alpha: float, beta: float, z: float) -> tuple[bool, float]:
    """Certified truncation of -sum_{k>=1} z**-k / Gamma(beta - alpha*k).

    Returns (certified, value); certified only when the smallest retained
    term bounds the truncation error below the relative target.  Terms where
    beta - alpha*k lands on a Gamma pole are exactly zero and are skipped
    (they must not trip the divergence detector).
    """
    total = 0.0
    prev_mag = None
    zinv = 1.0 / z
    zk = 1.0
    cert = None
    for k in range(1, 80):
        zk *= zinv
        rg = float(rgamma(beta - alpha * k))
        if rg == 0.0:
            continue
        term = -zk * rg
        mag = abs(term)
        if prev_mag is not None and mag >= prev_mag:
            cert = mag  # divergence onset: error ~ first omitted term
            break
        total += term
        prev_mag = mag
        if mag <= 0.05 * _RELTOL * abs(total):
            cert = mag
            break
    else:
        cert = prev_mag
    if cert is None or total == 0.0:
        return False, 0.0
    return cert <= _RELTOL * abs(total), total


# ---------------------------------------------------------------------------
# integral representation on the negative axis


def _integral_negative(alpha: float, beta: float, x: float) -> float:
    """E_{alpha,beta}(-x) for x > 0, 0 < alpha < 1, 0 < beta <= 1.

    Real form of the Hankel-contour representation:

        E = 1/(alpha*pi) * int_0^inf r**((1-beta)/alpha) * exp(-r**(1/alpha))
              * (r*sin(pi*(1-beta)) + x*sin(pi*(1-beta+alpha)))
              / (r**2 + 2*r*x*cos(pi*alpha) + x**2) dr.

    For alpha > 1/2 the rational factor has a near-pole at
    r0 = -x*cos(pi*alpha) of half-width x*sin(pi*alpha); those points are
    handed to the adaptive integrator as breakpoints.
    """
    inv_alpha = 1.0 / alpha
    power = (1.0 - beta) * inv_alpha
    s_beta = math.sin(math.pi * (1.0 - beta))
    s_mix = math.sin(math.pi * (1.0 - beta + alpha))
    cos_pa = math.cos(math.pi * alpha)
    x2 = x * x

    def kernel(r: float) -> float:
        den = r * r + 2.0 * r * x * cos_pa + x2
        num = r * s_beta + x * s_mix
        rp = r**power if power != 0.0 else 1.0
        return rp * math.exp(-(r**inv_alpha)) * num / den

    # exp(-r**(1/alpha)) underflows past this radius
    r_max = 745.0**alpha
    points = []
    if cos_pa < 0.0:
        r0 = -x * cos_pa
        if r0 < r_max:
            w = x * math.sin(math.pi * alpha)
            for cand in (r0 - 8 * w, r0 - w, r0, r0 + w, r0 + 8 * w):
                if 0.0 < cand < r_max:
                    points.append(cand)
    with warnings.catch_warnings():
        # quad's roundoff warnings are advisory; the returned abserr is
        # checked against the relative target below.
        warnings.simplefilter("ignore", IntegrationWarning)
        value, abserr = quad(
            kernel,
            0.0,
            r_max,
            points=points or None,
            limit=400,
            epsabs=1e-300,
            epsrel=1e-13,
        )
    value /= alpha * math.pi
    abserr /= alpha * math.pi
    if abserr > 100.0 * _RELTOL * max(abs(value), 1e-300):
        raise AccuracyError(
            f"integral representation did not converge to target accuracy "
            f"at E_({alpha},{beta})({-x}); estimated error {abserr:.2e}"
        )
    return value

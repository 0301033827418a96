"""Simulate -> certify -> verify pipelines, sweeps and report generation.

The central check is :func:`verify_envelope`: a pointwise comparison of a
trajectory norm (or Monte-Carlo moment) against a certificate envelope on
the solver grid, with a relative tolerance absorbing solver error and, for
moments, a three-standard-error statistical slack.

Reports are reproducible byte-for-byte for a fixed seed: the canonical
text excludes wall-clock timing (which is reported separately), and sweep
rows are emitted in grid order regardless of worker scheduling.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from . import certify as certify_mod
from .errors import ConfigError, DomainError, FuzzyFracError
from .fuzzy import FuzzyNumber, FuzzyVector
from .scenario import Scenario, make_scenario
from .solver import (
    FuzzyTrajectory,
    MomentTrajectory,
    solve_caputo,
    solve_delay,
    solve_stochastic,
)
from . import expr as expr_mod

__all__ = [
    "EnvelopeReport",
    "RunReport",
    "SweepResult",
    "verify_envelope",
    "run_scenario",
    "sweep",
    "scenario_from_config",
    "DEMOS",
    "demo_config",
    "write_trajectory_csv",
    "write_moment_csv",
    "read_trajectory_csv",
]

DEFAULT_RTOL = 0.02
DEFAULT_ATOL = 1e-9
ULTIMATE_TERMINAL_TOL = 0.05


@dataclass(frozen=True)
class EnvelopeReport:
    """Pointwise comparison of trajectory norm against an envelope."""

    n_points: int
    violations: int
    max_excess: float
    first_violation_t: Optional[float]
    passed: bool
    margins: np.ndarray  # B(t) - value(t), raw envelope without tolerances
    rtol: float
    atol: float

    def __post_init__(self):
        m = np.asarray(self.margins, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "margins", m)
        if self.passed != (self.violations == 0):
            raise DomainError("inconsistent report: passed != (violations == 0)")
        if self.passed and self.max_excess > 0:
            raise DomainError("inconsistent report: passing but max_excess > 0")

    def describe(self) -> dict:
        return {
            "n_points": self.n_points,
            "violations": self.violations,
            "max_excess": self.max_excess,
            "first_violation_t": self.first_violation_t,
            "pass": self.passed,
            "min_margin": float(np.min(self.margins)),
            "rtol": self.rtol,
            "atol": self.atol,
        }


def verify_envelope(
    traj: Union[FuzzyTrajectory, MomentTrajectory],
    env: certify_mod.Envelope,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> EnvelopeReport:
    """Check value(t) <= B(t)*(1+rtol) + atol on every grid node.

    For moment trajectories three standard errors are added to the bound
    side.  Pre-history nodes of delay trajectories (t < 0) are skipped: the
    envelope is defined from t = 0.
    """
    if rtol < 0 or atol < 0:
        raise DomainError("rtol and atol must be >= 0")
    if abs(traj.q - env.q) > 1e-12:
        raise DomainError(
            f"trajectory (q={traj.q}) and envelope (q={env.q}) disagree on the order"
        )
    if isinstance(traj, MomentTrajectory):
        times = traj.times
        values = traj.moment
        slack = 3.0 * traj.stderr
    else:
        k = traj.history_len
        times = traj.times[k:]
        values = traj.norms[k:]
        slack = 0.0
    curve = env.evaluate(times)
    bound = curve * (1.0 + rtol) + atol + slack
    exceed = values > bound
    violations = int(np.count_nonzero(exceed))
    with np.errstate(divide="ignore", invalid="ignore"):
        excess = values / bound - 1.0
    max_excess = float(np.max(excess))
    first_violation_t = float(times[np.argmax(exceed)]) if violations else None
    return EnvelopeReport(
        n_points=len(times),
        violations=violations,
        max_excess=max_excess,
        first_violation_t=first_violation_t,
        passed=violations == 0,
        margins=curve - values,
        rtol=rtol,
        atol=atol,
    )


# ---------------------------------------------------------------------------
# scenario/config plumbing


_SCENARIO_KEYS = {
    "q",
    "rhs",
    "matrix",
    "params",
    "initial",
    "disturbance",
    "delay",
    "noise",
    "horizon",
    "step",
    "levels",
}


def scenario_from_config(cfg: dict, path: str = "scenario") -> Scenario:
    """Build a Scenario from its configuration block (strict keys)."""
    if not isinstance(cfg, dict):
        raise ConfigError("must be a mapping", path)
    unknown = set(cfg) - _SCENARIO_KEYS
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", path)
    for key in ("q", "horizon", "step", "initial"):
        if key not in cfg:
            raise ConfigError(f"missing required key {key!r}", path)

    dist = cfg.get("disturbance")
    dist_expr = None
    dist_sup = None
    if dist is not None:
        if isinstance(dist, str):
            dist_expr = dist
        elif isinstance(dist, dict):
            unknown = set(dist) - {"expr", "sup"}
            if unknown:
                raise ConfigError(f"unknown keys {sorted(unknown)}", f"{path}.disturbance")
            dist_expr = dist.get("expr")
            dist_sup = dist.get("sup")
        else:
            raise ConfigError("must be an expression or mapping", f"{path}.disturbance")

    delay = cfg.get("delay") or {}
    if delay and set(delay) - {"tau", "history"}:
        raise ConfigError(
            f"unknown keys {sorted(set(delay) - {'tau', 'history'})}", f"{path}.delay"
        )
    noise = cfg.get("noise") or {}
    if noise and set(noise) - {"sigma", "paths", "seed"}:
        raise ConfigError(
            f"unknown keys {sorted(set(noise) - {'sigma', 'paths', 'seed'})}",
            f"{path}.noise",
        )

    try:
        return make_scenario(
            q=cfg["q"],
            horizon=cfg["horizon"],
            step=cfg["step"],
            initial=cfg["initial"],
            rhs=cfg.get("rhs"),
            params=cfg.get("params"),
            matrix=cfg.get("matrix"),
            disturbance=dist_expr,
            disturbance_sup=dist_sup,
            delay_tau=delay.get("tau"),
            delay_history=delay.get("history"),
            noise_sigma=noise.get("sigma"),
            noise_paths=noise.get("paths"),
            noise_seed=noise.get("seed", 0),
            levels=cfg.get("levels"),
        )
    except FuzzyFracError as exc:
        raise ConfigError(str(exc), path) from exc


def _running_sup(values: np.ndarray) -> np.ndarray:
    return np.maximum.accumulate(np.abs(values))


def _disturbance_sup_fn(scn: Scenario):
    """Running supremum of |g| on the scenario grid, as a callable of t."""
    if scn.disturbance is None:
        return None, 0.0
    times = scn.times
    vals = np.array(
        [
            float(expr_mod.evaluate(scn.disturbance, {**scn.params, "t": float(t)}))
            for t in times
        ]
    )
    runsup = _running_sup(vals)
    total = float(runsup[-1])
    if scn.disturbance_sup is not None:
        total = max(total, float(scn.disturbance_sup))

    def sup_at(t: float, _times=times, _runsup=runsup, _total=total) -> float:
        if math.isinf(t):
            return _total
        i = int(np.searchsorted(_times, t + 1e-15))
        i = max(1, min(i, len(_runsup)))
        return float(_runsup[i - 1])

    return sup_at, total


# ---------------------------------------------------------------------------
# run reports


@dataclass(frozen=True)
class RunReport:
    """Everything one simulate+certify+verify run produced.

    ``timing`` is informational only and excluded from the canonical text
    (reports must be byte-identical across repeated seeded runs).
    """

    scenario: dict
    certificate: Optional[dict]
    verification: Optional[dict]
    checks: dict
    summary: dict
    notes: tuple
    passed: bool
    timing: dict = field(default_factory=dict)
    trajectory: object = None  # FuzzyTrajectory | MomentTrajectory, not rendered

    def canonical_text(self) -> str:
        lines = ["[scenario]"]
        lines += _render_block(self.scenario)
        lines.append("[certificate]")
        lines += _render_block(self.certificate or {"kind": "none"})
        lines.append("[verification]")
        lines += _render_block(self.verification or {})
        if self.checks:
            lines.append("[checks]")
            lines += _render_block(self.checks)
        lines.append("[summary]")
        lines += _render_block(self.summary)
        if self.notes:
            lines.append("[notes]")
            lines += [f"- {n}" for n in self.notes]
        lines.append(f"result = {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()

    def timing_text(self) -> str:
        lines = ["[timing]"]
        lines += _render_block(self.timing)
        return "\n".join(lines) + "\n"


def _render_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_render_value(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_render_value(x)}" for k, x in v.items()) + "}"
    return str(v)


def _render_block(d: dict) -> list:
    return [f"{k} = {_render_value(v)}" for k, v in d.items()]


def _scenario_echo(scn: Scenario, cfg_levels=None) -> dict:
    if isinstance(scn.initial, FuzzyVector):
        init = [c.to_dict() for c in scn.initial.components]
        init_norm = scn.initial.norm()
    else:
        init = scn.initial.to_dict()
        init_norm = scn.initial.norm()
    out = {
        "q": scn.q,
        "horizon": scn.horizon,
        "step": scn.step,
        "initial_norm": init_norm,
    }
    if scn.rhs_src is not None:
        out["rhs"] = scn.rhs_src
    if scn.matrix is not None:
        out["matrix"] = scn.matrix.tolist()
    if scn.params:
        out["params"] = dict(sorted(scn.params.items()))
    if scn.disturbance_src is not None:
        out["disturbance"] = scn.disturbance_src
    if scn.delay is not None:
        out["delay"] = {
            "tau": scn.delay.tau,
            "tau_effective": scn.delay.tau_effective,
            "history": scn.delay.history_src,
        }
    if scn.noise is not None:
        out["noise"] = {
            "sigma": scn.noise.sigma,
            "paths": scn.noise.paths,
            "seed": scn.noise.seed,
        }
    out["levels"] = len(scn.initial.levels) - 1
    return out


_CERT_KEYS = {
    "lmi": set(),
    "iss": {"c1", "c2", "c3", "c4", "a"},
    "ultimate": {"c1", "c2", "alpha", "beta", "a", "terminal_tol"},
    "delay": {"c1", "c2", "alpha", "a"},
    "smallgain": {"M1", "M2", "kappa1", "kappa2", "gamma12", "gamma21"},
    "stochastic": {"alpha", "beta", "c1", "c2", "a", "w0"},
}


def run_scenario(
    scn: Scenario,
    certificate: Optional[dict] = None,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> RunReport:
    """Solve the scenario, build the requested certificate envelope, verify
    the trajectory against it, and assemble the report."""
    cert_cfg = dict(certificate or {})
    kind = cert_cfg.pop("kind", None)
    if kind is not None:
        if kind not in _CERT_KEYS:
            raise ConfigError(
                f"unknown kind {kind!r}; expected one of {sorted(_CERT_KEYS)}",
                "certificate.kind",
            )
        unknown = set(cert_cfg) - _CERT_KEYS[kind]
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}", f"certificate({kind})")

    timing = {}
    t0 = time.perf_counter()
    moment_exponent = float(cert_cfg.get("a", 2.0)) if kind == "stochastic" else None
    if scn.noise is not None:
        traj = solve_stochastic(scn, a=moment_exponent if moment_exponent else 2.0)
    elif scn.delay is not None:
        traj = solve_delay(scn)
    else:
        traj = solve_caputo(scn)
    timing["solve_s"] = time.perf_counter() - t0

    summary = _trajectory_summary(traj)
    notes = list(scn.notes)
    cert_desc = None
    verification = None
    checks = {}
    passed = True

    t0 = time.perf_counter()
    env = None
    verify_traj = traj
    if kind is not None:
        env, cert_desc, checks, notes2, verify_traj = _build_certificate(
            scn, kind, cert_cfg, traj
        )
        notes.extend(notes2)
    timing["certify_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if env is not None:
        report = verify_envelope(verify_traj, env, rtol=rtol, atol=atol)
        verification = report.describe()
        passed = report.passed
    for chk in checks.values():
        if isinstance(chk, dict) and chk.get("pass") is False:
            passed = False
    timing["verify_s"] = time.perf_counter() - t0
    timing["total_s"] = sum(timing.values())

    return RunReport(
        scenario=_scenario_echo(scn),
        certificate=cert_desc,
        verification=verification,
        checks=checks,
        summary=summary,
        notes=tuple(notes),
        passed=passed,
        timing=timing,
        trajectory=traj,
    )


def _trajectory_summary(traj) -> dict:
    if isinstance(traj, MomentTrajectory):
        return {
            "kind": "moment",
            "n_points": len(traj),
            "paths": traj.paths,
            "exponent": traj.a,
            "initial_moment": float(traj.moment[0]),
            "terminal_moment": float(traj.moment[-1]),
            "max_stderr": float(np.max(traj.stderr)),
        }
    diams = traj.diameters()
    return {
        "kind": "trajectory",
        "n_points": len(traj),
        "initial_norm": float(traj.norms[traj.history_len]),
        "terminal_norm": float(traj.norms[-1]),
        "min_diameter": float(np.min(diams)),
        "max_diameter": float(np.max(diams)),
    }


def _build_certificate(scn: Scenario, kind: str, cfg: dict, traj):
    """Returns (envelope, certificate_description, checks, notes,
    trajectory-to-verify); the last differs from ``traj`` only when the
    envelope bounds a derived quantity (the smallgain sum of norms)."""
    notes = []
    checks = {}
    u0_norm = scn.initial.norm()

    if kind == "lmi":
        if scn.matrix is None:
            raise ConfigError("lmi certificate needs a matrix system", "certificate")
        cert = certify_mod.lmi_certificate(scn.matrix, scn.q)
        env = cert.envelope(u0_norm)
        desc = {"kind": "lmi", **cert.describe()}
        return env, desc, checks, notes, traj

    if kind == "iss":
        lc = certify_mod.LyapConstants(
            c1=float(cfg.get("c1", 1.0)),
            c2=float(cfg.get("c2", 1.0)),
            c3=float(cfg.get("c3", 1.0)),
            c4=float(cfg.get("c4", 1.0)),
            a=float(cfg.get("a", 1.0)),
        )
        sup_fn, total = _disturbance_sup_fn(scn)
        env = certify_mod.iss_envelope(lc, u0_norm, sup_fn or 0.0, scn.q)
        desc = {
            "kind": "iss",
            "c1": lc.c1,
            "c2": lc.c2,
            "c3": lc.c3,
            "c4": lc.c4,
            "a": lc.a,
            **env.describe(),
        }
        return env, desc, checks, notes, traj

    if kind == "ultimate":
        lc = certify_mod.LyapConstants(
            c1=float(cfg.get("c1", 1.0)),
            c2=float(cfg.get("c2", 1.0)),
            c3=float(cfg.get("alpha", 1.0)),
            c4=0.0,
            a=float(cfg.get("a", 1.0)),
        )
        alpha = float(cfg.get("alpha", 1.0))
        beta = float(cfg.get("beta", 1.0))
        a = float(cfg.get("a", 1.0))
        _, g_total = _disturbance_sup_fn(scn)
        g_star = g_total**a
        bound = certify_mod.ultimate_bound(alpha, beta, a, g_star)
        env = certify_mod.ultimate_envelope(lc, alpha, beta, u0_norm, g_star, scn.q)
        terminal_tol = float(cfg.get("terminal_tol", ULTIMATE_TERMINAL_TOL))
        terminal = float(traj.norms[-1])
        checks["ultimate_terminal"] = {
            "bound": bound,
            "terminal_norm": terminal,
            "tolerance": terminal_tol * bound,
            "pass": bool(terminal <= bound * (1.0 + terminal_tol)),
        }
        desc = {"kind": "ultimate", "alpha": alpha, "beta": beta, **env.describe()}
        return env, desc, checks, notes, traj

    if kind == "delay":
        if scn.delay is None:
            raise ConfigError("delay certificate needs a delay block", "certificate")
        hist_norms = np.abs(
            [
                float(
                    expr_mod.evaluate(scn.delay.history, {**scn.params, "t": float(t)})
                )
                for t in np.linspace(-scn.delay.tau_effective, 0.0, 33)
            ]
        )
        phi_sup = max(float(np.max(hist_norms)), u0_norm)
        env = certify_mod.delay_envelope(
            c1=float(cfg.get("c1", 1.0)),
            c2=float(cfg.get("c2", 1.0)),
            alpha=float(cfg.get("alpha", 1.0)),
            a=float(cfg.get("a", 1.0)),
            q=scn.q,
            phi_sup=phi_sup,
        )
        desc = {"kind": "delay", "phi_sup": phi_sup, **env.describe()}
        return env, desc, checks, notes, traj

    if kind == "smallgain":
        if not isinstance(scn.initial, FuzzyVector) or len(scn.initial) != 2:
            raise ConfigError(
                "smallgain certificate needs a two-component system", "certificate"
            )
        x0, y0 = (c.norm() for c in scn.initial.components)
        result = certify_mod.small_gain(
            M1=float(cfg.get("M1", 1.0)),
            M2=float(cfg.get("M2", 1.0)),
            kappa1=float(cfg.get("kappa1", 1.0)),
            kappa2=float(cfg.get("kappa2", 1.0)),
            gamma12=float(cfg.get("gamma12", 0.0)),
            gamma21=float(cfg.get("gamma21", 0.0)),
            x0_norm=x0,
            y0_norm=y0,
            q=scn.q,
        )
        xs = traj.component_norm_history(0)
        ys = traj.component_norm_history(1)
        checks["smallgain_x_bound"] = {
            "bound": result.x_bound,
            "sup": float(np.max(xs)),
            "pass": bool(np.all(xs <= result.x_bound * (1.0 + 1e-9))),
        }
        checks["smallgain_y_bound"] = {
            "bound": result.y_bound,
            "sup": float(np.max(ys)),
            "pass": bool(np.all(ys <= result.y_bound * (1.0 + 1e-9))),
        }
        # the composite envelope bounds the sum of the subsystem norms
        env = result.envelope
        sum_traj = replace(traj, norms=xs + ys)
        desc = {"kind": "smallgain", **result.describe()}
        return env, desc, checks, notes, sum_traj

    if kind == "stochastic":
        if scn.noise is None:
            raise ConfigError(
                "stochastic certificate needs a noise block", "certificate"
            )
        a = float(cfg.get("a", 2.0))
        c1 = float(cfg.get("c1", 1.0))
        c2 = float(cfg.get("c2", 1.0))
        alpha = float(cfg.get("alpha", 1.0))
        beta = float(cfg.get("beta", scn.noise.sigma**2))
        w0 = float(cfg.get("w0", c2 * u0_norm**a))
        env = certify_mod.stochastic_bound_envelope(alpha, beta, c1, c2, a, w0, scn.q)
        desc = {
            "kind": "stochastic",
            "alpha": alpha,
            "beta": beta,
            "w0": w0,
            **env.describe(),
        }
        return env, desc, checks, notes, traj

    raise ConfigError(f"unhandled certificate kind {kind!r}", "certificate")


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepResult:
    """One report row per grid combination, in grid order."""

    grid_keys: tuple
    rows: tuple  # (index, overrides, RunReport | None, error | None)
    pass_rate: Optional[float]

    def table(self) -> list:
        out = []
        for index, overrides, report, error in self.rows:
            row = {"index": index, **overrides}
            if error is not None:
                row["status"] = f"error: {error}"
                row["pass"] = False
            else:
                row["status"] = "ok"
                row["pass"] = report.passed
            out.append(row)
        return out

    def canonical_text(self) -> str:
        lines = [f"sweep over {list(self.grid_keys)}"]
        for row in self.table():
            cells = ", ".join(f"{k}={_render_value(v)}" for k, v in row.items())
            lines.append(cells)
        rate = "n/a" if self.pass_rate is None else repr(self.pass_rate)
        lines.append(f"pass_rate = {rate}")
        return "\n".join(lines) + "\n"


MAX_SWEEP_COMBINATIONS = 10_000


def _apply_override(cfg: dict, dotted: str, value):
    parts = dotted.split(".")
    node = cfg
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot descend into {p!r}", dotted)
    node[parts[-1]] = value


def sweep(
    base_config: dict,
    grid: dict,
    workers: int = 1,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> SweepResult:
    """Run the scenario once per grid combination.

    ``grid`` maps dotted config paths (e.g. ``scenario.q``) to value lists;
    combinations are enumerated in row-major order over the keys as given.
    Individual failures are recorded per-row and never abort the sweep, and
    the result order is independent of worker scheduling.
    """
    keys = list(grid)
    values = [list(grid[k]) for k in keys]
    combos = list(itertools.product(*values)) if keys else []
    if len(combos) > MAX_SWEEP_COMBINATIONS:
        raise ConfigError(
            f"sweep grid has {len(combos)} combinations "
            f"(limit {MAX_SWEEP_COMBINATIONS})",
            "sweep",
        )

    def one(index_combo):
        index, combo = index_combo
        cfg = json.loads(json.dumps(base_config))  # deep copy
        overrides = dict(zip(keys, combo))
        for k, v in overrides.items():
            _apply_override(cfg, k, v)
        try:
            scn = scenario_from_config(cfg.get("scenario", {}))
            report = run_scenario(
                scn,
                cfg.get("certificate"),
                rtol=cfg.get("verify", {}).get("rtol", rtol),
                atol=cfg.get("verify", {}).get("atol", atol),
            )
            return index, overrides, report, None
        except FuzzyFracError as exc:
            return index, overrides, None, f"{type(exc).__name__}: {exc}"

    tasks = list(enumerate(combos))
    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, tasks))
    else:
        rows = [one(t) for t in tasks]
    rows.sort(key=lambda r: r[0])

    graded = [r for r in rows if r[2] is not None]
    pass_rate = (
        sum(1 for r in graded if r[2].passed) / len(rows) if rows else None
    )
    return SweepResult(grid_keys=tuple(keys), rows=tuple(rows), pass_rate=pass_rate)


# ---------------------------------------------------------------------------
# golden demo scenarios (one per certificate family)


DEMOS = {
    "iss": {
        "scenario": {
            "q": 0.5,
            "rhs": "-u",
            "initial": {"triangular": [0.8, 1.0, 1.2]},
            "disturbance": "0.1*sin(t)",
            "horizon": 10.0,
            "step": 0.01,
        },
        "certificate": {"kind": "iss", "c1": 1.0, "c2": 1.0, "c3": 1.0, "c4": 1.0, "a": 1.0},
        "verify": {"rtol": 0.02, "atol": 1e-9},
    },
    "lmi": {
        "scenario": {
            "q": 0.5,
            "matrix": [[-1.0]],
            "initial": [{"triangular": [0.5, 1.0, 1.5]}],
            "horizon": 10.0,
            "step": 0.01,
        },
        "certificate": {"kind": "lmi"},
        "verify": {"rtol": 0.02, "atol": 1e-9},
    },
    "ultimate": {
        "scenario": {
            "q": 0.7,
            "rhs": "-u",
            "initial": {"triangular": [0.6, 0.8, 1.0]},
            "disturbance": "0.5",
            "horizon": 50.0,
            "step": 0.025,
        },
        "certificate": {
            "kind": "ultimate",
            "alpha": 1.0,
            "beta": 1.0,
            "a": 1.0,
            "c1": 1.0,
            "c2": 1.0,
        },
        "verify": {"rtol": 0.02, "atol": 1e-9},
    },
    "delay": {
        "scenario": {
            "q": 0.7,
            "rhs": "-2*u + 0.5*ud",
            "initial": {"crisp": 1.0},
            "delay": {"tau": 0.5, "history": "1"},
            "horizon": 8.0,
            "step": 0.0078125,
        },
        "certificate": {"kind": "delay", "c1": 1.0, "c2": 1.25, "alpha": 1.5, "a": 1.0},
        "verify": {"rtol": 0.02, "atol": 1e-9},
    },
    "smallgain": {
        "scenario": {
            "q": 0.6,
            "matrix": [[-1.0, 0.4], [0.4, -1.0]],
            "initial": [
                {"triangular": [0.8, 1.0, 1.2]},
                {"triangular": [0.8, 1.0, 1.2]},
            ],
            "horizon": 20.0,
            "step": 0.01,
        },
        "certificate": {
            "kind": "smallgain",
            "M1": 1.0,
            "M2": 1.0,
            "kappa1": 1.0,
            "kappa2": 1.0,
            "gamma12": 0.4,
            "gamma21": 0.4,
        },
        "verify": {"rtol": 0.02, "atol": 1e-9},
    },
    "stochastic": {
        "scenario": {
            "q": 0.5,
            "rhs": "-u",
            "initial": {"crisp": 1.0},
            "noise": {"sigma": 0.1, "paths": 400, "seed": 2024},
            "horizon": 10.0,
            "step": 0.02,
        },
        "certificate": {
            "kind": "stochastic",
            "alpha": 2.0,
            "beta": 0.01,
            "c1": 1.0,
            "c2": 1.0,
            "a": 2.0,
        },
        "verify": {"rtol": 0.02, "atol": 1e-9},
    },
}


def demo_config(name: str, q: Optional[float] = None, seed: Optional[int] = None) -> dict:
    if name not in DEMOS:
        raise ConfigError(f"unknown demo {name!r}; expected one of {sorted(DEMOS)}", "demo")
    cfg = json.loads(json.dumps(DEMOS[name]))
    if q is not None:
        cfg["scenario"]["q"] = q
    if seed is not None and "noise" in cfg["scenario"]:
        cfg["scenario"]["noise"]["seed"] = seed
    return cfg


# ---------------------------------------------------------------------------
# CSV emission / ingestion


def write_trajectory_csv(traj: FuzzyTrajectory, path) -> None:
    """Columns: t, then per level lower/upper (per component for vector
    states), then the norm.  A JSON sidecar ``<path>.meta.json`` records the
    order and the level grid for lossless round-trips."""
    first = traj.states[0]
    vector = isinstance(first, FuzzyVector)
    levels = first.levels
    K1 = len(levels)
    if vector:
        n = len(first)
        header = ["t"]
        for i in range(n):
            for k in range(K1):
                header += [f"c{i}_l_{k}", f"c{i}_u_{k}"]
        header.append("norm")
    else:
        header = ["t"]
        for k in range(K1):
            header += [f"l_{k}", f"u_{k}"]
        header.append("norm")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i, t in enumerate(traj.times):
            s = traj.states[i]
            row = [repr(float(t))]
            comps = s.components if vector else (s,)
            for comp in comps:
                for k in range(K1):
                    row += [repr(float(comp.lower[k])), repr(float(comp.upper[k]))]
            row.append(repr(float(traj.norms[i])))
            w.writerow(row)
    meta = {
        "q": traj.q,
        "levels": levels.tolist(),
        "history_len": traj.history_len,
        "components": len(first) if vector else 1,
    }
    with open(str(path) + ".meta.json", "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")


def write_moment_csv(mt: MomentTrajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "moment", "stderr"])
        for t, mo, se in zip(mt.times, mt.moment, mt.stderr):
            w.writerow([repr(float(t)), repr(float(mo)), repr(float(se))])
    meta = {"q": mt.q, "a": mt.a, "paths": mt.paths}
    with open(str(path) + ".meta.json", "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_trajectory_csv(path, q: Optional[float] = None) -> FuzzyTrajectory:
    """Rebuild a trajectory from its CSV (and sidecar when present)."""
    meta = {}
    try:
        with open(str(path) + ".meta.json") as fh:
            meta = json.load(fh)
    except FileNotFoundError:
        pass
    if q is None:
        if "q" not in meta:
            raise ConfigError("no sidecar found: the order q must be supplied", str(path))
        q = float(meta["q"])
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, rows = rows[0], rows[1:]
    n_cols = len(header)
    K1 = None
    vector = header[1].startswith("c0_")
    if vector:
        n_comp = 1 + max(int(h.split("_")[0][1:]) for h in header[1:-1])
        K1 = (n_cols - 2) // (2 * n_comp)
    else:
        n_comp = 1
        K1 = (n_cols - 2) // 2
    levels = np.asarray(meta.get("levels", np.linspace(0.0, 1.0, K1)))
    times = []
    states = []
    norms = []
    for row in rows:
        times.append(float(row[0]))
        vals = np.array([float(x) for x in row[1:-1]])
        comps = []
        for i in range(n_comp):
            block = vals[i * 2 * K1 : (i + 1) * 2 * K1].reshape(K1, 2)
            comps.append(FuzzyNumber(levels, block[:, 0].copy(), block[:, 1].copy()))
        states.append(FuzzyVector(tuple(comps)) if vector else comps[0])
        norms.append(float(row[-1]))
    return FuzzyTrajectory(
        q=float(q),
        times=np.array(times),
        states=tuple(states),
        norms=np.array(norms),
        history_len=int(meta.get("history_len", 0)),
    )

"""Command-line front end.

Subcommands: ``mlf`` (special-function evaluation), ``simulate`` (trajectory
CSV), ``certify`` (constants -> certificate block), ``verify`` (stored
trajectory vs certificate), ``run`` (simulate + certify + verify), ``sweep``
(parameter grids), ``demo`` (built-in golden scenarios).

Configuration files are JSON with sections ``scenario``, ``certificate``,
``verify``, ``output`` and ``sweep``; unknown keys are rejected with their
location.  Exit codes: 0 pass, 1 envelope/certificate failure, 2
usage/configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, certify as certify_mod, harness, mlf
from .errors import (
    AccuracyError,
    CertificateError,
    ConfigError,
    DomainError,
    FuzzyFracError,
    ParseError,
    ScenarioError,
    SolverError,
    UnsupportedMatrixError,
)
from .scenario import Scenario

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

_CONFIG_KEYS = {"scenario", "certificate", "verify", "output", "sweep"}


def load_config(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"no such config file: {path}")
    try:
        cfg = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    unknown = set(cfg) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown top-level keys {sorted(unknown)}")
    return cfg


def _apply_overrides(cfg: dict, args) -> dict:
    scn = cfg.setdefault("scenario", {})
    if getattr(args, "seed", None) is not None and "noise" in scn:
        scn["noise"]["seed"] = args.seed
    for name in ("step", "horizon", "levels"):
        value = getattr(args, name, None)
        if value is not None:
            scn[name] = value
    ver = cfg.setdefault("verify", {})
    for name in ("rtol", "atol"):
        value = getattr(args, name, None)
        if value is not None:
            ver[name] = value
    return cfg


def _build_scenario(cfg: dict) -> Scenario:
    if "scenario" not in cfg:
        raise ConfigError("missing required section", "scenario")
    return harness.scenario_from_config(cfg["scenario"])


def _write_outputs(report, out_dir, prefix: strablish = "") -> None:
    pass


def _emit_run(report, out_dir, name: str, quiet: bool = False) -> None:
    text = report.canonical_text()
    if not quiet:
        sys.stdout.write(text)
        sys.stdout.write(report.timing_text())
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}_report.txt").write_text(text)
        (out / f"{name}_timing.txt").write_text(report.timing_text())
        traj = report.trajectory
        if traj is not None:
            from .solver import MomentTrajectory

            if isinstance(traj, MomentTrajectory):
                harness.write_moment_csv(traj, out / f"{name}_trajectory.csv")
            else:
                harness.write_trajectory_csv(traj, out / f"{name}_trajectory.csv")


def cmd_mlf(args) -> int:
    if args.mlf_op != "eval":
        raise ConfigError("mlf supports the 'eval' operation")
    if args.beta is None:
        value = mlf.ml_one(args.q, args.z)
    else:
        value = mlf.ml_two(args.q, args.beta, args.z)
    print(f"{value:.12g}")
    return EXIT_PASS


def cmd_simulate(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    scn = _build_scenario(cfg)
    report = harness.run_scenario(scn, certificate=None)
    out_dir = args.out or cfg.get("output", {}).get("dir")
    _emit_run(report, out_dir, Path(args.config).stem, quiet=args.quiet)
    if out_dir is None and args.quiet:
        pass
    return EXIT_PASS


def cmd_run(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    scn = _build_scenario(cfg)
    ver = cfg.get("verify", {})
    report = harness.run_scenario(
        scn,
        cfg.get("certificate"),
        rtol=ver.get("rtol", harness.DEFAULT_RTOL),
        atol=ver.get("atol", harness.DEFAULT_ATOL),
    )
    out_dir = args.out or cfg.get("output", {}).get("dir")
    _emit_run(report, out_dir, Path(args.config).stem, quiet=args.quiet)
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_verify(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    traj = harness.read_trajectory_csv(args.trajectory)
    cert = cfg.get("certificate")
    if not cert:
        raise ConfigError("missing required section", "certificate")
    scn = _build_scenario(cfg)
    env, desc, checks, _notes, verify_traj = harness._build_certificate(
        scn, cert.get("kind"), {k: v for k, v in cert.items() if k != "kind"}, traj
    )
    ver = cfg.get("verify", {})
    report = harness.verify_envelope(
        verify_traj if verify_traj is not traj else traj,
        env,
        rtol=ver.get("rtol", harness.DEFAULT_RTOL),
        atol=ver.get("atol", harness.DEFAULT_ATOL),
    )
    print("[certificate]")
    for line in harness._render_block(desc):
        print(line)
    print("[verification]")
    for line in harness._render_block(report.describe()):
        print(line)
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_sweep(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    grid = cfg.get("sweep")
    if not grid:
        raise ConfigError("missing required section", "sweep")
    result = harness.sweep(
        {k: v for k, v in cfg.items() if k != "sweep"},
        grid,
        workers=args.workers,
    )
    text = result.canonical_text()
    sys.stdout.write(text)
    out_dir = args.out or cfg.get("output", {}).get("dir")
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.txt").write_text(text)
        rows = result.table()
        if rows:
            import csv as _csv

            with open(out / "sweep.csv", "w", newline="") as fh:
                w = _csv.DictWriter(fh, fieldnames=list(rows[0]))
                w.writeheader()
                w.writerows(rows)
    all_ok = all(row["pass"] for row in result.table()) if result.rows else True
    return EXIT_PASS if all_ok else EXIT_FAIL


def cmd_demo(args) -> int:
    names = sorted(harness.DEMOS) if args.name == "all" else [args.name]
    reports = {}

    def one(name: str):
        cfg = harness.demo_config(name, q=args.q, seed=args.seed)
        cfg = _apply_overrides(cfg, args)
        scn = _build_scenario(cfg)
        ver = cfg.get("verify", {})
        return name, harness.run_scenario(
            scn,
            cfg.get("certificate"),
            rtol=ver.get("rtol", harness.DEFAULT_RTOL),
            atol=ver.get("atol", harness.DEFAULT_ATOL),
        )

    if args.workers > 1 and len(names) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            for name, report in pool.map(one, names):
                reports[name] = report
    else:
        for name in names:
            n, r = one(name)
            reports[n] = r

    ok = True
    for name in names:
        report = reports[name]
        print(f"== demo {name}: {'PASS' if report.passed else 'FAIL'}")
        _emit_run(report, args.out, f"demo_{name}", quiet=not args.verbose)
        ok = ok and report.passed
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_certify(args) -> int:
    kind = args.cert_kind
    q = args.q
    if kind == "lmi":
        A = json.loads(args.matrix)
        cert = certify_mod.lmi_certificate(A, q)
        desc = cert.describe()
    elif kind == "iss":
        lc = certify_mod.LyapConstants(args.c1, args.c2, args.c3, args.c4, args.a)
        env = certify_mod.iss_envelope(lc, args.u0_norm, args.g_sup, q)
        desc = env.describe()
    elif kind == "ultimate":
        desc = {
            "bound": certify_mod.ultimate_bound(args.alpha, args.beta, args.a, args.g_sup)
        }
    elif kind == "delay":
        env = certify_mod.delay_envelope(
            args.c1, args.c2, args.alpha, args.a, q, args.phi_sup
        )
        desc = env.describe()
    elif kind == "smallgain":
        result = certify_mod.small_gain(
            args.m1,
            args.m2,
            args.kappa1,
            args.kappa2,
            args.gamma12,
            args.gamma21,
            args.x0,
            args.y0,
            q,
        )
        desc = result.describe()
    elif kind == "stochastic":
        desc = certify_mod.stochastic_bound_envelope(
            args.alpha, args.beta, args.c1, args.c2, args.a, args.w0, q
        ).describe()
        if args.t is not None:
            desc["bound_at_t"] = certify_mod.stochastic_bound(
                args.alpha, args.beta, args.c1, args.c2, args.a, args.w0, q, args.t
            )
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown certificate kind {kind!r}")
    print(f"[certificate {kind}]")
    for line in harness._render_block(desc):
        print(line)
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fuzzyfrac",
        description="simulate fuzzy fractional dynamics and verify stability envelopes",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mlf", help="evaluate the decay special functions")
    p.add_argument("mlf_op", choices=["eval"])
    p.add_argument("--q", type=float, required=True, help="order in (0, 1]")
    p.add_argument("--beta", type=float, default=None, help="second parameter")
    p.add_argument("--z", type=float, required=True, help="argument")
    p.set_defaults(func=cmd_mlf)

    def common_run_flags(p, workers=False):
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override noise seed")
        p.add_argument("--rtol", type=float, default=None)
        p.add_argument("--atol", type=float, default=None)
        p.add_argument("--levels", type=int, default=None, help="level-grid resolution")
        p.add_argument("--step", type=float, default=None, help="override step h")
        p.add_argument("--horizon", type=float, default=None, help="override horizon T")
        if workers:
            p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("simulate", help="integrate a scenario and emit CSV")
    p.add_argument("config")
    p.add_argument("--quiet", action="store_true")
    common_run_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("run", help="simulate + certify + verify")
    p.add_argument("config")
    p.add_argument("--quiet", action="store_true")
    common_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="check a stored trajectory against a certificate")
    p.add_argument("config")
    p.add_argument("--trajectory", required=True, help="trajectory CSV from simulate")
    common_run_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="run a parameter grid")
    p.add_argument("config")
    common_run_flags(p, workers=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("demo", help="run a built-in golden scenario")
    p.add_argument("name", choices=sorted(harness.DEMOS) + ["all"])
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--verbose", action="store_true", help="print full reports")
    common_run_flags(p, workers=True)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("certify", help="compute certificate constants")
    cs = p.add_subparsers(dest="cert_kind", required=True)

    c = cs.add_parser("lmi")
    c.add_argument("--matrix", required=True, help="JSON matrix, e.g. [[-1]]")
    c.add_argument("--q", type=float, required=True)

    c = cs.add_parser("iss")
    for name in ("c1", "c2", "c3", "c4"):
        c.add_argument(f"--{name}", type=float, required=True)
    c.add_argument("--a", type=float, default=1.0)
    c.add_argument("--q", type=float, required=True)
    c.add_argument("--u0-norm", dest="u0_norm", type=float, required=True)
    c.add_argument("--g-sup", dest="g_sup", type=float, default=0.0)

    c = cs.add_parser("ultimate")
    c.add_argument("--alpha", type=float, required=True)
    c.add_argument("--beta", type=float, required=True)
    c.add_argument("--a", type=float, default=1.0)
    c.add_argument("--g-sup", dest="g_sup", type=float, required=True)
    c.add_argument("--q", type=float, default=0.5)

    c = cs.add_parser("delay")
    for name in ("c1", "c2", "alpha"):
        c.add_argument(f"--{name}", type=float, required=True)
    c.add_argument("--a", type=float, default=1.0)
    c.add_argument("--q", type=float, required=True)
    c.add_argument("--phi-sup", dest="phi_sup", type=float, required=True)

    c = cs.add_parser("smallgain")
    c.add_argument("--m1", type=float, default=1.0)
    c.add_argument("--m2", type=float, default=1.0)
    c.add_argument("--kappa1", type=float, default=1.0)
    c.add_argument("--kappa2", type=float, default=1.0)
    c.add_argument("--gamma12", type=float, required=True)
    c.add_argument("--gamma21", type=float, required=True)
    c.add_argument("--x0", type=float, required=True)
    c.add_argument("--y0", type=float, required=True)
    c.add_argument("--q", type=float, required=True)

    c = cs.add_parser("stochastic")
    c.add_argument("--alpha", type=float, required=True)
    c.add_argument("--beta", type=float, required=True)
    c.add_argument("--c1", type=float, default=1.0)
    c.add_argument("--c2", type=float, default=1.0)
    c.add_argument("--a", type=float, default=2.0)
    c.add_argument("--w0", type=float, required=True)
    c.add_argument("--q", type=float, required=True)
    c.add_argument("--t", type=float, default=None)

    p.set_defaults(func=cmd_certify)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors already; normalize others
        return int(exc.code) if exc.code else EXIT_PASS
    try:
        return args.func(args)
    except (ConfigError, ScenarioError, ParseError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverError, UnsupportedMatrixError, AccuracyError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CertificateError as exc:
        print(f"certificate not granted: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except FuzzyFracError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

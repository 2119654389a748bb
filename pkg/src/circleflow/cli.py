"""Command-line front end.

Subcommands: simulate, check-symbol, verify, expmap, logmap.
Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 dynamical failure (blow-up, leaving the chart, non-convergence).
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .diffeo import Diffeo
from .errors import (BlowUp, ConfigurationError, ConstraintDrift, DegeneratePoints, DomainError,
                     NoConvergence, NotADiffeomorphism, OutsideDomain, RangeViolation,
                     UnsupportedOrder)
from .expmap import DEFAULT_DT, exp_id, log_map
from .geodesic import GeodesicState, diagnostics, integrate_euler, integrate_lagrangian
from .homogeneous import Constraint, integrate_constrained, project_to_fixed
from .multiplier import (MultiplierSymbol, apply, builtin, load_symbol_table, order_bound_check,
                         parse_operator, symbol_condition_check)
from .snapshots import fmt, read_snapshot, write_diffeo, write_field, write_json, write_snapshot
from .spectral import GridSpec, PeriodicField, random_field
from .verify import SUITES, run_suites

OUTPUT_ROOT_ENV = "CIRCLEFLOW_OUTPUT_ROOT"
EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_DYNAMICS = 0, 1, 2, 3

CONFIG_ERRORS = (ConfigurationError, DomainError, UnsupportedOrder, DegeneratePoints,
                 NotADiffeomorphism, RangeViolation, yaml.YAMLError)
DYNAMIC_ERRORS = (BlowUp, OutsideDomain, NoConvergence, ConstraintDrift)


# ---------------------------------------------------------------------------
# scenarios


@dataclass
class Scenario:
    operator: MultiplierSymbol
    operator_echo: dict
    grid: GridSpec
    constraint: Constraint | None
    initial: dict
    T: float = 1.0
    dt: float = 1e-3
    adaptive: bool = False
    cadence: int = 100
    form: str = "lagrangian"
    outputs: dict = field(default_factory=dict)
    target: dict | None = None
    log_options: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)
    path: Path | None = None


def _operator(spec) -> tuple[MultiplierSymbol, dict]:
    if isinstance(spec, str):
        P = parse_operator(spec)
        return P, {"name": P.name, "params": dict(P.params)}
    if isinstance(spec, dict):
        spec = dict(spec)
        order = spec.pop("order", None)
        if "table" in spec:
            P = load_symbol_table(spec["table"])
        elif "name" in spec:
            name = spec.pop("name")
            params = spec.pop("params", {}) or {}
            params.update(spec)
            P = builtin(name, **{k: float(v) for k, v in params.items()})
        else:
            raise ConfigurationError("operator needs 'name' or 'table'")
        if order is not None:
            P = P.with_order(float(order))
        return P, {"name": P.name, "params": dict(P.params), "order_r": P.order_r}
    raise ConfigurationError("operator must be a string or a mapping")


def _number(d: dict, key: str, default, kind=float, lo=None):
    val = d.get(key, default)
    try:
        val = kind(val)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{key} must be a {kind.__name__}, got {val!r}") from None
    if lo is not None and val < lo:
        raise ConfigurationError(f"{key} must be >= {lo}, got {val}")
    return val


def load_scenario(path) -> Scenario:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"scenario file {path} does not exist")
    raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    if not isinstance(raw, dict):
        raise ConfigurationError("scenario must be a mapping")
    return scenario_from_dict(raw, path)


def scenario_from_dict(raw: dict, path: Path | None = None) -> Scenario:
    known = {"operator", "grid", "constraint", "initial", "integrator", "outputs", "target", "log"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigurationError(f"unknown scenario keys: {sorted(unknown)}")
    if "operator" not in raw:
        raise ConfigurationError("scenario needs an 'operator' entry")
    P, echo = _operator(raw["operator"])
    grid_cfg = raw.get("grid", {}) or {}
    n_points = _number(grid_cfg, "n_points", 128, int)
    try:
        grid = GridSpec(n_points)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None
    constraint = None
    ccfg = raw.get("constraint")
    if ccfg and ccfg != "none":
        if isinstance(ccfg, str):
            ccfg = {"kind": ccfg}
        kind = ccfg.get("kind", "none")
        if kind == "fix1":
            constraint = Constraint.fix1(*ccfg.get("points", [0.0]))
        elif kind == "fix3":
            constraint = (Constraint.fix3(ccfg["points"]) if "points" in ccfg
                          else Constraint.fix3())
        elif kind != "none":
            raise ConfigurationError(f"unknown constraint kind {kind!r}")
    integ = raw.get("integrator", {}) or {}
    sc = Scenario(
        operator=P, operator_echo=echo, grid=grid, constraint=constraint,
        initial=raw.get("initial", {"preset": "zero"}) or {"preset": "zero"},
        T=_number(integ, "T", 1.0, float, 0.0),
        dt=_number(integ, "dt", 1e-3, float),
        adaptive=bool(integ.get("adaptive", False)),
        cadence=_number(integ, "cadence", 100, int, 1),
        form=str(integ.get("form", "lagrangian")),
        outputs=raw.get("outputs", {}) or {},
        target=raw.get("target"),
        log_options=raw.get("log", {}) or {},
        raw=raw, path=path,
    )
    if sc.dt <= 0:
        raise ConfigurationError("dt must be positive")
    if sc.form not in ("lagrangian", "euler"):
        raise ConfigurationError("integrator.form must be 'lagrangian' or 'euler'")
    if sc.form == "euler" and constraint is not None:
        raise ConfigurationError("constrained runs use the lagrangian form")
    return sc


def _modes(d) -> dict:
    return {int(k): float(v) for k, v in (d or {}).items()}


def build_field(grid: GridSpec, spec: dict, seed: int) -> PeriodicField:
    """Named preset or explicit cos/sin coefficient lists."""
    if not isinstance(spec, dict):
        raise ConfigurationError("initial condition must be a mapping")
    preset = spec.get("preset")
    scale = float(spec.get("amplitude", 1.0))
    if preset is None:
        return PeriodicField.trig(grid, cos=_modes(spec.get("cos")), sin=_modes(spec.get("sin")),
                                  mean=float(spec.get("mean", 0.0)))
    if preset == "zero":
        return PeriodicField.zeros(grid)
    if preset == "ch_reference":
        return PeriodicField.trig(grid, cos={1: 0.2}, sin={2: 0.1}) * scale
    if preset == "random":
        band = int(spec.get("band", 8))
        rng = np.random.default_rng(seed)
        return random_field(grid, rng, band, decay=float(spec.get("decay", 2.0)), amplitude=scale)
    raise ConfigurationError(f"unknown initial preset {preset!r}")


def output_dir(args_out, scenario: Scenario | None, label: str) -> Path:
    if args_out:
        return Path(args_out)
    if scenario is not None and scenario.outputs.get("dir"):
        return Path(scenario.outputs["dir"])
    root = Path(os.environ.get(OUTPUT_ROOT_ENV, "circleflow-runs"))
    stem = scenario.path.stem if scenario is not None and scenario.path else label
    return root / stem


# ---------------------------------------------------------------------------
# simulate


def _write_diag_csv(path: Path, rows: list):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("t", "energy", "noether_drift", "mean_momentum", "mu_drift",
                    "constraint_drift"))
        for r in rows:
            w.writerow([fmt(v) for v in r])


def simulate(sc: Scenario, out: Path, seed: int = 0) -> tuple[dict, int]:
    """Run a scenario; returns (report, exit code). Partial outputs are kept on blow-up."""
    A = sc.operator
    u0 = build_field(sc.grid, sc.initial, seed)
    if sc.constraint is not None:
        u0 = project_to_fixed(u0, sc.constraint)
    start = time.perf_counter()
    if sc.form == "euler":
        traj = integrate_euler(A, u0, sc.T, sc.dt, cadence=sc.cadence, adaptive=sc.adaptive)
    elif sc.constraint is not None:
        traj = integrate_constrained(A, sc.constraint, u0, sc.T, sc.dt, cadence=sc.cadence,
                                     adaptive=sc.adaptive)
    else:
        traj = integrate_lagrangian(A, GeodesicState(Diffeo.identity(sc.grid), u0), sc.T, sc.dt,
                                    cadence=sc.cadence, adaptive=sc.adaptive)
    wall = time.perf_counter() - start

    out.mkdir(parents=True, exist_ok=True)
    zero = PeriodicField.zeros(sc.grid)
    rows = []
    e0 = nf0 = mu0 = None
    extrema = {"energy_drift": 0.0, "noether_drift": 0.0, "mu_drift": 0.0,
               "constraint_drift": 0.0}
    for idx, state in enumerate(traj.states):
        if sc.form == "euler":
            u, m, phi_disp, v = state.u, state.m, zero, state.u
            energy = 0.5 * float(np.mean(u.samples() * m.samples()))
            noether = 0.0
        else:
            u = state.eulerian_velocity()
            m = apply(A, u)
            phi_disp, v = state.phi.displacement, state.v
            d = diagnostics(A, state, nf0)
            if nf0 is None:
                nf0 = d.noether_field
            energy, noether = d.energy, d.noether_drift
        if e0 is None:
            e0, mu0 = energy, m.mean
        drift_c = 0.0
        if sc.constraint is not None:
            drift_c = max(sc.constraint.drift(phi_disp), sc.constraint.drift(v))
        e_drift = abs(energy - e0) / abs(e0) if e0 else abs(energy - e0)
        mu_d = abs(m.mean - mu0)
        extrema["energy_drift"] = max(extrema["energy_drift"], e_drift)
        extrema["noether_drift"] = max(extrema["noether_drift"], noether)
        extrema["mu_drift"] = max(extrema["mu_drift"], mu_d)
        extrema["constraint_drift"] = max(extrema["constraint_drift"], drift_c)
        rows.append((state.t, energy, noether, m.mean, mu_d, drift_c))
        write_snapshot(out / "snapshots" / f"snap_{idx:05d}", state.t, u, phi_disp, v, m,
                       sc.operator_echo)
    _write_diag_csv(out / "diagnostics.csv", rows)
    report = {
        "scenario": sc.raw,
        "seed": seed,
        "operator": sc.operator_echo,
        "convention": "period 2π, factor i",
        "final_time": traj.final_time,
        "requested_time": sc.T,
        "blowup": traj.blowup is not None,
        "blowup_message": traj.blowup,
        "diagnostics": extrema,
        "snapshots": len(traj.states),
        "wall_clock_seconds": round(wall, 3),
    }
    write_json(out / "report.json", report)
    return report, (EXIT_OK if traj.completed else EXIT_DYNAMICS)


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    sc = load_scenario(args.scenario)
    out = output_dir(args.out, sc, "simulate")
    report, code = simulate(sc, out, args.seed)
    status = "completed" if code == EXIT_OK else f"stopped early: {report['blowup_message']}"
    print(f"simulate: {status}; t = {report['final_time']:.6g}; outputs in {out}")
    for key, val in report["diagnostics"].items():
        print(f"  {key}: {val:.3e}")
    return code


def cmd_check_symbol(args) -> int:
    if args.table:
        P = load_symbol_table(args.table)
    elif args.operator:
        P = parse_operator(args.operator)
    else:
        raise ConfigurationError("check-symbol needs --operator or --table")
    if args.order is not None:
        P = P.with_order(args.order)
    rep = symbol_condition_check(P, n_max=args.nmax, xi_max=args.ximax)
    c_est, bound_ok = order_bound_check(P, args.kmax)
    payload = rep.to_dict()
    payload["order_bound"] = {"k_max": args.kmax, "C_estimate": c_est, "pass": bound_ok}
    payload["overall_pass"] = rep.overall_pass and bound_ok
    out = output_dir(args.out, None, "check-symbol")
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "symbol_report.json", payload)
    for n, sup, ok in rep.per_n:
        print(f"  n={n}: sup ratio {sup:.4e} {'PASS' if ok else 'FAIL'}")
    print(f"  order bound: C ~ {c_est:.4e} {'PASS' if bound_ok else 'FAIL'}")
    print(f"check-symbol {P.name} (r={P.order_r:g}): {'PASS' if payload['overall_pass'] else 'FAIL'}")
    return EXIT_OK if payload["overall_pass"] else EXIT_VERIFY


def cmd_verify(args) -> int:
    results = run_suites(args.suite, seed=args.seed)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} ({r.seconds:.1f} s)")
        for c in r.checks:
            print(f"    {'ok ' if c.passed else 'BAD'} {c.label}: {c.value:.3e} ({c.mode} {c.threshold:g})")
    out = output_dir(args.out, None, "verify")
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "verify_report.json",
               {"selector": args.suite, "seed": args.seed,
                "pass": all(r.passed for r in results),
                "suites": [r.to_dict() for r in results]})
    failing = [f"{r.name}: {', '.join(r.failing())}" for r in results if not r.passed]
    if failing:
        print("failing properties:\n  " + "\n  ".join(failing))
        return EXIT_VERIFY
    return EXIT_OK


def cmd_expmap(args) -> int:
    sc = load_scenario(args.scenario)
    v0 = build_field(sc.grid, sc.initial, args.seed)
    dt = float((sc.raw.get("integrator") or {}).get("dt", DEFAULT_DT))
    phi = exp_id(sc.operator, v0, dt)
    out = output_dir(args.out, sc, "expmap")
    write_diffeo(out / "exp", phi.displacement, sc.operator_echo,
                 {"dt": dt, "initial_velocity": sc.initial})
    print(f"expmap: wrote {out / 'exp.csv'} (min phi_x = {phi.min_derivative():.6f})")
    return EXIT_OK


def _target(sc: Scenario) -> Diffeo:
    spec = sc.target
    if not isinstance(spec, dict):
        raise ConfigurationError("logmap scenario needs a 'target' mapping")
    if "file" in spec:
        snap = read_snapshot(spec["file"])
        if snap["grid"] != sc.grid:
            raise ConfigurationError("target file grid differs from the scenario grid")
        return Diffeo(snap["fields"]["phi_displacement"])
    if "rotation" in spec:
        return Diffeo.rotation(sc.grid, float(spec["rotation"]))
    if "displacement" in spec:
        return Diffeo(build_field(sc.grid, spec["displacement"], 0))
    raise ConfigurationError("target needs 'file', 'rotation' or 'displacement'")


def cmd_logmap(args) -> int:
    sc = load_scenario(args.scenario)
    target = _target(sc)
    opts = sc.log_options
    dt = float((sc.raw.get("integrator") or {}).get("dt", DEFAULT_DT))
    v = log_map(sc.operator, target, max_iter=int(opts.get("max_iter", 30)),
                tol=float(opts.get("tol", 1e-12)), dt=dt)
    out = output_dir(args.out, sc, "logmap")
    write_field(out / "log", v, sc.operator_echo, {"dt": dt})
    print(f"logmap: wrote {out / 'log.csv'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="circleflow",
                                description="Geodesic flows of Fourier-multiplier metrics on circle diffeomorphisms")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scenario=True):
        if scenario:
            sp.add_argument("--scenario", required=True, help="YAML scenario file")
        sp.add_argument("--out", help=f"output directory (default: ${OUTPUT_ROOT_ENV}/<name>)")
        sp.add_argument("--seed", type=int, default=0, help="seed for random draws")

    common(sub.add_parser("simulate", help="integrate a scenario and write snapshots"))
    cs = sub.add_parser("check-symbol", help="symbol-condition and order-bound checks")
    common(cs, scenario=False)
    cs.add_argument("--operator", help="built-in operator, e.g. lambda_2s:s=0.75")
    cs.add_argument("--table", help="custom symbol table file")
    cs.add_argument("--order", type=float, help="override the declared order r")
    cs.add_argument("--nmax", type=int, default=4)
    cs.add_argument("--ximax", type=float, default=1e3)
    cs.add_argument("--kmax", type=int, default=4096, help="range of the order-bound scan")
    vf = sub.add_parser("verify", help="run verification suites")
    common(vf, scenario=False)
    vf.add_argument("--suite", default="all", help=f"one of {', '.join(SUITES)} or all")
    common(sub.add_parser("expmap", help="time-one geodesic map from the identity"))
    common(sub.add_parser("logmap", help="initial velocity reaching a target diffeo"))
    return p


COMMANDS = {"simulate": cmd_simulate, "check-symbol": cmd_check_symbol, "verify": cmd_verify,
            "expmap": cmd_expmap, "logmap": cmd_logmap}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except CONFIG_ERRORS as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DYNAMIC_ERRORS as exc:
        print(f"dynamical failure: {exc}", file=sys.stderr)
        return EXIT_DYNAMICS


if __name__ == "__main__":
    sys.exit(main())

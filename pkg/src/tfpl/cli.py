"""Command-line front end.

Five modes, selected with ``--mode``:

eval      apply the operator to the configured initial data (or a loaded
          snapshot) and write the nodal values in snapshot format
simulate  integrate the parabolic problem; write the final state, the
          residual history, and SVG plots
diagnose  simulate, then run the qualitative check battery and write
          ``diagnostics.csv``
oracle    run the built-in reference battery (closed-form kernel values,
          cross-discretization checks) and write ``oracle.csv``
report    summarize the CSV artifacts of a previous run directory

Configuration is an INI file; every section and key is validated against
a whitelist so typos fail loudly instead of silently using a default.
All CSV artifacts are deterministic: identical config + seed produce
byte-identical files (worker-thread count included).

Exit codes: 0 success / all checks pass, 1 at least one check failed,
2 configuration or usage error, 3 numerical abort (non-finite values).
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass, field as dataclass_field
from typing import Optional

import numpy as np

from .core_types import (
    DiagnosticsReport,
    InitialData,
    OperatorParams,
    ReactionTerm,
    ReflectionSpec,
    SimulationConfig,
    TemperingFunction,
    param_hash,
)

__all__ = ["main", "ConfigError", "parse_config"]


class ConfigError(Exception):
    """Invalid configuration file or option combination."""


# ----------------------------------------------------------------------
# config file parsing
# ----------------------------------------------------------------------

_KNOWN_KEYS = {
    "operator": {"n", "s", "p", "lambda", "c_norm", "tempering"},
    "reaction": {"kind"},
    "grid": {"kind", "h"},
    "quadrature": {"hole_rho", "r_cut", "eps_tail", "angular", "max_depth",
                   "eps_quad"},
    "simulation": {"initial", "t_end", "dt", "dt_max", "tol_steady",
                   "steady_window", "snapshot_every", "load"},
    "diagnostics": {"checks", "alphas", "antisym_alphas", "reflection_tol",
                    "delta_strip", "band", "subsolution_core", "depth"},
    "run": {"out", "seed", "threads", "json", "force_oracle_failure"},
}

_ALL_CHECKS = ("dichotomy", "hopf", "moving_plane", "antisym", "narrow",
               "barrier", "subsolution")

_DEFAULT_ALPHAS = (-0.9, -0.75, -0.6, -0.45, -0.3, -0.15, 0.0)
_DEFAULT_ANTISYM_ALPHAS = (-0.5, -0.25, 0.0)


def _num(section: str, key: str, text: str) -> float:
    """Parse a float, accepting exact fractions like '1/64'."""
    text = text.strip()
    try:
        if "/" in text:
            a, b = text.split("/")
            return float(a) / float(b)
        return float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse number {text!r}") from exc


def _int(section: str, key: str, text: str) -> int:
    try:
        return int(text.strip())
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse integer {text!r}") from exc


def _bool(section: str, key: str, text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"[{section}] {key}: cannot parse boolean {text!r}")


def _num_list(section: str, key: str, text: str) -> tuple:
    return tuple(_num(section, key, part) for part in text.split(",") if part.strip())


def _parse_initial(text: str, n: int) -> InitialData:
    """Parse the initial-data label syntax.

    zero | barrier[:amp] | random[:amp[:seed]] |
    bump:amp:c1[:c2[:c3]]:width[;more bumps]
    """
    text = text.strip()
    head = text.split(":", 1)[0]
    if head == "zero":
        return InitialData(kind="zero")
    if head == "barrier":
        amp = float(text.split(":", 1)[1]) if ":" in text else 0.5
        return InitialData(kind="barrier", amplitude=amp)
    if head == "random":
        parts = text.split(":")
        amp = float(parts[1]) if len(parts) > 1 else 0.5
        seed = int(parts[2]) if len(parts) > 2 else 0
        return InitialData(kind="random", amplitude=amp, seed=seed)
    if head == "bump":
        body = text.split(":", 1)
        if len(body) < 2 or not body[1]:
            raise ConfigError("bump initial data needs amp:center:width groups")
        amps, centers, widths = [], [], []
        for group in body[1].split(";"):
            parts = group.split(":")
            if len(parts) != n + 2:
                raise ConfigError(
                    f"bump group {group!r}: expected amp, {n} center "
                    f"coordinate(s), width")
            amps.append(float(parts[0]))
            centers.append(tuple(float(x) for x in parts[1:1 + n]))
            widths.append(float(parts[-1]))
        return InitialData(kind="bump", amplitudes=tuple(amps),
                           centers=tuple(centers), widths=tuple(widths))
    raise ConfigError(f"unknown initial-data kind {head!r}")


@dataclass
class DiagOptions:
    checks: tuple = _ALL_CHECKS
    alphas: tuple = _DEFAULT_ALPHAS
    antisym_alphas: tuple = _DEFAULT_ANTISYM_ALPHAS
    reflection_tol: Optional[float] = None
    delta_strip: float = 0.1
    band: Optional[tuple] = None
    subsolution_core: float = 0.3
    depth: int = 1


@dataclass
class RunSetup:
    """Everything parsed from the config file (CLI flags override [run])."""

    sim: SimulationConfig
    diag: DiagOptions = dataclass_field(default_factory=DiagOptions)
    load: Optional[str] = None
    out: Optional[str] = None
    seed: int = 0
    threads: Optional[int] = None
    write_json: bool = False
    force_oracle_failure: bool = False


def parse_config(path: str) -> RunSetup:
    cfg = configparser.ConfigParser(interpolation=None)
    try:
        read = cfg.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not read:
        raise ConfigError(f"config file not found: {path}")

    for section in cfg.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"unknown section [{section}] "
                              f"(known: {', '.join(sorted(_KNOWN_KEYS))})")
        for key in cfg[section]:
            if key not in _KNOWN_KEYS[section]:
                raise ConfigError(
                    f"unknown key {key!r} in [{section}] "
                    f"(known: {', '.join(sorted(_KNOWN_KEYS[section]))})")

    if "operator" not in cfg:
        raise ConfigError("missing required section [operator]")
    op = cfg["operator"]
    for required in ("n", "s", "p"):
        if required not in op:
            raise ConfigError(f"[operator] must set {required!r}")

    try:
        tempering = TemperingFunction.from_label(op.get("tempering", "identity"))
    except ValueError as exc:
        raise ConfigError(f"[operator] tempering: {exc}") from exc
    try:
        params = OperatorParams(
            n=_int("operator", "n", op["n"]),
            s=_num("operator", "s", op["s"]),
            p=_num("operator", "p", op["p"]),
            lam=_num("operator", "lambda", op.get("lambda", "0")),
            c_norm=_num("operator", "c_norm", op.get("c_norm", "1")),
            f=tempering,
        )
    except ValueError as exc:
        raise ConfigError(f"[operator]: {exc}") from exc

    try:
        reaction = ReactionTerm.from_label(cfg.get("reaction", "kind",
                                                   fallback="zero"))
    except ValueError as exc:
        raise ConfigError(f"[reaction] kind: {exc}") from exc

    grid = cfg["grid"] if "grid" in cfg else {}
    field_kind = str(grid.get("kind", "radial")).strip()
    h = _num("grid", "h", grid.get("h", "1/64"))

    quad = None
    if "quadrature" in cfg:
        q = cfg["quadrature"]
        from . import operator as op_mod
        kwargs = {}
        if "hole_rho" in q:
            kwargs["hole_rho"] = _num("quadrature", "hole_rho", q["hole_rho"])
        if "r_cut" in q:
            kwargs["r_cut"] = _num("quadrature", "r_cut", q["r_cut"])
        if "eps_tail" in q:
            kwargs["eps_tail"] = _num("quadrature", "eps_tail", q["eps_tail"])
        if "angular" in q:
            kwargs["angular"] = _int("quadrature", "angular", q["angular"])
        if "max_depth" in q:
            kwargs["max_depth"] = _int("quadrature", "max_depth", q["max_depth"])
        if "eps_quad" in q:
            kwargs["eps_quad"] = _num("quadrature", "eps_quad", q["eps_quad"])
        try:
            quad = op_mod.QuadratureSpec(**kwargs)
        except ValueError as exc:
            raise ConfigError(f"[quadrature]: {exc}") from exc

    simsec = cfg["simulation"] if "simulation" in cfg else {}
    initial = _parse_initial(simsec.get("initial", "barrier:0.5"), params.n)
    dt_text = str(simsec.get("dt", "auto")).strip().lower()
    dt = None if dt_text in ("auto", "none", "") else _num("simulation", "dt", dt_text)

    runsec = cfg["run"] if "run" in cfg else {}
    seed = _int("run", "seed", runsec.get("seed", "0"))

    try:
        sim = SimulationConfig(
            params=params,
            reaction=reaction,
            field_kind=field_kind,
            h=h,
            initial=initial,
            t_end=_num("simulation", "t_end", simsec.get("t_end", "10")),
            dt=dt,
            dt_max=_num("simulation", "dt_max", simsec.get("dt_max", "0.05")),
            tol_steady=_num("simulation", "tol_steady",
                            simsec.get("tol_steady", "1e-6")),
            steady_window=_num("simulation", "steady_window",
                               simsec.get("steady_window", "1.0")),
            snapshot_every=_num("simulation", "snapshot_every",
                                simsec.get("snapshot_every", "0.5")),
            seed=seed,
            quad=quad,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    diag = DiagOptions()
    if "diagnostics" in cfg:
        d = cfg["diagnostics"]
        if "checks" in d:
            names = tuple(x.strip() for x in d["checks"].split(",") if x.strip())
            unknown = [x for x in names if x not in _ALL_CHECKS]
            if unknown:
                raise ConfigError(f"[diagnostics] checks: unknown {unknown} "
                                  f"(known: {', '.join(_ALL_CHECKS)})")
            diag.checks = names
        if "alphas" in d:
            diag.alphas = _num_list("diagnostics", "alphas", d["alphas"])
        if "antisym_alphas" in d:
            diag.antisym_alphas = _num_list("diagnostics", "antisym_alphas",
                                            d["antisym_alphas"])
        if "reflection_tol" in d:
            diag.reflection_tol = _num("diagnostics", "reflection_tol",
                                       d["reflection_tol"])
        if "delta_strip" in d:
            diag.delta_strip = _num("diagnostics", "delta_strip", d["delta_strip"])
        if "band" in d:
            lo_hi = d["band"].split(":")
            if len(lo_hi) != 2:
                raise ConfigError("[diagnostics] band: expected lo:hi")
            diag.band = (_num("diagnostics", "band", lo_hi[0]),
                         _num("diagnostics", "band", lo_hi[1]))
        if "subsolution_core" in d:
            diag.subsolution_core = _num("diagnostics", "subsolution_core",
                                         d["subsolution_core"])
        if "depth" in d:
            diag.depth = _int("diagnostics", "depth", d["depth"])

    return RunSetup(
        sim=sim,
        diag=diag,
        load=simsec.get("load") or None,
        out=runsec.get("out") or None,
        seed=seed,
        threads=_int("run", "threads", runsec["threads"]) if "threads" in runsec else None,
        write_json=_bool("run", "json", runsec.get("json", "false")),
        force_oracle_failure=_bool("run", "force_oracle_failure",
                                   runsec.get("force_oracle_failure", "false")),
    )


# ----------------------------------------------------------------------
# artifact writers
# ----------------------------------------------------------------------

def _write_residuals(path, times, residuals):
    lines = ["t,residual"]
    lines += [f"{t:.16e},{r:.16e}" for t, r in zip(times, residuals)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _profile_series(u):
    """(radii/coords, values) along a radial ray or the grid midline."""
    from .core_types import GridField, RadialField
    if isinstance(u, RadialField):
        return u.radii, u.values
    assert isinstance(u, GridField)
    idx = [u.K] * u.n
    xs = u.axis_coords()
    vals = np.array([u.values[tuple([i] + idx[1:])] for i in range(len(xs))])
    return xs, vals


def _plot_run(out, traj, profile):
    from . import svgplot
    if traj.residual_times:
        svgplot.line_plot(os.path.join(out, "residual_history.svg"),
                          traj.residual_times,
                          [("|du/dt|_inf", np.asarray(traj.residuals))],
                          title="residual history", xlabel="t",
                          ylabel="residual", ylog=True)
    xs, vals = _profile_series(profile.field)
    svgplot.line_plot(os.path.join(out, "profile.svg"), xs,
                      [("u(final)", vals)], title="final profile",
                      xlabel="axis coordinate", ylabel="u")


def _print_records(records):
    width = max((len(r.check) for r in records), default=10)
    for r in records:
        thr = "" if not math.isfinite(r.threshold) else f" (thr {r.threshold:.3g})"
        print(f"  {r.verdict.upper():>4}  {r.check:<{width}}  "
              f"{r.value: .6e}{thr}")


def _write_meta(out, args, setup, extra):
    meta = {
        "mode": args.mode,
        "param_hash": param_hash(setup.sim.params, setup.sim.initial.label),
        "params": {
            "n": setup.sim.params.n, "s": setup.sim.params.s,
            "p": setup.sim.params.p, "lambda": setup.sim.params.lam,
            "c_norm": setup.sim.params.c_norm,
            "tempering": setup.sim.params.f.label,
        },
        "field_kind": setup.sim.field_kind,
        "h": setup.sim.h,
        "reaction": setup.sim.reaction.label,
        "initial": setup.sim.initial.label,
        "seed": setup.seed,
    }
    meta.update(extra)
    with open(os.path.join(out, "run_meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ----------------------------------------------------------------------
# modes
# ----------------------------------------------------------------------

def _initial_state(setup: RunSetup):
    """Initial field + time, honoring [simulation] load= if present."""
    from . import solver
    if setup.load:
        u, params, t = solver.load_snapshot(setup.load, expect=setup.sim.params)
        return u, t
    return setup.sim.build_initial(), 0.0


def cmd_eval(args, setup: RunSetup, out: str) -> int:
    from . import operator as op_mod
    from . import solver
    from .core_types import GridField

    u, t = _initial_state(setup)
    if isinstance(u, GridField):
        values_field = op_mod.eval_grid_all(u, setup.sim.params, setup.sim.quad)
        interior = values_field.values[values_field.interior_mask()]
    else:
        vals = op_mod.eval_radial_all(u, setup.sim.params, setup.sim.quad)
        values_field = u.with_values(np.append(vals, 0.0))
        interior = vals
    path = os.path.join(out, "operator_values.csv")
    solver.save_snapshot(values_field, path, setup.sim.params, t)
    print(f"operator values written: {path}")
    print(f"  |I[u]|_inf = {np.max(np.abs(interior)):.6e}   "
          f"min = {np.min(interior):.6e}   max = {np.max(interior):.6e}")
    if setup.write_json:
        _write_meta(out, args, setup, {"artifact": "operator_values.csv",
                                       "t": t})
    return 0


def cmd_simulate(args, setup: RunSetup, out: str) -> int:
    from . import solver

    u0, t0 = _initial_state(setup)
    traj, profile = solver.run(setup.sim, u0=u0)
    solver.save_snapshot(profile.field, os.path.join(out, "final.csv"),
                         setup.sim.params, t0 + profile.t_reached)
    _write_residuals(os.path.join(out, "residuals.csv"),
                     traj.residual_times, traj.residuals)
    _plot_run(out, traj, profile)
    status = "converged" if profile.converged else "reached t_end"
    print(f"simulate: {status} at t = {profile.t_reached:.6g} "
          f"({traj.steps} steps), residual = {profile.residual:.3e}, "
          f"max u = {profile.field.norm_inf():.6e}")
    print(f"artifacts in {out}: final.csv residuals.csv "
          f"residual_history.svg profile.svg")
    if setup.write_json:
        _write_meta(out, args, setup, {
            "converged": bool(profile.converged),
            "t_reached": profile.t_reached,
            "steps": traj.steps,
            "residual": profile.residual,
            "sup_norm": profile.field.norm_inf(),
        })
    return 0


def _run_checks(setup: RunSetup, traj, profile) -> DiagnosticsReport:
    from . import diagnostics as diag_mod

    sim = setup.sim
    d = setup.diag
    report = DiagnosticsReport(sim.params,
                               run_detail=f"{sim.field_kind}:h={sim.h:.12g}:"
                                          f"{sim.initial.label}")
    report.add("run.converged", 1.0 if profile.converged else 0.0)
    report.add("run.residual", profile.residual, sim.tol_steady,
               "pass" if profile.converged else "info")
    report.add("run.sup_norm", profile.field.norm_inf())

    dres = None
    if "dichotomy" in d.checks:
        dres = diag_mod.dichotomy_check(profile, sim.params)
        for rec in dres.records():
            report.add(*rec)

    if "hopf" in d.checks:
        hres = diag_mod.hopf_ratio(profile, sim.params, band=d.band)
        for rec in hres.records():
            report.add(*rec)

    if "moving_plane" in d.checks:
        scan = diag_mod.moving_plane_scan(profile, d.alphas,
                                          tol=d.reflection_tol)
        for rec in scan.records():
            report.add(*rec)
        # informational asymmetry probe on the initial snapshot: a
        # translation-asymmetric start is legitimate, so never a failure
        if traj is not None and traj.fields:
            early = diag_mod.moving_plane_scan(traj.fields[0], d.alphas,
                                               tol=d.reflection_tol)
            finite = early.minima[np.isfinite(early.minima)]
            if finite.size:
                worst = float(finite.min())
                report.add("asymmetry.initial.worst_min", worst,
                           -early.tol, "info")
                if worst < -early.tol:
                    print(f"  note: initial data is asymmetric "
                          f"(worst reflection min {worst:.3e})")

    if "antisym" in d.checks and traj is not None:
        for alpha in d.antisym_alphas:
            try:
                res = diag_mod.antisymmetric_evolution_check(
                    traj, ReflectionSpec(alpha=alpha), tol=d.reflection_tol)
            except ValueError as exc:
                report.add(f"antisym.skipped.alpha={alpha:g}", 0.0,
                           float("nan"), "info")
                print(f"  note: antisym skipped at alpha={alpha:g}: {exc}")
                continue
            for rec in res.records():
                report.add(*rec)

    if "narrow" in d.checks and traj is not None and d.antisym_alphas:
        alpha = d.antisym_alphas[0]
        try:
            res = diag_mod.narrow_region_check(
                traj, ReflectionSpec(alpha=alpha), d.delta_strip,
                tol=d.reflection_tol)
            for rec in res.records():
                report.add(*rec)
        except ValueError as exc:
            report.add(f"narrow.skipped.alpha={alpha:g}", 0.0,
                       float("nan"), "info")
            print(f"  note: narrow skipped at alpha={alpha:g}: {exc}")

    if "barrier" in d.checks:
        bres = diag_mod.barrier_boundedness_scan(sim.params, quad=sim.quad)
        for rec in bres.records():
            report.add(*rec)

    if "subsolution" in d.checks:
        positive = dres is not None and dres.verdict == "positive"
        if positive and profile.converged:
            sres = diag_mod.subsolution_comparison_test(
                profile, sim.params,
                sspec=diag_mod.SubsolutionSpec(r_core=d.subsolution_core),
                quad=sim.quad, depth=d.depth)
            for rec in sres.records():
                report.add(*rec)
        else:
            report.add("subsolution.skipped", 0.0, float("nan"), "info")

    return report


def cmd_diagnose(args, setup: RunSetup, out: str) -> int:
    from . import solver

    u0, t0 = _initial_state(setup)
    traj, profile = solver.run(setup.sim, u0=u0)
    solver.save_snapshot(profile.field, os.path.join(out, "final.csv"),
                         setup.sim.params, t0 + profile.t_reached)
    _write_residuals(os.path.join(out, "residuals.csv"),
                     traj.residual_times, traj.residuals)
    _plot_run(out, traj, profile)

    report = _run_checks(setup, traj, profile)
    report.write(os.path.join(out, "diagnostics.csv"))
    _plot_diag(out, setup, traj, profile)

    print(f"diagnose: {len(report.records)} records, "
          f"{len(report.failed)} failed")
    _print_records(report.records)
    print(f"artifacts in {out}: diagnostics.csv final.csv residuals.csv + svg")
    if setup.write_json:
        _write_meta(out, args, setup, {
            "converged": bool(profile.converged),
            "t_reached": profile.t_reached,
            "records": len(report.records),
            "failed": [r.check for r in report.failed],
        })
    return 1 if report.failed else 0


def _plot_diag(out, setup: RunSetup, traj, profile):
    from . import diagnostics as diag_mod
    from . import svgplot

    d = setup.diag
    if "moving_plane" in d.checks:
        scan = diag_mod.moving_plane_scan(profile, d.alphas,
                                          tol=d.reflection_tol)
        mask = np.isfinite(scan.minima)
        if mask.any():
            svgplot.line_plot(os.path.join(out, "moving_plane.svg"),
                              scan.alphas[mask],
                              [("min psi", scan.minima[mask])],
                              title="reflection minima vs plane position",
                              xlabel="alpha", ylabel="min psi")
    if "antisym" in d.checks and traj is not None and len(traj.times) > 1:
        series, times = [], None
        for alpha in d.antisym_alphas:
            try:
                res = diag_mod.antisymmetric_evolution_check(
                    traj, ReflectionSpec(alpha=alpha), tol=d.reflection_tol)
            except ValueError:
                continue
            series.append((f"alpha={alpha:g}", res.minima))
            times = res.times
        if series:
            svgplot.line_plot(os.path.join(out, "antisymmetry.svg"),
                              times, series,
                              title="reflection minima along the flow",
                              xlabel="t", ylabel="min psi")


# ----------------------------------------------------------------------
# oracle battery
# ----------------------------------------------------------------------

def _oracle_rows(params: Optional[OperatorParams]):
    """Deterministic reference battery.

    Values with closed forms are checked against frozen constants; the
    rest are cross-discretization consistency checks.  Runs in a few
    seconds and touches no compiled kernels.
    """
    from . import diagnostics as diag_mod
    from . import kernel as kern
    from . import operator as op_mod
    from .core_types import IDENTITY_TEMPERING, RadialField

    rows = []

    def add(check, value, threshold, passed):
        rows.append((check, float(value), float(threshold),
                     "pass" if passed else "fail"))

    # kernel point values against closed forms
    base = OperatorParams(n=2, s=0.5, p=2.0, lam=0.0, c_norm=1.0)
    v = kern.kernel_weight(1.0, base)
    add("oracle.kernel.unit_weight", abs(v - 1.0), 1e-15, abs(v - 1.0) <= 1e-15)

    tempered = OperatorParams(n=2, s=0.5, p=2.0, lam=0.1, c_norm=1.0,
                              f=IDENTITY_TEMPERING)
    expect = math.exp(-0.2) / 8.0          # e^{-lam r} / r^{n+sp} at r=2
    v = kern.kernel_weight(2.0, tempered)
    rel = abs(v - expect) / expect
    add("oracle.kernel.tempered_weight", rel, 1e-15, rel <= 1e-15)

    # closed-form tail mass: 2 pi / (sp R^{sp}) at lam=0, n=2, sp=1
    expect = 0.2 * math.pi
    v = kern.tail_mass(10.0, base)
    rel = abs(v - expect) / expect
    add("oracle.kernel.tail_closed_form", rel, 1e-15, rel <= 1e-15)

    p3 = OperatorParams(n=3, s=0.65, p=2.0, lam=0.0, c_norm=1.3)
    rel = abs(kern.tail_mass_numeric(0.7, p3) - kern.tail_mass(0.7, p3)) \
        / kern.tail_mass(0.7, p3)
    add("oracle.kernel.tail_numeric_untempered", rel, 1e-12, rel <= 1e-12)

    damped = OperatorParams(n=2, s=0.4, p=3.0, lam=0.3, c_norm=1.0,
                            f=IDENTITY_TEMPERING)
    bound = kern.tail_mass(0.5, damped)
    numeric = kern.tail_mass_numeric(0.5, damped)
    margin = (bound - numeric) / bound
    add("oracle.kernel.tail_bound_dominates", margin, 0.0, margin >= 0.0)

    # odd symmetry of the nonlinearity (exact in floating point)
    t = np.linspace(-3.0, 3.0, 601)
    worst = np.max(np.abs(kern.g_power(-t, 3.5) + kern.g_power(t, 3.5)))
    add("oracle.nonlinearity.odd", worst, 0.0, worst <= 0.0)

    # p = 2: the operator of the boundary barrier is constant in x
    const_params = OperatorParams(n=2, s=0.5, p=2.0, lam=0.0, c_norm=1.0)
    phi = op_mod.barrier_field(const_params.s)
    vals = [op_mod.eval_function(phi, np.array([r, 0.0]), const_params,
                                 depth=1) for r in (0.0, 0.35, 0.6, 0.8)]
    spread = (max(vals) - min(vals)) / abs(np.mean(vals))
    add("oracle.operator.p2_constancy", spread, 2e-2, spread <= 2e-2)

    # radial scheme vs dense quadrature at the center node
    ref_params = params if params is not None else OperatorParams(
        n=2, s=0.5, p=3.0, lam=0.5, c_norm=1.0, f=IDENTITY_TEMPERING)
    M = 64
    U = RadialField.from_callable(
        ref_params.n, M,
        lambda r: np.maximum(1.0 - r ** 2, 0.0) ** ref_params.s)
    got = op_mod.eval_radial(U, 0, ref_params)
    ref = op_mod.radial_center_reference(U, ref_params)
    rel = abs(got - ref) / abs(ref)
    add("oracle.operator.radial_center_reference", rel, 1e-6, rel <= 1e-6)

    # boundary-detachment estimator on u = (1 - r^2)^s: the detachment
    # ratio u/d^s = (1+r)^s hits (1.8)^s at the inner edge of the default
    # band, and the inward ratio profile extrapolates to 2^s at d = 0
    hopf_params = OperatorParams(n=2, s=0.5, p=3.0, lam=0.5, c_norm=1.0,
                                 f=IDENTITY_TEMPERING)
    M = 100
    r = np.arange(M + 1) / M
    synth = RadialField(n=2, radii=r,
                        values=np.maximum(1.0 - r ** 2, 0.0) ** 0.5)
    hres = diag_mod.hopf_ratio(synth, hopf_params)
    expect = 1.8 ** 0.5
    err = abs(hres.c_hat - expect)
    add("oracle.hopf.synthetic_constant", err, 1e-12, err <= 1e-12)
    # ratio at the wall: -derivative extrapolates q(0+) = sqrt(2) + O(h)
    deriv = float(hres.derivatives.max())
    err = abs(-deriv - math.sqrt(2.0))
    add("oracle.hopf.synthetic_derivative", err, 1e-3,
        err <= 1e-3 and deriv < 0.0)

    # reflection across alpha = 0 of a radial profile is exact
    scan = diag_mod.moving_plane_scan(synth, (0.0,))
    m0 = float(scan.minima[0])
    add("oracle.reflection.radial_exact_zero", abs(m0), 0.0,
        int(scan.counts[0]) > 0 and abs(m0) <= 0.0)

    return rows


def cmd_oracle(args, setup: Optional[RunSetup], out: str) -> int:
    params = setup.sim.params if setup is not None else None
    rows = _oracle_rows(params)

    force = (os.environ.get("TFPL_ORACLE_FORCE_FAIL", "") == "1"
             or (setup is not None and setup.force_oracle_failure))
    if force:
        # wiring check: prove that a failing row really fails the run
        rows.append(("oracle.forced_failure", 1.0, 0.0, "fail"))

    phash = param_hash(params) if params is not None else "builtin"
    lines = [DiagnosticsReport.HEADER]
    lines += [f"{c},{phash},{v:.16e},{t:.16e},{verdict}"
              for c, v, t, verdict in rows]
    path = os.path.join(out, "oracle.csv")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")

    n_fail = sum(1 for r in rows if r[3] == "fail")
    width = max(len(r[0]) for r in rows)
    for c, v, t, verdict in rows:
        print(f"  {verdict.upper():>4}  {c:<{width}}  {v: .6e} (thr {t:.3g})")
    print(f"oracle: {len(rows)} rows, {n_fail} failed -> {path}")
    return 1 if n_fail else 0


def cmd_report(args, setup: Optional[RunSetup], out: str) -> int:
    found = False
    n_fail = 0
    for name in ("diagnostics.csv", "oracle.csv"):
        path = os.path.join(out, name)
        if not os.path.exists(path):
            continue
        found = True
        with open(path) as fh:
            lines = fh.read().strip().splitlines()
        if not lines or lines[0] != DiagnosticsReport.HEADER:
            print(f"{path}: unrecognized header", file=sys.stderr)
            return 2
        print(f"{name}:")
        for lineno, line in enumerate(lines[1:], start=2):
            # right-anchored split: the check name is free-form text
            parts = line.split(",")
            if len(parts) < 5:
                print(f"{path}:{lineno}: malformed row", file=sys.stderr)
                return 2
            verdict, threshold, value = parts[-1], parts[-2], parts[-3]
            check = ",".join(parts[:-4])
            thr = f" (thr {float(threshold):.3g})" if threshold else ""
            print(f"  {verdict.upper():>4}  {check:<40} "
                  f"{float(value): .6e}{thr}")
            if verdict == "fail":
                n_fail += 1
    if not found:
        print(f"no diagnostics.csv or oracle.csv under {out}", file=sys.stderr)
        return 2
    print(f"report: {n_fail} failing checks")
    return 1 if n_fail else 0


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------

def _parse_args(argv):
    ap = argparse.ArgumentParser(
        prog="tfpl",
        description="Tempered fractional p-Laplacian: evaluation, "
                    "parabolic runs, and qualitative diagnostics.")
    ap.add_argument("--mode", required=True,
                    choices=("eval", "simulate", "diagnose", "oracle",
                             "report"))
    ap.add_argument("--config", default=None,
                    help="INI config file (required except for "
                         "oracle/report)")
    ap.add_argument("--out", default=None,
                    help="output directory (default: $TFPL_OUT or ./tfpl_out)")
    ap.add_argument("--threads", type=int, default=None,
                    help="worker threads for the compiled row kernels")
    ap.add_argument("--seed", type=int, default=None,
                    help="override the run seed")
    ap.add_argument("--json", action="store_true",
                    help="also write run_meta.json")
    return ap.parse_args(argv)


def main(argv=None) -> int:
    args = _parse_args(argv)

    # Thread count must reach the environment before the compiled kernels
    # are first imported; mode handlers import those modules lazily.
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be >= 1", file=sys.stderr)
            return 2
        os.environ.setdefault("NUMBA_NUM_THREADS", str(args.threads))

    try:
        setup = None
        if args.config is not None:
            setup = parse_config(args.config)
        elif args.mode in ("eval", "simulate", "diagnose"):
            print(f"error: --mode {args.mode} requires --config",
                  file=sys.stderr)
            return 2

        if setup is not None:
            if args.seed is not None:
                initial = setup.sim.initial
                if initial.kind == "random":
                    initial = dataclasses.replace(initial, seed=args.seed)
                setup.sim = dataclasses.replace(setup.sim, seed=args.seed,
                                                initial=initial)
                setup.seed = args.seed
            if args.json:
                setup.write_json = True

        out = args.out or (setup.out if setup else None) \
            or os.environ.get("TFPL_OUT") or "tfpl_out"
        os.makedirs(out, exist_ok=True)

        threads = args.threads if args.threads is not None \
            else (setup.threads if setup else None)
        if threads is not None:
            from . import operator as op_mod
            op_mod.set_worker_threads(threads)

        handler = {"eval": cmd_eval, "simulate": cmd_simulate,
                   "diagnose": cmd_diagnose, "oracle": cmd_oracle,
                   "report": cmd_report}[args.mode]
        return handler(args, setup, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # numerical aborts map to exit 3
        from . import solver
        if isinstance(exc, (solver.NumericalAbortError,
                            solver.SnapshotFormatError)):
            code = 3 if isinstance(exc, solver.NumericalAbortError) else 2
            print(f"error: {exc}", file=sys.stderr)
            return code
        raise


if __name__ == "__main__":
    sys.exit(main())

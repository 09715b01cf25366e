"""Explicit time stepping for the nonlocal reaction-diffusion problem.

    d/dt u = g(t, u) - I[u]   inside B_1,      u = 0 outside,

with I the principal-value operator from ``tfpl.operator``.  Forward Euler
is used deliberately: under the stability bound implemented in
``stable_dt`` the update map is monotone (order-preserving), which is what
the discrete comparison checks lean on, and it keeps every run bitwise
reproducible.  The step size is re-estimated from the current sup norm
every step unless the caller pins dt.

Snapshot files are plain CSV with `# key=value` header lines and 17
significant digits per value, enough for float64 round trips.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field
from typing import Optional

import numpy as np

from .core_types import (
    GridField,
    OperatorParams,
    RadialField,
    ReactionTerm,
    SimulationConfig,
    SteadyProfile,
    TemperingFunction,
)
from .operator import QuadratureSpec, operator_for

__all__ = [
    "NumericalAbortError",
    "SnapshotFormatError",
    "Trajectory",
    "stable_dt",
    "step",
    "run",
    "save_snapshot",
    "load_snapshot",
]


class NumericalAbortError(RuntimeError):
    """A step produced a non-finite value; carries the node and time."""

    def __init__(self, node, t: float):
        self.node = node
        self.t = t
        super().__init__(f"non-finite update at node {node} at t = {t:.6g}")


class SnapshotFormatError(ValueError):
    """Snapshot file malformed or inconsistent with expectations."""


# ----------------------------------------------------------------------
# stability
# ----------------------------------------------------------------------

def stable_dt(u, params: OperatorParams, reaction: ReactionTerm,
              quad: Optional[QuadratureSpec] = None,
              dt_max: float = 0.05) -> float:
    """Monotonicity-preserving step bound min(dt_max, 0.5 / (Lam + L_g)).

    Lam bounds the diagonal sensitivity of the operator: each row is a sum
    of G(u_i - u_j) terms with total kernel mass ``row_mass`` (hole
    excluded -- the self cell never enters the Jacobian because both of
    its arguments move together), and |G'| <= (p-1) |2 umax|^(p-2) on the
    reachable difference range.  L_g is the reaction's Lipschitz bound.
    """
    op = operator_for(u, params, quad)
    umax = u.norm_inf()
    base = 2.0 * umax
    if params.p == 2.0 or base > 0.0:
        gprime = (params.p - 1.0) * base ** (params.p - 2.0) \
            if base > 0.0 else (1.0 if params.p == 2.0 else 0.0)
    else:
        gprime = 0.0
    lam_op = gprime * op.max_row_mass
    lg = reaction.lipschitz_bound(umax)
    total = lam_op + lg
    if total <= 0.0:
        return dt_max
    return min(dt_max, 0.5 / total)


# ----------------------------------------------------------------------
# stepping
# ----------------------------------------------------------------------

def _interior_values(u):
    if isinstance(u, GridField):
        return u.values[u.interior_mask()]
    return u.values[:-1]


def _with_interior(u, new_int: np.ndarray):
    if isinstance(u, GridField):
        v = np.array(u.values)
        v[u.interior_mask()] = new_int
        return u.with_values(v)
    v = np.array(u.values)
    v[:-1] = new_int
    return u.with_values(v)


def step(u, t: float, dt: float, params: OperatorParams,
         reaction: ReactionTerm, quad: Optional[QuadratureSpec] = None,
         op=None):
    """One forward-Euler step; returns (new_field, residual).

    residual is the max-norm rate of change |g - I|_inf, i.e. the update
    magnitude per unit time.  Non-finite updates raise NumericalAbortError
    identifying the offending node.
    """
    op = op if op is not None else operator_for(u, params, quad)
    cur = _interior_values(u)
    rhs = reaction(t, cur) - op.apply(u)
    new = cur + dt * rhs
    bad = ~np.isfinite(new)
    if np.any(bad):
        k = int(np.argmax(bad))
        if isinstance(u, GridField):
            node = tuple(int(v) for v in u.interior_indices()[k])
        else:
            node = k
        raise NumericalAbortError(node, t)
    return _with_interior(u, new), float(np.max(np.abs(rhs)))


@dataclass
class Trajectory:
    """Snapshots and residual history of one run."""

    config: SimulationConfig
    times: list = dataclass_field(default_factory=list)
    fields: list = dataclass_field(default_factory=list)
    residual_times: list = dataclass_field(default_factory=list)
    residuals: list = dataclass_field(default_factory=list)
    steps: int = 0

    def record(self, t: float, field):
        if self.times and t <= self.times[-1]:
            raise ValueError("snapshot times must be strictly increasing")
        self.times.append(t)
        self.fields.append(field)

    @property
    def final(self):
        return self.fields[-1]


def run(config: SimulationConfig, u0=None, progress=None):
    """Integrate to t_end or steady state; returns (Trajectory, SteadyProfile).

    Steadiness: the residual |g - I|_inf must stay below tol_steady over a
    trailing window of length steady_window.  Snapshots are recorded at
    t = 0, then at the first step past each multiple of snapshot_every, and
    at the end.
    """
    params, reaction = config.params, config.reaction
    u = config.build_initial() if u0 is None else u0
    op = operator_for(u, params, config.quad)

    traj = Trajectory(config=config)
    t = 0.0
    traj.record(t, u)
    next_snap = config.snapshot_every
    window: list = []          # (t, residual) pairs inside the trailing window
    converged = False
    residual = math.inf

    while t < config.t_end - 1e-14:
        dt = config.dt if config.dt is not None else \
            stable_dt(u, params, reaction, config.quad, config.dt_max)
        dt = min(dt, config.t_end - t)
        u, residual = step(u, t, dt, params, reaction, op=op)
        t += dt
        traj.steps += 1
        traj.residual_times.append(t)
        traj.residuals.append(residual)
        if progress is not None and traj.steps % 2000 == 0:
            progress(t, residual)

        window.append((t, residual))
        cutoff = t - config.steady_window
        while window and window[0][0] < cutoff:
            window.pop(0)
        if t >= config.steady_window and len(window) >= 4 \
                and max(r for _, r in window) < config.tol_steady:
            converged = True

        if t >= next_snap - 1e-12 or t >= config.t_end - 1e-14 or converged:
            traj.record(t, u)
            next_snap = math.floor(t / config.snapshot_every + 1e-12) \
                * config.snapshot_every + config.snapshot_every
        if converged:
            break

    profile = SteadyProfile(field=u, t_reached=t, residual=residual,
                            converged=converged, tol_steady=config.tol_steady)
    return traj, profile


# ----------------------------------------------------------------------
# snapshots
# ----------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.16e}"


def save_snapshot(u, path, params: OperatorParams, t: float):
    """Write a field to CSV with a self-describing header."""
    kind = "grid" if isinstance(u, GridField) else "radial"
    h = u.h if isinstance(u, GridField) else 1.0 / u.M
    lines = [
        f"# n={params.n}",
        f"# s={params.s:.17g}",
        f"# p={params.p:.17g}",
        f"# lambda={params.lam:.17g}",
        f"# f={params.f.label}",
        f"# h={h:.17g}",
        f"# t={t:.17g}",
        f"# kind={kind}",
    ]
    if kind == "grid":
        cols = ",".join(f"x{d + 1}" for d in range(u.n))
        lines.append(f"{cols},value")
        coords = u.axis_coords()
        it = np.ndindex(u.values.shape)
        for idx in it:
            pt = [coords[i] for i in idx]
            lines.append(",".join(_fmt(c) for c in pt) + "," + _fmt(u.values[idx]))
    else:
        lines.append("r,value")
        for r, v in zip(u.radii, u.values):
            lines.append(f"{_fmt(r)},{_fmt(v)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_snapshot(path, expect: Optional[OperatorParams] = None):
    """Read a snapshot; returns (field, params, t).

    Raises SnapshotFormatError with a line number for malformed content and
    on any header mismatch against ``expect``.
    """
    header: dict = {}
    rows = []
    columns = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" not in body:
                    raise SnapshotFormatError(
                        f"line {lineno}: header line without '=': {line!r}")
                k, v = body.split("=", 1)
                header[k.strip()] = v.strip()
                continue
            if columns is None:
                columns = [c.strip() for c in line.split(",")]
                continue
            parts = line.split(",")
            if len(parts) != len(columns):
                raise SnapshotFormatError(
                    f"line {lineno}: expected {len(columns)} fields, "
                    f"got {len(parts)}")
            try:
                rows.append([float(x) for x in parts])
            except ValueError as exc:
                raise SnapshotFormatError(f"line {lineno}: {exc}") from None

    for key in ("n", "s", "p", "lambda", "f", "h", "t"):
        if key not in header:
            raise SnapshotFormatError(f"missing header key {key!r}")
    if columns is None or not rows:
        raise SnapshotFormatError("no data rows")

    params = OperatorParams(
        n=int(header["n"]), s=float(header["s"]), p=float(header["p"]),
        lam=float(header["lambda"]),
        f=TemperingFunction.from_label(header["f"]),
    )
    if expect is not None:
        got, want = params.describe(), expect.describe()
        for k in want:
            if got[k] != want[k]:
                raise SnapshotFormatError(
                    f"header mismatch: {k} = {got[k]!r}, expected {want[k]!r}")

    t = float(header["t"])
    h = float(header["h"])
    data = np.asarray(rows)
    kind = header.get("kind", "radial" if columns[0] == "r" else "grid")

    if kind == "radial":
        if columns != ["r", "value"]:
            raise SnapshotFormatError(f"radial snapshot needs 'r,value' columns, "
                                      f"got {columns}")
        field = RadialField(n=params.n, radii=data[:, 0], values=data[:, 1])
        return field, params, t

    n = params.n
    if columns != [f"x{d + 1}" for d in range(n)] + ["value"]:
        raise SnapshotFormatError(f"grid snapshot column mismatch: {columns}")
    side = round(data.shape[0] ** (1.0 / n))
    if side ** n != data.shape[0] or side % 2 != 1:
        raise SnapshotFormatError(
            f"row count {data.shape[0]} is not an odd cube for n = {n}")
    K = side // 2
    idx = np.rint(data[:, :n] / h).astype(int) + K
    if np.any(idx < 0) or np.any(idx >= side):
        raise SnapshotFormatError("node coordinates inconsistent with h")
    values = np.zeros((side,) * n)
    values[tuple(idx.T)] = data[:, n]
    field = GridField(h=h, values=values)
    return field, params, t

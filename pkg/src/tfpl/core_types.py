"""Value objects shared across the package.

Everything here is plain data with validation: operator parameters,
tempering profiles, discrete fields (uniform cube grids and radial meshes
on the unit ball), reaction terms, reflection geometry, and the small
report containers used by the diagnostics layer.

Conventions baked in once, relied on everywhere else:

* the domain is the open unit ball B_1(0); points with |x| >= 1 (boundary
  included, within 1e-12) are *exterior* and carry the value 0 exactly;
* grids are uniform cubes [-E, E]^n with an odd number of nodes per axis
  so the origin is a node, and E exceeds 1 by at least one layer of
  spacing (room for interpolation stencils near the boundary);
* field arrays are frozen (writeable=False) -- derive new fields with
  ``with_values`` instead of mutating in place.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

BOUNDARY_TOL = 1e-12  # |x| within this of 1 counts as boundary -> exterior

__all__ = [
    "TemperingFunction",
    "OperatorParams",
    "GridField",
    "RadialField",
    "ReactionTerm",
    "InitialData",
    "SimulationConfig",
    "SteadyProfile",
    "ReflectionSpec",
    "CheckRecord",
    "DiagnosticsReport",
    "classify_node",
    "param_hash",
]


# ----------------------------------------------------------------------
# tempering profiles
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class TemperingFunction:
    """Nondecreasing profile f: [0, inf) -> [0, inf) entering exp(-lam*f(r)).

    Kinds: ``zero`` (no tempering), ``identity`` (f(r)=r), ``power``
    (f(r)=r**beta, beta>0), ``tabulated`` (linear interpolation through
    validated knots, clamped outside the knot range).
    """

    kind: str = "zero"
    beta: float = float("nan")
    knots: tuple = ()

    def __post_init__(self):
        if self.kind not in ("zero", "identity", "power", "tabulated"):
            raise ValueError(f"unknown tempering kind {self.kind!r}")
        if self.kind == "power":
            if not (math.isfinite(self.beta) and self.beta > 0):
                raise ValueError("power tempering needs beta > 0")
        if self.kind == "tabulated":
            k = np.asarray(self.knots, dtype=float)
            if k.ndim != 2 or k.shape[1] != 2 or k.shape[0] < 2:
                raise ValueError("tabulated tempering needs >= 2 (r, value) knots")
            r, v = k[:, 0], k[:, 1]
            if r[0] < 0:
                raise ValueError("tabulated knot radii must be >= 0")
            if not np.all(np.diff(r) > 0):
                raise ValueError("tabulated knot radii must be strictly increasing")
            if np.any(v < 0) or not np.all(np.diff(v) >= 0):
                raise ValueError("tabulated knot values must be nonnegative and nondecreasing")
            object.__setattr__(self, "knots", tuple(map(tuple, k)))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "zero":
            out = np.zeros_like(r)
        elif self.kind == "identity":
            out = r.copy()
        elif self.kind == "power":
            out = np.power(r, self.beta)
        else:
            k = np.asarray(self.knots)
            out = np.interp(r, k[:, 0], k[:, 1])  # clamps at both ends
        return out if out.ndim else float(out)

    @property
    def label(self) -> str:
        if self.kind == "power":
            return f"power:{self.beta:.17g}"
        if self.kind == "tabulated":
            pts = ";".join(f"{r:.17g}:{v:.17g}" for r, v in self.knots)
            return f"tabulated:{pts}"
        return self.kind

    @classmethod
    def from_label(cls, text: str) -> "TemperingFunction":
        text = text.strip()
        if text in ("zero", "identity"):
            return cls(kind=text)
        if text.startswith("power:"):
            return cls(kind="power", beta=float(text.split(":", 1)[1]))
        if text.startswith("tabulated:"):
            body = text.split(":", 1)[1]
            knots = []
            for part in body.split(";"):
                r, v = part.split(":")
                knots.append((float(r), float(v)))
            return cls(kind="tabulated", knots=tuple(knots))
        raise ValueError(f"cannot parse tempering label {text!r}")


ZERO_TEMPERING = TemperingFunction("zero")
IDENTITY_TEMPERING = TemperingFunction("identity")


# ----------------------------------------------------------------------
# operator parameters
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorParams:
    """Parameters of the tempered fractional p-Laplacian.

    n     spatial dimension (1..3 supported by the discretizations here)
    s     fractional order, 0 < s < 1
    p     integrability exponent, p >= 2
    lam   tempering strength, 0 <= lam <= 10 (warning above 1)
    c_norm  kernel normalization constant, > 0
    f     tempering profile
    """

    n: int
    s: float
    p: float
    lam: float = 0.0
    c_norm: float = 1.0
    f: TemperingFunction = ZERO_TEMPERING

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and 1 <= self.n <= 3):
            raise ValueError("n must be an integer in {1, 2, 3}")
        object.__setattr__(self, "n", int(self.n))
        if not (0.0 < self.s < 1.0):
            raise ValueError("s must lie in (0, 1)")
        if not (self.p >= 2.0):
            raise ValueError("p must be >= 2")
        if not (0.0 <= self.lam <= 10.0):
            raise ValueError("lam must lie in [0, 10]")
        if self.lam > 1.0:
            warnings.warn(
                f"lam = {self.lam:g} exceeds 1: outside the small-tempering regime "
                "the qualitative checks are exploratory",
                stacklevel=2,
            )
        if not (self.c_norm > 0.0 and math.isfinite(self.c_norm)):
            raise ValueError("c_norm must be positive and finite")
        if not isinstance(self.f, TemperingFunction):
            raise ValueError("f must be a TemperingFunction")

    @property
    def sp(self) -> float:
        return self.s * self.p

    @property
    def outside_core_regime(self) -> bool:
        """True when (n, p) fall outside the regime the qualitative theory
        targets (p > 2 and n >= 2); such runs are admitted for oracles and
        debugging and flagged in reports."""
        return self.p == 2.0 or self.n < 2

    def describe(self) -> dict:
        return {
            "n": self.n, "s": self.s, "p": self.p, "lam": self.lam,
            "c_norm": self.c_norm, "f": self.f.label,
        }


def param_hash(params: OperatorParams, extra: str = "") -> str:
    """Short stable hash of parameters (+ optional run detail) for CSV rows."""
    items = params.describe()
    blob = ",".join(f"{k}={items[k]}" for k in sorted(items)) + "|" + extra
    return hashlib.md5(blob.encode()).hexdigest()[:12]


# ----------------------------------------------------------------------
# node classification
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class NodeClass:
    kind: str                    # "interior" | "exterior"
    distance_to_boundary: float  # max(1 - |x|, 0), zero for exterior points


def classify_node(x) -> NodeClass:
    """Classify a point of R^n against the open unit ball.

    Points with |x| >= 1 - BOUNDARY_TOL are exterior (the boundary sphere is
    exterior by convention: exterior data lives there).
    """
    r = float(np.linalg.norm(np.asarray(x, dtype=float)))
    if r < 1.0 - BOUNDARY_TOL:
        return NodeClass("interior", 1.0 - r)
    return NodeClass("exterior", max(1.0 - r, 0.0))


# ----------------------------------------------------------------------
# discrete fields
# ----------------------------------------------------------------------

def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class GridField:
    """Scalar field sampled on a uniform cube grid that covers B_1(0).

    ``values`` has shape (2K+1,)*n; node (i_1..i_n) sits at ((i_k - K) * h).
    The half-extent K*h exceeds 1 by at least one spacing (ghost layer), so
    interpolation stencils never fall off the array inside the closed belt
    |x| <= 1 + h.  Exterior nodes (|x| >= 1 within tolerance) must be 0.
    """

    h: float
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError("h must be positive and finite")
        if v.ndim not in (1, 2, 3):
            raise ValueError("grid fields support n in {1, 2, 3}")
        if len(set(v.shape)) != 1 or v.shape[0] % 2 != 1:
            raise ValueError("grid must be a cube with an odd node count per axis")
        K = v.shape[0] // 2
        if K * self.h < 1.0 + self.h * (1 - 1e-9):
            raise ValueError("grid half-extent must cover [-1-h, 1+h]")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", _freeze(v))
        if np.any(v[~self.interior_mask()] != 0.0):
            raise ValueError("exterior nodes must hold the value 0 exactly")

    # -- geometry ------------------------------------------------------

    @property
    def n(self) -> int:
        return self.values.ndim

    @property
    def K(self) -> int:
        return self.values.shape[0] // 2

    @property
    def extent(self) -> float:
        return self.K * self.h

    def axis_coords(self) -> np.ndarray:
        return (np.arange(-self.K, self.K + 1)) * self.h

    def node_point(self, idx) -> np.ndarray:
        return (np.asarray(idx, dtype=float) - self.K) * self.h

    def interior_mask(self) -> np.ndarray:
        cached = getattr(self, "_mask", None)
        if cached is None:
            c = self.axis_coords()
            grids = np.meshgrid(*([c] * self.n), indexing="ij")
            r = np.sqrt(sum(g * g for g in grids))
            cached = r < 1.0 - BOUNDARY_TOL
            object.__setattr__(self, "_mask", cached)
        return cached

    def interior_indices(self) -> np.ndarray:
        """(N, n) integer array of interior node multi-indices, lexicographic."""
        return np.argwhere(self.interior_mask())

    def interior_points(self) -> np.ndarray:
        return (self.interior_indices() - self.K) * self.h

    # -- construction --------------------------------------------------

    @classmethod
    def zeros(cls, n: int, h: float) -> "GridField":
        K = int(math.ceil(1.0 / h - 1e-12)) + 1
        return cls(h=h, values=np.zeros((2 * K + 1,) * n))

    @classmethod
    def from_callable(cls, n: int, h: float, fn: Callable) -> "GridField":
        """Sample fn on interior nodes (exterior forced to zero)."""
        base = cls.zeros(n, h)
        idx = base.interior_indices()
        pts = (idx - base.K) * h
        v = np.zeros_like(base.values)
        v[tuple(idx.T)] = np.asarray(fn(pts), dtype=float)
        return cls(h=h, values=v)

    def with_values(self, values: np.ndarray) -> "GridField":
        return GridField(h=self.h, values=values)

    # -- evaluation ----------------------------------------------------

    def interpolate(self, points: np.ndarray) -> np.ndarray:
        """Multilinear interpolation; exactly 0 outside |x| >= 1 and beyond
        the grid box.  points: (m, n)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        m = pts.shape[0]
        out = np.zeros(m)
        rad = np.linalg.norm(pts, axis=1)
        ok = rad < 1.0 - BOUNDARY_TOL
        inside_box = np.all(np.abs(pts) <= self.extent - self.h * (1 + 1e-12), axis=1)
        ok &= inside_box
        if not np.any(ok):
            return out
        q = pts[ok] / self.h + self.K           # fractional index coords
        i0 = np.floor(q).astype(int)
        frac = q - i0
        acc = np.zeros(i0.shape[0])
        for corner in range(2 ** self.n):
            w = np.ones(i0.shape[0])
            idx = []
            for d in range(self.n):
                bit = (corner >> d) & 1
                w = w * (frac[:, d] if bit else 1.0 - frac[:, d])
                idx.append(i0[:, d] + bit)
            acc += w * self.values[tuple(idx)]
        out[ok] = acc
        return out

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class RadialField:
    """Radially symmetric field U(r) on 0 = r_0 < ... < r_M = 1, U(1) = 0.

    Values at radii >= 1 are zero by the exterior convention; ``interp``
    is linear between samples and exactly 0 for r >= 1.
    """

    n: int
    radii: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if not (isinstance(self.n, (int, np.integer)) and 1 <= self.n <= 3):
            raise ValueError("n must be an integer in {1, 2, 3}")
        object.__setattr__(self, "n", int(self.n))
        if r.ndim != 1 or v.shape != r.shape or r.size < 2:
            raise ValueError("radii and values must be matching 1-D arrays, >= 2 samples")
        if r[0] != 0.0 or abs(r[-1] - 1.0) > 1e-14:
            raise ValueError("radii must run from 0 to 1")
        if not np.all(np.diff(r) > 0):
            raise ValueError("radii must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        if v[-1] != 0.0:
            raise ValueError("the boundary sample U(1) must be 0")
        object.__setattr__(self, "radii", _freeze(r))
        object.__setattr__(self, "values", _freeze(v))

    @property
    def M(self) -> int:
        return self.radii.size - 1

    @property
    def h(self) -> float:
        """Smallest radial spacing; plays the role of the grid h in
        tolerance rules of the form c*h."""
        return float(np.min(np.diff(self.radii)))

    @classmethod
    def zeros(cls, n: int, M: int) -> "RadialField":
        return cls(n=n, radii=np.arange(M + 1) / M, values=np.zeros(M + 1))

    @classmethod
    def from_callable(cls, n: int, M: int, fn: Callable) -> "RadialField":
        r = np.arange(M + 1) / M
        v = np.asarray(fn(r), dtype=float)
        v[-1] = 0.0
        return cls(n=n, radii=r, values=v)

    def with_values(self, values: np.ndarray) -> "RadialField":
        return RadialField(n=self.n, radii=self.radii, values=values)

    def interp(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        out = np.interp(r, self.radii, self.values, right=0.0)
        out = np.where(r >= 1.0 - BOUNDARY_TOL, 0.0, out)
        return out if out.ndim else float(out)

    def interpolate(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return self.interp(np.linalg.norm(pts, axis=1))

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.values)))


# ----------------------------------------------------------------------
# reaction terms
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ReactionTerm:
    """Reaction g(t, u).  Autonomous menu:

    zero        g = 0
    linear      g = -kappa * u
    logistic    g = u * (1 - u)
    polynomial  g = sum_k c_k u^k  (coeffs = (c_1, c_2, ...), no constant term
                so g(0) = 0 and u == 0 stays an exact fixed point)
    """

    kind: str = "zero"
    kappa: float = 1.0
    coeffs: tuple = ()

    def __post_init__(self):
        if self.kind not in ("zero", "linear", "logistic", "polynomial"):
            raise ValueError(f"unknown reaction kind {self.kind!r}")
        if self.kind == "linear" and not math.isfinite(self.kappa):
            raise ValueError("linear reaction needs finite kappa")
        if self.kind == "polynomial":
            c = tuple(float(x) for x in self.coeffs)
            if len(c) == 0 or not all(math.isfinite(x) for x in c):
                raise ValueError("polynomial reaction needs finite coefficients")
            object.__setattr__(self, "coeffs", c)

    def __call__(self, t, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "zero":
            out = np.zeros_like(u)
        elif self.kind == "linear":
            out = -self.kappa * u
        elif self.kind == "logistic":
            out = u * (1.0 - u)
        else:
            # Horner on c_1 + c_2 u + ..., then one more factor of u
            out = np.zeros_like(u)
            for c in reversed(self.coeffs):
                out = out * u + c
            out = out * u
        return out if out.ndim else float(out)

    def lipschitz_bound(self, umax: float) -> float:
        """Upper bound for |dg/du| on [-umax, umax]."""
        umax = abs(umax)
        if self.kind == "zero":
            return 0.0
        if self.kind == "linear":
            return abs(self.kappa)
        if self.kind == "logistic":
            return 1.0 + 2.0 * umax
        return float(sum(k * abs(c) * umax ** (k - 1)
                         for k, c in enumerate(self.coeffs, start=1)))

    @property
    def label(self) -> str:
        if self.kind == "linear":
            return f"linear:{self.kappa:.17g}"
        if self.kind == "polynomial":
            return "polynomial:" + ",".join(f"{c:.17g}" for c in self.coeffs)
        return self.kind

    @classmethod
    def from_label(cls, text: str) -> "ReactionTerm":
        text = text.strip()
        if text in ("zero", "logistic"):
            return cls(kind=text)
        if text.startswith("linear:"):
            return cls(kind="linear", kappa=float(text.split(":", 1)[1]))
        if text == "linear":
            return cls(kind="linear")
        if text.startswith("polynomial:"):
            cs = tuple(float(x) for x in text.split(":", 1)[1].split(","))
            return cls(kind="polynomial", coeffs=cs)
        raise ValueError(f"cannot parse reaction label {text!r}")


# ----------------------------------------------------------------------
# initial data
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class InitialData:
    """Initial-condition menu.

    kind 'zero'                  -> identically zero
    kind 'barrier', amplitude a  -> a * (1 - |x|^2)_+^s  (scaled barrier)
    kind 'bump'                  -> sum of Gaussian bumps cut to the ball:
                                    sum_i a_i exp(-|x-c_i|^2/w_i^2) * (1-|x|^2)_+
    kind 'random', amplitude a   -> seeded nonnegative noise a*U[0,1)*(1-|x|^2)_+
    """

    kind: str = "barrier"
    amplitude: float = 0.5
    centers: tuple = ((0.0, 0.0),)
    widths: tuple = (0.35,)
    amplitudes: tuple = ()      # per-bump; empty -> all equal `amplitude`
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("zero", "barrier", "bump", "random"):
            raise ValueError(f"unknown initial-data kind {self.kind!r}")

    def profile(self, s: float) -> Callable:
        """Return fn(points (m, n)) -> values, vanishing outside B_1."""
        def cut(pts):
            r2 = np.sum(np.asarray(pts, dtype=float) ** 2, axis=1)
            return np.maximum(1.0 - r2, 0.0)

        if self.kind == "zero":
            return lambda pts: np.zeros(np.atleast_2d(pts).shape[0])
        if self.kind == "barrier":
            a = self.amplitude
            return lambda pts: a * cut(pts) ** s
        if self.kind == "bump":
            amps = self.amplitudes or (self.amplitude,) * len(self.centers)
            if len(amps) != len(self.centers) or len(self.widths) != len(self.centers):
                raise ValueError("bump initial data needs matching centers/widths/amplitudes")

            def fn(pts):
                pts = np.atleast_2d(np.asarray(pts, dtype=float))
                total = np.zeros(pts.shape[0])
                for a, c, w in zip(amps, self.centers, self.widths):
                    d2 = np.sum((pts - np.asarray(c, dtype=float)) ** 2, axis=1)
                    total += a * np.exp(-d2 / w ** 2)
                return total * cut(pts)
            return fn
        # random: seeded, nonnegative, vanishes at the boundary
        rng_seed = self.seed

        def fn(pts):
            pts = np.atleast_2d(np.asarray(pts, dtype=float))
            rng = np.random.default_rng(rng_seed)
            return self.amplitude * rng.random(pts.shape[0]) * cut(pts)
        return fn

    def build_grid(self, n: int, h: float, s: float) -> GridField:
        return GridField.from_callable(n, h, self.profile(s))

    def build_radial(self, n: int, M: int, s: float) -> RadialField:
        fn = self.profile(s)
        r = np.arange(M + 1) / M
        pts = np.zeros((M + 1, n))
        pts[:, 0] = r
        v = np.asarray(fn(pts), dtype=float)
        v[-1] = 0.0
        return RadialField(n=n, radii=r, values=v)

    @property
    def label(self) -> str:
        if self.kind == "zero":
            return "zero"
        if self.kind == "barrier":
            return f"barrier:{self.amplitude:.17g}"
        if self.kind == "random":
            return f"random:{self.amplitude:.17g}:{self.seed}"
        amps = self.amplitudes or (self.amplitude,) * len(self.centers)
        parts = []
        for a, c, w in zip(amps, self.centers, self.widths):
            parts.append(":".join([f"{a:.17g}"] + [f"{x:.17g}" for x in c] + [f"{w:.17g}"]))
        return "bump:" + ";".join(parts)


# ----------------------------------------------------------------------
# simulation configuration + results
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class SimulationConfig:
    """Everything a parabolic run needs.  ``field_kind`` selects the
    discretization: 'grid' (full cube lattice) or 'radial' (radial mesh,
    for radially symmetric problems)."""

    params: OperatorParams
    reaction: ReactionTerm = ReactionTerm("zero")
    field_kind: str = "radial"
    h: float = 1.0 / 64.0            # grid spacing, or radial spacing 1/M
    initial: InitialData = InitialData("barrier", amplitude=0.5)
    t_end: float = 10.0
    dt: Optional[float] = None       # None -> stability-derived, re-estimated each step
    dt_max: float = 0.05
    tol_steady: float = 1e-6
    steady_window: float = 1.0
    snapshot_every: float = 0.5
    seed: int = 0
    quad: Optional[object] = None    # operator.QuadratureSpec; None -> defaults

    def __post_init__(self):
        if self.field_kind not in ("grid", "radial"):
            raise ValueError("field_kind must be 'grid' or 'radial'")
        if not (self.h > 0 and self.h <= 0.5):
            raise ValueError("h must lie in (0, 0.5]")
        if self.field_kind == "radial":
            M = round(1.0 / self.h)
            if abs(M * self.h - 1.0) > 1e-9:
                raise ValueError("radial spacing h must divide 1 (h = 1/M)")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.dt is not None and not (0 < self.dt <= self.dt_max):
            raise ValueError("explicit dt must lie in (0, dt_max]")
        if self.tol_steady <= 0 or self.steady_window <= 0:
            raise ValueError("tol_steady and steady_window must be positive")
        if self.snapshot_every <= 0:
            raise ValueError("snapshot_every must be positive")

    @property
    def M(self) -> int:
        return round(1.0 / self.h)

    def build_initial(self):
        if self.field_kind == "grid":
            return self.initial.build_grid(self.params.n, self.h, self.params.s)
        return self.initial.build_radial(self.params.n, self.M, self.params.s)


@dataclass(frozen=True)
class SteadyProfile:
    """Final state of a run plus convergence bookkeeping."""

    field: object                 # GridField | RadialField
    t_reached: float
    residual: float               # last max-norm rate of change per unit time
    converged: bool
    tol_steady: float


# ----------------------------------------------------------------------
# reflection geometry
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ReflectionSpec:
    """Reflection across the hyperplane {x_axis = alpha}, |alpha| < 1."""

    alpha: float
    axis: int = 0

    def __post_init__(self):
        if not (abs(self.alpha) < 1.0):
            raise ValueError("reflection plane must intersect the ball: |alpha| < 1")
        if self.axis < 0:
            raise ValueError("axis must be a nonnegative coordinate index")

    def reflect(self, points: np.ndarray) -> np.ndarray:
        pts = np.array(np.atleast_2d(points), dtype=float)
        pts[:, self.axis] = 2.0 * self.alpha - pts[:, self.axis]
        return pts

    def cap_mask(self, points: np.ndarray) -> np.ndarray:
        """True on the cap side {x_axis < alpha} strictly."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return pts[:, self.axis] < self.alpha


# ----------------------------------------------------------------------
# diagnostics report plumbing
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class CheckRecord:
    check: str
    value: float
    threshold: float
    verdict: str      # "pass" | "fail" | "info"

    def as_row(self, phash: str) -> str:
        thr = "" if not math.isfinite(self.threshold) else f"{self.threshold:.16e}"
        return f"{self.check},{phash},{self.value:.16e},{thr},{self.verdict}"


class DiagnosticsReport:
    """Accumulates check records; serializes to the diagnostics CSV."""

    HEADER = "check,param_hash,value,threshold,verdict"

    def __init__(self, params: OperatorParams, run_detail: str = ""):
        self.params = params
        self.phash = param_hash(params, run_detail)
        self.records: list[CheckRecord] = []
        if params.outside_core_regime:
            self.add("regime.outside_core", 1.0, float("nan"), "info")

    def add(self, check: str, value: float, threshold: float = float("nan"),
            verdict: str = "info") -> CheckRecord:
        rec = CheckRecord(check, float(value), float(threshold), verdict)
        self.records.append(rec)
        return rec

    @property
    def failed(self) -> list[CheckRecord]:
        return [r for r in self.records if r.verdict == "fail"]

    def to_csv(self) -> str:
        lines = [self.HEADER]
        lines += [r.as_row(self.phash) for r in self.records]
        return "\n".join(lines) + "\n"

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_csv())

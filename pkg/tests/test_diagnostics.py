import math

import numpy as np
import pytest

from tfpl.core_types import (
    IDENTITY_TEMPERING,
    InitialData,
    OperatorParams,
    RadialField,
    ReactionTerm,
    ReflectionSpec,
    SimulationConfig,
)
from tfpl import diagnostics as dg
from tfpl import solver
from conftest import BASE_PARAMS


def synthetic_barrier(M=100, s=0.5, n=2):
    r = np.arange(M + 1) / M
    return RadialField(n=n, radii=r,
                       values=np.maximum(1.0 - r ** 2, 0.0) ** s)


# ---------------------------------------------------------------- dichotomy

def test_dichotomy_positive_on_steady_profile(radial_steady_64):
    _, prof = radial_steady_64
    res = dg.dichotomy_check(prof, BASE_PARAMS)
    assert res.verdict == "positive"
    assert res.min_inner > 0.0
    assert all(rec[3] != "fail" for rec in res.records())


def test_dichotomy_zero_profile():
    res = dg.dichotomy_check(RadialField.zeros(2, 32), BASE_PARAMS)
    assert res.verdict == "zero"


def test_dichotomy_flags_interior_zero_ring():
    u = synthetic_barrier(M=32)
    vals = u.values.copy()
    vals[10:13] = 0.0              # an interior ring of zeros
    res = dg.dichotomy_check(u.with_values(vals), BASE_PARAMS)
    assert res.verdict == "violation"
    assert len(res.offending) > 0
    assert any(rec[3] == "fail" for rec in res.records())


# ---------------------------------------------------------------- hopf

def test_hopf_synthetic_frozen_values():
    """u = (1-r^2)^s: u/d^s = (1+r)^s is known in closed form, so the
    detachment constant over the band [2h, 0.2] is exactly (1.8)^s at the
    inner band edge and the wall ratio extrapolates to 2^s."""
    u = synthetic_barrier(M=100, s=0.5)
    res = dg.hopf_ratio(u, BASE_PARAMS)
    assert res.c_hat == pytest.approx(1.8 ** 0.5, abs=1e-12)
    deriv = float(res.derivatives.max())
    assert deriv < 0.0
    assert -deriv == pytest.approx(math.sqrt(2.0), abs=1e-3)
    assert res.verdict == "pass"


def test_hopf_trivial_on_zero_profile():
    res = dg.hopf_ratio(RadialField.zeros(2, 32), BASE_PARAMS)
    assert res.trivial
    assert res.c_hat == 0.0


def test_hopf_on_steady_profile(radial_steady_64):
    _, prof = radial_steady_64
    res = dg.hopf_ratio(prof, BASE_PARAMS)
    assert not res.trivial
    assert res.c_hat > 0.0
    assert np.all(res.derivatives < 0.0)


# ---------------------------------------------------------------- reflection

def test_reflect_field_known_sign():
    # reflect the barrier across alpha = -0.25 and read psi at (-0.7, 0):
    # the reflected point (0.2, 0) is closer to the center, so psi > 0
    u = synthetic_barrier(M=64)
    diff = dg.reflect_field(u, ReflectionSpec(alpha=-0.25))
    probe = np.argmin(np.sum((diff.points - np.array([-0.7, 0.0])) ** 2,
                             axis=1))
    expected = u.interp(0.2) - u.interp(0.7)
    assert diff.values[probe] == pytest.approx(expected, abs=5e-3)
    assert diff.values[probe] > 0.0


def test_moving_plane_scan_radial_profile_passes():
    u = synthetic_barrier(M=64)
    scan = dg.moving_plane_scan(u, (-0.9, -0.6, -0.3, 0.0))
    assert scan.passed
    assert scan.worst >= 0.0           # radially decreasing: psi >= 0 exactly
    # alpha = 0 on a radial profile: reflection is an exact symmetry
    assert scan.minima[-1] == 0.0


def test_moving_plane_detects_translation():
    # an off-center profile violates the reflection inequality at a
    # tolerance much tighter than the violation scale
    u = InitialData("bump", amplitudes=(0.6,), centers=((-0.35, 0.0),),
                    widths=(0.25,)).build_grid(2, 1.0 / 16.0, 0.5)
    scan = dg.moving_plane_scan(u, (-0.3, -0.1, 0.0), tol=0.05)
    assert not scan.passed
    assert scan.worst < -0.05


def test_moving_plane_empty_caps_are_ignored():
    u = synthetic_barrier(M=32)
    scan = dg.moving_plane_scan(u, (-0.999,))
    assert scan.counts[0] == 0
    assert scan.passed                 # nothing sampled, nothing violated


# ---------------------------------------------------------------- evolution

def test_antisym_evolution_symmetric_run(radial_steady_64):
    traj, _ = radial_steady_64
    for alpha in (-0.5, -0.25, 0.0):
        res = dg.antisymmetric_evolution_check(traj, ReflectionSpec(alpha))
        assert res.passed and res.late_passed
        if alpha == 0.0:
            assert np.all(res.minima == 0.0)   # exact symmetry, exactly kept


def test_antisym_rejects_asymmetric_initial_data():
    cfg = SimulationConfig(
        params=BASE_PARAMS, reaction=ReactionTerm("logistic"),
        field_kind="grid", h=1.0 / 8.0,
        initial=InitialData("bump", amplitudes=(0.6,),
                            centers=((-0.4, 0.0),), widths=(0.25,)),
        t_end=0.05)
    traj, _ = solver.run(cfg)
    with pytest.raises(ValueError, match="violates"):
        dg.antisymmetric_evolution_check(traj, ReflectionSpec(alpha=-0.25))


def test_narrow_region_consistent_with_cap(radial_steady_64):
    traj, _ = radial_steady_64
    spec = ReflectionSpec(alpha=-0.25)
    cap = dg.antisymmetric_evolution_check(traj, spec)
    strip = dg.narrow_region_check(traj, spec, delta=0.1)
    assert strip.passed
    # the strip is a subset of the cap, so its minima cannot be smaller
    assert strip.strip_minima.min() >= cap.minima.min() - 1e-15


def test_narrow_region_unresolved_strip_is_an_error(radial_steady_64):
    traj, _ = radial_steady_64
    with pytest.raises(ValueError, match="unresolved"):
        dg.narrow_region_check(traj, ReflectionSpec(alpha=-0.25),
                               delta=1e-4)


# ---------------------------------------------------------------- barrier scan

def test_barrier_scan_p2_untempered_nearly_constant():
    params = OperatorParams(n=2, s=0.5, p=2.0, lam=0.0, c_norm=1.0)
    scan = dg.barrier_boundedness_scan(params, radii=(0.0, 0.5, 0.9),
                                       depths=(0, 1))
    assert scan.passed
    vals = scan.values[-1]
    assert (vals.max() - vals.min()) / abs(vals.mean()) < 5e-3


def test_barrier_scan_flags_borderline_order():
    params = OperatorParams(n=2, s=0.7, p=2.5, lam=0.1, c_norm=1.0,
                            f=IDENTITY_TEMPERING)   # s >= 1 - 1/p
    scan = dg.barrier_boundedness_scan(params, radii=(0.0, 0.5, 0.9),
                                       depths=(0, 1))
    assert scan.flagged_regime
    assert any(rec[0] == "barrier.borderline_order"
               for rec in scan.records())


# ---------------------------------------------------------------- subsolution

def test_smoothstep_plateau_shape():
    t = np.linspace(0.0, 1.0, 101)
    v = dg._smooth01(t)
    assert v[0] == 0.0 and v[-1] == 1.0
    assert np.all(np.diff(v) >= 0.0)
    # C^1 at the endpoints
    assert dg._smooth01_prime(0.0) == 0.0
    assert dg._smooth01_prime(1.0) == 0.0


def test_subsolution_spec_probe_validation():
    with pytest.raises(ValueError, match="outside the core"):
        dg.SubsolutionSpec(r_core=0.5, probe_radii=(0.4, 0.6))


def test_subsolution_on_steady_profile(radial_steady_64):
    _, prof = radial_steady_64
    res = dg.subsolution_comparison_test(prof, BASE_PARAMS)
    assert res.zero_delta_max < 0.0
    assert res.delta_star > 0.0
    assert res.passed
    for frac, val in res.fraction_checks:
        assert val <= 0.0, f"fraction {frac} violated: {val}"


def test_subsolution_depth_stability(radial_steady_64):
    _, prof = radial_steady_64
    d1 = dg.subsolution_comparison_test(prof, BASE_PARAMS, depth=1)
    d2 = dg.subsolution_comparison_test(prof, BASE_PARAMS, depth=2)
    assert d1.zero_delta_max < 0.0 and d2.zero_delta_max < 0.0
    assert d2.delta_star == pytest.approx(d1.delta_star, rel=0.25)

import numpy as np
import pytest

from mongauss import unravel
from mongauss.flow import (
    bose_hubbard_dimer,
    covariance_fixed_point,
    find_fixed_points,
    single_kerr,
    spin_steady_state,
    sweep_bifurcation,
    symmetric_branch_mean_field,
)
from mongauss.opalg import GaussianMoments

DIMER = bose_hubbard_dimer(delta=-1.5, u_int=2.0, drive=0.0, coupling=2.5)


def test_single_kerr_root_satisfies_cubic():
    model = single_kerr(0.5, 1.0, 1.0)
    alphas = symmetric_branch_mean_field(model, 1.0)
    assert len(alphas) >= 1
    for alpha in alphas:
        a = alpha[0]
        residual = (1j * 0.5 - 0.5) * a - 1j * abs(a) ** 2 * a - 1j * 1.0
        assert abs(residual) < 1e-12


def test_undriven_dimer_fixed_point_is_vacuum():
    fps = find_fixed_points(DIMER, unravel.HETERODYNE, [GaussianMoments.vacuum(2)])
    assert len(fps) == 1
    fp = fps[0]
    assert np.max(np.abs(fp.moments.alpha)) < 1e-10
    assert np.max(np.abs(fp.moments.u)) < 1e-8
    assert np.max(np.abs(fp.moments.v)) < 1e-8
    assert fp.stable
    assert fp.rhs_norm < 1e-10


def test_newton_matches_closed_form_spin_values():
    # the boson fixed-point machinery against the independent closed form,
    # via the single-mode model that shares its covariance structure
    model = single_kerr(0.5, 1.0, 1.0)
    for scheme in (unravel.HOMODYNE, unravel.HETERODYNE, unravel.QUANTUM_JUMP):
        alphas = symmetric_branch_mean_field(model, 1.0)
        g, ok = covariance_fixed_point(model, scheme, alphas[0])
        assert ok
        fps = find_fixed_points(model, scheme, [g])
        assert fps and fps[0].rhs_norm < 1e-10


def test_duplicate_roots_are_merged():
    model = single_kerr(0.5, 1.0, 1.0)
    alphas = symmetric_branch_mean_field(model, 1.0)
    g, _ = covariance_fixed_point(model, unravel.HOMODYNE, alphas[0])
    fps = find_fixed_points(model, unravel.HOMODYNE, [g, g, g])
    assert len(fps) == 1


def test_sweep_validates_grid():
    with pytest.raises(ValueError):
        sweep_bifurcation(DIMER, unravel.HOMODYNE, "drive", [])
    with pytest.raises(ValueError):
        sweep_bifurcation(DIMER, unravel.HOMODYNE, "drive", [2.0, 1.0])
    with pytest.raises(ValueError):
        sweep_bifurcation(DIMER, unravel.HOMODYNE, "unknown", [1.0, 2.0])


def test_sweep_finds_symmetry_breaking_window():
    grid = np.arange(1.6, 4.01, 0.1)
    res = sweep_bifurcation(DIMER, unravel.HOMODYNE, "drive", grid)
    sym = res.branch("symmetric")
    assert all(p.converged for p in sym)
    assert len(res.critical_params) == 2
    lo, hi = res.critical_params
    assert 2.0 < lo < 2.6
    assert 2.9 < hi < 3.5

    broken = [p for p in res.branch("broken+") if p.converged]
    assert broken, "no symmetry-broken branch found"
    for p in broken:
        assert lo < p.param < hi
        assert p.stable
        assert p.populations[0] > p.populations[1] + 1e-4
        assert p.purity < 1e-7
        assert np.isfinite(p.entropy_spatial)
        assert p.entropy_momentum > 0.0
    # inside the window the symmetric branch is unstable, outside stable
    for p in sym:
        inside = lo < p.param < hi
        assert p.stable == (not inside)
    # mirror branch carries the swapped populations
    minus = {p.param: p for p in res.branch("broken-") if p.converged}
    for p in broken:
        q = minus[p.param]
        assert q.populations[0] == pytest.approx(p.populations[1], abs=1e-9)
        assert q.entropy_spatial == pytest.approx(p.entropy_spatial, abs=1e-9)


def test_symmetric_branch_momentum_modes_decouple():
    grid = np.arange(1.6, 4.01, 0.2)
    res = sweep_bifurcation(DIMER, unravel.HETERODYNE, "drive", grid)
    for p in res.branch("symmetric"):
        assert p.entropy_momentum == pytest.approx(0.0, abs=1e-9)


def test_critical_drive_is_scheme_independent():
    grid = np.arange(2.0, 3.5, 0.05)
    crits = []
    for scheme in (unravel.QUANTUM_JUMP, unravel.HOMODYNE, unravel.HETERODYNE):
        res = sweep_bifurcation(DIMER, scheme, "drive", grid)
        crits.append(res.critical_params)
    assert crits[0] == crits[1] == crits[2]


def test_spin_steady_state_gap_to_time_crystal():
    # just below threshold the covariances blow up; above, no stationary branch
    v_vals = [spin_steady_state(om).v for om in (0.5, 0.9, 0.99, 0.999)]
    assert all(b > a for a, b in zip(v_vals, v_vals[1:]))

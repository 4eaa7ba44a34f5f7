import numpy as np
import pytest

from mongauss import unravel
from mongauss.flow import (
    CollectiveSpinModel,
    SpinFrame,
    integrate,
    spin_coefficients,
    spin_rhs,
    spin_steady_state,
)
from mongauss.unravel import QjZeroPolicy, SchemeTag, UnravelingScheme

QJ_FALLBACK = UnravelingScheme(SchemeTag.QUANTUM_JUMP, QjZeroPolicy.HETERODYNE_FALLBACK)
ALL_SCHEMES = (unravel.QUANTUM_JUMP, unravel.HOMODYNE, unravel.HETERODYNE)

LOWERING = (1.0, -1.0j, 0.0)


def steady_angles(omega, kappa=1.0):
    theta = np.arccos(-np.sqrt(1.0 - (omega / kappa) ** 2))
    return theta, np.pi / 2


def test_frame_coefficients_aligned():
    _, _, _, e, f = spin_coefficients(0.0, 0.0, LOWERING)
    assert e == pytest.approx(2.0)
    assert f == pytest.approx(0.0)


def test_frame_coefficients_inverted():
    _, _, _, e, f = spin_coefficients(np.pi, 0.0, LOWERING)
    assert e == pytest.approx(0.0, abs=1e-15)
    assert f == pytest.approx(-2.0)


def test_frame_coefficients_zero_vector():
    cx, cy, cz, e, f = spin_coefficients(0.7, 1.3, (0.0, 0.0, 0.0))
    assert cx == cy == cz == e == f == 0.0


def test_rhs_vanishes_at_stationary_magnetization():
    theta, phi = steady_angles(0.5)
    frame = SpinFrame(theta=theta, phi=phi, u=0.1 + 0.05j, v=0.2)
    dtheta, dphi, _, _ = spin_rhs(frame, unravel.HOMODYNE, omega=0.5)
    assert abs(dtheta) < 1e-12
    assert abs(dphi * np.sin(theta)) < 1e-12


def test_closed_form_covariances_are_fixed_point_for_all_schemes():
    omega = 0.9
    ss = spin_steady_state(omega)
    theta, phi = steady_angles(omega)
    for scheme in ALL_SCHEMES:
        frame = SpinFrame(theta=theta, phi=phi, u=ss.u, v=ss.v)
        dtheta, dphi, du, dv = spin_rhs(frame, scheme, omega=omega)
        assert abs(du) < 1e-10
        assert abs(dv) < 1e-10


def test_dark_state_derivatives_vanish():
    frame = SpinFrame(theta=np.pi, phi=0.0, u=0j, v=0.0)
    for scheme in (unravel.HOMODYNE, unravel.HETERODYNE, QJ_FALLBACK):
        dtheta, dphi, du, dv = spin_rhs(frame, scheme, omega=0.0)
        assert abs(dtheta) < 1e-15
        assert abs(du) < 1e-15
        assert abs(dv) < 1e-15


def test_dark_state_constant_in_time():
    res = integrate(
        CollectiveSpinModel(omega=0.0),
        unravel.HETERODYNE,
        SpinFrame(theta=np.pi, phi=0.0, u=0j, v=0.0),
        t_max=20.0,
        dt_out=1.0,
    )
    assert np.max(np.abs(res.magnetization[:, 2] + 1.0)) < 1e-9
    assert np.max(np.abs(res.u)) < 1e-12
    assert np.max(np.abs(res.v)) < 1e-12


def test_flow_reaches_closed_form_steady_state():
    ss = spin_steady_state(0.9)
    for scheme in ALL_SCHEMES:
        res = integrate(
            CollectiveSpinModel(omega=0.9),
            scheme,
            SpinFrame(theta=np.pi / 2, phi=0.0, u=0j, v=0.0),
            t_max=60.0,
            dt_out=1.0,
        )
        assert abs(res.u[-1] - ss.u) < 1e-7
        assert abs(res.v[-1] - ss.v) < 1e-7
        assert abs(res.magnetization[-1, 2] - ss.magnetization[2]) < 1e-7
        assert np.max(res.purity) < 1e-8


def test_steady_state_values():
    ss0 = spin_steady_state(0.0)
    assert np.allclose(ss0.magnetization, [0, 0, -1])
    assert ss0.u == 0.0 and ss0.v == 0.0 and ss0.entropy == 0.0

    ss = spin_steady_state(0.9)
    assert ss.u == pytest.approx(0.4645668610878877, abs=1e-12)
    assert ss.v == pytest.approx(0.18251180826492136, abs=1e-12)
    assert ss.magnetization[2] == pytest.approx(-0.4358898943540673, abs=1e-12)
    assert ss.entropy == pytest.approx(0.1814933131350247, abs=1e-12)


def test_steady_state_diverges_at_threshold():
    # v grows as kappa / (4 sqrt(kappa^2 - omega^2)) near threshold
    assert spin_steady_state(0.9999).v > 15.0
    assert spin_steady_state(0.999999).v > 100.0
    eps = np.sqrt(1.0 - 0.9999**2)
    assert spin_steady_state(0.9999).v == pytest.approx(1.0 / (4 * eps), rel=0.05)
    with pytest.raises(ValueError, match="stationary"):
        spin_steady_state(1.0)
    with pytest.raises(ValueError, match="stationary"):
        spin_steady_state(1.3)


def test_frame_validation():
    with pytest.raises(ValueError):
        SpinFrame(theta=-0.1, phi=0.0, u=0j, v=0.0).validate()
    with pytest.raises(ValueError):
        SpinFrame(theta=1.0, phi=0.0, u=0j, v=-0.5).validate()

"""Rotating-frame dynamics of the collective spin model.

The collective spin is bosonized around its mean direction: the frame angles
(theta, phi) follow the classical magnetization while a single bosonic mode
carries the quantum fluctuations with covariances (u, v).  The equations for
(u, v) include the inertial term from the co-rotating frame and the
unraveling-dependent back-action, and they admit a closed-form stationary
solution below the critical drive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..gstate import collective_entropy
from ..unravel import UnravelingScheme, upsilon
from .models import CollectiveSpinModel

__all__ = [
    "SpinFrame",
    "SpinSteadyState",
    "rotation_matrix",
    "spin_coefficients",
    "channel_expectation_phase",
    "spin_rhs",
    "spin_cartesian_rhs",
    "spin_steady_state",
    "magnetization",
    "frame_angles",
]

#: below this |sin(theta)| the azimuth rate is clamped (coordinate singularity)
POLE_EPSILON = 1e-9


@dataclass
class SpinFrame:
    """Frame angles plus fluctuation covariances of the bosonized mode."""

    theta: float
    phi: float
    u: complex
    v: float

    def validate(self) -> None:
        if not 0.0 <= self.theta <= np.pi:
            raise ValueError("theta must lie in [0, pi]")
        if self.v < 0:
            raise ValueError("v must be nonnegative")


@dataclass
class SpinSteadyState:
    magnetization: np.ndarray
    u: float
    v: float
    entropy: float


def rotation_matrix(theta: float, phi: float) -> np.ndarray:
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(phi), np.sin(phi)
    return np.array(
        [
            [ct * cp, ct * sp, -st],
            [-sp, cp, 0.0],
            [st * cp, st * sp, ct],
        ]
    )


def spin_coefficients(theta: float, phi: float, c) -> tuple[complex, complex, complex, complex, complex]:
    """Frame components of a collective operator with lab components ``c``.

    Returns (C_x, C_y, C_z, E, F) where E = C_x + i C_y multiplies the
    creation part of the bosonized operator and F = C_x^* + i C_y^* the
    annihilation part.
    """
    g = rotation_matrix(theta, phi)
    cx, cy, cz = g @ np.asarray(c, dtype=complex)
    e = cx + 1j * cy
    f = np.conj(cx) + 1j * np.conj(cy)
    return cx, cy, cz, e, f


def channel_expectation_phase(model: CollectiveSpinModel, theta: float, phi: float) -> complex:
    """Normalized decay-channel expectation <L>/sqrt(kappa S) = C_z of the decay vector."""
    _, _, cz, _, _ = spin_coefficients(theta, phi, model.c_decay)
    return cz


def _angle_drift(model: CollectiveSpinModel, theta: float, phi: float) -> complex:
    _, _, _, e_f, _ = spin_coefficients(theta, phi, model.c_field)
    _, _, cz_d, e_d, f_d = spin_coefficients(theta, phi, model.c_decay)
    return -1j * model.omega * e_f - 0.5 * model.kappa * (
        f_d * cz_d - e_d * np.conj(cz_d)
    )


def _uv_rhs(
    model: CollectiveSpinModel,
    theta: float,
    phi: float,
    u: complex,
    v: float,
    scheme: UnravelingScheme,
    dphi_dt: float,
) -> tuple[complex, float]:
    _, _, cz_f, _, _ = spin_coefficients(theta, phi, model.c_field)
    _, _, cz_d, e_d, f_d = spin_coefficients(theta, phi, model.c_decay)
    ka = model.kappa
    lexp = np.sqrt(ka) * cz_d  # overall sqrt(S) scale drops out of the phase
    ups = upsilon(scheme, lexp)

    p1 = e_d * (v + 1.0) + np.conj(f_d) * u
    p2 = np.conj(e_d) * u + f_d * v
    du = (
        2j * (model.omega * cz_f - np.cos(theta) * dphi_dt) * u
        - 0.5 * ka * (e_d * f_d + (abs(f_d) ** 2 - abs(e_d) ** 2) * u)
        - ka * p1 * p2
        - 0.5 * ka * np.conj(ups) * p1**2
        - 0.5 * ka * ups * p2**2
    )
    dv = (
        -0.5 * ka * ((abs(f_d) ** 2 - abs(e_d) ** 2) * v - abs(e_d) ** 2)
        - ka * np.real(ups * (np.conj(e_d) * (v + 1.0) + f_d * np.conj(u)) * p2)
        - 0.5 * ka * abs(p1) ** 2
        - 0.5 * ka * abs(p2) ** 2
    )
    return du, float(np.real(dv))


def spin_rhs(
    frame: SpinFrame, scheme: UnravelingScheme, omega: float, kappa: float = 1.0
) -> tuple[float, float, complex, float]:
    """(dtheta/dt, dphi/dt, du/dt, dv/dt) for the default drive/decay vectors.

    Near the poles (|sin theta| below POLE_EPSILON) the azimuth rate is a
    coordinate artifact; it is clamped here, and the integrator avoids the
    issue altogether by propagating the magnetization as a unit vector.
    """
    model = CollectiveSpinModel(omega=omega, kappa=kappa)
    frame.validate()
    drift = _angle_drift(model, frame.theta, frame.phi)
    dtheta = float(np.real(drift))
    st = np.sin(frame.theta)  # nonnegative on [0, pi]
    dphi = float(np.imag(drift)) / max(st, POLE_EPSILON)
    du, dv = _uv_rhs(model, frame.theta, frame.phi, frame.u, frame.v, scheme, dphi)
    return dtheta, dphi, du, dv


def spin_cartesian_rhs(
    model: CollectiveSpinModel,
    m: np.ndarray,
    u: complex,
    v: float,
    scheme: UnravelingScheme,
) -> tuple[np.ndarray, complex, float]:
    """Vector field with the magnetization as a unit vector (pole safe).

    The frame angles are recovered from m; dm/dt = T e_theta + P e_phi stays
    tangent to the sphere, and the covariance block keeps the inertial term
    cos(theta) dphi/dt = m_z P / sin(theta), clamped at the poles.
    """
    m = np.asarray(m, dtype=float)
    norm = np.linalg.norm(m)
    mh = m / norm
    theta = float(np.arccos(np.clip(mh[2], -1.0, 1.0)))
    st = float(np.hypot(mh[0], mh[1]))
    phi = float(np.arctan2(mh[1], mh[0])) if st > 0.0 else 0.0

    drift = _angle_drift(model, theta, phi)
    t_rate = float(np.real(drift))
    p_rate = float(np.imag(drift))

    ct = mh[2]
    cp, sp = (mh[0] / st, mh[1] / st) if st > 0.0 else (1.0, 0.0)
    e_theta = np.array([ct * cp, ct * sp, -st])
    e_phi = np.array([-sp, cp, 0.0])
    dm = t_rate * e_theta + p_rate * e_phi

    dphi_dt = p_rate / max(st, POLE_EPSILON)
    du, dv = _uv_rhs(model, theta, phi, u, v, scheme, dphi_dt)
    return dm, du, dv


def magnetization(theta: float, phi: float) -> np.ndarray:
    return np.array(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
    )


def frame_angles(m: np.ndarray) -> tuple[float, float]:
    m = np.asarray(m, dtype=float)
    mh = m / np.linalg.norm(m)
    theta = float(np.arccos(np.clip(mh[2], -1.0, 1.0)))
    phi = float(np.arctan2(mh[1], mh[0])) if np.hypot(mh[0], mh[1]) > 0 else 0.0
    return theta, phi


def spin_steady_state(omega: float, kappa: float = 1.0) -> SpinSteadyState:
    """Closed-form stationary magnetization, covariances and entropy for omega < kappa.

    Above the critical drive the stationary solution ceases to exist (the
    magnetization enters the permanently oscillating phase) and a ValueError
    is raised.
    """
    if omega < 0 or kappa <= 0:
        raise ValueError("require omega >= 0 and kappa > 0")
    if omega >= kappa:
        raise ValueError(
            f"no stationary solution at omega = {omega:g} >= kappa = {kappa:g} "
            "(time-crystal regime)"
        )
    w = omega / kappa
    root = np.sqrt(kappa**2 - omega**2)
    m = np.array([0.0, w, -np.sqrt(1.0 - w * w)])
    u_ss = omega**2 / (4.0 * kappa * root)
    v_ss = -(-kappa + omega**2 / (2.0 * kappa) + root) / (2.0 * root)
    return SpinSteadyState(
        magnetization=m, u=float(u_ss), v=float(v_ss), entropy=collective_entropy(v_ss)
    )

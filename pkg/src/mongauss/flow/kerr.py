"""Hand-coded large-N right-hand sides for Kerr-type lattice models.

These closed-form expressions are the production path for integration and
root finding; the symbolic generator in :mod:`mongauss.opalg` produces the
same vector field independently and serves as the correctness oracle.
"""

from __future__ import annotations

import numpy as np

from ..opalg import GaussianMoments
from ..unravel import UnravelingScheme, upsilon
from .models import KerrLatticeModel

__all__ = ["kerr_mean_field_rhs", "kerr_covariance_rhs", "kerr_rhs", "channel_expectations"]


def channel_expectations(model: KerrLatticeModel, alpha: np.ndarray) -> np.ndarray:
    """Leading normalized jump-operator expectations, one per loss channel."""
    return np.sqrt(model.kappa) * np.asarray(alpha, dtype=complex)


def kerr_mean_field_rhs(model: KerrLatticeModel, alpha: np.ndarray) -> np.ndarray:
    """d(alpha)/dt; closed under the first moments alone."""
    a = np.asarray(alpha, dtype=complex)
    out = (1j * model.delta - 0.5 * model.kappa) * a
    out = out - 1j * model.u_int * np.abs(a) ** 2 * a
    out = out - 1j * model.drives
    out = out + 1j * (model.coupling @ a)
    return out


def kerr_covariance_rhs(
    model: KerrLatticeModel,
    alpha: np.ndarray,
    u: np.ndarray,
    v: np.ndarray,
    scheme: UnravelingScheme,
) -> tuple[np.ndarray, np.ndarray]:
    """(du/dt, dv/dt) at fixed first moments ``alpha``.

    The drift part collects detuning, hopping and the Wick-factorized Kerr
    terms; the remaining quadratic-in-(u, v) terms implement the measurement
    back-action, contracted with the per-channel unraveling factors.
    """
    a = np.asarray(alpha, dtype=complex)
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    m = model.n_modes
    ka, ui = model.kappa, model.u_int
    jmat = model.coupling.astype(complex)

    lexp = channel_expectations(model, a)
    ups = np.array([upsilon(scheme, lexp[k]) for k in range(m)], dtype=complex)

    absa2 = np.abs(a) ** 2
    a2 = a**2

    du = (2j * model.delta - ka) * u
    du = du + 1j * (jmat @ u + u @ jmat)
    # Kerr, Wick factorized: -i*ui*[2(|a_i|^2+|a_j|^2) u_ij + a_i^2 v_ij + a_j^2 v_ji + a_j^2 d_ij]
    du = du - 1j * ui * (
        2.0 * (absa2[:, None] + absa2[None, :]) * u
        + a2[:, None] * v
        + a2[None, :] * v.T
        + np.diag(a2)
    )
    # back-action: -kappa * sum_k [ups_k^* u_ik u_jk + u_ik v_kj + v_ki u_jk + ups_k v_ki v_kj]
    du = du - ka * (
        (u * np.conj(ups)[None, :]) @ u.T
        + u @ v
        + v.T @ u.T
        + (v.T * ups[None, :]) @ v
    )

    dv = -ka * v
    dv = dv - 1j * (jmat @ v - v @ jmat)
    dv = dv + 1j * ui * (
        2.0 * (absa2[:, None] - absa2[None, :]) * v
        + np.conj(a2)[:, None] * u
        - a2[None, :] * np.conj(u)
    )
    # back-action: -kappa * sum_k [u*_ik u_jk + ups_k u*_ik v_kj + ups_k^* v*_ki u_jk + v*_ki v_kj]
    dv = dv - ka * (
        np.conj(u) @ u.T
        + (np.conj(u) * ups[None, :]) @ v
        + (v.conj().T * np.conj(ups)[None, :]) @ u.T
        + v.conj().T @ v
    )
    return du, dv


def kerr_rhs(
    model: KerrLatticeModel, g: GaussianMoments, scheme: UnravelingScheme
) -> GaussianMoments:
    """Full vector field packed as a GaussianMoments-shaped derivative."""
    dalpha = kerr_mean_field_rhs(model, g.alpha)
    du, dv = kerr_covariance_rhs(model, g.alpha, g.u, g.v, scheme)
    return GaussianMoments(dalpha, du, dv)

"""Moment extraction from truncated-basis state vectors."""

from __future__ import annotations

import numpy as np

from ..opalg import GaussianMoments

__all__ = ["apply_destroy", "single_mode_moments", "measure_moments", "mean_number"]


def apply_destroy(psi: np.ndarray) -> np.ndarray:
    """Annihilation operator on single-mode Fock amplitudes, matrix free."""
    out = np.zeros_like(psi)
    n = np.arange(1, psi.shape[0])
    out[:-1] = np.sqrt(n) * psi[1:]
    return out


def mean_number(psi: np.ndarray) -> float:
    n = np.arange(psi.shape[0])
    return float(np.sum(n * np.abs(psi) ** 2))


def single_mode_moments(psi: np.ndarray) -> tuple[complex, complex, float]:
    """(alpha, u, v) of a normalized single-mode Fock vector."""
    apsi = apply_destroy(psi)
    alpha = complex(np.vdot(psi, apsi))
    aapsi = apply_destroy(apsi)
    a2 = complex(np.vdot(psi, aapsi))
    n = float(np.real(np.vdot(apsi, apsi)))
    u = a2 - alpha * alpha
    v = n - abs(alpha) ** 2
    return alpha, u, v


def measure_moments(psi: np.ndarray, mode_ops) -> GaussianMoments:
    """Exact (alpha, u, v) of a normalized state for the given annihilation matrices."""
    psi = np.asarray(psi, dtype=complex)
    m = len(mode_ops)
    apsis = [op @ psi for op in mode_ops]
    alpha = np.array([np.vdot(psi, ap) for ap in apsis])
    u = np.empty((m, m), dtype=complex)
    v = np.empty((m, m), dtype=complex)
    for i in range(m):
        for j in range(m):
            u[i, j] = np.vdot(psi, mode_ops[i] @ apsis[j]) - alpha[i] * alpha[j]
            v[i, j] = np.vdot(apsis[i], apsis[j]) - np.conj(alpha[i]) * alpha[j]
    return GaussianMoments(alpha, u, v)

"""Truncated-Fock-space operators and states for the boson models."""

from __future__ import annotations

import numpy as np
from scipy import sparse

from ..flow.models import KerrLatticeModel

__all__ = [
    "destroy",
    "default_cutoff",
    "coherent_state",
    "kerr_fock_operators",
    "dimer_fock_operators",
    "leakage",
    "KerrNonHermitianOp",
]


def destroy(cutoff: int) -> sparse.csr_matrix:
    """Annihilation operator on the {|0>, ..., |cutoff-1>} Fock basis."""
    n = np.arange(1, cutoff)
    return sparse.diags(np.sqrt(n.astype(float)), offsets=1, format="csr").astype(complex)


def default_cutoff(n_scale: float, max_alpha_sq: float) -> int:
    """Cutoff heuristic for populations up to ~ n_scale * max_alpha_sq photons."""
    return int(max(20, np.ceil(4.0 * n_scale * max_alpha_sq) + np.ceil(10.0 * np.sqrt(n_scale))))


def coherent_state(alpha: complex, cutoff: int) -> np.ndarray:
    """Normalized coherent-state amplitudes, built stably in log space."""
    n = np.arange(cutoff)
    mag = abs(alpha)
    if mag == 0.0:
        psi = np.zeros(cutoff, dtype=complex)
        psi[0] = 1.0
        return psi
    from scipy.special import gammaln

    log_mag = n * np.log(mag) - 0.5 * gammaln(n + 1.0) - 0.5 * mag * mag
    phase = np.exp(1j * n * np.angle(alpha))
    psi = np.exp(log_mag) * phase
    return psi / np.linalg.norm(psi)


def kerr_fock_operators(
    model: KerrLatticeModel, n_scale: float, cutoff: int
) -> tuple[sparse.csr_matrix, list[sparse.csr_matrix]]:
    """Single-mode Kerr Hamiltonian and loss operator at finite N = n_scale."""
    if model.n_modes != 1:
        raise ValueError("kerr_fock_operators expects a single-mode model")
    a = destroy(cutoff)
    ad = a.conj().T.tocsr()
    num = (ad @ a).tocsr()
    h = (
        -model.delta * num
        + (0.5 * model.u_int / n_scale) * (ad @ ad @ a @ a)
        + model.drives[0] * np.sqrt(n_scale) * (ad + a)
    ).tocsr()
    l_op = (np.sqrt(model.kappa) * a).tocsr()
    return h, [l_op]


def dimer_fock_operators(
    model: KerrLatticeModel, n_scale: float, cutoff: int
) -> tuple[sparse.csr_matrix, list[sparse.csr_matrix]]:
    """Two-mode Fock-space operators for the coupled-cavity model."""
    if model.n_modes != 2:
        raise ValueError("dimer_fock_operators expects a two-mode model")
    a = destroy(cutoff)
    eye = sparse.identity(cutoff, format="csr", dtype=complex)
    a1 = sparse.kron(a, eye, format="csr")
    a2 = sparse.kron(eye, a, format="csr")
    h = sparse.csr_matrix((cutoff**2, cutoff**2), dtype=complex)
    for i, ai in enumerate((a1, a2)):
        adi = ai.conj().T.tocsr()
        h = h - model.delta * (adi @ ai)
        h = h + (0.5 * model.u_int / n_scale) * (adi @ adi @ ai @ ai)
        h = h + model.drives[i] * np.sqrt(n_scale) * (adi + ai)
    j = model.coupling[0, 1]
    if j != 0.0:
        h = h - j * (a1.conj().T @ a2 + a2.conj().T @ a1)
    ls = [(np.sqrt(model.kappa) * ai).tocsr() for ai in (a1, a2)]
    return h.tocsr(), ls


def leakage(psi: np.ndarray, top_fraction: float = 0.1) -> float:
    """Population in the top fraction of the basis (cutoff-adequacy monitor)."""
    d = psi.shape[0]
    k = max(1, int(np.ceil(top_fraction * d)))
    return float(np.sum(np.abs(psi[d - k :]) ** 2))


class KerrNonHermitianOp:
    """Matrix-free non-Hermitian drift H - (i/2) kappa n for one Kerr mode.

    Dedicated replacement for the sparse matrix in the trajectory inner loop;
    the tridiagonal structure reduces each product to a few vector
    operations.  Supports the ``@`` protocol for vectors.
    """

    def __init__(self, model: KerrLatticeModel, n_scale: float, cutoff: int):
        if model.n_modes != 1:
            raise ValueError("KerrNonHermitianOp expects a single-mode model")
        n = np.arange(cutoff)
        self.diag = (
            -model.delta * n
            + (0.5 * model.u_int / n_scale) * n * (n - 1)
            - 0.5j * model.kappa * n
        ).astype(complex)
        self.drive = model.drives[0] * np.sqrt(n_scale)
        self.root_n = np.sqrt(n[1:].astype(float))
        self.shape = (cutoff, cutoff)

    def __matmul__(self, psi: np.ndarray) -> np.ndarray:
        out = self.diag * psi
        if self.drive != 0.0:
            out[:-1] += self.drive * self.root_n * psi[1:]  # a
            out[1:] += self.drive * self.root_n * psi[:-1]  # a^+
        return out

    def one_norm(self) -> float:
        bound = np.abs(self.diag)
        if self.drive != 0.0:
            pad = np.zeros_like(bound)
            pad[:-1] += abs(self.drive) * self.root_n
            pad[1:] += abs(self.drive) * self.root_n
            bound = bound + pad
        return float(np.max(bound))

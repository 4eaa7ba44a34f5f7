"""Collective-spin (Dicke) basis operators and the half-system entanglement.

The maximal-spin sector of N spin-1/2 particles is spanned by |S, M> with
S = N/2; amplitude vectors are indexed by k = 0..2S with M = S - k, so index
0 is the fully polarized |S, S> state.
"""

from __future__ import annotations

from math import lgamma
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.linalg import expm

from ..flow.models import CollectiveSpinModel

__all__ = [
    "dicke_dimension",
    "spin_operators",
    "collective_spin_matrices",
    "all_down_state",
    "plus_x_state",
    "dicke_half_entropy",
]


def dicke_dimension(s: float) -> int:
    d = 2 * s + 1
    if abs(d - round(d)) > 1e-12:
        raise ValueError(f"invalid spin {s}")
    return int(round(d))


def _m_values(s: float) -> np.ndarray:
    return s - np.arange(dicke_dimension(s))


def spin_operators(s: float) -> dict[str, sparse.csr_matrix]:
    """S^z, S^+, S^-, S^x, S^y in the |S, M> basis (M descending)."""
    m = _m_values(s)
    sz = sparse.diags(m.astype(complex), format="csr")
    # S^+ |S, M> = sqrt(S(S+1) - M(M+1)) |S, M+1>; M of column k is m[k]
    up = np.sqrt(np.maximum(s * (s + 1) - m[1:] * (m[1:] + 1), 0.0))
    sp = sparse.diags(up.astype(complex), offsets=1, format="csr")
    sm = sp.conj().T.tocsr()
    sx = (0.5 * (sp + sm)).tocsr()
    sy = (-0.5j * (sp - sm)).tocsr()
    return {"z": sz, "+": sp, "-": sm, "x": sx, "y": sy}


def collective_spin_matrices(
    model: CollectiveSpinModel, s: float
) -> tuple[sparse.csr_matrix, list[sparse.csr_matrix]]:
    """Finite-S Hamiltonian and jump operator of the driven-damped collective spin."""
    ops = spin_operators(s)
    cart = [ops["x"], ops["y"], ops["z"]]
    h = sparse.csr_matrix((dicke_dimension(s),) * 2, dtype=complex)
    l_op = sparse.csr_matrix((dicke_dimension(s),) * 2, dtype=complex)
    for c, op in zip(model.c_field, cart):
        if c != 0:
            h = h + model.omega * c * op
    for c, op in zip(model.c_decay, cart):
        if c != 0:
            l_op = l_op + np.sqrt(model.kappa / s) * c * op
    return h.tocsr(), [l_op.tocsr()]


def all_down_state(s: float) -> np.ndarray:
    psi = np.zeros(dicke_dimension(s), dtype=complex)
    psi[-1] = 1.0
    return psi


def plus_x_state(s: float) -> np.ndarray:
    """All spins along +x: the top Dicke state rotated by pi/2 about y."""
    ops = spin_operators(s)
    rot = expm(-1j * (np.pi / 2) * ops["y"].toarray())
    psi = np.zeros(dicke_dimension(s), dtype=complex)
    psi[0] = 1.0
    return rot @ psi


@lru_cache(maxsize=32)
def _stretched_cg_matrix(two_j: int) -> np.ndarray:
    """Clebsch-Gordan table C[i1, i2] coupling two spin-j halves to J = 2j.

    Index i maps to m = j - i.  Computed in log space so it stays finite for
    large j (hundreds of spins).
    """
    j2 = two_j  # 2j as an integer
    dim = j2 + 1
    c = np.zeros((dim, dim))
    log_num_const = 2.0 * lgamma(j2 + 1.0) - lgamma(2.0 * j2 + 1.0)
    for i1 in range(dim):
        for i2 in range(dim):
            # m1 = j - i1, m2 = j - i2 (in units where j = j2/2)
            two_m = 2 * j2 - 2 * (i1 + i2)  # 2(m1 + m2)
            log_val = (
                log_num_const
                + lgamma((2 * j2 + two_m) / 2.0 + 1.0)
                + lgamma((2 * j2 - two_m) / 2.0 + 1.0)
                - lgamma(j2 - i1 + 1.0)
                - lgamma(i1 + 1.0)
                - lgamma(j2 - i2 + 1.0)
                - lgamma(i2 + 1.0)
            )
            c[i1, i2] = np.exp(0.5 * log_val)
    return c


def dicke_half_entropy(psi: np.ndarray) -> float:
    """Entanglement entropy (nats) of an even split of a symmetric-sector state.

    ``psi`` holds amplitudes over |J = N/2, M> with M descending.  The state
    is expanded over two halves of N/2 spins, each carrying maximal spin
    j = N/4, through the stretched-coupling Clebsch-Gordan coefficients; the
    entropy is that of the squared Schmidt values of the resulting amplitude
    matrix.
    """
    psi = np.asarray(psi, dtype=complex)
    dim = psi.shape[0]
    n_spins = dim - 1  # 2S
    if n_spins % 2:
        raise ValueError("even split requires an even number of spins")
    j2 = n_spins // 2  # 2j of each half
    cg = _stretched_cg_matrix(j2)
    half_dim = j2 + 1
    amp = np.zeros((half_dim, half_dim), dtype=complex)
    for i1 in range(half_dim):
        for i2 in range(half_dim):
            # global index: M = m1 + m2 = S - (i1 + i2)
            amp[i1, i2] = psi[i1 + i2] * cg[i1, i2]
    lam = np.linalg.svd(amp, compute_uv=False) ** 2
    lam = lam[lam > 1e-300]
    total = float(np.sum(lam))
    if total <= 0:
        return 0.0
    lam = lam / total
    return float(-np.sum(lam * np.log(lam)))

"""Independent brute-force oracles shared across the test modules.

Everything here deliberately avoids the production code paths it checks:
operator polynomials are evaluated as explicit truncated-Fock matrices, and
random physical Gaussian moments are assembled from squeezed thermal normal
forms rather than through the package's transforms.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from mongauss.opalg import GaussianMoments, OperatorPolynomial


def destroy_matrix(cutoff: int) -> np.ndarray:
    a = np.zeros((cutoff, cutoff), dtype=complex)
    n = np.arange(1, cutoff)
    a[n - 1, n] = np.sqrt(n)
    return a


def word_matrix(word, cutoff: int, n_modes: int) -> np.ndarray:
    """Matrix of a normal-ordered word on the n_modes-fold Fock space."""
    a = destroy_matrix(cutoff)
    ad = a.conj().T
    per_mode = {m: np.linalg.matrix_power(ad, p) @ np.linalg.matrix_power(a, q) for m, p, q in word}
    out = None
    for mode in range(n_modes):
        factor = per_mode.get(mode, np.eye(cutoff, dtype=complex))
        out = factor if out is None else np.kron(out, factor)
    return out if out is not None else np.eye(cutoff**n_modes, dtype=complex)


def poly_matrix(p: OperatorPolynomial, cutoff: int, n_modes: int, n_value: float = 1.0) -> np.ndarray:
    dim = cutoff**n_modes
    out = np.zeros((dim, dim), dtype=complex)
    for (npow, word), c in p.terms.items():
        out += c * float(n_value) ** float(npow) * word_matrix(word, cutoff, n_modes)
    return out


def ladder_factor_matrix(factors, cutoff: int, n_modes: int) -> np.ndarray:
    """Product of elementary ladder matrices in the given (arbitrary) order."""
    a = destroy_matrix(cutoff)
    ad = a.conj().T
    eye = np.eye(cutoff, dtype=complex)
    dim = cutoff**n_modes
    out = np.eye(dim, dtype=complex)
    for kind, mode in factors:
        base = ad if kind == "+" else a
        factor = None
        for m in range(n_modes):
            block = base if m == mode else eye
            factor = block if factor is None else np.kron(factor, block)
        out = out @ factor
    return out


def low_block(mat: np.ndarray, cutoff: int, n_modes: int, degree: int) -> np.ndarray:
    """Sub-block unaffected by Fock truncation for operators of the given degree."""
    keep = cutoff - degree
    if n_modes == 1:
        return mat[:keep, :keep]
    idx = [i * cutoff + j for i in range(keep) for j in range(keep)]
    return mat[np.ix_(idx, idx)]


def random_polynomial(rng, n_modes=2, max_degree=4, n_terms=4) -> OperatorPolynomial:
    from mongauss import opalg

    p = opalg.zero()
    for _ in range(n_terms):
        deg = rng.integers(0, max_degree + 1)
        factors = [("+" if rng.random() < 0.5 else "-", int(rng.integers(0, n_modes))) for _ in range(deg)]
        c = complex(rng.normal(), rng.normal())
        p = p + c * opalg.ladder_product(factors)
    return p


def random_ladder_factors(rng, n_modes=2, max_degree=4):
    deg = int(rng.integers(1, max_degree + 1))
    return [("+" if rng.random() < 0.5 else "-", int(rng.integers(0, n_modes))) for _ in range(deg)]


def random_physical_moments(
    rng, n_modes: int, pure: bool = False, alpha_scale: float = 0.5,
    n_max: float = 0.5, r_max: float = 0.6,
) -> GaussianMoments:
    """Random physical Gaussian moments from squeezed thermal normal form.

    Per mode: u = -exp(i phi) sinh(r) cosh(r) (2 n + 1), v = n + (2 n + 1) sinh^2(r);
    a random passive interferometer then mixes the modes.
    """
    u = np.zeros((n_modes, n_modes), dtype=complex)
    v = np.zeros((n_modes, n_modes), dtype=complex)
    for i in range(n_modes):
        n_th = 0.0 if pure else float(rng.uniform(0.0, n_max))
        r = float(rng.uniform(0.0, r_max))
        phi = float(rng.uniform(0.0, 2 * np.pi))
        u[i, i] = -np.exp(1j * phi) * np.sinh(r) * np.cosh(r) * (2 * n_th + 1)
        v[i, i] = n_th + (2 * n_th + 1) * np.sinh(r) ** 2
    # random unitary via QR
    z = rng.normal(size=(n_modes, n_modes)) + 1j * rng.normal(size=(n_modes, n_modes))
    q, rr = np.linalg.qr(z)
    q = q @ np.diag(np.diag(rr) / np.abs(np.diag(rr)))
    alpha = alpha_scale * (rng.normal(size=n_modes) + 1j * rng.normal(size=n_modes))
    return GaussianMoments(q @ alpha, q @ u @ q.T, q.conj() @ v @ q.T)


def dicke_state_full(n_spins: int, n_up: int) -> np.ndarray:
    dim = 2**n_spins
    v = np.zeros(dim)
    for idx in combinations(range(n_spins), n_up):
        v[sum(1 << i for i in idx)] = 1.0
    return v / np.linalg.norm(v)


def brute_half_entropy(amplitudes, n_spins: int) -> float:
    """Half-chain entropy from the explicit 2^N tensor representation."""
    psi = np.zeros(2**n_spins, dtype=complex)
    for k, amp in enumerate(amplitudes):  # index k: M = N/2 - k, so k spins down
        psi += amp * dicke_state_full(n_spins, n_spins - k)
    mat = psi.reshape(2 ** (n_spins // 2), 2 ** (n_spins // 2))
    lam = np.linalg.svd(mat, compute_uv=False) ** 2
    lam = lam[lam > 1e-14]
    lam = lam / lam.sum()
    return float(-np.sum(lam * np.log(lam)))

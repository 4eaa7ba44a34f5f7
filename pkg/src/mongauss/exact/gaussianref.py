"""Reference Gaussian states and the non-Gaussianity measure.

A single-mode state with moments (alpha, u, v) is matched by a displaced
squeezed thermal state.  The non-Gaussianity of a state is the normalized
Hilbert-Schmidt distance to that reference, which vanishes exactly on
Gaussian states.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.linalg import expm

from .fock import destroy
from .moments import single_mode_moments

__all__ = [
    "reference_parameters",
    "gaussian_reference_state",
    "non_gaussianity",
    "non_gaussianity_pure",
]


def reference_parameters(u: complex, v: float) -> tuple[float, float, complex]:
    """(symplectic eigenvalue nu, thermal occupation, squeeze parameter xi).

    nu = sqrt((v + 1/2)^2 - |u|^2) must satisfy nu >= 1/2; the squeeze
    magnitude follows from sinh(2r) = |u|/nu and its phase from -u/|u|.
    """
    v = float(np.real(v))
    disc = (v + 0.5) ** 2 - abs(u) ** 2
    if v < -1e-12 or disc < 0.25 - 1e-9:
        raise ValueError(f"moments (u={u}, v={v}) are not a physical single-mode pair")
    nu = float(np.sqrt(max(disc, 0.25)))
    n_th = nu - 0.5
    if abs(u) == 0.0:
        return nu, n_th, 0.0 + 0.0j
    r = 0.5 * np.arcsinh(abs(u) / nu)
    phase = -u / abs(u)
    return nu, n_th, r * phase


def _thermal_diag(n_th: float, cutoff: int) -> np.ndarray:
    if n_th <= 0.0:
        p = np.zeros(cutoff)
        p[0] = 1.0
        return p
    n = np.arange(cutoff)
    logp = n * np.log(n_th / (n_th + 1.0)) - np.log(n_th + 1.0)
    return np.exp(logp)


def _displacement_generator(alpha: complex, cutoff: int) -> sparse.csr_matrix:
    a = destroy(cutoff)
    return (alpha * a.conj().T - np.conj(alpha) * a).tocsr()


def _squeeze_generator(xi: complex, cutoff: int) -> sparse.csr_matrix:
    a = destroy(cutoff)
    return (0.5 * (np.conj(xi) * (a @ a) - xi * (a.conj().T @ a.conj().T))).tocsr()


def gaussian_reference_state(
    alpha: complex, u: complex, v: float, cutoff: int, roundtrip_tol: float = 1e-6
) -> np.ndarray:
    """Density matrix of the Gaussian state with the given single-mode moments.

    Built as D(alpha) S(xi) rho_thermal S(xi)^+ D(alpha)^+ with dense matrix
    exponentials; the measured moments of the output are checked to round
    trip within ``roundtrip_tol`` (raises otherwise, which signals a cutoff
    too small for the requested displacement/occupation/squeezing).
    """
    nu, n_th, xi = reference_parameters(u, v)
    p = _thermal_diag(n_th, cutoff)
    rho = np.diag(p).astype(complex)
    if xi != 0.0:
        s_mat = expm(_squeeze_generator(xi, cutoff).toarray())
        rho = s_mat @ rho @ s_mat.conj().T
    if alpha != 0.0:
        d_mat = expm(_displacement_generator(alpha, cutoff).toarray())
        rho = d_mat @ rho @ d_mat.conj().T

    a = destroy(cutoff).toarray()
    alpha_out = np.trace(rho @ a)
    delta = a - alpha_out * np.eye(cutoff)
    u_out = np.trace(rho @ delta @ delta)
    v_out = np.real(np.trace(rho @ delta.conj().T @ delta))
    err = max(abs(alpha_out - alpha), abs(u_out - u), abs(v_out - float(np.real(v))))
    if err > roundtrip_tol:
        raise ValueError(
            f"reference-state moments fail to round trip (error {err:.2e}); "
            f"cutoff {cutoff} too small for alpha={alpha}, n_th={n_th:.3g}, |xi|={abs(xi):.3g}"
        )
    return rho


def _apply_displacement(alpha: complex, psi: np.ndarray) -> np.ndarray:
    """exp(alpha a^+ - alpha^* a) applied matrix free by scaled Taylor steps."""
    d = psi.shape[0]
    root = np.sqrt(np.arange(1, d))
    a_c, ac_c = -np.conj(alpha), alpha

    def gen(v):
        out = np.zeros_like(v)
        out[:-1] += a_c * root * v[1:]
        out[1:] += ac_c * root * v[:-1]
        return out

    norm_est = 2.0 * abs(alpha) * np.sqrt(d)
    return _scaled_taylor(gen, psi, norm_est)


def _apply_squeeze(xi: complex, psi: np.ndarray) -> np.ndarray:
    """exp((xi^* a^2 - xi a^+2)/2) applied matrix free."""
    d = psi.shape[0]
    n = np.arange(d)
    down = 0.5 * np.conj(xi) * np.sqrt((n[:-2] + 1.0) * (n[:-2] + 2.0))
    up = -0.5 * xi * np.sqrt((n[2:] - 1.0) * n[2:])

    def gen(v):
        out = np.zeros_like(v)
        out[:-2] += down * v[2:]
        out[2:] += up * v[:-2]
        return out

    norm_est = abs(xi) * d
    return _scaled_taylor(gen, psi, norm_est)


def _scaled_taylor(gen, v: np.ndarray, norm_est: float, theta: float = 3.0) -> np.ndarray:
    # generators here are anti-Hermitian, so the plain Taylor substeps are stable
    s = max(1, int(np.ceil(norm_est / theta)))
    out = v.astype(complex)
    for _ in range(s):
        term = out
        acc = out.copy()
        for k in range(1, 60):
            term = gen(term) / (s * k)
            acc += term
            if np.linalg.norm(term) < 1e-16 * np.linalg.norm(acc):
                break
        out = acc
    return out


def non_gaussianity_pure(psi: np.ndarray) -> float:
    """Non-Gaussianity of a normalized pure single-mode state, without forming rho.

    Uses Tr rho_G^2 = 1/(2 nu) and evaluates <psi|rho_G|psi> by applying the
    inverse displacement and squeeze to the state and weighting by the
    thermal spectrum.
    """
    psi = np.asarray(psi, dtype=complex)
    alpha, u, v = single_mode_moments(psi)
    nu, n_th, xi = reference_parameters(u, v)
    chi = psi
    if alpha != 0.0:
        chi = _apply_displacement(-alpha, chi)
    if xi != 0.0:
        chi = _apply_squeeze(-xi, chi)
    p = _thermal_diag(n_th, psi.shape[0])
    overlap = float(np.sum(p * np.abs(chi) ** 2))
    purity_g = 1.0 / (2.0 * nu)
    delta_g = 0.5 * (1.0 + purity_g - 2.0 * overlap)
    return float(max(delta_g, 0.0))


def non_gaussianity(state: np.ndarray, cutoff: int | None = None) -> float:
    """Normalized Hilbert-Schmidt distance to the moment-matched Gaussian state.

    ``state`` is a pure-state vector or a density matrix over a single-mode
    Fock basis.  Zero iff the state is Gaussian (up to truncation error).
    """
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return non_gaussianity_pure(state)
    rho = state
    dim = rho.shape[0]
    cutoff = cutoff or dim
    a = destroy(dim).toarray()
    alpha = np.trace(rho @ a)
    delta = a - alpha * np.eye(dim)
    u = np.trace(rho @ delta @ delta)
    v = float(np.real(np.trace(rho @ delta.conj().T @ delta)))
    rho_g = gaussian_reference_state(alpha, u, v, cutoff)[:dim, :dim]
    diff = rho - rho_g
    num = float(np.real(np.trace(diff @ diff)))
    den = 2.0 * float(np.real(np.trace(rho @ rho)))
    return float(max(num / den, 0.0))

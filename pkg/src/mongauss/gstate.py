"""Gaussian-state toolkit: quadrature covariances, symplectic spectra, entropies.

All entropies are in nats (natural logarithm).  The quadrature basis is mode
ordered, (x_1, p_1, ..., x_M, p_M), with vacuum variance 1/2 on the diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .opalg import GaussianMoments

__all__ = [
    "PhysicalityError",
    "QuadratureCovariance",
    "Partition",
    "to_quadrature",
    "from_quadrature",
    "symplectic_form",
    "symplectic_spectrum",
    "entanglement_entropy",
    "mode_transform",
    "collective_entropy",
    "purity_defect",
    "symplectic_entropy",
]

#: default tolerance on the symplectic-eigenvalue bound nu >= 1/2
PHYSICALITY_TOL = 1e-9


class PhysicalityError(ValueError):
    """Covariance matrix violates the uncertainty bound."""


@dataclass
class QuadratureCovariance:
    """Real symmetric covariance of the quadratures, plus optional first moments."""

    sigma: np.ndarray
    first_moments: np.ndarray | None = None

    def __post_init__(self):
        self.sigma = np.asarray(self.sigma, dtype=float)
        if self.sigma.ndim != 2 or self.sigma.shape[0] != self.sigma.shape[1]:
            raise ValueError("sigma must be square")
        if self.sigma.shape[0] % 2:
            raise ValueError("sigma must be 2M x 2M")
        if self.first_moments is not None:
            self.first_moments = np.asarray(self.first_moments, dtype=float)

    @property
    def n_modes(self) -> int:
        return self.sigma.shape[0] // 2


@dataclass(frozen=True)
class Partition:
    """Nonempty proper subset of mode indices defining a bipartition."""

    subset_a: frozenset[int]

    def __init__(self, modes):
        object.__setattr__(self, "subset_a", frozenset(int(m) for m in modes))
        if not self.subset_a:
            raise ValueError("partition must be nonempty")

    def validate(self, n_modes: int) -> None:
        if any(m < 0 or m >= n_modes for m in self.subset_a):
            raise ValueError(f"partition modes out of range for {n_modes} modes")
        if len(self.subset_a) >= n_modes:
            raise ValueError("partition must be a proper subset of the modes")


def symplectic_form(n_modes: int) -> np.ndarray:
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for i in range(n_modes):
        omega[2 * i, 2 * i + 1] = 1.0
        omega[2 * i + 1, 2 * i] = -1.0
    return omega


def to_quadrature(g: GaussianMoments) -> QuadratureCovariance:
    """Assemble the quadrature covariance from the (u, v) ladder covariances.

    With x = (a + a^+)/sqrt(2) and p = -i(a - a^+)/sqrt(2):
      sigma_xx = 1/2 delta + Re u + Re v,   sigma_pp = 1/2 delta - Re u + Re v,
      sigma_xp = Im u + Im v,               sigma_px = Im u - Im v.
    """
    m = g.n_modes
    sigma = np.zeros((2 * m, 2 * m))
    for i in range(m):
        for j in range(m):
            uij, vij = g.u[i, j], g.v[i, j]
            eye = 0.5 if i == j else 0.0
            sigma[2 * i, 2 * j] = eye + uij.real + vij.real
            sigma[2 * i + 1, 2 * j + 1] = eye - uij.real + vij.real
            sigma[2 * i, 2 * j + 1] = uij.imag + vij.imag
            sigma[2 * i + 1, 2 * j] = uij.imag - vij.imag
    first = np.empty(2 * m)
    first[0::2] = np.sqrt(2.0) * g.alpha.real
    first[1::2] = np.sqrt(2.0) * g.alpha.imag
    return QuadratureCovariance(sigma=sigma, first_moments=first)


def from_quadrature(q: QuadratureCovariance) -> GaussianMoments:
    """Inverse of :func:`to_quadrature` (alpha from the first moments, if present)."""
    m = q.n_modes
    u = np.zeros((m, m), dtype=complex)
    v = np.zeros((m, m), dtype=complex)
    s = q.sigma
    for i in range(m):
        for j in range(m):
            eye = 0.5 if i == j else 0.0
            re_u = 0.5 * (s[2 * i, 2 * j] - s[2 * i + 1, 2 * j + 1])
            im_u = 0.5 * (s[2 * i, 2 * j + 1] + s[2 * i + 1, 2 * j])
            re_v = 0.5 * (s[2 * i, 2 * j] + s[2 * i + 1, 2 * j + 1]) - eye
            im_v = 0.5 * (s[2 * i, 2 * j + 1] - s[2 * i + 1, 2 * j])
            u[i, j] = re_u + 1j * im_u
            v[i, j] = re_v + 1j * im_v
    if q.first_moments is not None:
        alpha = (q.first_moments[0::2] + 1j * q.first_moments[1::2]) / np.sqrt(2.0)
    else:
        alpha = np.zeros(m, dtype=complex)
    return GaussianMoments(alpha, u, v)


def symplectic_spectrum(
    q: QuadratureCovariance, tol: float = PHYSICALITY_TOL
) -> np.ndarray:
    """Sorted symplectic eigenvalues of sigma; raises if any falls below 1/2 - tol."""
    m = q.n_modes
    omega = symplectic_form(m)
    ev = np.linalg.eigvals(1j * omega @ q.sigma)
    nus = np.sort(np.abs(ev))[::2][::-1]  # moduli come in pairs; keep one of each
    nus = np.sort(nus)
    if nus.size and nus[0] < 0.5 - tol:
        raise PhysicalityError(
            f"covariance is unphysical: min symplectic eigenvalue {nus[0]:.12g} < 1/2"
        )
    return nus


def _binary_entropy(nu: float) -> float:
    """h(nu) = (nu+1/2)ln(nu+1/2) - (nu-1/2)ln(nu-1/2), clamped at the pure point."""
    x = nu - 0.5
    if x <= 0.0:
        return 0.0
    return (nu + 0.5) * np.log(nu + 0.5) - x * np.log(x)


def symplectic_entropy(nus) -> float:
    return float(sum(_binary_entropy(float(nu)) for nu in np.atleast_1d(nus)))


def purity_defect(g: GaussianMoments) -> float:
    """Largest symplectic-eigenvalue excess over 1/2; zero iff the state is pure.

    Never raises: slightly sub-1/2 eigenvalues (rounded inputs, integration
    roundoff) clamp to zero rather than triggering the physicality gate.
    """
    nus = symplectic_spectrum(to_quadrature(g), tol=np.inf)
    return float(max(np.max(nus) - 0.5, 0.0))


def entanglement_entropy(
    g: GaussianMoments,
    part: Partition,
    tol: float = PHYSICALITY_TOL,
    purity_tol: float = 1e-7,
) -> float:
    """Entanglement entropy (nats) of a pure Gaussian state across ``part``.

    Reduces the quadrature covariance to the partition's modes and sums
    h(nu) over the reduced symplectic spectrum.  The global state must be
    pure; otherwise the reduced entropy is not an entanglement measure and a
    ValueError is raised.
    """
    part.validate(g.n_modes)
    q = to_quadrature(g)
    nus = symplectic_spectrum(q, tol=tol)
    defect = float(np.max(nus) - 0.5)
    if defect > purity_tol:
        raise ValueError(
            f"global state is not pure (purity defect {defect:.3e}); "
            "partition entropy would not measure entanglement"
        )
    idx = sorted(part.subset_a)
    rows = np.concatenate([[2 * i, 2 * i + 1] for i in idx])
    sigma_a = q.sigma[np.ix_(rows, rows)]
    nus_a = symplectic_spectrum(QuadratureCovariance(sigma_a), tol=tol)
    return symplectic_entropy(nus_a)


def mode_transform(g: GaussianMoments, unitary: np.ndarray, tol: float = 1e-12) -> GaussianMoments:
    """Passive linear-optics transform a'_i = sum_j U_ij a_j on the moments."""
    un = np.asarray(unitary, dtype=complex)
    m = g.n_modes
    if un.shape != (m, m):
        raise ValueError(f"unitary must be {m}x{m}")
    if np.max(np.abs(un @ un.conj().T - np.eye(m))) > tol:
        raise ValueError("matrix is not unitary within tolerance")
    alpha = un @ g.alpha
    u = un @ g.u @ un.T
    v = un.conj() @ g.v @ un.T
    return GaussianMoments(alpha, u, v)


def collective_entropy(v: float) -> float:
    """Half-system entanglement entropy of a permutation-symmetric pure mode.

    S(v) = sqrt(1+v) acoth(sqrt(1+v)) + (1/2) ln(v/4), continuous at v = 0
    where it vanishes; strictly increasing and divergent as v grows.
    """
    v = float(v)
    if v < 0:
        raise ValueError("v must be nonnegative")
    if v < 1e-8:
        # leading behavior (v/4)(1 - ln(v/4)); avoids the 0 * inf ambiguity
        return 0.0 if v == 0.0 else (v / 4.0) * (1.0 - np.log(v / 4.0))
    x = np.sqrt(1.0 + v)
    acoth = 0.5 * np.log((x + 1.0) / (x - 1.0))
    return float(x * acoth + 0.5 * np.log(v / 4.0))

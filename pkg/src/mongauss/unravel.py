"""Measurement-unraveling contracts: noise second moments and jump statistics.

The three supported monitoring schemes (quantum jump, homodyne, heterodyne)
share a single complex-noise interface: each channel carries an increment dZ
with E[dZ] = 0, E[dZ* dZ] = dt and E[dZ dZ] = Upsilon dt, where the factor
Upsilon selects the scheme.  Quantum-jump monitoring additionally admits a
coarse-grained Gaussian approximation of the jump counts valid when the
per-step mean count is macroscopic.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SchemeTag",
    "QjZeroPolicy",
    "UnravelingScheme",
    "QUANTUM_JUMP",
    "HOMODYNE",
    "HETERODYNE",
    "NoiseIncrement",
    "QjZeroExpectationError",
    "upsilon",
    "sample_noise",
    "coarse_grained_jumps",
    "noise_stream",
    "trajectory_seed_sequence",
]


class SchemeTag(enum.Enum):
    QUANTUM_JUMP = "quantum_jump"
    HOMODYNE = "homodyne"
    HETERODYNE = "heterodyne"


class QjZeroPolicy(enum.Enum):
    """What to do when the quantum-jump factor hits <L> = 0, where it is undefined."""

    ERROR = "error"
    HETERODYNE_FALLBACK = "heterodyne_fallback"


class QjZeroExpectationError(ValueError):
    """Quantum-jump unraveling evaluated at vanishing jump-operator expectation."""


@dataclass(frozen=True)
class UnravelingScheme:
    tag: SchemeTag
    qj_zero_policy: QjZeroPolicy = QjZeroPolicy.ERROR
    qj_zero_epsilon: float = 1e-12

    @classmethod
    def from_name(cls, name: str, qj_zero_policy: str = "error") -> "UnravelingScheme":
        return cls(SchemeTag(name), QjZeroPolicy(qj_zero_policy))

    @property
    def name(self) -> str:
        return self.tag.value


QUANTUM_JUMP = UnravelingScheme(SchemeTag.QUANTUM_JUMP)
HOMODYNE = UnravelingScheme(SchemeTag.HOMODYNE)
HETERODYNE = UnravelingScheme(SchemeTag.HETERODYNE)


@dataclass
class NoiseIncrement:
    """Per-channel complex noise increments over one time step.

    ``wiener`` records the underlying real Wiener draws (one per channel for
    quantum jump and homodyne, two per channel for heterodyne) so a step can
    be replayed exactly.
    """

    dz: np.ndarray
    dt: float
    wiener: np.ndarray


def upsilon(scheme: UnravelingScheme, lexp: complex) -> complex:
    """Second-moment factor E[dZ^2]/dt for one channel.

    Homodyne and heterodyne are state independent (1 and 0).  Quantum jump
    gives the unit-modulus phase lexp^2/|lexp|^2, undefined at lexp = 0; the
    scheme's zero policy then either raises or falls back to the heterodyne
    value.
    """
    if scheme.tag is SchemeTag.HOMODYNE:
        return 1.0 + 0.0j
    if scheme.tag is SchemeTag.HETERODYNE:
        return 0.0 + 0.0j
    mag = abs(lexp)
    if mag < scheme.qj_zero_epsilon:
        if scheme.qj_zero_policy is QjZeroPolicy.HETERODYNE_FALLBACK:
            return 0.0 + 0.0j
        raise QjZeroExpectationError(
            f"quantum-jump factor undefined at |<L>| = {mag:.3e} < "
            f"{scheme.qj_zero_epsilon:.1e}"
        )
    return (lexp / mag) ** 2


def sample_noise(
    scheme: UnravelingScheme,
    lexp,
    dt: float,
    rng: np.random.Generator,
) -> NoiseIncrement:
    """Draw one dZ per channel with the scheme's second moments.

    ``lexp`` is the array of per-channel jump-operator expectations (only the
    phase matters, and only for quantum jump).  Channels are independent.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    lexp = np.atleast_1d(np.asarray(lexp, dtype=complex))
    n = lexp.shape[0]
    root = np.sqrt(dt)
    if scheme.tag is SchemeTag.HETERODYNE:
        w = rng.standard_normal((2, n)) * root
        dz = (w[0] + 1j * w[1]) / np.sqrt(2.0)
        return NoiseIncrement(dz=dz, dt=dt, wiener=w)
    w = rng.standard_normal(n) * root
    if scheme.tag is SchemeTag.HOMODYNE:
        return NoiseIncrement(dz=w.astype(complex), dt=dt, wiener=w)
    phases = np.empty(n, dtype=complex)
    for k in range(n):
        mag = abs(lexp[k])
        if mag < scheme.qj_zero_epsilon:
            if scheme.qj_zero_policy is QjZeroPolicy.HETERODYNE_FALLBACK:
                phases[k] = 1.0
                continue
            raise QjZeroExpectationError(
                f"quantum-jump noise undefined at channel {k}: |<L>| = {mag:.3e}"
            )
        phases[k] = lexp[k] / mag
    return NoiseIncrement(dz=phases * w, dt=dt, wiener=w)


def coarse_grained_jumps(lexp: complex, dt: float, rng: np.random.Generator) -> float:
    """Gaussian surrogate for the jump count in one channel over dt.

    Mean and variance both equal |<L>|^2 dt, clamped at zero since counts are
    nonnegative (the Gaussian tail can undershoot when the mean count is not
    macroscopic).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    mag = abs(lexp)
    if mag == 0.0:
        return 0.0
    mu = mag * mag * dt
    dm = mu + mag * np.sqrt(dt) * rng.standard_normal()
    return max(dm, 0.0)


def trajectory_seed_sequence(master_seed: int, trajectory_id: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(trajectory_id),))


def noise_stream(
    master_seed: int, trajectory_id: int = 0, channel_id: int = 0
) -> np.random.Generator:
    """Counter-based random stream for one (trajectory, channel) pair.

    Streams are derived from the master seed through the key hierarchy
    (master seed, trajectory id, channel id) on a Philox counter generator.
    Draw k of a stream is a pure function of that triple and k, so ensembles
    are reproducible under any parallel schedule that assigns whole
    trajectories to workers and consumes draws in step order.
    """
    ss = np.random.SeedSequence(
        entropy=int(master_seed), spawn_key=(int(trajectory_id), int(channel_id))
    )
    return np.random.Generator(np.random.Philox(ss))

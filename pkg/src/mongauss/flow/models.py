"""Model definitions for the deterministic large-N flows.

Kerr-type lattice models (single cavity, coupled dimer) are specified by
their Hamiltonian/jump-operator builders so the symbolic generator can act
on them; the collective spin model is integrated in its rotating frame and
carries only its drive/dissipation data.
All rates are in units of the loss rate kappa.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .. import opalg

__all__ = ["KerrLatticeModel", "CollectiveSpinModel", "single_kerr", "bose_hubbard_dimer"]


@dataclass
class KerrLatticeModel:
    """Driven-dissipative Kerr modes with beam-splitter couplings.

    Per mode i: detuning ``delta``, two-body interaction ``u_int`` (carried
    with 1/N so the energy stays extensive), coherent drive ``drives[i]``
    (carried with sqrt(N)), single-photon loss at rate ``kappa``.  The real
    symmetric ``coupling[i, j]`` enters the Hamiltonian as
    -coupling_ij (a_i^+ a_j + a_j^+ a_i) for i < j.
    """

    name: str
    n_modes: int
    delta: float
    u_int: float
    drives: np.ndarray
    kappa: float
    coupling: np.ndarray = field(default=None)
    drive_pattern: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        self.drives = np.asarray(self.drives, dtype=float).reshape(self.n_modes)
        if self.drive_pattern is None:
            self.drive_pattern = np.ones(self.n_modes)
        self.drive_pattern = np.asarray(self.drive_pattern, dtype=float).reshape(
            self.n_modes
        )
        if self.coupling is None:
            self.coupling = np.zeros((self.n_modes, self.n_modes))
        self.coupling = np.asarray(self.coupling, dtype=float).reshape(
            self.n_modes, self.n_modes
        )
        if np.max(np.abs(self.coupling - self.coupling.T)) > 0:
            raise ValueError("coupling matrix must be symmetric")
        if np.max(np.abs(np.diag(self.coupling))) > 0:
            raise ValueError("coupling matrix must have zero diagonal")

    @property
    def parameters(self) -> dict[str, float]:
        p = {"delta": self.delta, "u_int": self.u_int, "kappa": self.kappa}
        for i, f in enumerate(self.drives):
            p[f"drive_{i}"] = float(f)
        if self.n_modes > 1:
            p["coupling"] = float(self.coupling[0, 1])
        return p

    def with_drive(self, amplitude: float) -> "KerrLatticeModel":
        """Same model with the drive rescaled along its sign pattern."""
        return KerrLatticeModel(
            name=self.name,
            n_modes=self.n_modes,
            delta=self.delta,
            u_int=self.u_int,
            drives=float(amplitude) * self.drive_pattern,
            kappa=self.kappa,
            coupling=self.coupling.copy(),
            drive_pattern=self.drive_pattern.copy(),
        )

    def build_operators(self):
        """Hamiltonian and jump operators as normal-ordered polynomials."""
        h = opalg.zero()
        for i in range(self.n_modes):
            h = h + (-self.delta) * opalg.number(i)
            h = h + (0.5 * self.u_int) * (
                opalg.creation(i) * opalg.creation(i) * opalg.annihilation(i) * opalg.annihilation(i)
            ).shift_n_power(Fraction(-1))
            if self.drives[i] != 0.0:
                h = h + self.drives[i] * (
                    opalg.creation(i, Fraction(1, 2)) + opalg.annihilation(i, Fraction(1, 2))
                )
            for j in range(i + 1, self.n_modes):
                jij = self.coupling[i, j]
                if jij != 0.0:
                    h = h - jij * (
                        opalg.creation(i) * opalg.annihilation(j)
                        + opalg.creation(j) * opalg.annihilation(i)
                    )
        ls = [np.sqrt(self.kappa) * opalg.annihilation(i) for i in range(self.n_modes)]
        opalg.check_extensivity(h, ls)
        return h, ls


def single_kerr(delta: float, u_int: float, drive: float, kappa: float = 1.0) -> KerrLatticeModel:
    return KerrLatticeModel(
        name="kerr",
        n_modes=1,
        delta=delta,
        u_int=u_int,
        drives=np.array([drive]),
        kappa=kappa,
        drive_pattern=np.array([1.0]),
    )


def bose_hubbard_dimer(
    delta: float, u_int: float, drive: float, coupling: float, kappa: float = 1.0
) -> KerrLatticeModel:
    """Two coupled Kerr cavities driven antisymmetrically (F_1 = -F_2 = drive)."""
    j = np.array([[0.0, coupling], [coupling, 0.0]])
    return KerrLatticeModel(
        name="dimer",
        n_modes=2,
        delta=delta,
        u_int=u_int,
        drives=np.array([drive, -drive]),
        kappa=kappa,
        coupling=j,
        drive_pattern=np.array([1.0, -1.0]),
    )


@dataclass
class CollectiveSpinModel:
    """Collectively driven and damped spin ensemble, in rotating-frame variables.

    The drive couples through ``c_field`` (components along S^x, S^y, S^z)
    with amplitude ``omega``; the collective decay channel couples through
    ``c_decay`` at rate ``kappa``.  Defaults give a transverse drive with
    lowering-operator decay.
    """

    omega: float
    kappa: float = 1.0
    c_field: tuple = (1.0, 0.0, 0.0)
    c_decay: tuple = (1.0, -1.0j, 0.0)
    name: str = "spin"

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        self.c_field = tuple(complex(c) for c in self.c_field)
        self.c_decay = tuple(complex(c) for c in self.c_decay)

    @property
    def n_modes(self) -> int:
        return 1

    @property
    def parameters(self) -> dict[str, float]:
        return {"omega": self.omega, "kappa": self.kappa}

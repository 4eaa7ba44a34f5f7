"""Trajectory ensembles with reproducible seeding and deterministic aggregation.

Each trajectory draws its noise from streams keyed by (master seed,
trajectory id, channel id), and per-trajectory results are written into
arrays indexed by trajectory id before averaging, so the statistics are
bitwise reproducible under any execution order or worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..flow.models import CollectiveSpinModel, KerrLatticeModel
from ..unravel import SchemeTag, UnravelingScheme, noise_stream
from .dicke import all_down_state, collective_spin_matrices, dicke_half_entropy, plus_x_state
from .fock import KerrNonHermitianOp, coherent_state, default_cutoff, kerr_fock_operators
from .gaussianref import non_gaussianity_pure
from .moments import apply_destroy, single_mode_moments
from .trajectories import evolve_diffusive_batch, evolve_qj

__all__ = ["EnsembleError", "EnsembleStats", "KerrEnsembleTask", "SpinEnsembleTask", "ensemble_run"]

#: reserved channel id for the jump-process draws (thresholds, channel choice)
JUMP_STREAM_CHANNEL = 0
#: diffusive noise channels are offset so they never collide with the jump stream
NOISE_CHANNEL_OFFSET = 1


class EnsembleError(RuntimeError):
    pass


@dataclass
class EnsembleStats:
    times: np.ndarray
    means: dict[str, np.ndarray]
    stds: dict[str, np.ndarray]
    n_traj: int
    master_seed: int
    failures: list[tuple[int, str]] = field(default_factory=list)


@dataclass
class KerrEnsembleTask:
    """Single-mode Kerr trajectories at finite N, with normalized observables."""

    model: KerrLatticeModel
    scheme: UnravelingScheme
    n_scale: float
    alpha0: complex
    t_max: float
    dt_out: float
    diffusive_dt: float = 1e-3
    cutoff: int | None = None
    include_delta_g: bool = True
    delta_g_stride: int = 1

    def __post_init__(self):
        if self.model.n_modes != 1:
            raise ValueError("KerrEnsembleTask expects the single-mode model")
        if self.cutoff is None:
            # populations can overshoot the steady state during the transient
            guess = max(abs(self.alpha0) ** 2 * 3.0, 1.5)
            self.cutoff = default_cutoff(self.n_scale, guess)
        self._h, self._ls = kerr_fock_operators(self.model, self.n_scale, self.cutoff)
        self._h_nh = KerrNonHermitianOp(self.model, self.n_scale, self.cutoff)
        self._psi0 = coherent_state(self.alpha0 * np.sqrt(self.n_scale), self.cutoff)

    @property
    def times(self) -> np.ndarray:
        return np.arange(0.0, self.t_max + 0.5 * self.dt_out, self.dt_out)

    @property
    def observable_names(self) -> list[str]:
        names = ["n_norm", "v", "re_alpha_norm", "im_alpha_norm"]
        if self.include_delta_g:
            names.append("delta_g")
        return names

    def _observe(self):
        root_n = np.sqrt(self.n_scale)
        stride = max(1, int(self.delta_g_stride))

        def observe(psi, k):
            alpha, _, v = single_mode_moments(psi)
            napsi = apply_destroy(psi)
            n_mean = float(np.real(np.vdot(napsi, napsi)))
            out = {
                "n_norm": n_mean / self.n_scale,
                "v": v,
                "re_alpha_norm": alpha.real / root_n,
                "im_alpha_norm": alpha.imag / root_n,
            }
            if self.include_delta_g and k % stride == 0:
                out["delta_g"] = non_gaussianity_pure(psi)
            return out

        return observe

    def run(self, trajectory_id: int, master_seed: int) -> dict[str, np.ndarray]:
        observe = self._observe()
        if self.scheme.tag is SchemeTag.QUANTUM_JUMP:
            rng = noise_stream(master_seed, trajectory_id, JUMP_STREAM_CHANNEL)
            res = evolve_qj(
                self._h,
                self._ls,
                self._psi0,
                self.t_max,
                self.dt_out,
                rng,
                observe,
                h_nh=self._h_nh,
            )
            return res.observables
        rngs = [
            [
                noise_stream(master_seed, trajectory_id, NOISE_CHANNEL_OFFSET + c)
                for c in range(len(self._ls))
            ]
        ]
        res = evolve_diffusive_batch(
            self.scheme,
            self._h,
            self._ls,
            self._psi0[:, None],
            self.diffusive_dt,
            self.t_max,
            self.dt_out,
            rngs,
            observe=observe,
        )
        return {k: v[:, 0] for k, v in res.observables.items()}

    def run_batch(self, trajectory_ids, master_seed: int) -> dict[str, np.ndarray]:
        if self.scheme.tag is SchemeTag.QUANTUM_JUMP:
            raise NotImplementedError("quantum-jump trajectories run one at a time")
        b = len(trajectory_ids)
        block = np.repeat(self._psi0[:, None], b, axis=1)
        rngs = [
            [
                noise_stream(master_seed, tid, NOISE_CHANNEL_OFFSET + c)
                for c in range(len(self._ls))
            ]
            for tid in trajectory_ids
        ]
        res = evolve_diffusive_batch(
            self.scheme,
            self._h,
            self._ls,
            block,
            self.diffusive_dt,
            self.t_max,
            self.dt_out,
            rngs,
            observe=self._observe(),
        )
        return res.observables


@dataclass
class SpinEnsembleTask:
    """Collective-spin trajectories at finite S in the symmetric Dicke sector."""

    model: CollectiveSpinModel
    scheme: UnravelingScheme
    s: float
    t_max: float
    dt_out: float
    diffusive_dt: float = 1e-3
    include_entropy: bool = True
    initial: str = "plus_x"

    def __post_init__(self):
        self._h, self._ls = collective_spin_matrices(self.model, self.s)
        if self.initial == "plus_x":
            self._psi0 = plus_x_state(self.s)
        elif self.initial == "all_down":
            self._psi0 = all_down_state(self.s)
        else:
            raise ValueError(f"unknown initial state {self.initial!r}")
        m = self.s - np.arange(int(2 * self.s + 1))
        self._mz_weights = m / self.s

    @property
    def times(self) -> np.ndarray:
        return np.arange(0.0, self.t_max + 0.5 * self.dt_out, self.dt_out)

    @property
    def observable_names(self) -> list[str]:
        return ["mz"] + (["entropy"] if self.include_entropy else [])

    def _observe(self):
        weights = self._mz_weights
        with_entropy = self.include_entropy

        def observe(psi, k):
            out = {"mz": float(np.sum(weights * np.abs(psi) ** 2))}
            if with_entropy:
                out["entropy"] = dicke_half_entropy(psi)
            return out

        return observe

    def run(self, trajectory_id: int, master_seed: int) -> dict[str, np.ndarray]:
        observe = self._observe()
        if self.scheme.tag is SchemeTag.QUANTUM_JUMP:
            rng = noise_stream(master_seed, trajectory_id, JUMP_STREAM_CHANNEL)
            res = evolve_qj(
                self._h,
                self._ls,
                self._psi0,
                self.t_max,
                self.dt_out,
                rng,
                observe,
                check_leakage=False,  # the Dicke sector is closed, nothing leaks
            )
            return res.observables
        rngs = [
            [
                noise_stream(master_seed, trajectory_id, NOISE_CHANNEL_OFFSET + c)
                for c in range(len(self._ls))
            ]
        ]
        res = evolve_diffusive_batch(
            self.scheme,
            self._h,
            self._ls,
            self._psi0[:, None],
            self.diffusive_dt,
            self.t_max,
            self.dt_out,
            rngs,
            observe=observe,
        )
        return {k: v[:, 0] for k, v in res.observables.items()}

    def run_batch(self, trajectory_ids, master_seed: int) -> dict[str, np.ndarray]:
        if self.scheme.tag is SchemeTag.QUANTUM_JUMP:
            raise NotImplementedError("quantum-jump trajectories run one at a time")
        b = len(trajectory_ids)
        block = np.repeat(self._psi0[:, None], b, axis=1)
        rngs = [
            [
                noise_stream(master_seed, tid, NOISE_CHANNEL_OFFSET + c)
                for c in range(len(self._ls))
            ]
            for tid in trajectory_ids
        ]
        res = evolve_diffusive_batch(
            self.scheme,
            self._h,
            self._ls,
            block,
            self.diffusive_dt,
            self.t_max,
            self.dt_out,
            rngs,
            observe=self._observe(),
        )
        return res.observables


def _run_one(task, master_seed: int, trajectory_id: int):
    try:
        return trajectory_id, task.run(trajectory_id, master_seed), None
    except Exception as exc:  # recorded per trajectory, rethrown collectively
        return trajectory_id, None, f"{type(exc).__name__}: {exc}"


def ensemble_run(
    task,
    n_traj: int,
    master_seed: int,
    n_workers: int = 1,
    max_fail_fraction: float = 0.01,
    batch_size: int = 256,
) -> EnsembleStats:
    """Run ``n_traj`` trajectories of ``task`` and aggregate mean/std per observable.

    Diffusive tasks are executed in vectorized batches when the task provides
    ``run_batch``; quantum-jump tasks run per trajectory, optionally across a
    process pool.  Results are keyed by trajectory id, so the statistics do
    not depend on scheduling.  If more than ``max_fail_fraction`` of the
    trajectories abort, an :class:`EnsembleError` carries the failure log.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be at least 1")
    times = task.times
    names = list(task.observable_names)
    data = {name: np.full((n_traj, times.size), np.nan) for name in names}
    failures: list[tuple[int, str]] = []

    can_batch = hasattr(task, "run_batch") and task.scheme.tag is not SchemeTag.QUANTUM_JUMP
    if can_batch:
        ids = list(range(n_traj))
        for lo in range(0, n_traj, batch_size):
            chunk = ids[lo : lo + batch_size]
            out = task.run_batch(chunk, master_seed)
            for name in names:
                data[name][chunk, :] = out[name].T
    elif n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            for tid, obs, err in pool.map(
                _run_one,
                [task] * n_traj,
                [master_seed] * n_traj,
                range(n_traj),
                chunksize=max(1, n_traj // (4 * n_workers)),
            ):
                if err is not None:
                    failures.append((tid, err))
                    continue
                for name in names:
                    data[name][tid, :] = obs[name]
    else:
        for tid in range(n_traj):
            tid, obs, err = _run_one(task, master_seed, tid)
            if err is not None:
                failures.append((tid, err))
                continue
            for name in names:
                data[name][tid, :] = obs[name]

    if len(failures) > max_fail_fraction * n_traj:
        raise EnsembleError(
            f"{len(failures)}/{n_traj} trajectories failed; first: {failures[0]}"
        )
    ok = ~np.isnan(data[names[0]][:, 0])
    means = {name: data[name][ok].mean(axis=0) for name in names}
    stds = {name: data[name][ok].std(axis=0, ddof=0) for name in names}
    return EnsembleStats(
        times=times,
        means=means,
        stds=stds,
        n_traj=int(np.sum(ok)),
        master_seed=master_seed,
        failures=failures,
    )

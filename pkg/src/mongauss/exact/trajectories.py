"""Finite-size stochastic pure-state trajectories in truncated Hilbert spaces.

Quantum-jump evolution uses the waiting-time construction: the state is
propagated under the non-Hermitian drift with an embedded fixed micro step
(4th-order Runge-Kutta), the squared norm is monitored against a uniform
threshold, and the jump time is located by bisection inside the crossing
step.  Diffusive (homodyne/heterodyne) evolution is a fixed-step
Euler-Maruyama scheme for the normalized state equation with explicit
renormalization after every step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..unravel import SchemeTag, UnravelingScheme
from .fock import leakage

__all__ = [
    "TrajectoryResult",
    "CutoffLeakageError",
    "evolve_qj",
    "evolve_diffusive",
    "evolve_diffusive_batch",
]

NORM_DRIFT_FLAG = 1e-6
NORM_DRIFT_ABORT = 1e-1


class CutoffLeakageError(RuntimeError):
    """Significant population reached the top of the truncated basis."""


@dataclass
class TrajectoryResult:
    times: np.ndarray
    observables: dict[str, np.ndarray]
    jump_counts: np.ndarray | None = None
    final_state: np.ndarray | None = None
    max_norm_drift: float = 0.0
    dt_flagged: bool = False
    meta: dict = field(default_factory=dict)


def _rk4_step(h_nh, psi, dt):
    """One Runge-Kutta step of d(psi)/dt = -i H_nh psi."""

    def f(x):
        return -1j * (h_nh @ x)

    k1 = f(psi)
    k2 = f(psi + 0.5 * dt * k1)
    k3 = f(psi + 0.5 * dt * k2)
    k4 = f(psi + dt * k3)
    return psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _one_norm(op) -> float:
    if hasattr(op, "one_norm"):
        return op.one_norm()
    return float(np.max(np.abs(op).sum(axis=0)))


def _default_micro_dt(h_nh, dt_out: float, safety: float = 0.7) -> float:
    # the 1-norm bounds the spectral radius; occupied states sit well below it
    scale = _one_norm(h_nh)
    dt = dt_out if scale == 0.0 else min(dt_out, safety / scale)
    n_sub = max(1, int(np.ceil(dt_out / dt)))
    return dt_out / n_sub


def evolve_qj(
    hamiltonian,
    jump_ops,
    psi0: np.ndarray,
    t_max: float,
    dt_out: float,
    rng: np.random.Generator,
    observe: Callable[[np.ndarray], dict[str, float]] | None = None,
    micro_dt: float | None = None,
    fixed_step: bool = False,
    max_leakage: float = 1e-6,
    check_leakage: bool = True,
    bisection_iters: int = 16,
    h_nh=None,
) -> TrajectoryResult:
    """Monte-Carlo wavefunction trajectory with jump counting.

    ``observe(psi, k)`` maps the normalized state and output index to a dict
    of named observables, sampled on the dt_out grid.  ``fixed_step=True``
    switches to first-order Bernoulli jump sampling per micro step
    (cross-check mode).  A precombined effective drift operator (anything
    supporting ``@`` on vectors) can be passed as ``h_nh`` to bypass the
    sparse assembly, e.g. :class:`mongauss.exact.fock.KerrNonHermitianOp`.
    """
    if h_nh is None:
        h_nh = (hamiltonian - 0.5j * sum(L.conj().T @ L for L in jump_ops)).tocsr()
    n_ch = len(jump_ops)
    psi = np.asarray(psi0, dtype=complex).copy()
    psi /= np.linalg.norm(psi)
    if micro_dt is None:
        micro_dt = _default_micro_dt(h_nh, dt_out)
    n_sub = max(1, int(round(dt_out / micro_dt)))
    micro_dt = dt_out / n_sub

    times = np.arange(0.0, t_max + 0.5 * dt_out, dt_out)
    obs_out: dict[str, np.ndarray] = {}
    jumps = np.zeros((times.size, n_ch))
    jump_tally = np.zeros(n_ch)

    def record(k: int, state: np.ndarray):
        norm = np.linalg.norm(state)
        normalized = state / norm
        if check_leakage and leakage(normalized) > max_leakage:
            raise CutoffLeakageError(
                f"basis leakage {leakage(normalized):.2e} > {max_leakage:.0e} at "
                f"t = {times[k]:.4g}; raise the cutoff"
            )
        if observe is not None:
            for name, val in observe(normalized, k).items():
                if name not in obs_out:
                    obs_out[name] = np.full(times.size, np.nan)
                obs_out[name][k] = val
        jumps[k] = jump_tally

    def do_jump(state: np.ndarray) -> np.ndarray:
        weights = np.array([np.linalg.norm(L @ state) ** 2 for L in jump_ops])
        total = weights.sum()
        if total <= 0.0:
            return state
        ch = int(rng.choice(n_ch, p=weights / total))
        jump_tally[ch] += 1.0
        new = jump_ops[ch] @ state
        return new / np.linalg.norm(new)

    def advance_segment(state: np.ndarray, seg: float, threshold: float):
        """Propagate over one micro segment, resolving every norm crossing.

        The squared norm decays monotonically under the non-Hermitian drift,
        so each crossing is bracketed by the segment and located by
        bisection; several jumps per segment are handled by shrinking the
        remaining segment after each jump.
        """
        while seg > 1e-15 * micro_dt:
            stepped = _rk4_step(h_nh, state, seg)
            if np.real(np.vdot(stepped, stepped)) >= threshold:
                return stepped, threshold
            lo, hi = 0.0, seg
            for _ in range(bisection_iters):
                mid = 0.5 * (lo + hi)
                trial = _rk4_step(h_nh, state, mid) if mid > 0.0 else state
                if np.real(np.vdot(trial, trial)) >= threshold:
                    lo = mid
                else:
                    hi = mid
            at_jump = _rk4_step(h_nh, state, lo) if lo > 0.0 else state
            state = do_jump(at_jump / np.linalg.norm(at_jump))
            threshold = rng.random()
            seg = seg - lo
        return state, threshold

    record(0, psi)
    threshold = rng.random()
    for k in range(1, times.size):
        for _ in range(n_sub):
            if fixed_step:
                rates = np.array([np.linalg.norm(L @ psi) ** 2 for L in jump_ops])
                rates /= np.linalg.norm(psi) ** 2
                p_jump = rates * micro_dt
                if rng.random() < p_jump.sum():
                    ch = int(rng.choice(n_ch, p=p_jump / p_jump.sum()))
                    jump_tally[ch] += 1.0
                    psi = jump_ops[ch] @ psi
                    psi /= np.linalg.norm(psi)
                else:
                    psi = _rk4_step(h_nh, psi, micro_dt)
                    psi /= np.linalg.norm(psi)
                continue
            psi, threshold = advance_segment(psi, micro_dt, threshold)
        record(k, psi)

    final = psi / np.linalg.norm(psi)
    return TrajectoryResult(
        times=times,
        observables=obs_out,
        jump_counts=jumps,
        final_state=final,
        meta={"micro_dt": micro_dt, "fixed_step": fixed_step},
    )


def evolve_diffusive_batch(
    scheme: UnravelingScheme,
    hamiltonian,
    jump_ops,
    psi0_block: np.ndarray,
    dt: float,
    t_max: float,
    dt_out: float,
    rngs,
    observe: Callable[[np.ndarray], dict[str, float]] | None = None,
    noise_block_steps: int = 2048,
    exact_linear: bool | None = None,
) -> TrajectoryResult:
    """First-order diffusive trajectories, vectorized over a batch.

    ``psi0_block`` has shape (d, B); ``rngs[b][c]`` is the noise stream of
    batch column b and channel c, so results are independent of batching.
    Observables are evaluated per column on the dt_out grid; outputs have
    shape (T, B).

    The state-independent drift -iH - (1/2) sum L^+L is stiff at desk-scale
    steps, so by default (``exact_linear`` unset, dimension <= 4096) it is
    applied exactly through a precomputed one-step propagator while the
    expectation-dependent drift and the noise stay first order, preserving
    the Euler-Maruyama weak order without the explicit-Euler step-size
    limit.  ``exact_linear=False`` forces the plain explicit scheme.
    """
    if scheme.tag not in (SchemeTag.HOMODYNE, SchemeTag.HETERODYNE):
        raise ValueError("diffusive evolution supports homodyne and heterodyne only")
    h = hamiltonian.tocsr()
    ls = [L.tocsr() for L in jump_ops]
    n_ch = len(ls)
    psi = np.array(psi0_block, dtype=complex)
    if psi.ndim == 1:
        psi = psi[:, None]
    psi = psi / np.linalg.norm(psi, axis=0, keepdims=True)
    d, b = psi.shape
    if len(rngs) != b:
        raise ValueError("need one noise stream per batch column")

    n_sub = max(1, int(round(dt_out / dt)))
    dt = dt_out / n_sub
    times = np.arange(0.0, t_max + 0.5 * dt_out, dt_out)
    n_steps = (times.size - 1) * n_sub

    if exact_linear is None:
        exact_linear = d <= 4096
    u0 = None
    if exact_linear:
        from scipy.linalg import expm

        h_eff = h.toarray() - 0.5j * sum((L.conj().T @ L).toarray() for L in ls)
        u0 = expm(-1j * dt * h_eff)

    obs_out: dict[str, np.ndarray] = {}

    def record(k: int):
        if observe is None:
            return
        for col in range(b):
            for name, val in observe(psi[:, col], k).items():
                if name not in obs_out:
                    obs_out[name] = np.full((times.size, b), np.nan)
                obs_out[name][k, col] = val

    record(0)
    max_drift = 0.0
    heterodyne = scheme.tag is SchemeTag.HETERODYNE
    root_dt = np.sqrt(dt)

    step = 0
    buf = None
    buf_pos = 0
    k_out = 1
    while step < n_steps:
        if buf is None or buf_pos == buf.shape[0]:
            block = min(noise_block_steps, n_steps - step)
            per_ch = 2 if heterodyne else 1
            buf = np.empty((block, n_ch, b), dtype=complex)
            for col, streams in enumerate(rngs):
                for ch in range(n_ch):
                    w = streams[ch].standard_normal((block, per_ch)) * root_dt
                    if heterodyne:
                        buf[:, ch, col] = (w[:, 0] + 1j * w[:, 1]) / np.sqrt(2.0)
                    else:
                        buf[:, ch, col] = w[:, 0]
            buf_pos = 0

        dz = buf[buf_pos]
        buf_pos += 1
        step += 1

        lpsi = [L @ psi for L in ls]
        lers = np.array(
            [np.einsum("db,db->b", psi.conj(), lp) for lp in lpsi]
        )
        if exact_linear:
            stage = psi.copy()
            for k in range(n_ch):
                lk = lers[k]
                stage += dt * (np.conj(lk)[None, :] * lpsi[k] - 0.5 * (np.abs(lk) ** 2)[None, :] * psi)
                stage += (lpsi[k] - lk[None, :] * psi) * np.conj(dz[k])[None, :]
            psi = u0 @ stage
        else:
            drift = -1j * (h @ psi)
            for k in range(n_ch):
                ldl_psi = ls[k].conj().T @ lpsi[k]
                lk = lers[k]
                drift = drift - 0.5 * (
                    ldl_psi - 2.0 * np.conj(lk)[None, :] * lpsi[k] + (np.abs(lk) ** 2)[None, :] * psi
                )
            noise = np.zeros_like(psi)
            for k in range(n_ch):
                noise = noise + (lpsi[k] - lers[k][None, :] * psi) * np.conj(dz[k])[None, :]
            psi = psi + dt * drift + noise
        norms = np.linalg.norm(psi, axis=0)
        max_drift = max(max_drift, float(np.max(np.abs(norms - 1.0))))
        if max_drift > NORM_DRIFT_ABORT:
            raise RuntimeError(
                f"diffusive step unstable (norm drift {max_drift:.2e}); reduce dt"
            )
        psi = psi / norms[None, :]

        if step % n_sub == 0:
            record(k_out)
            k_out += 1

    return TrajectoryResult(
        times=times,
        observables=obs_out,
        final_state=psi,
        max_norm_drift=max_drift,
        dt_flagged=max_drift > NORM_DRIFT_FLAG,
        meta={"dt": dt, "scheme": scheme.name},
    )


def evolve_diffusive(
    scheme: UnravelingScheme,
    hamiltonian,
    jump_ops,
    psi0: np.ndarray,
    dt: float,
    t_max: float,
    dt_out: float,
    rng,
    observe: Callable[[np.ndarray], dict[str, float]] | None = None,
) -> TrajectoryResult:
    """Single diffusive trajectory; see :func:`evolve_diffusive_batch`.

    ``rng`` is either one generator (shared by the channels) or a list of
    per-channel generators.
    """
    if isinstance(rng, np.random.Generator):
        streams = [[rng] * len(jump_ops)]
    else:
        streams = [list(rng)]
    res = evolve_diffusive_batch(
        scheme,
        hamiltonian,
        jump_ops,
        np.asarray(psi0, dtype=complex)[:, None],
        dt,
        t_max,
        dt_out,
        streams,
        observe=observe,
    )
    return TrajectoryResult(
        times=res.times,
        observables={k: v[:, 0] for k, v in res.observables.items()},
        final_state=res.final_state[:, 0],
        max_norm_drift=res.max_norm_drift,
        dt_flagged=res.dt_flagged,
        meta=res.meta,
    )

"""Adaptive integration of the deterministic large-N flows.

The equations have a strict one-way hierarchy: the mean-field block closes on
itself and the covariance block is driven by it.  Integration honors this by
construction: the mean-field path is solved first (embedded Runge-Kutta 5(4)
with dense output) and the covariance block is then integrated along that
path, so covariances can never feed back on the first moments, not even
through step-size control.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from ..gstate import symplectic_spectrum, to_quadrature
from ..opalg import GaussianMoments
from ..unravel import UnravelingScheme
from .kerr import kerr_covariance_rhs, kerr_mean_field_rhs
from .models import CollectiveSpinModel, KerrLatticeModel
from .spin import (
    SpinFrame,
    _angle_drift,
    _uv_rhs,
    POLE_EPSILON,
    frame_angles,
    magnetization,
)

__all__ = ["FlowResult", "FlowIntegrationError", "integrate", "integrate_mean_field"]

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-11
#: a symplectic eigenvalue below 1/2 by more than this (times the spectral scale)
#: aborts; drift above 1/2 is mixedness, reported in FlowResult.purity but not fatal
PHYSICALITY_ABORT_TOL = 1e-6


class FlowIntegrationError(RuntimeError):
    pass


@dataclass
class FlowResult:
    """Time series of a deterministic flow.

    For boson models ``alpha`` has shape (T, M) and ``u``/``v`` shape
    (T, M, M).  For the collective spin ``magnetization`` has shape (T, 3)
    and ``u``/``v`` are scalar series; ``alpha`` is None.
    """

    times: np.ndarray
    alpha: np.ndarray | None
    u: np.ndarray
    v: np.ndarray
    magnetization: np.ndarray | None = None
    purity: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def moments_at(self, k: int) -> GaussianMoments:
        if self.alpha is None:
            return GaussianMoments(
                np.zeros(1, dtype=complex),
                np.array([[self.u[k]]], dtype=complex),
                np.array([[self.v[k]]], dtype=complex),
            )
        return GaussianMoments(self.alpha[k], self.u[k], self.v[k])


def _solve(fun, t_span, y0, t_eval, rtol, atol, dense=False, max_step=np.inf):
    sol = solve_ivp(
        fun,
        t_span,
        y0,
        method="RK45",
        t_eval=t_eval,
        rtol=rtol,
        atol=atol,
        dense_output=dense,
        max_step=max_step,
    )
    if not sol.success:
        raise FlowIntegrationError(
            f"integration failed near t = {sol.t[-1] if sol.t.size else t_span[0]:.6g}: "
            f"{sol.message}"
        )
    return sol


def integrate_mean_field(
    model: KerrLatticeModel,
    alpha0: np.ndarray,
    t_max: float,
    dt_out: float,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
):
    """Integrate the closed mean-field block; returns (times, alpha, dense interpolant)."""
    m = model.n_modes
    a0 = np.asarray(alpha0, dtype=complex).reshape(m)
    t_eval = np.arange(0.0, t_max + 0.5 * dt_out, dt_out)

    def fun(t, y):
        a = y[:m] + 1j * y[m:]
        da = kerr_mean_field_rhs(model, a)
        return np.concatenate([da.real, da.imag])

    sol = _solve(fun, (0.0, t_max), np.concatenate([a0.real, a0.imag]), t_eval, rtol, atol, dense=True)
    alpha = (sol.y[:m] + 1j * sol.y[m:]).T
    return sol.t, alpha, sol.sol


def _integrate_kerr(
    model: KerrLatticeModel,
    scheme: UnravelingScheme,
    init: GaussianMoments,
    t_max: float,
    dt_out: float,
    rtol: float,
    atol: float,
) -> FlowResult:
    m = model.n_modes
    times, alpha_path, dense = integrate_mean_field(
        model, init.alpha, t_max, dt_out, rtol, atol
    )
    mm = m * m

    def unpack(y):
        u = (y[:mm] + 1j * y[mm : 2 * mm]).reshape(m, m)
        v = (y[2 * mm : 3 * mm] + 1j * y[3 * mm :]).reshape(m, m)
        return u, v

    def fun(t, y):
        a = dense(t)[:m] + 1j * dense(t)[m:]
        u, v = unpack(y)
        du, dv = kerr_covariance_rhs(model, a, u, v, scheme)
        return np.concatenate([du.real.ravel(), du.imag.ravel(), dv.real.ravel(), dv.imag.ravel()])

    y0 = np.concatenate(
        [init.u.real.ravel(), init.u.imag.ravel(), init.v.real.ravel(), init.v.imag.ravel()]
    )
    sol = _solve(fun, (0.0, t_max), y0, times, rtol, atol)
    n_t = sol.t.size
    u_path = np.empty((n_t, m, m), dtype=complex)
    v_path = np.empty((n_t, m, m), dtype=complex)
    for k in range(n_t):
        u_path[k], v_path[k] = unpack(sol.y[:, k])

    purity = np.empty(n_t)
    for k in range(n_t):
        g = GaussianMoments(alpha_path[k], u_path[k], v_path[k])
        q = to_quadrature(g)
        nus = symplectic_spectrum(q, tol=np.inf)
        scale = max(1.0, float(np.max(np.abs(q.sigma))))
        if np.min(nus) < 0.5 - PHYSICALITY_ABORT_TOL * scale:
            raise FlowIntegrationError(
                f"physicality violation at t = {sol.t[k]:.6g}: "
                f"symplectic eigenvalue {np.min(nus):.9g} < 1/2"
            )
        purity[k] = np.max(np.abs(nus - 0.5))
    return FlowResult(
        times=sol.t,
        alpha=alpha_path,
        u=u_path,
        v=v_path,
        purity=purity,
        meta={"model": model.name, "scheme": scheme.name},
    )


def _integrate_spin(
    model: CollectiveSpinModel,
    scheme: UnravelingScheme,
    init: SpinFrame,
    t_max: float,
    dt_out: float,
    rtol: float,
    atol: float,
) -> FlowResult:
    init.validate()
    m0 = magnetization(init.theta, init.phi)
    t_eval = np.arange(0.0, t_max + 0.5 * dt_out, dt_out)

    def m_fun(t, y):
        mh = y / np.linalg.norm(y)
        theta, phi = frame_angles(mh)
        drift = _angle_drift(model, theta, phi)
        st = float(np.hypot(mh[0], mh[1]))
        ct = mh[2]
        cp, sp = (mh[0] / st, mh[1] / st) if st > 0.0 else (1.0, 0.0)
        e_theta = np.array([ct * cp, ct * sp, -st])
        e_phi = np.array([-sp, cp, 0.0])
        return np.real(drift) * e_theta + np.imag(drift) * e_phi

    m_sol = _solve(m_fun, (0.0, t_max), m0, t_eval, rtol, atol, dense=True)

    def uv_fun(t, y):
        mh = m_sol.sol(t)
        mh = mh / np.linalg.norm(mh)
        theta, phi = frame_angles(mh)
        drift = _angle_drift(model, theta, phi)
        st = float(np.hypot(mh[0], mh[1]))
        dphi_dt = float(np.imag(drift)) / max(st, POLE_EPSILON)
        u = y[0] + 1j * y[1]
        du, dv = _uv_rhs(model, theta, phi, u, y[2], scheme, dphi_dt)
        return np.array([du.real, du.imag, dv])

    y0 = np.array([np.real(init.u), np.imag(init.u), init.v])
    uv_sol = _solve(uv_fun, (0.0, t_max), y0, t_eval, rtol, atol)

    m_path = (m_sol.y / np.linalg.norm(m_sol.y, axis=0)).T
    u_path = uv_sol.y[0] + 1j * uv_sol.y[1]
    v_path = uv_sol.y[2]
    disc = (v_path + 0.5) ** 2 - np.abs(u_path) ** 2
    nu = np.sqrt(np.maximum(disc, 0.0))
    scale = max(1.0, float(np.max(v_path + 0.5 + np.abs(u_path))))
    if np.min(nu) < 0.5 - PHYSICALITY_ABORT_TOL * scale:
        k = int(np.argmin(nu))
        raise FlowIntegrationError(
            f"physicality violation at t = {uv_sol.t[k]:.6g}: "
            f"symplectic eigenvalue {nu[k]:.9g} < 1/2"
        )
    purity = np.abs(nu - 0.5)
    return FlowResult(
        times=uv_sol.t,
        alpha=None,
        u=u_path,
        v=v_path,
        magnetization=m_path,
        purity=purity,
        meta={"model": model.name, "scheme": scheme.name},
    )


def integrate(
    model,
    scheme: UnravelingScheme,
    init,
    t_max: float,
    dt_out: float,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> FlowResult:
    """Integrate a model's deterministic flow and sample it every ``dt_out``.

    ``init`` is a :class:`GaussianMoments` for boson models and a
    :class:`SpinFrame` for the collective spin.  Raises
    :class:`FlowIntegrationError` on solver failure (with the failure time)
    or when the state leaves the physical manifold beyond tolerance.
    """
    if t_max <= 0 or dt_out <= 0:
        raise ValueError("t_max and dt_out must be positive")
    if isinstance(model, KerrLatticeModel):
        if not isinstance(init, GaussianMoments):
            raise TypeError("boson models require a GaussianMoments initial state")
        return _integrate_kerr(model, scheme, init, t_max, dt_out, rtol, atol)
    if isinstance(model, CollectiveSpinModel):
        if not isinstance(init, SpinFrame):
            raise TypeError("the collective spin model requires a SpinFrame initial state")
        return _integrate_spin(model, scheme, init, t_max, dt_out, rtol, atol)
    raise TypeError(f"unsupported model type {type(model).__name__}")

"""Fixed points, stability and bifurcation sweeps of the large-N flows.

Roots of the full vector field (first moments and covariances jointly) are
found by damped Newton iteration with finite-difference Jacobians; stability
is read off the Jacobian of the combined real-coordinate system.  Parameter
sweeps continue branches along a grid, reusing each converged root as the
seed for the next grid point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from ..gstate import Partition, PhysicalityError, entanglement_entropy, mode_transform, purity_defect
from ..opalg import GaussianMoments
from ..unravel import UnravelingScheme
from .kerr import kerr_covariance_rhs, kerr_mean_field_rhs
from .models import KerrLatticeModel

__all__ = [
    "FixedPoint",
    "BranchPoint",
    "SweepResult",
    "find_fixed_points",
    "symmetric_branch_mean_field",
    "covariance_fixed_point",
    "sweep_bifurcation",
]

RHS_NORM_TOL = 1e-10
DUPLICATE_TOL = 1e-8

#: balanced beam splitter to the bonding/antibonding mode pair
MOMENTUM_MODES = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


@dataclass
class FixedPoint:
    moments: GaussianMoments
    stable: bool
    leading_eigenvalue: float
    mean_field_leading_eigenvalue: float
    rhs_norm: float


@dataclass
class BranchPoint:
    param: float
    branch: str
    converged: bool
    stable: bool = False
    populations: np.ndarray | None = None
    entropy_spatial: float = np.nan
    entropy_momentum: float = np.nan
    purity: float = np.nan
    moments: GaussianMoments | None = None


@dataclass
class SweepResult:
    param_name: str
    grid: np.ndarray
    points: list[BranchPoint]
    critical_params: list[float] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def branch(self, name: str) -> list[BranchPoint]:
        return [p for p in self.points if p.branch == name]


# -- packing -----------------------------------------------------------------


def _pack(g: GaussianMoments) -> np.ndarray:
    return np.concatenate(
        [
            g.alpha.real,
            g.alpha.imag,
            g.u.real.ravel(),
            g.u.imag.ravel(),
            g.v.real.ravel(),
            g.v.imag.ravel(),
        ]
    )


def _unpack(y: np.ndarray, m: int) -> GaussianMoments:
    mm = m * m
    a = y[:m] + 1j * y[m : 2 * m]
    u = (y[2 * m : 2 * m + mm] + 1j * y[2 * m + mm : 2 * m + 2 * mm]).reshape(m, m)
    v = (y[2 * m + 2 * mm : 2 * m + 3 * mm] + 1j * y[2 * m + 3 * mm :]).reshape(m, m)
    return GaussianMoments(a, u, v)


def _full_rhs(model: KerrLatticeModel, scheme: UnravelingScheme, y: np.ndarray) -> np.ndarray:
    g = _unpack(y, model.n_modes)
    da = kerr_mean_field_rhs(model, g.alpha)
    du, dv = kerr_covariance_rhs(model, g.alpha, g.u, g.v, scheme)
    return _pack(GaussianMoments(da, du, dv))


# -- Newton ------------------------------------------------------------------


def _fd_jacobian(fun, y: np.ndarray, h: float = 1e-7) -> np.ndarray:
    n = y.size
    jac = np.empty((n, n))
    for i in range(n):
        dy = np.zeros(n)
        dy[i] = h
        jac[:, i] = (fun(y + dy) - fun(y - dy)) / (2.0 * h)
    return jac


def _damped_newton(fun, y0: np.ndarray, max_iter: int = 60, tol: float = RHS_NORM_TOL):
    y = np.asarray(y0, dtype=float).copy()
    f = fun(y)
    norm = np.linalg.norm(f)
    for _ in range(max_iter):
        if norm < tol:
            return y, norm, True
        jac = _fd_jacobian(fun, y)
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, -f, rcond=None)[0]
        lam = 1.0
        while lam > 1e-4:
            y_try = y + lam * step
            f_try = fun(y_try)
            n_try = np.linalg.norm(f_try)
            if n_try < (1.0 - 0.5 * lam) * norm or n_try < tol:
                y, f, norm = y_try, f_try, n_try
                break
            lam *= 0.5
        else:
            return y, norm, norm < tol
    return y, norm, norm < tol


def find_fixed_points(
    model: KerrLatticeModel,
    scheme: UnravelingScheme,
    seeds,
) -> list[FixedPoint]:
    """Damped-Newton roots of the joint vector field from the given seeds.

    Seeds are GaussianMoments; covariance blocks of a seed may simply be
    vacuum.  Non-converged seeds are skipped; duplicate roots are merged.
    """
    m = model.n_modes

    def fun(y):
        return _full_rhs(model, scheme, y)

    roots: list[np.ndarray] = []
    out: list[FixedPoint] = []
    for seed in seeds:
        y, norm, ok = _damped_newton(fun, _pack(seed))
        if not ok:
            continue
        if any(np.linalg.norm(y - r) < DUPLICATE_TOL for r in roots):
            continue
        roots.append(y)
        jac = _fd_jacobian(fun, y)
        lead = float(np.max(np.linalg.eigvals(jac).real))
        g = _unpack(y, m)

        def mf_fun(x):
            a = x[:m] + 1j * x[m:]
            da = kerr_mean_field_rhs(model, a)
            return np.concatenate([da.real, da.imag])

        mf_jac = _fd_jacobian(mf_fun, np.concatenate([g.alpha.real, g.alpha.imag]))
        mf_lead = float(np.max(np.linalg.eigvals(mf_jac).real))
        out.append(
            FixedPoint(
                moments=g,
                stable=lead < 0.0,
                leading_eigenvalue=lead,
                mean_field_leading_eigenvalue=mf_lead,
                rhs_norm=float(norm),
            )
        )
    return out


# -- dimer-specific helpers ----------------------------------------------------


def symmetric_branch_mean_field(model: KerrLatticeModel, drive: float) -> list[np.ndarray]:
    """All mean-field roots on the antisymmetric-drive symmetric branch.

    With alpha_2 = -alpha_1 the two-mode fixed-point problem reduces to a
    single Kerr mode at detuning delta - J, so the populations solve a cubic
    and every symmetric root (including unstable ones) is found without
    continuation.
    """
    if model.n_modes == 1:
        delta_eff = model.delta
    elif model.n_modes == 2:
        delta_eff = model.delta - model.coupling[0, 1]
    else:
        raise ValueError("symmetric branch reduction implemented for 1 or 2 modes")
    ui, ka, f = model.u_int, model.kappa, float(drive)
    if f == 0.0:
        return [np.zeros(model.n_modes, dtype=complex)]
    # n ((delta_eff - ui n)^2 + ka^2/4) = f^2
    coeffs = [
        ui * ui,
        -2.0 * delta_eff * ui,
        delta_eff * delta_eff + 0.25 * ka * ka,
        -f * f,
    ]
    roots = np.roots(coeffs)
    out = []
    for n in roots:
        if abs(n.imag) > 1e-9 * max(1.0, abs(n.real)) or n.real < 0:
            continue
        n = float(n.real)
        a1 = 1j * f / (1j * (delta_eff - ui * n) - 0.5 * ka)
        alpha = np.array([a1] if model.n_modes == 1 else [a1, -a1], dtype=complex)
        out.append(alpha)
    return out


def covariance_fixed_point(
    model: KerrLatticeModel,
    scheme: UnravelingScheme,
    alpha: np.ndarray,
    seed: GaussianMoments | None = None,
    relax_time: float = 200.0,
) -> tuple[GaussianMoments, bool]:
    """Steady covariances at frozen first moments.

    Tries damped Newton on the covariance block first, then falls back to
    relaxing the covariance flow from the seed before polishing with Newton.
    """
    m = model.n_modes
    mm = m * m
    alpha = np.asarray(alpha, dtype=complex)
    if seed is None:
        seed = GaussianMoments.vacuum(m)
        seed = GaussianMoments(alpha, seed.u, seed.v)

    def pack_uv(u, v):
        return np.concatenate([u.real.ravel(), u.imag.ravel(), v.real.ravel(), v.imag.ravel()])

    def unpack_uv(y):
        u = (y[:mm] + 1j * y[mm : 2 * mm]).reshape(m, m)
        v = (y[2 * mm : 3 * mm] + 1j * y[3 * mm :]).reshape(m, m)
        return u, v

    def fun(y):
        u, v = unpack_uv(y)
        du, dv = kerr_covariance_rhs(model, alpha, u, v, scheme)
        return pack_uv(du, dv)

    y0 = pack_uv(seed.u, seed.v)
    y, norm, ok = _damped_newton(fun, y0)
    if not ok:
        relax = solve_ivp(
            lambda t, yy: fun(yy), (0.0, relax_time), y0, method="RK45", rtol=1e-9, atol=1e-11
        )
        if relax.success:
            y, norm, ok = _damped_newton(fun, relax.y[:, -1])
    u, v = unpack_uv(y)
    return GaussianMoments(alpha, u, v), ok


def _mirror_dimer(g: GaussianMoments) -> GaussianMoments:
    """Image of a dimer state under the symmetry a_1 <-> -a_2."""
    p = np.array([[0.0, -1.0], [-1.0, 0.0]], dtype=complex)
    return GaussianMoments(p @ g.alpha, p @ g.u @ p.T, p.conj() @ g.v @ p.T)


def _canonical_broken(g: GaussianMoments) -> GaussianMoments:
    """Representative of a broken-branch pair with the larger population first."""
    pops = np.abs(g.alpha) ** 2
    return g if pops[0] >= pops[1] else _mirror_dimer(g)


def _relax_from(
    model: KerrLatticeModel,
    scheme: UnravelingScheme,
    base: GaussianMoments,
    perturbation: float,
    relax_time: float = 150.0,
) -> GaussianMoments | None:
    """Integrate the flow from an asymmetrically perturbed state to find a seed."""
    from .integrate import FlowIntegrationError, integrate

    kick = 1.0 + perturbation * np.arange(1, model.n_modes + 1)
    init = GaussianMoments(base.alpha * kick + perturbation, base.u.copy(), base.v.copy())
    try:
        res = integrate(model, scheme, init, t_max=relax_time, dt_out=relax_time)
    except FlowIntegrationError:
        return None
    return res.moments_at(-1)


def _branch_entropies(g: GaussianMoments) -> tuple[float, float, float]:
    try:
        defect = purity_defect(g)
    except PhysicalityError:
        return np.nan, np.nan, np.nan
    try:
        s_spatial = entanglement_entropy(g, Partition({0}))
        gm = mode_transform(g, MOMENTUM_MODES)
        s_momentum = entanglement_entropy(gm, Partition({0}))
    except (ValueError, PhysicalityError):
        return np.nan, np.nan, defect
    return s_spatial, s_momentum, defect


def sweep_bifurcation(
    model: KerrLatticeModel,
    scheme: UnravelingScheme,
    param_name: str,
    grid,
    perturbation: float = 1e-3,
) -> SweepResult:
    """Continuation sweep of the steady state along a sorted parameter grid.

    Currently the sweep parameter is the drive amplitude.  At each grid point
    the symmetric branch is obtained from its cubic reduction plus a
    covariance solve; symmetry-broken branches are continued from the
    previous grid point, seeded initially with an asymmetric perturbation of
    the symmetric root.  Critical parameter values are the midpoints of grid
    intervals where the symmetric branch changes stability.
    """
    if param_name not in ("drive", "f"):
        raise ValueError(f"unsupported sweep parameter {param_name!r}")
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("sweep grid is empty")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("sweep grid must be strictly increasing")

    points: list[BranchPoint] = []
    warnings: list[str] = []
    sym_stable_flags: list[bool | None] = []
    prev_sym: GaussianMoments | None = None
    prev_broken: dict[str, GaussianMoments] = {}

    for fval in grid:
        mod = model.with_drive(fval)

        # symmetric branch: cubic mean field (smallest-population root when multivalued)
        sym_alphas = symmetric_branch_mean_field(mod, fval)
        sym_alphas.sort(key=lambda a: float(np.abs(a[0]) ** 2))
        sym_point = None
        if sym_alphas:
            alpha = sym_alphas[0]
            seed = prev_sym
            g, ok = covariance_fixed_point(mod, scheme, alpha, seed=seed)
            if ok:
                fps = find_fixed_points(mod, scheme, [g])
                if fps:
                    fp = fps[0]
                    s1, s2, pur = _branch_entropies(fp.moments)
                    sym_point = BranchPoint(
                        param=float(fval),
                        branch="symmetric",
                        converged=True,
                        stable=fp.stable,
                        populations=np.abs(fp.moments.alpha) ** 2,
                        entropy_spatial=s1,
                        entropy_momentum=s2,
                        purity=pur,
                        moments=fp.moments,
                    )
                    prev_sym = fp.moments
        if sym_point is None:
            warnings.append(f"symmetric branch lost at {param_name} = {fval:g}")
            sym_stable_flags.append(None)
            points.append(BranchPoint(param=float(fval), branch="symmetric", converged=False))
        else:
            sym_stable_flags.append(sym_point.stable)
            points.append(sym_point)

        # symmetry-broken branch: continuation where possible, otherwise relax
        # the flow from a perturbed symmetric state into the broken attractor
        def newton_broken(seeds):
            for fp in find_fixed_points(mod, scheme, seeds):
                pops = np.abs(fp.moments.alpha) ** 2
                if abs(pops[0] - pops[1]) < 1e-6:
                    continue  # fell back onto the symmetric branch
                return fp
            return None

        found = None
        if "broken+" in prev_broken:
            found = newton_broken([prev_broken["broken+"]])
        if found is None and sym_point is not None and not sym_point.stable:
            # near the fork the broken state separates slowly; retry with a
            # longer relaxation before giving up
            for relax_time in (150.0, 800.0):
                relaxed = _relax_from(mod, scheme, sym_point.moments, perturbation, relax_time)
                if relaxed is not None:
                    found = newton_broken([relaxed])
                if found is not None:
                    break
        if found is None:
            prev_broken.pop("broken+", None)
            points.append(BranchPoint(param=float(fval), branch="broken+", converged=False))
            points.append(BranchPoint(param=float(fval), branch="broken-", converged=False))
        else:
            g_plus = _canonical_broken(found.moments)
            prev_broken["broken+"] = g_plus
            s1, s2, pur = _branch_entropies(g_plus)
            for tag, g in (("broken+", g_plus), ("broken-", _mirror_dimer(g_plus))):
                points.append(
                    BranchPoint(
                        param=float(fval),
                        branch=tag,
                        converged=True,
                        stable=found.stable,
                        populations=np.abs(g.alpha) ** 2,
                        entropy_spatial=s1,
                        entropy_momentum=s2,
                        purity=pur,
                        moments=g,
                    )
                )

    critical = []
    for k in range(1, len(grid)):
        a, b = sym_stable_flags[k - 1], sym_stable_flags[k]
        if a is not None and b is not None and a != b:
            critical.append(0.5 * (grid[k - 1] + grid[k]))
    return SweepResult(
        param_name=param_name,
        grid=grid,
        points=points,
        critical_params=critical,
        warnings=warnings,
    )

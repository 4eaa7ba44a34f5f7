"""Command-line interface: deterministic flows, steady states, sweeps, benchmarks.

Subcommands: flow, steady, sweep, exact, bench.  Each takes a scenario config
(--config), an optional master seed (--seed flag wins over the MG_SEED
environment variable, which wins over the config), an output directory
(--out) and a worker count (--threads).  Exit codes: 0 success, 2 config
error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from ..exact.ensemble import KerrEnsembleTask, SpinEnsembleTask, ensemble_run
from ..flow.integrate import integrate
from ..flow.models import CollectiveSpinModel, KerrLatticeModel
from ..flow.spin import SpinFrame, spin_steady_state
from ..flow.steady import find_fixed_points, sweep_bifurcation, symmetric_branch_mean_field, covariance_fixed_point, MOMENTUM_MODES
from ..gstate import Partition, collective_entropy, entanglement_entropy, mode_transform, purity_defect
from ..opalg import GaussianMoments
from .config import ConfigError, ScenarioConfig, load_config
from .csvout import write_csv

__all__ = ["main", "run_scenario"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _resolve_seed(args_seed, config_seed) -> int:
    if args_seed is not None:
        return int(args_seed)
    env = os.environ.get("MG_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"MG_SEED must be an integer, got {env!r}")
    if config_seed is not None:
        return int(config_seed)
    return 0


def _kerr_init(cfg: ScenarioConfig, model: KerrLatticeModel) -> GaussianMoments:
    m = model.n_modes
    re = cfg.init.get("alpha_re", [0.0] * m)
    im = cfg.init.get("alpha_im", [0.0] * m)
    if len(re) != m or len(im) != m:
        raise ConfigError(f"[init] alpha_re/alpha_im must have {m} entries")
    alpha = np.array(re, dtype=float) + 1j * np.array(im, dtype=float)
    g = GaussianMoments.vacuum(m)
    return GaussianMoments(alpha, g.u, g.v)


def _spin_init(cfg: ScenarioConfig) -> SpinFrame:
    return SpinFrame(
        theta=float(cfg.init.get("theta", np.pi / 2)),
        phi=float(cfg.init.get("phi", 0.0)),
        u=complex(cfg.init.get("u_re", 0.0), cfg.init.get("u_im", 0.0)),
        v=float(cfg.init.get("v", 0.0)),
    )


def _dimer_entropies(g: GaussianMoments):
    try:
        s1 = entanglement_entropy(g, Partition({0}))
        s2 = entanglement_entropy(mode_transform(g, MOMENTUM_MODES), Partition({0}))
        return s1, s2
    except ValueError:
        return np.nan, np.nan


def cmd_flow(cfg: ScenarioConfig, seed: int, out_dir: Path, threads: int) -> list[Path]:
    model = cfg.build_model()
    scheme = cfg.build_schemes()[0]
    t_max = float(cfg.integration["t_max"])
    dt_out = float(cfg.integration["dt_out"])
    rtol = float(cfg.integration.get("rtol", 1e-9))
    atol = float(cfg.integration.get("atol", 1e-11))

    if isinstance(model, CollectiveSpinModel):
        res = integrate(model, scheme, _spin_init(cfg), t_max, dt_out, rtol, atol)
        header = ["t", "theta", "phi", "mx", "my", "mz", "re_u", "im_u", "v", "entropy", "purity"]
        rows = []
        for k, t in enumerate(res.times):
            mx, my, mz = res.magnetization[k]
            theta = float(np.arccos(np.clip(mz, -1, 1)))
            phi = float(np.arctan2(my, mx))
            rows.append(
                [t, theta, phi, mx, my, mz, res.u[k].real, res.u[k].imag, res.v[k].real,
                 collective_entropy(max(res.v[k].real, 0.0)), res.purity[k]]
            )
        path = out_dir / f"{cfg.output_prefix}_flow_{scheme.name}.csv"
        return [write_csv(path, header, rows)]

    res = integrate(model, scheme, _kerr_init(cfg, model), t_max, dt_out, rtol, atol)
    m = model.n_modes
    header = ["t"]
    for i in range(m):
        header += [f"re_alpha_{i}", f"im_alpha_{i}"]
    for i in range(m):
        for j in range(m):
            header += [f"re_u_{i}{j}", f"im_u_{i}{j}"]
    for i in range(m):
        for j in range(m):
            header += [f"re_v_{i}{j}", f"im_v_{i}{j}"]
    if m == 2:
        header += ["entropy_spatial", "entropy_momentum"]
    header += ["purity"]
    rows = []
    for k, t in enumerate(res.times):
        row = [t]
        for i in range(m):
            row += [res.alpha[k, i].real, res.alpha[k, i].imag]
        for block in (res.u, res.v):
            for i in range(m):
                for j in range(m):
                    row += [block[k, i, j].real, block[k, i, j].imag]
        if m == 2:
            row += list(_dimer_entropies(res.moments_at(k)))
        row += [res.purity[k]]
        rows.append(row)
    path = out_dir / f"{cfg.output_prefix}_flow_{scheme.name}.csv"
    return [write_csv(path, header, rows)]


def cmd_steady(cfg: ScenarioConfig, seed: int, out_dir: Path, threads: int) -> list[Path]:
    model = cfg.build_model()
    scheme = cfg.build_schemes()[0]
    if isinstance(model, CollectiveSpinModel):
        ss = spin_steady_state(model.omega, model.kappa)
        header = ["omega", "mx", "my", "mz", "u", "v", "entropy"]
        rows = [[model.omega, *ss.magnetization, ss.u, ss.v, ss.entropy]]
        return [write_csv(out_dir / f"{cfg.output_prefix}_steady.csv", header, rows)]

    drive = model.drives[0] if model.n_modes == 1 else abs(model.drives[0])
    seeds = []
    for alpha in symmetric_branch_mean_field(model, drive):
        g, ok = covariance_fixed_point(model, scheme, alpha)
        if ok:
            seeds.append(g)
    fps = find_fixed_points(model, scheme, seeds)
    header = ["branch"]
    for i in range(model.n_modes):
        header += [f"re_alpha_{i}", f"im_alpha_{i}", f"pop_{i}"]
    header += ["stable", "leading_eigenvalue", "rhs_norm", "purity"]
    if model.n_modes == 2:
        header += ["entropy_spatial", "entropy_momentum"]
    rows = []
    for k, fp in enumerate(fps):
        row = [k]
        for i in range(model.n_modes):
            a = fp.moments.alpha[i]
            row += [a.real, a.imag, abs(a) ** 2]
        row += [fp.stable, fp.leading_eigenvalue, fp.rhs_norm, purity_defect(fp.moments)]
        if model.n_modes == 2:
            row += list(_dimer_entropies(fp.moments))
        rows.append(row)
    return [write_csv(out_dir / f"{cfg.output_prefix}_steady_{scheme.name}.csv", header, rows)]


def _spin_sweep(cfg: ScenarioConfig, out_dir: Path) -> list[Path]:
    grid = cfg.sweep_grid()
    if cfg.sweep.get("param", "omega") != "omega":
        raise ConfigError("spin sweeps support param = 'omega'")
    window = cfg.sweep.get("average_window", [3000.0, 4000.0])
    if len(window) != 2 or window[0] >= window[1]:
        raise ConfigError("[sweep] average_window must be [t_lo, t_hi] with t_lo < t_hi")
    kappa = cfg.model_params["kappa"]
    rows = []
    for scheme in cfg.build_schemes():
        for omega in grid:
            model = CollectiveSpinModel(omega=float(omega), kappa=kappa)
            if omega < kappa:
                ss = spin_steady_state(float(omega), kappa)
                rows.append(
                    [scheme.name, omega, "stationary", ss.magnetization[2], ss.u, ss.v, ss.entropy]
                )
                continue
            res = integrate(
                model,
                scheme,
                SpinFrame(theta=np.pi / 2, phi=0.0, u=0j, v=0.0),
                t_max=float(window[1]),
                dt_out=0.5,
            )
            mask = (res.times >= window[0]) & (res.times <= window[1])
            mz = float(np.mean(res.magnetization[mask, 2]))
            u_m = complex(np.mean(res.u[mask]))
            v_m = float(np.mean(res.v[mask].real))
            se = float(np.mean([collective_entropy(max(v, 0.0)) for v in res.v[mask].real]))
            rows.append([scheme.name, omega, "crystal", mz, u_m.real, v_m, se])
    header = ["scheme", "omega", "branch", "mz", "u", "v", "entropy"]
    return [write_csv(out_dir / f"{cfg.output_prefix}_sweep.csv", header, rows)]


def cmd_sweep(cfg: ScenarioConfig, seed: int, out_dir: Path, threads: int) -> list[Path]:
    model = cfg.build_model()
    if isinstance(model, CollectiveSpinModel):
        return _spin_sweep(cfg, out_dir)

    grid = cfg.sweep_grid()
    param = cfg.sweep.get("param", "drive")
    rows = []
    crit_rows = []
    for scheme in cfg.build_schemes():
        res = sweep_bifurcation(model, scheme, param, grid)
        for p in res.points:
            pops = list(p.populations) if p.populations is not None else [np.nan] * model.n_modes
            rows.append(
                [scheme.name, p.param, p.branch, p.converged, p.stable, *pops,
                 p.entropy_spatial, p.entropy_momentum, p.purity]
            )
        for c in res.critical_params:
            crit_rows.append([scheme.name, c])
    header = ["scheme", param, "branch", "converged", "stable"]
    header += [f"pop_{i}" for i in range(model.n_modes)]
    header += ["entropy_spatial", "entropy_momentum", "purity"]
    paths = [write_csv(out_dir / f"{cfg.output_prefix}_sweep.csv", header, rows)]
    paths.append(
        write_csv(out_dir / f"{cfg.output_prefix}_critical.csv", ["scheme", param], crit_rows)
    )
    return paths


def _make_tasks(cfg: ScenarioConfig, model, scheme):
    ens = cfg.ensemble
    sizes = [float(s) for s in ens["sizes"]]
    cutoffs = ens.get("cutoff", 0)
    if isinstance(cutoffs, int):
        cutoffs = [cutoffs] * len(sizes)
    if len(cutoffs) != len(sizes):
        raise ConfigError("[ensemble] cutoff list must match sizes")
    t_max = float(cfg.integration["t_max"])
    dt_out = float(cfg.integration["dt_out"])
    dt = float(cfg.integration.get("diffusive_dt", 1e-3))
    tasks = []
    if isinstance(model, CollectiveSpinModel):
        for s in sizes:
            tasks.append(
                (s, SpinEnsembleTask(
                    model=model, scheme=scheme, s=s, t_max=t_max, dt_out=dt_out,
                    diffusive_dt=dt, include_entropy=bool(ens.get("entropy", True)),
                ))
            )
        return tasks
    if model.n_modes != 1:
        raise ConfigError("ensembles support the single-mode Kerr and spin models")
    re = cfg.init.get("alpha_re", [0.1])
    im = cfg.init.get("alpha_im", [0.1])
    alpha0 = complex(re[0], im[0])
    for s, cut in zip(sizes, cutoffs):
        tasks.append(
            (s, KerrEnsembleTask(
                model=model, scheme=scheme, n_scale=s, alpha0=alpha0, t_max=t_max,
                dt_out=dt_out, diffusive_dt=dt, cutoff=(int(cut) if cut else None),
                include_delta_g=bool(ens.get("delta_g", True)),
                delta_g_stride=int(ens.get("delta_g_stride", 1)),
            ))
        )
    return tasks


def cmd_exact(cfg: ScenarioConfig, seed: int, out_dir: Path, threads: int) -> list[Path]:
    model = cfg.build_model()
    n_traj = int(cfg.ensemble["n_traj"])
    paths = []
    for scheme in cfg.build_schemes():
        for size, task in _make_tasks(cfg, model, scheme):
            stats = ensemble_run(task, n_traj, seed, n_workers=threads)
            names = sorted(stats.means)
            header = ["t"] + [f"mean_{n}" for n in names] + [f"std_{n}" for n in names] + ["n_traj"]
            rows = []
            for k, t in enumerate(stats.times):
                rows.append(
                    [t] + [stats.means[n][k] for n in names]
                    + [stats.stds[n][k] for n in names] + [stats.n_traj]
                )
            tag = f"{scheme.name}_size{size:g}"
            paths.append(write_csv(out_dir / f"{cfg.output_prefix}_exact_{tag}.csv", header, rows))
    return paths


def _monotone_decreasing(vals) -> bool:
    return all(b < a for a, b in zip(vals, vals[1:]))


def cmd_bench(cfg: ScenarioConfig, seed: int, out_dir: Path, threads: int) -> list[Path]:
    model = cfg.build_model()
    n_traj = int(cfg.ensemble["n_traj"])
    t_max = float(cfg.integration["t_max"])
    dt_out = float(cfg.integration["dt_out"])
    rows = []
    verdict_rows = []
    for scheme in cfg.build_schemes():
        if isinstance(model, CollectiveSpinModel):
            det = integrate(model, scheme, _spin_init(cfg), t_max, dt_out)
            se_det = np.array([collective_entropy(max(v, 0.0)) for v in det.v.real])
            target = spin_steady_state(model.omega, model.kappa).entropy if model.omega < model.kappa else np.nan
            gaps = []
            for size, task in _make_tasks(cfg, model, scheme):
                stats = ensemble_run(task, n_traj, seed, n_workers=threads)
                dev_mz = float(np.max(np.abs(stats.means["mz"] - det.magnetization[: stats.times.size, 2])))
                se_end = float(stats.means["entropy"][-1])
                gap = abs(se_end - target) if np.isfinite(target) else np.nan
                gaps.append(gap)
                rows.append([scheme.name, size, dev_mz, se_end, target, gap])
            verdict = "not-applicable" if len(gaps) < 2 else (
                "pass" if _monotone_decreasing(gaps) else "fail")
            verdict_rows.append([scheme.name, "entropy_gap_monotone", verdict])
            continue

        init = _kerr_init(cfg, model)
        re = cfg.init.get("alpha_re", [0.1])
        im = cfg.init.get("alpha_im", [0.1])
        init = GaussianMoments(np.array([complex(re[0], im[0])]), init.u, init.v)
        det = integrate(model, scheme, init, t_max, dt_out)
        n_det = np.abs(det.alpha[:, 0]) ** 2
        v_det = det.v[:, 0, 0].real
        metrics = {"dev_n": [], "dev_v": [], "std_n": [], "delta_g": []}
        for size, task in _make_tasks(cfg, model, scheme):
            stats = ensemble_run(task, n_traj, seed, n_workers=threads)
            dev_n = float(np.max(np.abs(stats.means["n_norm"] - n_det)))
            dev_v = float(np.max(np.abs(stats.means["v"] - v_det)))
            std_n = float(np.max(stats.stds["n_norm"]))
            dg = float(np.nanmax(stats.means["delta_g"])) if "delta_g" in stats.means else np.nan
            for key, val in zip(metrics, (dev_n, dev_v, std_n, dg)):
                metrics[key].append(val)
            rows.append([scheme.name, size, dev_n, dev_v, std_n, dg])
        for key, vals in metrics.items():
            verdict = "not-applicable" if len(vals) < 2 else (
                "pass" if _monotone_decreasing(vals) else "fail")
            verdict_rows.append([scheme.name, f"{key}_monotone", verdict])

    if isinstance(model, CollectiveSpinModel):
        header = ["scheme", "size", "dev_mz", "entropy_end", "entropy_target", "entropy_gap"]
    else:
        header = ["scheme", "size", "dev_n", "dev_v", "std_n", "max_mean_delta_g"]
    paths = [write_csv(out_dir / f"{cfg.output_prefix}_bench.csv", header, rows)]
    paths.append(
        write_csv(out_dir / f"{cfg.output_prefix}_bench_verdicts.csv",
                  ["scheme", "metric", "verdict"], verdict_rows)
    )
    return paths


_COMMANDS = {
    "flow": cmd_flow,
    "steady": cmd_steady,
    "sweep": cmd_sweep,
    "exact": cmd_exact,
    "bench": cmd_bench,
}


def run_scenario(kind, config_path, seed=None, out_dir=".", threads=1) -> list[Path]:
    cfg = load_config(config_path)
    if cfg.kind != kind:
        raise ConfigError(f"config kind {cfg.kind!r} does not match subcommand {kind!r}")
    master_seed = _resolve_seed(seed, cfg.seed)
    return _COMMANDS[kind](cfg, master_seed, Path(out_dir), threads)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mongauss",
        description="Monitored Gaussian dynamics: deterministic flows and exact-trajectory benchmarks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("flow", "integrate a deterministic flow and write the time series"),
        ("steady", "closed-form or root-found steady states"),
        ("sweep", "parameter sweep with branch and critical-point detection"),
        ("exact", "finite-size trajectory ensembles"),
        ("bench", "compare ensembles against the deterministic flow"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="scenario TOML file")
        p.add_argument("--seed", type=int, default=None, help="master seed (beats MG_SEED and config)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=1, help="worker processes for ensembles")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        paths = run_scenario(args.command, args.config, args.seed, args.out, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # runtime failures map to a distinct exit code
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Identification sweeps over truncation orders and their CSV/SVG reports."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bounds import SearchResult, carleman_error_bound, order_search, validate_parameters
from .config import ExperimentConfig
from .identify import IdentifiedModel, estimate, lift_dataset
from .lifting import build_basis, lift
from .nummat import expm, vector_norm
from .plotting import line_plot
from .polyflow import PolynomialField, carleman_matrix
from .simulate import (TimeGrid, TrajectorySet, generate_dataset,
                       integrate_field_batch, write_table)

ERROR_COLUMNS = ("N", "lifted_dim", "condition_number", "residual", "certifiable",
                 "err_identified", "err_carleman", "full_state", "truncated_state",
                 "err_identified_horizon", "diverged_at")


@dataclass
class OrderComparison:
    """Errors of the identified (and, if known, model-based) lifted systems.

    Every ``sup`` is over all trajectories and over ``[0, tau*]`` unless the
    name says otherwise.  ``overlay`` holds ``t, x, z_hat|d, z|d`` for one
    trajectory over the full simulation horizon.
    """

    N: int
    model: IdentifiedModel
    err_identified: float
    err_carleman: float
    full_state: float
    truncated_state: float
    err_identified_horizon: float
    diverged_at: float
    overlay: np.ndarray = field(repr=False)

    def row(self):
        return [self.N, len(self.model.basis), self.model.condition_number, self.model.residual,
                int(self.model.certifiable), self.err_identified, self.err_carleman, self.full_state,
                self.truncated_state, self.err_identified_horizon, self.diverged_at]


def reference_trajectories(data: TrajectorySet, horizon: float, field: PolynomialField | None):
    """True states over ``[t0, t0 + horizon]``, extending the record with the field if known."""
    grid = TimeGrid.span(data.grid.t0 + horizon, data.grid.h, data.grid.t0)
    if grid.count <= data.grid.count:
        return grid, data.states[:, :grid.count]
    if field is None:
        return data.grid, data.states
    return grid, integrate_field_batch(field, data.states[:, 0], grid)


def compare_order(data: TrajectorySet, N: int, *, T_id: float, tau_star: float, horizon: float,
                  field: PolynomialField | None = None, norm: str = "inf", rcond: float = 1e-10,
                  plot_index: int = 0, reference=None) -> OrderComparison:
    """Fit at order ``N`` and measure realized errors against the reference data."""
    grid, X = reference if reference is not None else reference_trajectories(data, horizon, field)
    d = data.d
    basis = build_basis(d, N)
    t0 = data.grid.t0
    model = estimate(lift_dataset(data, basis, (t0, t0 + T_id)), rcond)
    k_tau = grid.index_of(t0 + tau_star)
    z = lift(basis, X[:, 0])
    E = expm(model.Ahat * grid.h)
    have_field = field is not None
    if have_field:
        zc = z.copy()
        Ec = expm(carleman_matrix(field, basis) * grid.h)

    nan = math.nan
    overlay = np.full((grid.count, 1 + 3 * d), nan)
    overlay[:, 0] = grid.times
    overlay[:, 1:1 + d] = X[plot_index]
    overlay[0, 1 + d:1 + 2 * d] = z[plot_index, :d]
    if have_field:
        overlay[0, 1 + 2 * d:] = zc[plot_index, :d]

    err_id = err_c = full = trunc = err_h = 0.0
    diverged_at = nan
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, grid.count):
            if math.isnan(diverged_at):
                z = z @ E.T
                if not np.all(np.isfinite(z)):
                    diverged_at = float(grid.times[k])
            if have_field:
                zc = zc @ Ec.T
            e = float(vector_norm(X[:, k] - z[:, :d], norm).max()) if math.isnan(diverged_at) else math.inf
            err_h = max(err_h, e)
            if math.isnan(diverged_at):
                overlay[k, 1 + d:1 + 2 * d] = z[plot_index, :d]
            if have_field:
                overlay[k, 1 + 2 * d:] = zc[plot_index, :d]
            if k <= k_tau:
                err_id = max(err_id, e)
                if have_field:
                    err_c = max(err_c, float(vector_norm(X[:, k] - zc[:, :d], norm).max()))
                    if math.isnan(diverged_at):
                        full = max(full, float(vector_norm(zc - z, norm).max()))
                        trunc = max(trunc, float(vector_norm(zc[:, :d] - z[:, :d], norm).max()))
                    else:
                        full = trunc = math.inf
    if not have_field:
        err_c = full = trunc = nan
    return OrderComparison(N, model, err_id, err_c, full, trunc, err_h, diverged_at, overlay)


def sweep_orders(data: TrajectorySet, orders, **kwargs) -> list[OrderComparison]:
    ref = reference_trajectories(data, kwargs["horizon"], kwargs.get("field"))
    return [compare_order(data, N, reference=ref, **kwargs) for N in orders]


class Report:
    """Collects written files so that a manifest can list them with the config hash."""

    def __init__(self, root, cfg: ExperimentConfig):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.cfg = cfg
        self.files = []

    def path(self, rel) -> Path:
        p = self.root / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        self.files.append(str(Path(rel)))
        return p

    def table(self, rel, header, rows):
        write_table(self.path(rel), header, rows)

    def finish(self, extra=None):
        (self.root / "config.txt").write_text(self.cfg.to_text())
        manifest = {
            "config_hash": self.cfg.digest(),
            "files": {f: {"config_hash": self.cfg.digest()} for f in sorted(set(self.files))},
        }
        manifest.update(extra or {})
        (self.root / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def write_comparisons(report: Report, comparisons, d: int, prefix="identify", save_models=True):
    report.table(f"{prefix}/errors.csv", ",".join(ERROR_COLUMNS), [c.row() for c in comparisons])
    cols = ["t"] + [f"x{j + 1}" for j in range(d)] + [f"zhat{j + 1}" for j in range(d)] \
        + [f"z{j + 1}" for j in range(d)]
    for c in comparisons:
        report.table(f"{prefix}/trajectories_N{c.N}.csv", ",".join(cols), c.overlay)
        if save_models:
            stem = report.path(f"{prefix}/model_N{c.N}.csv").with_suffix("")
            report.files.append(f"{prefix}/model_N{c.N}.json")
            c.model.save(stem)


def certify(data: TrajectorySet, cfg: ExperimentConfig, T_id=None) -> SearchResult:
    p = validate_parameters(**cfg.bound_args())
    if T_id is None:
        T_id = cfg.windows.T_cert if cfg.windows.T_cert is not None else p.tau_star
    return order_search(data, p, T_id=T_id, norm=cfg.norm, rcond=cfg.rcond)


def write_certificate(report: Report, result: SearchResult, cfg: ExperimentConfig, prefix="certify",
                      name="curve.csv"):
    result.save_curve(report.path(f"{prefix}/{name}"))
    if cfg.field is not None and name == "curve.csv":
        p = validate_parameters(**cfg.bound_args())
        rows = [[N, carleman_error_bound(p, N)] for N in range(1, p.Nbar + 1)]
        report.table(f"{prefix}/carleman_bound.csv", "N,carleman_bound", rows)
    if result.model is not None and name == "curve.csv":
        stem = report.path(f"{prefix}/model_Nstar.csv").with_suffix("")
        report.files.append(f"{prefix}/model_Nstar.json")
        result.model.save(stem)


def _svg(report, rel, **kwargs):
    line_plot(report.root / rel, **kwargs)


def write_figures(report: Report, comparisons, result: SearchResult, cfg: ExperimentConfig, tau_star: float):
    """Seven figure analogs: three overlays, realized errors, full/truncated drift, bounds."""
    by_N = {c.N: c for c in comparisons}
    d = comparisons[0].model.basis.d
    horizon = comparisons[0].overlay[-1, 0]
    for fig, N in ((1, 2), (2, 5), (3, 11)):
        if N not in by_N:
            continue
        ov = by_N[N].overlay
        cols = ["t"] + [f"x{j + 1}" for j in range(d)] + [f"zhat{j + 1}" for j in range(d)] \
            + [f"z{j + 1}" for j in range(d)]
        report.table(f"figures/fig{fig}_trajectories_N{N}.csv", ",".join(cols), ov)
        series = {}
        for j in range(d):
            series[f"x{j + 1} nonlinear"] = (ov[:, 0], ov[:, 1 + j])
            series[f"x{j + 1} identified"] = (ov[:, 0], ov[:, 1 + d + j])
            series[f"x{j + 1} Carleman"] = (ov[:, 0], ov[:, 1 + 2 * d + j])
        _svg(report, f"figures/fig{fig}_trajectories_N{N}.svg", series=series,
             title=f"Trajectories, N = {N} (shaded: outside certified horizon)", xlabel="t",
             ylabel="state", shade=(tau_star, horizon))
        report.files.append(f"figures/fig{fig}_trajectories_N{N}.svg")

    Ns = np.array([c.N for c in comparisons], dtype=float)
    e_id = np.array([c.err_identified for c in comparisons])
    e_c = np.array([c.err_carleman for c in comparisons])
    full = np.array([c.full_state for c in comparisons])
    trunc = np.array([c.truncated_state for c in comparisons])

    report.table("figures/fig4_realized_error.csv", "N,identified,carleman", np.column_stack([Ns, e_id, e_c]))
    _svg(report, "figures/fig4_realized_error.svg",
         series={"identified": (Ns, e_id), "model-based Carleman": (Ns, e_c)},
         title="sup over [0, tau*] of ||x - z|d||", xlabel="N", ylabel="error (log10)", logy=True)
    report.table("figures/fig5_full_state_error.csv", "N,full_state", np.column_stack([Ns, full]))
    _svg(report, "figures/fig5_full_state_error.svg", series={"||z - zhat||": (Ns, full)},
         title="Full-state drift, model-based vs identified", xlabel="N", ylabel="error (log10)", logy=True)
    report.table("figures/fig6_truncated_state_error.csv", "N,truncated_state", np.column_stack([Ns, trunc]))
    _svg(report, "figures/fig6_truncated_state_error.svg", series={"||z|d - zhat|d||": (Ns, trunc)},
         title="Truncated-state drift, model-based vs identified", xlabel="N", ylabel="error (log10)",
         logy=True)

    curve = result.curve
    cN = np.array([c.N for c in curve], dtype=float)
    log_theta = np.array([c.log10_theta for c in curve])
    carl = np.array([c.carleman_term for c in curve])
    report.table("figures/fig7_bounds.csv", "N,log10_theta_identified,carleman_bound,log10_carleman_bound",
                 np.column_stack([cN, log_theta, carl, np.log10(carl)]))
    _svg(report, "figures/fig7_bounds.svg",
         series={"log10 Theta(N), identified": (cN, log_theta),
                 "log10 D mu^N, model-based": (cN, np.log10(carl))},
         title="Analytic error bounds", xlabel="N", ylabel="log10 bound")
    report.files += ["figures/fig4_realized_error.svg", "figures/fig5_full_state_error.svg",
                     "figures/fig6_truncated_state_error.svg", "figures/fig7_bounds.svg"]


def generate(cfg: ExperimentConfig) -> TrajectorySet:
    if cfg.field is None:
        raise ValueError("configuration has no [field] section; cannot generate data")
    M = cfg.bounds.get("M", math.inf)
    grid = TimeGrid.span(cfg.grid.T_record, cfg.grid.h)
    return generate_dataset(cfg.field, cfg.sampler, grid, M, cfg.norm)


def replicate(cfg: ExperimentConfig, out=None, log=print) -> dict:
    """End-to-end run: data, identification sweep, certificate, figure analogs."""
    report = Report(out or cfg.out, cfg)
    data = generate(cfg)
    log(f"generated {len(data)} trajectories, rejected {len(data.rejected)} (M = {data.M})")
    data.save_csv(report.root / "dataset", {"seed": cfg.sampler.seed, "field": cfg.field.describe(),
                                            "config_hash": cfg.digest()})
    report.files += [f"dataset/traj_{i:04d}.csv" for i in range(len(data))]

    tau_star = cfg.bounds["tau_star"]
    comparisons = sweep_orders(data, cfg.lifting.orders, T_id=cfg.windows.T_id, tau_star=tau_star,
                               horizon=cfg.windows.horizon, field=cfg.field, norm=cfg.norm,
                               rcond=cfg.rcond, plot_index=cfg.plot_index)
    write_comparisons(report, comparisons, data.d)
    for c in comparisons:
        log(f"N={c.N:2d} dim={len(c.model.basis):3d} cond={c.model.condition_number:.2e} "
            f"err_id={c.err_identified:.3e} err_carleman={c.err_carleman:.3e}")

    result = certify(data, cfg)
    write_certificate(report, result, cfg)
    uncertified = certify(data, cfg, T_id=cfg.windows.T_id)
    write_certificate(report, uncertified, cfg, name="curve_uncertified_window.csv")
    log(verdict_text(result))
    write_figures(report, comparisons, result, cfg, tau_star)
    report.finish({"verdict": "Failed" if result.failed else "certified", "Nstar": result.Nstar,
                   "argmin_N": result.argmin_N})
    return {"data": data, "comparisons": comparisons, "result": result, "report": report}


def verdict_text(result: SearchResult) -> str:
    best = result.best
    if best is None:
        return "Failed: no certifiable truncation order"
    th = f"{best.theta:.6g}" if math.isfinite(best.theta) else f"10^{best.log10_theta:.6g}"
    if result.failed:
        return f"Failed: min Theta = {th} at N = {best.N} exceeds Delta"
    return f"certified: N* = {result.Nstar}, Theta(N*) = {th}"

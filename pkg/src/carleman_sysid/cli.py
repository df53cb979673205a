"""Command-line front end.

Subcommands: ``generate``, ``identify``, ``certify``, ``replicate``,
``validate``.  Exit codes: 0 success / certified, 1 certificate Failed,
2 configuration error, 3 certificate parameters invalid, 4 runtime failure
(divergence, missing dataset).
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import __version__
from .bounds import ParameterError, validate_parameters
from .config import ConfigError, default_config, load_config, with_overrides
from .experiment import (Report, certify, generate, replicate, sweep_orders, verdict_text,
                         write_certificate, write_comparisons)
from .simulate import DivergenceError, TrajectorySet

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_PARAMS, EXIT_RUNTIME = 0, 1, 2, 3, 4


def _log(args):
    if args.quiet:
        return lambda *a, **k: None
    return print


def _config(args):
    cfg = load_config(args.config) if args.config else default_config()
    return with_overrides(cfg, seed=args.seed, norm=args.norm, out=args.out)


def _dataset_dir(args, cfg):
    return Path(args.dataset) if getattr(args, "dataset", None) else Path(cfg.out) / "dataset"


def cmd_generate(args):
    cfg = _config(args)
    log = _log(args)
    data = generate(cfg)
    out = _dataset_dir(args, cfg)
    data.save_csv(out, {"seed": cfg.sampler.seed, "field": cfg.field.describe(),
                        "config_hash": cfg.digest()})
    log(f"wrote {len(data)} trajectories to {out}")
    log(f"rejected {len(data.rejected)} of {cfg.sampler.count} initial conditions (M = {data.M}, "
        f"{cfg.norm}-norm)")
    return EXIT_OK


def _load_dataset(args, cfg):
    path = _dataset_dir(args, cfg)
    if not (path / "manifest.json").exists():
        raise FileNotFoundError(f"no dataset at {path}; run 'generate' first")
    return TrajectorySet.load_csv(path)


def cmd_identify(args):
    cfg = _config(args)
    log = _log(args)
    data = _load_dataset(args, cfg)
    tau_star = cfg.bounds.get("tau_star", 0.2)
    report = Report(cfg.out, cfg)
    comparisons = sweep_orders(data, cfg.lifting.orders, T_id=cfg.windows.T_id, tau_star=tau_star,
                               horizon=cfg.windows.horizon, field=cfg.field, norm=cfg.norm,
                               rcond=cfg.rcond, plot_index=cfg.plot_index)
    write_comparisons(report, comparisons, data.d)
    report.finish()
    for c in comparisons:
        status = f"diverged at t={c.diverged_at:g}" if not math.isnan(c.diverged_at) else "finite"
        log(f"N={c.N:2d} sup_err[0,tau*]={c.err_identified:.3e} cond={c.model.condition_number:.2e} {status}")
    return EXIT_OK


def cmd_certify(args):
    cfg = _config(args)
    log = _log(args)
    validate_parameters(**cfg.bound_args())
    data = _load_dataset(args, cfg)
    result = certify(data, cfg)
    report = Report(cfg.out, cfg)
    write_certificate(report, result, cfg)
    report.finish({"verdict": "Failed" if result.failed else "certified", "Nstar": result.Nstar})
    print(verdict_text(result))
    for c in result.curve:
        log(f"N={c.N:2d} theta={c.theta:.4g} log10_theta={c.log10_theta:.4g} "
            f"certifiable={c.certifiable} {c.reason}")
    return EXIT_FAILED if result.failed else EXIT_OK


def cmd_replicate(args):
    cfg = _config(args)
    out = replicate(cfg, log=_log(args))
    return EXIT_FAILED if out["result"].failed else EXIT_OK


def cmd_validate(args):
    cfg = _config(args)
    print(cfg.to_text())
    missing = cfg.missing_bounds()
    if missing:
        print(f"missing required [bounds] keys for certify: {', '.join(missing)}", file=sys.stderr)
        return EXIT_CONFIG
    p = validate_parameters(**cfg.bound_args())
    print(f"D_M = {p.D_M:.6g}")
    print(f"D = {p.D:.6g}")
    print(f"tau* limit = {p.tau_limit:.6g}")
    print(f"mu limit = {p.mu_limit:.8g}")
    print(f"config hash = {cfg.digest()}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="carleman-sysid",
                                     description="Carleman-lifted system identification with error certificates")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help, config_required=True, dataset=False):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", required=config_required, help="experiment configuration file")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, help="sampler seed (overrides the config)")
        p.add_argument("--norm", choices=("inf", "two"), help="norm for errors and certificates")
        p.add_argument("--quiet", action="store_true")
        if dataset:
            p.add_argument("--dataset", help="dataset directory (default: <out>/dataset)")
        p.set_defaults(func=func)

    add("generate", cmd_generate, "simulate trajectories and write the dataset", dataset=True)
    add("identify", cmd_identify, "fit lifted models over a range of orders", dataset=True)
    add("certify", cmd_certify, "run the truncation-order search with error certificates", dataset=True)
    add("replicate", cmd_replicate, "full Van der Pol experiment with figure analogs", config_required=False)
    add("validate", cmd_validate, "echo the configuration and derived constants")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ParameterError as exc:
        for code, msg in exc.violations:
            print(f"violated [{code}]: {msg}", file=sys.stderr)
        return EXIT_PARAMS
    except (DivergenceError, FileNotFoundError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

"""Experiment configuration files.

The format is line oriented, with ``[section]`` headers, ``key = value``
pairs and, in the ``[field]`` section, polynomial term lines::

    # Van der Pol
    [field]
    f: 1 0 -> 0 -1       # x1 contributes (0, -1)
    f: 0 1 -> 1 -1
    f: 2 1 -> 0 1        # x1^2 x2 contributes (0, 1)

    [sampler]
    count = 209
    low = -1
    high = 1
    seed = 0

    [grid]
    h = 0.01
    T_record = 10

    [lifting]
    orders = 1-12
    Nbar = 13

    [bounds]
    C = 33.7
    R = 4.1
    C0 = 0.001
    M = 1.5
    tau_star = 0.2
    mu = 0.9946
    Delta = inf

    [windows]
    T_id = 10
    T_cert = 0.2
    horizon = 20

    [output]
    norm = inf
    out = results

A term line ``f: a1 ... ad -> c1 ... cd`` adds ``c * x^a`` to the field.
Everything after ``#`` is ignored.  Sections other than ``[field]`` fall
back to the defaults below, except ``[bounds]``, whose keys must all be
present before a certificate can be computed.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field as dc_field, replace
from pathlib import Path

from .polyflow import PolynomialField, van_der_pol
from .simulate import InitialConditionSpec

BOUND_KEYS = ("C", "R", "C0", "M", "tau_star", "mu", "Delta")


class ConfigError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class GridConfig:
    h: float = 0.01
    T_record: float = 10.0


@dataclass(frozen=True)
class LiftingConfig:
    orders: tuple = tuple(range(1, 13))
    Nbar: int = 13


@dataclass(frozen=True)
class WindowConfig:
    T_id: float = 10.0
    T_cert: float | None = None
    horizon: float = 20.0


@dataclass(frozen=True)
class ExperimentConfig:
    field: PolynomialField | None = None
    sampler: InitialConditionSpec = InitialConditionSpec()
    grid: GridConfig = GridConfig()
    lifting: LiftingConfig = LiftingConfig()
    bounds: dict = dc_field(default_factory=dict)
    windows: WindowConfig = WindowConfig()
    norm: str = "inf"
    rcond: float = 1e-10
    out: str = "results"
    plot_index: int = 0

    def missing_bounds(self) -> list[str]:
        return [k for k in BOUND_KEYS if k not in self.bounds]

    def bound_args(self) -> dict:
        missing = self.missing_bounds()
        if missing:
            raise ConfigError(f"missing required [bounds] keys: {', '.join(missing)}")
        args = {k: self.bounds[k] for k in BOUND_KEYS}
        args["Nbar"] = self.lifting.Nbar
        return args

    def to_text(self) -> str:
        """Canonical text form; parsing it returns an equal configuration."""
        lines = []
        if self.field is not None:
            lines.append("[field]")
            for term in self.field.describe().split("; "):
                lines.append(f"f: {term}")
            lines.append("")
        s = self.sampler
        lines += ["[sampler]", f"count = {s.count}", f"low = {s.low!r}", f"high = {s.high!r}",
                  f"seed = {s.seed}", "",
                  "[grid]", f"h = {self.grid.h!r}", f"T_record = {self.grid.T_record!r}", "",
                  "[lifting]", "orders = " + " ".join(map(str, self.lifting.orders)),
                  f"Nbar = {self.lifting.Nbar}", ""]
        lines.append("[bounds]")
        lines += [f"{k} = {self.bounds[k]!r}" for k in BOUND_KEYS if k in self.bounds]
        lines.append("")
        w = self.windows
        lines += ["[windows]", f"T_id = {w.T_id!r}"]
        if w.T_cert is not None:
            lines.append(f"T_cert = {w.T_cert!r}")
        lines += [f"horizon = {w.horizon!r}", "",
                  "[output]", f"norm = {self.norm}", f"rcond = {self.rcond!r}", f"out = {self.out}",
                  f"plot_index = {self.plot_index}", ""]
        return "\n".join(lines)

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()


def default_config() -> ExperimentConfig:
    """Van der Pol replication defaults (209 trajectories on [-1, 1]^2)."""
    return ExperimentConfig(
        field=van_der_pol(),
        bounds=dict(C=33.7, R=4.1, C0=0.001, M=1.5, tau_star=0.2, mu=0.9946, Delta=math.inf),
    )


def _number(text, line, integer=False):
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}", line) from None
    if integer:
        if not v.is_integer():
            raise ConfigError(f"expected an integer, got {text!r}", line)
        return int(v)
    return v


def _orders(text, line):
    out = []
    for chunk in text.replace(",", " ").split():
        if "-" in chunk.lstrip("-"):
            lo, hi = chunk.split("-", 1)
            out.extend(range(_number(lo, line, True), _number(hi, line, True) + 1))
        else:
            out.append(_number(chunk, line, True))
    if not out or min(out) < 1:
        raise ConfigError(f"orders must be positive integers, got {text!r}", line)
    return tuple(out)


_SCHEMA = {
    "sampler": {"count": int, "low": float, "high": float, "seed": int},
    "grid": {"h": float, "T_record": float},
    "lifting": {"orders": "orders", "Nbar": int, "N": "orders"},
    "bounds": {k: float for k in BOUND_KEYS},
    "windows": {"T_id": float, "T_cert": float, "horizon": float},
    "output": {"norm": str, "rcond": float, "out": str, "plot_index": int},
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse configuration text; errors carry the offending line number."""
    section = None
    terms, d = {}, None
    values = {name: {} for name in _SCHEMA}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {raw.strip()!r}", lineno)
            section = line[1:-1].strip()
            if section != "field" and section not in _SCHEMA:
                raise ConfigError(f"unknown section [{section}]", lineno)
            continue
        if section is None:
            raise ConfigError("entry outside of any section", lineno)
        if section == "field":
            if not line.startswith("f:") or "->" not in line:
                raise ConfigError(f"malformed term line {raw.strip()!r}; expected 'f: a1 .. ad -> c1 .. cd'", lineno)
            lhs, rhs = line[2:].split("->", 1)
            alpha = [_number(a, lineno, True) for a in lhs.split()]
            coef = [_number(c, lineno) for c in rhs.split()]
            if not alpha or len(alpha) != len(coef):
                raise ConfigError("exponent and coefficient lists must have the same nonzero length", lineno)
            if d is None:
                d = len(alpha)
            elif len(alpha) != d:
                raise ConfigError(f"term has dimension {len(alpha)}, earlier terms have {d}", lineno)
            if min(alpha) < 0 or sum(alpha) == 0:
                raise ConfigError("exponents must be non-negative with positive total degree", lineno)
            key = tuple(alpha)
            terms[key] = [a + b for a, b in zip(terms[key], coef)] if key in terms else coef
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, val = (s.strip() for s in line.split("=", 1))
        kind = _SCHEMA[section].get(key)
        if kind is None:
            raise ConfigError(f"unknown key {key!r} in [{section}]", lineno)
        if kind == "orders":
            values[section]["orders"] = _orders(val, lineno)
        elif kind is int:
            values[section][key] = _number(val, lineno, True)
        elif kind is float:
            values[section][key] = _number(val, lineno)
        else:
            values[section][key] = val

    cfg = ExperimentConfig(
        field=PolynomialField(d, terms) if terms else None,
        sampler=InitialConditionSpec(**values["sampler"]),
        grid=GridConfig(**values["grid"]),
        lifting=LiftingConfig(**values["lifting"]),
        bounds=values["bounds"],
        windows=WindowConfig(**values["windows"]),
        **values["output"],
    )
    _check(cfg)
    return cfg


def _check(cfg: ExperimentConfig):
    if cfg.sampler.count < 1:
        raise ConfigError(f"sampler count must be positive, got {cfg.sampler.count}")
    for name, v in (("h", cfg.grid.h), ("T_record", cfg.grid.T_record), ("T_id", cfg.windows.T_id),
                    ("horizon", cfg.windows.horizon)):
        if not v > 0:
            raise ConfigError(f"{name} must be positive, got {v}")
    if cfg.windows.T_cert is not None and not cfg.windows.T_cert > 0:
        raise ConfigError("T_cert must be positive")
    if cfg.norm not in ("inf", "two"):
        raise ConfigError(f"norm must be 'inf' or 'two', got {cfg.norm!r}")
    if cfg.lifting.Nbar < 1:
        raise ConfigError("Nbar must be positive")


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def with_overrides(cfg: ExperimentConfig, seed=None, norm=None, out=None) -> ExperimentConfig:
    if seed is not None:
        cfg = replace(cfg, sampler=replace(cfg.sampler, seed=int(seed)))
    if norm is not None:
        cfg = replace(cfg, norm=norm)
    if out is not None:
        cfg = replace(cfg, out=str(out))
    _check(cfg)
    return cfg


__all__ = ["ConfigError", "ExperimentConfig", "GridConfig", "LiftingConfig", "WindowConfig",
           "BOUND_KEYS", "default_config", "load_config", "parse_config", "with_overrides"]

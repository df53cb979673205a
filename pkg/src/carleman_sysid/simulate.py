"""Trajectory generation for polynomial fields and lifted linear systems."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .nummat import expm, vector_norm
from .polyflow import PolynomialField, evaluate


class DivergenceError(FloatingPointError):
    """A simulated state became non-finite."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t0 + k h`` for ``k = 0..count-1``."""

    t0: float
    h: float
    count: int

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"step must be positive, got {self.h}")
        if int(self.count) != self.count or self.count < 1:
            raise ValueError(f"count must be a positive integer, got {self.count}")

    @classmethod
    def span(cls, t_end: float, h: float, t0: float = 0.0) -> "TimeGrid":
        """Grid from ``t0`` to ``t_end`` inclusive; ``t_end - t0`` must be a multiple of ``h``."""
        steps = (t_end - t0) / h
        k = int(round(steps))
        if abs(steps - k) > 1e-9 * max(1.0, abs(steps)):
            raise ValueError(f"span {t_end - t0} is not a multiple of h={h}")
        return cls(float(t0), float(h), k + 1)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.count)

    @property
    def t_end(self) -> float:
        return self.t0 + self.h * (self.count - 1)

    def index_of(self, t: float) -> int:
        """Index of the grid point at time ``t``; raises if ``t`` is off-grid."""
        k = (t - self.t0) / self.h
        i = int(round(k))
        if abs(k - i) > 1e-9 * max(1.0, abs(k)) or not 0 <= i < self.count:
            raise ValueError(f"time {t} is not a point of the grid [{self.t0}, {self.t_end}] with step {self.h}")
        return i


@dataclass(frozen=True)
class Trajectory:
    grid: TimeGrid
    states: np.ndarray

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        if states.ndim != 2 or states.shape[0] != self.grid.count:
            raise ValueError(f"states must have shape ({self.grid.count}, dim), got {states.shape}")
        if not np.all(np.isfinite(states)):
            raise ValueError("trajectory contains non-finite states")
        object.__setattr__(self, "states", states)

    @property
    def times(self):
        return self.grid.times


@dataclass(frozen=True)
class InitialConditionSpec:
    """``count`` initial conditions drawn i.i.d. uniform from ``[low, high]^d``."""

    count: int = 209
    low: float = -1.0
    high: float = 1.0
    seed: int = 0

    def sample(self, d: int) -> np.ndarray:
        if self.count < 1:
            raise ValueError(f"initial condition count must be positive, got {self.count}")
        if self.high < self.low:
            raise ValueError("empty sampling box")
        rng = np.random.default_rng(self.seed)
        return rng.uniform(self.low, self.high, size=(self.count, d))


@dataclass
class TrajectorySet:
    """Trajectories on a shared grid with an amplitude bound ``M``.

    ``states`` has shape ``(m, grid.count, d)``.  Construction fails if any
    sample has norm above ``M``; :func:`generate_dataset` filters violators
    beforehand and lists them in ``rejected``.
    """

    grid: TimeGrid
    states: np.ndarray
    M: float
    norm: str = "inf"
    rejected: tuple = ()
    initial_conditions: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim != 3 or self.states.shape[1] != self.grid.count:
            raise ValueError(f"states must have shape (m, {self.grid.count}, d), got {self.states.shape}")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("trajectory set contains non-finite states")
        peak = self.peak_norm()
        if peak > self.M:
            raise ValueError(f"amplitude bound violated: sup ||x|| = {peak:.6g} > M = {self.M}")

    def __len__(self):
        return self.states.shape[0]

    def __getitem__(self, i) -> Trajectory:
        return Trajectory(self.grid, self.states[i])

    @property
    def d(self) -> int:
        return self.states.shape[2]

    def peak_norm(self) -> float:
        if self.states.size == 0:
            return 0.0
        return float(vector_norm(self.states, self.norm).max())

    def save_csv(self, directory, manifest_extra=None) -> list[Path]:
        """One CSV per trajectory (``t, x1..xd``) plus ``manifest.json``."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        header = ",".join(["t"] + [f"x{j + 1}" for j in range(self.d)])
        t = self.grid.times
        written = []
        for i in range(len(self)):
            path = directory / f"traj_{i:04d}.csv"
            write_table(path, header, np.column_stack([t, self.states[i]]))
            written.append(path)
        manifest = {
            "count": len(self),
            "d": self.d,
            "grid": {"t0": self.grid.t0, "h": self.grid.h, "count": self.grid.count},
            "M": self.M,
            "norm": self.norm,
            "rejected": list(self.rejected),
            "files": [p.name for p in written],
        }
        manifest.update(manifest_extra or {})
        (directory / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return written

    @classmethod
    def load_csv(cls, directory) -> "TrajectorySet":
        directory = Path(directory)
        manifest = json.loads((directory / "manifest.json").read_text())
        g = manifest["grid"]
        grid = TimeGrid(g["t0"], g["h"], g["count"])
        states = [np.loadtxt(directory / name, delimiter=",", skiprows=1, ndmin=2)[:, 1:]
                  for name in manifest["files"]]
        states = np.array(states).reshape(len(states), grid.count, manifest["d"])
        return cls(grid, states, manifest["M"], manifest.get("norm", "inf"),
                   tuple(manifest.get("rejected", ())))


def write_table(path, header: str, rows) -> None:
    """CSV with a header row and round-trip float formatting."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for r in rows:
            fh.write(",".join(_fmt(v) for v in r) + "\n")


def _fmt(v: float) -> str:
    if np.isnan(v):
        return "nan"
    if np.isinf(v):
        return "inf" if v > 0 else "-inf"
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def _rk4(field: PolynomialField, x0: np.ndarray, grid: TimeGrid) -> np.ndarray:
    # x0 has shape (..., d); returns (count, ..., d)
    h = grid.h
    out = np.empty((grid.count,) + x0.shape)
    out[0] = x = x0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, grid.count):
            k1 = evaluate(field, x)
            k2 = evaluate(field, x + 0.5 * h * k1)
            k3 = evaluate(field, x + 0.5 * h * k2)
            k4 = evaluate(field, x + h * k3)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(x)):
                t = grid.t0 + k * h
                raise DivergenceError(f"state became non-finite at t = {t:.6g}", time=t)
            out[k] = x
    return out


def integrate_field(field: PolynomialField, x0, grid: TimeGrid) -> Trajectory:
    """Fixed-step classical Runge-Kutta integration of ``x' = f(x)``."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (field.d,):
        raise ValueError(f"x0 must have length {field.d}")
    return Trajectory(grid, _rk4(field, x0, grid))


def integrate_field_batch(field: PolynomialField, X0, grid: TimeGrid) -> np.ndarray:
    """Integrate many initial conditions at once; returns ``(m, count, d)``."""
    X0 = np.atleast_2d(np.asarray(X0, dtype=float))
    return np.moveaxis(_rk4(field, X0, grid), 0, 1)


def integrate_linear(A, z0, grid: TimeGrid, step_matrix=None) -> np.ndarray:
    """Sample ``z' = A z`` on ``grid`` by repeated application of ``exp(A h)``.

    ``z0`` may be a vector or a batch ``(m, n)``; the result has shape
    ``(count, n)`` or ``(m, count, n)`` respectively.

    Raises
    ------
    DivergenceError
        On non-finite propagation (an unstable estimate is reported, not masked).
    """
    A = np.asarray(A, dtype=float)
    z0 = np.asarray(z0, dtype=float)
    if z0.shape[-1] != A.shape[0]:
        raise ValueError(f"z0 length {z0.shape[-1]} does not match matrix side {A.shape[0]}")
    E = expm(A * grid.h) if step_matrix is None else step_matrix
    batch = z0.reshape(-1, A.shape[0])
    out = np.empty((grid.count,) + batch.shape)
    out[0] = z = batch
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, grid.count):
            z = z @ E.T
            if not np.all(np.isfinite(z)):
                t = grid.t0 + k * grid.h
                raise DivergenceError(f"lifted state became non-finite at t = {t:.6g}", time=t)
            out[k] = z
    if z0.ndim == 1:
        return out[:, 0, :]
    return np.moveaxis(out, 0, 1)


def generate_dataset(field: PolynomialField, sampler: InitialConditionSpec, grid: TimeGrid,
                     M: float, norm: str = "inf") -> TrajectorySet:
    """Integrate sampled initial conditions and keep those bounded by ``M``.

    Rejected samples (indices into the sampler's draw) are listed in
    ``TrajectorySet.rejected``.  Divergence of any sample is an error.
    """
    X0 = sampler.sample(field.d)
    states = integrate_field_batch(field, X0, grid)
    peaks = vector_norm(states, norm).max(axis=1)
    ok = peaks <= M
    rejected = tuple(int(i) for i in np.flatnonzero(~ok))
    return TrajectorySet(grid, states[ok], M, norm, rejected, initial_conditions=X0[ok])

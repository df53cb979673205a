"""Integrated least-squares estimation of the lifted system matrix.

Matrices are oriented with lifted coordinates along rows and trajectories
(or trajectory windows) along columns.  For each column ``i``::

    lift(x_i(T)) - lift(x_i(0)) = A_hat @ integral_0^T lift(x_i(t)) dt

and ``A_hat`` is the minimum-norm least-squares solution, obtained with a
right pseudo-inverse of the integral matrix.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .lifting import LiftingBasis, build_basis, lift
from .nummat import condition_number, numerical_rank, pinv
from .simulate import TrajectorySet, write_table


@dataclass(frozen=True)
class LiftedDataset:
    basis: LiftingBasis
    Gamma0: np.ndarray
    GammaT: np.ndarray
    IGamma: np.ndarray
    window: float

    @property
    def m(self) -> int:
        return self.IGamma.shape[1]

    @property
    def increments(self) -> np.ndarray:
        return self.GammaT - self.Gamma0


@dataclass(frozen=True)
class IdentifiedModel:
    """Estimated lifted matrix with fit diagnostics.

    ``certifiable`` is False when the integral matrix is row-rank deficient
    at the pseudo-inverse tolerance; the estimate is still usable for
    simulation but no error certificate can be attached to it.
    """

    basis: LiftingBasis
    Ahat: np.ndarray
    window: float
    condition_number: float
    residual: float
    rank: int
    certifiable: bool

    def save(self, stem) -> tuple[Path, Path]:
        """Write ``<stem>.csv`` (matrix dump) and ``<stem>.json`` (manifest)."""
        stem = Path(stem)
        stem.parent.mkdir(parents=True, exist_ok=True)
        n = len(self.basis)
        csv_path = stem.with_suffix(".csv")
        write_table(csv_path, ",".join(f"c{j}" for j in range(n)), self.Ahat)
        meta = {
            "d": self.basis.d,
            "N": self.basis.N,
            "lifted_dim": n,
            "basis": [list(a) for a in self.basis.indices],
            "window": self.window,
            "condition_number": self.condition_number,
            "residual": self.residual,
            "rank": self.rank,
            "certifiable": self.certifiable,
        }
        json_path = stem.with_suffix(".json")
        json_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        return csv_path, json_path

    @classmethod
    def load(cls, stem) -> "IdentifiedModel":
        stem = Path(stem)
        meta = json.loads(stem.with_suffix(".json").read_text())
        Ahat = np.loadtxt(stem.with_suffix(".csv"), delimiter=",", skiprows=1, ndmin=2)
        return cls(build_basis(meta["d"], meta["N"]), Ahat, meta["window"],
                   meta["condition_number"], meta["residual"], meta["rank"], meta["certifiable"])


def lift_dataset(data: TrajectorySet, basis: LiftingBasis, window=None) -> LiftedDataset:
    """Lift every trajectory over ``window = (start, end)`` and integrate.

    Integrals use the composite trapezoid rule on the recording grid, so both
    window endpoints must be grid points.  ``window=None`` uses the full
    recording.
    """
    if len(data) == 0:
        raise ValueError("trajectory set is empty")
    if data.d != basis.d:
        raise ValueError(f"data dimension {data.d} does not match basis dimension {basis.d}")
    grid = data.grid
    start, end = (grid.t0, grid.t_end) if window is None else window
    i0, i1 = grid.index_of(start), grid.index_of(end)
    if i1 <= i0:
        raise ValueError(f"window end {end} must be after start {start}")
    Z = lift(basis, data.states[:, i0:i1 + 1, :])   # (m, samples, n)
    integral = grid.h * (Z.sum(axis=1) - 0.5 * (Z[:, 0] + Z[:, -1]))
    return LiftedDataset(basis, Z[:, 0].T.copy(), Z[:, -1].T.copy(), integral.T.copy(),
                         float(grid.h * (i1 - i0)))


def multi_window_augment(data: TrajectorySet, basis: LiftingBasis, windows) -> LiftedDataset:
    """Concatenate column blocks from several windows of the same trajectories."""
    windows = list(windows)
    if not windows:
        raise ValueError("no windows given")
    parts = [lift_dataset(data, basis, w) for w in windows]
    lengths = {p.window for p in parts}
    return LiftedDataset(
        basis,
        np.hstack([p.Gamma0 for p in parts]),
        np.hstack([p.GammaT for p in parts]),
        np.hstack([p.IGamma for p in parts]),
        max(lengths),
    )


def estimate(data: LiftedDataset, rcond: float = 1e-10) -> IdentifiedModel:
    """Least-squares estimate ``A_hat = (Gamma(T) - Gamma(0)) pinv(I_Gamma)``."""
    n = len(data.basis)
    for name in ("Gamma0", "GammaT", "IGamma"):
        shape = getattr(data, name).shape
        if shape[0] != n or shape[1] != data.m:
            raise ValueError(f"{name} has shape {shape}, expected ({n}, {data.m})")
    if data.m < 1:
        raise ValueError("need at least one column")
    Y = data.increments
    Ahat = Y @ pinv(data.IGamma, rcond)
    rank = numerical_rank(data.IGamma, rcond)
    return IdentifiedModel(
        basis=data.basis,
        Ahat=Ahat,
        window=data.window,
        condition_number=condition_number(data.IGamma) if data.m >= n else float("inf"),
        residual=float(np.linalg.norm(Y - Ahat @ data.IGamma)),
        rank=rank,
        certifiable=rank == n,
    )

"""Dense linear algebra used by the estimator and the error certificates.

All rank decisions go through the SVD.  The matrix exponential is delegated
to :func:`scipy.linalg.expm` (scaling and squaring with a degree-13 Padé
approximant).
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

GRAM_CONDITION_LIMIT = 1e12


class RankDeficiencyError(np.linalg.LinAlgError):
    """A Gram matrix is too ill-conditioned to bound its inverse."""


def _svd(M):
    try:
        return np.linalg.svd(M, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"SVD did not converge for a {M.shape} matrix") from exc


def pinv(M, rcond: float = 1e-10) -> np.ndarray:
    """Moore-Penrose pseudo-inverse.

    Singular values below ``rcond * sigma_max`` are treated as zero.
    """
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return np.zeros(M.shape[::-1])
    U, s, Vt = _svd(M)
    cutoff = rcond * s[0] if s.size else 0.0
    inv = np.zeros_like(s)
    keep = s > cutoff
    inv[keep] = 1.0 / s[keep]
    return (Vt.T * inv) @ U.T


def numerical_rank(M, rcond: float = 1e-10) -> int:
    s = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rcond * s[0]))


def condition_number(M) -> float:
    """Ratio of extreme singular values (``inf`` for rank-deficient input)."""
    s = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    if s.size == 0 or s[-1] == 0.0:
        return float("inf")
    return float(s[0] / s[-1])


def expm(M) -> np.ndarray:
    """Matrix exponential of a square matrix.

    Raises
    ------
    OverflowError
        If the result contains non-finite entries.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expm needs a square matrix, got shape {M.shape}")
    with np.errstate(over="ignore", invalid="ignore"):
        E = scipy.linalg.expm(M)
    if not np.all(np.isfinite(E)):
        raise OverflowError(f"matrix exponential overflowed (||M||_inf = {induced_norm(M):.3g})")
    return E


def induced_norm(M, kind: str = "inf") -> float:
    """Induced matrix norm: ``"inf"`` (max row sum) or ``"two"`` (spectral)."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0.0
    if kind == "inf":
        return float(np.abs(M).sum(axis=1).max())
    if kind == "two":
        return float(np.linalg.svd(M, compute_uv=False)[0])
    raise ValueError(f"unknown norm kind {kind!r}; use 'inf' or 'two'")


def vector_norm(v, kind: str = "inf", axis=-1) -> np.ndarray:
    """Vector norm matching :func:`induced_norm` along ``axis``."""
    v = np.asarray(v, dtype=float)
    if kind == "inf":
        return np.abs(v).max(axis=axis)
    if kind == "two":
        return np.linalg.norm(v, axis=axis)
    raise ValueError(f"unknown norm kind {kind!r}; use 'inf' or 'two'")


def gram_inverse_norm(M, kind: str = "inf") -> float:
    """``||(M^T M)^-1||`` computed from the SVD of ``M``.

    Raises
    ------
    RankDeficiencyError
        If the condition number of ``M^T M`` exceeds ``GRAM_CONDITION_LIMIT``;
        the inverse Gram bound then cannot be certified from data.
    """
    M = np.asarray(M, dtype=float)
    _, s, Vt = _svd(M)
    if s.size < M.shape[1] or s[-1] == 0.0:
        raise RankDeficiencyError(f"{M.shape} matrix has rank below {M.shape[1]}; Gram matrix is singular")
    cond = (s[0] / s[-1]) ** 2
    if cond > GRAM_CONDITION_LIMIT:
        raise RankDeficiencyError(f"Gram matrix condition number {cond:.3e} exceeds {GRAM_CONDITION_LIMIT:.0e}")
    if kind == "two":
        return float(1.0 / s[-1] ** 2)
    G_inv = (Vt.T / s**2) @ Vt
    return induced_norm(G_inv, kind)

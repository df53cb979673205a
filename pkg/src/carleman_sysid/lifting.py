"""Monomial bases and the lifting map.

A basis of order ``N`` in ``d`` variables holds every exponent vector
``alpha`` with ``1 <= |alpha| <= N``.  Entries are graded by total degree and,
within a degree, sorted lexicographically with the first coordinate most
significant, so that for ``d = 2, N = 3`` the lifted state reads::

    x1, x2, x1^2, x1 x2, x2^2, x1^3, x1^2 x2, x1 x2^2, x2^3

The first ``d`` entries are always the coordinates themselves, which is what
makes :func:`truncate_to_d` a left inverse of :func:`lift`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

MultiIndex = tuple[int, ...]


def _compositions(total: int, d: int):
    # exponent vectors of length d summing to `total`, first coordinate descending
    if d == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, d - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _enumerate(d: int, N: int) -> tuple[MultiIndex, ...]:
    out: list[MultiIndex] = []
    for degree in range(1, N + 1):
        out.extend(_compositions(degree, d))
    return tuple(out)


@dataclass(frozen=True)
class LiftingBasis:
    """Canonical graded-lex monomial basis of order ``N`` in ``d`` variables."""

    d: int
    N: int
    indices: tuple[MultiIndex, ...] = field(repr=False)

    def __post_init__(self):
        exps = np.array(self.indices, dtype=np.int64).reshape(len(self.indices), self.d)
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "degrees", exps.sum(axis=1))
        object.__setattr__(self, "_position", {a: k for k, a in enumerate(self.indices)})

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def size(self) -> int:
        """Lifted dimension, ``binomial(d + N, N) - 1``."""
        return len(self.indices)

    def position(self, alpha: MultiIndex) -> int | None:
        """Row of ``alpha`` in the basis, or ``None`` when it is not a member."""
        return self._position.get(tuple(int(a) for a in alpha))

    def degree_slice(self, degree: int) -> slice:
        """Contiguous block of entries of total degree ``degree``."""
        lo = comb(self.d + degree - 1, degree - 1) - 1
        hi = comb(self.d + degree, degree) - 1
        return slice(lo, hi)


def basis_size(d: int, N: int) -> int:
    return comb(d + N, N) - 1


def build_basis(d: int, N: int) -> LiftingBasis:
    """Return the canonical monomial basis with total degrees ``1..N``.

    Raises
    ------
    ValueError
        If ``d`` or ``N`` is not a positive integer.
    """
    if int(d) != d or d < 1:
        raise ValueError(f"state dimension d must be a positive integer, got {d!r}")
    if int(N) != N or N < 1:
        raise ValueError(f"truncation order N must be a positive integer, got {N!r}")
    d, N = int(d), int(N)
    return LiftingBasis(d=d, N=N, indices=_enumerate(d, N))


def _power_table(x: np.ndarray, top: int) -> list[np.ndarray]:
    # x**k for k = 0..top, each built by binary powering from smaller entries
    table = [np.ones_like(x), x]
    for k in range(2, top + 1):
        half = table[k // 2]
        table.append(half * half if k % 2 == 0 else half * half * x)
    return table


def lift(basis: LiftingBasis, x) -> np.ndarray:
    """Evaluate every basis monomial at ``x``.

    ``x`` may carry leading batch axes; the last axis must have length
    ``basis.d``.  The result has the same leading axes and a last axis of
    length ``len(basis)``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != basis.d:
        raise ValueError(f"expected last axis of length {basis.d}, got shape {x.shape}")
    cols = [_power_table(x[..., j], basis.N) for j in range(basis.d)]
    out = np.empty(x.shape[:-1] + (len(basis),))
    for k, alpha in enumerate(basis.indices):
        val = None
        for j, a in enumerate(alpha):
            if a:
                val = cols[j][a] if val is None else val * cols[j][a]
        out[..., k] = val
    return out


def truncate_to_d(basis: LiftingBasis, z) -> np.ndarray:
    """Project lifted state(s) onto the original coordinates (first ``d`` entries)."""
    z = np.asarray(z, dtype=float)
    if z.ndim == 0 or z.shape[-1] != len(basis):
        raise ValueError(f"expected last axis of length {len(basis)}, got shape {z.shape}")
    return z[..., : basis.d].copy()

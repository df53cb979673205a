"""Polynomial vector fields and their truncated Carleman matrices."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lifting import LiftingBasis


@dataclass(frozen=True, eq=False)
class PolynomialField:
    """Autonomous polynomial field ``f(x) = sum_alpha f_alpha x^alpha``.

    Parameters
    ----------
    d : int
        State dimension.
    terms : dict
        Maps exponent tuples (``|alpha| >= 1``) to coefficient vectors of
        length ``d``.  Coefficients are constant in time.
    """

    d: int
    terms: dict

    def __post_init__(self):
        clean = {}
        for alpha, coef in self.terms.items():
            alpha = tuple(int(a) for a in alpha)
            coef = np.asarray(coef, dtype=float)
            if len(alpha) != self.d or min(alpha) < 0:
                raise ValueError(f"exponent {alpha} is not a multi-index of length {self.d}")
            if sum(alpha) == 0:
                raise ValueError("constant terms are not allowed: the origin must be an equilibrium")
            if coef.shape != (self.d,):
                raise ValueError(f"coefficient for {alpha} must have length {self.d}")
            if alpha in clean:
                clean[alpha] = clean[alpha] + coef
            else:
                clean[alpha] = coef
        object.__setattr__(self, "terms", clean)

    @property
    def degree(self) -> int:
        return max((sum(a) for a in self.terms), default=0)

    @property
    def min_degree(self) -> int:
        return min((sum(a) for a in self.terms), default=0)

    def degree_sums(self) -> np.ndarray:
        """``s[n] = sum_{|alpha|=n} ||f_alpha||_inf`` for ``n = 0..degree``."""
        s = np.zeros(self.degree + 1)
        for alpha, coef in self.terms.items():
            s[sum(alpha)] += np.abs(coef).max()
        return s

    def __call__(self, x):
        return evaluate(self, x)

    def __eq__(self, other):
        if not isinstance(other, PolynomialField):
            return NotImplemented
        return (self.d == other.d and self.terms.keys() == other.terms.keys()
                and all(np.array_equal(c, other.terms[a]) for a, c in self.terms.items()))

    def __hash__(self):
        return hash(self.describe())

    def describe(self) -> str:
        lines = []
        for alpha, coef in sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), tuple(-a for a in kv[0]))):
            lines.append(" ".join(map(str, alpha)) + " -> " + " ".join(repr(float(c)) for c in coef))
        return "; ".join(lines)


def linear_field(F) -> PolynomialField:
    """Field ``x' = F x``."""
    F = np.asarray(F, dtype=float)
    d = F.shape[0]
    terms = {}
    for j in range(d):
        e = [0] * d
        e[j] = 1
        if np.any(F[:, j]):
            terms[tuple(e)] = F[:, j]
    return PolynomialField(d, terms)


def van_der_pol() -> PolynomialField:
    """``x1' = x2``, ``x2' = -x1 - x2 + x2 x1^2``."""
    return PolynomialField(2, {
        (1, 0): [0.0, -1.0],
        (0, 1): [1.0, -1.0],
        (2, 1): [0.0, 1.0],
    })


def evaluate(field: PolynomialField, x) -> np.ndarray:
    """Evaluate the field at ``x`` (trailing axis of length ``d``)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != field.d:
        raise ValueError(f"expected last axis of length {field.d}, got shape {x.shape}")
    out = np.zeros(x.shape)
    for alpha, coef in field.terms.items():
        mono = np.ones(x.shape[:-1])
        for j, a in enumerate(alpha):
            if a:
                mono = mono * x[..., j] ** a
        out += mono[..., None] * coef
    return out


def decay_constants_hint(field: PolynomialField, grid=None) -> tuple[float, float]:
    """Heuristic ``(C, R)`` with ``sum_{|alpha|=n} ||f_alpha||_inf <= C R^-n``.

    For each ``R`` on a logarithmic grid the smallest valid ``C`` is
    ``max_n s_n R^n``.  The returned pair minimises the first-order rate
    ``C / R`` and, among ties, takes the largest ``R`` (the widest admissible
    amplitude region ``M < R / e``).  Always check the result against the
    inequality; it is a convenience, not a derivation.
    """
    if not field.terms:
        raise ValueError("field has no terms")
    s = field.degree_sums()
    if not np.any(s):
        raise ValueError("field is identically zero")
    if grid is None:
        grid = np.logspace(-2, 3, 1000)
    n = np.arange(len(s))
    C = (s[None, :] * grid[:, None] ** n[None, :]).max(axis=1)
    rate = C / grid
    best = rate.min()
    ok = np.flatnonzero(rate <= best * (1 + 1e-12))
    k = ok[-1]
    return float(C[k]), float(grid[k])


def carleman_matrix(field: PolynomialField, basis: LiftingBasis) -> np.ndarray:
    """Truncated Carleman matrix of ``field`` on ``basis``.

    Row ``beta`` holds the basis coefficients of
    ``d/dt x^beta = sum_i beta_i x^(beta - e_i) f_i(x)``; monomials of degree
    above ``basis.N`` are discarded.
    """
    if field.d != basis.d:
        raise ValueError(f"field dimension {field.d} does not match basis dimension {basis.d}")
    n = len(basis)
    A = np.zeros((n, n))
    for row, beta in enumerate(basis.indices):
        for i, b in enumerate(beta):
            if b == 0:
                continue
            for alpha, coef in field.terms.items():
                c = coef[i]
                if c == 0.0:
                    continue
                gamma = list(beta)
                gamma[i] -= 1
                col = basis.position(tuple(g + a for g, a in zip(gamma, alpha)))
                if col is not None:
                    A[row, col] += b * c
    return A


def lifted_derivative(field: PolynomialField, basis: LiftingBasis, x) -> np.ndarray:
    """Exact ``d/dt lift(x)`` along the flow, including discarded high-degree terms."""
    x = np.asarray(x, dtype=float)
    fx = evaluate(field, x)
    out = np.zeros(x.shape[:-1] + (len(basis),))
    for k, beta in enumerate(basis.indices):
        for i, b in enumerate(beta):
            if b == 0:
                continue
            mono = np.ones(x.shape[:-1])
            for j, a in enumerate(beta):
                e = a - 1 if j == i else a
                if e:
                    mono = mono * x[..., j] ** e
            out[..., k] += b * mono * fx[..., i]
    return out

"""A-priori trajectory error certificates and the truncation-order search.

The certified bound on ``||x(t) - z_hat|_d(t)||`` for ``t`` in ``[0, tau*]``
is::

    Theta(N) = D mu^N + tau* * Bbar * zbar * Abar

where ``D mu^N`` bounds the error of the model-based Carleman truncation and
the second term bounds the drift between the model-based and the identified
lifted systems.  :func:`order_search` evaluates ``Theta`` for
``N = 1..Nbar`` on data and returns the minimiser.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .identify import IdentifiedModel, estimate, lift_dataset
from .lifting import build_basis, lift
from .nummat import RankDeficiencyError, expm, gram_inverse_norm, induced_norm, vector_norm
from .simulate import DivergenceError, TimeGrid, TrajectorySet, integrate_linear, write_table


class ParameterError(ValueError):
    """One or more certificate preconditions fail.

    ``violations`` is a list of ``(code, message)`` pairs, one per failed
    condition.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(f"[{code}] {msg}" for code, msg in self.violations))

    @property
    def codes(self):
        return [code for code, _ in self.violations]


@dataclass(frozen=True)
class BoundParameters:
    C: float
    R: float
    C0: float
    M: float
    tau_star: float
    mu: float
    Nbar: int
    Delta: float
    D: float
    D_M: float

    @property
    def contraction(self) -> float:
        """``M e / R``; must be below one."""
        return self.M * math.e / self.R

    @property
    def tau_limit(self) -> float:
        """Supremum of admissible horizons, ``-log(M e / R) / C0``."""
        return tau_limit(self.M, self.R, self.C0)

    @property
    def mu_limit(self) -> float:
        """Strict upper bound for ``mu``, ``(M e / R) exp(C0 tau*)``."""
        return mu_limit(self.M, self.R, self.C0, self.tau_star)


def tau_limit(M, R, C0) -> float:
    q = M * math.e / R
    return -math.log(q) / C0 if 0 < q < 1 else 0.0


def mu_limit(M, R, C0, tau_star) -> float:
    return M * math.e / R * math.exp(C0 * tau_star)


def validate_parameters(C, R, C0, M, tau_star, mu, Nbar, Delta) -> BoundParameters:
    """Check every precondition of the certificate and derive ``D_M`` and ``D``.

    Raises
    ------
    ParameterError
        Listing each violated condition with a stable code:
        ``positive``, ``C0_le_C_over_R``, ``M_lt_R_over_e``,
        ``tau_star_limit``, ``mu_limit``.
    """
    violations = []
    for name, v in dict(C=C, R=R, C0=C0, M=M, tau_star=tau_star, mu=mu).items():
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            violations.append(("positive", f"{name} must be a positive finite number, got {v!r}"))
    if int(Nbar) != Nbar or Nbar < 1:
        violations.append(("positive", f"Nbar must be a positive integer, got {Nbar!r}"))
    if not Delta >= 0:
        violations.append(("positive", f"Delta must be non-negative, got {Delta!r}"))
    if violations:
        raise ParameterError(violations)

    if not C0 <= C / R:
        violations.append(("C0_le_C_over_R", f"C0 = {C0} exceeds C/R = {C / R:.6g}"))
    if not M < R / math.e:
        violations.append(("M_lt_R_over_e", f"M = {M} is not below R/e = {R / math.e:.6g}"))
    else:
        lim = tau_limit(M, R, C0)
        if not tau_star < lim:
            violations.append(("tau_star_limit", f"tau* = {tau_star} is not below -log(Me/R)/C0 = {lim:.6g}"))
        mlim = mu_limit(M, R, C0, tau_star)
        if not mu < mlim:
            violations.append(("mu_limit", f"mu = {mu} is not below (Me/R) exp(C0 tau*) = {mlim:.8g}"))
        elif not mlim < 1:
            violations.append(("mu_limit", f"(Me/R) exp(C0 tau*) = {mlim:.8g} is not below 1"))
    if violations:
        raise ParameterError(violations)

    D_M = C0 * R / (1.0 - M / R)
    D = D_M * M / (C0 * R)
    return BoundParameters(float(C), float(R), float(C0), float(M), float(tau_star), float(mu),
                           int(Nbar), float(Delta), D, D_M)


def carleman_error_bound(p: BoundParameters, N: int) -> float:
    """``D mu^N``, the bound on the first ``d`` components of the Carleman error."""
    if N < 1:
        raise ValueError("N must be at least 1")
    return p.D * p.mu ** N


def epsilon_norm_estimates(p: BoundParameters, N: int, m: int, T_id: float) -> tuple[float, float]:
    """Default estimates of ``||eps||`` and ``||I_eps||`` over ``m`` columns.

    The per-entry bound ``D mu^N`` is applied to every lifted coordinate, so
    the induced inf-norm of the ``(n, m)`` error matrix is ``m D mu^N`` and its
    time integral over ``T_id`` is ``T_id m D mu^N``.
    """
    e = m * carleman_error_bound(p, N)
    return e, T_id * e


@dataclass(frozen=True)
class BoundInputs:
    eps_norm: float
    Ieps_norm: float
    Ibar: float
    IGamma_norm: float
    D_data_norm: float
    zbar: float = 0.0
    expAhat_norm: float = 1.0

    def __post_init__(self):
        for name in ("eps_norm", "Ieps_norm", "Ibar", "IGamma_norm", "D_data_norm", "zbar", "expAhat_norm"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and non-negative, got {v}")


def abar(inputs: BoundInputs) -> float:
    """Upper bound on ``||A - A_hat||`` from the perturbed normal equations.

    ``||I^T||`` is replaced by ``||I_Gamma^T|| + ||I_eps^T||`` and ``||I||`` is
    taken equal to ``||I^T||``; the same value is used for ``I_eps`` and its
    transpose.
    """
    Ib = inputs.Ibar
    e = inputs.eps_norm
    ie = inputs.Ieps_norm
    It = inputs.IGamma_norm + ie
    Dn = inputs.D_data_norm
    first = Ib * (It * e + ie * Dn + ie * e)
    gram_shift = Ib * (It * ie + ie * It + ie * ie)
    rhs = It * Dn + It * e + ie * Dn + ie * e
    return first + gram_shift * rhs


def bbar(abar_value: float, tau_star: float, expAhat_norm: float) -> float:
    """``max(exp(Abar tau*) ||exp(A_hat tau*)||, 1)``; ``inf`` on overflow."""
    if abar_value < 0:
        raise ValueError("Abar must be non-negative")
    try:
        val = math.exp(abar_value * tau_star) * expAhat_norm
    except OverflowError:
        return math.inf
    return max(val, 1.0)


def log10_theta(p: BoundParameters, N: int, abar_value: float, tau_star_zbar: float,
                expAhat_norm: float) -> float:
    """``log10 Theta(N)`` evaluated without forming ``Bbar``.

    ``Bbar`` is ``exp(Abar tau*)`` times a norm, which overflows double
    precision long before its logarithm does; ranking orders by this value
    keeps the search meaningful when every ``Theta`` is out of range.
    """
    log_c = math.log(carleman_error_bound(p, N))
    if abar_value == 0.0 or tau_star_zbar == 0.0:
        return log_c / math.log(10)
    log_b = max(abar_value * p.tau_star + math.log(expAhat_norm), 0.0) if expAhat_norm > 0 else 0.0
    log_drift = math.log(tau_star_zbar) + math.log(abar_value) + log_b
    return float(np.logaddexp(log_c, log_drift)) / math.log(10)


@dataclass(frozen=True)
class CertifiedBound:
    N: int
    Abar: float
    Bbar: float
    theta: float
    carleman_term: float
    zbar: float = float("nan")
    certifiable: bool = True
    condition_number: float = float("nan")
    reason: str = ""
    log10_theta: float = float("nan")
    inputs: BoundInputs | None = field(default=None, repr=False)


def theta(p: BoundParameters, N: int, abar_value: float, bbar_value: float, zbar: float) -> CertifiedBound:
    """Evaluate ``Theta(N) = D mu^N + tau* Bbar zbar Abar``."""
    c = carleman_error_bound(p, N)
    drift = p.tau_star * bbar_value * zbar * abar_value if abar_value and zbar else 0.0
    total = c + drift
    return CertifiedBound(N=N, Abar=abar_value, Bbar=bbar_value, zbar=zbar, carleman_term=c,
                          theta=total, log10_theta=math.log10(total))


def composite_bound(p: BoundParameters, N: int, abar_value: float, bbar_value: float,
                    zbar: float, t: float) -> float:
    """Time-resolved bound ``D mu^N + t Bbar zbar Abar`` for ``0 <= t <= tau*``."""
    if not 0 <= t <= p.tau_star:
        raise ValueError(f"t = {t} outside the certified horizon [0, {p.tau_star}]")
    drift = t * bbar_value * zbar * abar_value if t and abar_value and zbar else 0.0
    return carleman_error_bound(p, N) + drift


@dataclass
class SearchResult:
    curve: list
    Nstar: int | None
    model: IdentifiedModel | None
    failed: bool
    argmin_N: int | None
    notes: list = field(default_factory=list)

    @property
    def best(self) -> CertifiedBound | None:
        if self.argmin_N is None:
            return None
        return next(c for c in self.curve if c.N == self.argmin_N)

    def save_curve(self, path) -> None:
        """CSV columns ``N, carleman_term, Abar, Bbar, zbar, theta, certifiable,
        condition_number, log10_theta``."""
        rows = [[c.N, c.carleman_term, c.Abar, c.Bbar, c.zbar, c.theta, int(c.certifiable),
                 c.condition_number, c.log10_theta] for c in self.curve]
        write_table(path, "N,carleman_term,Abar,Bbar,zbar,theta,certifiable,condition_number,log10_theta",
                    rows)


def _representative_state(lifted_initial: np.ndarray, norm: str) -> np.ndarray:
    # column with the largest norm; ties resolve to the first
    k = int(np.argmax(vector_norm(lifted_initial, norm, axis=0)))
    return lifted_initial[:, k]


def order_search(data: TrajectorySet, p: BoundParameters, *, T_id=None, norm: str = "inf",
                 rcond: float = 1e-10, eps_estimator=epsilon_norm_estimates,
                 orders=None) -> SearchResult:
    """Evaluate the certificate for each truncation order and pick the best.

    Parameters
    ----------
    data : TrajectorySet
        Measured trajectories; their sup-norm must be strictly below ``p.M``.
    p : BoundParameters
        Validated constants.
    T_id : float, optional
        Length of the identification window starting at the first sample.
        Defaults to ``p.tau_star`` so that the Carleman error bound covers
        every sample used in the fit.
    norm : {"inf", "two"}
        Norm used for all matrices and vectors in the certificate.
    eps_estimator : callable
        ``(p, N, m, T_id) -> (eps_norm, Ieps_norm)``.
    orders : iterable of int, optional
        Orders to evaluate; defaults to ``1..p.Nbar``.

    Returns
    -------
    SearchResult
        ``failed`` is True exactly when no certifiable order has
        ``theta <= p.Delta``.  Orders whose fit is rank deficient, whose Gram
        bound cannot be certified, or whose simulation overflows are kept in
        the curve with ``certifiable=False`` and excluded from the argmin.
    """
    peak = data.peak_norm()
    if not peak < p.M:
        raise ParameterError([("M_gt_data", f"data peak norm {peak:.6g} is not below M = {p.M}")])
    T_id = p.tau_star if T_id is None else T_id
    window = (data.grid.t0, data.grid.t0 + T_id)
    sim_grid = TimeGrid.span(p.tau_star, data.grid.h)
    orders = range(1, p.Nbar + 1) if orders is None else orders
    notes = ["||D|| proxied by ||Gamma(T) - Gamma(0)|| + eps_norm",
             "Ibar taken from the data Gram matrix without inflation"]

    curve, models = [], {}
    for N in orders:
        basis = build_basis(data.d, N)
        lifted = lift_dataset(data, basis, window)
        model = estimate(lifted, rcond)
        models[N] = model
        c_term = carleman_error_bound(p, N)
        nan = float("nan")

        def fail(reason):
            return CertifiedBound(N, nan, nan, nan, c_term, nan, False, model.condition_number, reason)

        if not model.certifiable:
            curve.append(fail(f"integral matrix rank {model.rank} < {len(basis)}"))
            continue
        try:
            Ibar = gram_inverse_norm(lifted.IGamma.T, norm)
        except RankDeficiencyError as exc:
            curve.append(fail(str(exc)))
            continue
        eps_norm, Ieps_norm = eps_estimator(p, N, lifted.m, lifted.window)
        z0 = _representative_state(lift(basis, data.states[:, 0, :]).T, norm)
        try:
            zhat = integrate_linear(model.Ahat, z0, sim_grid)
            expA = induced_norm(expm(model.Ahat * p.tau_star), norm)
        except (DivergenceError, OverflowError) as exc:
            curve.append(fail(str(exc)))
            continue
        inputs = BoundInputs(
            eps_norm=eps_norm,
            Ieps_norm=Ieps_norm,
            Ibar=Ibar,
            IGamma_norm=induced_norm(lifted.IGamma.T, norm),
            D_data_norm=induced_norm(lifted.increments, norm) + eps_norm,
            zbar=float(vector_norm(zhat, norm).max()),
            expAhat_norm=expA,
        )
        a = abar(inputs)
        b = bbar(a, p.tau_star, expA)
        entry = theta(p, N, a, b, inputs.zbar)
        if math.isinf(entry.theta):
            entry = replace(entry, log10_theta=log10_theta(p, N, a, p.tau_star * inputs.zbar, expA))
        curve.append(replace(entry, condition_number=model.condition_number, inputs=inputs))

    ok = [c for c in curve if c.certifiable and not math.isnan(c.log10_theta)]
    if not ok:
        return SearchResult(curve, None, None, True, None, notes + ["no certifiable order"])
    best = min(ok, key=lambda c: (c.log10_theta, c.N))
    failed = not best.theta <= p.Delta
    return SearchResult(curve, None if failed else best.N, None if failed else models[best.N],
                        failed, best.N, notes)

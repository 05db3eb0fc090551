"""Conditional association by nodewise ("leave-one-out") regression.

Each column is regressed on all the others.  The edge weight of a pair is
the average of the two standardized coefficients linking it,

    w(i, j) = (t_ij + t_ji) / 2,   t_ij = beta_j^(i) / se(beta_j^(i)),

where ``beta_j^(i)`` is the coefficient of column j in the fit of column i.
LASSO fits have no standard errors, so their weights average the raw
coefficients instead.

Exact collinearity among predictors and perfect prediction of the response
are detected up front with a pivoted QR of the centered design.  Pairs they
touch are flagged degenerate and given weight 0 instead of the huge t
values a plain solve would produce.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.special

from .engine import BinaryMatrix, WeightTable, n_pairs, pair_index
from .errors import (
    BinnetError,
    ConfigError,
    ConstantResponse,
    DataError,
    NoConvergence,
    NonFinite,
    RankDeficient,
)
from .measures import MeasureKind

IRLS_MAX_ITER = 100
IRLS_REL_TOL = 1e-10
SEPARATION_BOUND = 30.0
LASSO_MAX_SWEEPS = 100_000
LASSO_TOL = 1e-14
# |R_jj| below this fraction of the largest diagonal entry means dependent.
RANK_RTOL = 1e-9
# RSS below this fraction of TSS means the response is a linear function
# of the predictors.
PERFECT_FIT_RTOL = 1e-10


@dataclass(frozen=True)
class RegressionMethod:
    name: str
    lam: float = 0.0

    def __post_init__(self):
        if self.name not in ("ols", "logistic", "lasso"):
            raise ConfigError(f"unknown regression method {self.name!r}")
        if self.name != "lasso" and self.lam != 0.0:
            raise ConfigError("a penalty is only meaningful for the lasso method")
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ConfigError(f"lambda must be finite and >= 0, got {self.lam!r}")

    @classmethod
    def ols(cls) -> "RegressionMethod":
        return cls("ols")

    @classmethod
    def logistic(cls) -> "RegressionMethod":
        return cls("logistic")

    @classmethod
    def lasso(cls, lam: float) -> "RegressionMethod":
        return cls("lasso", float(lam))

    @property
    def standardized(self) -> bool:
        return self.name != "lasso"


@dataclass
class RegressionFit:
    """Fit of one response column on the remaining K - 1 columns.

    ``coefficients``/``std_errors`` align with ``predictors``.  Dropped
    predictors have coefficient 0 and a NaN standard error; ``std_errors``
    is None for LASSO fits.
    """

    response: int
    method: RegressionMethod
    predictors: np.ndarray
    intercept: float
    coefficients: np.ndarray
    std_errors: np.ndarray | None
    residual_variance: float
    rank_deficient: bool = False
    dropped_predictors: frozenset = frozenset()
    collinear_groups: tuple = ()
    perfect_fit: bool = False
    converged: bool = True
    separation: bool = False
    iterations: int = 0
    unreliable: frozenset = field(default=frozenset())

    @property
    def t_values(self) -> np.ndarray | None:
        if self.std_errors is None:
            return None
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.coefficients / self.std_errors

    @property
    def degenerate(self) -> bool:
        """The whole fit is unusable for edge weights."""
        return self.perfect_fit or self.separation or not self.converged

    def coefficient_for(self, col: int) -> float:
        return float(self.coefficients[self._pos(col)])

    def t_for(self, col: int) -> float:
        t = self.t_values
        return float("nan") if t is None else float(t[self._pos(col)])

    def _pos(self, col: int) -> int:
        hits = np.flatnonzero(self.predictors == col)
        if hits.size == 0:
            raise KeyError(f"column {col} is not a predictor of column {self.response}")
        return int(hits[0])


# -- design diagnostics ---------------------------------------------------------

@dataclass
class _Design:
    X: np.ndarray          # N x p, uncentered predictors
    y: np.ndarray
    Xc: np.ndarray         # centered
    yc: np.ndarray
    retained: np.ndarray   # positions into predictors, ascending
    dropped: np.ndarray
    groups: list           # lists of positions
    perfect: bool


def _diagnose(X: np.ndarray, y: np.ndarray) -> _Design:
    xbar = X.mean(axis=0)
    Xc = X - xbar
    yc = y - y.mean()
    p = X.shape[1]
    if p == 0:
        return _Design(X, y, Xc, yc, np.arange(0), np.arange(0), [], False)
    _, R, piv = scipy.linalg.qr(Xc, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    scale = diag[0] if diag.size else 0.0
    rank = int(np.sum(diag > RANK_RTOL * scale)) if scale > 0 else 0
    retained = np.sort(piv[:rank])
    dropped = np.sort(piv[rank:])

    groups = []
    if dropped.size:
        Xr = Xc[:, retained]
        for d in dropped:
            col = Xc[:, d]
            members = [int(d)]
            if rank and np.any(col):
                coef, *_ = np.linalg.lstsq(Xr, col, rcond=None)
                members += [int(retained[q]) for q in np.flatnonzero(np.abs(coef) > 1e-8)]
            groups.append(sorted(members))

    tss = float(yc @ yc)
    perfect = False
    if rank and tss > 0:
        beta, *_ = np.linalg.lstsq(Xc[:, retained], yc, rcond=None)
        resid = yc - Xc[:, retained] @ beta
        perfect = float(resid @ resid) <= PERFECT_FIT_RTOL * tss
    return _Design(X, y, Xc, yc, retained, dropped, groups, perfect)


# -- solvers ----------------------------------------------------------------------

def _ols(design: _Design):
    Xr = design.Xc[:, design.retained]
    n, p = Xr.shape
    Q, R = np.linalg.qr(Xr) if p else (None, None)
    if p:
        beta = scipy.linalg.solve_triangular(R, Q.T @ design.yc)
        resid = design.yc - Xr @ beta
    else:
        beta = np.zeros(0)
        resid = design.yc
    df = n - p - 1
    rss = float(resid @ resid)
    sigma2 = rss / df if df > 0 else float("nan")
    if p:
        Rinv = scipy.linalg.solve_triangular(R, np.eye(p))
        cov_diag = np.sum(Rinv * Rinv, axis=1)
        se = np.sqrt(sigma2 * cov_diag)
    else:
        se = np.zeros(0)
    return beta, se, sigma2


def _logistic(design: _Design):
    Xr = design.X[:, design.retained]
    y = design.y
    n = Xr.shape[0]
    Z = np.column_stack([np.ones(n), Xr])
    ybar = y.mean()
    beta = np.zeros(Z.shape[1])
    beta[0] = math.log(ybar / (1.0 - ybar))

    def loglik(eta):
        return float(np.sum(y * eta - np.logaddexp(0.0, eta)))

    eta = Z @ beta
    ll = loglik(eta)
    converged = separation = False
    it = 0
    while it < IRLS_MAX_ITER:
        it += 1
        mu = scipy.special.expit(eta)
        w = np.clip(mu * (1.0 - mu), 1e-12, None)
        sw = np.sqrt(w)
        z = eta + (y - mu) / w
        beta, *_ = np.linalg.lstsq(Z * sw[:, None], z * sw, rcond=None)
        eta = Z @ beta
        ll_new = loglik(eta)
        if np.max(np.abs(beta)) > SEPARATION_BOUND:
            separation = True
            break
        if abs(ll_new - ll) < IRLS_REL_TOL * abs(ll):
            ll = ll_new
            converged = True
            break
        ll = ll_new
    mu = scipy.special.expit(eta)
    w = mu * (1.0 - mu)
    info = (Z * w[:, None]).T @ Z
    try:
        cov = np.linalg.inv(info)
        se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        se = np.full(Z.shape[1], np.nan)
    return beta[0], beta[1:], se[1:], it, converged, separation


def _lasso(design: _Design, lam: float):
    """Covariance-update coordinate descent on centered data.

    Minimizes (1 / 2N) * ||yc - Xc b||^2 + lam * ||b||_1; the intercept is
    recovered from the means afterwards and is not penalized.
    """
    Xr = design.Xc[:, design.retained]
    n, p = Xr.shape
    G = (Xr.T @ Xr) / n
    c = (Xr.T @ design.yc) / n
    b = np.zeros(p)
    diag = np.diag(G).copy()
    sweeps = 0
    while sweeps < LASSO_MAX_SWEEPS:
        sweeps += 1
        delta = 0.0
        for j in range(p):
            if diag[j] <= 0:
                continue
            rho = c[j] - G[j] @ b + diag[j] * b[j]
            new = math.copysign(max(abs(rho) - lam, 0.0), rho) / diag[j]
            step = abs(new - b[j])
            if step > delta:
                delta = step
            b[j] = new
        if delta <= LASSO_TOL * max(1.0, float(np.max(np.abs(b))) if p else 1.0):
            break
    return b, sweeps


# -- public API -----------------------------------------------------------------------

def nodewise_fit(
    m: BinaryMatrix,
    k: int,
    method: RegressionMethod,
    drop_collinear: bool = True,
) -> RegressionFit:
    """Regress column ``k`` on every other column plus an intercept.

    With ``drop_collinear=False`` an exactly collinear predictor set raises
    ``RankDeficient`` naming the columns involved; by default redundant
    predictors are dropped and recorded on the fit.
    """
    K = m.n_cols
    if not 0 <= k < K:
        raise DataError(f"response column {k} out of range for {K} columns")
    if K < 2:
        raise DataError("nodewise regression needs at least two columns")
    dense = m.to_dense().astype(np.float64)
    return _fit_from_dense(dense, k, method, drop_collinear)


def _fit_from_dense(dense: np.ndarray, k: int, method: RegressionMethod, drop_collinear: bool = True) -> RegressionFit:
    K = dense.shape[1]
    y = dense[:, k]
    ybar = y.mean()
    if ybar == 0.0 or ybar == 1.0:
        raise ConstantResponse(f"response column {k} is constant")
    predictors = np.array([c for c in range(K) if c != k], dtype=np.int64)
    X = dense[:, predictors]
    design = _diagnose(X, y)

    to_col = lambda positions: frozenset(int(predictors[q]) for q in positions)
    groups = tuple(tuple(int(predictors[q]) for q in g) for g in design.groups)
    if groups and not drop_collinear:
        raise RankDeficient(set().union(*groups))
    unreliable = frozenset().union(*(set(g) for g in groups)) if groups else frozenset()

    p = predictors.size
    coef = np.zeros(p)
    iterations = 0
    converged = True
    separation = False
    se_full = None

    if method.name == "ols":
        beta, se, sigma2 = _ols(design)
        coef[design.retained] = beta
        se_full = np.full(p, np.nan)
        se_full[design.retained] = se
        intercept = float(ybar - X.mean(axis=0) @ coef)
        residual_variance = sigma2
    elif method.name == "logistic":
        b0, beta, se, iterations, converged, separation = _logistic(design)
        coef[design.retained] = beta
        se_full = np.full(p, np.nan)
        se_full[design.retained] = se
        intercept = float(b0)
        eta = intercept + X @ coef
        mu = scipy.special.expit(eta)
        residual_variance = float(np.mean((y - mu) ** 2))
        if not converged and not separation:
            raise NoConvergence(iterations)
    else:
        beta, iterations = _lasso(design, method.lam)
        coef[design.retained] = beta
        intercept = float(ybar - X.mean(axis=0) @ coef)
        resid = y - intercept - X @ coef
        residual_variance = float(resid @ resid) / max(y.size - 1, 1)

    dropped_pos = set(design.dropped.tolist())
    if method.name == "lasso":
        dropped_pos |= {int(q) for q in np.flatnonzero(coef == 0.0)}
    return RegressionFit(
        response=k,
        method=method,
        predictors=predictors,
        intercept=intercept,
        coefficients=coef,
        std_errors=se_full,
        residual_variance=float(residual_variance),
        rank_deficient=bool(design.dropped.size),
        dropped_predictors=to_col(sorted(dropped_pos)),
        collinear_groups=groups,
        perfect_fit=design.perfect,
        converged=converged,
        separation=separation,
        iterations=iterations,
        unreliable=unreliable,
    )


def _pair_score(fit: RegressionFit | None, col: int) -> float | None:
    """Standardized (or raw, for LASSO) coefficient of ``col``; None when
    the value cannot be trusted."""
    if fit is None or fit.degenerate or col in fit.unreliable:
        return None
    if fit.method.standardized:
        if col in fit.dropped_predictors:
            return None
        v = fit.t_for(col)
    else:
        v = fit.coefficient_for(col)
    return v if math.isfinite(v) else None


def nodewise_fits(m: BinaryMatrix, method: RegressionMethod, threads: int | None = None) -> list:
    """Fit every column; failed fits come back as the exception instance."""
    dense = m.to_dense().astype(np.float64)

    def one(k: int):
        try:
            return _fit_from_dense(dense, k, method)
        except BinnetError as exc:
            return exc

    ks = range(m.n_cols)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, ks))
    return [one(k) for k in ks]


def conditional_edge_weights(
    m: BinaryMatrix,
    method: RegressionMethod,
    threads: int | None = None,
) -> WeightTable:
    K = m.n_cols
    if K < 2:
        raise DataError("conditional weights need at least two columns")
    fits = [f if isinstance(f, RegressionFit) else None for f in nodewise_fits(m, method, threads)]
    values = np.zeros(n_pairs(K))
    degenerate = np.zeros(n_pairs(K), dtype=bool)
    for i in range(K):
        for j in range(i + 1, K):
            a = _pair_score(fits[i], j)
            b = _pair_score(fits[j], i)
            idx = pair_index(i, j, K)
            if a is None or b is None:
                degenerate[idx] = True
            else:
                values[idx] = 0.5 * (a + b)
    return WeightTable(K, MeasureKind.CONDITIONAL, values, degenerate)


def signed_log_magnitude(w: float) -> float:
    """sign(w) * log10(1 + |w|)."""
    if not math.isfinite(w):
        raise NonFinite(f"cannot transform non-finite weight {w!r}")
    return float(signed_log_magnitude_array(np.float64(w)))


def signed_log_magnitude_array(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if not np.all(np.isfinite(w)):
        raise NonFinite("cannot transform non-finite weights")
    return np.sign(w) * np.log10(1.0 + np.abs(w))

"""Restricted multi-equation least squares (iterated feasible GLS / SUR).

Every equation ``i`` is written against one shared "full" parameter vector
``theta`` (length P): ``y_i = Z_i @ theta + e_i``. Restrictions are imposed by
substitution, ``theta = H @ phi + h0``, so only the free vector ``phi`` is
estimated. Cross-equation equalities, adding-up recovery of a dropped
equation and the approximated demand structures are all just choices of
``(H, h0)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import (ConvergenceError, DimensionError, HMDemandError, RankError,
                     SingularCovarianceError)

log = logging.getLogger(__name__)

SUR_TOL = 1e-8
SUR_MAX_ITER = 100


@dataclass(frozen=True)
class RestrictionSet:
    """Affine map from free parameters to the full parameter vector.

    ``matrix`` is P x k, ``offset`` has length P. The equivalent constraint
    form ``R @ theta = r`` is available from :meth:`constraints`.
    """

    matrix: np.ndarray
    offset: np.ndarray
    free_names: tuple
    param_names: tuple

    def __post_init__(self):
        P, k = self.matrix.shape
        if len(self.offset) != P or len(self.param_names) != P or len(self.free_names) != k:
            raise DimensionError("restriction map dimensions are inconsistent")

    @property
    def k(self):
        return self.matrix.shape[1]

    @classmethod
    def unrestricted(cls, param_names):
        P = len(param_names)
        return cls(np.eye(P), np.zeros(P), tuple(param_names), tuple(param_names))

    @classmethod
    def from_constraints(cls, R, r, param_names):
        """Restrictions given as ``R @ theta = r`` (R must have full row rank)."""
        R = np.atleast_2d(np.asarray(R, dtype=float))
        r = np.asarray(r, dtype=float)
        if np.linalg.matrix_rank(R) < R.shape[0]:
            raise HMDemandError("restriction matrix R is not of full row rank")
        particular = np.linalg.lstsq(R, r, rcond=None)[0]
        if np.max(np.abs(R @ particular - r), initial=0.0) > 1e-10:
            raise HMDemandError("restrictions are inconsistent")
        basis = linalg.null_space(R)
        names = tuple(f"phi{j}" for j in range(basis.shape[1]))
        return cls(basis, particular, names, tuple(param_names))

    def expand(self, phi):
        return self.matrix @ phi + self.offset

    def constraints(self):
        """(R, r) with ``R @ theta = r`` exactly on the image of the map."""
        R = linalg.null_space(self.matrix.T).T
        return R, R @ self.offset

    def violation(self, theta):
        R, r = self.constraints()
        if R.size == 0:
            return 0.0
        return float(np.max(np.abs(R @ theta - r)))


@dataclass(frozen=True)
class RotterdamRows:
    """Differenced panel for the Rotterdam equations (first week dropped).

    ``lhs[t, i] = wbar[t, i] * dlogq[t, i]`` and ``divisia[t]`` is the change
    in log expenditure deflated by the share-weighted price index.
    """

    types: tuple
    weeks: np.ndarray
    lhs: np.ndarray
    dlogp: np.ndarray
    dlogq: np.ndarray
    dlogx: np.ndarray
    divisia: np.ndarray
    wbar: np.ndarray

    @property
    def nobs(self):
        return self.lhs.shape[0]


def build_rows(panel):
    """Log-differences, average shares and the real-expenditure regressor."""
    if panel.T < 3:
        raise HMDemandError(f"need at least 3 weeks, got {panel.T}")
    for name, arr in (("price", panel.price), ("quantity", panel.quantity)):
        bad = np.argwhere(~(arr > 0))
        if bad.size:
            t, i = bad[0]
            raise HMDemandError(
                f"nonpositive {name} at week {panel.weeks[t]}, type {panel.types[i]}")
    w = panel.share
    wbar = 0.5 * (w[1:] + w[:-1])
    dlogp = np.diff(np.log(panel.price), axis=0)
    dlogq = np.diff(np.log(panel.quantity), axis=0)
    dlogx = np.diff(np.log(panel.expenditure))
    divisia = dlogx - np.sum(wbar * dlogp, axis=1)
    return RotterdamRows(panel.types, panel.weeks[1:], wbar * dlogq, dlogp, dlogq, dlogx,
                         divisia, wbar)


def durbin_watson(residuals):
    """Durbin-Watson statistic; columns of a 2-D input are separate series."""
    e = np.asarray(residuals, dtype=float)
    if e.shape[0] < 2:
        raise HMDemandError("Durbin-Watson needs at least two residuals")
    ss = np.sum(e * e, axis=0)
    if np.any(ss == 0):
        raise HMDemandError("Durbin-Watson is undefined for all-zero residuals")
    return np.sum(np.diff(e, axis=0) ** 2, axis=0) / ss


def information_criteria(loglik, k, nobs):
    """(AIC, BIC) with natural-log BIC."""
    return 2 * k - 2 * loglik, k * np.log(nobs) - 2 * loglik


@dataclass(frozen=True)
class SystemFit:
    """Result of :func:`sur_fit`.

    ``theta`` is the full parameter vector after restriction expansion and
    ``theta_cov`` its (singular) covariance ``H @ phi_cov @ H.T``. Residuals
    and Durbin-Watson statistics cover every equation, the dropped one
    included. A perfect fit (zero residuals) has zero covariance and infinite
    log-likelihood.
    """

    restrictions: RestrictionSet
    phi: np.ndarray
    phi_cov: np.ndarray
    sigma: np.ndarray
    residuals: np.ndarray
    retained: tuple
    loglik: float
    nobs: int
    iterations: int
    trace: tuple = ()
    equation_names: tuple = ()
    exact: bool = False
    theta: np.ndarray = field(init=False, repr=False)
    theta_cov: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        H = self.restrictions.matrix
        object.__setattr__(self, "theta", self.restrictions.expand(self.phi))
        object.__setattr__(self, "theta_cov", H @ self.phi_cov @ H.T)

    @property
    def k(self):
        return self.restrictions.k

    @property
    def free_names(self):
        return self.restrictions.free_names

    @property
    def param_names(self):
        return self.restrictions.param_names

    @property
    def se(self):
        return np.sqrt(np.clip(np.diag(self.phi_cov), 0, None))

    @property
    def theta_se(self):
        return np.sqrt(np.clip(np.diag(self.theta_cov), 0, None))

    @property
    def aic(self):
        return information_criteria(self.loglik, self.k, self.nobs)[0]

    @property
    def bic(self):
        return information_criteria(self.loglik, self.k, self.nobs)[1]

    @property
    def durbin_watson(self):
        if self.exact:
            return np.full(self.residuals.shape[1], np.nan)
        return durbin_watson(self.residuals)

    def param(self, name):
        return self.theta[self.param_names.index(name)]

    def free(self, name):
        return self.phi[self.free_names.index(name)]


def system_loglik(fit):
    """(log-likelihood, AIC, BIC) of a fitted system."""
    aic, bic = information_criteria(fit.loglik, fit.k, fit.nobs)
    return fit.loglik, aic, bic


def _gaussian_loglik(sigma, nobs):
    m = sigma.shape[0]
    sign, logdet = np.linalg.slogdet(sigma)
    if sign <= 0:
        return np.inf
    return -0.5 * nobs * (m * np.log(2 * np.pi) + logdet + m)


class _Stacked:
    """Design of the retained equations in free-parameter coordinates."""

    def __init__(self, design, lhs, restrictions, retained):
        Z = design[list(retained)]
        self.X = Z @ restrictions.matrix                     # (m, N, k)
        self.y = lhs[:, list(retained)].T - Z @ restrictions.offset  # (m, N)

    def solve(self, omega):
        A = np.einsum("ij,ink,jnl->kl", omega, self.X, self.X)
        c = np.einsum("ij,ink,jn->k", omega, self.X, self.y)
        A = 0.5 * (A + A.T)
        return np.linalg.solve(A, c), A

    def residuals(self, phi):
        return (self.y - self.X @ phi).T  # (N, m)


def _check_rank(stacked, names):
    X = stacked.X.reshape(-1, stacked.X.shape[-1])
    k = X.shape[1]
    if k == 0:
        return
    _, s, vt = np.linalg.svd(X, full_matrices=False)
    tol = s.max() * max(X.shape) * np.finfo(float).eps * 10 if s.size else 0.0
    if s.size < k or s.min() <= tol:
        null = vt[s <= tol] if s.size == k else vt
        involved = np.any(np.abs(null) > 1e-8, axis=0)
        raise RankError([n for n, f in zip(names, involved) if f], context="system design")


def sur_fit(design, lhs, restrictions, drop=None, tol=SUR_TOL, max_iter=SUR_MAX_ITER,
            equation_names=None):
    """Iterated feasible GLS for a restricted equation system.

    Parameters
    ----------
    design
        Array (m, N, P): regressors of each equation against the full vector.
    lhs
        Array (N, m) of dependent variables.
    restrictions
        :class:`RestrictionSet` mapping free to full parameters.
    drop
        Index of an equation left out of estimation (its parameters come back
        through the restriction map), or None to use all equations.
    tol, max_iter
        Iteration stops when the largest change in the residual covariance,
        relative to its largest element, falls below ``tol``.

    The first pass is restricted OLS (identity covariance). The reported
    ``phi`` is the GLS solution for the reported ``sigma``, so refitting at
    ``sigma`` reproduces it exactly.
    """
    design = np.asarray(design, dtype=float)
    lhs = np.asarray(lhs, dtype=float)
    if design.ndim != 3:
        raise DimensionError("design must be (equations, observations, parameters)")
    m, N, P = design.shape
    if lhs.shape != (N, m):
        raise DimensionError(f"lhs shape {lhs.shape} does not match design ({N}, {m})")
    if P != len(restrictions.param_names):
        raise DimensionError("design columns do not match the restriction map")
    retained = tuple(i for i in range(m) if i != drop)
    if drop is not None and not 0 <= drop < m:
        raise DimensionError(f"drop index {drop} out of range")
    k = restrictions.k
    per_eq = [int(np.sum(np.any(design[i] @ restrictions.matrix != 0, axis=0))) for i in retained]
    if any(N <= c for c in per_eq):
        raise HMDemandError("an equation has no more observations than regressors")

    stacked = _Stacked(design, lhs, restrictions, retained)
    _check_rank(stacked, restrictions.free_names)
    mr = len(retained)

    phi, _ = stacked.solve(np.eye(mr))
    resid = stacked.residuals(phi)
    scale = max(1.0, float(np.max(np.abs(stacked.y))))
    if np.max(np.abs(resid)) <= 1e-11 * scale:
        log.debug("perfect fit; skipping FGLS iterations")
        return _finish(design, lhs, restrictions, phi, np.zeros((k, k)), resid.T @ resid / N,
                       retained, np.inf, N, 0, (), equation_names, exact=True)

    sigma = np.eye(mr)
    trace = []
    for it in range(1, max_iter + 1):
        new = resid.T @ resid / N
        evals = np.linalg.eigvalsh(new)
        if evals.min() <= 1e-12 * max(evals.max(), np.finfo(float).tiny):
            raise SingularCovarianceError(
                "residual covariance is singular; drop one equation of an adding-up system")
        delta = float(np.max(np.abs(new - sigma)) / np.max(np.abs(new)))
        trace.append(delta)
        sigma = new
        phi, A = stacked.solve(np.linalg.inv(sigma))
        resid = stacked.residuals(phi)
        if delta < tol:
            break
    else:
        raise ConvergenceError(trace)

    cov = np.linalg.inv(A)
    cov = 0.5 * (cov + cov.T)
    loglik = _gaussian_loglik(resid.T @ resid / N, N)
    return _finish(design, lhs, restrictions, phi, cov, sigma, retained, loglik, N, it,
                   tuple(trace), equation_names)


def _finish(design, lhs, restrictions, phi, cov, sigma, retained, loglik, N, iterations,
            trace, equation_names, exact=False):
    theta = restrictions.expand(phi)
    resid_all = lhs - np.einsum("inp,p->ni", design, theta)
    names = tuple(equation_names) if equation_names else tuple(
        f"eq{i}" for i in range(design.shape[0]))
    return SystemFit(restrictions, phi, cov, sigma, resid_all, retained, float(loglik), N,
                     iterations, trace, names, exact)


def gls_step(fit, design, lhs, sigma=None):
    """One GLS solve at a given residual covariance (default: the fit's own)."""
    stacked = _Stacked(np.asarray(design, float), np.asarray(lhs, float), fit.restrictions,
                       fit.retained)
    sigma = fit.sigma if sigma is None else sigma
    phi, _ = stacked.solve(np.linalg.inv(sigma))
    return phi

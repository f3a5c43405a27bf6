"""Hedonic price regressions, implicit attribute prices and value added.

The linear form regresses price per serving on attributes; the semi-log form
regresses its natural log. Either way an intercept is always included and is
kept out of the value-added matrix.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AttributeMismatchError, HMDemandError, RankError
from .panel import AttributeProfile, fmt

FORMS = ("linear", "semilog")


@dataclass(frozen=True)
class HedonicFit:
    form: str
    attribute_names: tuple
    intercept: float
    coefficients: np.ndarray
    intercept_se: float
    coefficient_se: np.ndarray
    r2: float
    adj_r2: float
    sigma2: float
    nobs: int

    def coefficient(self, name):
        return self.coefficients[self.attribute_names.index(name)]

    def rows(self):
        """(variable, estimate, std. error) rows, intercept first."""
        out = [("intercept", self.intercept, self.intercept_se)]
        out += list(zip(self.attribute_names, self.coefficients, self.coefficient_se))
        return out


def from_coefficients(form, intercept, coefficients, attribute_names):
    """Wrap known coefficients (e.g. published ones) as a fit without statistics."""
    if form not in FORMS:
        raise ValueError(f"unknown hedonic form {form!r}")
    coefficients = np.asarray(coefficients, dtype=float)
    nan = np.full_like(coefficients, np.nan)
    return HedonicFit(form, tuple(attribute_names), float(intercept), coefficients,
                      np.nan, nan, np.nan, np.nan, np.nan, 0)


def _collinear_names(X, names):
    _, s, vt = np.linalg.svd(X, full_matrices=False)
    tol = s.max() * max(X.shape) * np.finfo(float).eps
    null = vt[s <= tol]
    involved = np.any(np.abs(null) > 1e-8, axis=0)
    return [n for n, flag in zip(names, involved) if flag]


def fit_hedonic(purchases, form="linear", attributes=None):
    """OLS of (log) price per serving on record attributes plus an intercept.

    Each purchase record is one observation. ``attributes`` selects a subset
    of the table's attribute columns (default: all, in table order; ``()``
    gives the intercept-only regression).

    Raises
    ------
    RankError
        When the design is rank deficient; the message names the collinear set.
    """
    if form not in FORMS:
        raise ValueError(f"unknown hedonic form {form!r}")
    names = tuple(purchases.attribute_names if attributes is None else attributes)
    cols = [purchases.attribute_names.index(a) for a in names]
    N = len(purchases)
    p = len(names) + 1
    if N < len(names) + 2:
        raise HMDemandError(f"need at least {len(names) + 2} records, got {N}")
    y = purchases.price
    if form == "semilog":
        if np.any(y <= 0):
            raise HMDemandError("semilog form needs strictly positive prices")
        y = np.log(y)
    X = np.column_stack([np.ones(N), purchases.attributes[:, cols]])
    if np.linalg.matrix_rank(X) < p:
        raise RankError(_collinear_names(X, ("intercept",) + names), context="hedonic design")

    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    rss = resid @ resid
    dof = N - p
    sigma2 = rss / dof if dof > 0 else np.nan
    cov = sigma2 * np.linalg.inv(X.T @ X)
    se = np.sqrt(np.diag(cov))
    tss = np.sum((y - y.mean()) ** 2)
    if tss > 0:
        r2 = 1.0 - rss / tss
        adj = 1.0 - (1.0 - r2) * (N - 1) / dof if dof > 0 else np.nan
    else:
        r2 = adj = np.nan
    return HedonicFit(form, names, float(beta[0]), beta[1:], float(se[0]), se[1:],
                      float(r2), float(adj), float(sigma2), N)


def implicit_prices(fit, product_price=None):
    """Marginal value (cents) of one unit of each attribute.

    Linear form: the coefficients themselves. Semi-log form: coefficients
    times ``product_price``.
    """
    if fit.form == "linear":
        return fit.coefficients.copy()
    if product_price is None:
        raise HMDemandError("semilog implicit prices need a product price")
    if product_price < 0:
        raise HMDemandError(f"negative product price {product_price}")
    return fit.coefficients * float(product_price)


@dataclass(frozen=True)
class ValueAddedMatrix:
    """``values[i, j]``: cents of value attribute j contributes to type i."""

    types: tuple
    attribute_names: tuple
    values: np.ndarray


def value_added(fit, profiles, mean_prices=None):
    """Attribute quantity times implicit price, per product type.

    ``profiles`` is an :class:`~hmdemand.panel.AttributeProfile`. The
    semi-log form scales by each type's mean price (``mean_prices`` if given,
    else the profile's servings-weighted mean price).
    """
    if not isinstance(profiles, AttributeProfile):
        raise TypeError("profiles must be an AttributeProfile")
    have, want = set(profiles.attribute_names), set(fit.attribute_names)
    if have != want:
        diff = sorted(have ^ want)
        raise AttributeMismatchError(f"attribute sets differ: {', '.join(diff)}")
    x = np.column_stack([profiles.column(a) for a in fit.attribute_names])
    v = x * fit.coefficients
    if fit.form == "semilog":
        P = profiles.mean_price if mean_prices is None else np.asarray(mean_prices, dtype=float)
        if np.any(P < 0):
            raise HMDemandError("negative mean price")
        v = v * P[:, None]
    return ValueAddedMatrix(profiles.types, fit.attribute_names, v)


def write_hedonic_csv(fit, path):
    """Coefficient table: variable, estimate, std_error; adjusted R-squared last."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["variable", "estimate", "std_error"])
        for name, est, se in fit.rows():
            w.writerow([name, fmt(est), fmt(se)])
        w.writerow(["adjusted_r2", fmt(fit.adj_r2), ""])
        w.writerow(["nobs", fit.nobs, ""])
    return path


def read_hedonic_csv(path, form):
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    body = [r for r in rows if r["variable"] not in ("adjusted_r2", "nobs")]
    extra = {r["variable"]: r["estimate"] for r in rows if r not in body}
    names = tuple(r["variable"] for r in body[1:])
    est = np.array([float(r["estimate"]) for r in body])
    se = np.array([float(r["std_error"]) for r in body])
    adj = float(extra.get("adjusted_r2", "nan"))
    return HedonicFit(form, names, est[0], est[1:], se[0], se[1:], np.nan, adj, np.nan,
                      int(extra.get("nobs", 0)))

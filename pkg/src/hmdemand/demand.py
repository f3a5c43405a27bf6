"""Rotterdam demand systems: unrestricted-coefficient, distance-metric (DM)
and hedonic-metric (HM) variants, plus elasticities and CI comparisons.

All three variants share one full parameter layout per good ``i``: intercept
``a_i``, expenditure coefficient ``b_i`` and price coefficients ``c_ij``.
They differ only in the restriction map that generates this vector from
free parameters:

* original: adding-up, homogeneity and symmetry; the dropped equation's
  parameters follow from the others.
* dm: ``c_ij = sum_l lambda_l d^l_ij`` off the diagonal and
  ``c_ii = beta0 + sum_k beta_k chi^k_i`` on it.
* hm: the same with the hedonic and hedonic-NN closeness matrices and
  (share, closeness index) as own-price characteristics.

In every variant the dropped equation's intercept and ``b`` come from
adding-up (intercepts sum to 0, ``b`` sums to 1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionError, HMDemandError, LoadError, UnknownDistanceError
from .estimator import RestrictionSet, SystemFit, build_rows, sur_fit
from .metrics import ClosenessMatrix, closeness_index

VARIANTS = ("original", "dm", "hm")
Z95 = 1.959963984540054


@dataclass(frozen=True)
class ModelSpec:
    """Which variant to fit and with which distances/characteristics.

    ``distances`` lists matrix names (continuous and NN alike) for DM; HM
    always uses ``("HEDONIC", "NN-HEDONIC")``. ``ownprice`` lists the
    characteristics interacting with own price.
    """

    variant: str = "original"
    distances: tuple = ()
    ownprice: tuple = ()
    intercept: bool = True

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise HMDemandError(f"unknown model variant {self.variant!r}")
        if self.variant == "hm":
            if tuple(self.distances) not in ((), HM_DISTANCES):
                raise HMDemandError("the hedonic-metric model uses exactly HEDONIC and NN-HEDONIC")
            object.__setattr__(self, "distances", HM_DISTANCES)
            object.__setattr__(self, "ownprice", HM_OWNPRICE)
        elif self.variant == "original":
            object.__setattr__(self, "distances", ())
            object.__setattr__(self, "ownprice", ())
        object.__setattr__(self, "distances", tuple(self.distances))
        object.__setattr__(self, "ownprice", tuple(self.ownprice))

    def n_free(self, n):
        """Free-parameter count for an n-good system."""
        base = (n - 1) * (2 if self.intercept else 1)
        if self.variant == "original":
            return base + n * (n - 1) // 2
        return base + len(self.distances) + 1 + len(self.ownprice)

    def to_dict(self):
        return {"variant": self.variant, "distances": list(self.distances),
                "ownprice": list(self.ownprice), "intercept": self.intercept}

    @classmethod
    def from_dict(cls, d):
        return cls(d["variant"], tuple(d.get("distances", ())), tuple(d.get("ownprice", ())),
                   d.get("intercept", True))


HM_DISTANCES = ("HEDONIC", "NN-HEDONIC")
HM_OWNPRICE = ("share", "closeness")
DM_OWNPRICE = ("share", "fat", "organic")
DM_FULL = ("SHARE", "FAT", "ORGANIC", "SIZE", "FAT-ORGANIC", "FAT-SIZE", "ORGANIC-SIZE",
           "FAT-ORGANIC-SIZE", "NN-FAT-ORGANIC", "NN-FAT-SIZE", "NN-FAT-ORGANIC-SIZE")
DM_F_O_NNFO = ("FAT", "ORGANIC", "NN-FAT-ORGANIC")


def dm_spec(distances=DM_F_O_NNFO, ownprice=DM_OWNPRICE):
    return ModelSpec("dm", tuple(distances), tuple(ownprice))


def hm_spec():
    return ModelSpec("hm")


def param_names(types):
    n = len(types)
    return (tuple(f"a_{t}" for t in types) + tuple(f"b_{t}" for t in types)
            + tuple(f"c_{types[i]}_{types[j]}" for i in range(n) for j in range(n)))


def _c(n, i, j):
    return 2 * n + i * n + j


def _adding_up_block(types, drop, intercept):
    """Map columns and offset for intercepts and b with adding-up recovery."""
    n = len(types)
    P = 2 * n + n * n
    cols, names = [], []
    offset = np.zeros(P)
    offset[n + drop] = 1.0
    blocks = ((0, "a"), (n, "b")) if intercept else ((n, "b"),)
    for base, tag in blocks:
        for i in range(n):
            if i == drop:
                continue
            col = np.zeros(P)
            col[base + i] = 1.0
            col[base + drop] = -1.0
            cols.append(col)
            names.append(f"{tag}_{types[i]}")
    return cols, names, offset


def original_restrictions(types, drop=None, intercept=True):
    """Adding-up, homogeneity and symmetry, with ``drop`` as the dependent good."""
    n = len(types)
    if n < 2:
        raise HMDemandError("a demand system needs at least two goods")
    drop = n - 1 if drop is None else drop
    cols, names, offset = _adding_up_block(types, drop, intercept)
    P = offset.size
    keep = [i for i in range(n) if i != drop]
    for a, i in enumerate(keep):
        for j in keep[a:]:
            col = np.zeros(P)
            pairs = [(i, j)] if i == j else [(i, j), (j, i)]
            for (r, s) in pairs:
                col[_c(n, r, s)] += 1.0
                # homogeneity: c_r,drop = -sum_s c_rs
                col[_c(n, r, drop)] -= 1.0
                col[_c(n, drop, r)] -= 1.0
                col[_c(n, drop, drop)] += 1.0
            cols.append(col)
            names.append(f"c_{types[i]}_{types[j]}")
    return RestrictionSet(np.column_stack(cols), offset, tuple(names), param_names(types))


def metric_restrictions(types, matrices, chars, drop=None, intercept=True, prefix="lambda"):
    """Cross prices as a weighted sum of closeness matrices; own prices linear
    in characteristics.

    ``matrices`` maps parameter labels to n x n arrays; ``chars`` maps
    characteristic labels to length-n arrays.
    """
    n = len(types)
    drop = n - 1 if drop is None else drop
    cols, names, offset = _adding_up_block(types, drop, intercept)
    P = offset.size
    off = ~np.eye(n, dtype=bool)
    for label, d in matrices.items():
        d = np.asarray(d, dtype=float)
        if d.shape != (n, n):
            raise DimensionError(f"distance {label} has shape {d.shape}, expected ({n}, {n})")
        col = np.zeros(P)
        col[2 * n:] = np.where(off, d, 0.0).ravel()
        cols.append(col)
        names.append(f"{prefix}_{label}")
    diag = np.zeros((n, n))
    np.fill_diagonal(diag, 1.0)
    col = np.zeros(P)
    col[2 * n:] = diag.ravel()
    cols.append(col)
    names.append("beta0")
    for label, x in chars.items():
        x = np.asarray(x, dtype=float)
        if x.shape != (n,):
            raise DimensionError(f"characteristic {label} has length {x.size}, expected {n}")
        col = np.zeros(P)
        col[2 * n:] = np.diag(x).ravel()
        cols.append(col)
        names.append(f"beta_{label}")
    return RestrictionSet(np.column_stack(cols), offset, tuple(names), param_names(types))


def rotterdam_design(rows):
    """Per-equation regressors (n, N, P) against the full parameter layout."""
    N, n = rows.lhs.shape
    P = 2 * n + n * n
    Z = np.zeros((n, N, P))
    for i in range(n):
        Z[i, :, i] = 1.0
        Z[i, :, n + i] = rows.divisia
        Z[i, :, _c(n, i, 0):_c(n, i, 0) + n] = rows.dlogp
    return Z


@dataclass(frozen=True)
class DemandFit:
    """A fitted demand system with what is needed to turn it into elasticities."""

    spec: ModelSpec
    types: tuple
    system: SystemFit
    wbar: np.ndarray
    drop: int

    @property
    def n(self):
        return len(self.types)

    @property
    def intercepts(self):
        return self.system.theta[:self.n]

    @property
    def b(self):
        return self.system.theta[self.n:2 * self.n]

    @property
    def c(self):
        n = self.n
        return self.system.theta[2 * n:].reshape(n, n)

    @property
    def k(self):
        return self.system.k

    def report(self, wbar=None):
        return elasticities(self, wbar)


def _fit(panel, spec, restrictions, drop, tol=None, max_iter=None):
    rows = build_rows(panel)
    Z = rotterdam_design(rows)
    kw = {}
    if tol is not None:
        kw["tol"] = tol
    if max_iter is not None:
        kw["max_iter"] = max_iter
    system = sur_fit(Z, rows.lhs, restrictions, drop=drop, equation_names=panel.types, **kw)
    return DemandFit(spec, tuple(panel.types), system, panel.mean_shares(), drop)


def fit_original(panel, drop=None, intercept=True, **kw):
    """Fit the unrestricted-coefficient Rotterdam model with all theoretical restrictions."""
    if panel.n < 2:
        raise HMDemandError("need at least two goods")
    drop = panel.n - 1 if drop is None else drop
    R = original_restrictions(panel.types, drop, intercept)
    return _fit(panel, ModelSpec("original", intercept=intercept), R, drop, **kw)


def _lookup(distances, names, types):
    out = {}
    for name in names:
        m = distances.get(name)
        if m is None:
            raise UnknownDistanceError(name, sorted(distances))
        if isinstance(m, ClosenessMatrix):
            if tuple(m.types) != tuple(types):
                raise DimensionError(f"distance {name} is over types {m.types}, panel has {types}")
            m = m.values
        m = np.asarray(m, dtype=float)
        if not np.allclose(m, m.T, rtol=0, atol=1e-12):
            raise HMDemandError(f"distance {name} is not symmetric")
        out[name] = m
    return out


def fit_dm(panel, distances, chars, names=DM_F_O_NNFO, ownprice=DM_OWNPRICE, drop=None,
           intercept=True, **kw):
    """Distance-metric approximated Rotterdam model.

    ``distances`` maps names to :class:`ClosenessMatrix`; ``chars`` is an
    :class:`~hmdemand.metrics.OwnPriceCharacteristics`.
    """
    spec = ModelSpec("dm", tuple(names), tuple(ownprice), intercept)
    drop = panel.n - 1 if drop is None else drop
    mats = _lookup(distances, spec.distances, panel.types)
    xs = {c: chars.get(c) for c in spec.ownprice}
    R = metric_restrictions(panel.types, mats, xs, drop, intercept)
    return _fit(panel, spec, R, drop, **kw)


def fit_hm(panel, hedonic, nn, shares=None, closeness=None, drop=None, intercept=True, **kw):
    """Hedonic-metric approximated Rotterdam model.

    ``shares`` defaults to the panel's mean shares and ``closeness`` to the
    closeness index of ``hedonic``; a supplied index must match it.
    """
    drop = panel.n - 1 if drop is None else drop
    mats = _lookup({"HEDONIC": hedonic, "NN-HEDONIC": nn}, HM_DISTANCES, panel.types)
    own = closeness_index(hedonic)
    if closeness is not None and not np.allclose(closeness, own, rtol=1e-12, atol=1e-12):
        raise HMDemandError("closeness index was not computed from this hedonic matrix")
    shares = panel.mean_shares() if shares is None else np.asarray(shares, dtype=float)
    R = metric_restrictions(panel.types, {"h": mats["HEDONIC"], "nn": mats["NN-HEDONIC"]},
                            {"share": shares, "closeness": own}, drop, intercept)
    return _fit(panel, ModelSpec("hm", intercept=intercept), R, drop, **kw)


def fit_to_dict(fit):
    """Everything needed to rebuild ``fit`` exactly (floats survive JSON via repr)."""
    s = fit.system
    R = s.restrictions
    return {
        "spec": fit.spec.to_dict(), "types": list(fit.types), "drop": fit.drop,
        "wbar": fit.wbar.tolist(),
        "restrictions": {"matrix": R.matrix.tolist(), "offset": R.offset.tolist(),
                         "free_names": list(R.free_names), "param_names": list(R.param_names)},
        "phi": s.phi.tolist(), "phi_cov": s.phi_cov.tolist(), "sigma": s.sigma.tolist(),
        "residuals": s.residuals.tolist(), "retained": list(s.retained),
        "loglik": s.loglik, "k": s.k, "nobs": s.nobs, "aic": s.aic, "bic": s.bic,
        "iterations": s.iterations, "trace": list(s.trace),
        "equation_names": list(s.equation_names), "exact": s.exact,
    }


def fit_from_dict(d):
    try:
        r = d["restrictions"]
        R = RestrictionSet(np.array(r["matrix"], dtype=float), np.array(r["offset"], dtype=float),
                           tuple(r["free_names"]), tuple(r["param_names"]))
        system = SystemFit(
            R, np.array(d["phi"], dtype=float), np.array(d["phi_cov"], dtype=float).reshape(R.k, R.k),
            np.array(d["sigma"], dtype=float), np.array(d["residuals"], dtype=float),
            tuple(d["retained"]), float(d["loglik"]), int(d["nobs"]), int(d["iterations"]),
            tuple(d.get("trace", ())), tuple(d.get("equation_names", ())), bool(d.get("exact")),
        )
        return DemandFit(ModelSpec.from_dict(d["spec"]), tuple(d["types"]), system,
                         np.array(d["wbar"], dtype=float), int(d["drop"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise LoadError(f"malformed fit record: {exc}") from None


def save_fit(fit, path):
    path = Path(path)
    path.write_text(json.dumps(fit_to_dict(fit), indent=1) + "\n")
    return path


def load_fit(path):
    path = Path(path)
    if not path.exists():
        raise LoadError(f"no such fit file: {path}")
    try:
        d = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise LoadError(f"{path}: not valid JSON ({exc.msg})", row=exc.lineno) from None
    return fit_from_dict(d)


# --- elasticities ---------------------------------------------------------


@dataclass
class ElasticityReport:
    """Elasticities at mean shares; rows index the responding good.

    ``marks_*`` are filled by :func:`ci_containment` (True = inside the
    baseline's 95% interval).
    """

    types: tuple
    wbar: np.ndarray
    hicksian: np.ndarray
    marshallian: np.ndarray
    expenditure: np.ndarray
    hicksian_se: np.ndarray | None = None
    marshallian_se: np.ndarray | None = None
    expenditure_se: np.ndarray | None = None
    marks_marshallian: np.ndarray | None = field(default=None, repr=False)
    marks_expenditure: np.ndarray | None = field(default=None, repr=False)

    def hicksian_row_sums(self):
        """Homogeneity diagnostic (zero when homogeneity holds)."""
        return self.hicksian.sum(axis=1)

    def engel_sum(self):
        return float(np.sum(self.wbar * self.expenditure))


def slutsky(hicksian, expenditure, shares):
    """Marshallian elasticities ``e_ij - e_i * w_j``."""
    hicksian = np.asarray(hicksian, dtype=float)
    return hicksian - np.outer(expenditure, shares)


def report_from_values(types, hicksian, expenditure, shares):
    """Report built from given Hicksian and expenditure elasticities (no SEs)."""
    shares = np.asarray(shares, dtype=float)
    h = np.asarray(hicksian, dtype=float)
    e = np.asarray(expenditure, dtype=float)
    return ElasticityReport(tuple(types), shares, h, slutsky(h, e, shares), e)


def elasticity_maps(n, wbar):
    """Linear maps from the full parameter vector to (Hicksian, Marshallian,
    expenditure) elasticities, as (n*n, P), (n*n, P) and (n, P) arrays."""
    P = 2 * n + n * n
    Jh = np.zeros((n * n, P))
    Je = np.zeros((n, P))
    for i in range(n):
        Je[i, n + i] = 1.0 / wbar[i]
        for j in range(n):
            Jh[i * n + j, _c(n, i, j)] = 1.0 / wbar[i]
    Jm = Jh - np.repeat(Je, n, axis=0) * np.tile(wbar, n)[:, None]
    return Jh, Jm, Je


def elasticities(fit, wbar=None):
    """Hicksian, Marshallian and expenditure elasticities with delta-method SEs.

    Shares are held fixed, so every elasticity is a linear function of the
    coefficients and its variance follows exactly from ``theta_cov``.
    """
    wbar = fit.wbar if wbar is None else np.asarray(wbar, dtype=float)
    n = fit.n
    if wbar.shape != (n,):
        raise DimensionError(f"{wbar.size} shares for a {n}-good system")
    if np.any(wbar <= 0):
        raise HMDemandError("mean shares must be positive")
    theta, cov = fit.system.theta, fit.system.theta_cov
    Jh, Jm, Je = elasticity_maps(n, wbar)

    def se(J):
        return np.sqrt(np.clip(np.einsum("ij,jk,ik->i", J, cov, J), 0, None))

    c = fit.c
    e = fit.b / wbar
    h = c / wbar[:, None]
    return ElasticityReport(
        fit.types, wbar, h, slutsky(h, e, wbar), e,
        se(Jh).reshape(n, n), se(Jm).reshape(n, n), se(Je),
    )


@dataclass(frozen=True)
class Containment:
    marshallian: np.ndarray
    expenditure: np.ndarray

    @property
    def all_inside(self):
        return bool(self.marshallian.all() and self.expenditure.all())

    @property
    def n_outside(self):
        return int((~self.marshallian).sum() + (~self.expenditure).sum())


def inside(candidate, estimate, se, z=Z95):
    """Closed-interval test ``estimate - z*se <= candidate <= estimate + z*se``."""
    candidate, estimate, se = (np.asarray(a, dtype=float) for a in (candidate, estimate, se))
    return (estimate - z * se <= candidate) & (candidate <= estimate + z * se)


def ci_containment(candidate, baseline, z=1.96):
    """Mark each Marshallian and expenditure cell of ``candidate`` that falls
    inside the baseline's ``estimate +/- z * SE`` interval.

    The marks are also stored on ``candidate``.
    """
    if tuple(candidate.types) != tuple(baseline.types):
        raise DimensionError(f"type lists differ: {candidate.types} vs {baseline.types}")
    if baseline.marshallian_se is None or baseline.expenditure_se is None:
        raise HMDemandError("baseline report has no standard errors")
    m = inside(candidate.marshallian, baseline.marshallian, baseline.marshallian_se, z)
    e = inside(candidate.expenditure, baseline.expenditure, baseline.expenditure_se, z)
    candidate.marks_marshallian = m
    candidate.marks_expenditure = e
    return Containment(m, e)

"""Synthetic data with known ground truth.

Panels come from inverting the Rotterdam equations week by week: prices and
total expenditure are drawn around calibrated means, then shares are solved
so every non-closing equation holds exactly (plus optional noise) and shares
sum to one. The closing good (soy by default, the one dropped in estimation)
absorbs the second-order gap between the Divisia regressor and true adding-up.

Purchase tables draw attributes around the published per-type profiles and
price them with a hedonic function.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CalibrationError, HMDemandError
from .panel import MarketPanel, make_purchases
from .reference import (ATTRIBUTES, ATTRIBUTE_MEANS, ATTRIBUTE_SDS, BINARY_ATTRIBUTES,
                        HICKSIAN, EXPENDITURE, MEAN_PRICES, MEAN_QUANTITIES, MEAN_SHARES,
                        MILK_TYPES, UNIQUE_UPCS, hedonic_coefficients)


@dataclass(frozen=True)
class Calibration:
    """Mean prices (cents/serving), mean shares and mean weekly expenditure."""

    prices: np.ndarray = field(default_factory=lambda: MEAN_PRICES.copy())
    shares: np.ndarray = field(default_factory=lambda: MEAN_SHARES.copy())
    expenditure: float = float(MEAN_PRICES @ MEAN_QUANTITIES)

    def check(self, n):
        p, w = np.asarray(self.prices), np.asarray(self.shares)
        if p.shape != (n,) or w.shape != (n,):
            raise CalibrationError(f"calibration must cover {n} goods")
        if np.any(w <= 0) or np.any(p <= 0) or not self.expenditure > 0:
            raise CalibrationError("calibration prices, shares and expenditure must be positive")
        if abs(w.sum() - 1) > 1e-9:
            raise CalibrationError(f"calibration shares sum to {w.sum()}, not 1")


@dataclass(frozen=True)
class GroundTruth:
    """Known demand and hedonic parameters.

    ``noise_cov`` is n x n; the closing good's row and column are ignored.
    ``kind`` records whether ``c`` satisfies the full theoretical
    restrictions ("original") or comes from a metric structure.
    """

    types: tuple
    b: np.ndarray
    c: np.ndarray
    intercepts: np.ndarray | None = None
    noise_cov: np.ndarray | None = None
    kind: str = "original"
    price_sd: float = 0.02
    expenditure_sd: float = 0.02
    closing: int | None = None
    hedonic_form: str = "linear"
    hedonic_intercept: float = 0.0
    hedonic_beta: np.ndarray | None = None
    hedonic_noise_sd: float = 0.0
    structure: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.types)
        set_ = object.__setattr__
        set_(self, "b", np.asarray(self.b, dtype=float))
        set_(self, "c", np.asarray(self.c, dtype=float))
        set_(self, "intercepts", np.zeros(n) if self.intercepts is None
             else np.asarray(self.intercepts, dtype=float))
        if self.noise_cov is not None:
            set_(self, "noise_cov", np.asarray(self.noise_cov, dtype=float))
        if self.hedonic_beta is not None:
            set_(self, "hedonic_beta", np.asarray(self.hedonic_beta, dtype=float))
        if self.closing is None:
            set_(self, "closing", n - 1)
        if self.b.shape != (n,) or self.c.shape != (n, n) or self.intercepts.shape != (n,):
            raise HMDemandError("ground-truth parameter shapes do not match the type list")
        if self.kind == "original":
            if abs(self.b.sum() - 1) > 1e-12:
                raise HMDemandError("b must sum to one")
            if np.max(np.abs(self.c - self.c.T)) > 1e-12:
                raise HMDemandError("c must be symmetric")
            if np.max(np.abs(self.c.sum(axis=1))) > 1e-12:
                raise HMDemandError("rows of c must sum to zero")
        if self.noise_cov is not None:
            keep = [i for i in range(n) if i != self.closing]
            sub = self.noise_cov[np.ix_(keep, keep)]
            if np.any(sub) and np.linalg.eigvalsh(sub).min() <= 0:
                raise HMDemandError("noise covariance must be positive definite")

    @property
    def n(self):
        return len(self.types)

    def with_noise(self, cov):
        return _replace(self, noise_cov=None if cov is None else np.asarray(cov, dtype=float))

    def to_json(self):
        d = {
            "types": list(self.types), "kind": self.kind,
            "b": self.b.tolist(), "c": self.c.tolist(), "intercepts": self.intercepts.tolist(),
            "noise_cov": None if self.noise_cov is None else self.noise_cov.tolist(),
            "price_sd": self.price_sd, "expenditure_sd": self.expenditure_sd,
            "closing": self.closing,
            "hedonic": {"form": self.hedonic_form, "intercept": self.hedonic_intercept,
                        "beta": None if self.hedonic_beta is None else dict(
                            zip(ATTRIBUTES, self.hedonic_beta.tolist())),
                        "noise_sd": self.hedonic_noise_sd},
            "structure": self.structure,
        }
        return json.dumps(d, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        hed = d.get("hedonic") or {}
        beta = hed.get("beta")
        if isinstance(beta, dict):
            beta = [beta[a] for a in ATTRIBUTES]
        return cls(
            tuple(d["types"]), d["b"], d["c"], d.get("intercepts"), d.get("noise_cov"),
            d.get("kind", "original"), d.get("price_sd", 0.02), d.get("expenditure_sd", 0.02),
            d.get("closing"), hed.get("form", "linear"), hed.get("intercept", 0.0), beta,
            hed.get("noise_sd", 0.0), d.get("structure", {}),
        )


def _replace(truth, **changes):
    fields = {f: getattr(truth, f) for f in truth.__dataclass_fields__}
    fields.update(changes)
    return GroundTruth(**fields)


def share_noise(shares, scale=0.005):
    """Noise covariance for share equations that competes away in aggregate.

    Independent shocks with sd ``scale * w_i`` are projected onto zero-sum
    vectors (``e = eta - w * sum(eta)``), so the full covariance is singular
    with rows summing to zero, every (n-1) block is positive definite and
    each good's share noise stays proportional to its share. The closing good
    therefore does not pile up the other goods' shocks.
    """
    w = np.asarray(shares, dtype=float)
    P = np.eye(w.size) - np.outer(w, np.ones(w.size))
    return P @ np.diag((scale * w) ** 2) @ P.T


def double_center(m):
    """Project a square matrix onto symmetric matrices with zero row sums."""
    m = np.asarray(m, dtype=float)
    s = 0.5 * (m + m.T)
    n = s.shape[0]
    J = np.eye(n) - np.ones((n, n)) / n
    return J @ s @ J


def default_hedonic():
    intercept, beta = hedonic_coefficients("linear")
    return dict(hedonic_form="linear", hedonic_intercept=intercept, hedonic_beta=beta)


def milk_truth(noise_scale=0.005, **kw):
    """Original-model truth near the published milk elasticities.

    ``c`` is the published Hicksian matrix times mean shares, projected onto
    the symmetric, zero-row-sum matrices; ``b`` is the published expenditure
    elasticities times shares, renormalized to sum to one.
    """
    w = MEAN_SHARES
    c = double_center(w[:, None] * HICKSIAN)
    b = w * EXPENDITURE
    b = b / b.sum()
    opts = dict(noise_cov=share_noise(w, noise_scale) if noise_scale else None,
                **default_hedonic())
    opts.update(kw)
    return GroundTruth(MILK_TYPES, b, c, **opts)


def metric_c(matrices, lambdas, beta0, chars, betas):
    """Price-coefficient matrix of a metric structure.

    ``c_ij = sum_l lambdas[l] * matrices[l][i, j]`` for i != j and
    ``c_ii = beta0 + sum_k betas[k] * chars[k][i]``.
    """
    names = list(lambdas)
    n = np.asarray(matrices[names[0]]).shape[0] if names else len(next(iter(chars.values())))
    c = np.zeros((n, n))
    for name in names:
        c += lambdas[name] * np.asarray(matrices[name], dtype=float)
    own = np.full(n, float(beta0))
    for name, beta in betas.items():
        own += beta * np.asarray(chars[name], dtype=float)
    np.fill_diagonal(c, own)
    return c


def metric_truth(types, matrices, lambdas, beta0, chars, betas, b, kind, noise_scale=0.005,
                 shares=MEAN_SHARES, **kw):
    """Ground truth whose price coefficients follow a DM or HM structure."""
    c = metric_c(matrices, lambdas, beta0, chars, betas)
    structure = {"lambdas": dict(lambdas), "beta0": float(beta0), "betas": dict(betas)}
    opts = dict(noise_cov=share_noise(shares, noise_scale) if noise_scale else None,
                **default_hedonic())
    opts.update(kw)
    return GroundTruth(tuple(types), b, c, kind=kind, structure=structure, **opts)


# Structures used by the metric presets; lambda_h and lambda_nn follow the
# published semi-log HM estimates, the rest are chosen to keep every share
# path interior.
HM_PRESET = {"lambdas": {"h": 0.0453, "nn": -0.0281}, "beta0": 0.1,
             "betas": {"share": -0.2, "closeness": -0.06}}
DM_PRESET = {"lambdas": {"FAT": 0.01, "ORGANIC": 0.04, "NN-FAT-ORGANIC": -0.02},
             "beta0": -0.28, "betas": {"share": 0.4, "fat": 0.005, "organic": 0.1}}


def _published_b():
    b = MEAN_SHARES * EXPENDITURE
    return b / b.sum()


def hm_truth(bundle=None, structure=HM_PRESET, noise_scale=0.005, **kw):
    """HM-structured truth over the bundled milk profile.

    The hedonic space is the published semi-log one, and purchases generated
    from this truth are priced by the same semi-log function.
    """
    from .pipeline import distance_bundle

    bundle = distance_bundle() if bundle is None else bundle
    intercept, beta = hedonic_coefficients("semilog")
    kw = {"hedonic_form": "semilog", "hedonic_intercept": intercept, "hedonic_beta": beta, **kw}
    mats = {"h": bundle.hedonic["HEDONIC"].values, "nn": bundle.hedonic["NN-HEDONIC"].values}
    chars = {"share": bundle.chars.share, "closeness": bundle.index}
    return metric_truth(MILK_TYPES, mats, structure["lambdas"], structure["beta0"], chars,
                        structure["betas"], _published_b(), "hm", noise_scale, **kw)


def dm_truth(bundle=None, structure=DM_PRESET, noise_scale=0.005, **kw):
    """DM-structured truth over the bundled milk profile."""
    from .pipeline import distance_bundle

    bundle = distance_bundle() if bundle is None else bundle
    mats = {name: bundle.dm[name].values for name in structure["lambdas"]}
    chars = {name: bundle.chars.get(name) for name in structure["betas"]}
    return metric_truth(MILK_TYPES, mats, structure["lambdas"], structure["beta0"], chars,
                        structure["betas"], _published_b(), "dm", noise_scale, **kw)


PRESETS = {"original": milk_truth, "dm": dm_truth, "hm": hm_truth}


def preset_truth(name, **kw):
    if name not in PRESETS:
        raise HMDemandError(f"unknown truth preset {name!r}; choose from {sorted(PRESETS)}")
    return PRESETS[name](**kw)


def _solve_week(u0, dlx, dlp, a, b, c, eps, closing, tol=1e-15, max_iter=50):
    """Log shares for one week solving the non-closing equations and sum(w)=1."""
    u = u0.copy()
    w0 = np.exp(u0)
    target = a + c @ dlp + eps
    for _ in range(max_iter):
        w = np.exp(u)
        wbar = 0.5 * (w + w0)
        dlq = u - u0 + dlx - dlp
        divisia = dlx - wbar @ dlp
        F = wbar * dlq - b * divisia - target
        J = np.diag(0.5 * w * dlq + wbar) + np.outer(b, 0.5 * w * dlp)
        F[closing] = w.sum() - 1.0
        J[closing] = w
        step = np.linalg.solve(J, F)
        u = u - step
        if np.max(np.abs(step)) < tol or np.max(np.abs(F)) < tol:
            break
    else:
        raise HMDemandError("share solver did not converge")
    return u


def gen_panel(truth, weeks, calibration=None, seed=None):
    """Simulate a weekly panel from ``truth``.

    Log prices and log expenditure are i.i.d. Gaussian deviations (sds
    ``truth.price_sd`` and ``truth.expenditure_sd``) around the calibrated
    means; week 0 sits exactly at the calibration.
    """
    cal = Calibration() if calibration is None else calibration
    n = truth.n
    cal.check(n)
    if weeks < 10:
        raise HMDemandError(f"need at least 10 weeks, got {weeks}")
    rng = np.random.default_rng(seed)
    logp = np.log(cal.prices) + truth.price_sd * rng.standard_normal((weeks, n))
    logx = np.log(cal.expenditure) + truth.expenditure_sd * rng.standard_normal(weeks)
    logp[0] = np.log(cal.prices)
    logx[0] = np.log(cal.expenditure)
    eps = np.zeros((weeks, n))
    if truth.noise_cov is not None and np.any(truth.noise_cov):
        keep = [i for i in range(n) if i != truth.closing]
        sub = truth.noise_cov[np.ix_(keep, keep)]
        eps[:, keep] = rng.multivariate_normal(np.zeros(len(keep)), sub, size=weeks,
                                               method="cholesky")

    u = np.empty((weeks, n))
    u[0] = np.log(cal.shares)
    for t in range(1, weeks):
        u[t] = _solve_week(u[t - 1], logx[t] - logx[t - 1], logp[t] - logp[t - 1],
                           truth.intercepts, truth.b, truth.c, eps[t], truth.closing)
    price = np.exp(logp)
    quantity = np.exp(u + logx[:, None]) / price
    return MarketPanel(tuple(truth.types), np.arange(weeks), price, quantity)


def _gamma(rng, mean, sd, size):
    if sd <= 0 or mean <= 0:
        return np.full(size, max(mean, 0.0))
    shape = (mean / sd) ** 2
    return rng.gamma(shape, sd * sd / mean, size)


def hedonic_price(truth, attributes):
    index = truth.hedonic_intercept + attributes @ truth.hedonic_beta
    return np.exp(index) if truth.hedonic_form == "semilog" else index


def gen_purchases(truth, records, seed=None, weeks=1, jitter=0.0, types=None):
    """Simulate item-level purchases priced by the truth's hedonic function.

    Types are drawn in proportion to the published unique-UPC counts;
    binary attributes are Bernoulli at the published type rates (soy is the
    type dummy) and continuous ones gamma-distributed at the published means
    and sds. Records with a nonpositive linear price are redrawn. ``jitter``
    adds Gaussian noise of that sd to every attribute (reflected into range),
    which keeps tiny samples full rank.
    """
    types = tuple(truth.types if types is None else types)
    if truth.hedonic_beta is None:
        raise HMDemandError("ground truth has no hedonic coefficients")
    if records < len(ATTRIBUTES) + 2:
        raise HMDemandError(f"need at least {len(ATTRIBUTES) + 2} records")
    rng = np.random.default_rng(seed)
    weight = np.array([UNIQUE_UPCS.get(t, 1) for t in types], dtype=float)
    weight /= weight.sum()

    def draw(count):
        kind = rng.choice(len(types), size=count, p=weight)
        x = np.empty((count, len(ATTRIBUTES)))
        for i, t in enumerate(types):
            sel = np.nonzero(kind == i)[0]
            if not sel.size:
                continue
            means, sds = ATTRIBUTE_MEANS[t], ATTRIBUTE_SDS[t]
            for j, a in enumerate(ATTRIBUTES):
                if a == "soy":
                    x[sel, j] = 1.0 if t == "SOY" else 0.0
                elif a in BINARY_ATTRIBUTES:
                    x[sel, j] = rng.random(sel.size) < means[a]
                else:
                    x[sel, j] = _gamma(rng, means[a], sds[a], sel.size)
        if jitter:
            x = np.abs(x + jitter * rng.standard_normal(x.shape))
            binary = [ATTRIBUTES.index(a) for a in BINARY_ATTRIBUTES]
            x[:, binary] = 1.0 - np.abs(1.0 - x[:, binary])
        price = hedonic_price(truth, x)
        if truth.hedonic_noise_sd:
            noise = truth.hedonic_noise_sd * rng.standard_normal(count)
            price = price * np.exp(noise) if truth.hedonic_form == "semilog" else price + noise
        return kind, x, price

    kind, x, price = draw(records)
    for _ in range(100):
        bad = np.nonzero(price <= 0)[0]
        if not bad.size:
            break
        kind[bad], x[bad], price[bad] = draw(bad.size)
    else:
        raise HMDemandError("could not draw positive hedonic prices")

    ptype = np.array([types[k] for k in kind], dtype=object)
    upc = np.array([f"{types[k]}-{rng.integers(UNIQUE_UPCS.get(types[k], 1))}" for k in kind],
                   dtype=object)
    spp = x[:, ATTRIBUTES.index("servings_per_package")]
    packages = 1 + rng.poisson(0.5, records)
    servings = np.maximum(packages * spp, 1e-6)
    week = rng.integers(weeks, size=records)
    return make_purchases(week, ptype, upc, price, servings, x, types)


def seeds(base, count):
    """Independent per-replication seeds derived from one base seed."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(base).spawn(count)]


def save_truth(truth, path):
    Path(path).write_text(truth.to_json() + "\n")


def load_truth(path):
    return GroundTruth.from_json(Path(path).read_text())

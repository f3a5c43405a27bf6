"""Purchase-record ingestion and weekly aggregation.

Purchases are held column-wise in a :class:`PurchaseTable`; aggregation turns
them into a :class:`MarketPanel` of weekly prices (cents per serving),
quantities (servings) and expenditure shares per product type.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import HMDemandError, LoadError, NutrientError, PanelGapError
from .reference import ATTRIBUTES, BINARY_ATTRIBUTES, MILK_TYPES

FLOAT_FMT = "%.17g"

# Logical field -> CSV header. Override entries to read differently named files.
DEFAULT_SCHEMA = {
    "week": "week",
    "product_type": "product_type",
    "upc": "upc",
    "price_per_serving": "price_per_serving",
    "servings": "servings",
    **{a: a for a in ATTRIBUTES},
}

# Daily reference values (FDA labeling guide, 2008), per nutrient key.
REFERENCE_INTAKES = {
    "vitamin_a_iu": 5000.0,
    "vitamin_c_mg": 60.0,
    "vitamin_d_iu": 400.0,
    "vitamin_e_iu": 30.0,
    "riboflavin_mg": 1.7,
    "vitamin_b12_ug": 6.0,
    "calcium_mg": 1000.0,
    "iron_mg": 18.0,
    "phosphorus_mg": 1000.0,
    "potassium_mg": 3500.0,
    "magnesium_mg": 400.0,
    "zinc_mg": 15.0,
    "sodium_mg": 2400.0,
    "cholesterol_mg": 300.0,
}


def fmt(x):
    return FLOAT_FMT % x


@dataclass(frozen=True)
class PurchaseTable:
    """Item-level purchase records, stored column-wise.

    ``attributes`` is an (N, A) array whose columns follow ``attribute_names``.
    Binary attributes may hold fractions in [0, 1] when a record stands for a
    type average (as in the bundled profile file).
    """

    week: np.ndarray
    product_type: np.ndarray
    upc: np.ndarray
    price: np.ndarray
    servings: np.ndarray
    attributes: np.ndarray
    types: tuple = MILK_TYPES
    attribute_names: tuple = ATTRIBUTES

    def __post_init__(self):
        n = len(self.week)
        for name in ("product_type", "upc", "price", "servings"):
            if len(getattr(self, name)) != n:
                raise HMDemandError(f"column {name} has {len(getattr(self, name))} rows, expected {n}")
        if self.attributes.shape != (n, len(self.attribute_names)):
            raise HMDemandError(
                f"attributes shape {self.attributes.shape} != ({n}, {len(self.attribute_names)})"
            )
        if n and (np.any(self.price <= 0) or np.any(self.servings <= 0)):
            raise HMDemandError("prices and servings must be positive")
        unknown = set(self.product_type) - set(self.types)
        if unknown:
            raise HMDemandError(f"unknown product types: {sorted(unknown)}")

    def __len__(self):
        return len(self.week)

    def attribute(self, name):
        return self.attributes[:, self.attribute_names.index(name)]

    def type_index(self):
        """Integer position of each record's type within ``types``."""
        lookup = {t: i for i, t in enumerate(self.types)}
        return np.array([lookup[t] for t in self.product_type], dtype=int)

    def take(self, idx):
        idx = np.asarray(idx)
        return PurchaseTable(
            self.week[idx], self.product_type[idx], self.upc[idx], self.price[idx],
            self.servings[idx], self.attributes[idx], self.types, self.attribute_names,
        )


def make_purchases(week, product_type, upc, price, servings, attributes,
                   types=MILK_TYPES, attribute_names=ATTRIBUTES):
    """Build a :class:`PurchaseTable` from array-likes."""
    return PurchaseTable(
        np.asarray(week, dtype=int),
        np.asarray(product_type, dtype=object),
        np.asarray(upc, dtype=object),
        np.asarray(price, dtype=float),
        np.asarray(servings, dtype=float),
        np.asarray(attributes, dtype=float).reshape(len(week), len(attribute_names)),
        tuple(types),
        tuple(attribute_names),
    )


def load_purchases(path, schema=None, types=MILK_TYPES):
    """Read a purchase CSV.

    Parameters
    ----------
    path
        CSV file with a header row.
    schema
        Mapping from logical field names (see ``DEFAULT_SCHEMA``) to CSV
        headers. Missing keys fall back to the defaults.
    types
        Allowed product-type labels, in panel order.

    Raises
    ------
    LoadError
        Naming the 1-based data row and the header of the first bad cell.
    """
    cols = dict(DEFAULT_SCHEMA)
    if schema:
        cols.update(schema)
    path = Path(path)
    if not path.exists():
        raise LoadError(f"no such file: {path}")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [h for h in cols.values() if h not in header]
        if missing:
            raise LoadError(f"missing columns: {', '.join(missing)}", column=missing[0])
        rows = list(reader)

    n = len(rows)
    week = np.empty(n, dtype=int)
    ptype = np.empty(n, dtype=object)
    upc = np.empty(n, dtype=object)
    price = np.empty(n)
    servings = np.empty(n)
    attrs = np.empty((n, len(ATTRIBUTES)))
    allowed = set(types)

    def number(row, r, key, cast=float):
        head = cols[key]
        raw = row[head]
        try:
            return cast(raw)
        except (TypeError, ValueError):
            raise LoadError(f"unparseable number {raw!r}", row=r, column=head) from None

    for k, row in enumerate(rows):
        r = k + 1
        week[k] = number(row, r, "week", int)
        if week[k] < 0:
            raise LoadError("negative week index", row=r, column=cols["week"])
        label = row[cols["product_type"]]
        if label not in allowed:
            raise LoadError(f"unknown product type {label!r}", row=r, column=cols["product_type"])
        ptype[k] = label
        upc[k] = row[cols["upc"]]
        price[k] = number(row, r, "price_per_serving")
        if not price[k] > 0:
            raise LoadError("price must be positive", row=r, column=cols["price_per_serving"])
        servings[k] = number(row, r, "servings")
        if not servings[k] > 0:
            raise LoadError("servings must be positive", row=r, column=cols["servings"])
        for j, a in enumerate(ATTRIBUTES):
            v = number(row, r, a)
            if not v >= 0 or (a in BINARY_ATTRIBUTES and v > 1):
                raise LoadError(f"attribute out of range: {v!r}", row=r, column=cols[a])
            attrs[k, j] = v

    return PurchaseTable(week, ptype, upc, price, servings, attrs, tuple(types), ATTRIBUTES)


def write_purchases(table, path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["week", "product_type", "upc", "price_per_serving", "servings",
                    *table.attribute_names])
        for k in range(len(table)):
            w.writerow([int(table.week[k]), table.product_type[k], table.upc[k],
                        fmt(table.price[k]), fmt(table.servings[k]),
                        *(fmt(v) for v in table.attributes[k])])
    return path


def bundled_profiles_path():
    """Path of the bundled milk file: one record per type at its published means."""
    return Path(__file__).with_name("data") / "milk_profiles.csv"


def dri_transform(amounts, reference=None, sodium_key="sodium_mg"):
    """Convert per-serving nutrient amounts to percent of daily reference intake.

    Every nutrient except sodium is averaged (unweighted) into a single
    vitamin-mineral index; sodium is returned on its own.

    Returns
    -------
    (vitmin_dri, sodium_dri)
        ``sodium_dri`` is None when no sodium amount is given; ``vitmin_dri``
        is None when sodium is the only nutrient.
    """
    reference = REFERENCE_INTAKES if reference is None else reference
    pct = {}
    for name, amount in amounts.items():
        ref = reference.get(name)
        if ref is None:
            raise NutrientError(f"no reference intake for nutrient {name!r}")
        if not ref > 0:
            raise NutrientError(f"reference intake for {name!r} must be positive")
        pct[name] = 100.0 * amount / ref
    sodium = pct.pop(sodium_key, None)
    index = float(np.mean(list(pct.values()))) if pct else None
    return index, sodium


@dataclass(frozen=True)
class MarketPanel:
    """Weekly per-type prices (cents/serving) and quantities (servings).

    Shares and expenditure are derived, so share closure holds by construction.
    """

    types: tuple
    weeks: np.ndarray
    price: np.ndarray
    quantity: np.ndarray

    def __post_init__(self):
        T, n = self.price.shape
        if self.quantity.shape != (T, n) or len(self.types) != n or len(self.weeks) != T:
            raise HMDemandError("panel arrays have inconsistent shapes")
        if np.any(~(self.price > 0)):
            raise HMDemandError("panel prices must be positive")
        if np.any(self.quantity < 0):
            raise HMDemandError("panel quantities must be nonnegative")

    @property
    def T(self):
        return self.price.shape[0]

    @property
    def n(self):
        return self.price.shape[1]

    @property
    def expenditure(self):
        return (self.price * self.quantity).sum(axis=1)

    @property
    def share(self):
        spend = self.price * self.quantity
        return spend / spend.sum(axis=1, keepdims=True)

    def mean_shares(self):
        return self.share.mean(axis=0)


def aggregate_weekly(purchases, fill=None, weighting="quantity"):
    """Aggregate purchase records to a weekly :class:`MarketPanel`.

    Weekly price is the servings-weighted mean record price
    (``weighting="quantity"``) or the plain mean (``"simple"``). The panel
    spans every week from the first to the last observed. Empty cells raise
    :class:`PanelGapError` unless ``fill="carry"``, which carries the previous
    week's price forward with zero quantity.
    """
    if weighting not in ("quantity", "simple"):
        raise ValueError(f"unknown weighting {weighting!r}")
    if fill not in (None, "carry"):
        raise ValueError(f"unknown fill policy {fill!r}")
    if len(purchases) == 0:
        raise HMDemandError("no purchase records")
    types = purchases.types
    n = len(types)
    w0 = int(purchases.week.min())
    weeks = np.arange(w0, int(purchases.week.max()) + 1)
    T = len(weeks)
    row = purchases.week - w0
    col = purchases.type_index()

    qty = np.zeros((T, n))
    spend = np.zeros((T, n))
    psum = np.zeros((T, n))
    count = np.zeros((T, n), dtype=int)
    np.add.at(qty, (row, col), purchases.servings)
    np.add.at(spend, (row, col), purchases.price * purchases.servings)
    np.add.at(psum, (row, col), purchases.price)
    np.add.at(count, (row, col), 1)

    empty = count == 0
    if empty.any():
        gaps = [(int(weeks[t]), types[i]) for t, i in zip(*np.nonzero(empty))]
        if fill is None:
            raise PanelGapError(gaps)
    with np.errstate(invalid="ignore", divide="ignore"):
        price = spend / qty if weighting == "quantity" else psum / count
    if empty.any():
        for t in range(T):
            for i in np.nonzero(empty[t])[0]:
                if t == 0:
                    raise PanelGapError([(int(weeks[0]), types[i])])
                price[t, i] = price[t - 1, i]
    return MarketPanel(tuple(types), weeks, price, qty)


def write_panel(panel, path):
    """One row per week: week, price_<type>..., qty_<type>..., share_<type>..."""
    path = Path(path)
    share = panel.share
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["week", *(f"price_{t}" for t in panel.types),
                    *(f"qty_{t}" for t in panel.types), *(f"share_{t}" for t in panel.types)])
        for t in range(panel.T):
            w.writerow([int(panel.weeks[t]), *map(fmt, panel.price[t]),
                        *map(fmt, panel.quantity[t]), *map(fmt, share[t])])
    return path


def read_panel(path):
    """Inverse of :func:`write_panel`; stored shares are checked against price x qty."""
    path = Path(path)
    if not path.exists():
        raise LoadError(f"no such file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    types = tuple(h[len("price_"):] for h in header if h.startswith("price_"))
    n = len(types)
    expected = ["week", *(f"price_{t}" for t in types), *(f"qty_{t}" for t in types),
                *(f"share_{t}" for t in types)]
    if header != expected:
        raise LoadError("panel header does not match price_/qty_/share_ layout")
    data = np.empty((len(rows), 3 * n))
    weeks = np.empty(len(rows), dtype=int)
    for r, row in enumerate(rows):
        try:
            weeks[r] = int(row[0])
        except ValueError:
            raise LoadError(f"unparseable number {row[0]!r}", row=r + 1, column="week") from None
        for j in range(3 * n):
            try:
                data[r, j] = float(row[j + 1])
            except (ValueError, IndexError):
                raise LoadError("unparseable number", row=r + 1, column=header[j + 1]) from None
    panel = MarketPanel(types, weeks, data[:, :n], data[:, n:2 * n])
    if rows and np.max(np.abs(panel.share - data[:, 2 * n:])) > 1e-9:
        raise LoadError("stored shares disagree with price x quantity")
    return panel


@dataclass(frozen=True)
class AttributeProfile:
    """Per-type attribute means and population standard deviations."""

    types: tuple
    attribute_names: tuple
    means: np.ndarray
    sds: np.ndarray
    unique_upcs: dict
    records: dict
    mean_price: np.ndarray = field(repr=False)

    def column(self, name):
        return self.means[:, self.attribute_names.index(name)]


def attribute_profile(purchases):
    """Per-type attribute means, population sds, unique-UPC and record counts.

    ``mean_price`` is the servings-weighted mean price per type. Types with no
    records get NaN rows.
    """
    if len(purchases) == 0:
        raise HMDemandError("no purchase records")
    col = purchases.type_index()
    n, A = len(purchases.types), len(purchases.attribute_names)
    means = np.full((n, A), np.nan)
    sds = np.full((n, A), np.nan)
    mean_price = np.full(n, np.nan)
    upcs, records = {}, {}
    for i, t in enumerate(purchases.types):
        sel = col == i
        records[t] = int(sel.sum())
        upcs[t] = len(set(purchases.upc[sel]))
        if not sel.any():
            continue
        x = purchases.attributes[sel]
        means[i] = x.mean(axis=0)
        sds[i] = x.std(axis=0)
        s = purchases.servings[sel]
        mean_price[i] = np.sum(purchases.price[sel] * s) / s.sum()
    return AttributeProfile(tuple(purchases.types), tuple(purchases.attribute_names),
                            means, sds, upcs, records, mean_price)

"""Closeness matrices over product types.

A closeness value is the inverse Euclidean distance ``1 / (1 + ||delta||)``,
so 1 means identical products. Diagonals are set to 0: the demand models
never read them (own-price terms are parameterized separately).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateSpaceError, HMDemandError, LoadError
from .panel import fmt

DIMENSIONS = ("share", "fat", "organic", "size")

# Every continuous measure of the full DM model: 4 one-, 3 two- and one
# three-dimensional space.
DEFAULT_CONTINUOUS = (
    ("share",),
    ("fat",),
    ("organic",),
    ("size",),
    ("fat", "organic"),
    ("fat", "size"),
    ("organic", "size"),
    ("fat", "organic", "size"),
)
# Nearest-neighbour spaces of the full DM model (organic-size duplicates fat-size).
DEFAULT_NN = ("FAT-ORGANIC", "FAT-SIZE", "FAT-ORGANIC-SIZE")


def space_name(dims):
    return "-".join(d.upper() for d in dims)


def nn_name(name):
    return f"NN-{name}"


@dataclass(frozen=True)
class ClosenessMatrix:
    name: str
    types: tuple
    values: np.ndarray
    kind: str = "continuous"

    @property
    def n(self):
        return len(self.types)

    def is_symmetric(self, tol=0.0):
        return bool(np.all(np.abs(self.values - self.values.T) <= tol))


@dataclass(frozen=True)
class OwnPriceCharacteristics:
    """Per-type contents that interact with own prices or define spaces.

    ``organic`` is the organic share of purchases (0-1), ``size`` the mean
    servings per package, ``closeness`` the hedonic closeness index.
    """

    types: tuple
    share: np.ndarray
    fat: np.ndarray
    organic: np.ndarray
    size: np.ndarray
    closeness: np.ndarray | None = None

    def get(self, name):
        value = getattr(self, name, None)
        if value is None:
            raise HMDemandError(f"characteristic {name!r} is not available")
        return np.asarray(value, dtype=float)

    def with_closeness(self, index):
        return OwnPriceCharacteristics(self.types, self.share, self.fat, self.organic,
                                       self.size, np.asarray(index, dtype=float))


def characteristics(profiles, shares, closeness=None):
    """Collect own-price characteristics from an attribute profile and mean shares."""
    shares = np.asarray(shares, dtype=float)
    if np.any(shares <= 0) or np.any(shares >= 1):
        raise HMDemandError("mean shares must lie in (0, 1)")
    return OwnPriceCharacteristics(
        profiles.types, shares, profiles.column("fat_g"), profiles.column("organic"),
        profiles.column("servings_per_package"),
        None if closeness is None else np.asarray(closeness, dtype=float),
    )


def content_delta(x_i, x_j, x_max):
    """Content difference scaled by the largest content of any product."""
    if not x_max > 0:
        raise HMDemandError(f"x_max must be positive, got {x_max}")
    return (np.asarray(x_i, dtype=float) - x_j) / x_max


def closeness(deltas):
    """``1 / (1 + sqrt(sum(delta**2)))`` over the last axis."""
    d = np.asarray(deltas, dtype=float)
    return 1.0 / (1.0 + np.sqrt(np.sum(d * d, axis=-1)))


def continuous_matrix(chars, dims):
    if not dims:
        raise HMDemandError("empty dimension subset")
    deltas = []
    for d in dims:
        if d not in DIMENSIONS:
            raise HMDemandError(f"unknown dimension {d!r}; choose from {DIMENSIONS}")
        x = chars.get(d)
        x_max = x.max()
        deltas.append(content_delta(x[:, None], x[None, :], x_max))
    values = closeness(np.stack(deltas, axis=-1))
    np.fill_diagonal(values, 0.0)
    return ClosenessMatrix(space_name(dims), chars.types, values, "continuous")


def build_continuous_set(chars, dimensions=DEFAULT_CONTINUOUS):
    """One continuous closeness matrix per requested dimension subset."""
    return [continuous_matrix(chars, tuple(dims)) for dims in dimensions]


def nn_indicator(matrix):
    """Raw nearest-neighbour rows: a single 1 at each row's closest other type.

    Ties go to the lowest type index.
    """
    n = matrix.n
    if n < 2:
        raise HMDemandError("nearest neighbours need at least two types")
    d = np.array(matrix.values, dtype=float)
    np.fill_diagonal(d, -np.inf)
    raw = np.zeros((n, n))
    raw[np.arange(n), np.argmax(d, axis=1)] = 1.0
    return raw


def nearest_neighbor(matrix, symmetrize=True):
    """Discrete NN matrix; symmetrized by elementwise max unless told otherwise."""
    raw = nn_indicator(matrix)
    values = np.maximum(raw, raw.T) if symmetrize else raw
    return ClosenessMatrix(nn_name(matrix.name), matrix.types, values, "discrete")


def hedonic_distance(values, name="HEDONIC"):
    """Closeness in value-added space.

    Pairwise Euclidean distances between value-added rows are divided by the
    largest pairwise distance, then inverted as ``1 / (1 + D)``.
    """
    v = np.asarray(values.values, dtype=float)
    if v.shape[0] < 2:
        raise HMDemandError("hedonic distance needs at least two types")
    diff = v[:, None, :] - v[None, :, :]
    D = np.sqrt(np.sum(diff * diff, axis=-1))
    top = D.max()
    if not top > 0:
        raise DegenerateSpaceError("all value-added rows are identical")
    c = 1.0 / (1.0 + D / top)
    np.fill_diagonal(c, 0.0)
    return ClosenessMatrix(name, tuple(values.types), c, "continuous")


def closeness_index(matrix):
    """Total closeness of each type to all others (row sums off the diagonal)."""
    v = np.array(matrix.values, dtype=float)
    np.fill_diagonal(v, 0.0)
    return v.sum(axis=1)


def build_distance_set(chars, dimensions=DEFAULT_CONTINUOUS, nn_spaces=DEFAULT_NN):
    """Named continuous matrices plus NN matrices for the listed spaces."""
    out = {}
    for m in build_continuous_set(chars, dimensions):
        out[m.name] = m
    for space in nn_spaces:
        base = out.get(space)
        if base is None:
            dims = tuple(s.lower() for s in space.split("-"))
            base = continuous_matrix(chars, dims)
        nn = nearest_neighbor(base)
        out[nn.name] = nn
    return out


def hedonic_set(value_matrix):
    """HEDONIC closeness, its NN matrix and the closeness index."""
    h = hedonic_distance(value_matrix)
    nn = nearest_neighbor(h)
    return {h.name: h, nn.name: nn}, closeness_index(h)


def write_matrix_csv(matrix, path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"{matrix.name}:{matrix.kind}", *matrix.types])
        for t, row in zip(matrix.types, matrix.values):
            w.writerow([t, *map(fmt, row)])
    return path


def read_matrix_csv(path):
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or ":" not in rows[0][0]:
        raise LoadError(f"{path}: not a closeness-matrix file")
    name, kind = rows[0][0].rsplit(":", 1)
    types = tuple(rows[0][1:])
    try:
        values = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
    except ValueError:
        raise LoadError(f"{path}: unparseable matrix entry") from None
    if values.shape != (len(types), len(types)):
        raise LoadError(f"{path}: matrix is not square over its labels")
    return ClosenessMatrix(name, types, values, kind)

"""Glue between the attribute side (profiles, hedonic fit) and the demand side.

:func:`distance_bundle` computes every closeness matrix and characteristic
the DM and HM fits consume, so the CLI, the presets in :mod:`hmdemand.synth`
and the demo scripts all build them identically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hedonic import from_coefficients, value_added
from .metrics import (DEFAULT_CONTINUOUS, DEFAULT_NN, build_distance_set, characteristics,
                      hedonic_set)
from .panel import attribute_profile, bundled_profiles_path, load_purchases
from .reference import ATTRIBUTES, MEAN_PRICES, MEAN_SHARES, hedonic_coefficients


@dataclass(frozen=True)
class DistanceBundle:
    dm: dict
    hedonic: dict
    index: np.ndarray
    chars: object
    value_added: object

    @property
    def all(self):
        return {**self.dm, **self.hedonic}


def bundled_profile():
    return attribute_profile(load_purchases(bundled_profiles_path()))


def published_hedonic(form):
    intercept, beta = hedonic_coefficients(form)
    return from_coefficients(form, intercept, beta, ATTRIBUTES)


def distance_bundle(profile=None, shares=None, hedonic=None, form="semilog",
                    mean_prices=None, dimensions=DEFAULT_CONTINUOUS, nn_spaces=DEFAULT_NN):
    """All closeness matrices over ``profile`` (default: the bundled milk profile).

    ``hedonic`` is a :class:`~hmdemand.hedonic.HedonicFit`; without one the
    published coefficients of ``form`` are used. ``shares`` default to the
    published mean shares and ``mean_prices`` (semi-log scaling) to the
    published mean prices when the profile is the bundled one.
    """
    bundled = profile is None
    profile = bundled_profile() if bundled else profile
    shares = MEAN_SHARES if shares is None else np.asarray(shares, dtype=float)
    hedonic = published_hedonic(form) if hedonic is None else hedonic
    if mean_prices is None and bundled:
        mean_prices = MEAN_PRICES
    va = value_added(hedonic, profile, mean_prices)
    hm, index = hedonic_set(va)
    chars = characteristics(profile, shares, index)
    dm = build_distance_set(chars, dimensions, nn_spaces)
    return DistanceBundle(dm, hm, index, chars, va)

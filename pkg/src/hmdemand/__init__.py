"""Rotterdam demand systems for differentiated products, estimated directly
or through distance-metric and hedonic-metric approximations."""

__version__ = "0.1.0"

from .demand import (DemandFit, ModelSpec, ci_containment, dm_spec, elasticities, fit_dm,
                     fit_hm, fit_original, hm_spec, load_fit, report_from_values, save_fit,
                     slutsky)
from .errors import HMDemandError
from .estimator import RestrictionSet, SystemFit, information_criteria, sur_fit
from .hedonic import fit_hedonic, implicit_prices, value_added
from .metrics import (build_distance_set, closeness, closeness_index, continuous_matrix,
                      hedonic_distance, nearest_neighbor)
from .panel import MarketPanel, aggregate_weekly, load_purchases, read_panel, write_panel
from .pipeline import distance_bundle
from .synth import GroundTruth, gen_panel, gen_purchases, milk_truth, preset_truth

__all__ = [
    "DemandFit", "GroundTruth", "HMDemandError", "MarketPanel", "ModelSpec", "RestrictionSet",
    "SystemFit", "aggregate_weekly", "build_distance_set", "ci_containment", "closeness",
    "closeness_index", "continuous_matrix", "distance_bundle", "dm_spec", "elasticities",
    "fit_dm", "fit_hedonic", "fit_hm", "fit_original", "gen_panel", "gen_purchases",
    "hedonic_distance", "hm_spec", "implicit_prices", "information_criteria", "load_fit",
    "load_purchases", "milk_truth", "nearest_neighbor", "preset_truth", "read_panel",
    "report_from_values", "save_fit", "slutsky", "sur_fit", "value_added", "write_panel",
]

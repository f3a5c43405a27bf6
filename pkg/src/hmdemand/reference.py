"""Published milk-market reference values.

Type order everywhere is 2%, skim, whole (3.25%), 1%, soy; soy is last so it
is the default dropped equation. Binary attributes are stored as fractions
(the published percentages divided by 100).
"""

import numpy as np

MILK_TYPES = ("PERCENT2", "SKIM", "FULLFAT", "PERCENT1", "SOY")

# Hedonic attribute set, in regression column order.
ATTRIBUTES = (
    "organic",
    "soy",
    "promotion",
    "lfcf",
    "vitmin_label",
    "protein_g",
    "carb_g",
    "fat_g",
    "cholesterol_dri",
    "sodium_dri",
    "vitmin_dri",
    "servings_per_package",
)
BINARY_ATTRIBUTES = ("organic", "soy", "promotion", "lfcf", "vitmin_label")

# Per-type attribute means and standard deviations.
ATTRIBUTE_MEANS = {
    "PERCENT2": dict(organic=0.0048, soy=0.0, promotion=0.0976, lfcf=0.0221,
                     vitmin_label=0.9753, protein_g=8.54, carb_g=13.15, fat_g=4.77,
                     cholesterol_dri=6.55, sodium_dri=5.24, vitmin_dri=11.92,
                     servings_per_package=15.63),
    "SKIM": dict(organic=0.0058, soy=0.0, promotion=0.0790, lfcf=0.0387,
                 vitmin_label=0.9869, protein_g=8.81, carb_g=12.69, fat_g=0.53,
                 cholesterol_dri=1.68, sodium_dri=5.29, vitmin_dri=12.02,
                 servings_per_package=14.93),
    "FULLFAT": dict(organic=0.0061, soy=0.0, promotion=0.0627, lfcf=0.0094,
                    vitmin_label=0.9718, protein_g=8.04, carb_g=12.23, fat_g=8.15,
                    cholesterol_dri=8.44, sodium_dri=4.30, vitmin_dri=10.54,
                    servings_per_package=13.66),
    "PERCENT1": dict(organic=0.0101, soy=0.0, promotion=0.0929, lfcf=0.0119,
                     vitmin_label=0.9688, protein_g=8.41, carb_g=13.54, fat_g=2.26,
                     cholesterol_dri=4.01, sodium_dri=4.75, vitmin_dri=11.35,
                     servings_per_package=14.69),
    "SOY": dict(organic=0.6381, soy=1.0, promotion=0.1416, lfcf=0.9899,
                vitmin_label=0.6899, protein_g=5.07, carb_g=18.88, fat_g=2.41,
                cholesterol_dri=0.10, sodium_dri=4.40, vitmin_dri=8.71,
                servings_per_package=8.40),
}

ATTRIBUTE_SDS = {
    "PERCENT2": dict(organic=0.0689, soy=0.0, promotion=0.2967, lfcf=0.1469,
                     vitmin_label=0.1553, protein_g=0.38, carb_g=3.71, fat_g=0.36,
                     cholesterol_dri=0.74, sodium_dri=0.57, vitmin_dri=1.25,
                     servings_per_package=10.48),
    "SKIM": dict(organic=0.0756, soy=0.0, promotion=0.2696, lfcf=0.1929,
                 vitmin_label=0.1134, protein_g=0.22, carb_g=1.54, fat_g=0.17,
                 cholesterol_dri=0.09, sodium_dri=0.48, vitmin_dri=0.16,
                 servings_per_package=10.25),
    "FULLFAT": dict(organic=0.0776, soy=0.0, promotion=0.2423, lfcf=0.0962,
                    vitmin_label=0.1656, protein_g=0.03, carb_g=3.56, fat_g=0.08,
                    cholesterol_dri=0.41, sodium_dri=0.51, vitmin_dri=0.06,
                    servings_per_package=9.68),
    "PERCENT1": dict(organic=0.099, soy=0.0, promotion=0.2903, lfcf=0.1083,
                     vitmin_label=0.1739, protein_g=0.11, carb_g=3.67, fat_g=0.64,
                     cholesterol_dri=0.49, sodium_dri=0.49, vitmin_dri=0.11,
                     servings_per_package=9.02),
    "SOY": dict(organic=0.4805, soy=0.0, promotion=0.3486, lfcf=0.1002,
                vitmin_label=0.4625, protein_g=1.56, carb_g=4.01, fat_g=1.29,
                cholesterol_dri=0.98, sodium_dri=0.95, vitmin_dri=1.63,
                servings_per_package=5.73),
}

UNIQUE_UPCS = {"PERCENT2": 225, "SKIM": 142, "FULLFAT": 262, "PERCENT1": 200, "SOY": 31}

# Weekly means: cents per serving, servings, expenditure shares.
MEAN_PRICES = np.array([17.82, 17.45, 19.35, 18.33, 34.85])
MEAN_QUANTITIES = np.array([12925.71, 10524.45, 6345.95, 6526.62, 615.31])
MEAN_SHARES = np.array([0.3400, 0.2713, 0.1807, 0.1766, 0.0314])

# Hedonic coefficients (intercept first, then ATTRIBUTES order).
HEDONIC_LINEAR = dict(intercept=-20.627, organic=10.962, soy=-9.351, promotion=-1.583,
                      lfcf=23.537, vitmin_label=4.497, protein_g=2.734, carb_g=0.991,
                      fat_g=0.861, cholesterol_dri=-0.358, sodium_dri=-2.010,
                      vitmin_dri=0.789, servings_per_package=-0.106)
HEDONIC_SEMILOG = dict(intercept=1.667, organic=0.428, soy=-0.367, promotion=-0.100,
                       lfcf=0.857, vitmin_label=0.140, protein_g=0.085, carb_g=0.033,
                       fat_g=0.032, cholesterol_dri=-0.011, sodium_dri=-0.060,
                       vitmin_dri=0.020, servings_per_package=-0.005)

# Original-model elasticities at sample means (rows: responding good).
HICKSIAN = np.array([
    [-0.4781, 0.2708, 0.1196, 0.1704, -0.0052],
    [0.33953, -0.575, 0.0912, 0.0877, 0.0757],
    [0.22503, 0.1369, -0.5249, 0.0741, 0.1523],
    [0.32803, 0.1347, 0.0759, -0.6361, -0.0825],
    [-0.0562, 0.6558, 0.8793, -0.4653, -1.0135],
])
HICKSIAN_SE = np.array([
    [0.150, 0.111, 0.096, 0.084, 0.052],
    [0.139, 0.166, 0.113, 0.086, 0.070],
    [0.180, 0.169, 0.159, 0.137, 0.084],
    [0.162, 0.133, 0.140, 0.172, 0.106],
    [0.57, 0.608, 0.486, 0.599, 0.261],
])
MARSHALLIAN = np.array([
    [-0.8179, -0.0002, -0.061, -0.0061, -0.0365],
    [-0.047, -0.8832, -0.1149, -0.1130, 0.0401],
    [-0.054, -0.0857, -0.6733, -0.0708, 0.1266],
    [0.0061, -0.1221, -0.0952, -0.8031, -0.1121],
    [-0.4497, 0.3419, 0.6701, -0.6697, -1.049],
])
MARSHALLIAN_SE = np.array([
    [0.148, 0.112, 0.097, 0.085, 0.057],
    [0.140, 0.170, 0.111, 0.087, 0.075],
    [0.177, 0.172, 0.160, 0.137, 0.083],
    [0.160, 0.138, 0.141, 0.173, 0.101],
    [0.593, 0.611, 0.493, 0.602, 0.254],
])
EXPENDITURE = np.array([0.9993, 1.1366, 0.8210, 0.9467, 1.1571])
EXPENDITURE_SE = np.array([0.068, 0.085, 0.0915, 0.0923, 0.353])

# Fit statistics: (logL, free parameters, N, AIC, BIC as printed).
FIT_STATISTICS = {
    "dm_full": (2740.689, 23, 208, -5435.378, -5428.063),
    "dm_f_o_nnfo": (2734.468, 15, 208, -5438.936, -5434.165),
    "hm_semilog": (2733.933, 13, 208, -5441.866, -5437.7312),
    "hm_linear": (2733.662, 13, 208, -5441.324, -5437.1892),
}


def attribute_matrix(stat="mean", types=MILK_TYPES):
    """Table of per-type attribute means (or sds) as an array (types x attributes)."""
    table = ATTRIBUTE_MEANS if stat == "mean" else ATTRIBUTE_SDS
    return np.array([[table[t][a] for a in ATTRIBUTES] for t in types])


def hedonic_coefficients(form):
    """(intercept, coefficient vector in ATTRIBUTES order) for a published fit."""
    table = HEDONIC_LINEAR if form == "linear" else HEDONIC_SEMILOG
    return table["intercept"], np.array([table[a] for a in ATTRIBUTES])

"""Where do the milk types sit in hedonic space?

Published hedonic coefficients turn each type's average attributes into cents
of value added; distances between those rows give the hedonic closeness used
by the HM demand model.
"""

import numpy as np

from hmdemand.hedonic import implicit_prices, value_added
from hmdemand.metrics import hedonic_set
from hmdemand.pipeline import bundled_profile, published_hedonic
from hmdemand.reference import ATTRIBUTES, MEAN_PRICES

np.set_printoptions(precision=3, suppress=True, linewidth=110)

profile = bundled_profile()
print("types:", profile.types)
print("fat grams per serving:", profile.column("fat_g"))

# Semi-log coefficients are percentage effects; multiplying by a price gives cents.
semilog = published_hedonic("semilog")
print("\nimplicit prices at the 2% mean price (cents):")
for name, value in zip(ATTRIBUTES, implicit_prices(semilog, MEAN_PRICES[0])):
    print(f"  {name:<22}{value:8.3f}")

for form in ("linear", "semilog"):
    va = value_added(published_hedonic(form), profile, MEAN_PRICES)
    mats, index = hedonic_set(va)
    print(f"\n{form} hedonic closeness:")
    print(mats["HEDONIC"].values)
    print("closeness index:", index)
    print("nearest neighbours (symmetrized):")
    print(mats["NN-HEDONIC"].values.astype(int))

# Soy stands apart in every form: its index is the smallest.

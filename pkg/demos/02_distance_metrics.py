"""Distance-metric closeness in product-characteristic space.

Contents are scaled by the largest content of any type, then turned into an
inverse distance 1 / (1 + ||delta||).
"""

import numpy as np

from hmdemand.metrics import closeness, content_delta, nearest_neighbor
from hmdemand.pipeline import distance_bundle

np.set_printoptions(precision=4, suppress=True)

bundle = distance_bundle()
chars = bundle.chars
print("fat   :", chars.fat)
print("organic:", chars.organic)
print("size  :", chars.size)

# By hand: 2% against 1% milk in fat space.
delta = content_delta(chars.fat[0], chars.fat[3], chars.fat.max())
print(f"\ndelta = {delta:.5f}, closeness = {closeness(np.atleast_1d(delta)):.5f}")
print("from the matrix:", bundle.dm["FAT"].values[0, 3])

for name in ("FAT", "ORGANIC", "FAT-ORGANIC", "FAT-ORGANIC-SIZE"):
    print(f"\n{name}")
    print(bundle.dm[name].values)

nn = nearest_neighbor(bundle.dm["FAT-ORGANIC"], symmetrize=False)
print("\nraw nearest neighbours in fat-organic space (one per row):")
print(nn.values.astype(int))
print("symmetrized:")
print(bundle.dm["NN-FAT-ORGANIC"].values.astype(int))

same = all(np.array_equal(bundle.dm["NN-FAT-ORGANIC"].values, bundle.dm[n].values)
           for n in ("NN-FAT-SIZE", "NN-FAT-ORGANIC-SIZE"))
print("all three NN spaces coincide:", same)

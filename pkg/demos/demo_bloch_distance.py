#!/usr/bin/env python3
"""How far is a Bloch function from the little Bloch space?

The Bloch seminorm is the sup of (1 - |w|^2) |f'(w)| over the disc, and the
distance to the little space equals the limit of that quantity as |w| -> 1.
We sweep a disc grid whose shells approach the boundary dyadically and read
the distance off the tail of the profile.

The model function log(1/(1-z)) has (1 - |w|^2)|f'(w)| = (1 + |w|) along the
positive axis, so its distance is exactly 2: it sits as far from the little
space as its own norm allows.  A polynomial, by contrast, has distance 0.
"""

import numpy as np

from oscillometer import SpaceDescriptor, build_family, distance_estimate, seminorm_sup
from oscillometer.builtins import log_singular, taylor_builtin

desc = SpaceDescriptor("bloch")
grid = build_family(desc)
print(f"disc grid: {len(grid)} sample points, shells down to "
      f"1 - 2^-{int(-np.log2(grid.remoteness.min()))}")

for name, f in [("log(1/(1-z))", log_singular()),
                ("z + z^3", taylor_builtin("poly", coeffs=[[1, 0], [0, 0], [1, 0]]))]:
    rep = seminorm_sup(grid, f)
    est, unc, profile = distance_estimate(desc, f, grid=grid)
    print(f"\n{name}:")
    print(f"  seminorm        {rep.value:.6f}  (attained near w = {rep.argmax_param.w:.4f})")
    print(f"  distance        {est:.6f} +- {unc:.4f}")
    print("  tail profile (scale -> sup over the remaining shells):")
    for t, s in zip(*profile.nonempty()):
        print(f"    {t:10.6f} -> {s:.6f}")

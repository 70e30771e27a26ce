#!/usr/bin/env python3
"""Conformal invariance of the Q_K-type seminorm, numerically.

The seminorm sup over automorphism centres of the weighted energy
integral |f'|^2 K(log 1/|phi_a|) dA does not change when f is composed with
a disc automorphism (and recentred).  The grid sup can only see this up to
its resolution; with the centre grid used here the deviation sits far below
the 2% budget.  The Cesaro-damped partial sums are contractions for the same
reason: they average rotations, and the centre grid is rotation-closed.
"""

import numpy as np

from oscillometer import SpaceDescriptor, build_family, seminorm_sup
from oscillometer.approx import fejer_taylor
from oscillometer.builtins import taylor_builtin
from oscillometer.spaces import compose_mobius

desc = SpaceDescriptor("qk")   # kernel K(t) = t
grid = build_family(desc)
f = taylor_builtin("monomial", degree=2)

base = seminorm_sup(grid, f).value
print(f"centre grid: {len(grid)} automorphism centres")
print(f"||z^2||           = {base:.6f}   (analytic value sqrt(pi/2) = {np.sqrt(np.pi/2):.6f})")

for a in (0.3 + 0.2j, -0.5 + 0.1j):
    moved = seminorm_sup(grid, compose_mobius(f, a)).value
    print(f"composed, centre {a}:  sup = {moved:.6f}   "
          f"deviation {abs(moved - base)/base:.2e}")

print("\nCesaro damping is contractive on the grid:")
for n in (2, 4, 8, 32):
    val = seminorm_sup(grid, fejer_taylor(f, n)).value
    print(f"  order {n:3d}: {val:.6f}  (ratio {val/base:.4f})")

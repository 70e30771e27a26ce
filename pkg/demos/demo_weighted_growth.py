#!/usr/bin/env python3
"""Weighted sup-norm spaces: growth against a vanishing weight.

With weight v = 1 - |z|^2 on the disc, a function belongs to the weighted
space when v|f| stays bounded, and to its little subspace when v|f| dies out
toward the boundary.  The Cauchy kernel 1/(1-z) grows exactly as fast as the
weight decays along the positive axis, so v|f| tends to 2 there: its norm
and its distance to the little space agree.  Dilated copies are bounded, so
they are little, and they realise the distance as upper bounds.
"""

from oscillometer import SpaceDescriptor, build_family, sandwich_check, seminorm_sup
from oscillometer.approx import dilation_family
from oscillometer.builtins import taylor_builtin

desc = SpaceDescriptor("weighted")
grid = build_family(desc)
f = taylor_builtin("cauchy_kernel")

rep = seminorm_sup(grid, f)
print(f"weighted grid: {len(grid)} nodes")
print(f"sup of (1-|z|^2)/|1-z|: {rep.value:.6f} at z = {rep.argmax_param.z:.6f}")

fam = dilation_family(f, levels=6)
report = sandwich_check(desc, f, fam.members,
                        ids=[f"r={r}" for r in fam.parameters], grid=grid)
print(f"distance estimate {report.limsup_estimate:.6f} +- {report.uncertainty:.4f}")
print(f"best dilated upper bound {report.best_upper:.6f}; "
      f"consistent = {report.sandwich_ok}")

#!/usr/bin/env python3
"""The norm-controlled approximation property, checked on real ladders.

Each space pairs with a family of approximants that (i) never exceed the
input's seminorm beyond a small slack and (ii) converge to the input in the
ambient norm.  This is what licenses the duality picture behind the distance
formula, and it is checkable: the report below records the member norms, the
ambient distances, and each member's own tail estimate.
"""

from oscillometer import SpaceDescriptor, assumption_check
from oscillometer.approx import (dilation_family, fejer_family,
                                 poisson_family, poisson_torus_family)
from oscillometer.builtins import circle_builtin, taylor_builtin, torus_builtin

ROWS = [
    ("circle oscillation + Poisson smoothing",
     SpaceDescriptor("bmo_circle", p=1.0, resolution={"n_samples": 131072}),
     circle_builtin("step_half", 131072),
     lambda f: poisson_family(f, levels=13)),
    ("rectangular oscillation + double Poisson",
     SpaceDescriptor("rect_bmo"),
     torus_builtin("triangle_tensor", 1024),
     lambda f: poisson_torus_family(f, levels=8)),
    ("Bloch + dilations",
     SpaceDescriptor("bloch"),
     taylor_builtin("poly", coeffs=[[1, 0], [0, 0], [1, 0]]),
     lambda f: dilation_family(f, levels=8)),
    ("invariant integral + Cesaro damping",
     SpaceDescriptor("qk"),
     taylor_builtin("poly", coeffs=[[1, 0], [0, 0], [1, 0]]),
     lambda f: fejer_family(f, levels=9)),
]

for label, desc, f, make in ROWS:
    rep = assumption_check(desc, f, make(f), slack=1e-3)
    rel = rep.x_distances[-1] / rep.x_reference
    print(f"{label}:")
    print(f"  verdict {'pass' if rep.verdict else 'FAIL'};"
          f" input norm {rep.input_norm:.5f}, member max {max(rep.member_norms):.5f}"
          f" (slack used {rep.slack_used:.2e})")
    print(f"  ambient distance of last member: {rel:.4f} relative")
    print(f"  members flagged as vanishing at grid resolution: "
          f"{sum(rep.little_flags)}/{len(rep.little_flags)}\n")

"""Rigidity on a ball sector: the overdetermined configuration in numbers.

On the quarter disk the torsion function is exactly (|x|^2 - 1)/2: the
boundary flux on the curved part equals the candidate radius R = 1, the
center lands at the vertex, and every deficit functional collapses to zero
at the mesh's own rate.
"""

import numpy as np

from conetorsion import (ConstantRadius, assemble, boundary_partition,
                         compute_center, deficits, identity_residual,
                         make_sector_domain, normal_derivative, normal_span,
                         solve, triangulate)

spec = make_sector_domain(np.pi / 2, ConstantRadius(1.0), 256)
span = normal_span(boundary_partition(spec))
print(f"cone opening pi/2, constant radius -> GAMMA1 normals span k = {span.k}")
print(f"{'h_max':>9} {'R':>10} {'min u_nu':>10} {'deficit_2':>11} "
      f"{'pseudodist':>11} {'rho_gap':>10} {'identity gap':>13}")

for h in (0.1, 0.05, 0.025, 0.0125):
    mesh = triangulate(spec, h)
    u = solve(assemble(mesh, degree=2))
    z = compute_center(u, span)           # forced to the vertex since k = 2
    rep = deficits(u, z, domain_id=f"quarter-h{h:g}")
    print(f"{rep.h_max:9.4f} {rep.R:10.6f} {rep.m:10.6f} {rep.deficit_2:11.3e} "
          f"{rep.pseudodistance:11.3e} {rep.rho_gap:10.3e} "
          f"{abs(rep.identity_lhs - rep.identity_rhs):13.3e}")

print()
mesh = triangulate(spec, 0.025)
u = solve(assemble(mesh, degree=2))
flux = normal_derivative(u)
print(f"flux on the arc at h=0.025: min {flux.values.min():.6f}, "
      f"max {flux.values.max():.6f}  (exact value 1)")
ident = identity_residual(u, compute_center(u, normal_span(boundary_partition(spec))))
print(f"identity: lhs {ident.lhs:.3e}, rhs {ident.rhs:.3e}, "
      f"cone-boundary term {ident.gamma1_term:+.3e} (nonnegative by convexity)")

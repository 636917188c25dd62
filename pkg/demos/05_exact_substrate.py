#!/usr/bin/env python3
"""The exact substrate: certified rational LPs and polyhedral cone algebra.

Everything the certifiers conclude reduces to these two engines: a simplex
over Fractions whose every outcome carries a checkable certificate, and a
double-description converter whose outputs are canonical (primitive,
lexicographically sorted) generator lists.
"""
from mpec_cq.exactmath import LpProblem, lp_solve, mat, vec
from mpec_cq.polyhedra import PolyCone, polar, set_equal

print("=" * 64)
print("certified LP outcomes")
print("=" * 64)
opt = lp_solve(LpProblem(objective=vec([1, 0]),
                         A=mat([[-1, 0], [0, -1]]), b=vec([0, 0]),
                         C=mat([[1, 1]]), d=vec([1])))
print(f"  max l1 over the multiplier segment: x = "
      f"{[str(v) for v in opt.x]}, value = {opt.value}")
print(f"  dual certificate: ineq {[str(v) for v in opt.dual_ineq]}, "
      f"eq {[str(v) for v in opt.dual_eq]} (gap exactly zero)")

inf = lp_solve(LpProblem(objective=vec([0]), A=mat([[1], [-1]]),
                         b=vec([-1, -1])))
print(f"  contradictory bounds: {inf.status.value}, Farkas vector "
      f"{[str(v) for v in inf.farkas]}")

unb = lp_solve(LpProblem(objective=vec([1]), A=mat([[-1]]), b=vec([0])))
print(f"  free improvement: {unb.status.value}, ray "
      f"{[str(v) for v in unb.ray]}")

print()
print("=" * 64)
print("double description and polarity")
print("=" * 64)
halfspace = PolyCone(A=mat([[0, 0, 1]]))
rays, lin = halfspace.generators()
print(f"  {{v : v3 <= 0}}: rays {[[str(x) for x in r] for r in rays]}, "
      f"lineality {[[str(x) for x in l] for l in lin]}")
p = polar(halfspace)
prays, plin = p.generators()
print(f"  its polar: rays {[[str(x) for x in r] for r in prays]}, "
      f"lineality {[[str(x) for x in l] for l in plin]}")
print(f"  polar(polar(K)) == K: {set_equal(polar(p), halfspace)}")

ice_cream_free = PolyCone.from_generators(
    rays=[vec([1, 0]), vec([1, 1]), vec([1, 2])])
rays2, _ = ice_cream_free.generators()
print(f"  cone of three coplanar rays keeps only the extreme two: "
      f"{[[str(x) for x in r] for r in rays2]}")

#!/usr/bin/env python3
"""Why the complementarity reformulation misbehaves under nonunique multipliers.

At the reference point every multiplier in the segment gives a feasible
triple, and: MPCC-MFCQ fails on every branch, MPCC-LICQ fails, weak
stationarity rejects every multiplier except the balanced one, and a
direction inside the linearized cone carries distance ratios bounded away
from zero -- numerical evidence that even the Guignard-type CQ fails.
"""
from pathlib import Path

from mpec_cq.exactmath import vec
from mpec_cq.model import load_problem
from mpec_cq.mpccdiag import (
    gcq_evidence,
    mpcc_index_sets,
    mpcc_licq_check,
    mpcc_mfcq_check,
    mpec_linearized_cone,
    stationarity_check,
)

HERE = Path(__file__).resolve().parent
problem = load_problem(str(HERE.parent / "problems" / "ex41.toml"))
HALF = vec(["1/2", "1/2"])

print("=" * 64)
print("index sets and branch-wise MPCC-MFCQ")
print("=" * 64)
for lam in (HALF, vec([1, 0])):
    pt = mpcc_index_sets(problem, lam)
    rep = mpcc_mfcq_check(problem, lam)
    print(f"  lambda = {[str(x) for x in lam]}: I_g={[i+1 for i in pt.I_g]} "
          f"I_0={[i+1 for i in pt.I_0]} I_G={[i+1 for i in pt.I_G]}")
    for br, verdict in rep.branches:
        print(f"    branch beta1={[i+1 for i in br.beta1]} "
              f"beta2={[i+1 for i in br.beta2]}: {verdict.status.value}"
              + (" (second multiplier defeats every branch)"
                 if rep.via_second_multiplier else ""))
    licq = mpcc_licq_check(problem, lam)
    print(f"    MPCC-LICQ: {licq.status.value}")

print()
print("=" * 64)
print("weak stationarity across the multiplier segment")
print("=" * 64)
for lam in (vec([1, 0]), vec(["7/10", "3/10"]), HALF, vec([0, 1])):
    res = stationarity_check(problem, lam, "W")
    print(f"  lambda = {[str(x) for x in lam]}: W-stationary system "
          f"{'feasible' if res.feasible else 'infeasible'}")

print()
print("=" * 64)
print("linearized cone vs. actual tangent cone (evidence)")
print("=" * 64)
cone = mpec_linearized_cone(problem, HALF)
print(f"  linearized cone has {len(cone.pieces)} piece(s)")
d_gap = vec([3, 0, 2, 0, 0, 0, 0])
d_tan = vec([3, 3, 2, 2, 0, 0, 0])
for d in (d_gap, d_tan):
    ev = gcq_evidence(problem, HALF, d, budget=120, seed=0)
    ratios = ", ".join(f"{r:.2e}" for r in ev.ratios)
    print(f"  d = {[str(x) for x in d]}:")
    print(f"    in linearized cone: {ev.in_linearized_cone}; "
          f"ratios dist/t = [{ratios}]")
    print(f"    tag: {ev.tag}")

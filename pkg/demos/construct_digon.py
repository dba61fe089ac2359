# Build a high-girth digraph that still maps onto the digon, then look at it.
from girthforge import ModelParams, construct, derive_f, digon, girth, verify_theorem1
from girthforge.construction import recheck_witness

D = digon()
params = ModelParams(n=8, ell=4, k=2, eps=0.06, seed=42)
art = construct(D, params)

print("attempts:", art.attempts)
print("arcs in D':", art.Dprime.arcs.size, " removed:", len(art.M))
print("girth of D*:", girth(art.Dstar))
print("psi is the block projection:", art.psi.image)

# psi pulls back to the identity on the pattern
print("f from psi:", derive_f(art.psi, art, D).image)

# small codomains: does D* see them the way D does?
report = verify_theorem1(art, k=2)
for entry in report.part_ii:
    print(entry["codomain"], "D->C", entry["hom_D"], "D*->C", entry["hom_Dstar"], entry["status"])

# at this size some entries fail; each failure carries a checkable witness
bad = report.failures()
print(len(bad), "failures,", sum(recheck_witness(art, e) for e in bad), "witnesses confirmed")

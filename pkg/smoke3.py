"""Mallows + scenario smoke checks."""
import math
import time
from fractions import Fraction
from itertools import permutations

from fairconsensus.mallows import (
    MallowsConfig, SplitMix64, build_scenario, derive_seed,
    iter_ranking_batches, sample_mallows, scenario_targets,
)
from fairconsensus.metrics import evaluate_fairness, kendall_tau, FairnessSpec
from fairconsensus.model import CandidateTable, Ranking, build_group_index

t0 = time.time()

# -- determinism & substream independence --------------------------------
modal = Ranking(tuple(f"c{i}" for i in range(8)))
cfg = MallowsConfig(modal, 0.5, 200, seed=42)
a = sample_mallows(cfg)
b = sample_mallows(cfg)
assert [r.order for r in a.rankings] == [r.order for r in b.rankings]

# batch size must not matter
rows_small = [tuple(r) for batch in iter_ranking_batches(range(8), 0.5, 200, 42, batch_size=7) for r in batch.tolist()]
rows_big = [tuple(r) for batch in iter_ranking_batches(range(8), 0.5, 200, 42, batch_size=4096) for r in batch.tolist()]
assert rows_small == rows_big
print("determinism/batching OK")

# -- theta=0 uniformity: mean KT approx n(n-1)/4 --------------------------
cfg0 = MallowsConfig(modal, 0.0, 4000, seed=7)
s0 = sample_mallows(cfg0)
mean_kt = sum(kendall_tau(r, modal) for r in s0.rankings) / 4000
expected = 8 * 7 / 4
assert abs(mean_kt - expected) < 0.35, (mean_kt, expected)
print(f"theta=0 mean KT {mean_kt:.2f} ~ {expected} OK")

# -- high theta concentrates ----------------------------------------------
cfgh = MallowsConfig(modal, 10.0, 500, seed=9)
sh = sample_mallows(cfgh)
ident = sum(1 for r in sh.rankings if r.order == modal.order)
assert ident >= 495, ident
print(f"theta=10 identity {ident}/500 OK")

# -- exact distribution at n=4 against enumeration ------------------------
n, theta = 4, 0.6
m4 = Ranking(tuple("abcd"))
probs = {}
for perm in permutations(m4.order):
    d = kendall_tau(Ranking(perm), m4)
    probs[perm] = math.exp(-theta * d)
z = sum(probs.values())
probs = {k: v / z for k, v in probs.items()}
cfg4 = MallowsConfig(m4, theta, 60000, seed=11)
counts = {}
for r in sample_mallows(cfg4).rankings:
    counts[r.order] = counts.get(r.order, 0) + 1
chi2 = sum((counts.get(k, 0) - 60000 * p) ** 2 / (60000 * p) for k, p in probs.items())
# 23 dof, alpha=0.001 critical ~ 49.7
assert chi2 < 49.7, chi2
print(f"n=4 chi2 {chi2:.1f} < 49.7 OK")

# mean KT monotone in theta
means = []
for th in (0.2, 0.6, 1.0):
    s = sample_mallows(MallowsConfig(m4, th, 20000, seed=13))
    means.append(sum(kendall_tau(r, m4) for r in s.rankings) / 20000)
assert means[0] > means[1] > means[2], means
print(f"mean KT monotone {['%.3f' % m for m in means]} OK")

# -- scenario construction: 90-candidate Race x Gender population ----------
def grid_table(domains, per_cell):
    names = list(domains)
    ids, rows = [], []
    cells = [[]]
    for name in names:
        cells = [c + [v] for c in cells for v in domains[name]]
    k = 0
    for cell in cells:
        for _ in range(per_cell):
            ids.append(f"c{k:04d}")
            rows.append(tuple(cell))
            k += 1
    return CandidateTable(tuple(ids), tuple(names), tuple(rows))

t90 = grid_table({"Race": ["r1", "r2", "r3", "r4", "r5"], "Gender": ["g1", "g2", "g3"]}, 6)
idx90 = build_group_index(t90)
t24 = grid_table({"Race": ["r1", "r2", "r3"], "Gender": ["g1", "g2"]}, 4)
idx24 = build_group_index(t24)

for label, idx in (("n=90", idx90), ("n=24", idx24)):
    table = idx.table
    for preset in ("low-fair", "medium-fair", "high-fair"):
        tg = scenario_targets(preset, table.attributes)
        t1 = time.time()
        r = build_scenario(idx, tg, seed=123)
        spec = FairnessSpec(delta_default=Fraction(1), intersection_attrs="all")
        rep = evaluate_fairness(r, spec, idx)
        arps = {a: rep.attribute_spreads[a] for a in table.attributes}
        irp = rep.intersection_spread
        for aname, (target, tol) in tg.arp.items():
            assert max(Fraction(0), target - tol) <= arps[aname] <= min(Fraction(1), target + tol), (label, preset, aname, arps[aname])
        ti, tt = tg.irp
        assert max(Fraction(0), ti - tt) <= irp <= min(Fraction(1), ti + tt), (label, preset, irp)
        print(f"{label} {preset}: ARP {[float(arps[a]) for a in table.attributes]} IRP {float(irp):.3f} ({time.time()-t1:.2f}s) OK")

# determinism of scenario
r2 = build_scenario(idx90, scenario_targets("medium-fair", t90.attributes), seed=123)
r3 = build_scenario(idx90, scenario_targets("medium-fair", t90.attributes), seed=123)
assert r2.order == r3.order
print("scenario determinism OK")

print(f"all mallows smoke OK in {time.time()-t0:.1f}s")

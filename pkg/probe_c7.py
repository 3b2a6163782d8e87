"""Solve per-cell block offsets for the wide-case modal, then time the pipeline."""
import time
from fractions import Fraction

from fairconsensus import (
    FairnessSpec, Ranking, RepairStalled, borda_streamed, evaluate_fairness,
    iter_ranking_batches, repair_ranking,
)
from tests.helpers import grid_table


def offset_modal(index, offs):
    """Each intersection cell is a contiguous run shifted by offs[cell] cell-sizes."""
    table = index.table
    inter = index.intersection
    cell_of = inter.gid
    scale = [len(g.members) for g in inter.groups]
    base = [offs[c] * scale[c] for c in range(len(scale))]
    seen = [0] * len(scale)
    keyed = []
    for i in range(table.n):
        c = cell_of[i]
        keyed.append((base[c] + seen[c], c, i))
        seen[c] += 1
    keyed.sort()
    return Ranking(tuple(table.candidate_ids[i] for _, _, i in keyed))


def spreads(index, spec, offs):
    rep = evaluate_fairness(offset_modal(index, offs), spec, index)
    return (
        float(rep.attribute_spreads["race"]),
        float(rep.attribute_spreads["gender"]),
        float(rep.intersection_spread),
    )


TARGET = (0.31, 0.44, 0.45)


def loss(vals):
    return max(abs(v - t) for v, t in zip(vals, TARGET))


spec = FairnessSpec(delta_default=Fraction(33, 100))

# --- stage 1: coordinate descent at n=2000 ---
small = grid_table(2000, 2, 2)
sidx = spec.build_index(small)
x = [0.0, 0.25, 0.17, 0.42]  # cells (r0,g0),(r0,g1),(r1,g0),(r1,g1); cell 0 pinned
best = loss(spreads(sidx, spec, x))
for step in (0.2, 0.1, 0.05, 0.02, 0.01, 0.005):
    improved = True
    while improved:
        improved = False
        for c in (1, 2, 3):
            for sgn in (1, -1):
                trial = list(x)
                trial[c] = max(0.0, trial[c] + sgn * step)
                val = loss(spreads(sidx, spec, trial))
                if val < best - 1e-9:
                    best, x = val, trial
                    improved = True
print(f"offsets={x} loss={best:.4f} spreads={spreads(sidx, spec, x)}", flush=True)

# --- stage 2: verify at n=10000 and time the pipeline ---
table = grid_table(10_000, 2, 2)
index = spec.build_index(table)
modal = offset_modal(index, x)
print(f"n=10000 modal spreads: {spreads(index, spec, x)}", flush=True)

t0 = time.perf_counter()
consensus = borda_streamed(
    iter_ranking_batches(modal.to_indices(table), 0.6, 100, seed=5, batch_size=100),
    table,
)
print(f"borda {time.perf_counter()-t0:.1f}s", flush=True)

rep = evaluate_fairness(consensus, spec, index)
print(f"pre-repair: race={float(rep.attribute_spreads['race']):.4f} "
      f"gender={float(rep.attribute_spreads['gender']):.4f} "
      f"irp={float(rep.intersection_spread):.4f}", flush=True)

for cap in (20_000, 100_000, 400_000):
    t0 = time.perf_counter()
    try:
        repaired, trace = repair_ranking(
            consensus, spec, index, max_swaps=cap, collect_swaps=False
        )
    except RepairStalled as exc:
        print(f"cap={cap}: stalled after {time.perf_counter()-t0:.1f}s ({exc})",
              flush=True)
        continue
    dt = time.perf_counter() - t0
    ok = evaluate_fairness(repaired, spec, index).satisfied
    print(f"cap={cap}: done in {dt:.1f}s iterations={trace.iterations} "
          f"satisfied={ok}", flush=True)
    break

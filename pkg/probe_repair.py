"""Probe: does attr-only repair now converge on the desk instance?"""
import time
from fractions import Fraction

from fairconsensus import (
    FairnessSpec,
    MallowsConfig,
    RankingSet,
    build_precedence_matrix,
    build_scenario,
    copeland,
    derive_seed,
    kemeny_exact,
    repair_ranking,
    sample_mallows,
    scenario_targets,
    schulze,
)
from fairconsensus.consensus import _borda_order
from fairconsensus.model import Ranking
from tests.helpers import grid_table

table = grid_table(24, 3, 2)
spec_report = FairnessSpec(delta_default=Fraction(1, 10))
report_index = spec_report.build_index(table)
modal = build_scenario(report_index, scenario_targets("low-fair", ("race", "gender")), 7)

D = Fraction(1, 10)
spec_attrs = FairnessSpec(delta_default=D, intersection_attrs=None)
idx_attrs = spec_attrs.build_index(table)
spec_full = FairnessSpec(delta_default=D)
idx_full = spec_full.build_index(table)

for ti, theta in enumerate((0.1, 0.5, 1.0)):
    rs = sample_mallows(MallowsConfig(modal, theta, 25, derive_seed(23, ti, 0)))
    pm = build_precedence_matrix(rs, table)
    base = kemeny_exact(pm)
    wm = [[pm.matrix[a][b] for b in range(24)] for a in range(24)]
    seeds = [
        base.ranking,
        Ranking(tuple(pm.ids[i] for i in _borda_order(wm))),
        copeland(pm),
        schulze(pm),
    ]
    for name, spec, idx in (("attrs", spec_attrs, idx_attrs), ("full", spec_full, idx_full)):
        for si, seed_r in enumerate(seeds):
            t0 = time.perf_counter()
            try:
                fixed, trace = repair_ranking(seed_r, spec, idx)
                ms = (time.perf_counter() - t0) * 1000
                print(f"theta={theta} {name} seed{si}: ok {trace.iterations} swaps {ms:.0f}ms satisfied={trace.final_report.satisfied}")
            except Exception as e:
                ms = (time.perf_counter() - t0) * 1000
                print(f"theta={theta} {name} seed{si}: {type(e).__name__} {ms:.0f}ms: {e}")

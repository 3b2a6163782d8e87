"""Inter-only leg anatomy: seed spreads and cap sweep."""
import time
from fractions import Fraction

from fairconsensus import (
    FairnessSpec,
    MallowsConfig,
    build_precedence_matrix,
    build_scenario,
    copeland,
    derive_seed,
    evaluate_fairness,
    fair_kemeny,
    kemeny_exact,
    pd_loss,
    repair_ranking,
    sample_mallows,
    scenario_targets,
    schulze,
)
from fairconsensus.consensus import _borda_order, ranking_objective
from fairconsensus.model import Ranking
from tests.helpers import grid_table

table = grid_table(24, 3, 2)
D = Fraction(1, 10)
report_spec = FairnessSpec(delta_default=D)
report_index = report_spec.build_index(table)
modal = build_scenario(report_index, scenario_targets("low-fair", ("race", "gender")), 7)
spec_inter = FairnessSpec(delta_default=D, constrain_attributes=False)
idx_inter = spec_inter.build_index(table)

def spreads(r):
    rep = evaluate_fairness(r, report_spec, report_index)
    return (f"race={float(rep.attribute_spreads['race']):.3f} "
            f"gender={float(rep.attribute_spreads['gender']):.3f} "
            f"irp={float(rep.intersection_spread):.3f}")

for ti, theta in enumerate((0.1, 0.5, 1.0)):
    rs = sample_mallows(MallowsConfig(modal, theta, 25, derive_seed(23, ti, 0)))
    pm = build_precedence_matrix(rs, table)
    wm = pm.cost_lists()
    base = kemeny_exact(pm)
    print(f"theta={theta}: kemeny obj={base.objective} {spreads(base.ranking)}")
    seeds = [
        ("kemeny ", base.ranking),
        ("borda  ", Ranking(tuple(pm.ids[i] for i in _borda_order(wm)))),
        ("copelnd", copeland(pm)),
        ("schulze", schulze(pm)),
    ]
    for name, seed in seeds:
        fixed, trace = repair_ranking(seed, spec_inter, idx_inter)
        obj = ranking_objective(wm, fixed.to_indices(table))
        print(f"  seed {name}: obj={obj} {spreads(fixed)} ({trace.iterations} swaps)")
    for cap in (150_000, 600_000, 2_000_000):
        t0 = time.perf_counter()
        sol = fair_kemeny(pm, spec_inter, idx_inter, max_nodes=cap)
        dt = time.perf_counter() - t0
        print(f"  cap {cap}: obj={sol.objective} opt={sol.optimal} {spreads(sol.ranking)} ({dt:.1f}s)")

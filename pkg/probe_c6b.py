"""Criterion-6 deep probe: per-pair rates, larger T, and paper-scale n=90."""

import time
from fractions import Fraction

from fairconsensus import (
    FairnessSpec,
    MallowsConfig,
    build_scenario,
    derive_seed,
    fair_pipeline,
    pd_loss,
    sample_mallows,
    scenario_targets,
)
from tests.helpers import grid_table

BASE_SEED = 23
MODAL_SEED = 7
THETAS = (0.1, 0.5, 1.0)
D = Fraction(1, 10)


def run(tag, n, fv, sv, voters, trials):
    table = grid_table(n, fv, sv)
    spec = FairnessSpec(delta_default=D)
    index = spec.build_index(table)
    targets = scenario_targets("low-fair", ("race", "gender"))
    modal = build_scenario(index, targets, MODAL_SEED)
    chain4 = chain2 = total = 0
    pair = {"fc<=fb": 0, "fs<=fb": 0}
    t0 = time.time()
    for ti, theta in enumerate(THETAS):
        for trial in range(trials):
            rs = sample_mallows(
                MallowsConfig(modal, theta, voters, derive_seed(BASE_SEED, ti, trial))
            )
            pls = {}
            for m in ("borda", "copeland", "schulze"):
                pr = fair_pipeline(m, rs, spec, index, collect_swaps=False)
                pls[m] = pd_loss(rs, pr.ranking)
            a = pls["copeland"] <= pls["borda"]
            b = pls["schulze"] <= pls["borda"]
            pair["fc<=fb"] += a
            pair["fs<=fb"] += b
            chain4 += a and b
            chain2 += b
            total += 1
    print(
        f"{tag} n={n} |R|={voters} T={trials}: chain4 {chain4}/{total} "
        f"({chain4/total:.0%}) chain2(fs<=fb) {chain2}/{total} ({chain2/total:.0%}) "
        f"pairs={pair} ({time.time()-t0:.0f}s)",
        flush=True,
    )


run("desk", 24, 3, 2, 150, 15)
run("desk", 24, 3, 2, 150, 20)
run("paper", 90, 5, 3, 150, 5)
run("paper", 90, 5, 3, 150, 10)

"""Final criterion-6 probe: per-(theta, trial) chain, FK inequalities skipped.

FK <= FC/FS/FB holds structurally (repaired polynomial orders seed the search),
so the chain outcome depends only on fc<=fb and fs<=fb. Measures:
  - variant A: fixed low-fair modal (MODAL_SEED), trial = fresh sample draw
  - variant B: fresh low-fair modal per trial
at |R| in {25, 100, 150} and TRIALS in {5, 10}.
"""

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

table = grid_table(24, 3, 2)
spec = FairnessSpec(delta_default=D)
index = spec.build_index(table)
targets = scenario_targets("low-fair", ("race", "gender"))
modal_a = build_scenario(index, targets, MODAL_SEED)
modal_b_cache = {}


def modal_b(trial):
    if trial not in modal_b_cache:
        modal_b_cache[trial] = build_scenario(
            index, targets, derive_seed(MODAL_SEED, 91, trial)
        )
    return modal_b_cache[trial]


def run(name, voters, trials, modal_fn):
    ok = 0
    total = 0
    t0 = time.time()
    detail = []
    for ti, theta in enumerate(THETAS):
        for trial in range(trials):
            rs = sample_mallows(
                MallowsConfig(
                    modal_fn(trial), theta, voters, derive_seed(BASE_SEED, ti, trial)
                )
            )
            pls = {}
            for m in ("borda", "copeland", "schulze"):
                pr = fair_pipeline(m, rs, spec, index, collect_swaps=False)
                pls[m] = pd_loss(rs, pr.ranking)
            good = pls["copeland"] <= pls["borda"] and pls["schulze"] <= pls["borda"]
            total += 1
            ok += good
            if not good:
                detail.append(f"{theta}/{trial}")
    rate = ok / total
    need = -(-total * 4 // 5)
    print(
        f"{name} |R|={voters} T={trials}: chain {ok}/{total} ({rate:.0%}) "
        f"{'PASS' if ok >= need else 'fail'} misses=[{', '.join(detail)}] "
        f"({time.time()-t0:.0f}s)",
        flush=True,
    )


for voters in (25, 100, 150):
    for trials in (5, 10):
        run("A", voters, trials, lambda trial: modal_a)
for voters in (100, 150):
    for trials in (5, 10):
        run("B", voters, trials, modal_b)

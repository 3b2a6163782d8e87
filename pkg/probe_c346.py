"""Acceptance empirics prototype: criteria 3 (scope ablation), 4 (PoF curve), 6 (method order)."""
import time
from fractions import Fraction

from fairconsensus import (
    FairnessSpec,
    MallowsConfig,
    build_precedence_matrix,
    build_scenario,
    derive_seed,
    evaluate_fairness,
    fair_kemeny,
    fair_pipeline,
    kemeny_exact,
    pd_loss,
    sample_mallows,
    scenario_targets,
)
from tests.helpers import grid_table

BASE_SEED = 23
MODAL_SEED = 7
VOTERS = 25
CAP = 150_000
CAP_C3 = 600_000
THETAS = (0.1, 0.5, 1.0)
D = Fraction(1, 10)

table = grid_table(24, 3, 2)
report_spec = FairnessSpec(delta_default=D)
report_index = report_spec.build_index(table)
modal = build_scenario(report_index, scenario_targets("low-fair", ("race", "gender")), MODAL_SEED)

spec_full = FairnessSpec(delta_default=D)
spec_attrs = FairnessSpec(delta_default=D, intersection_attrs=None)
spec_inter = FairnessSpec(delta_default=D, constrain_attributes=False)
idx_full = spec_full.build_index(table)
idx_attrs = spec_attrs.build_index(table)
idx_inter = spec_inter.build_index(table)

_pm_cache = {}
_base_cache = {}

def pm_for(ti, trial):
    key = (ti, trial)
    if key not in _pm_cache:
        rs = sample_mallows(MallowsConfig(modal, THETAS[ti], VOTERS, derive_seed(BASE_SEED, ti, trial)))
        _pm_cache[key] = (rs, build_precedence_matrix(rs, table))
    return _pm_cache[key]

def base_for(ti, trial):
    key = (ti, trial)
    if key not in _base_cache:
        _, pm = pm_for(ti, trial)
        _base_cache[key] = kemeny_exact(pm)
    return _base_cache[key]

def spreads(ranking):
    rep = evaluate_fairness(ranking, report_spec, report_index)
    return (rep.attribute_spreads["race"], rep.attribute_spreads["gender"], rep.intersection_spread)

def fmt(sp):
    return f"race={float(sp[0]):.3f} gender={float(sp[1]):.3f} irp={float(sp[2]):.3f}"

# ---- criterion 3: scope ablation at delta=0.1, trial 0 ---------------------
print("== criterion 3 ==")
c3_ok = True
for ti, theta in enumerate(THETAS):
    _, pm = pm_for(ti, 0)
    base = base_for(ti, 0)
    sp_k = spreads(base.ranking)
    t0 = time.perf_counter()
    sol_full = fair_kemeny(pm, spec_full, idx_full, max_nodes=CAP_C3)
    t_full = time.perf_counter() - t0
    sp_f = spreads(sol_full.ranking)
    t0 = time.perf_counter()
    sol_attrs = fair_kemeny(pm, spec_attrs, idx_attrs, max_nodes=CAP_C3)
    t_attrs = time.perf_counter() - t0
    sp_a = spreads(sol_attrs.ranking)
    t0 = time.perf_counter()
    sol_inter = fair_kemeny(pm, spec_inter, idx_inter, max_nodes=CAP_C3)
    t_inter = time.perf_counter() - t0
    sp_i = spreads(sol_inter.ranking)
    print(f"theta={theta}")
    print(f"  kemeny : {fmt(sp_k)}")
    print(f"  full   : {fmt(sp_f)}  opt={sol_full.optimal} ({t_full:.1f}s)")
    print(f"  attrs  : {fmt(sp_a)}  opt={sol_attrs.optimal} ({t_attrs:.1f}s)")
    print(f"  inter  : {fmt(sp_i)}  opt={sol_inter.optimal} ({t_inter:.1f}s)")
    checks = {
        "full all<=D": sp_f[0] <= D and sp_f[1] <= D and sp_f[2] <= D,
        "attrs irp>D": sp_a[2] > D,
        "inter some arp>D": sp_i[0] > D or sp_i[1] > D,
        "kemeny exceeds": sp_k[0] > D or sp_k[1] > D or sp_k[2] > D,
    }
    for name, ok in checks.items():
        if not ok:
            c3_ok = False
            print(f"  !! FAILED: {name}")
print(f"criterion 3: {'PASS' if c3_ok else 'FAIL'}")

# ---- criterion 4: PoF weakly decreasing over delta grid --------------------
print("== criterion 4 ==")
DELTAS = [Fraction(k, 10) for k in range(1, 11)]
c4_ok = True
for ti, theta in enumerate(THETAS):
    _, pm = pm_for(ti, 0)
    base = base_for(ti, 0)
    rs, _ = pm_for(ti, 0)
    pofs = []
    warm = None
    t0 = time.perf_counter()
    for d in DELTAS:
        sd = FairnessSpec(delta_default=d)
        sol = fair_kemeny(pm, sd, idx_full, max_nodes=CAP,
                          warm_starts=() if warm is None else (warm,))
        warm = sol.ranking
        pofs.append(pd_loss(rs, sol.ranking) - pd_loss(rs, base.ranking))
    elapsed = time.perf_counter() - t0
    mono = all(pofs[i] >= pofs[i + 1] for i in range(len(pofs) - 1))
    nonneg = all(p >= 0 for p in pofs)
    print(f"theta={theta}: {[f'{float(p):.4f}' for p in pofs]} mono={mono} nonneg={nonneg} ({elapsed:.0f}s)")
    if not (mono and nonneg):
        c4_ok = False
print(f"criterion 4: {'PASS' if c4_ok else 'FAIL'}")

# ---- criterion 6: mean pd order FK <= FC,FS <= FB --------------------------
print("== criterion 6 ==")
TRIALS = 5
good = 0
total = 0
for ti, theta in enumerate(THETAS):
    for trial in range(TRIALS):
        rs, pm = pm_for(ti, trial)
        fk = fair_kemeny(pm, spec_full, idx_full, max_nodes=CAP)
        pls = {}
        pls["fk"] = pd_loss(rs, fk.ranking)
        for m in ("borda", "copeland", "schulze"):
            pr = fair_pipeline(m, rs, spec_full, idx_full)
            pls[m] = pd_loss(rs, pr.ranking)
        ok = pls["fk"] <= pls["copeland"] and pls["fk"] <= pls["schulze"] and \
             pls["copeland"] <= pls["borda"] and pls["schulze"] <= pls["borda"]
        total += 1
        good += ok
        print(f"theta={theta} trial={trial}: fk={float(pls['fk']):.4f} fb={float(pls['borda']):.4f} "
              f"fc={float(pls['copeland']):.4f} fs={float(pls['schulze']):.4f} {'ok' if ok else 'VIOLATED'}")
print(f"criterion 6: {good}/{total} trials ordered ({'PASS' if good >= 0.8 * total else 'FAIL'})")

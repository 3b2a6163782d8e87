"""Fairness-constrained consensus: exact solver, swap repair, pipelines.

Three routes to a fair consensus ranking:

* ``fair_kemeny``: the exact branch-and-bound search with fairness pruning;
  minimum disagreement among ALL rankings satisfying the spec.
* ``repair_ranking``: post-process any ranking with targeted swaps until
  every enabled score is within threshold.
* ``fair_pipeline``: run a polynomial unaware method, then repair.

``brute_force_fair_kemeny`` is the independent enumeration oracle the exact
solver is tested against.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Literal, Sequence

from .consensus import (
    DEFAULT_MAX_EXACT_N,
    GroupConstraint,
    KemenySolution,
    _borda_order,
    borda,
    copeland,
    kemeny_exact,
    pick_fairest,
    prefix_branch_and_bound,
    ranking_objective,
    resolve_budget_ms,
    schulze,
)
from .errors import (
    BudgetExceeded,
    InconsistentCandidateSet,
    Infeasible,
    InstanceTooLarge,
    RepairStalled,
)
from .metrics import (
    FairnessReport,
    FairnessSpec,
    evaluate_fairness,
    favored_pair_counts,
    pd_loss,
)
from .model import (
    Entity,
    GroupIndex,
    PrecedenceMatrix,
    Ranking,
    RankingSet,
    build_precedence_matrix,
)

PipelineMethod = Literal["borda", "copeland", "schulze", "pick-fairest"]


def enabled_entities(
    spec: FairnessSpec, index: GroupIndex
) -> list[tuple[Entity, Fraction]]:
    """Entities the spec actually constrains, with their thresholds.

    Skips entities with a single non-empty group (nothing to compare) and
    thresholds of 1 (vacuous: a spread never exceeds 1).
    """
    chosen: list[tuple[Entity, Fraction]] = []
    entities: list[Entity] = []
    if spec.constrain_attributes:
        entities.extend(index.attribute_entities)
    if index.intersection is not None and spec.intersection_attrs is not None:
        entities.append(index.intersection)
    for entity in entities:
        delta = spec.delta_for(entity.name)
        if len(entity.groups) >= 2 and delta < 1:
            chosen.append((entity, delta))
    return chosen


def _constraints(pairs: Sequence[tuple[Entity, Fraction]]) -> list[GroupConstraint]:
    return [
        GroupConstraint(
            entity.name,
            entity.gid,
            tuple(g.size for g in entity.groups),
            tuple(g.mixed_pairs for g in entity.groups),
            delta.numerator,
            delta.denominator,
        )
        for entity, delta in pairs
    ]


def _order_satisfies(
    order: Sequence[int], pairs: Sequence[tuple[Entity, Fraction]]
) -> bool:
    """Exact integer check that an index order meets every threshold."""
    for entity, delta in pairs:
        favored = favored_pair_counts(order, entity.gid, len(entity.groups))
        omegas = [g.mixed_pairs for g in entity.groups]
        hi_n, hi_d = favored[0], omegas[0]
        lo_n, lo_d = favored[0], omegas[0]
        for g in range(1, len(favored)):
            if favored[g] * hi_d > hi_n * omegas[g]:
                hi_n, hi_d = favored[g], omegas[g]
            if favored[g] * lo_d < lo_n * omegas[g]:
                lo_n, lo_d = favored[g], omegas[g]
        if (hi_n * lo_d - lo_n * hi_d) * delta.denominator > (
            delta.numerator * hi_d * lo_d
        ):
            return False
    return True


class _PositionSet:
    """Fenwick tree over 1-based ranking positions for one group's members."""

    __slots__ = ("n", "tree", "count", "_top_bit")

    def __init__(self, n: int) -> None:
        self.n = n
        self.tree = [0] * (n + 1)
        self.count = 0
        top = 1
        while top * 2 <= n:
            top *= 2
        self._top_bit = top

    def add(self, pos: int) -> None:
        self.count += 1
        while pos <= self.n:
            self.tree[pos] += 1
            pos += pos & -pos

    def remove(self, pos: int) -> None:
        self.count -= 1
        while pos <= self.n:
            self.tree[pos] -= 1
            pos += pos & -pos

    def rank(self, pos: int) -> int:
        """Members at positions <= pos."""
        total = 0
        while pos > 0:
            total += self.tree[pos]
            pos -= pos & -pos
        return total

    def kth(self, k: int) -> int:
        """Position of the k-th highest-placed member (k is 1-based)."""
        pos = 0
        bit = self._top_bit
        tree = self.tree
        while bit:
            nxt = pos + bit
            if nxt <= self.n and tree[nxt] < k:
                pos = nxt
                k -= tree[nxt]
            bit >>= 1
        return pos + 1

    def max_pos(self) -> int:
        return self.kth(self.count)

    def min_pos_above(self, pos: int) -> int | None:
        k = self.rank(pos) + 1
        if k > self.count:
            return None
        return self.kth(k)

    def max_pos_below(self, pos: int) -> int | None:
        k = self.rank(pos - 1)
        if k == 0:
            return None
        return self.kth(k)


@dataclass(frozen=True)
class RepairTrace:
    """What the swap repair did: each swap as (demoted id, promoted id,
    entity corrected), total iterations, and the final fairness report."""

    swaps: tuple[tuple[str, str, str], ...]
    iterations: int
    final_report: FairnessReport


def repair_ranking(
    ranking: Ranking,
    spec: FairnessSpec,
    index: GroupIndex,
    *,
    max_swaps: int | None = None,
    collect_swaps: bool = True,
) -> tuple[Ranking, RepairTrace]:
    """Swap candidates pairwise until every enabled score is in threshold.

    Each iteration picks the violated entity with the largest score (the
    intersection wins ties, then attributes in declared order) and swaps a
    member of its highest-share group below the nearest lower-share member
    beneath it. Any such crossing swap strictly shrinks the corrected
    entity's spread, but may disturb other enabled entities, so when the
    entity's groups are not separated by every other enabled entity (only
    possible without the intersection, whose cells always split attribute
    groups) the pair search prefers two candidates that agree on all other
    enabled entities — that swap provably leaves their scores untouched.
    Because the chosen swap is a deterministic function of the current order,
    revisiting an order would loop forever; a hash set of visited orders
    therefore vetoes any swap that would recreate one, falling back to
    further pairs and then to the next-largest violated entity, and the
    repair stops with an error when every violated entity runs out of legal,
    unvisited swaps. The default cap of ``2 * n**2`` swaps bounds the walk
    regardless.
    """
    table = index.table
    n = table.n
    cap = max_swaps if max_swaps is not None else 2 * n * n
    pairs = enabled_entities(spec, index)
    # priority for score ties: intersection first, then declared order
    pairs.sort(key=lambda p: (not p[0].is_intersection,))

    order = ranking.to_indices(table)
    pos = [0] * n
    for p, c in enumerate(order):
        pos[c] = p

    ents = []
    for entity, delta in pairs:
        k = len(entity.groups)
        favored = favored_pair_counts(order, entity.gid, k)
        omegas = [g.mixed_pairs for g in entity.groups]
        position_sets = [_PositionSet(n) for _ in range(k)]
        for group, pset in zip(entity.groups, position_sets):
            for member in group.members:
                pset.add(pos[member] + 1)
        ents.append(
            {
                "entity": entity,
                "gid": entity.gid,
                "favored": favored,
                "omegas": omegas,
                "delta": (delta.numerator, delta.denominator),
                "psets": position_sets,
            }
        )
    for ent in ents:
        # Can two candidates differ in this entity yet agree on all others?
        # Only then is a disturbance-free swap pair worth scanning for.
        others = [o["gid"] for o in ents if o is not ent]
        profile_gid: dict[tuple[int, ...], int] = {}
        can_be_clean = False
        for c in range(n):
            key = tuple(g[c] for g in others)
            prev = profile_gid.setdefault(key, ent["gid"][c])
            if prev != ent["gid"][c]:
                can_be_clean = True
                break
        ent["can_be_clean"] = can_be_clean

    # Rolling hash of the current order so already-seen orders can be vetoed:
    # revisiting one would repeat the same deterministic swap sequence forever.
    hash_mod = (1 << 61) - 1
    hash_pow = [pow(1_000_003, c, hash_mod) for c in range(n)]
    order_hash = sum(pos[c] * hash_pow[c] for c in range(n)) % hash_mod
    seen_orders = {order_hash}
    max_seen = 1 << 20  # stop recording (but keep consulting) past this size

    swaps: list[tuple[str, str, str]] = []
    iterations = 0
    while True:
        violated = []  # (num, den, ent, hi, lo) per out-of-threshold entity
        for ent in ents:
            favored = ent["favored"]
            omegas = ent["omegas"]
            hi = lo = 0
            for g in range(1, len(favored)):
                if favored[g] * omegas[hi] > favored[hi] * omegas[g]:
                    hi = g
                if favored[g] * omegas[lo] < favored[lo] * omegas[g]:
                    lo = g
            num = favored[hi] * omegas[lo] - favored[lo] * omegas[hi]
            den = omegas[hi] * omegas[lo]
            dnum, dden = ent["delta"]
            if num * dden <= dnum * den:
                continue  # within threshold
            violated.append((num, den, ent, hi, lo))
        if not violated:
            break
        if iterations >= cap:
            raise RepairStalled(
                f"fairness repair did not converge within {cap} swaps"
            )
        violated.sort(key=lambda v: Fraction(v[0], v[1]), reverse=True)
        chosen = None
        for _, _, ent, hi, lo in violated:
            hi_set, lo_set = ent["psets"][hi], ent["psets"][lo]
            want_clean = ent["can_be_clean"]
            other_gids = [o["gid"] for o in ents if o is not ent]
            fallback = None
            scanned = 0
            # Walk the highest-share group's members bottom-up; pair each
            # with the nearest lower-share member beneath it. Members below
            # the lower-share group's last position have no partner, so the
            # walk starts at the lowest member that has one.
            for c in range(hi_set.rank(lo_set.max_pos() - 1), 0, -1):
                high_pos = hi_set.kth(c)
                low_pos = lo_set.min_pos_above(high_pos)
                if low_pos is None:
                    continue
                p0, s0 = high_pos - 1, low_pos - 1
                demoted, promoted = order[p0], order[s0]
                next_hash = (
                    order_hash
                    + (s0 - p0) * (hash_pow[demoted] - hash_pow[promoted])
                ) % hash_mod
                if next_hash in seen_orders:
                    continue
                if fallback is None:
                    fallback = (ent, high_pos, low_pos, next_hash)
                    if not want_clean:
                        break
                scanned += 1
                if want_clean and all(
                    g[demoted] == g[promoted] for g in other_gids
                ):
                    chosen = (ent, high_pos, low_pos, next_hash)
                    break
                if scanned >= 48:
                    break  # bounded scan; settle for the first legal pair
            if chosen is None and fallback is not None:
                chosen = fallback
            if chosen is not None:
                break
        if chosen is None:
            raise RepairStalled(
                "fairness repair cycled: every violated entity's swap would"
                " revisit an earlier order or has no legal pair left"
            )
        ent, high_pos, low_pos, order_hash = chosen
        if len(seen_orders) < max_seen:
            seen_orders.add(order_hash)
        p0, s0 = high_pos - 1, low_pos - 1
        demoted, promoted = order[p0], order[s0]

        span = s0 - p0
        for other in ents:
            gid = other["gid"]
            gu, gv = gid[demoted], gid[promoted]
            if gu == gv:
                continue  # same group: every favored count and pset is unchanged
            # The demoted member passes below the span candidates and the
            # promoted one, handing one favored mixed pair each to the
            # promoted member's group; each between-candidate's own group
            # gains one pair from the demotion and loses one from the
            # promotion, netting zero.
            favored = other["favored"]
            favored[gu] -= span
            favored[gv] += span
            opsets = other["psets"]
            opsets[gu].remove(high_pos)
            opsets[gu].add(low_pos)
            opsets[gv].remove(low_pos)
            opsets[gv].add(high_pos)

        order[p0], order[s0] = promoted, demoted
        pos[demoted], pos[promoted] = s0, p0
        iterations += 1
        if collect_swaps:
            swaps.append(
                (
                    table.candidate_ids[demoted],
                    table.candidate_ids[promoted],
                    ent["entity"].name,
                )
            )

    repaired = Ranking(tuple(table.candidate_ids[i] for i in order))
    report = evaluate_fairness(repaired, spec, index)
    return repaired, RepairTrace(tuple(swaps), iterations, report)


def fair_kemeny(
    precedence: PrecedenceMatrix,
    spec: FairnessSpec,
    index: GroupIndex,
    *,
    time_budget_ms: int | None = None,
    max_exact_n: int = DEFAULT_MAX_EXACT_N,
    max_nodes: int | None = None,
    warm_starts: Sequence[Ranking] = (),
) -> KemenySolution:
    """Minimum-disagreement ranking among those satisfying the fairness spec.

    Runs the prefix branch-and-bound with fairness pruning. The search is
    seeded with repaired unconstrained solutions (and any ``warm_starts``,
    repaired if needed), so a good feasible incumbent exists early; if the
    search space is exhausted with no feasible leaf the instance is
    infeasible. On budget expiry or after ``max_nodes`` search nodes the
    best feasible incumbent is returned flagged ``optimal=False``; with no
    incumbent the budget error is raised instead. ``max_nodes`` truncation
    is deterministic: identical inputs stop at the identical node.
    """
    n = precedence.n
    if n > max_exact_n:
        raise InstanceTooLarge(
            f"exact solve limited to {max_exact_n} candidates, got {n}"
        )
    if tuple(precedence.ids) != index.table.candidate_ids:
        raise InconsistentCandidateSet(
            "precedence matrix and group index cover different candidates"
        )
    pairs = enabled_entities(spec, index)
    budget = resolve_budget_ms(time_budget_ms)
    deadline = time.perf_counter() + budget / 1000.0 if budget is not None else None

    def remaining_ms() -> int | None:
        if deadline is None:
            return None
        return max(1, int((deadline - time.perf_counter()) * 1000))

    if not pairs:
        return kemeny_exact(
            precedence, time_budget_ms=remaining_ms(), max_exact_n=max_exact_n
        )

    wm = precedence.cost_lists()
    base = kemeny_exact(
        precedence, time_budget_ms=remaining_ms(), max_exact_n=max_exact_n
    )
    base_order = base.ranking.to_indices(index.table)
    if base.optimal and _order_satisfies(base_order, pairs):
        return base

    seeds: list[Ranking] = [
        base.ranking,
        Ranking(tuple(precedence.ids[i] for i in _borda_order(wm))),
        copeland(precedence),
        schulze(precedence),
    ]
    seeds.extend(warm_starts)
    incumbent_order: list[int] | None = None
    incumbent_obj: int | None = None
    for seed in seeds:
        try:
            repaired, _ = repair_ranking(seed, spec, index, collect_swaps=False)
        except RepairStalled:
            continue
        order = repaired.to_indices(index.table)
        objective = ranking_objective(wm, order)
        if incumbent_obj is None or objective < incumbent_obj:
            incumbent_order, incumbent_obj = order, objective

    order, objective, completed, nodes = prefix_branch_and_bound(
        wm,
        constraints=_constraints(pairs),
        incumbent_order=incumbent_order,
        incumbent_objective=incumbent_obj,
        deadline=deadline,
        max_nodes=max_nodes,
    )
    nodes += base.nodes_explored
    if order is None:
        if completed:
            raise Infeasible(
                "no ranking satisfies the fairness thresholds"
            )
        raise BudgetExceeded(
            "search budget exhausted before any feasible ranking was found"
        )
    assert objective is not None
    return KemenySolution(
        Ranking(tuple(precedence.ids[i] for i in order)),
        objective,
        completed,
        nodes,
    )


@dataclass(frozen=True)
class PipelineResult:
    """An unaware consensus, its repaired version, and the loss accounting."""

    method: str
    unaware_ranking: Ranking
    ranking: Ranking
    trace: RepairTrace
    pd_loss_unaware: Fraction
    pd_loss_fair: Fraction
    price_of_fairness: Fraction


def fair_pipeline(
    method: PipelineMethod,
    rankings: RankingSet,
    spec: FairnessSpec,
    index: GroupIndex,
    *,
    collect_swaps: bool = True,
) -> PipelineResult:
    """Unaware consensus by ``method``, then swap repair to the spec."""
    table = index.table
    if method == "borda":
        unaware = borda(rankings, table)
    elif method == "copeland":
        unaware = copeland(build_precedence_matrix(rankings, table))
    elif method == "schulze":
        unaware = schulze(build_precedence_matrix(rankings, table))
    elif method == "pick-fairest":
        unaware = pick_fairest(rankings, spec, index)
    else:
        raise ValueError(f"unknown pipeline method {method!r}")
    repaired, trace = repair_ranking(
        unaware, spec, index, collect_swaps=collect_swaps
    )
    before = pd_loss(rankings, unaware)
    after = pd_loss(rankings, repaired)
    return PipelineResult(method, unaware, repaired, trace, before, after, after - before)


def brute_force_fair_kemeny(
    rankings: RankingSet,
    spec: FairnessSpec,
    index: GroupIndex,
    *,
    max_n: int = 9,
) -> KemenySolution:
    """Enumeration oracle: scan all permutations, keep the feasible minimum.

    Independent of the branch-and-bound by construction. The feasibility
    filter is the same exact integer comparison the metrics module makes,
    inlined over group membership arrays so full factorial scans stay fast.
    """
    table = index.table
    n = table.n
    if n > max_n:
        raise InstanceTooLarge(
            f"enumeration oracle limited to {max_n} candidates, got {n}"
        )
    wm = build_precedence_matrix(rankings, table).cost_lists()
    ents = []
    for entity, delta in enabled_entities(spec, index):
        ents.append(
            (
                entity.gid,
                [g.mixed_pairs for g in entity.groups],
                delta.numerator,
                delta.denominator,
                len(entity.groups),
            )
        )

    best_order: tuple[int, ...] | None = None
    best_obj: int | None = None
    explored = 0
    for perm in permutations(range(n)):
        explored += 1
        feasible = True
        for gid, omegas, dnum, dden, k in ents:
            favored = [0] * k
            seen = [0] * k
            below = 0
            for p in range(n - 1, -1, -1):
                g = gid[perm[p]]
                favored[g] += below - seen[g]
                seen[g] += 1
                below += 1
            hi = lo = 0
            for g in range(1, k):
                if favored[g] * omegas[hi] > favored[hi] * omegas[g]:
                    hi = g
                if favored[g] * omegas[lo] < favored[lo] * omegas[g]:
                    lo = g
            if (favored[hi] * omegas[lo] - favored[lo] * omegas[hi]) * dden > (
                dnum * omegas[hi] * omegas[lo]
            ):
                feasible = False
                break
        if not feasible:
            continue
        objective = 0
        for i in range(n - 1):
            row = wm[perm[i]]
            for j in range(i + 1, n):
                objective += row[perm[j]]
        if best_obj is None or objective < best_obj:
            best_obj = objective
            best_order = perm
    if best_order is None:
        raise Infeasible("no permutation satisfies the fairness thresholds")
    assert best_obj is not None
    return KemenySolution(
        Ranking(tuple(table.candidate_ids[i] for i in best_order)),
        best_obj,
        True,
        explored,
    )

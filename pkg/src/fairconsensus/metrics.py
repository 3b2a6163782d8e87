"""Fairness metrics and rank-distance measures, all in exact rationals.

The central quantity is the favored-pair share of a group: the fraction of
its mixed pairs (group member vs non-member) in which the member is ranked
higher. A share of 1 means the group sits entirely on top, 0 entirely at
the bottom, and 1/2 is pairwise parity. Attribute and intersection scores
are the max-min spread of those shares, and a ranking satisfies a fairness
spec when every enabled spread stays within its threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import DegenerateGroup, InconsistentCandidateSet
from .model import (
    ALL,
    INTERSECTION,
    CandidateTable,
    Entity,
    GroupIndex,
    Ranking,
    RankingSet,
    build_group_index,
    mixed_pair_count,
    total_pair_count,
)

Score = Fraction


def favored_pair_counts(order: Sequence[int], gid: Sequence[int], n_groups: int) -> list[int]:
    """Favored mixed-pair count per group for a ranking given as indices.

    ``order`` lists candidate indices top-down; ``gid[c]`` is the group
    ordinal of candidate ``c``. One bottom-up pass: when a candidate is
    seen, every already-seen candidate outside its group forms a mixed pair
    it is favored in.
    """
    favored = [0] * n_groups
    seen_below = [0] * n_groups
    total_below = 0
    for pos in range(len(order) - 1, -1, -1):
        g = gid[order[pos]]
        favored[g] += total_below - seen_below[g]
        seen_below[g] += 1
        total_below += 1
    return favored


def fpr(ranking: Ranking, group: Iterable[str], index: GroupIndex) -> Score:
    """Favored-pair share of an explicit candidate-id group.

    Exact rational in [0, 1]; numerator is the count of the group's mixed
    pairs in which the group member is ranked higher.
    """
    table = index.table
    members = {table.index_of(cid) for cid in group}
    n = table.n
    if not members or len(members) == n:
        raise DegenerateGroup(
            f"group of size {len(members)} out of {n} has no mixed pairs"
        )
    order = ranking.to_indices(table)
    gid = [1 if i in members else 0 for i in range(n)]
    favored = favored_pair_counts(order, gid, 2)
    return Fraction(favored[1], mixed_pair_count(len(members), n))


def _entity_shares(order: Sequence[int], entity: Entity) -> list[Score]:
    favored = favored_pair_counts(order, entity.gid, len(entity.groups))
    return [
        Fraction(count, group.mixed_pairs)
        for count, group in zip(favored, entity.groups)
    ]


def _spread(shares: Sequence[Score]) -> Score:
    return max(shares) - min(shares)


def arp(ranking: Ranking, attribute: str, index: GroupIndex) -> Score:
    """Attribute score: max pairwise gap between the attribute's group shares."""
    entity = index.attribute(attribute)
    if len(entity.groups) < 2:
        raise DegenerateGroup(
            f"attribute {attribute!r} has a single non-empty group"
        )
    return _spread(_entity_shares(ranking.to_indices(index.table), entity))


def irp(ranking: Ranking, index: GroupIndex) -> Score:
    """Intersection score: max pairwise gap between intersection-cell shares."""
    entity = index.intersection
    if entity is None:
        raise DegenerateGroup("this group index was built without an intersection")
    if len(entity.groups) < 2:
        raise DegenerateGroup("the intersection has a single non-empty cell")
    return _spread(_entity_shares(ranking.to_indices(index.table), entity))


def _parse_threshold(value: Fraction | str | int) -> Fraction:
    """Thresholds come from decimal strings so comparisons stay exact."""
    delta = Fraction(value)
    if not 0 <= delta <= 1:
        raise ValueError(f"threshold {value!r} outside [0, 1]")
    return delta


@dataclass(frozen=True)
class FairnessSpec:
    """Thresholds and scope for fairness evaluation.

    ``delta_default`` applies wherever no per-attribute or intersection
    override is given. ``intersection_attrs`` selects which attributes form
    the intersection (``ALL``, a subset, or ``None`` to disable it);
    ``constrain_attributes`` disables the per-attribute scores when False.
    """

    delta_default: Fraction = Fraction(0)
    delta_attributes: Mapping[str, Fraction] = field(default_factory=dict)
    delta_intersection: Fraction | None = None
    intersection_attrs: tuple[str, ...] | str | None = ALL
    constrain_attributes: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta_default", _parse_threshold(self.delta_default))
        object.__setattr__(
            self,
            "delta_attributes",
            {a: _parse_threshold(d) for a, d in dict(self.delta_attributes).items()},
        )
        if self.delta_intersection is not None:
            object.__setattr__(
                self, "delta_intersection", _parse_threshold(self.delta_intersection)
            )
        if self.intersection_attrs not in (None, ALL):
            object.__setattr__(self, "intersection_attrs", tuple(self.intersection_attrs))

    def delta_for(self, entity_name: str) -> Fraction:
        if entity_name == INTERSECTION:
            if self.delta_intersection is not None:
                return self.delta_intersection
            return self.delta_default
        return self.delta_attributes.get(entity_name, self.delta_default)

    def build_index(self, table: CandidateTable) -> GroupIndex:
        return build_group_index(table, self.intersection_attrs)


@dataclass(frozen=True)
class FairnessReport:
    """Per-group shares, per-entity spreads, and the overall verdict.

    ``max_violation`` names the entity whose spread exceeds its threshold
    by the largest margin, with that spread; ``None`` when satisfied.
    Entities that cannot be scored (a single non-empty group) are skipped
    and listed in ``warnings``.
    """

    attribute_shares: dict[str, dict[str, Score]]
    attribute_spreads: dict[str, Score]
    intersection_shares: dict[tuple[str, ...], Score]
    intersection_spread: Score | None
    satisfied: bool
    max_violation: tuple[str, Score] | None
    warnings: tuple[str, ...]


def evaluate_fairness(
    ranking: Ranking, spec: FairnessSpec, index: GroupIndex
) -> FairnessReport:
    """Score a ranking against a fairness spec.

    Evaluates every enabled attribute and, if the index carries one, the
    intersection. The ranking satisfies the spec when each evaluated spread
    is at most its threshold (exact rational comparison, no tolerance).
    """
    order = ranking.to_indices(index.table)
    attribute_shares: dict[str, dict[str, Score]] = {}
    attribute_spreads: dict[str, Score] = {}
    intersection_shares: dict[tuple[str, ...], Score] = {}
    intersection_spread: Score | None = None
    warnings: list[str] = []
    worst: tuple[str, Score] | None = None
    worst_excess: Fraction | None = None
    satisfied = True

    evaluated: list[Entity] = []
    if spec.constrain_attributes:
        evaluated.extend(index.attribute_entities)
    if index.intersection is not None and spec.intersection_attrs is not None:
        evaluated.append(index.intersection)

    for entity in evaluated:
        if len(entity.groups) < 2:
            warnings.append(
                f"{entity.name}: single non-empty group, score skipped"
            )
            continue
        shares = _entity_shares(order, entity)
        spread = _spread(shares)
        if entity.is_intersection:
            intersection_shares.update(
                {g.label: s for g, s in zip(entity.groups, shares)}
            )
            intersection_spread = spread
        else:
            attribute_shares[entity.name] = {
                g.label: s for g, s in zip(entity.groups, shares)
            }
            attribute_spreads[entity.name] = spread
        excess = spread - spec.delta_for(entity.name)
        if excess > 0:
            satisfied = False
            if worst_excess is None or excess > worst_excess:
                worst_excess = excess
                worst = (entity.name, spread)

    return FairnessReport(
        attribute_shares,
        attribute_spreads,
        intersection_shares,
        intersection_spread,
        satisfied,
        worst,
        tuple(warnings),
    )


def _count_inversions(seq: list[int]) -> int:
    """Merge-count of inversions, O(n log n)."""
    n = len(seq)
    if n < 2:
        return 0
    buf = list(seq)
    tmp = [0] * n
    inversions = 0
    width = 1
    while width < n:
        for start in range(0, n - width, 2 * width):
            mid = start + width
            end = min(start + 2 * width, n)
            i, j, k = start, mid, start
            while i < mid and j < end:
                if buf[i] <= buf[j]:
                    tmp[k] = buf[i]
                    i += 1
                else:
                    tmp[k] = buf[j]
                    inversions += mid - i
                    j += 1
                k += 1
            tmp[k:end] = buf[i:mid] if i < mid else buf[j:end]
            buf[start:end] = tmp[start:end]
        width *= 2
    return inversions


def kendall_tau(first: Ranking, second: Ranking) -> int:
    """Number of candidate pairs the two rankings order differently."""
    if frozenset(first.order) != frozenset(second.order) or first.n != second.n:
        raise InconsistentCandidateSet(
            "kendall_tau needs two permutations of the same candidate set"
        )
    pos = {cid: i for i, cid in enumerate(second.order)}
    return _count_inversions([pos[cid] for cid in first.order])


def pd_loss(rankings: RankingSet, consensus: Ranking) -> Score:
    """Average normalized pairwise disagreement of a consensus ranking.

    Exact rational in [0, 1]: the (weighted) mean Kendall tau distance to
    the base rankings, divided by the total pair count.
    """
    distance = 0
    for ranking, weight in zip(rankings.rankings, rankings.weights):
        distance += weight * kendall_tau(consensus, ranking)
    return Fraction(distance, total_pair_count(rankings.n) * rankings.total_weight)


def price_of_fairness(
    rankings: RankingSet, fair: Ranking, unaware: Ranking
) -> Score:
    """Loss increase paid for fairness: pd_loss(fair) - pd_loss(unaware)."""
    return pd_loss(rankings, fair) - pd_loss(rankings, unaware)

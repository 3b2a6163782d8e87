"""Shared builders for the test suite.

Everything here is deterministic given the caller's `random.Random`, so
tests can freeze seeds and stay reproducible across runs and platforms.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Mapping, Sequence

from fairconsensus import (
    CandidateTable,
    Ranking,
    RankingSet,
)


def grid_table(
    n: int,
    first_values: int,
    second_values: int,
    names: tuple[str, str] = ("race", "gender"),
) -> CandidateTable:
    """Candidates laid out so every value combination appears evenly.

    With ``n`` divisible by ``first_values * second_values`` every
    intersection cell has the same size, which keeps group denominators
    uniform across cells.
    """
    ids = tuple(f"c{i:03d}" for i in range(n))
    rows = tuple(
        (f"r{i % first_values}", f"g{(i // first_values) % second_values}")
        for i in range(n)
    )
    return CandidateTable(ids, names, rows)


def sized_table(spec: Mapping[str, Sequence[int]], rng: random.Random) -> CandidateTable:
    """Table with exact per-attribute group sizes, assignment shuffled.

    ``spec`` maps attribute name to a list of group sizes; all lists must
    sum to the same n. Labels are ``<attr><group index>``.
    """
    sizes = {name: list(groups) for name, groups in spec.items()}
    totals = {name: sum(groups) for name, groups in sizes.items()}
    n = next(iter(totals.values()))
    assert all(t == n for t in totals.values()), "group sizes must sum equally"
    columns = {}
    for name, groups in sizes.items():
        labels: list[str] = []
        for gi, size in enumerate(groups):
            labels.extend([f"{name}{gi}"] * size)
        rng.shuffle(labels)
        columns[name] = labels
    names = tuple(sizes)
    ids = tuple(f"c{i}" for i in range(n))
    rows = tuple(tuple(columns[a][i] for a in names) for i in range(n))
    return CandidateTable(ids, names, rows)


def random_table(
    n: int,
    attr_values: Mapping[str, Sequence[str]],
    rng: random.Random,
) -> CandidateTable:
    """Table with uniformly random attribute values, >= 2 distinct each."""
    columns = {}
    for name, labels in attr_values.items():
        values = [rng.choice(labels) for _ in range(n)]
        while len(set(values)) < 2:
            values = [rng.choice(labels) for _ in range(n)]
        columns[name] = values
    names = tuple(attr_values)
    ids = tuple(f"c{i}" for i in range(n))
    rows = tuple(tuple(columns[a][i] for a in names) for i in range(n))
    return CandidateTable(ids, names, rows)


def random_ranking_set(
    table: CandidateTable,
    count: int,
    rng: random.Random,
    weights: Sequence[int] | None = None,
) -> RankingSet:
    """Uniformly random permutations of the table's candidates."""
    base = list(table.candidate_ids)
    rankings = []
    for _ in range(count):
        rng.shuffle(base)
        rankings.append(Ranking(tuple(base)))
    if weights is None:
        weights = [1] * count
    return RankingSet(tuple(rankings), tuple(weights))


def count_inversions(first: Ranking, second: Ranking) -> int:
    """Quadratic pair scan; independent reference for kendall_tau."""
    pos = {cid: i for i, cid in enumerate(second.order)}
    order = [pos[cid] for cid in first.order]
    n = len(order)
    return sum(
        1 for i in range(n) for j in range(i + 1, n) if order[i] > order[j]
    )


def favored_share_reference(
    ranking: Ranking,
    members: frozenset[str],
    others: frozenset[str],
) -> Fraction:
    """Quadratic favored-pair share for one group against all outsiders."""
    favored = 0
    mixed = 0
    order = ranking.order
    for i, top in enumerate(order):
        for bottom in order[i + 1:]:
            if top in members and bottom in others:
                favored += 1
                mixed += 1
            elif top in others and bottom in members:
                mixed += 1
    return Fraction(favored, mixed) if mixed else Fraction(0)

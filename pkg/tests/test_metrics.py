"""Fairness scores and distances, checked against quadratic references."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from fairconsensus import (
    FairnessSpec,
    Ranking,
    RankingSet,
    arp,
    build_group_index,
    evaluate_fairness,
    fpr,
    irp,
    kendall_tau,
    pd_loss,
    price_of_fairness,
)
from fairconsensus.metrics import favored_pair_counts
from fairconsensus.model import ALL

import helpers


class TestFavoredPairShare:
    def test_hand_example(self):
        # group {a, b} vs outsiders {x, y} in ranking a, x, b, y:
        # favored mixed pairs: (a,x), (a,y), (b,y); missed: (x,b) -> 3/4
        table = helpers.random_table(4, {"t": ["g", "o"]}, random.Random(1))
        table = type(table)(
            ("a", "x", "b", "y"),
            ("t",),
            (("g",), ("o",), ("g",), ("o",)),
        )
        index = build_group_index(table, intersection_attrs=None)
        ranking = Ranking(("a", "x", "b", "y"))
        assert fpr(ranking, ("a", "b"), index) == Fraction(3, 4)
        assert fpr(ranking, ("x", "y"), index) == Fraction(1, 4)

    def test_matches_quadratic_reference(self, rng):
        for _ in range(25):
            n = rng.randint(3, 9)
            table = helpers.random_table(n, {"t": ["g", "o", "b"]}, rng)
            index = build_group_index(table, intersection_attrs=None)
            ranking = helpers.random_ranking_set(table, 1, rng).rankings[0]
            entity = index.attribute_entities[0]
            order = ranking.to_indices(table)
            counts = favored_pair_counts(order, entity.gid, len(entity.groups))
            for gi, group in enumerate(entity.groups):
                members = frozenset(table.candidate_ids[i] for i in group.members)
                others = frozenset(table.candidate_ids) - members
                expected = helpers.favored_share_reference(ranking, members, others)
                assert Fraction(counts[gi], group.mixed_pairs) == expected
                assert fpr(ranking, sorted(members), index) == expected

    def test_complementary_groups_sum_to_one(self, rng):
        # binary attribute: the two shares always add up to exactly 1
        for _ in range(10):
            table = helpers.random_table(7, {"t": ["g", "o"]}, rng)
            index = build_group_index(table, intersection_attrs=None)
            ranking = helpers.random_ranking_set(table, 1, rng).rankings[0]
            entity = index.attribute_entities[0]
            shares = []
            for group in entity.groups:
                members = sorted(table.candidate_ids[i] for i in group.members)
                shares.append(fpr(ranking, members, index))
            assert sum(shares) == 1


class TestSpreads:
    def test_arp_is_max_share_gap(self, rng):
        for _ in range(20):
            table = helpers.random_table(8, {"t": ["g", "o", "b", "w"]}, rng)
            index = build_group_index(table, intersection_attrs=None)
            ranking = helpers.random_ranking_set(table, 1, rng).rankings[0]
            entity = index.attribute_entities[0]
            shares = []
            for group in entity.groups:
                members = sorted(table.candidate_ids[i] for i in group.members)
                shares.append(fpr(ranking, members, index))
            expected = max(
                abs(a - b) for a in shares for b in shares
            )
            assert arp(ranking, "t", index) == expected == max(shares) - min(shares)

    def test_irp_over_intersection_cells(self, rng):
        table = helpers.grid_table(12, 2, 3)
        index = build_group_index(table, intersection_attrs=ALL)
        ranking = helpers.random_ranking_set(table, 1, rng).rankings[0]
        shares = []
        for cell in index.intersection.groups:
            members = frozenset(table.candidate_ids[i] for i in cell.members)
            others = frozenset(table.candidate_ids) - members
            shares.append(helpers.favored_share_reference(ranking, members, others))
        assert irp(ranking, index) == max(shares) - min(shares)

    def test_mirrored_binary_order_is_parity(self):
        # g,o,o,g gives each group 2 of its 4 mixed pairs: equal shares
        table = type(helpers.grid_table(4, 2, 2))(
            ("a", "b", "c", "d"),
            ("t",),
            (("g",), ("o",), ("o",), ("g",)),
        )
        index = build_group_index(table, intersection_attrs=None)
        assert arp(Ranking(("a", "b", "c", "d")), "t", index) == 0


class TestKendallTau:
    def test_matches_inversion_count(self, rng):
        for _ in range(30):
            n = rng.randint(2, 40)
            ids = tuple(f"c{i}" for i in range(n))
            first = list(ids)
            second = list(ids)
            rng.shuffle(first)
            rng.shuffle(second)
            r1, r2 = Ranking(tuple(first)), Ranking(tuple(second))
            expected = helpers.count_inversions(r1, r2)
            assert kendall_tau(r1, r2) == expected
            assert kendall_tau(r2, r1) == expected

    def test_identity_and_reversal(self):
        ids = tuple(f"c{i}" for i in range(6))
        forward = Ranking(ids)
        backward = Ranking(ids[::-1])
        assert kendall_tau(forward, forward) == 0
        assert kendall_tau(forward, backward) == 15


class TestPdLoss:
    def test_unanimous_input_recovers_zero(self, abc_table, rng):
        ranking = Ranking(("b", "c", "a"))
        rankings = RankingSet((ranking, ranking), (3, 1))
        assert pd_loss(rankings, ranking) == 0

    def test_weighted_mean_of_normalized_distance(self, rng):
        table = helpers.random_table(6, {"t": ["g", "o"]}, rng)
        rankings = helpers.random_ranking_set(table, 4, rng, weights=[2, 1, 1, 3])
        consensus = helpers.random_ranking_set(table, 1, rng).rankings[0]
        total_pairs = 15
        expected = Fraction(
            sum(
                w * helpers.count_inversions(consensus, r)
                for r, w in zip(rankings.rankings, rankings.weights)
            ),
            total_pairs * rankings.total_weight,
        )
        assert pd_loss(rankings, consensus) == expected

    def test_price_of_fairness_is_loss_gap(self, rng):
        table = helpers.random_table(5, {"t": ["g", "o"]}, rng)
        rankings = helpers.random_ranking_set(table, 5, rng)
        fair = helpers.random_ranking_set(table, 1, rng).rankings[0]
        unaware = helpers.random_ranking_set(table, 1, rng).rankings[0]
        assert price_of_fairness(rankings, fair, unaware) == pd_loss(
            rankings, fair
        ) - pd_loss(rankings, unaware)


class TestEvaluateFairness:
    def test_exact_threshold_boundary(self, rng):
        table = helpers.grid_table(8, 2, 2)
        index = build_group_index(table, intersection_attrs=ALL)
        ranking = helpers.random_ranking_set(table, 1, rng).rankings[0]
        spreads = [
            arp(ranking, "race", index),
            arp(ranking, "gender", index),
            irp(ranking, index),
        ]
        worst = max(spreads)
        at = evaluate_fairness(
            ranking, FairnessSpec(delta_default=worst, intersection_attrs=ALL), index
        )
        assert at.satisfied
        if worst > 0:
            just_below = worst - Fraction(1, 10**9)
            below = evaluate_fairness(
                ranking,
                FairnessSpec(delta_default=just_below, intersection_attrs=ALL),
                index,
            )
            assert not below.satisfied
            assert below.max_violation is not None

    def test_report_matches_direct_scores(self, rng):
        for _ in range(10):
            table = helpers.random_table(8, {"x": ["1", "2", "3"], "y": ["p", "q"]}, rng)
            index = build_group_index(table, intersection_attrs=ALL)
            ranking = helpers.random_ranking_set(table, 1, rng).rankings[0]
            report = evaluate_fairness(
                ranking, FairnessSpec(delta_default=Fraction(1)), index
            )
            for name in report.attribute_spreads:
                assert report.attribute_spreads[name] == arp(ranking, name, index)
            if report.intersection_spread is not None:
                assert report.intersection_spread == irp(ranking, index)
            for name, shares in report.attribute_shares.items():
                entity = next(
                    e for e in index.attribute_entities if e.name == name
                )
                for group in entity.groups:
                    members = sorted(table.candidate_ids[i] for i in group.members)
                    assert shares[group.label] == fpr(ranking, members, index)

    def test_per_attribute_override(self, rng):
        table = helpers.grid_table(12, 3, 2)
        index = build_group_index(table, intersection_attrs=None)
        ranking = helpers.random_ranking_set(table, 1, rng).rankings[0]
        race = arp(ranking, "race", index)
        gender = arp(ranking, "gender", index)
        spec = FairnessSpec(
            delta_default=Fraction(0),
            delta_attributes={"race": race, "gender": gender},
            intersection_attrs=None,
        )
        assert evaluate_fairness(ranking, spec, index).satisfied

    def test_intersection_override_and_scope(self, rng):
        table = helpers.grid_table(12, 3, 2)
        index = build_group_index(table, intersection_attrs=ALL)
        ranking = helpers.random_ranking_set(table, 1, rng).rankings[0]
        only_inter = FairnessSpec(
            delta_default=Fraction(0),
            delta_intersection=Fraction(1),
            constrain_attributes=False,
        )
        report = evaluate_fairness(ranking, only_inter, index)
        assert report.satisfied
        assert report.attribute_spreads == {}
        assert report.intersection_spread is not None

    def test_single_group_attribute_warns_and_skips(self):
        table = type(helpers.grid_table(4, 2, 2))(
            ("a", "b", "c"),
            ("t", "u"),
            (("g", "s"), ("o", "s"), ("g", "s")),
        )
        index = build_group_index(table, intersection_attrs=None)
        report = evaluate_fairness(
            Ranking(("a", "b", "c")), FairnessSpec(delta_default=Fraction(0)), index
        )
        assert any("u" in w for w in report.warnings)
        assert "u" not in report.attribute_spreads

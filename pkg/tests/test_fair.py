"""Constrained solver, repair procedure, and fair pipelines."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from fairconsensus import (
    BudgetExceeded,
    FairnessSpec,
    Infeasible,
    Ranking,
    RankingSet,
    brute_force_fair_kemeny,
    build_group_index,
    build_precedence_matrix,
    evaluate_fairness,
    fair_kemeny,
    fair_pipeline,
    kemeny_exact,
    pd_loss,
    ranking_objective,
    repair_ranking,
)
from fairconsensus.errors import RepairStalled
from fairconsensus.fair import enabled_entities
from fairconsensus.model import ALL

import helpers


def odd_parity_instance():
    """Group sizes 3 and 1: both groups share 3 mixed pairs, an odd count.

    Equal shares would need 1.5 favored pairs each, so no ranking reaches
    spread 0: the instance is infeasible at threshold 0.
    """
    table = type(helpers.grid_table(4, 2, 2))(
        ("a", "b", "c", "d"),
        ("t",),
        (("g",), ("g",), ("g",), ("o",)),
    )
    rankings = RankingSet(
        (Ranking(("a", "b", "c", "d")), Ranking(("d", "c", "b", "a")))
    )
    return table, rankings


class TestRepair:
    def test_already_fair_input_unchanged(self, rng):
        table = helpers.grid_table(8, 2, 2)
        index = build_group_index(table, intersection_attrs=ALL)
        spec = FairnessSpec(delta_default=Fraction(1))
        ranking = helpers.random_ranking_set(table, 1, rng).rankings[0]
        repaired, trace = repair_ranking(ranking, spec, index)
        assert repaired == ranking
        assert trace.iterations == 0
        assert trace.swaps == ()

    def test_output_satisfies_spec(self, rng):
        for _ in range(15):
            table = helpers.grid_table(12, 3, 2)
            index = build_group_index(table, intersection_attrs=ALL)
            spec = FairnessSpec(delta_default=Fraction(1, 5))
            ranking = helpers.random_ranking_set(table, 1, rng).rankings[0]
            repaired, trace = repair_ranking(ranking, spec, index)
            assert trace.final_report.satisfied
            assert evaluate_fairness(repaired, spec, index).satisfied

    def test_swap_replay_reproduces_output(self, rng):
        table = helpers.grid_table(12, 3, 2)
        index = build_group_index(table, intersection_attrs=ALL)
        spec = FairnessSpec(delta_default=Fraction(1, 4))
        ranking = helpers.random_ranking_set(table, 1, rng).rankings[0]
        repaired, trace = repair_ranking(ranking, spec, index)
        assert trace.iterations == len(trace.swaps)
        replay = list(ranking.order)
        for demoted, promoted, _entity in trace.swaps:
            i, j = replay.index(demoted), replay.index(promoted)
            assert i < j, "a swap always promotes a candidate from below"
            replay[i], replay[j] = replay[j], replay[i]
        assert tuple(replay) == repaired.order

    def test_stalls_on_infeasible_target(self):
        table, rankings = odd_parity_instance()
        index = build_group_index(table, intersection_attrs=None)
        spec = FairnessSpec(delta_default=Fraction(0), intersection_attrs=None)
        with pytest.raises(RepairStalled):
            repair_ranking(rankings.rankings[0], spec, index)


class TestFairKemeny:
    def test_matches_oracle_on_random_instances(self, rng):
        checked = 0
        for _ in range(15):
            n = rng.randint(4, 7)
            table = helpers.random_table(
                n, {"x": ["1", "2", "3"], "y": ["p", "q"]}, rng
            )
            rankings = helpers.random_ranking_set(table, rng.randint(3, 7), rng)
            pm = build_precedence_matrix(rankings, table)
            for delta in (Fraction(0), Fraction(1, 4), Fraction(1, 2)):
                spec = FairnessSpec(delta_default=delta, intersection_attrs=ALL)
                index = spec.build_index(table)
                try:
                    oracle = brute_force_fair_kemeny(rankings, spec, index)
                except Infeasible:
                    oracle = None
                try:
                    fast = fair_kemeny(pm, spec, index)
                except Infeasible:
                    fast = None
                checked += 1
                if oracle is None:
                    assert fast is None
                else:
                    assert fast is not None
                    assert fast.optimal
                    assert fast.objective == oracle.objective
                    assert evaluate_fairness(fast.ranking, spec, index).satisfied
        assert checked >= 45

    def test_solution_objective_is_consistent(self, rng):
        table = helpers.grid_table(8, 2, 2)
        spec = FairnessSpec(delta_default=Fraction(1, 4), intersection_attrs=ALL)
        index = spec.build_index(table)
        rankings = helpers.random_ranking_set(table, 5, rng)
        pm = build_precedence_matrix(rankings, table)
        solution = fair_kemeny(pm, spec, index)
        wm = pm.cost_lists()
        assert solution.objective == ranking_objective(
            wm, solution.ranking.to_indices(table)
        )

    def test_infeasible_odd_parity(self):
        table, rankings = odd_parity_instance()
        spec = FairnessSpec(delta_default=Fraction(0), intersection_attrs=None)
        index = spec.build_index(table)
        pm = build_precedence_matrix(rankings, table)
        with pytest.raises(Infeasible):
            fair_kemeny(pm, spec, index)
        with pytest.raises(Infeasible):
            brute_force_fair_kemeny(rankings, spec, index)

    def test_vacuous_threshold_reduces_to_unconstrained(self, rng):
        table = helpers.grid_table(8, 2, 2)
        spec = FairnessSpec(delta_default=Fraction(1), intersection_attrs=ALL)
        index = spec.build_index(table)
        assert enabled_entities(spec, index) == []
        rankings = helpers.random_ranking_set(table, 5, rng)
        pm = build_precedence_matrix(rankings, table)
        assert fair_kemeny(pm, spec, index).objective == kemeny_exact(pm).objective

    def test_objective_monotone_in_threshold(self, rng):
        # relaxing the threshold can only lower the exact optimum
        for _ in range(5):
            table = helpers.grid_table(8, 2, 2)
            rankings = helpers.random_ranking_set(table, 6, rng)
            pm = build_precedence_matrix(rankings, table)
            previous = None
            for tenths in range(0, 11):
                spec = FairnessSpec(
                    delta_default=Fraction(tenths, 10), intersection_attrs=ALL
                )
                index = spec.build_index(table)
                try:
                    objective = fair_kemeny(pm, spec, index).objective
                except Infeasible:
                    continue
                if previous is not None:
                    assert objective <= previous
                previous = objective

    def test_warm_start_bounds_truncated_search(self, rng):
        table = helpers.grid_table(12, 3, 2)
        spec = FairnessSpec(delta_default=Fraction(1, 10), intersection_attrs=ALL)
        index = spec.build_index(table)
        rankings = helpers.random_ranking_set(table, 9, rng)
        pm = build_precedence_matrix(rankings, table)
        wm = pm.cost_lists()
        exact = fair_kemeny(pm, spec, index)
        truncated = fair_kemeny(pm, spec, index, max_nodes=1)
        assert not truncated.optimal
        assert truncated.objective >= exact.objective
        assert evaluate_fairness(truncated.ranking, spec, index).satisfied
        seeded = fair_kemeny(
            pm, spec, index, max_nodes=1, warm_starts=(exact.ranking,)
        )
        assert seeded.objective == exact.objective

    def test_truncation_is_deterministic(self, rng):
        table = helpers.grid_table(12, 3, 2)
        spec = FairnessSpec(delta_default=Fraction(1, 10), intersection_attrs=ALL)
        index = spec.build_index(table)
        rankings = helpers.random_ranking_set(table, 9, rng)
        pm = build_precedence_matrix(rankings, table)
        first = fair_kemeny(pm, spec, index, max_nodes=500)
        second = fair_kemeny(pm, spec, index, max_nodes=500)
        assert first == second

    def test_budget_error_without_any_incumbent(self):
        # repair stalls on the odd-parity instance, so a zero-node search
        # has nothing to return: the truncation is reported as a budget stop
        table, rankings = odd_parity_instance()
        spec = FairnessSpec(delta_default=Fraction(0), intersection_attrs=None)
        index = spec.build_index(table)
        pm = build_precedence_matrix(rankings, table)
        with pytest.raises(BudgetExceeded):
            fair_kemeny(pm, spec, index, max_nodes=0)


class TestPipelines:
    def test_all_pipelines_satisfy_and_account_losses(self, rng):
        table = helpers.grid_table(12, 3, 2)
        spec = FairnessSpec(delta_default=Fraction(1, 4), intersection_attrs=ALL)
        index = spec.build_index(table)
        rankings = helpers.random_ranking_set(table, 7, rng)
        for method in ("borda", "copeland", "schulze", "pick-fairest"):
            result = fair_pipeline(method, rankings, spec, index)
            assert result.method == method
            assert result.trace.final_report.satisfied
            assert result.pd_loss_fair == pd_loss(rankings, result.ranking)
            assert result.pd_loss_unaware == pd_loss(
                rankings, result.unaware_ranking
            )
            assert (
                result.price_of_fairness
                == result.pd_loss_fair - result.pd_loss_unaware
            )

    def test_satisfying_pick_needs_no_swaps(self, rng):
        table = helpers.grid_table(8, 2, 2)
        spec = FairnessSpec(delta_default=Fraction(1), intersection_attrs=ALL)
        index = spec.build_index(table)
        rankings = helpers.random_ranking_set(table, 4, rng)
        result = fair_pipeline("pick-fairest", rankings, spec, index)
        assert result.trace.iterations == 0
        assert result.ranking == result.unaware_ranking
        assert result.price_of_fairness == 0

    def test_pipeline_never_beats_exact_fair_solver(self, rng):
        table = helpers.grid_table(8, 2, 2)
        spec = FairnessSpec(delta_default=Fraction(1, 4), intersection_attrs=ALL)
        index = spec.build_index(table)
        rankings = helpers.random_ranking_set(table, 6, rng)
        pm = build_precedence_matrix(rankings, table)
        exact = fair_kemeny(pm, spec, index)
        exact_loss = pd_loss(rankings, exact.ranking)
        for method in ("borda", "copeland", "schulze", "pick-fairest"):
            result = fair_pipeline(method, rankings, spec, index)
            assert pd_loss(rankings, result.ranking) >= exact_loss


class TestEnabledEntities:
    def test_scope_filters(self):
        table = helpers.grid_table(12, 3, 2)
        full = FairnessSpec(delta_default=Fraction(1, 10), intersection_attrs=ALL)
        index = full.build_index(table)
        names = [e.name for e, _ in enabled_entities(full, index)]
        assert names == ["race", "gender", "intersection"]
        attrs_only = FairnessSpec(
            delta_default=Fraction(1, 10), intersection_attrs=None
        )
        names = [
            e.name
            for e, _ in enabled_entities(attrs_only, attrs_only.build_index(table))
        ]
        assert names == ["race", "gender"]
        inter_only = FairnessSpec(
            delta_default=Fraction(1, 10), constrain_attributes=False
        )
        names = [
            e.name
            for e, _ in enabled_entities(inter_only, inter_only.build_index(table))
        ]
        assert names == ["intersection"]

    def test_vacuous_attribute_threshold_dropped(self):
        table = helpers.grid_table(12, 3, 2)
        spec = FairnessSpec(
            delta_default=Fraction(1, 10),
            delta_attributes={"race": Fraction(1)},
            intersection_attrs=None,
        )
        index = spec.build_index(table)
        names = [e.name for e, _ in enabled_entities(spec, index)]
        assert names == ["gender"]

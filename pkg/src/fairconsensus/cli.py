"""Command-line surface: ingestion, aggregation, reports, generation, sweeps.

File formats
------------
candidates CSV: header ``candidate_id,<attr1>,<attr2>,...``; one candidate
per row; values are opaque non-empty strings. rankings CSV: no header, one
ranking per row as candidate ids from first place to last; every row must
be a permutation of the candidate table.

Reports carry every rational both exactly (numerator/denominator) and as a
6-digit decimal. All output files are written atomically (temp file plus
rename), so a failing command leaves no partial outputs. Wall-clock timings
go to a separate ``timing`` sidecar so the data files are byte-identical
across reruns with the same inputs and seeds.

Exit codes: 0 success; 2 unusable input (parse or validation failure,
unknown flag values, oversized exact instances); 3 no ranking can satisfy
the thresholds; 4 swap repair stalled; 5 time budget exhausted with no
result; 6 scenario targets unreachable.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import re
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from .consensus import (
    DEFAULT_MAX_EXACT_N,
    KemenySolution,
    borda,
    copeland,
    kemeny_exact,
    kemeny_weighted,
    pick_fairest,
    schulze,
)
from .errors import (
    BudgetExceeded,
    DegenerateAttribute,
    DegenerateGroup,
    DegenerateIntersection,
    FairConsensusError,
    Infeasible,
    InconsistentCandidateSet,
    InstanceTooLarge,
    ParseError,
    RepairStalled,
    ScenarioUnreachable,
    UnknownAttribute,
)
from .fair import fair_kemeny, fair_pipeline
from .mallows import (
    MallowsConfig,
    ScenarioTargets,
    build_scenario,
    derive_seed,
    sample_mallows,
    scenario_targets,
)
from .metrics import (
    FairnessReport,
    FairnessSpec,
    evaluate_fairness,
    pd_loss,
)
from .model import (
    ALL,
    CandidateTable,
    Ranking,
    RankingSet,
    build_group_index,
    build_precedence_matrix,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INFEASIBLE = 3
EXIT_REPAIR_STALLED = 4
EXIT_BUDGET = 5
EXIT_UNREACHABLE = 6

METHODS = (
    "kemeny",
    "fair-kemeny",
    "borda",
    "fair-borda",
    "copeland",
    "fair-copeland",
    "schulze",
    "fair-schulze",
    "pick-fairest",
    "correct-pick",
    "kemeny-weighted",
)

_PIPELINE_BASE = {
    "fair-borda": "borda",
    "fair-copeland": "copeland",
    "fair-schulze": "schulze",
    "correct-pick": "pick-fairest",
}

_DELTA_RE = re.compile(r"^[0-9]+(\.[0-9]{1,6})?$")


# ---------------------------------------------------------------------------
# value rendering


def decimal_string(value: Fraction, digits: int = 6) -> str:
    """Exact fixed-point rendering, round half to even."""
    sign = "-" if value < 0 else ""
    scaled = abs(value) * 10**digits
    whole, rem = divmod(scaled.numerator, scaled.denominator)
    double = 2 * rem
    if double > scaled.denominator or (double == scaled.denominator and whole % 2):
        whole += 1
    text = str(whole).rjust(digits + 1, "0")
    return f"{sign}{text[:-digits]}.{text[-digits:]}"


def fraction_json(value: Fraction | None) -> dict | None:
    if value is None:
        return None
    return {
        "num": value.numerator,
        "den": value.denominator,
        "decimal": decimal_string(value),
    }


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def parse_delta(text: str, what: str = "delta") -> Fraction:
    """Thresholds are decimal strings with at most 6 fractional digits."""
    if not _DELTA_RE.match(text):
        raise ParseError(
            f"{what} must be a decimal in [0, 1] with at most 6 fractional "
            f"digits, got {text!r}"
        )
    value = Fraction(text)
    if not 0 <= value <= 1:
        raise ParseError(f"{what} must lie in [0, 1], got {text!r}")
    return value


# ---------------------------------------------------------------------------
# CSV formats


def read_candidates(path: str | Path) -> CandidateTable:
    """Parse a candidates CSV; diagnostics cite the offending row/column."""
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    if not rows:
        raise ParseError(f"{path}: empty candidates file")
    header = rows[0]
    if not header or header[0] != "candidate_id":
        raise ParseError(
            f"{path}: first header column must be 'candidate_id', "
            f"got {header[0] if header else '<empty>'!r}"
        )
    attributes = tuple(header[1:])
    for col, name in enumerate(attributes, start=2):
        if not name:
            raise ParseError(f"{path}: header column {col} is empty")
    if len(set(attributes)) != len(attributes):
        raise ParseError(f"{path}: duplicate attribute column in header")
    ids: list[str] = []
    values: list[tuple[str, ...]] = []
    seen: set[str] = set()
    for row_no, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(
                f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}"
            )
        cid = row[0]
        if not cid:
            raise ParseError(f"{path}: row {row_no} has an empty candidate_id")
        if cid in seen:
            raise ParseError(f"{path}: row {row_no} repeats candidate_id {cid!r}")
        seen.add(cid)
        for col, cell in enumerate(row[1:], start=2):
            if not cell:
                raise ParseError(f"{path}: row {row_no} column {col} is empty")
        ids.append(cid)
        values.append(tuple(row[1:]))
    try:
        return CandidateTable(tuple(ids), attributes, tuple(values))
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def write_candidates(table: CandidateTable, path: str | Path) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(("candidate_id", *table.attributes))
    for cid, row in zip(table.candidate_ids, table.values):
        writer.writerow((cid, *row))
    _atomic_write(Path(path), buffer.getvalue())


def read_rankings(path: str | Path, table: CandidateTable) -> RankingSet:
    """Parse a rankings CSV; every row must be a permutation of the table."""
    expected = set(table.candidate_ids)
    rankings: list[Ranking] = []
    with open(path, newline="", encoding="utf-8") as handle:
        for row_no, row in enumerate(csv.reader(handle), start=1):
            if len(row) != table.n:
                raise ParseError(
                    f"{path}: row {row_no} ranks {len(row)} candidates, "
                    f"expected {table.n}"
                )
            seen: set[str] = set()
            for cid in row:
                if cid not in expected:
                    raise ParseError(
                        f"{path}: row {row_no} names unknown candidate {cid!r}"
                    )
                if cid in seen:
                    raise ParseError(
                        f"{path}: row {row_no} repeats candidate {cid!r}"
                    )
                seen.add(cid)
            missing = expected - seen
            if missing:
                raise ParseError(
                    f"{path}: row {row_no} omits candidate "
                    f"{min(missing)!r}"
                )
            rankings.append(Ranking(tuple(row)))
    if not rankings:
        raise ParseError(f"{path}: no rankings found")
    return RankingSet(tuple(rankings))


def rankings_csv_text(rankings: Sequence[Ranking]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    for ranking in rankings:
        writer.writerow(ranking.order)
    return buffer.getvalue()


def write_rankings(rankings: Sequence[Ranking], path: str | Path) -> None:
    _atomic_write(Path(path), rankings_csv_text(rankings))


def _atomic_write(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def publish(out_dir: str | Path, files: Mapping[str, str]) -> None:
    """Write a set of finished files; nothing lands before all are built."""
    out = Path(out_dir)
    for name, content in files.items():
        _atomic_write(out / name, content)


# ---------------------------------------------------------------------------
# report serialization


def fairness_report_json(report: FairnessReport) -> dict:
    attributes = {}
    for name, shares in report.attribute_shares.items():
        attributes[name] = {
            "fpr": {label: fraction_json(s) for label, s in shares.items()},
            "spread": fraction_json(report.attribute_spreads[name]),
        }
    intersection = None
    if report.intersection_spread is not None:
        intersection = {
            "cells": [
                {"values": list(values), "fpr": fraction_json(share)}
                for values, share in report.intersection_shares.items()
            ],
            "spread": fraction_json(report.intersection_spread),
        }
    violation = None
    if report.max_violation is not None:
        violation = {
            "entity": report.max_violation[0],
            "spread": fraction_json(report.max_violation[1]),
        }
    return {
        "satisfied": report.satisfied,
        "attributes": attributes,
        "intersection": intersection,
        "max_violation": violation,
        "warnings": list(report.warnings),
    }


def fairness_spec_json(spec: FairnessSpec) -> dict:
    if spec.intersection_attrs is None:
        intersection = None
    elif spec.intersection_attrs == ALL:
        intersection = "all"
    else:
        intersection = list(spec.intersection_attrs)
    return {
        "default": fraction_json(spec.delta_default),
        "attributes": {
            name: fraction_json(value)
            for name, value in sorted(spec.delta_attributes.items())
        },
        "intersection": fraction_json(spec.delta_intersection),
        "intersection_attributes": intersection,
        "constrain_attributes": spec.constrain_attributes,
    }


def json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"


# ---------------------------------------------------------------------------
# shared flag handling


def add_fairness_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--delta",
        default="1",
        help="threshold applied to every attribute and the intersection "
        "(decimal in [0,1], up to 6 fractional digits; default 1 = report only)",
    )
    parser.add_argument(
        "--delta-attr",
        action="append",
        default=[],
        metavar="NAME=VALUE",
        help="per-attribute threshold override (repeatable)",
    )
    parser.add_argument(
        "--delta-inter",
        default=None,
        metavar="VALUE",
        help="intersection threshold override",
    )
    parser.add_argument(
        "--intersection",
        default="all",
        metavar="ATTRS",
        help="'all', 'none', or comma-separated attribute names forming "
        "the intersection (default all)",
    )
    parser.add_argument(
        "--attributes",
        default="all",
        choices=("all", "none"),
        help="'none' disables the per-attribute constraints (default all)",
    )


def build_fairness_spec(args: argparse.Namespace, table: CandidateTable) -> FairnessSpec:
    overrides = {}
    for item in args.delta_attr:
        name, sep, value = item.partition("=")
        if not sep:
            raise ParseError(f"--delta-attr expects NAME=VALUE, got {item!r}")
        table.attribute_index(name)
        overrides[name] = parse_delta(value, f"--delta-attr {name}")
    if args.intersection == "all":
        intersection_attrs: tuple[str, ...] | str | None = ALL
    elif args.intersection == "none":
        intersection_attrs = None
    else:
        names = tuple(part.strip() for part in args.intersection.split(","))
        for name in names:
            table.attribute_index(name)
        intersection_attrs = names
    return FairnessSpec(
        delta_default=parse_delta(args.delta, "--delta"),
        delta_attributes=overrides,
        delta_intersection=(
            None
            if args.delta_inter is None
            else parse_delta(args.delta_inter, "--delta-inter")
        ),
        intersection_attrs=intersection_attrs,
        constrain_attributes=args.attributes == "all",
    )


# ---------------------------------------------------------------------------
# aggregate


def _aggregate_once(
    method: str,
    rankings: RankingSet,
    spec: FairnessSpec,
    index,
    *,
    budget_ms: int | None,
    max_exact_n: int,
    want_pof: bool,
    max_nodes: int | None = None,
):
    """Run one method; returns (consensus, extras dict for the report)."""
    table = index.table
    extras: dict = {
        "objective": None,
        "optimal": None,
        "nodes_explored": None,
        "swaps": None,
        "pd_loss_unaware": None,
        "price_of_fairness": None,
    }

    def note_solution(solution: KemenySolution) -> Ranking:
        extras["objective"] = solution.objective
        extras["optimal"] = solution.optimal
        extras["nodes_explored"] = solution.nodes_explored
        return solution.ranking

    def unaware_kemeny_pof(consensus: Ranking) -> None:
        if not want_pof:
            return
        base = kemeny_exact(
            build_precedence_matrix(rankings, table),
            time_budget_ms=budget_ms,
            max_exact_n=max_exact_n,
        )
        before = pd_loss(rankings, base.ranking)
        extras["pd_loss_unaware"] = before
        extras["price_of_fairness"] = pd_loss(rankings, consensus) - before

    if method == "kemeny":
        consensus = note_solution(
            kemeny_exact(
                build_precedence_matrix(rankings, table),
                time_budget_ms=budget_ms,
                max_exact_n=max_exact_n,
            )
        )
    elif method == "fair-kemeny":
        consensus = note_solution(
            fair_kemeny(
                build_precedence_matrix(rankings, table),
                spec,
                index,
                time_budget_ms=budget_ms,
                max_exact_n=max_exact_n,
                max_nodes=max_nodes,
            )
        )
        unaware_kemeny_pof(consensus)
    elif method == "kemeny-weighted":
        consensus = note_solution(
            kemeny_weighted(
                rankings,
                spec,
                index,
                time_budget_ms=budget_ms,
                max_exact_n=max_exact_n,
            )
        )
        unaware_kemeny_pof(consensus)
    elif method == "borda":
        consensus = borda(rankings, table)
    elif method == "copeland":
        consensus = copeland(build_precedence_matrix(rankings, table))
    elif method == "schulze":
        consensus = schulze(build_precedence_matrix(rankings, table))
    elif method == "pick-fairest":
        consensus = pick_fairest(rankings, spec, index)
    elif method in _PIPELINE_BASE:
        result = fair_pipeline(_PIPELINE_BASE[method], rankings, spec, index)
        consensus = result.ranking
        extras["swaps"] = result.trace.iterations
        extras["pd_loss_unaware"] = result.pd_loss_unaware
        extras["price_of_fairness"] = result.price_of_fairness
    else:
        raise ParseError(f"unknown method {method!r}")
    return consensus, extras


def cmd_aggregate(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    table = read_candidates(args.candidates)
    rankings = read_rankings(args.rankings, table)
    spec = build_fairness_spec(args, table)
    index = spec.build_index(table)
    consensus, extras = _aggregate_once(
        args.method,
        rankings,
        spec,
        index,
        budget_ms=args.budget_ms,
        max_exact_n=args.max_exact_n,
        want_pof=not args.no_pof,
        max_nodes=args.max_nodes,
    )
    report = evaluate_fairness(consensus, spec, index)
    loss = pd_loss(rankings, consensus)
    payload = {
        "method": args.method,
        "seed": None,
        "delta": fairness_spec_json(spec),
        "consensus": list(consensus.order),
        "fairness": fairness_report_json(report),
        "pd_loss": fraction_json(loss),
        "pd_loss_unaware": fraction_json(extras["pd_loss_unaware"]),
        "price_of_fairness": fraction_json(extras["price_of_fairness"]),
        "swaps": extras["swaps"],
        "objective": extras["objective"],
        "optimal": extras["optimal"],
        "nodes_explored": extras["nodes_explored"],
        "inputs": {
            "candidates_sha256": sha256_file(args.candidates),
            "rankings_sha256": sha256_file(args.rankings),
        },
    }
    millis = int((time.perf_counter() - started) * 1000)
    publish(
        args.out,
        {
            "consensus.csv": rankings_csv_text([consensus]),
            "report.json": json_text(payload),
            "timing.json": json_text({"millis": millis}),
        },
    )
    print(
        f"{args.method}: consensus over {table.n} candidates written to "
        f"{args.out} (satisfied={report.satisfied}, "
        f"pd_loss={decimal_string(loss)})"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# metrics


def cmd_metrics(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    table = read_candidates(args.candidates)
    base = read_rankings(args.rankings, table)
    spec = build_fairness_spec(args, table)
    index = spec.build_index(table)
    score_paths = args.score if args.score else [args.rankings]

    group_columns: list[tuple[str, str]] = []
    for entity in index.attribute_entities:
        for group in entity.groups:
            group_columns.append((entity.name, group.label))

    entries = []
    csv_rows = []
    for path in score_paths:
        scored = read_rankings(path, table)
        for row_no, ranking in enumerate(scored.rankings, start=1):
            report = evaluate_fairness(ranking, spec, index)
            loss = pd_loss(base, ranking)
            entries.append(
                {
                    "source": str(path),
                    "row": row_no,
                    "fairness": fairness_report_json(report),
                    "pd_loss": fraction_json(loss),
                }
            )
            cells = [str(path), str(row_no)]
            for name, label in group_columns:
                cells.append(decimal_string(report.attribute_shares[name][label]))
            for entity in index.attribute_entities:
                cells.append(decimal_string(report.attribute_spreads[entity.name]))
            cells.append(
                ""
                if report.intersection_spread is None
                else decimal_string(report.intersection_spread)
            )
            cells.append(decimal_string(loss))
            csv_rows.append(cells)

    header = ["source", "row"]
    header += [f"fpr:{name}={label}" for name, label in group_columns]
    header += [f"arp:{entity.name}" for entity in index.attribute_entities]
    header += ["irp", "pd_loss"]
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(csv_rows)

    payload = {
        "delta": fairness_spec_json(spec),
        "inputs": {
            "candidates_sha256": sha256_file(args.candidates),
            "rankings_sha256": sha256_file(args.rankings),
            "scored_sha256": {str(p): sha256_file(p) for p in score_paths},
        },
        "rankings": entries,
    }
    millis = int((time.perf_counter() - started) * 1000)
    publish(
        args.out,
        {
            "metrics.csv": buffer.getvalue(),
            "metrics.json": json_text(payload),
            "timing.json": json_text({"millis": millis}),
        },
    )
    print(f"scored {len(csv_rows)} rankings; report written to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# generate


def _scenario_from_name(
    name: str, table: CandidateTable, tolerance: Fraction
) -> ScenarioTargets:
    return scenario_targets(name, table.attributes, tolerance)


def cmd_generate(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    table = read_candidates(args.candidates)
    if (args.modal is None) == (args.scenario is None):
        raise ParseError("exactly one of --modal and --scenario is required")
    index = None
    targets = None
    if args.modal is not None:
        rows = read_rankings(args.modal, table)
        if rows.size != 1:
            raise ParseError(
                f"{args.modal}: modal file must hold exactly one ranking, "
                f"found {rows.size}"
            )
        modal = rows.rankings[0]
    else:
        index = build_group_index(table, ALL)
        tolerance = parse_delta(args.tolerance, "--tolerance")
        if tolerance == 0:
            raise ParseError("--tolerance must be positive")
        targets = _scenario_from_name(args.scenario, table, tolerance)
        modal = build_scenario(index, targets, args.seed)

    config = MallowsConfig(modal, args.theta, args.num_rankings, args.seed)
    sampled = sample_mallows(config)
    files = {"rankings.csv": rankings_csv_text(sampled.rankings)}
    if args.scenario is not None:
        report_spec = FairnessSpec(delta_default=Fraction(1), intersection_attrs=ALL)
        modal_report = evaluate_fairness(modal, report_spec, index)
        files["modal.csv"] = rankings_csv_text([modal])
        files["modal_report.json"] = json_text(
            {
                "scenario": args.scenario,
                "targets": {
                    "arp": {
                        name: {
                            "target": fraction_json(t),
                            "tolerance": fraction_json(tol),
                        }
                        for name, (t, tol) in targets.arp.items()
                    },
                    "irp": (
                        None
                        if targets.irp is None
                        else {
                            "target": fraction_json(targets.irp[0]),
                            "tolerance": fraction_json(targets.irp[1]),
                        }
                    ),
                },
                "theta": args.theta,
                "num_rankings": args.num_rankings,
                "seed": args.seed,
                "fairness": fairness_report_json(modal_report),
                "inputs": {"candidates_sha256": sha256_file(args.candidates)},
            }
        )
    millis = int((time.perf_counter() - started) * 1000)
    files["timing.json"] = json_text({"millis": millis})
    publish(args.out, files)
    print(
        f"generated {args.num_rankings} rankings over {table.n} candidates "
        f"(theta={args.theta}, seed={args.seed}) in {args.out}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# experiment


def _config_delta_text(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, float)):
        return repr(value)
    raise ParseError(f"delta grid entries must be numbers or strings, got {value!r}")


def _experiment_targets(config: dict, table: CandidateTable) -> ScenarioTargets:
    scenario = config["scenario"]
    tolerance = parse_delta(
        _config_delta_text(config.get("tolerance", "0.05")), "tolerance"
    )
    if isinstance(scenario, str):
        return _scenario_from_name(scenario, table, tolerance)
    if not isinstance(scenario, dict):
        raise ParseError("scenario must be a preset name or a target object")
    arp = {}
    for name, pair in scenario.get("arp", {}).items():
        table.attribute_index(name)
        arp[name] = (
            parse_delta(_config_delta_text(pair[0]), f"arp target {name}"),
            parse_delta(_config_delta_text(pair[1]), f"arp tolerance {name}"),
        )
    irp = None
    if scenario.get("irp") is not None:
        pair = scenario["irp"]
        irp = (
            parse_delta(_config_delta_text(pair[0]), "irp target"),
            parse_delta(_config_delta_text(pair[1]), "irp tolerance"),
        )
    return ScenarioTargets(arp, irp)


def cmd_experiment(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    config_path = Path(args.config)
    with open(config_path, encoding="utf-8") as handle:
        try:
            config = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{config_path}: invalid JSON ({exc})") from exc

    def require(key: str):
        if key not in config:
            raise ParseError(f"{config_path}: missing required key {key!r}")
        return config[key]

    out_dir = args.out if args.out else config.get("out")
    if not out_dir:
        raise ParseError("output directory required (--out or config 'out')")
    base_dir = config_path.parent

    table = read_candidates(base_dir / require("candidates"))
    methods = require("methods")
    thetas = require("thetas")
    delta_texts = [_config_delta_text(d) for d in require("deltas")]
    trials = int(require("trials"))
    num_rankings = int(require("num_rankings"))
    base_seed = int(require("seed"))
    budget_ms = config.get("budget_ms")
    max_exact_n = int(config.get("max_exact_n", DEFAULT_MAX_EXACT_N))
    max_nodes = config.get("max_nodes")
    if max_nodes is not None:
        max_nodes = int(max_nodes)
    if not methods or not thetas or not delta_texts or trials < 1:
        raise ParseError(f"{config_path}: grids must be non-empty and trials >= 1")
    for method in methods:
        if method not in METHODS:
            raise ParseError(f"{config_path}: unknown method {method!r}")

    intersection = config.get("intersection", "all")
    if intersection == "all":
        intersection_attrs: tuple[str, ...] | str | None = ALL
    elif intersection in ("none", None):
        intersection_attrs = None
    else:
        for name in intersection:
            table.attribute_index(name)
        intersection_attrs = tuple(intersection)
    constrain_attributes = config.get("attributes", "all") == "all"

    def spec_for(delta_text: str) -> FairnessSpec:
        return FairnessSpec(
            delta_default=parse_delta(delta_text, "delta"),
            intersection_attrs=intersection_attrs,
            constrain_attributes=constrain_attributes,
        )

    report_spec = FairnessSpec(delta_default=Fraction(1), intersection_attrs=ALL)
    report_index = report_spec.build_index(table)
    solver_index = spec_for(delta_texts[0]).build_index(table)

    if "modal" in config and config.get("scenario") is not None:
        raise ParseError(f"{config_path}: give either 'modal' or 'scenario'")
    if "modal" in config:
        rows = read_rankings(base_dir / config["modal"], table)
        if rows.size != 1:
            raise ParseError("modal file must hold exactly one ranking")
        modal = rows.rankings[0]
    else:
        require("scenario")
        modal = build_scenario(
            report_index,
            _experiment_targets(config, table),
            int(config.get("scenario_seed", base_seed)),
        )

    sample_cache: dict[tuple[int, int], RankingSet] = {}
    matrix_cache: dict[tuple[int, int], object] = {}
    kemeny_cache: dict[tuple[int, int], KemenySolution] = {}

    def samples(ti: int, trial: int) -> RankingSet:
        key = (ti, trial)
        if key not in sample_cache:
            sub = derive_seed(base_seed, ti, trial)
            sample_cache[key] = sample_mallows(
                MallowsConfig(modal, float(thetas[ti]), num_rankings, sub)
            )
        return sample_cache[key]

    def matrix(ti: int, trial: int):
        key = (ti, trial)
        if key not in matrix_cache:
            matrix_cache[key] = build_precedence_matrix(samples(ti, trial), table)
        return matrix_cache[key]

    def unaware_kemeny(ti: int, trial: int) -> KemenySolution:
        key = (ti, trial)
        if key not in kemeny_cache:
            kemeny_cache[key] = kemeny_exact(
                matrix(ti, trial),
                time_budget_ms=budget_ms,
                max_exact_n=max_exact_n,
            )
        return kemeny_cache[key]

    # fair-kemeny cells are solved tightest-threshold-first per instance,
    # feeding each solution to the next looser threshold as a warm start: a
    # ranking feasible at a tight threshold stays feasible at looser ones,
    # so each search starts from an incumbent at least that good and the
    # reported disagreement never increases as the threshold relaxes
    fk_runs: dict[tuple[int, str, int], tuple[str, Ranking | None, int]] = {}
    if "fair-kemeny" in methods:
        ascending = sorted(
            range(len(delta_texts)),
            key=lambda di: parse_delta(delta_texts[di], "delta"),
        )
        for ti in range(len(thetas)):
            for trial in range(trials):
                warm: Ranking | None = None
                for di in ascending:
                    delta_text = delta_texts[di]
                    cell_start = time.perf_counter()
                    status = "ok"
                    consensus: Ranking | None = None
                    try:
                        consensus = fair_kemeny(
                            matrix(ti, trial),
                            spec_for(delta_text),
                            solver_index,
                            time_budget_ms=budget_ms,
                            max_exact_n=max_exact_n,
                            max_nodes=max_nodes,
                            warm_starts=() if warm is None else (warm,),
                        ).ranking
                        warm = consensus
                    except Infeasible:
                        status = "infeasible"
                    except RepairStalled:
                        status = "repair-stalled"
                    except BudgetExceeded:
                        status = "budget-exceeded"
                    cell_millis = int((time.perf_counter() - cell_start) * 1000)
                    fk_runs[(ti, delta_text, trial)] = (status, consensus, cell_millis)

    attr_names = list(table.attributes)
    header = (
        ["method", "theta", "delta", "trial", "seed", "status"]
        + [f"arp:{name}" for name in attr_names]
        + ["irp", "pd_loss", "pof", "swaps"]
    )
    rows_out: list[list[str]] = []
    timing_rows: list[list[str]] = []
    cells: dict[tuple[str, str, str], list[dict]] = {}

    for method in methods:
        for ti, theta in enumerate(thetas):
            for delta_text in delta_texts:
                spec = spec_for(delta_text)
                for trial in range(trials):
                    seed = derive_seed(base_seed, ti, trial)
                    rankings = samples(ti, trial)
                    cell_start = time.perf_counter()
                    status = "ok"
                    consensus = None
                    swaps: int | None = None
                    pof: Fraction | None = None
                    millis_override: int | None = None
                    try:
                        if method == "kemeny":
                            consensus = unaware_kemeny(ti, trial).ranking
                        elif method == "fair-kemeny":
                            status, consensus, millis_override = fk_runs[
                                (ti, delta_text, trial)
                            ]
                            if consensus is not None:
                                pof = pd_loss(rankings, consensus) - pd_loss(
                                    rankings, unaware_kemeny(ti, trial).ranking
                                )
                        elif method == "kemeny-weighted":
                            consensus = kemeny_weighted(
                                rankings,
                                spec,
                                solver_index,
                                time_budget_ms=budget_ms,
                                max_exact_n=max_exact_n,
                            ).ranking
                            pof = pd_loss(rankings, consensus) - pd_loss(
                                rankings, unaware_kemeny(ti, trial).ranking
                            )
                        elif method == "borda":
                            consensus = borda(rankings, table)
                        elif method == "copeland":
                            consensus = copeland(matrix(ti, trial))
                        elif method == "schulze":
                            consensus = schulze(matrix(ti, trial))
                        elif method == "pick-fairest":
                            consensus = pick_fairest(rankings, spec, solver_index)
                        else:
                            result = fair_pipeline(
                                _PIPELINE_BASE[method],
                                rankings,
                                spec,
                                solver_index,
                                collect_swaps=False,
                            )
                            consensus = result.ranking
                            swaps = result.trace.iterations
                            pof = result.price_of_fairness
                    except Infeasible:
                        status = "infeasible"
                    except RepairStalled:
                        status = "repair-stalled"
                    except BudgetExceeded:
                        status = "budget-exceeded"
                    cell_millis = (
                        millis_override
                        if millis_override is not None
                        else int((time.perf_counter() - cell_start) * 1000)
                    )

                    row = [method, str(theta), delta_text, str(trial), str(seed), status]
                    if consensus is not None:
                        report = evaluate_fairness(consensus, report_spec, report_index)
                        loss = pd_loss(rankings, consensus)
                        arps = {
                            name: report.attribute_spreads[name] for name in attr_names
                        }
                        row += [decimal_string(arps[name]) for name in attr_names]
                        row.append(
                            ""
                            if report.intersection_spread is None
                            else decimal_string(report.intersection_spread)
                        )
                        row.append(decimal_string(loss))
                        row.append("" if pof is None else decimal_string(pof))
                        row.append("" if swaps is None else str(swaps))
                        cells.setdefault((method, str(theta), delta_text), []).append(
                            {
                                "arp": arps,
                                "irp": report.intersection_spread,
                                "pd_loss": loss,
                                "pof": pof,
                                "swaps": swaps,
                            }
                        )
                    else:
                        row += [""] * (len(attr_names) + 4)
                    rows_out.append(row)
                    timing_rows.append(
                        [method, str(theta), delta_text, str(trial), str(cell_millis)]
                    )

    runs_buffer = io.StringIO()
    writer = csv.writer(runs_buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows_out)

    def mean(values: list[Fraction]) -> Fraction:
        return sum(values, Fraction(0)) / len(values)

    summary_header = (
        ["method", "theta", "delta", "runs", "ok"]
        + [f"mean_arp:{name}" for name in attr_names]
        + ["mean_irp", "mean_pd_loss", "mean_pof", "mean_swaps"]
    )
    summary_buffer = io.StringIO()
    writer = csv.writer(summary_buffer, lineterminator="\n")
    writer.writerow(summary_header)
    for method in methods:
        for theta in thetas:
            for delta_text in delta_texts:
                key = (method, str(theta), delta_text)
                ok_rows = cells.get(key, [])
                row = [method, str(theta), delta_text, str(trials), str(len(ok_rows))]
                if ok_rows:
                    for name in attr_names:
                        row.append(decimal_string(mean([r["arp"][name] for r in ok_rows])))
                    irps = [r["irp"] for r in ok_rows if r["irp"] is not None]
                    row.append(decimal_string(mean(irps)) if irps else "")
                    row.append(decimal_string(mean([r["pd_loss"] for r in ok_rows])))
                    pofs = [r["pof"] for r in ok_rows if r["pof"] is not None]
                    row.append(decimal_string(mean(pofs)) if pofs else "")
                    swap_counts = [r["swaps"] for r in ok_rows if r["swaps"] is not None]
                    row.append(
                        decimal_string(mean([Fraction(s) for s in swap_counts]))
                        if swap_counts
                        else ""
                    )
                else:
                    row += [""] * (len(attr_names) + 4)
                writer.writerow(row)

    timing_buffer = io.StringIO()
    writer = csv.writer(timing_buffer, lineterminator="\n")
    writer.writerow(["method", "theta", "delta", "trial", "millis"])
    writer.writerows(timing_rows)

    millis = int((time.perf_counter() - started) * 1000)
    publish(
        out_dir,
        {
            "runs.csv": runs_buffer.getvalue(),
            "summary.csv": summary_buffer.getvalue(),
            "modal.csv": rankings_csv_text([modal]),
            "timings.csv": timing_buffer.getvalue(),
            "timing.json": json_text({"millis": millis}),
        },
    )
    ok_count = sum(1 for row in rows_out if row[5] == "ok")
    print(
        f"experiment: {len(rows_out)} runs ({ok_count} ok) written to {out_dir}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairconsensus",
        description="Fair multi-attribute consensus ranking toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    agg = sub.add_parser("aggregate", help="compute a consensus ranking")
    agg.add_argument("--method", required=True, choices=METHODS)
    agg.add_argument("--candidates", required=True)
    agg.add_argument("--rankings", required=True)
    agg.add_argument("--out", required=True)
    agg.add_argument("--budget-ms", type=int, default=None)
    agg.add_argument("--max-exact-n", type=int, default=DEFAULT_MAX_EXACT_N)
    agg.add_argument(
        "--max-nodes",
        type=int,
        default=None,
        help="deterministically truncate the fair-kemeny search after this "
        "many branch-and-bound nodes (best incumbent is kept)",
    )
    agg.add_argument(
        "--no-pof",
        action="store_true",
        help="skip the extra exact solve that prices fairness for "
        "fair-kemeny and kemeny-weighted",
    )
    add_fairness_flags(agg)
    agg.set_defaults(func=cmd_aggregate)

    met = sub.add_parser("metrics", help="score rankings against a base set")
    met.add_argument("--candidates", required=True)
    met.add_argument("--rankings", required=True, help="base ranking set")
    met.add_argument(
        "--score",
        action="append",
        default=[],
        help="rankings CSV to score (repeatable; default: the base set)",
    )
    met.add_argument("--out", required=True)
    add_fairness_flags(met)
    met.set_defaults(func=cmd_metrics)

    gen = sub.add_parser("generate", help="sample seeded synthetic rankings")
    gen.add_argument("--candidates", required=True)
    gen.add_argument("--modal", default=None, help="CSV holding one modal ranking")
    gen.add_argument(
        "--scenario",
        default=None,
        choices=("low-fair", "medium-fair", "high-fair"),
        help="construct the modal ranking at preset unfairness levels",
    )
    gen.add_argument("--tolerance", default="0.05")
    gen.add_argument("--theta", type=float, required=True)
    gen.add_argument("--num-rankings", type=int, required=True)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)

    exp = sub.add_parser("experiment", help="run a seeded method/theta/delta sweep")
    exp.add_argument("--config", required=True)
    exp.add_argument("--out", default=None, help="overrides the config 'out'")
    exp.set_defaults(func=cmd_experiment)

    return parser


_ERROR_CODES: tuple[tuple[type, int], ...] = (
    (ParseError, EXIT_PARSE),
    (UnknownAttribute, EXIT_PARSE),
    (InconsistentCandidateSet, EXIT_PARSE),
    (DegenerateAttribute, EXIT_PARSE),
    (DegenerateGroup, EXIT_PARSE),
    (DegenerateIntersection, EXIT_PARSE),
    (InstanceTooLarge, EXIT_PARSE),
    (Infeasible, EXIT_INFEASIBLE),
    (RepairStalled, EXIT_REPAIR_STALLED),
    (BudgetExceeded, EXIT_BUDGET),
    (ScenarioUnreachable, EXIT_UNREACHABLE),
)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FairConsensusError as exc:
        for kind, code in _ERROR_CODES:
            if isinstance(exc, kind):
                print(f"error: {exc}", file=sys.stderr)
                return code
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())

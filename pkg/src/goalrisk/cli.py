"""Command-line interface: validate, analyze, critical, simulate, whatif,
tactics.

Exit codes: 0 success; 1 structural validation errors or a failed
``simulate --compare``; 2 usage errors (bad flags, bad ``--set``, budgets);
3 I/O or lexical/syntax parse failures.

Output is deterministic: the same file and flags produce byte-identical
standard output.  Diagnostics and progress never go to standard output.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .criticality import DEFAULT_TOP, CriticalityRecord, rank_critical
from .model import Diagnostic, GoalModel, leaf_obstacles, validate
from .montecarlo import SimulationResult, compile_program, estimate
from .parser import SYNTAX_CODES, parse
from .propagation import AnalysisReport, propagate
from .tactics import Tactic, default_catalog, load_catalog, match_tactics

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_IO = 3

DEFAULT_SAMPLES = 200000
DEFAULT_SEED = 42
DEFAULT_PRECISION = 4


@dataclass(frozen=True)
class ReportDocument:
    """Everything one invocation wants rendered: the analysis always, the
    criticality ranking and simulation only when the subcommand ran them."""

    model: GoalModel
    analysis: AnalysisReport
    critical: Optional[list[CriticalityRecord]] = None
    simulation: Optional[SimulationResult] = None
    seed: Optional[int] = None


class _UsageError(Exception):
    pass


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_request:  # argparse exits 2 on usage, 0 on --help
        code = exit_request.code
        return code if isinstance(code, int) else EXIT_USAGE
    try:
        return args.handler(args)
    except _UsageError as problem:
        print(f"error: {problem}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as problem:
        print(f"error: {problem}", file=sys.stderr)
        return EXIT_IO


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="goalrisk",
        description="Goal-obstacle risk analysis: probability propagation, "
        "criticality ranking, seeded simulation, and resolution tactics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a model file and report diagnostics")
    p.add_argument("file")
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("analyze", help="propagate probabilities and report EPS/SV")
    p.add_argument("file")
    _add_render_flags(p)
    p.set_defaults(handler=_cmd_analyze)

    p = sub.add_parser("critical", help="rank leaf-obstacle combinations by severity")
    p.add_argument("file")
    p.add_argument("--max-combo", type=int, default=1, metavar="K")
    p.add_argument("--top", type=int, default=DEFAULT_TOP, metavar="N")
    _add_render_flags(p)
    p.set_defaults(handler=_cmd_critical)

    p = sub.add_parser("simulate", help="estimate node probabilities by sampling")
    p.add_argument("file")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, metavar="N")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, metavar="S")
    p.add_argument("--partitions", type=int, default=1, metavar="P")
    p.add_argument(
        "--compare",
        action="store_true",
        help="verify empirical frequencies against the analytic values "
        "(exit 1 if an exactly-propagated node falls outside its radius)",
    )
    _add_render_flags(p)
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("whatif", help="re-analyze with overridden annotations")
    p.add_argument("file")
    p.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="ID.FIELD=VALUE",
        help="override a leaf probability, rds, or weight "
        "(e.g. SessionHijacking.probability=0.5)",
    )
    p.add_argument("--precision", type=int, default=DEFAULT_PRECISION, metavar="N")
    p.set_defaults(handler=_cmd_whatif)

    p = sub.add_parser("tactics", help="suggest resolution tactics per obstacle")
    p.add_argument("file")
    p.add_argument("--catalog", metavar="FILE", help="tactic catalog to use instead of the bundled one")
    p.add_argument(
        "--critical-only",
        action="store_true",
        help="only obstacles appearing in the default criticality ranking",
    )
    p.set_defaults(handler=_cmd_tactics)
    return parser


def _add_render_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--precision", type=int, default=DEFAULT_PRECISION, metavar="N")


# -- shared plumbing ---------------------------------------------------------


def _report_diagnostics(diagnostics: list[Diagnostic]) -> int:
    for diag in diagnostics:
        print(diag, file=sys.stderr)
    if any(d.code in SYNTAX_CODES for d in diagnostics):
        return EXIT_IO
    return EXIT_INVALID


def _load_model(path_text: str) -> GoalModel | int:
    text = Path(path_text).read_text(encoding="utf-8")
    result = parse(text)
    if isinstance(result, list):
        return _report_diagnostics(result)
    return result


def _emit(document: ReportDocument, args: argparse.Namespace) -> None:
    if getattr(args, "format", "text") == "json":
        sys.stdout.buffer.write(render_json(document) + b"\n")
        sys.stdout.buffer.flush()
    else:
        print(render_text(document, precision=args.precision), end="")


# -- subcommands -------------------------------------------------------------


def _cmd_validate(args: argparse.Namespace) -> int:
    text = Path(args.file).read_text(encoding="utf-8")
    result = parse(text)
    if isinstance(result, list):
        return _report_diagnostics(result)
    advisories = validate(result)
    for diag in advisories:
        print(diag, file=sys.stderr)
    goals, obstacles = len(result.goals), len(result.obstacles)
    print(
        f"ok: {result.name!r} with {goals} goals, {obstacles} obstacles, "
        f"{len(result.refinements)} refinements, {len(result.obstructions)} obstructions"
    )
    return EXIT_OK


def _cmd_analyze(args: argparse.Namespace) -> int:
    model = _load_model(args.file)
    if isinstance(model, int):
        return model
    _emit(ReportDocument(model=model, analysis=propagate(model)), args)
    return EXIT_OK


def _cmd_critical(args: argparse.Namespace) -> int:
    model = _load_model(args.file)
    if isinstance(model, int):
        return model
    try:
        records = rank_critical(model, max_combo_size=args.max_combo, top=args.top)
    except ValueError as problem:
        raise _UsageError(str(problem)) from None
    _emit(ReportDocument(model=model, analysis=propagate(model), critical=records), args)
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    model = _load_model(args.file)
    if isinstance(model, int):
        return model
    try:
        result = estimate(model, args.samples, args.seed, partitions=args.partitions)
    except ValueError as problem:
        raise _UsageError(str(problem)) from None
    analysis = propagate(model)
    document = ReportDocument(
        model=model, analysis=analysis, simulation=result, seed=args.seed
    )
    _emit(document, args)
    if args.compare:
        failures = _compare_failures(model, analysis, result)
        for line in failures:
            print(line, file=sys.stderr)
        if failures:
            return EXIT_INVALID
    return EXIT_OK


def _compare_failures(
    model: GoalModel, analysis: AnalysisReport, result: SimulationResult
) -> list[str]:
    """Exactly-propagated nodes whose empirical frequency misses the
    analytic value by more than the confidence radius.

    Nodes whose closed form is an independence approximation (shared
    children) are excluded: the sampler is the ground truth there, so a
    mismatch is expected rather than an error.
    """
    program = compile_program(model)
    exact = dict(zip(program.ids, program.exact))
    analytic = dict(analysis.obstacle_probabilities)
    analytic.update(analysis.goal_eps)
    empirical = dict(result.empirical_obstacle_freq)
    empirical.update(result.empirical_goal_freq)
    failures = []
    for node in sorted(analytic):
        if not exact[node]:
            continue
        gap = abs(empirical[node] - analytic[node])
        if gap > result.confidence_radius[node]:
            failures.append(
                f"compare: {node}: empirical {empirical[node]!r} vs analytic "
                f"{analytic[node]!r} exceeds radius {result.confidence_radius[node]!r}"
            )
    return failures


def _cmd_whatif(args: argparse.Namespace) -> int:
    model = _load_model(args.file)
    if isinstance(model, int):
        return model
    overridden = _apply_overrides(model, args.overrides)
    baseline = propagate(model)
    analysis = propagate(overridden)
    print(
        render_text(
            ReportDocument(model=overridden, analysis=analysis),
            precision=args.precision,
        ),
        end="",
    )
    if args.overrides:
        print(_render_deltas(baseline, analysis, precision=args.precision), end="")
    return EXIT_OK


def _apply_overrides(model: GoalModel, overrides: list[str]) -> GoalModel:
    if not overrides:
        return model
    goals = {g.id: g for g in model.goals}
    obstacles = {o.id: o for o in model.obstacles}
    leaves = set(leaf_obstacles(model))
    for item in overrides:
        target, eq, value_text = item.partition("=")
        node_id, dot, field = target.partition(".")
        if not eq or not dot or not node_id or field not in ("probability", "rds", "weight"):
            raise _UsageError(
                f"override {item!r} is not of the form ID.probability=V, ID.rds=V, or ID.weight=V"
            )
        try:
            value = float(value_text)
        except ValueError:
            raise _UsageError(f"override {item!r}: {value_text!r} is not a number") from None
        if field == "probability":
            if node_id not in leaves:
                raise _UsageError(
                    f"override {item!r}: {node_id!r} is not a leaf obstacle"
                )
            if not 0.0 <= value <= 1.0:
                raise _UsageError(f"override {item!r}: probability must lie in [0,1]")
            obstacles[node_id] = dataclasses.replace(obstacles[node_id], probability=value)
        else:
            if node_id not in goals:
                raise _UsageError(f"override {item!r}: {node_id!r} is not a goal")
            if field == "rds" and not 0.0 <= value <= 1.0:
                raise _UsageError(f"override {item!r}: rds must lie in [0,1]")
            if field == "weight" and value < 0.0:
                raise _UsageError(f"override {item!r}: weight must be non-negative")
            goals[node_id] = dataclasses.replace(goals[node_id], **{field: value})
    return dataclasses.replace(
        model,
        goals=tuple(goals[g.id] for g in model.goals),
        obstacles=tuple(obstacles[o.id] for o in model.obstacles),
    )


def _cmd_tactics(args: argparse.Namespace) -> int:
    model = _load_model(args.file)
    if isinstance(model, int):
        return model
    if args.catalog is not None:
        catalog = load_catalog(Path(args.catalog).read_text(encoding="utf-8"))
        if catalog and isinstance(catalog[0], Diagnostic):
            return _report_diagnostics(catalog)  # type: ignore[arg-type]
    else:
        catalog = default_catalog()
    obstacles = list(model.obstacles)
    if args.critical_only:
        chosen = set()
        if leaf_obstacles(model):
            for record in rank_critical(model):
                if record.score > 0.0:
                    chosen.update(record.combination)
        obstacles = [o for o in obstacles if o.id in chosen]
    matches = match_tactics(
        [o.display_name for o in obstacles], catalog  # type: ignore[arg-type]
    )
    lines = []
    for obstacle in obstacles:
        suggestions = matches[obstacle.display_name]
        lines.append(f"{obstacle.id} ({obstacle.display_name}):")
        if suggestions:
            lines.extend(f"  {name}" for name in suggestions)
        else:
            lines.append("  (no tactics in the catalog)")
    print("\n".join(lines) if lines else "(no obstacles selected)")
    return EXIT_OK


# -- rendering ---------------------------------------------------------------


def render_json(document: ReportDocument) -> bytes:
    """Machine-readable report: sorted keys, full-precision numbers, and
    byte-stable for a given document."""
    model = document.model
    analysis = document.analysis
    leaves = set(leaf_obstacles(model))
    payload: dict[str, object] = {
        "model": model.name,
        "obstacles": [
            {
                "id": o.id,
                "probability": analysis.obstacle_probabilities[o.id],
                "leaf": o.id in leaves,
            }
            for o in model.obstacles
        ],
        "goals": [
            {
                "id": g.id,
                "eps": analysis.goal_eps[g.id],
                "rds": g.rds_value,
                "sv": analysis.goal_sv[g.id],
                "violated": analysis.violated[g.id],
                "weight": g.weight_value,
            }
            for g in model.goals
        ],
    }
    if document.critical is not None:
        payload["critical"] = [
            {
                "combination": list(r.combination),
                "per_goal_sv": dict(r.per_goal_sv),
                "score": r.score,
            }
            for r in document.critical
        ]
    if document.simulation is not None:
        sim = document.simulation
        entry: dict[str, object] = {
            "samples": sim.samples,
            "empirical_obstacle_freq": dict(sim.empirical_obstacle_freq),
            "empirical_goal_freq": dict(sim.empirical_goal_freq),
            "confidence_radius": dict(sim.confidence_radius),
        }
        if document.seed is not None:
            entry["seed"] = document.seed
        payload["simulation"] = entry
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def render_text(document: ReportDocument, *, precision: int = DEFAULT_PRECISION) -> str:
    """Human-readable report; numbers are rounded here and only here."""
    model = document.model
    analysis = document.analysis
    leaves = set(leaf_obstacles(model))
    out: list[str] = [f"model {model.name!r}"]

    def num(value: float) -> str:
        return f"{value:.{precision}f}"

    if model.obstacles:
        out.append("")
        n_leaf = sum(1 for o in model.obstacles if o.id in leaves)
        out.append(f"obstacles ({n_leaf} leaf, {len(model.obstacles) - n_leaf} derived):")
        width = max(len(o.id) for o in model.obstacles)
        for o in model.obstacles:
            kind = "leaf" if o.id in leaves else "derived"
            out.append(
                f"  {o.id:<{width}}  probability {num(analysis.obstacle_probabilities[o.id])}  {kind}"
            )
    if model.goals:
        out.append("")
        out.append("goals:")
        width = max(len(g.id) for g in model.goals)
        for g in model.goals:
            status = "VIOLATED" if analysis.violated[g.id] else "ok"
            out.append(
                f"  {g.id:<{width}}  eps {num(analysis.goal_eps[g.id])}  "
                f"rds {num(g.rds_value)}  sv {num(analysis.goal_sv[g.id])}  {status}"
            )

    if document.critical is not None:
        out.append("")
        out.append("critical combinations:")
        if not document.critical:
            out.append("  (none)")
        for rank, record in enumerate(document.critical, start=1):
            out.append(
                f"  {rank:>2}. score {num(record.score)}  {', '.join(record.combination)}"
            )
            for gid in sorted(record.per_goal_sv):
                sv = record.per_goal_sv[gid]
                if sv > 0.0:
                    out.append(f"        {gid} sv {num(sv)}")

    if document.simulation is not None:
        sim = document.simulation
        out.append("")
        seed_note = "" if document.seed is None else f"  seed {document.seed}"
        out.append(f"simulation: samples {sim.samples}{seed_note}")
        analytic = dict(analysis.obstacle_probabilities)
        analytic.update(analysis.goal_eps)
        empirical = dict(sim.empirical_obstacle_freq)
        empirical.update(sim.empirical_goal_freq)
        width = max(len(n) for n in empirical)
        for node in sorted(empirical):
            out.append(
                f"  {node:<{width}}  empirical {num(empirical[node])}  "
                f"analytic {num(analytic[node])}  radius {num(sim.confidence_radius[node])}"
            )
    out.append("")
    return "\n".join(out)


def _render_deltas(
    baseline: AnalysisReport, analysis: AnalysisReport, *, precision: int
) -> str:
    def num(value: float) -> str:
        return f"{value:+.{precision}f}"

    out = ["", "deltas vs baseline:"]
    width = max(len(g) for g in analysis.goal_eps)
    for gid in analysis.goal_eps:
        out.append(
            f"  {gid:<{width}}  eps {num(analysis.goal_eps[gid] - baseline.goal_eps[gid])}  "
            f"sv {num(analysis.goal_sv[gid] - baseline.goal_sv[gid])}"
        )
    out.append("")
    return "\n".join(out)


if __name__ == "__main__":
    sys.exit(main())

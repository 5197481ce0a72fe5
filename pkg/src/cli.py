"""Command-line entry point: gen, solve, mutate, filter, stats, run, report and probe."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

from .corpus import GenKind, GenSpec, IoError, QueryKind, filter_dataset, generate, load, stats, write
from .errors import HarnessError, UsageError
from .eval import bisc_run, load_records, load_run_config, run
from .llm import BackendSpec, probe
from .logic.core import TaskKind
from .mutation import MutationKind, mutate_dataset
from .mutation.engine import sidecar_path, write_records as write_mutations
from .oracle import OracleConfig, entailment, solve
from .report import (
    ReportFormat,
    emit_report,
    load_tags,
    pair_deltas,
    summarize_cells,
    tag_errors,
    validate_cells,
    validate_rows,
)
from .smtlib import parse, print_term


LOGGER = logging.getLogger(__name__)

_GEN_KINDS = {"khop": GenKind.KHOP_CHAIN, "cnf": GenKind.RANDOM_CNF}
_MUTATION_KINDS = {
    "parens": MutationKind.MISMATCHED_PARENS,
    "misspell": MutationKind.MISSPELLED_IDENT,
    "smtlib-grammar": MutationKind.MIX_SMTLIB_GRAMMAR,
    "fol-grammar": MutationKind.MIX_FOL_GRAMMAR,
}
_FORMATS = {"csv": ReportFormat.CSV, "json": ReportFormat.JSON, "md": ReportFormat.MARKDOWN, "markdown": ReportFormat.MARKDOWN}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


# ------------------------------------------------------------------ commands
def _cmd_gen(args: argparse.Namespace) -> int:
    spec = GenSpec(
        kind=_GEN_KINDS[args.kind],
        count=args.count,
        hops=args.hops,
        vars=args.vars,
        clause_ratio=args.ratio,
        seed=args.seed,
        task_kind=TaskKind.TERNARY_ENTAILMENT if args.ternary else TaskKind.BINARY_SATNESS,
        query=QueryKind(args.query),
        distractors=args.distractors,
        name=args.name,
    )
    dataset = generate(spec)
    path = write(dataset, args.out)
    LOGGER.info("Generated %d problems into %s", len(dataset), path)
    return 0


def _cmd_solve(args: argparse.Namespace) -> int:
    script = parse(_read_text(args.path))
    cfg = OracleConfig.from_env()
    if args.entailment:
        print(entailment(script, cfg).value)
        return 0
    result = solve(script, cfg, with_core=args.core)
    print(result.verdict.value)
    if args.model and result.witness is not None:
        for name, value in sorted(result.witness.bindings.items()):
            shown = str(value).lower() if isinstance(value, bool) else str(value)
            print(f"{name} = {shown}")
    elif args.model and result.method == "external":
        LOGGER.warning("The external solver returns no model")
    if args.core and result.core is not None:
        for index in result.core.sorted():
            print(f"[{index}] {print_term(script.assertions[index])}")
    LOGGER.debug("Decided by %s", result.method)
    return 0


def _cmd_mutate(args: argparse.Namespace) -> int:
    dataset = load(args.dataset)
    derived, records = mutate_dataset(dataset, _MUTATION_KINDS[args.kind], args.seed, args.sample)
    path = write(derived, args.out)
    write_mutations(records, sidecar_path(path))
    LOGGER.info("Mutated %d of %d problems into %s", len(derived), len(dataset), path)
    return 0


def _cmd_filter(args: argparse.Namespace) -> int:
    dataset = load(args.dataset)
    kept = filter_dataset(
        dataset,
        max_loc=args.max_loc,
        max_tokens_per_line=args.max_tokens_per_line,
        max_tokens=args.max_tokens,
    )
    write(kept, args.out)
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    print(json.dumps(stats(load(args.dataset)).to_dict(), indent=2, ensure_ascii=False))
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = load_run_config(
        args.config,
        dataset=args.dataset,
        out=args.out,
        strategy=args.strategy,
        order=args.order,
        nl_context=True if args.nl_context else None,
        backend=args.backend,
        sc=args.sc,
        parallel=args.parallel,
        seed=args.seed,
        repeats=args.repeats,
    )
    records = bisc_run(cfg, samples_per_order=args.sc) if args.bisc else run(cfg)
    correct = sum(1 for r in records if r.correct)
    LOGGER.info("%s on %s: %d/%d correct", cfg.strategy_label, cfg.backend.label, correct, len(records))
    return 0


def _external_rows(path: str) -> List[Dict[str, str]]:
    """Published rows as CSV with ``label,accuracy,unknown,exe_acc`` columns."""
    try:
        with Path(path).open("r", encoding="utf-8", newline="") as fh:
            return list(csv.DictReader(fh))
    except OSError as exc:
        raise IoError(f"cannot read rows {path}: {exc}") from exc


def _cmd_report(args: argparse.Namespace) -> int:
    records = [r for path in args.records for r in load_records(Path(path))]
    cells = summarize_cells(records)
    deltas = []
    if args.baseline:
        baseline = summarize_cells([r for path in args.baseline for r in load_records(Path(path))])
        deltas = pair_deltas(baseline, cells)
    taxonomy = tag_errors(records, load_tags(args.tags)) if args.tags else []
    checks = []
    if args.validate:
        checks.extend(validate_cells(cells))
    if args.rows:
        checks.extend(validate_rows(_external_rows(args.rows)))
    flagged = [c.label for c in checks if not c.ok]
    if flagged:
        LOGGER.warning("exe_acc inconsistent with accuracy and unknown rate for: %s", ", ".join(flagged))
    path = emit_report(cells, _FORMATS[args.format], args.out, deltas=deltas, taxonomy=taxonomy, checks=checks)
    print(path)
    return 0


def _cmd_probe(args: argparse.Namespace) -> int:
    health = probe(BackendSpec.parse(args.backend))
    print(json.dumps(health.to_dict(), indent=2))
    return 0


# ------------------------------------------------------------------ parser
def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="harness", description="Evaluate LLMs as logic code simulators.")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging on standard error")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="Generate an oracle-labelled dataset")
    gen.add_argument("--kind", choices=sorted(_GEN_KINDS), required=True)
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--hops", type=int, default=5)
    gen.add_argument("--vars", type=int, default=3)
    gen.add_argument("--ratio", default="4.3", help="Clauses per variable for cnf")
    gen.add_argument("--distractors", type=int, default=2)
    gen.add_argument("--query", choices=[q.value for q in QueryKind], default=QueryKind.MIXED.value)
    gen.add_argument("--ternary", action="store_true", help="TRUE/FALSE/UNCERTAIN entailment labels")
    gen.add_argument("--name")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(handler=_cmd_gen)

    solve_cmd = sub.add_parser("solve", help="Decide an SMT-LIB file with the embedded oracle")
    solve_cmd.add_argument("path")
    solve_cmd.add_argument("--model", action="store_true", help="Print the witness when SAT")
    solve_cmd.add_argument("--core", action="store_true", help="Print a minimal UNSAT core")
    solve_cmd.add_argument("--entailment", action="store_true", help="Treat the last assertion as the conclusion")
    solve_cmd.set_defaults(handler=_cmd_solve)

    mutate = sub.add_parser("mutate", help="Inject one syntax error per sampled problem")
    mutate.add_argument("--dataset", required=True)
    mutate.add_argument("--kind", choices=sorted(_MUTATION_KINDS), required=True)
    mutate.add_argument("--sample", type=int)
    mutate.add_argument("--seed", type=int, default=0)
    mutate.add_argument("--out", required=True)
    mutate.set_defaults(handler=_cmd_mutate)

    filt = sub.add_parser("filter", help="Drop problems over a size threshold")
    filt.add_argument("--dataset", required=True)
    filt.add_argument("--max-loc", type=int)
    filt.add_argument("--max-tokens-per-line", type=int)
    filt.add_argument("--max-tokens", type=int)
    filt.add_argument("--out", required=True)
    filt.set_defaults(handler=_cmd_filter)

    stats_cmd = sub.add_parser("stats", help="Print dataset statistics as JSON")
    stats_cmd.add_argument("--dataset", required=True)
    stats_cmd.set_defaults(handler=_cmd_stats)

    run_cmd = sub.add_parser("run", help="Evaluate a backend on a dataset")
    run_cmd.add_argument("--config", help="TOML run config; flags override it")
    run_cmd.add_argument("--dataset")
    run_cmd.add_argument("--strategy", choices=["sd", "cot", "ps", "cosm", "dcol"])
    run_cmd.add_argument("--order", choices=["sat-first", "unsat-first"])
    run_cmd.add_argument("--nl-context", action="store_true")
    run_cmd.add_argument("--sc", type=int, help="Samples per order for self-consistency")
    run_cmd.add_argument("--bisc", action="store_true", help="Pool DCoL samples over both orders")
    run_cmd.add_argument("--backend", help="perfect, adversarial, mock:<acc|script> or http:<model>")
    run_cmd.add_argument("--parallel", type=int)
    run_cmd.add_argument("--repeats", type=int)
    run_cmd.add_argument("--seed", type=int)
    run_cmd.add_argument("--out")
    run_cmd.set_defaults(handler=_cmd_run)

    report = sub.add_parser("report", help="Summarize run records")
    report.add_argument("records", nargs="+", help="records.jsonl files or run directories")
    report.add_argument("--format", choices=sorted(_FORMATS), default="md")
    report.add_argument("--baseline", nargs="+", help="Records of the unmutated dataset")
    report.add_argument("--tags", help="JSONL error-tag sidecar")
    report.add_argument("--validate", action="store_true", help="Check exe_acc against accuracy and unknown rate")
    report.add_argument("--rows", help="CSV of published rows to check the same way")
    report.add_argument("--out", required=True)
    report.set_defaults(handler=_cmd_report)

    probe_cmd = sub.add_parser("probe", help="Check a backend is usable")
    probe_cmd.add_argument("--backend", required=True)
    probe_cmd.set_defaults(handler=_cmd_probe)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(exc.one_line(), file=sys.stderr)
        return exc.exit_status

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except HarnessError as exc:
        LOGGER.debug("Command %s failed", args.command, exc_info=True)
        print(exc.one_line(), file=sys.stderr)
        return exc.exit_status


if __name__ == "__main__":
    sys.exit(main())

"""Command-line driver: ``boundary-lab <experiment> [flags]``.

Exit status is 0 when every verdict passes, 1 when any fails and 2 for usage
or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import fields
from typing import Sequence

from ..errors import LabError
from .criteria import list_criteria
from .experiments import BACKENDS, EXPERIMENTS, ExperimentConfig, ExperimentReport, run

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boundary-lab", description="Experiments on boundary representations of free groups.")
    parser.add_argument("--list-criteria", action="store_true", help="print the acceptance criteria and exit")
    sub = parser.add_subparsers(dest="experiment")
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="JSON file with ExperimentConfig fields; flags override it")
        p.add_argument("--k", type=int)
        p.add_argument("--epsilon", type=float)
        p.add_argument("--p", type=float)
        p.add_argument("--t", type=float)
        p.add_argument("--s", type=float)
        p.add_argument("--depth", type=int)
        p.add_argument("--gmax", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--backend", choices=BACKENDS)
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--out", help="write the report here instead of standard output")
        if name == "verify":
            p.add_argument("--corrupt-derivative", action="store_true", default=None,
                           help="use the wrong derivative orientation (negative control)")
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    known = {f.name for f in fields(ExperimentConfig)}
    data: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise LabError("config file must hold a JSON object")
        unknown = set(data) - known
        if unknown:
            raise LabError(f"unknown config fields: {sorted(unknown)}")
    for name in known:
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    data["experiment"] = args.experiment
    return ExperimentConfig(**data)


def render(report: ExperimentReport, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    columns: list[str] = []
    for row in report.rows:
        columns.extend(c for c in row if c not in columns)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in report.rows:
        writer.writerow({k: json.dumps(v) if isinstance(v, list) else v for k, v in row.items()})
    return buf.getvalue()


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    if args.list_criteria:
        print("\n".join(list_criteria()))
        return EXIT_OK
    if args.experiment is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        config = load_config(args)
        report = run(config)
    except (LabError, OSError, ValueError, TypeError) as exc:
        print(f"boundary-lab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(report, config.format)
    if config.out:
        with open(config.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for name, ok in report.verdicts.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL

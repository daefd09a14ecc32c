"""Batch front end: `python -m steklov <command> [flags]`."""
import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from ..shared.errors import EXIT_OK, EXIT_TOLERANCE, SteklovError, UsageError
from ..shared.models import Command, RunConfig, RunSummary
from ..shared.settings import STEKLOV_OUTPUT_DIR, configure_logging
from .suites import SUITES, SuiteResult, build_mesh

logger = logging.getLogger(__name__)

# Configuration
CSV_PRECISION = 17
SUMMARY_FILE = "summary.json"


def _pair(text: str) -> List[float]:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 're,im' or 'lo,hi', got {text!r}")
    return [float(p) for p in parts]


def _floats(text: str) -> List[float]:
    return [float(p) for p in text.split(",") if p.strip()]


def _ints(text: str) -> List[int]:
    return [int(p) for p in text.split(",") if p.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="steklov",
                                     description="Boundary operators and large-mass spectral studies "
                                                 "for the Dirac operator with MIT bag conditions.")
    parser.add_argument("command", choices=[c.value for c in Command])
    parser.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    parser.add_argument("--mesh", "--kind", dest="kind", help="sphere, chart-graph or file")
    parser.add_argument("--R", type=float)
    parser.add_argument("--order", type=int)
    parser.add_argument("--path", help="mesh file for --mesh file")
    parser.add_argument("--m", type=float)
    parser.add_argument("--M", type=_floats, help="coupling or comma-separated list of couplings")
    parser.add_argument("--z", type=_pair, help="spectral parameter as re,im")
    parser.add_argument("--window", "--interval", dest="interval", type=_pair, help="scan window lo,hi")
    parser.add_argument("--steps", type=int)
    parser.add_argument("--output", help="output directory")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--threads", type=int)
    parser.add_argument("--label", help="operator label for assemble and ps-compare")
    parser.add_argument("--l", dest="l_values", type=_ints, help="packet frequencies, comma-separated")
    parser.add_argument("--verbose", action="store_true")
    return parser


def _field_name(error: ValidationError) -> str:
    first = error.errors()[0]
    location = ".".join(str(part) for part in first["loc"]) or "config"
    return f"{location}: {first['msg']}"


def parse_config(args: argparse.Namespace) -> RunConfig:
    """Merge the JSON file (if any) with the flags and validate."""
    data: Dict[str, Any] = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"config: cannot read {args.config}: {e}")
        if not isinstance(data, dict):
            raise UsageError("config: the JSON file must hold an object")
    data["command"] = args.command
    mesh = dict(data.get("mesh") or {})
    for flag in ("kind", "R", "order", "path"):
        if getattr(args, flag) is not None:
            mesh[flag] = getattr(args, flag)
    if mesh:
        data["mesh"] = mesh
    for flag in ("m", "z", "interval", "steps", "output", "seed", "threads", "label", "l_values"):
        if getattr(args, flag) is not None:
            data[flag] = getattr(args, flag)
    if args.M is not None:
        if len(args.M) == 1:
            data["M"] = args.M[0]
        else:
            data["M_list"] = args.M
        if any(v <= 0 for v in args.M):
            raise UsageError(f"M: couplings must be positive, got {args.M}")
    data.setdefault("output", STEKLOV_OUTPUT_DIR)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise UsageError(_field_name(e))


def _cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, int)) and not isinstance(value, float):
        return str(int(value))
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, f".{CSV_PRECISION}g")


def write_tables(result: SuiteResult, output: Path) -> List[Path]:
    written = []
    for table in result.tables:
        path = output / f"{table.name}.csv"
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(table.header)
            for row in table.rows:
                writer.writerow([_cell(v) for v in row])
        written.append(path)
    return written


def run(config: RunConfig) -> RunSummary:
    output = Path(config.output)
    output.mkdir(parents=True, exist_ok=True)
    mesh = build_mesh(config)
    logger.info("%s on a %s mesh with %d nodes", config.command.value, config.mesh.kind.value, mesh.size)
    result = SUITES[config.command](config, mesh)
    for path in write_tables(result, output):
        logger.info("wrote %s", path)
    summary = RunSummary(command=config.command, config=config.model_dump(mode="json"), checks=result.checks,
                         values=result.values)
    (output / SUMMARY_FILE).write_text(json.dumps(summary.model_dump(mode="json"), indent=2, sort_keys=True) + "\n")
    return summary


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        config = parse_config(args)
        summary = run(config)
    except SteklovError as err:
        print(f"{args.command} failed: {err.detail}", file=sys.stderr)
        return err.exit_code
    for check in summary.checks:
        print(check.line())
    for name, value in summary.values.items():
        print(f"{name} = {value:.10g}")
    return EXIT_OK if summary.passed else EXIT_TOLERANCE


if __name__ == "__main__":
    raise SystemExit(main())

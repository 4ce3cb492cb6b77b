"""Command-line interface: ``hybrid-testgen generate|replay|rank``."""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
import xml.etree.ElementTree as ET
from typing import Optional

from . import __version__
from .analysis import Strategy, consumed_input_size, rank_goals
from .frontend import ParseError, parse
from .instrument import inject_goals
from .interpreter import execute
from .orchestrate import BudgetPlan, Mode, PipelineConfig, program_digest, run_pipeline

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_REACHED_ERROR = 10

TOOL = "hybrid-testgen"


class UsageError(Exception):
    pass


def _read_program(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read program {path!r}: {e.strerror or e}") from None
    except UnicodeDecodeError:
        raise UsageError(f"program {path!r} is not UTF-8 text") from None


# -- test-suite files ----------------------------------------------------------


def testcase_xml(values) -> str:
    lines = ['<?xml version="1.0" encoding="UTF-8" standalone="no"?>', "<testcase>"]
    lines += [f"  <input>{int(v)}</input>" for v in values]
    lines.append("</testcase>")
    return "\n".join(lines) + "\n"


def read_testcase_xml(path: str) -> tuple:
    try:
        root = ET.parse(path).getroot()
    except (ET.ParseError, OSError) as e:
        raise UsageError(f"malformed test case {path!r}: {e}") from None
    if root.tag != "testcase":
        raise UsageError(f"malformed test case {path!r}: root element is <{root.tag}>")
    values = []
    for el in root:
        if el.tag != "input":
            raise UsageError(f"malformed test case {path!r}: unexpected <{el.tag}>")
        try:
            values.append(int((el.text or "").strip(), 0))
        except ValueError:
            raise UsageError(f"malformed test case {path!r}: bad input value {el.text!r}") from None
    return tuple(values)


def _creation_time(deterministic: bool) -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        stamp = datetime.datetime.fromtimestamp(int(epoch), datetime.timezone.utc)
    elif deterministic:
        stamp = datetime.datetime.fromtimestamp(0, datetime.timezone.utc)
    else:
        stamp = datetime.datetime.now(datetime.timezone.utc).replace(microsecond=0)
    return stamp.strftime("%Y-%m-%dT%H:%M:%SZ")


def metadata_xml(program_path: str, source: str, mode: Mode, width: int, deterministic: bool) -> str:
    spec = "COVER( init(main()), FQL(COVER EDGES(@CALL(reach_error))) )" if mode is Mode.COVER_ERROR \
        else "COVER( init(main()), FQL(COVER EDGES(@DECISIONEDGE)) )"
    root = ET.Element("test-metadata")
    for tag, text in (
        ("sourcecodelang", "C"),
        ("producer", f"{TOOL} {__version__}"),
        ("specification", spec),
        ("mode", mode.value),
        ("programfile", os.path.basename(program_path)),
        ("programhash", program_digest(source)),
        ("entryfunction", "main"),
        ("architecture", f"{width}bit"),
        ("creationtime", _creation_time(deterministic)),
    ):
        ET.SubElement(root, tag).text = text
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


# -- commands --------------------------------------------------------------------


def cmd_generate(args) -> int:
    source = _read_program(args.program)
    try:
        if args.budget_file:
            cfg = PipelineConfig.load(args.budget_file, mode=args.mode)
        else:
            cfg = PipelineConfig(budget=BudgetPlan.defaults(args.mode))
        if args.iterations:
            cfg.budget.deterministic = True
        if args.strategy:
            cfg.strategy = Strategy(args.strategy)
        if args.rng_seed is not None:
            cfg.rng_seed = args.rng_seed
        if args.width is not None:
            cfg.width = args.width
        if args.k is not None:
            cfg.k = args.k
        if args.jobs is not None:
            cfg.jobs = args.jobs
        cfg.__post_init__()
    except (OSError, ValueError, TypeError) as e:
        raise UsageError(f"bad configuration: {e}") from None
    out = os.environ.get("HTG_STORE_DIR") or args.out
    os.makedirs(out, exist_ok=True)
    result = run_pipeline(source, cfg, out)

    suite = os.path.join(out, "test-suite")
    os.makedirs(suite, exist_ok=True)
    for name in os.listdir(suite):
        os.remove(os.path.join(suite, name))
    _write(os.path.join(suite, "metadata.xml"),
           metadata_xml(args.program, source, cfg.mode, cfg.width, cfg.budget.deterministic))
    for case in result.testcases:
        _write(os.path.join(suite, f"testcase-{case.id}.xml"), testcase_xml(case.values))

    bugs_dir = os.path.join(out, "bugs")
    os.makedirs(bugs_dir, exist_ok=True)
    for name in os.listdir(bugs_dir):
        os.remove(os.path.join(bugs_dir, name))
    for i, bug in enumerate(result.bugs, 1):
        _write(os.path.join(bugs_dir, f"bug-{i:03d}.json"), json.dumps(bug.to_json(), indent=2, sort_keys=True) + "\n")
        _write(os.path.join(bugs_dir, f"bug-{i:03d}.xml"), testcase_xml(bug.inputs))

    first = result.tracer.coverage.first_case
    goals = [
        {"id": g.id, "label": g.label, "kind": g.kind.value, "depth": g.depth,
         "status": "covered" if g.id in result.covered
         else "unreachable" if g.id in result.unreachable else "uncovered",
         "testcase": first.get(g.id)}
        for g in result.tree
    ]
    total = len(goals)
    covered = len(result.covered)
    report = {
        "mode": cfg.mode.value,
        "goals_total": total,
        "goals_covered": covered,
        "percentage": round(100.0 * covered / total, 1) if total else 100.0,
        "testcases": len(result.testcases),
        "bugs": len(result.bugs),
        "goals_unreachable": len(result.unreachable),
        "goals": goals,
    }
    _write(os.path.join(out, "coverage_report.json"), json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"covered {covered}/{total} goals ({report['percentage']}%), "
          f"{len(result.testcases)} test cases, {len(result.bugs)} bug(s); output in {out}")
    return EXIT_OK


def cmd_replay(args) -> int:
    source = _read_program(args.program)
    values = read_testcase_xml(args.testcase)
    width = args.width or 32
    program, _tree = inject_goals(parse(source))
    trace = execute(program, values, width=width)
    size = consumed_input_size(trace, width)
    print("goals: " + ",".join(str(g) for g in trace.goals_hit))
    print(f"outcome: {trace.outcome}")
    print(f"consumed: {size.bytes} bytes ({size.values} values)")
    if trace.input_exhausted:
        print("note: input exhausted, missing values read as 0")
    return EXIT_REACHED_ERROR if trace.reached_error else EXIT_OK


def cmd_rank(args) -> int:
    source = _read_program(args.program)
    _program, tree = inject_goals(parse(source))
    ordered = rank_goals(tree, Strategy(args.strategy))
    print(",".join(str(g.id) for g in ordered))
    for g in ordered:
        print(f"  {g.label}: kind={g.kind.value} depth={g.depth} power={g.power} rank={g.rank}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=TOOL, description="Hybrid fuzzing and BMC test generator for MiniC.")
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a test suite")
    g.add_argument("--program", required=True)
    g.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.COVER_BRANCHES.value)
    g.add_argument("--strategy", choices=[s.value for s in Strategy])
    g.add_argument("--budget-file", help="JSON config with budgets, strategy, rng_seed, width, k, caps")
    g.add_argument("--rng-seed", type=int)
    g.add_argument("--width", type=int)
    g.add_argument("-k", "--unwind", dest="k", type=int, help="BMC loop unwinding bound")
    g.add_argument("--jobs", type=int, help="parallel fuzzing sessions")
    g.add_argument("--iterations", action="store_true",
                   help="use iteration budgets only (reproducible output)")
    g.add_argument("--out", default="htg-out")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("replay", help="replay one test case")
    r.add_argument("--program", required=True)
    r.add_argument("--testcase", required=True)
    r.add_argument("--width", type=int)
    r.set_defaults(func=cmd_replay)

    k = sub.add_parser("rank", help="print the goal queue order")
    k.add_argument("--program", required=True)
    k.add_argument("--strategy", choices=[s.value for s in Strategy], default=Strategy.DEPTH_FIRST.value)
    k.set_defaults(func=cmd_rank)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.func(args)
    except ParseError as e:
        print(f"{TOOL}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as e:
        print(f"{TOOL}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:  # noqa: BLE001 - last-resort guard for the exit-code contract
        print(f"{TOOL}: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

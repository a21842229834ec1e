"""Command line entry point: ``ringqfc run|regress|scenarios``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import REQUIRED, SCENARIOS, parse_config
from .errors import ConfigError, RingQfcError


def _fail(exc: Exception, code: int) -> int:
    kind = getattr(exc, "kind", type(exc).__name__)
    print(json.dumps({"status": "error", "kind": kind, "message": str(exc)}), file=sys.stderr)
    return code


def _cmd_run(args) -> int:
    from .scenarios import run_scenario

    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        return _fail(ConfigError(f"cannot read {args.config}: {exc.strerror}"), 2)
    try:
        cfg = parse_config(text)
        if args.output:
            from dataclasses import replace
            cfg = replace(cfg, output_path=args.output)
        run_scenario(cfg)
    except ConfigError as exc:
        return _fail(exc, 2)
    except (RingQfcError, ValueError) as exc:
        return _fail(exc, 1)
    print(cfg.output_path)
    return 0


def _cmd_regress(args) -> int:
    from .regress import all_passed, format_report, regression_manifest

    try:
        checks = regression_manifest(args.workdir)
    except ConfigError as exc:
        return _fail(exc, 2)
    except (RingQfcError, ValueError) as exc:
        return _fail(exc, 1)
    print(format_report(checks))
    return 0 if all_passed(checks) else 1


def _cmd_scenarios(args) -> int:
    for name in SCENARIOS:
        print(f"{name}: {' '.join(sorted(REQUIRED[name]))}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ringqfc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario config and write its CSV")
    run.add_argument("config")
    run.add_argument("-o", "--output", help="override the configured output path")
    run.set_defaults(func=_cmd_run)
    reg = sub.add_parser("regress", help="run all shipped scenarios and check acceptance bounds")
    reg.add_argument("--workdir", help="keep the CSVs in this directory")
    reg.set_defaults(func=_cmd_regress)
    lst = sub.add_parser("scenarios", help="list scenarios and their required keys")
    lst.set_defaults(func=_cmd_scenarios)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

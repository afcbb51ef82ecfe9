"""Command-line front end: ``ellcov run --config FILE`` and ``ellcov list-scenarios``.

Exit status is 0 when every check passes, 1 when a check fails and 2 for a
configuration error.  The only environment variable read is ELLCOV_THREADS.
"""
from __future__ import annotations

import argparse
import sys

from .errors import ConfigError
from .harness import SCENARIOS, ScenarioConfig, emit_report, run_scenario

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ellcov", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the scenario described by a JSON config")
    run.add_argument("--config", required=True, help="path to the scenario config (JSON)")
    run.add_argument("--out", help="write the report here instead of stdout")
    run.add_argument("--format", choices=("csv", "json"), help="report format (default: json)")
    sub.add_parser("list-scenarios", help="print the available scenario names")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list-scenarios":
        for name, text in SCENARIOS.items():
            print(f"{name}\t{text}")
        return EXIT_OK
    try:
        cfg = ScenarioConfig.load(args.config)
        fmt = args.format or cfg.format
        out = args.out or cfg.output
        report = run_scenario(cfg)
        data = emit_report(report, fmt)
    except ConfigError as exc:
        print(f"ellcov: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if out:
        with open(out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    failed = [c.name for c in report.checks if not c.passed]
    if failed:
        print(f"ellcov: {len(failed)} of {len(report.checks)} checks failed: "
              + ", ".join(failed), file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

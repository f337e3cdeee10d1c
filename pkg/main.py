"""
bt-bounds - Bruhat-Tits fixed-point and character bound verifier
Command-line entry point
"""

import argparse
import logging
import sys

from pydantic import ValidationError

from btbounds.config import get_settings
from btbounds.schemas.suite import SUITES, SuiteConfig
from btbounds.services.suite_service import report_json, run_suite, write_report
from btbounds.utils.errors import ConfigError, VerificationError
from btbounds.utils.literals import parse_rational
from btbounds.utils.logger import setup_logging


logger = logging.getLogger("btbounds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bt-bounds",
        description="Exhaustive verification sweeps for fixed-point, orbital-integral and summability bounds",
    )
    parser.add_argument("--suite", default="all", choices=SUITES + ("all",))
    parser.add_argument("--p", type=int, help="residue characteristic (default: per-suite family)")
    parser.add_argument("--prec", type=int, help="working precision in pi-digits")
    parser.add_argument("--group", default="gl2", choices=("gl2", "gl3", "sl2"))
    parser.add_argument("--level", type=int, help="truncation level N")
    parser.add_argument("--eps", action="append", default=[], help="exponent, repeatable (e.g. 1/2)")
    parser.add_argument("--cap", type=int, help="enumeration cap for every kind")
    parser.add_argument("--sd", dest="sd_levels", type=int, nargs="*", help="sd levels m of the gamma family")
    parser.add_argument("--depths", type=int, nargs="*", help="y-depth offsets beyond m")
    parser.add_argument("--r-max", dest="r_max", type=int, help="largest r for index sweeps")
    parser.add_argument("--shells", type=int, help="number of shells in tail sums")
    parser.add_argument("--json", dest="json_path", help="write the JSON report here instead of stdout")
    parser.add_argument("--csv", dest="csv_path", help="also write the case table as CSV")
    parser.add_argument("--seed", type=int, help="seed for randomized families")
    parser.add_argument("--debug", action="store_true")
    return parser


def config_from_args(args: argparse.Namespace) -> SuiteConfig:
    values = {k: v for k, v in vars(args).items() if v is not None and k != "debug"}
    try:
        values["eps"] = [parse_rational(e) for e in args.eps]
        return SuiteConfig(**values)
    except (ValidationError, ValueError) as e:
        raise ConfigError(str(e))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(debug=args.debug or get_settings().debug)

    try:
        cfg = config_from_args(args)
        report = run_suite(cfg)
    except VerificationError as e:
        logger.error(e.detail)
        return e.exit_code

    write_report(report, cfg.json_path, cfg.csv_path)
    if not cfg.json_path:
        sys.stdout.write(report_json(report) + "\n")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())

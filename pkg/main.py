import argparse
import logging
import sys

from cloner_app import ClonerApp, schema_text
from constants import CON_CALIB, EXIT_CODES
from errors import CalibrationBoundaryError, ConfigError, DataError, NoDataError, ParameterError, StateError
from run_config import resolve
from telemetry import setup_logging

logger = logging.getLogger("cloner")

COMMANDS = ("analytic", "simulate", "calibrate", "robustness", "schema")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cloner",
        description="Asymmetric 1->2 qubit cloner: "
                    "closed forms, simulated coincidences, efficiency calibration, robustness.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("records", nargs="?", help="record file (calibrate only)")
    parser.add_argument("--config", help="YAML run file, flat key: value")
    parser.add_argument("--t", dest="t_values", help="comma list of transmittances")
    parser.add_argument("--eta-a", dest="eta_a", type=float)
    parser.add_argument("--eta-b", dest="eta_b", type=float)
    parser.add_argument("--counts", dest="counts_per_setting", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--noiseless", action="store_const", const=True, default=None)
    parser.add_argument("--objective", dest="calibration_objective", choices=CON_CALIB["objectives"])
    parser.add_argument("--mode", dest="calibration_mode", choices=CON_CALIB["modes"])
    parser.add_argument("--machine", help="explicit F_A,F_B,P for robustness")
    parser.add_argument("--out", dest="output_path")
    parser.add_argument("--format", dest="output_format", choices=("csv", "json"))
    parser.add_argument("--strict", action="store_const", const=True, default=None,
                        help="treat a calibration on the search boundary as an error")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)

    if args.command == "schema":
        sys.stdout.write(schema_text())
        return EXIT_CODES["ok"]

    overrides = {
        key: getattr(args, key)
        for key in ("t_values", "eta_a", "eta_b", "counts_per_setting", "seed", "noiseless",
                    "calibration_objective", "calibration_mode", "machine", "output_path",
                    "output_format", "strict")
    }
    try:
        config = resolve(args.config, overrides)
        app = ClonerApp(config)
        if args.command == "analytic":
            result = app.cmd_analytic()
        elif args.command == "simulate":
            result = app.cmd_simulate()
        elif args.command == "robustness":
            result = app.cmd_robustness()
        else:
            if not args.records:
                raise ConfigError("calibrate needs a record file", field="records")
            result = app.cmd_calibrate(args.records)
    except ConfigError as error:
        logger.error("config error: %s", error)
        return EXIT_CODES["config"]
    except CalibrationBoundaryError as error:
        logger.error("calibration error: %s", error)
        return EXIT_CODES["boundary"]
    except (DataError, NoDataError, StateError, ParameterError) as error:
        logger.error("data error: %s", error)
        return EXIT_CODES["data"]
    except OSError as error:
        logger.error("I/O error: %s: %s", error.filename or "", error.strerror or error)
        return EXIT_CODES["data"]

    for name, path in result.paths.items():
        print(f"{name}: {path}")
    return EXIT_CODES["ok"]


def main():
    """Main entry point for the cloner tools."""
    sys.exit(run())


if __name__ == "__main__":
    main()

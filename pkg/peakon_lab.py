import logging
import sys
from argparse import ArgumentParser
from pathlib import Path

from agents.extractors import ConfigExtractor
from agents.runner import run_sweep
from agents.validators import CommandLineArgsValidator, ScenarioValidator
from globals.constants import (
    CONSOLE_HANDLER, EXIT_CODES, LOG_DATE_FORMAT, LOG_FORMAT, LOGGER_NAME, OUTPUT_DEFAULTS,
    QUIET_LEVELS, SCENARIO_KINDS)
from globals.errors import ConfigurationError, ConfigValidationError
from globals.types import Scenario

logger = logging.getLogger(LOGGER_NAME)


def setup_logger(logger: logging.Logger, quiet_count: int, verbose: bool) -> int:
    """
    Points the lab logger at stderr. Each --quiet raises the threshold one step from INFO
    up to ERROR, and --verbose lowers it to DEBUG whatever the quiet count. Calling it
    again replaces the console handler instead of stacking a second one.

    Args:
        logger (logging.Logger): Lab logger.
        quiet_count (int): Occurrences of --quiet.
        verbose (bool): Whether --verbose was given.

    Returns:
        int: The level applied.
    """
    if verbose:
        level = logging.DEBUG
    else:
        level = QUIET_LEVELS[min(quiet_count, len(QUIET_LEVELS) - 1)]
    for handler in [item for item in logger.handlers if item.name == CONSOLE_HANDLER]:
        logger.removeHandler(handler)
        handler.close()

    console = logging.StreamHandler()
    console.set_name(CONSOLE_HANDLER)
    console.setLevel(level)
    console.setFormatter(logging.Formatter(fmt=LOG_FORMAT, datefmt=LOG_DATE_FORMAT))
    logger.addHandler(console)
    logger.setLevel(level)
    logger.propagate = True
    return level


def get_output_prefix(
        args: CommandLineArgsValidator,
        config_path: Path | None,
        scenario: Scenario) -> Path:
    """
    Defines the output prefix of a scenario based on the command line arguments.

    Args:
        args (CommandLineArgsValidator): Instance of validated command line arguments
            container.
        config_path (Path | None): Configuration file of the scenario, if any.
        scenario (Scenario): Scenario read from that file.

    Returns:
        Path: The '--out' prefix when given, suffixed with the configuration file stem
        when several files are run, else the prefix declared by the scenario.
    """
    if args.output_prefix is None:
        return scenario.output_prefix
    if config_path is not None and len(args.config_paths) > 1:
        return args.output_prefix.with_name(f"{args.output_prefix.name}-{config_path.stem}")
    return args.output_prefix


def load_scenarios(args: CommandLineArgsValidator) -> list[Scenario]:
    """
    Reads one scenario per configuration file and applies the command line overrides.
    A lemma audit may run without a configuration file, on default settings.

    Args:
        args (CommandLineArgsValidator): Instance of validated command line arguments
            container.

    Raises:
        ConfigValidationError: If no configuration file was given for a kind that needs
            initial data.

    Returns:
        list[Scenario]: Scenarios to be run, in the order of the files.
    """
    if not args.config_paths:
        if args.kind != "lemma-audit":
            raise ConfigValidationError("config", f"'{args.kind}' requires --config")
        pairs = [(None, Scenario(args.kind, None, Path(OUTPUT_DEFAULTS["prefix"])))]
    else:
        pairs = [
            (path, ConfigExtractor(path).get_scenario(args.kind))
            for path in args.config_paths
        ]

    scenarios = []
    for config_path, scenario in pairs:
        if args.seed is not None:
            scenario.seed = args.seed
        scenario.output_prefix = get_output_prefix(args, config_path, scenario)
        ScenarioValidator.validate_scenario(scenario)
        scenarios.append(scenario)
    return scenarios


def main(args: CommandLineArgsValidator) -> int:
    try:
        scenarios = load_scenarios(args)
    except ConfigurationError as exception:
        logger.exception(f"Scenario configuration rejected. Details:\n{exception}")
        return EXIT_CODES["config_error"]
    return run_sweep(scenarios, args.workers, args.parquet_required)


if __name__ == "__main__":
    parser = ArgumentParser(
        description="Numerical laboratory for peakon solutions of the Novikov equation")
    parser.add_argument(
        "kind", choices=SCENARIO_KINDS,
        help="scenario pipeline to be run")
    parser.add_argument(
        "--config", metavar="path/to/scenario.toml", type=Path, action="append",
        dest="config_paths", default=[], help=(
            "path to a TOML scenario document. Can be repeated to run several independent "
            "scenarios. Optional for lemma-audit"))
    parser.add_argument(
        "--out", metavar="path/to/prefix", type=Path, dest="output_prefix", default=None,
        help=(
            "prefix of the output files, overriding the one declared by the scenario. "
            "When several configurations are given, the name of each file is appended"))
    parser.add_argument(
        "--seed", type=int, default=None,
        help="seed of the random generator, overriding the one declared by the scenario")
    parser.add_argument(
        "--workers", type=int, default=1,
        help="number of worker processes used when several configurations are given")
    parser.add_argument(
        "-p", "--to-parquet", dest="parquet_required", action="store_true", default=False,
        help="indicates trajectories should also be exported to Parquet files")
    parser.add_argument(
        "-q", "--quiet", action="count", default=0,
        help="turn on quiet mode (cumulative), which hides log entries of levels lower "
        "than WARNING, then ERROR. Ignored if --verbose is present")
    parser.add_argument(
        "-v", "--verbose", action="store_true", default=False, help=(
            "turn on verbose mode, to display all log messages of level DEBUG and above. "
            "Overrides --quiet"))

    validator = CommandLineArgsValidator()
    parser.parse_args(namespace=validator)
    setup_logger(logger, validator.quiet, validator.verbose)

    try:
        validator.validate_arguments()
    except ConfigurationError as exception:
        logger.exception(f"Command line arguments validation failed. Details:\n{exception}")
        sys.exit(EXIT_CODES["config_error"])
    sys.exit(main(validator))

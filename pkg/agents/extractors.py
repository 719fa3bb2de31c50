import logging
import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any

import numpy as np

from agents.validators import ScenarioValidator
from globals.constants import (
    AUDIT_DEFAULTS, DEFAULT_SEED, INTEGRATOR_DEFAULTS, LOGGER_NAME, OUTPUT_DEFAULTS,
    PDE_DEFAULTS, SPECTRUM_DEFAULTS)
from globals.errors import ConfigParseError, ConfigValidationError, InvalidConfigFileError
from globals.types import (
    AuditSettings, ConfigDocument, IntegratorSettings, PdeSettings, PeakonConfig, Scenario,
    SpectrumSettings)

logger = logging.getLogger(LOGGER_NAME)

TOP_LEVEL_KEYS = {"kind", "seed", "t_end"}
SECTION_KEYS: dict[str, set[str]] = {
    "initial": {"q", "p"},
    "integrator": set(INTEGRATOR_DEFAULTS),
    "spectrum": set(SPECTRUM_DEFAULTS),
    "pde": set(PDE_DEFAULTS),
    "audit": set(AUDIT_DEFAULTS) | {"L", "K"},
    "outputs": set(OUTPUT_DEFAULTS),
}
INTEGER_KEYS = {"seed", "N", "mollifier_n", "cases", "n0"}


class ConfigExtractor:
    """Reads scenario documents from disk."""

    source_path: Path

    def __init__(self, source_path: Path) -> None:
        if not source_path.is_file():
            raise InvalidConfigFileError(source_path)
        self.source_path = source_path

    def get_scenario(self, kind: str | None = None) -> Scenario:
        """
        Parses the scenario document at the source path.

        Args:
            kind (str | None, optional): Scenario kind requested by the caller. Defaults
                to None.

        Returns:
            Scenario: Validated scenario.
        """
        text = self.source_path.read_text(encoding="utf-8")
        scenario = parse_config(text, kind)
        logger.info(
            f"Successfully extracted '{scenario.kind}' scenario from file at "
            f"'{self.source_path.resolve()}'")
        return scenario


def _line_number(error: tomllib.TOMLDecodeError) -> int | None:
    match = re.search(r"at line (\d+)", str(error))
    return int(match.group(1)) if match else None


def _typed(key: str, value: Any) -> Any:
    if key in INTEGER_KEYS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigValidationError(key, f"{key} must be an integer")
        return value
    if key in {"q", "p"}:
        if not isinstance(value, list) or not all(
                isinstance(item, (int, float)) and not isinstance(item, bool)
                for item in value):
            raise ConfigValidationError(key, f"{key} must be an array of numbers")
        return np.array(value, dtype=float)
    if key == "prefix":
        if not isinstance(value, str):
            raise ConfigValidationError(key, f"{key} must be a string")
        return value
    if key == "kind":
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigValidationError(key, f"{key} must be a number")
    return float(value)


def _section(document: ConfigDocument, name: str) -> dict[str, Any]:
    section = document.get(name, {})
    if not isinstance(section, dict):
        raise ConfigValidationError(name, f"'{name}' must be a section")
    for key in section:
        if key not in SECTION_KEYS[name]:
            raise ConfigValidationError(f"{name}.{key}")
    return {key: _typed(key, value) for key, value in section.items()}


def parse_config(text: str, kind: str | None = None) -> Scenario:
    """
    Parses a TOML scenario document into a validated Scenario, filling every missing
    setting with its default.

    Args:
        text (str): Document contents.
        kind (str | None, optional): Kind requested on the command line. It fills a
            missing 'kind' key and must match a present one. Defaults to None.

    Raises:
        ConfigParseError: If the document is not well-formed TOML.
        ConfigValidationError: If a key is unknown, mistyped or inconsistent with the
            scenario kind.

    Returns:
        Scenario: Validated scenario.
    """
    try:
        document = tomllib.loads(text)
    except tomllib.TOMLDecodeError as error:
        raise ConfigParseError(_line_number(error), str(error))

    for key, value in document.items():
        if key not in TOP_LEVEL_KEYS and key not in SECTION_KEYS:
            raise ConfigValidationError(key)
        if key in SECTION_KEYS and not isinstance(value, dict):
            raise ConfigValidationError(key, f"'{key}' must be a section")
    declared = document.get("kind")
    if declared is not None and kind is not None and declared != kind:
        raise ConfigValidationError(
            "kind", f"document declares '{declared}' but '{kind}' was requested")
    if declared is None and kind is None:
        raise ConfigValidationError("kind", "scenario kind is missing")

    sections = {name: _section(document, name) for name in SECTION_KEYS}
    initial = None
    if sections["initial"]:
        if set(sections["initial"]) != {"q", "p"}:
            raise ConfigValidationError("initial", "initial needs both q and p")
        initial = PeakonConfig(sections["initial"]["q"], sections["initial"]["p"])
    t_end = document.get("t_end")
    scenario = Scenario(
        kind=declared or kind,
        initial=initial,
        output_prefix=Path(sections["outputs"].get("prefix", OUTPUT_DEFAULTS["prefix"])),
        seed=_typed("seed", document.get("seed", DEFAULT_SEED)),
        t_end=None if t_end is None else _typed("t_end", t_end),
        integrator=IntegratorSettings(**sections["integrator"]),
        spectrum=SpectrumSettings(**sections["spectrum"]),
        pde=PdeSettings(**sections["pde"]),
        audit=AuditSettings(**sections["audit"]),
        document=document)
    ScenarioValidator.validate_scenario(scenario)
    return scenario

# api/common.py
from core.exceptions import PolicyParseError, ScenarioError
from models.scenario import ScenarioConfig
from pathlib import Path
from pydantic import ValidationError
import json
import logging
import traceback

import click

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_DENY = 4
EXIT_THROTTLE = 5


def load_scenario(config_path) -> ScenarioConfig:
    text = Path(config_path).read_text(encoding="utf-8")
    return ScenarioConfig.model_validate(json.loads(text))


def exit_code_for(error: Exception) -> int:
    """Report a failed command on stderr and pick its exit status."""
    logger.debug(traceback.format_exc())
    if isinstance(error, ValidationError):
        for detail in error.errors():
            field = ".".join(str(part) for part in detail["loc"]) or "config"
            click.echo(f"❌ invalid config: {field}: {detail['msg']}", err=True)
        return EXIT_INVALID
    if isinstance(error, PolicyParseError):
        click.echo(f"❌ policy parse error: {error}", err=True)
        return EXIT_INVALID
    if isinstance(error, (ScenarioError, ValueError)):
        click.echo(f"❌ invalid config: {error}", err=True)
        return EXIT_INVALID
    if isinstance(error, OSError):
        click.echo(f"❌ I/O failure: {error}", err=True)
        return EXIT_IO
    raise error

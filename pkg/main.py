import logging
import sys

import click

from core.config import settings
from api.simulate import simulate
from api.robots import robots
from api.traffic import traffic

# ---------------- Logging ----------------
# stderr only; stdout and artifacts stay free of timestamps
logging.basicConfig(
    level=settings.LOG_LEVEL,
    format='%(asctime)s | %(levelname)s | %(message)s',
    stream=sys.stderr,
)
logger = logging.getLogger(__name__)


@click.group()
@click.version_option(settings.PROJECT_VERSION, prog_name=settings.PROJECT_NAME)
def cli():
    """Shopbot market simulator and fair-use robot exclusion engine."""


cli.add_command(simulate)
cli.add_command(robots)
cli.add_command(traffic)


if __name__ == "__main__":
    cli()

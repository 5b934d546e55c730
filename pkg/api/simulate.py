# api/simulate.py
from api.common import EXIT_INVALID, EXIT_OK, exit_code_for, load_scenario
from concurrent.futures import ProcessPoolExecutor
from db.artifact_store import artifact_store
from pathlib import Path
from services.simulation_service import simulation_engine
from typing import Optional
import logging

import click

logger = logging.getLogger(__name__)


def simulate_into(config_path: str, out_dir: str, seed: Optional[int] = None,
                  ticks: Optional[int] = None) -> int:
    """Run one scenario file and write prices.csv and summary.json; returns the exit code."""
    try:
        scenario = load_scenario(config_path)
        result = simulation_engine.run(scenario, ticks=ticks, seed=seed)
        artifact_store.write_prices(out_dir, result.series)
        summary = {
            **result.report.model_dump(mode="json"),
            **result.summary.model_dump(mode="json", exclude={"regime"}),
        }
        artifact_store.write_json(out_dir, "summary.json", summary)
        logger.info(f"✅ {config_path}: {result.report.classification}")
        return EXIT_OK
    except Exception as e:
        return exit_code_for(e)


@click.command()
@click.option("--config", "config_path", default=None, help="Scenario JSON file")
@click.option("--out", "out_dir", required=True, help="Output directory")
@click.option("--seed", type=int, default=None, help="Override the scenario seed")
@click.option("--ticks", type=int, default=None, help="Override the scenario tick count")
@click.option("--sweep", "sweep_dir", default=None, help="Run every *.json in this directory")
@click.option("--workers", type=int, default=1, show_default=True, help="Parallel runs in sweep mode")
@click.pass_context
def simulate(ctx, config_path, out_dir, seed, ticks, sweep_dir, workers):
    """Run the market simulation and emit prices.csv and summary.json."""
    if (config_path is None) == (sweep_dir is None):
        click.echo("❌ exactly one of --config or --sweep is required", err=True)
        ctx.exit(EXIT_INVALID)

    if config_path is not None:
        ctx.exit(simulate_into(config_path, out_dir, seed, ticks))

    if not Path(sweep_dir).is_dir():
        ctx.exit(exit_code_for(NotADirectoryError(f"sweep directory not found: {sweep_dir}")))
    configs = sorted(Path(sweep_dir).glob("*.json"))
    logger.info(f"🧮 Sweep over {len(configs)} scenarios with {workers} workers")
    with ProcessPoolExecutor(max_workers=max(workers, 1)) as pool:
        futures = [
            pool.submit(simulate_into, str(path), str(Path(out_dir) / path.stem), seed, ticks)
            for path in configs
        ]
        codes = [future.result() for future in futures]
    ctx.exit(max(codes, default=EXIT_OK))

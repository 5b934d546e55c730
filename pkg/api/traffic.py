# api/traffic.py
from api.common import EXIT_OK, exit_code_for, load_scenario
from db.artifact_store import artifact_store
from models.protocol import ExclusionPolicy
from models.traffic import TrafficConfig
from pathlib import Path
from services.exclusion_service import ledger_report
from services.traffic_service import run_traffic
from utils.robots_parser import parse_policy
import logging

import click

logger = logging.getLogger(__name__)


@click.command()
@click.option("--config", "config_path", required=True, help="Scenario JSON file with a traffic section")
@click.option("--out", "out_dir", required=True, help="Output directory")
@click.pass_context
def traffic(ctx, config_path, out_dir):
    """Simulate robot traffic against the site defenses; emit events.csv and load.json."""
    try:
        scenario = load_scenario(config_path)
        policy = ExclusionPolicy()
        if scenario.policy_file:
            policy_path = Path(config_path).parent / scenario.policy_file
            policy = parse_policy(policy_path.read_bytes())

        config = scenario.traffic or TrafficConfig()
        market = scenario if scenario.sellers else None
        run, _, assent_ledger = run_traffic(config, policy, market=market)

        artifact_store.write_events(out_dir, run.events)
        payload = {
            **run.overall.model_dump(mode="json"),
            "windows": [report.model_dump(mode="json") for report in run.windows],
            "aggregate": [report.model_dump(mode="json") for report in run.aggregate],
            "metasite": run.metasite.model_dump(mode="json") if run.metasite else None,
            "blocklist": run.blocklist,
            "ledger": ledger_report(assent_ledger).model_dump(mode="json"),
        }
        artifact_store.write_json(out_dir, "load.json", payload)
    except Exception as e:
        ctx.exit(exit_code_for(e))
    ctx.exit(EXIT_OK)

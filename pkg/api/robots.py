# api/robots.py
from api.common import EXIT_DENY, EXIT_OK, EXIT_THROTTLE, exit_code_for
from models.protocol import POLICY_PATH, AccessRequest
from pathlib import Path
from services.exclusion_service import AssentLedger, evaluate_access
from utils.robots_parser import parse_policy, serialize_policy
from typing import List, Optional
import json
import logging

import click

logger = logging.getLogger(__name__)

VERDICT_EXIT = {"ALLOW": EXIT_OK, "DENY": EXIT_DENY, "THROTTLE": EXIT_THROTTLE}


def load_history(history_path: Optional[str], agent: str, purpose: str) -> List[AccessRequest]:
    """
    History file: a JSON list of earlier requests, e.g.
    [{"path": "/catalog", "time": 12.0}, {"agent_token": "otherbot", "path": "/", "time": 15}]
    Missing agent and purpose fields default to the checked request's.
    """
    if history_path is None:
        return []
    entries = json.loads(Path(history_path).read_text(encoding="utf-8"))
    if not isinstance(entries, list):
        raise ValueError("history must be a JSON list of requests")
    requests = [
        AccessRequest.model_validate({"agent_token": agent, "declared_purpose": purpose, **entry})
        for entry in entries
    ]
    return sorted(requests, key=lambda r: r.time)


@click.group()
def robots():
    """Parse and evaluate robot exclusion policies."""


@robots.command("parse")
@click.argument("policy_file")
@click.pass_context
def parse_command(ctx, policy_file):
    """Print the canonical form of POLICY_FILE."""
    try:
        policy = parse_policy(Path(policy_file).read_bytes())
    except Exception as e:
        ctx.exit(exit_code_for(e))
    click.echo(serialize_policy(policy).decode("utf-8"), nl=False)
    ctx.exit(EXIT_OK)


@robots.command("check")
@click.argument("policy_file")
@click.option("--agent", required=True, help="User-agent token of the requester")
@click.option("--path", "path", required=True, help="Requested path")
@click.option("--purpose", default="unspecified", show_default=True, help="Declared purpose token")
@click.option("--history", "history_path", default=None, help="JSON list of earlier requests")
@click.option("--time", "time_", type=float, default=None,
              help="Request time in seconds (default: the latest history time)")
@click.option("--fraction", type=float, default=0.0, show_default=True,
              help="Catalog fraction fetched so far")
@click.option("--assume-assent/--no-assume-assent", default=True, show_default=True,
              help="Treat every agent as having fetched /robots.txt before its history")
@click.pass_context
def check_command(ctx, policy_file, agent, path, purpose, history_path, time_, fraction, assume_assent):
    """Evaluate one request against POLICY_FILE and print the decision as JSON.

    Exit status: 0 ALLOW, 4 DENY, 5 THROTTLE.
    """
    try:
        policy = parse_policy(Path(policy_file).read_bytes())
        history = load_history(history_path, agent, purpose)
        if time_ is None:
            time_ = history[-1].time if history else 0.0
        request = AccessRequest(
            agent_token=agent,
            path=path,
            declared_purpose=purpose,
            time=time_,
            catalog_fraction_fetched=fraction,
        )
    except Exception as e:
        ctx.exit(exit_code_for(e))

    ledger = AssentLedger()
    if assume_assent:
        start = min([r.time for r in history] + [request.time])
        for token in dict.fromkeys([r.agent_key for r in history] + [request.agent_key]):
            evaluate_access(policy, AccessRequest(agent_token=token, path=POLICY_PATH, time=start), ledger)
    for earlier in history:
        evaluate_access(policy, earlier, ledger)

    decision, _ = evaluate_access(policy, request, ledger)
    click.echo(json.dumps(decision.model_dump(mode="json"), sort_keys=True))
    ctx.exit(VERDICT_EXIT[decision.verdict])

import json
from pathlib import Path

import pandas as pd
import pytest
from click.testing import CliRunner

from main import cli
from utils.robots_parser import parse_policy, serialize_policy

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
POLICY = SCENARIOS / "fair_use_policy.txt"


@pytest.fixture
def runner():
    return CliRunner()


def write_json(path, payload):
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def small_scenario(**overrides):
    scenario = {
        "type1_fraction": 0.75,
        "sellers": [{"strategy": {"kind": "myopic_optimal"}}, {"strategy": {"kind": "myopic_optimal"}}],
        "ticks": 50,
        "seed": 3,
    }
    scenario.update(overrides)
    return scenario


def test_simulate_price_war(runner, tmp_path):
    out = tmp_path / "war"
    result = runner.invoke(cli, ["simulate", "--config", str(SCENARIOS / "price_war.json"),
                                 "--out", str(out), "--ticks", "2000"])
    assert result.exit_code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["classification"] == "PriceWar"
    assert summary["ticks"] == 2000
    prices = pd.read_csv(out / "prices.csv")
    assert list(prices.columns) == ["tick", "seller_id", "price", "profit"]
    assert len(prices) == 2000 * 2


def test_simulate_is_byte_identical_across_runs(runner, tmp_path):
    config = write_json(tmp_path / "s.json", small_scenario(ticks=300))
    for name in ("a", "b"):
        assert runner.invoke(cli, ["simulate", "--config", config, "--out", str(tmp_path / name)]).exit_code == 0
    for artifact in ("prices.csv", "summary.json"):
        assert (tmp_path / "a" / artifact).read_bytes() == (tmp_path / "b" / artifact).read_bytes()


def test_simulate_rejects_an_invalid_fraction(runner, tmp_path):
    config = write_json(tmp_path / "bad.json", small_scenario(type1_fraction=1.7))
    result = runner.invoke(cli, ["simulate", "--config", config, "--out", str(tmp_path / "out")])
    assert result.exit_code == 2
    assert "type1_fraction" in result.output
    assert not (tmp_path / "out" / "prices.csv").exists()


def test_simulate_rejects_unknown_keys(runner, tmp_path):
    config = write_json(tmp_path / "bad.json", small_scenario(colour="blue"))
    result = runner.invoke(cli, ["simulate", "--config", config, "--out", str(tmp_path / "out")])
    assert result.exit_code == 2


def test_simulate_missing_config_is_an_io_failure(runner, tmp_path):
    result = runner.invoke(cli, ["simulate", "--config", str(tmp_path / "nope.json"),
                                 "--out", str(tmp_path / "out")])
    assert result.exit_code == 3


def test_simulate_needs_exactly_one_source(runner, tmp_path):
    assert runner.invoke(cli, ["simulate", "--out", str(tmp_path)]).exit_code == 2


def test_simulate_sweep(runner, tmp_path):
    sweep = tmp_path / "sweep"
    sweep.mkdir()
    write_json(sweep / "one.json", small_scenario())
    write_json(sweep / "two.json", small_scenario(type1_fraction=0.0))
    out = tmp_path / "out"
    result = runner.invoke(cli, ["simulate", "--sweep", str(sweep), "--out", str(out), "--workers", "2"])
    assert result.exit_code == 0
    for stem in ("one", "two"):
        assert (out / stem / "prices.csv").exists()
        assert (out / stem / "summary.json").exists()


def test_simulate_sweep_missing_directory(runner, tmp_path):
    result = runner.invoke(cli, ["simulate", "--sweep", str(tmp_path / "nope"), "--out", str(tmp_path)])
    assert result.exit_code == 3


def test_robots_parse_prints_canonical_form(runner):
    result = runner.invoke(cli, ["robots", "parse", str(POLICY)])
    assert result.exit_code == 0
    assert result.output == serialize_policy(parse_policy(POLICY.read_bytes())).decode("utf-8")
    assert result.output.startswith("User-agent: fairbot\n")


def test_robots_parse_reports_bad_lines(runner, tmp_path):
    bad = tmp_path / "robots.txt"
    bad.write_bytes(b"User-agent: *\nCrawl-limit: lots\n")
    result = runner.invoke(cli, ["robots", "parse", str(bad)])
    assert result.exit_code == 2
    assert "line 2" in result.output


def test_robots_check_allows(runner):
    result = runner.invoke(cli, ["robots", "check", str(POLICY), "--agent", "fairbot",
                                 "--path", "/catalog/7", "--purpose", "research"])
    assert result.exit_code == 0
    assert json.loads(result.output)["verdict"] == "ALLOW"


def test_robots_check_denies_disallowed_path(runner):
    result = runner.invoke(cli, ["robots", "check", str(POLICY), "--agent", "anybot", "--path", "/prices/x"])
    assert result.exit_code == 4
    assert json.loads(result.output) == {"reason": "path", "retry_after": None, "verdict": "DENY"}


def test_robots_check_without_assent(runner):
    result = runner.invoke(cli, ["robots", "check", str(POLICY), "--agent", "fairbot", "--path", "/catalog",
                                 "--purpose", "research", "--no-assume-assent"])
    assert result.exit_code == 4
    assert json.loads(result.output)["reason"] == "unassented"


def test_robots_check_throttles_the_sixty_first_request(runner, tmp_path):
    history = write_json(tmp_path / "history.json", [{"path": "/catalog", "time": t} for t in range(60)])
    result = runner.invoke(cli, ["robots", "check", str(POLICY), "--agent", "fairbot", "--path", "/catalog",
                                 "--purpose", "research", "--history", history])
    assert result.exit_code == 5
    decision = json.loads(result.output)
    assert decision["verdict"] == "THROTTLE"
    assert decision["retry_after"] == pytest.approx(3541.0)


def test_traffic_proxy_collateral(runner, tmp_path):
    result = runner.invoke(cli, ["traffic", "--config", str(SCENARIOS / "proxy_collateral.json"),
                                 "--out", str(tmp_path)])
    assert result.exit_code == 0
    events = pd.read_csv(tmp_path / "events.csv")
    fair = events[events["agent"] == "fair-crawler"]
    assert (fair["outcome"] == "refused").any()
    assert (fair[fair["tick"] >= 79]["outcome"] == "refused").all()
    load = json.loads((tmp_path / "load.json").read_text())
    assert load["blocklist"] == ["192.0.2.1"]
    assert load["ledger"]["per_agent"]["fairbot"]["breach"] == 0


def test_traffic_single_robot_load(runner, tmp_path):
    result = runner.invoke(cli, ["traffic", "--config", str(SCENARIOS / "single_robot.json"),
                                 "--out", str(tmp_path)])
    assert result.exit_code == 0
    load = json.loads((tmp_path / "load.json").read_text())
    assert load["robot_fraction"] == pytest.approx(0.0153)
    assert load["harm_flag"] is False
    assert load["aggregate"][-1]["robot_fraction"] == pytest.approx(0.9945)


def test_traffic_metasite(runner, tmp_path):
    result = runner.invoke(cli, ["traffic", "--config", str(SCENARIOS / "throttled_metasite.json"),
                                 "--out", str(tmp_path)])
    assert result.exit_code == 0
    load = json.loads((tmp_path / "load.json").read_text())
    assert load["metasite"]["total"] == 100


def test_traffic_with_no_agents_writes_header_only(runner, tmp_path):
    config = write_json(tmp_path / "empty.json", {})
    result = runner.invoke(cli, ["traffic", "--config", config, "--out", str(tmp_path / "out")])
    assert result.exit_code == 0
    assert (tmp_path / "out" / "events.csv").read_text() == "tick,address,agent,path,outcome\n"
    load = json.loads((tmp_path / "out" / "load.json").read_text())
    assert load["robot_fraction"] == 0.0

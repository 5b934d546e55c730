import numpy as np
import pytest

from core.exceptions import ScenarioError
from models.market import DerivativeFollowerStrategy, DetectorThresholds, FixedStrategy, MyopicOptimalStrategy
from models.scenario import ScenarioConfig, SellerSpec
from services.simulation_service import simulation_engine

EPS = 0.01


def two_seller_scenario(strategy, w1, ticks=5000, seed=7, **kwargs):
    return ScenarioConfig(
        buyers_per_tick=100,
        type1_fraction=w1,
        price_tick=EPS,
        price_max=1.0,
        sellers=[SellerSpec(strategy=strategy), SellerSpec(strategy=strategy)],
        ticks=ticks,
        seed=seed,
        **kwargs,
    )


@pytest.fixture(scope="module")
def price_war():
    return simulation_engine.run(two_seller_scenario(MyopicOptimalStrategy(), 0.75))


@pytest.fixture(scope="module")
def derivative_followers():
    strategy = DerivativeFollowerStrategy(step=EPS, direction=-1)
    return simulation_engine.run(two_seller_scenario(strategy, 0.75))


@pytest.fixture(scope="module")
def bertrand():
    return simulation_engine.run(two_seller_scenario(MyopicOptimalStrategy(), 0.0, ticks=1000))


def test_fixed_sellers_keep_their_prices():
    scenario = ScenarioConfig(sellers=[
        SellerSpec(strategy=FixedStrategy(price=0.6)),
        SellerSpec(strategy=FixedStrategy(price=0.8)),
    ])
    state = simulation_engine.build_state(scenario, seed=0)
    successor = simulation_engine.step(state, scenario.market_config())
    assert successor.prices == [0.6, 0.8]
    assert successor.tick == 1
    assert len(successor.series) == 1


def test_monopolist_jumps_to_valuation():
    scenario = ScenarioConfig(sellers=[SellerSpec(strategy=MyopicOptimalStrategy(), initial_price=0.3)])
    state = simulation_engine.build_state(scenario, seed=0)
    successor = simulation_engine.step(state, scenario.market_config())
    assert successor.prices == [1.0]


def test_step_is_deterministic_and_pure():
    scenario = two_seller_scenario(MyopicOptimalStrategy(), 0.75)
    state = simulation_engine.build_state(scenario, seed=3)
    config = scenario.market_config()
    first = simulation_engine.step(state, config)
    second = simulation_engine.step(state, config)
    assert first.prices == second.prices
    assert first.series == second.series
    assert state.tick == 0 and state.series == []


def test_series_length_tracks_ticks():
    result = simulation_engine.run(two_seller_scenario(MyopicOptimalStrategy(), 0.75, ticks=37))
    assert [record.tick for record in result.series] == list(range(37))
    assert result.summary.ticks == 37


def test_prices_stay_on_grid_and_in_bounds(price_war, derivative_followers):
    for result in (price_war, derivative_followers):
        prices = np.array([record.prices for record in result.series])
        assert prices.min() >= 0.0 and prices.max() <= 1.0
        ticks = prices / EPS
        assert np.allclose(ticks, np.round(ticks), atol=1e-6)


def test_myopic_pair_fights_a_cyclical_price_war(price_war):
    report = price_war.report
    assert report.classification == "PriceWar"
    assert report.cycle_count >= 3
    w1, sellers = 0.75, 2
    floor = w1 / sellers / (w1 / sellers + (1 - w1)) - 2 * EPS
    assert all(abs(peak - 1.0) <= EPS + 1e-9 for peak in report.reset_peaks)
    assert all(trough >= floor - 1e-9 for trough in report.reset_troughs)


def test_derivative_followers_collude(derivative_followers):
    report = derivative_followers.report
    assert report.classification == "Collusive"
    assert report.window_mean_price >= 10 * EPS
    assert DetectorThresholds().collusion_cv_max == 0.02
    assert report.window_cv <= 0.02


def test_price_war_and_collusion_are_exclusive(price_war, derivative_followers):
    assert price_war.report.classification != "Collusive"
    assert derivative_followers.report.classification != "PriceWar"


def test_bertrand_collapse(bertrand):
    minimum = np.array([min(record.prices) for record in bertrand.series])
    reached = np.flatnonzero(minimum <= 2 * EPS + 1e-9)
    assert reached.size and reached[0] < 500
    assert np.all(minimum[reached[0]:] <= 2 * EPS + 1e-9)
    assert bertrand.report.classification == "Competitive"


def test_bertrand_minimum_never_rises(bertrand):
    minimum = [min(record.prices) for record in bertrand.series]
    assert all(b <= a + 1e-12 for a, b in zip(minimum, minimum[1:]))


def test_run_is_deterministic():
    scenario = two_seller_scenario(MyopicOptimalStrategy(), 0.75, ticks=400)
    first = simulation_engine.run(scenario)
    second = simulation_engine.run(scenario)
    assert first.series == second.series
    assert first.summary == second.summary


def test_different_seeds_change_the_update_order():
    scenario = two_seller_scenario(MyopicOptimalStrategy(), 0.75, ticks=200)
    first = simulation_engine.run(scenario, seed=1)
    second = simulation_engine.run(scenario, seed=2)
    assert [r.updated_seller for r in first.series] != [r.updated_seller for r in second.series]


def test_summary_profits_and_surplus(price_war):
    summary = price_war.summary
    assert len(summary.mean_profit) == 2
    assert all(p > 0 for p in summary.mean_profit)
    assert summary.consumer_surplus > 0
    assert summary.seed == 7
    assert summary.range_ratio is not None and summary.range_ratio >= 0


def test_update_weight_biases_who_moves():
    scenario = ScenarioConfig(sellers=[
        SellerSpec(strategy=FixedStrategy(price=0.5), update_weight=9.0),
        SellerSpec(strategy=FixedStrategy(price=0.5), update_weight=1.0),
    ], ticks=2000)
    result = simulation_engine.run(scenario)
    share = sum(1 for r in result.series if r.updated_seller == 0) / 2000
    assert share == pytest.approx(0.9, abs=0.03)


def test_buyer_mix_drifts_linearly():
    scenario = two_seller_scenario(MyopicOptimalStrategy(), 1.0, ticks=11, type1_fraction_end=0.0)
    assert simulation_engine.market_at(scenario, 0, 11).type1_fraction == pytest.approx(1.0)
    assert simulation_engine.market_at(scenario, 5, 11).type1_fraction == pytest.approx(0.5)
    assert simulation_engine.market_at(scenario, 10, 11).type1_fraction == pytest.approx(0.0)


def test_sampled_profit_signal_is_reproducible():
    strategy = DerivativeFollowerStrategy(step=EPS)
    scenario = two_seller_scenario(strategy, 0.75, ticks=300, profit_signal="sampled")
    assert simulation_engine.run(scenario).series == simulation_engine.run(scenario).series


def test_stale_view_drives_myopic_response():
    scenario = two_seller_scenario(MyopicOptimalStrategy(), 0.5)
    state = simulation_engine.build_state(scenario, seed=0, initial_prices=[1.0, 0.3])
    chosen = int(np.random.default_rng(0).choice(2, p=[0.5, 0.5]))
    # the mover sees its rival at 0.5 although the live price differs
    view = [0.5, 0.5]
    successor = simulation_engine.step(state, scenario.market_config(), observed_prices=view)
    assert successor.prices[chosen] == pytest.approx(0.49)


def test_off_grid_initial_price_is_rejected():
    scenario = two_seller_scenario(MyopicOptimalStrategy(), 0.5)
    with pytest.raises(ScenarioError):
        simulation_engine.build_state(scenario, seed=0, initial_prices=[0.505, 1.0])


def test_run_needs_sellers_and_ticks():
    with pytest.raises(ScenarioError):
        simulation_engine.run(ScenarioConfig())
    with pytest.raises(ScenarioError):
        simulation_engine.run(two_seller_scenario(MyopicOptimalStrategy(), 0.5), ticks=0)

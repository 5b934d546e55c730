# services/simulation_service.py
"""Discrete-time market loop: one seller re-prices per tick."""
from core.exceptions import ScenarioError
from models.market import (
    DerivativeFollowerStrategy,
    DetectorThresholds,
    FixedStrategy,
    MarketConfig,
    MarketState,
    MyopicOptimalStrategy,
    RegimeReport,
    Seller,
    TickRecord,
)
from models.scenario import ScenarioConfig
from pydantic import BaseModel
from services.market_model import (
    consumer_surplus,
    expected_demand,
    price_dispersion,
    sample_demand,
    tick_transactions,
)
from services.pricing_strategies import derivative_follower_step, myopic_best_response
from services.regime_detection import classify_regime
from typing import List, NamedTuple, Optional, Sequence
import logging
import math

import numpy as np

logger = logging.getLogger(__name__)


class RunSummary(BaseModel):
    regime: RegimeReport
    mean_profit: List[float]
    consumer_surplus: float
    range_ratio: Optional[float] = None
    coeff_variation: Optional[float] = None
    final_prices: List[float]
    ticks: int
    seed: int


class SimulationResult(NamedTuple):
    series: List[TickRecord]
    report: RegimeReport
    summary: RunSummary


class SimulationEngine:

    def __init__(self):
        pass

    def market_at(self, scenario: ScenarioConfig, tick: int, ticks: int) -> MarketConfig:
        """Market config for a tick, applying the optional buyer-mix drift."""
        config = scenario.market_config()
        if scenario.type1_fraction_end is None or ticks <= 1:
            return config
        w1 = scenario.type1_fraction + (
            (scenario.type1_fraction_end - scenario.type1_fraction) * tick / (ticks - 1)
        )
        return config.model_copy(update={"type1_fraction": min(max(w1, 0.0), 1.0)})

    def build_state(self, scenario: ScenarioConfig, seed: int,
                    initial_prices: Optional[Sequence[float]] = None) -> MarketState:
        """Initial state; sellers start at the monopolistic price_max unless told otherwise."""
        if not scenario.sellers:
            raise ScenarioError("sellers: at least one seller is required")
        config = scenario.market_config()
        if initial_prices is not None and len(initial_prices) != len(scenario.sellers):
            raise ScenarioError("initial_prices: one price per seller is required")

        sellers = []
        for index, seller_spec in enumerate(scenario.sellers):
            if initial_prices is not None:
                start = initial_prices[index]
            elif seller_spec.initial_price is not None:
                start = seller_spec.initial_price
            elif isinstance(seller_spec.strategy, FixedStrategy):
                start = seller_spec.strategy.price
            else:
                start = config.price_max
            try:
                start = config.from_ticks(config.to_ticks(start))
            except ValueError as e:
                raise ScenarioError(f"sellers.{index}.initial_price: {e}") from e
            if start > config.price_max:
                raise ScenarioError(f"sellers.{index}.initial_price: above price_max")
            sellers.append(Seller(
                id=index,
                marginal_cost=seller_spec.cost,
                strategy=seller_spec.strategy,
                current_price=start,
                update_weight=seller_spec.update_weight,
            ))

        prices = [s.current_price for s in sellers]
        for seller in sellers:
            seller.last_profit = self._expected_profit(seller, prices, config)
        return MarketState(
            sellers=sellers,
            cumulative_profit=[0.0] * len(sellers),
            rng=np.random.default_rng(seed),
        )

    def _expected_profit(self, seller: Seller, prices: Sequence[float], config: MarketConfig) -> float:
        units = expected_demand(seller.id, prices, config).expected_units
        return (seller.current_price - seller.marginal_cost) * units

    def _observed_profit(self, seller: Seller, prices: Sequence[float], config: MarketConfig,
                         rng: np.random.Generator, profit_signal: str) -> float:
        if profit_signal == "sampled":
            units = sample_demand(seller.id, prices, config, rng).expected_units
            return (seller.current_price - seller.marginal_cost) * units
        return self._expected_profit(seller, prices, config)

    def _reprice(self, seller: Seller, prices: List[float], config: MarketConfig,
                 rng: np.random.Generator, observed_prices: Optional[Sequence[float]],
                 profit_signal: str) -> tuple:
        """New (seller, rival-price lookups) after one strategy application."""
        strategy = seller.strategy
        profit_now = self._observed_profit(seller, prices, config, rng, profit_signal)

        if isinstance(strategy, FixedStrategy):
            return seller.model_copy(update={
                "current_price": config.snap(strategy.price),
                "last_profit": profit_now,
            }), 0

        if isinstance(strategy, MyopicOptimalStrategy):
            view = list(observed_prices) if observed_prices is not None else list(prices)
            view[seller.id] = seller.current_price
            new_price = myopic_best_response(seller.id, view, config, seller.marginal_cost)
            return seller.model_copy(update={
                "current_price": new_price,
                "last_profit": profit_now,
            }), config.num_sellers - 1

        if isinstance(strategy, DerivativeFollowerStrategy):
            floor = config.from_ticks(math.ceil(seller.marginal_cost / config.price_tick - 1e-9))
            new_price, new_direction = derivative_follower_step(
                seller.current_price, strategy.direction, strategy.step,
                profit_now, seller.last_profit, (floor, config.price_max),
            )
            return seller.model_copy(update={
                "current_price": config.snap(new_price),
                "last_profit": profit_now,
                "strategy": strategy.model_copy(update={"direction": new_direction}),
            }), 0

        raise ScenarioError(f"unknown strategy: {strategy!r}")

    def advance(self, state: MarketState, config: MarketConfig,
                observed_prices: Optional[Sequence[float]] = None,
                profit_signal: str = "expected") -> TickRecord:
        """Apply one tick to `state` in place and return the recorded tick."""
        weights = np.asarray([s.update_weight for s in state.sellers], dtype=float)
        chosen = int(state.rng.choice(len(state.sellers), p=weights / weights.sum()))

        prices = state.prices
        updated, queries = self._reprice(
            state.sellers[chosen], prices, config, state.rng, observed_prices, profit_signal
        )
        state.sellers[chosen] = updated

        prices = state.prices
        profits = [self._expected_profit(s, prices, config) for s in state.sellers]
        for index, value in enumerate(profits):
            state.cumulative_profit[index] += value

        record = TickRecord(
            tick=state.tick,
            prices=prices,
            profits=profits,
            queries=queries,
            updated_seller=chosen,
        )
        state.series.append(record)
        state.tick += 1
        logger.debug(f"tick {record.tick}: seller {chosen} -> {updated.current_price}")
        return record

    def step(self, state: MarketState, config: MarketConfig,
             observed_prices: Optional[Sequence[float]] = None,
             profit_signal: str = "expected") -> MarketState:
        """Successor state; the input state is left untouched."""
        successor = state.model_copy(deep=True)
        self.advance(successor, config, observed_prices, profit_signal)
        return successor

    def run(self, scenario: ScenarioConfig, ticks: Optional[int] = None, seed: Optional[int] = None,
            initial_prices: Optional[Sequence[float]] = None,
            thresholds: Optional[DetectorThresholds] = None) -> SimulationResult:
        """Run `ticks` steps and classify the resulting price series."""
        ticks = scenario.ticks if ticks is None else ticks
        seed = scenario.seed if seed is None else seed
        thresholds = thresholds or scenario.detectors
        if ticks < 1:
            raise ScenarioError("ticks: must be at least 1")

        logger.info(f"🚀 Simulating {len(scenario.sellers)} sellers for {ticks} ticks (seed {seed})")
        state = self.build_state(scenario, seed, initial_prices)
        for tick in range(ticks):
            self.advance(state, self.market_at(scenario, tick, ticks), profit_signal=scenario.profit_signal)

        config = scenario.market_config()
        matrix = np.asarray([record.prices for record in state.series])
        floor_cost = min(s.marginal_cost for s in state.sellers)
        report = classify_regime(matrix, floor_cost, config.price_tick, thresholds)

        window = min(thresholds.collusion_window, ticks)
        surplus = 0.0
        for record in state.series[-window:]:
            surplus += consumer_surplus(
                tick_transactions(record.prices, self.market_at(scenario, record.tick, ticks))
            )

        range_ratio, coeff_variation = None, None
        window_means = matrix[-window:].mean(axis=0)
        if np.all(window_means > 0):
            range_ratio, coeff_variation = price_dispersion(window_means.tolist())

        summary = RunSummary(
            regime=report,
            mean_profit=[total / ticks for total in state.cumulative_profit],
            consumer_surplus=surplus,
            range_ratio=range_ratio,
            coeff_variation=coeff_variation,
            final_prices=state.prices,
            ticks=ticks,
            seed=seed,
        )
        logger.info(f"✅ Simulation complete: {report.classification}")
        return SimulationResult(series=state.series, report=report, summary=summary)


# Global simulation engine instance
simulation_engine = SimulationEngine()

# services/market_model.py
"""Closed-form demand, profit and welfare computations for the shopbot economy.

Two buyer types share the market. A type-1 buyer picks one seller at random
(probability 1/S each) and buys if the price is within its valuation. A type-2
buyer uses a shopbot, finds the lowest price and buys there if the price is
within its valuation, splitting ties evenly among the cheapest sellers.
"""
from core.exceptions import MarketError
from models.market import (
    ConstantValuation,
    DemandResult,
    MarketConfig,
    Transaction,
    UniformValuation,
)
from typing import Iterable, List, Sequence, Tuple, Union
import logging

import numpy as np

logger = logging.getLogger(__name__)

# Prices within this distance of a valuation count as equal to it
VALUE_TOLERANCE = 1e-12


def survival_probability(p: float, vm) -> float:
    """Pr(v >= p) for a buyer drawn from the valuation model."""
    if p < 0:
        raise MarketError(f"price must be nonnegative, got {p}")
    return float(survival_curve(np.asarray([p], dtype=float), vm)[0])


def survival_curve(prices: np.ndarray, vm) -> np.ndarray:
    """Vectorized survival_probability over an array of prices."""
    prices = np.asarray(prices, dtype=float)
    if isinstance(vm, ConstantValuation):
        return (prices <= vm.value + VALUE_TOLERANCE).astype(float)
    if isinstance(vm, UniformValuation):
        return np.clip((vm.hi - prices) / (vm.hi - vm.lo), 0.0, 1.0)
    raise MarketError(f"unknown valuation model: {vm!r}")


def expected_surplus_per_unit(p: float, vm) -> float:
    """E[v - p | v >= p]; zero when nobody buys at p."""
    if survival_probability(p, vm) == 0.0:
        return 0.0
    if isinstance(vm, ConstantValuation):
        return max(vm.value - p, 0.0)
    floor = max(p, vm.lo)
    return (floor + vm.hi) / 2.0 - p


def price_ticks(prices: Sequence[float], config: MarketConfig) -> np.ndarray:
    if len(prices) != config.num_sellers:
        raise MarketError(f"expected {config.num_sellers} prices, got {len(prices)}")
    try:
        return np.asarray([config.to_ticks(p) for p in prices], dtype=np.int64)
    except ValueError as e:
        raise MarketError(str(e)) from e


def check_seller_index(seller_index: int, config: MarketConfig):
    if not 0 <= seller_index < config.num_sellers:
        raise MarketError(f"seller index {seller_index} out of range for {config.num_sellers} sellers")


def _demand_from_ticks(seller_index: int, ticks: np.ndarray, config: MarketConfig) -> Tuple[float, float]:
    own = int(ticks[seller_index])
    q = float(survival_curve(np.asarray([config.from_ticks(own)]), config.valuation_model)[0])
    buyers = float(config.buyers_per_tick)
    type1 = buyers * config.type1_fraction * q / config.num_sellers
    lowest = int(ticks.min())
    type2 = 0.0
    if own == lowest:
        sharing = int(np.count_nonzero(ticks == lowest))
        type2 = buyers * config.type2_fraction * q / sharing
    return type1, type2


def expected_demand(seller_index: int, prices: Sequence[float], config: MarketConfig) -> DemandResult:
    """Expected units sold by one seller at the given price vector."""
    check_seller_index(seller_index, config)
    ticks = price_ticks(prices, config)
    type1, type2 = _demand_from_ticks(seller_index, ticks, config)
    return DemandResult(expected_units=type1 + type2, type1_units=type1, type2_units=type2)


def demand_over_grid(seller_index: int, ticks: Sequence[int], config: MarketConfig) -> np.ndarray:
    """Expected units for `seller_index` at every grid price, rivals held at `ticks`.

    `ticks` is the full price vector in grid units; the seller's own entry is ignored.
    """
    grid = np.arange(config.grid_size + 1)
    q = survival_curve(config.grid_prices(), config.valuation_model)
    buyers = float(config.buyers_per_tick)
    type1 = buyers * config.type1_fraction * q / config.num_sellers

    rivals = np.delete(np.asarray(ticks, dtype=np.int64), seller_index)
    if rivals.size == 0:
        share = np.ones_like(q)
    else:
        rival_min = int(rivals.min())
        ties = int(np.count_nonzero(rivals == rival_min))
        share = np.where(grid < rival_min, 1.0, np.where(grid == rival_min, 1.0 / (ties + 1), 0.0))
    return type1 + buyers * config.type2_fraction * q * share


def profit(seller_index: int, prices: Sequence[float], config: MarketConfig,
           marginal_cost: float = 0.0) -> float:
    """(p_s - c_s) times expected units; negative when pricing below cost."""
    demand = expected_demand(seller_index, prices, config)
    return (prices[seller_index] - marginal_cost) * demand.expected_units


def sample_demand(seller_index: int, prices: Sequence[float], config: MarketConfig,
                  rng: np.random.Generator) -> DemandResult:
    """Realized units for one tick, drawn buyer by buyer through binomial counts."""
    check_seller_index(seller_index, config)
    ticks = price_ticks(prices, config)
    q = float(survival_curve(np.asarray([config.from_ticks(int(ticks[seller_index]))]),
                             config.valuation_model)[0])
    type1_buyers = int(rng.binomial(config.buyers_per_tick, config.type1_fraction))
    type2_buyers = config.buyers_per_tick - type1_buyers

    type1 = float(rng.binomial(type1_buyers, q / config.num_sellers))
    type2 = 0.0
    lowest = int(ticks.min())
    if int(ticks[seller_index]) == lowest:
        sharing = int(np.count_nonzero(ticks == lowest))
        type2 = float(rng.binomial(type2_buyers, q / sharing))
    return DemandResult(expected_units=type1 + type2, type1_units=type1, type2_units=type2)


def quantity_demanded(valuations: Iterable[float], p: float) -> int:
    """Number of buyers whose valuation reaches p."""
    if p < 0:
        raise MarketError(f"price must be nonnegative, got {p}")
    return sum(1 for v in valuations if v >= p)


def optimal_uniform_price(valuations: Sequence[float], c: float) -> Tuple[float, float]:
    """Best single price among the valuations; ties go to the lower price."""
    if not valuations:
        raise MarketError("optimal_uniform_price needs at least one valuation")

    best_price, best_profit = None, None
    for candidate in sorted(set(valuations)):
        candidate_profit = (candidate - c) * quantity_demanded(valuations, candidate)
        if best_profit is None or candidate_profit > best_profit:
            best_price, best_profit = candidate, candidate_profit
    return best_price, best_profit


def perfect_discrimination_profit(valuations: Iterable[float], c: float) -> float:
    """Profit when every buyer is charged exactly its valuation."""
    return sum(max(v - c, 0) for v in valuations)


def distribution_efficient(mrs_values: Sequence[float], tol: float) -> bool:
    """True when all consumers share the same marginal rate of substitution."""
    if not mrs_values:
        raise MarketError("distribution_efficient needs at least one MRS value")
    if tol < 0:
        raise MarketError("tolerance must be nonnegative")
    return max(mrs_values) - min(mrs_values) <= tol


def price_dispersion(prices: Sequence[float]) -> Tuple[float, float]:
    """(range_ratio, coefficient of variation) of simultaneous prices."""
    if len(prices) == 0:
        raise MarketError("price_dispersion needs at least one price")
    values = np.asarray(prices, dtype=float)
    if np.any(values <= 0):
        raise MarketError("price_dispersion needs strictly positive prices")
    range_ratio = float((values.max() - values.min()) / values.min())
    coeff_variation = float(values.std() / values.mean())
    return range_ratio, coeff_variation


def consumer_surplus(transactions: Iterable[Union[Transaction, Tuple[float, float]]]) -> float:
    """Total buyer utility v - p over completed transactions."""
    total = 0.0
    for tx in transactions:
        if not isinstance(tx, Transaction):
            tx = Transaction(valuation=tx[0], price=tx[1])
        if tx.price > tx.valuation + VALUE_TOLERANCE:
            raise MarketError(
                f"transaction at price {tx.price} above valuation {tx.valuation}"
            )
        total += tx.quantity * (tx.valuation - tx.price)
    return total


def tick_transactions(prices: Sequence[float], config: MarketConfig) -> List[Transaction]:
    """Expected-quantity transactions for one tick, one per seller."""
    transactions = []
    for index, price in enumerate(prices):
        units = expected_demand(index, prices, config).expected_units
        if units <= 0:
            continue
        surplus = expected_surplus_per_unit(price, config.valuation_model)
        transactions.append(Transaction(valuation=price + surplus, price=price, quantity=units))
    return transactions

# services/pricing_strategies.py
"""Seller price-setting behaviors and equilibrium checks."""
from core.config import settings
from models.market import MarketConfig, MixedStrategy
from services.market_model import demand_over_grid, check_seller_index, price_ticks
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union
import itertools
import logging

import numpy as np

logger = logging.getLogger(__name__)

# Above this many rival profiles, expected profit is estimated by sampling
MAX_ENUMERATED_PROFILES = 4096


class NashCheck(NamedTuple):
    is_nash: bool
    worst_gain: float
    witness: Optional[Tuple[int, float]]


def _argmax_high(curve: np.ndarray) -> int:
    """Index of the maximum, ties (within tolerance) resolved toward the higher price."""
    best = float(curve.max())
    tolerance = settings.PROFIT_TIE_TOLERANCE * max(1.0, abs(best))
    return int(np.nonzero(curve >= best - tolerance)[0].max())


def profit_over_grid(seller_index: int, ticks: Sequence[int], config: MarketConfig,
                     marginal_cost: float = 0.0) -> np.ndarray:
    """Profit at every grid price for one seller, rivals fixed."""
    units = demand_over_grid(seller_index, ticks, config)
    return (config.grid_prices() - marginal_cost) * units


def myopic_best_response(seller_index: int, prices: Sequence[float], config: MarketConfig,
                         marginal_cost: float = 0.0) -> float:
    """Profit-maximizing grid price assuming rivals keep their current prices."""
    check_seller_index(seller_index, config)
    ticks = price_ticks(prices, config)
    curve = profit_over_grid(seller_index, ticks, config, marginal_cost)
    return config.from_ticks(_argmax_high(curve))


def derivative_follower_step(current_price: float, direction: int, step: float,
                             profit_now: float, profit_prev: float,
                             bounds: Tuple[float, float]) -> Tuple[float, int]:
    """Keep moving while profit holds up; reverse as soon as it strictly falls."""
    new_direction = -direction if profit_now < profit_prev else direction
    low, high = bounds
    new_price = min(max(current_price + new_direction * step, low), high)
    return round(new_price, 10), new_direction


def _as_mix(entry: Union[float, MixedStrategy], config: MarketConfig) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(entry, MixedStrategy):
        ticks = np.asarray([config.to_ticks(p) for p, _ in entry.support], dtype=np.int64)
        weights = np.asarray([w for _, w in entry.support], dtype=float)
        return ticks, weights
    return np.asarray([config.to_ticks(entry)], dtype=np.int64), np.asarray([1.0])


def _expected_profit_curve(seller_index: int, mixes: List[Tuple[np.ndarray, np.ndarray]],
                           config: MarketConfig, marginal_cost: float,
                           rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Expected profit at every own grid price against independent rival mixes."""
    rivals = [j for j in range(config.num_sellers) if j != seller_index]
    if not rivals:
        return profit_over_grid(seller_index, [0], config, marginal_cost)
    curve = np.zeros(config.grid_size + 1)

    profile_count = int(np.prod([mixes[j][0].size for j in rivals]))
    ticks = np.zeros(config.num_sellers, dtype=np.int64)

    if profile_count <= MAX_ENUMERATED_PROFILES or rng is None:
        supports = [list(zip(mixes[j][0], mixes[j][1])) for j in rivals]
        for combo in itertools.product(*supports):
            weight = 1.0
            for j, (tick, w) in zip(rivals, combo):
                ticks[j] = tick
                weight *= w
            if weight > 0:
                curve += weight * profit_over_grid(seller_index, ticks, config, marginal_cost)
        return curve

    samples = settings.FICTITIOUS_PLAY_SAMPLES
    for _ in range(samples):
        for j in rivals:
            ticks[j] = rng.choice(mixes[j][0], p=mixes[j][1])
        curve += profit_over_grid(seller_index, ticks, config, marginal_cost)
    return curve / samples


def verify_epsilon_nash(profile: Sequence[Union[float, MixedStrategy]], config: MarketConfig,
                        eps: float, costs: Optional[Sequence[float]] = None) -> NashCheck:
    """Check that no seller gains more than eps from a unilateral grid deviation."""
    costs = list(costs) if costs is not None else [0.0] * config.num_sellers
    mixes = [_as_mix(entry, config) for entry in profile]

    worst_gain, witness = 0.0, None
    for s in range(config.num_sellers):
        curve = _expected_profit_curve(s, mixes, config, costs[s])
        own_ticks, own_weights = mixes[s]
        current = float(np.dot(own_weights, curve[own_ticks]))
        best_tick = _argmax_high(curve)
        gain = float(curve[best_tick]) - current
        if gain > worst_gain:
            worst_gain, witness = gain, (s, config.from_ticks(best_tick))

    return NashCheck(is_nash=worst_gain <= eps, worst_gain=worst_gain, witness=witness)


def fictitious_play(config: MarketConfig, iterations: int, seed: int,
                    costs: Optional[Sequence[float]] = None,
                    initial_prices: Optional[Sequence[float]] = None) -> List[MixedStrategy]:
    """Each seller best-responds to rivals' empirical price frequencies.

    The returned mixes are empirical visit frequencies, not an exact equilibrium.
    Before a rival has any history its initial price stands in for its mix.
    """
    if iterations < 1:
        raise ValueError("fictitious_play needs at least one iteration")
    costs = list(costs) if costs is not None else [0.0] * config.num_sellers
    rng = np.random.default_rng(seed)
    size = config.grid_size + 1
    if initial_prices is None:
        initial = np.full(config.num_sellers, config.grid_size, dtype=np.int64)
    else:
        initial = np.asarray([config.to_ticks(p) for p in initial_prices], dtype=np.int64)
    counts = np.zeros((config.num_sellers, size))

    # Two sellers: a payoff matrix turns each best response into one product
    payoff = None
    if config.num_sellers == 2:
        payoff = []
        for s in range(2):
            columns = []
            for rival_tick in range(size):
                ticks = np.zeros(2, dtype=np.int64)
                ticks[1 - s] = rival_tick
                columns.append(profit_over_grid(s, ticks, config, costs[s]))
            payoff.append(np.column_stack(columns))

    logger.info(f"🎲 Fictitious play: {config.num_sellers} sellers, {iterations} iterations")
    grid = np.arange(size)
    for _ in range(iterations):
        mixes = []
        for j in range(config.num_sellers):
            total = counts[j].sum()
            if total == 0:
                mixes.append((np.asarray([initial[j]]), np.asarray([1.0])))
            else:
                support = counts[j] > 0
                mixes.append((grid[support], counts[j][support] / total))

        chosen = np.empty(config.num_sellers, dtype=np.int64)
        for s in range(config.num_sellers):
            if payoff is not None:
                rival_freq = np.zeros(size)
                rival_ticks, rival_weights = mixes[1 - s]
                rival_freq[rival_ticks] = rival_weights
                curve = payoff[s] @ rival_freq
            else:
                curve = _expected_profit_curve(s, mixes, config, costs[s], rng)
            chosen[s] = _argmax_high(curve)
        counts[np.arange(config.num_sellers), chosen] += 1

    strategies = []
    for s in range(config.num_sellers):
        frequencies = counts[s] / counts[s].sum()
        support = [(config.from_ticks(int(k)), float(frequencies[k]))
                   for k in np.nonzero(frequencies)[0]]
        # renormalize away float drift so weights sum to one
        norm = sum(w for _, w in support)
        strategies.append(MixedStrategy(support=[(p, w / norm) for p, w in support]))
    return strategies

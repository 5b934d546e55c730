# models/market.py
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import Annotated, List, Literal, Optional, Union
import math

import numpy as np

from core.config import settings

# Price grid snapping tolerance, in ticks
GRID_TOLERANCE = 1e-6


class ConstantValuation(BaseModel):
    """Every buyer values the item at exactly `value`."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["constant"] = "constant"
    value: float = Field(gt=0)

    @property
    def max_value(self) -> float:
        return self.value


class UniformValuation(BaseModel):
    """Buyer valuations drawn uniformly from [lo, hi]."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["uniform"] = "uniform"
    lo: float = Field(ge=0)
    hi: float

    @model_validator(mode="after")
    def _check_bounds(self):
        if not self.lo < self.hi:
            raise ValueError("uniform valuation requires lo < hi")
        return self

    @property
    def max_value(self) -> float:
        return self.hi


ValuationModel = Annotated[
    Union[ConstantValuation, UniformValuation],
    Field(discriminator="kind"),
]


class MarketConfig(BaseModel):
    """The economy: S sellers, B buyers per tick, buyer-type mix and the price grid.

    Money is handled as integer multiples of `price_tick` wherever prices are
    compared, so ties between sellers are exact.
    """
    model_config = ConfigDict(frozen=True)

    num_sellers: int = Field(ge=1)
    buyers_per_tick: int = Field(ge=0)
    type1_fraction: float = Field(ge=0.0, le=1.0)
    valuation_model: ValuationModel = Field(default_factory=lambda: ConstantValuation(value=1.0))
    price_tick: float = Field(gt=0)
    price_max: float = Field(gt=0)

    @model_validator(mode="after")
    def _check_grid(self):
        if not self.price_tick < self.price_max:
            raise ValueError("price_tick must be smaller than price_max")
        if self.price_max < self.valuation_model.max_value:
            raise ValueError("price_max must be at least the largest attainable valuation")
        ratio = self.price_max / self.price_tick
        if abs(ratio - round(ratio)) > GRID_TOLERANCE:
            raise ValueError("price_max must be a multiple of price_tick")
        return self

    @property
    def type2_fraction(self) -> float:
        return 1.0 - self.type1_fraction

    @property
    def grid_size(self) -> int:
        """Index of the top grid point (price_max)."""
        return int(round(self.price_max / self.price_tick))

    def to_ticks(self, price: float) -> int:
        ratio = price / self.price_tick
        ticks = int(round(ratio))
        if abs(ratio - ticks) > GRID_TOLERANCE:
            raise ValueError(f"price {price} is not on the {self.price_tick} grid")
        return ticks

    def from_ticks(self, ticks: int) -> float:
        return round(ticks * self.price_tick, 10)

    def snap(self, price: float) -> float:
        """Nearest grid price inside [0, price_max]."""
        ticks = min(max(int(round(price / self.price_tick)), 0), self.grid_size)
        return self.from_ticks(ticks)

    def grid_prices(self) -> np.ndarray:
        return np.round(np.arange(self.grid_size + 1) * self.price_tick, 10)


class FixedStrategy(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["fixed"] = "fixed"
    price: float = Field(ge=0)


class DerivativeFollowerStrategy(BaseModel):
    """Steps price by `step` in `direction` until profit falls, then reverses."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["derivative_follower"] = "derivative_follower"
    step: float = Field(gt=0)
    direction: Literal[1, -1] = -1


class MyopicOptimalStrategy(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["myopic_optimal"] = "myopic_optimal"


StrategyKind = Annotated[
    Union[FixedStrategy, DerivativeFollowerStrategy, MyopicOptimalStrategy],
    Field(discriminator="kind"),
]


class Seller(BaseModel):
    id: int
    marginal_cost: float = Field(ge=0)
    strategy: StrategyKind
    current_price: float = Field(ge=0)
    last_profit: float = 0.0
    update_weight: float = Field(default=1.0, gt=0)


class DemandResult(BaseModel):
    expected_units: float = Field(ge=0)
    type1_units: float = Field(ge=0)
    type2_units: float = Field(ge=0)

    @model_validator(mode="after")
    def _check_sum(self):
        if not math.isclose(self.expected_units, self.type1_units + self.type2_units,
                            rel_tol=1e-9, abs_tol=1e-9):
            raise ValueError("expected_units must equal type1_units + type2_units")
        return self


class Transaction(BaseModel):
    valuation: float
    price: float
    quantity: float = Field(default=1.0, ge=0)


class MixedStrategy(BaseModel):
    """Distribution over grid prices."""
    support: List[tuple[float, float]]

    @field_validator("support")
    @classmethod
    def _check_support(cls, support):
        if not support:
            raise ValueError("mixed strategy needs a nonempty support")
        prices = [p for p, _ in support]
        if len(set(prices)) != len(prices):
            raise ValueError("support prices must be distinct")
        if any(w < 0 for _, w in support):
            raise ValueError("weights must be nonnegative")
        if abs(sum(w for _, w in support) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        return support


class TickRecord(BaseModel):
    tick: int
    prices: List[float]
    profits: List[float]
    queries: int = 0
    updated_seller: Optional[int] = None


class MarketState(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    tick: int = 0
    sellers: List[Seller]
    cumulative_profit: List[float]
    rng: np.random.Generator
    series: List[TickRecord] = Field(default_factory=list)

    @property
    def prices(self) -> List[float]:
        return [s.current_price for s in self.sellers]


class DetectorThresholds(BaseModel):
    """Regime detector settings; tick-valued fields are multiples of the price tick."""
    model_config = ConfigDict(extra="forbid")

    min_drop_run: int = Field(default_factory=lambda: settings.DETECTOR_MIN_DROP_RUN, ge=2)
    reset_ticks: int = Field(default_factory=lambda: settings.DETECTOR_RESET_TICKS, gt=0)
    collusion_window: int = Field(default_factory=lambda: settings.COLLUSION_WINDOW, ge=1)
    collusion_margin_ticks: int = Field(default_factory=lambda: settings.COLLUSION_MARGIN_TICKS, ge=0)
    collusion_cv_max: float = Field(default_factory=lambda: settings.COLLUSION_CV_MAX, ge=0)
    competitive_margin_ticks: int = Field(default_factory=lambda: settings.COMPETITIVE_MARGIN_TICKS, ge=0)


class RegimeReport(BaseModel):
    classification: Literal["PriceWar", "Collusive", "Competitive", "Indeterminate"]
    cycle_count: int = 0
    mean_trough: float = 0.0
    mean_peak: float = 0.0
    window_mean_price: float = 0.0
    window_cv: float = 0.0
    reset_peaks: List[float] = Field(default_factory=list)
    reset_troughs: List[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_cycles(self):
        if (self.cycle_count > 0) != (self.classification == "PriceWar"):
            raise ValueError("cycle_count > 0 exactly when classification is PriceWar")
        return self

# models/scenario.py
from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import List, Literal, Optional

from models.market import (
    ConstantValuation,
    DetectorThresholds,
    MarketConfig,
    StrategyKind,
    ValuationModel,
)
from models.traffic import TrafficConfig


class SellerSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    cost: float = Field(default=0.0, ge=0)
    strategy: StrategyKind
    initial_price: Optional[float] = Field(default=None, ge=0)
    update_weight: float = Field(default=1.0, gt=0)


class ScenarioConfig(BaseModel):
    """A scenario file: one flat JSON document, unknown keys rejected."""
    model_config = ConfigDict(extra="forbid")

    buyers_per_tick: int = Field(default=100, ge=0)
    type1_fraction: float = Field(default=0.5, ge=0.0, le=1.0)
    type1_fraction_end: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    valuation: ValuationModel = Field(default_factory=lambda: ConstantValuation(value=1.0))
    price_tick: float = Field(default=0.01, gt=0)
    price_max: float = Field(default=1.0, gt=0)
    sellers: List[SellerSpec] = Field(default_factory=list)
    ticks: int = Field(default=1000, ge=1)
    seed: int = 0
    profit_signal: Literal["expected", "sampled"] = "expected"
    detectors: DetectorThresholds = Field(default_factory=DetectorThresholds)
    traffic: Optional[TrafficConfig] = None
    policy_file: Optional[str] = None

    @model_validator(mode="after")
    def _check_market(self):
        # Builds the market once so grid and valuation invariants surface as field errors
        if self.sellers:
            self.market_config()
            for seller in self.sellers:
                if seller.initial_price is not None and seller.initial_price > self.price_max:
                    raise ValueError("initial_price must not exceed price_max")
        return self

    def market_config(self, num_sellers: Optional[int] = None) -> MarketConfig:
        return MarketConfig(
            num_sellers=num_sellers or max(len(self.sellers), 1),
            buyers_per_tick=self.buyers_per_tick,
            type1_fraction=self.type1_fraction,
            valuation_model=self.valuation,
            price_tick=self.price_tick,
            price_max=self.price_max,
        )

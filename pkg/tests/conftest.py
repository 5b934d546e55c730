import pytest

from models.market import ConstantValuation, MarketConfig


def make_market(num_sellers=2, buyers=100, w1=0.5, value=1.0, tick=0.01, price_max=1.0,
                valuation=None) -> MarketConfig:
    return MarketConfig(
        num_sellers=num_sellers,
        buyers_per_tick=buyers,
        type1_fraction=w1,
        valuation_model=valuation or ConstantValuation(value=value),
        price_tick=tick,
        price_max=price_max,
    )


@pytest.fixture
def market():
    """Two sellers, 100 buyers, half of them shopbot users, everyone values the good at 1.0."""
    return make_market()


@pytest.fixture
def market_factory():
    return make_market

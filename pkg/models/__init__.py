from .market import (
    ConstantValuation,
    UniformValuation,
    MarketConfig,
    FixedStrategy,
    DerivativeFollowerStrategy,
    MyopicOptimalStrategy,
    Seller,
    DemandResult,
    Transaction,
    MixedStrategy,
    TickRecord,
    MarketState,
    DetectorThresholds,
    RegimeReport,
)
from .protocol import (
    CrawlLimit,
    PolicyRecord,
    ExclusionPolicy,
    AccessRequest,
    AccessDecision,
    LedgerEvent,
    LedgerReport,
)
from .traffic import (
    CrawlerAgent,
    SiteQuery,
    TrafficEvent,
    LoadReport,
    MetasiteConfig,
    MetasiteResult,
    TrafficConfig,
)
from .scenario import SellerSpec, ScenarioConfig

__all__ = [
    "ConstantValuation",
    "UniformValuation",
    "MarketConfig",
    "FixedStrategy",
    "DerivativeFollowerStrategy",
    "MyopicOptimalStrategy",
    "Seller",
    "DemandResult",
    "Transaction",
    "MixedStrategy",
    "TickRecord",
    "MarketState",
    "DetectorThresholds",
    "RegimeReport",
    "CrawlLimit",
    "PolicyRecord",
    "ExclusionPolicy",
    "AccessRequest",
    "AccessDecision",
    "LedgerEvent",
    "LedgerReport",
    "CrawlerAgent",
    "SiteQuery",
    "TrafficEvent",
    "LoadReport",
    "MetasiteConfig",
    "MetasiteResult",
    "TrafficConfig",
    "SellerSpec",
    "ScenarioConfig",
]

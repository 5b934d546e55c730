from .config import settings
from .exceptions import MarketError, PolicyParseError, ScenarioError

__all__ = ["settings", "MarketError", "PolicyParseError", "ScenarioError"]

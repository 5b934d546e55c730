# core/exceptions.py
from typing import Optional


class MarketError(ValueError):
    """Invalid market input: bad index, off-grid price, empty list."""


class ScenarioError(ValueError):
    """Scenario file passed schema validation but is not runnable."""


class PolicyParseError(ValueError):
    """Robot exclusion policy could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.message = message
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)

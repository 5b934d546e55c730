# models/traffic.py
from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import List, Literal, Optional

from core.config import settings


class CrawlerAgent(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    agent_token: str
    origin_address: str
    proxy_address: Optional[str] = None
    rate: float = Field(ge=0)  # queries per tick
    compliant: bool = False
    declared_purpose: str = "commercial"
    paths: List[str] = Field(default_factory=lambda: ["/catalog"])
    catalog_fraction: float = Field(default=0.0, ge=0.0, le=1.0)


class SiteQuery(BaseModel):
    """A single query as the site sees it."""
    tick: int
    agent_id: str
    origin_address: str
    proxy_address: Optional[str] = None
    path: str = "/"
    is_robot: bool = True

    @property
    def observed_address(self) -> str:
        return self.proxy_address or self.origin_address


class TrafficEvent(BaseModel):
    tick: int
    address: str
    agent: str
    path: str
    outcome: Literal["accepted", "refused"]
    is_robot: bool = True


class LoadReport(BaseModel):
    robot_queries: int = Field(default=0, ge=0)
    total_queries: int = Field(default=0, ge=0)
    robot_fraction: float = Field(default=0.0, ge=0.0, le=1.0)
    harm_flag: bool = False
    source: Literal["measured", "aggregate"] = "measured"
    robot_count: Optional[int] = None

    @model_validator(mode="after")
    def _check_fraction(self):
        if self.source == "measured":
            expected = self.robot_queries / self.total_queries if self.total_queries else 0.0
            if abs(self.robot_fraction - expected) > 1e-12:
                raise ValueError("robot_fraction must equal robot_queries / total_queries")
        return self


class MetasiteConfig(BaseModel):
    """Metasite refresh schedule; refresh_period None disables the metasite."""
    model_config = ConfigDict(extra="forbid")

    num_sellers: Optional[int] = Field(default=None, ge=1)
    refresh_period: Optional[int] = Field(default=1, ge=1)
    vendor_robot: bool = False
    ticks: int = Field(default=100, ge=0)


class MetasiteResult(BaseModel):
    metasite_queries: List[int]
    vendor_queries: List[int]
    total_metasite: int
    total_vendor: int
    total: int


class TrafficConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    agents: List[CrawlerAgent] = Field(default_factory=list)
    ticks: int = Field(default=100, ge=0)
    human_rate: float = Field(default=0.0, ge=0)
    human_addresses: int = Field(default=1000, ge=1)
    block_threshold: int = Field(default_factory=lambda: settings.BLOCK_THRESHOLD, ge=1)
    block_window: int = Field(default_factory=lambda: settings.BLOCK_WINDOW, ge=1)
    capacity_threshold: float = Field(default_factory=lambda: settings.CAPACITY_THRESHOLD, ge=0)
    load_window: int = Field(default_factory=lambda: settings.LOAD_WINDOW, ge=1)
    seconds_per_tick: float = Field(default=1.0, gt=0)
    aggregate_robot_counts: List[int] = Field(default_factory=lambda: [1, 2, 5, 10, 20, 50, 65])
    metasite: Optional[MetasiteConfig] = None

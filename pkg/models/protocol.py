# models/protocol.py
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import Dict, List, Literal, Optional, Tuple

WILDCARD = "*"
POLICY_PATH = "/robots.txt"


class CrawlLimit(BaseModel):
    """At most `max_queries` queries per `window` seconds."""
    model_config = ConfigDict(frozen=True)

    max_queries: int = Field(ge=1)
    window: int = Field(ge=1)


class PolicyRecord(BaseModel):
    """One blank-line separated record of a robot exclusion file.

    An empty `disallow` list allows everything for the matched agents.
    """
    model_config = ConfigDict(frozen=True)

    agents: Tuple[str, ...]
    disallow: Tuple[str, ...] = ()
    crawl_limit: Optional[CrawlLimit] = None
    purpose_allow: Optional[Tuple[str, ...]] = None
    amount_limit: Optional[float] = Field(default=None, gt=0, le=1)
    terms_uri: Optional[str] = None
    # path prefix -> nature-of-work label; recorded, never enforced
    data_classes: Tuple[Tuple[str, str], ...] = ()

    @property
    def is_wildcard(self) -> bool:
        return WILDCARD in self.agents

    def data_class_for(self, path: str) -> Optional[str]:
        best = None
        for prefix, label in self.data_classes:
            if path.startswith(prefix) and (best is None or len(prefix) > len(best[0])):
                best = (prefix, label)
        return best[1] if best else None


class ExclusionPolicy(BaseModel):
    records: List[PolicyRecord] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)


class AccessRequest(BaseModel):
    agent_token: str
    origin_address: str = "0.0.0.0"
    proxy_address: Optional[str] = None
    path: str
    declared_purpose: str = "unspecified"
    time: float = 0.0
    catalog_fraction_fetched: float = Field(default=0.0, ge=0.0, le=1.0)

    @field_validator("path")
    @classmethod
    def _check_path(cls, path: str) -> str:
        if not path.startswith("/"):
            raise ValueError("path must begin with '/'")
        return path

    @property
    def agent_key(self) -> str:
        return self.agent_token.strip().lower()


DenyReason = Literal["path", "purpose", "amount", "unassented"]


class AccessDecision(BaseModel):
    verdict: Literal["ALLOW", "DENY", "THROTTLE"]
    reason: Optional[DenyReason] = None
    retry_after: Optional[float] = None

    @model_validator(mode="after")
    def _check_payload(self):
        if self.verdict == "DENY" and self.reason is None:
            raise ValueError("DENY carries exactly one reason")
        if self.verdict != "DENY" and self.reason is not None:
            raise ValueError("only DENY carries a reason")
        if self.verdict == "THROTTLE" and not (self.retry_after and self.retry_after > 0):
            raise ValueError("THROTTLE carries retry_after > 0")
        if self.verdict != "THROTTLE" and self.retry_after is not None:
            raise ValueError("only THROTTLE carries retry_after")
        return self

    @classmethod
    def allow(cls) -> "AccessDecision":
        return cls(verdict="ALLOW")

    @classmethod
    def deny(cls, reason: DenyReason) -> "AccessDecision":
        return cls(verdict="DENY", reason=reason)

    @classmethod
    def throttle(cls, retry_after: float) -> "AccessDecision":
        return cls(verdict="THROTTLE", retry_after=retry_after)


EventClass = Literal["compliant", "breach", "unassented"]


class LedgerEvent(BaseModel):
    time: float
    agent: str
    path: str
    event_class: EventClass
    verdict: Literal["ALLOW", "DENY", "THROTTLE"]
    data_class: Optional[str] = None


class ClassCounts(BaseModel):
    compliant: int = 0
    breach: int = 0
    unassented: int = 0
    throttled: int = 0


class LedgerReport(BaseModel):
    totals: ClassCounts = Field(default_factory=ClassCounts)
    per_agent: Dict[str, ClassCounts] = Field(default_factory=dict)

# services/exclusion_service.py
"""Fair-use access evaluation against a parsed exclusion policy, plus the assent ledger."""
from models.protocol import (
    POLICY_PATH,
    AccessDecision,
    AccessRequest,
    ClassCounts,
    ExclusionPolicy,
    LedgerEvent,
    LedgerReport,
    PolicyRecord,
)
from typing import Dict, List, Optional, Tuple
import bisect
import logging
import threading

logger = logging.getLogger(__name__)

# Query-log key used when no record matched the agent
NO_RECORD = -1


class AssentLedger:
    """Who assented, when, and every access each agent made.

    Mutations go through evaluate_access, which holds `lock` for the whole
    check-and-record step so concurrent callers see one total order.
    """

    def __init__(self):
        self.lock = threading.Lock()
        self.assent_time: Dict[str, float] = {}
        self.query_log: Dict[Tuple[str, int], List[float]] = {}
        self.events: List[LedgerEvent] = []

    def has_assented(self, agent: str, time: Optional[float] = None) -> bool:
        """True once `agent` fetched /robots.txt, at or before `time` when given."""
        assented_at = self.assent_time.get(agent)
        return assented_at is not None and (time is None or assented_at <= time)

    def queries_for(self, agent: str, record_index: int) -> List[float]:
        return self.query_log.setdefault((agent, record_index), [])


def _match_index(policy: ExclusionPolicy, agent_token: str) -> int:
    token = agent_token.strip().lower()
    for index, record in enumerate(policy.records):
        if token in record.agents:
            return index
    for index, record in enumerate(policy.records):
        if record.is_wildcard:
            return index
    return NO_RECORD


def match_record(policy: ExclusionPolicy, agent_token: str) -> Optional[PolicyRecord]:
    """Record naming the agent, else the first wildcard record, else None (allow-all)."""
    index = _match_index(policy, agent_token)
    return policy.records[index] if index != NO_RECORD else None


def _check_record(record: Optional[PolicyRecord], request: AccessRequest,
                  log: List[float]) -> AccessDecision:
    if record is None:
        return AccessDecision.allow()
    if any(request.path.startswith(prefix) for prefix in record.disallow):
        return AccessDecision.deny("path")
    if record.purpose_allow is not None and \
            request.declared_purpose.strip().lower() not in record.purpose_allow:
        return AccessDecision.deny("purpose")
    if record.amount_limit is not None and request.catalog_fraction_fetched > record.amount_limit:
        return AccessDecision.deny("amount")
    if record.crawl_limit is not None:
        window = record.crawl_limit.window
        first_in_window = bisect.bisect_right(log, request.time - window)
        # keep the window test and retry_after on the same float expression
        while first_in_window < len(log) and log[first_in_window] + window - request.time <= 0:
            first_in_window += 1
        if len(log) - first_in_window >= record.crawl_limit.max_queries:
            return AccessDecision.throttle(log[first_in_window] + window - request.time)
    return AccessDecision.allow()


def evaluate_access(policy: ExclusionPolicy, request: AccessRequest,
                    ledger: AssentLedger) -> Tuple[AccessDecision, AssentLedger]:
    """
    Conjunctive fair-use check: assent, path, purpose, amount, then frequency.

    Returns the decision and the (updated) ledger. Fetching /robots.txt always
    succeeds and records assent; it is not itself logged as an access.
    """
    agent = request.agent_key
    with ledger.lock:
        if request.path == POLICY_PATH:
            ledger.assent_time.setdefault(agent, request.time)
            logger.debug(f"{agent} assented at {request.time}")
            return AccessDecision.allow(), ledger

        index = _match_index(policy, agent)
        record = policy.records[index] if index != NO_RECORD else None
        data_class = record.data_class_for(request.path) if record else None

        if not ledger.has_assented(agent, request.time):
            decision = AccessDecision.deny("unassented")
            event_class = "unassented"
        else:
            log = ledger.queries_for(agent, index)
            decision = _check_record(record, request, log)
            if decision.verdict == "ALLOW":
                bisect.insort(log, request.time)
                event_class = "compliant"
            else:
                event_class = "breach"

        ledger.events.append(LedgerEvent(
            time=request.time,
            agent=agent,
            path=request.path,
            event_class=event_class,
            verdict=decision.verdict,
            data_class=data_class,
        ))
    return decision, ledger


def ledger_report(ledger: AssentLedger) -> LedgerReport:
    """Event counts per class, overall and per agent (agents sorted)."""
    totals = ClassCounts()
    per_agent: Dict[str, ClassCounts] = {}
    with ledger.lock:
        events = list(ledger.events)
    for event in events:
        for counts in (totals, per_agent.setdefault(event.agent, ClassCounts())):
            setattr(counts, event.event_class, getattr(counts, event.event_class) + 1)
            if event.verdict == "THROTTLE":
                counts.throttled += 1
    return LedgerReport(totals=totals, per_agent=dict(sorted(per_agent.items())))


class CompliantCrawler:
    """A robot that honors the policy it fetched.

    It requests /robots.txt before anything else, never asks for a disallowed
    path, stays home when its purpose or amount is not permitted and keeps its
    own sliding window so it never runs into the crawl limit.
    """

    def __init__(self, agent_token: str, declared_purpose: str = "research",
                 catalog_fraction: float = 0.0, origin_address: str = "0.0.0.0",
                 proxy_address: Optional[str] = None):
        self.agent_token = agent_token
        self.declared_purpose = declared_purpose
        self.catalog_fraction = catalog_fraction
        self.origin_address = origin_address
        self.proxy_address = proxy_address
        self.policy_fetched = False
        self.record: Optional[PolicyRecord] = None
        self.sent: List[float] = []

    def _request(self, path: str, time: float) -> AccessRequest:
        return AccessRequest(
            agent_token=self.agent_token,
            origin_address=self.origin_address,
            proxy_address=self.proxy_address,
            path=path,
            declared_purpose=self.declared_purpose,
            time=time,
            catalog_fraction_fetched=self.catalog_fraction,
        )

    def permits(self, path: str) -> bool:
        record = self.record
        if record is None:
            return True
        if any(path.startswith(prefix) for prefix in record.disallow):
            return False
        if record.purpose_allow is not None and \
                self.declared_purpose.strip().lower() not in record.purpose_allow:
            return False
        if record.amount_limit is not None and self.catalog_fraction > record.amount_limit:
            return False
        return True

    def saturated(self, time: float) -> bool:
        if self.record is None or self.record.crawl_limit is None:
            return False
        limit = self.record.crawl_limit
        in_window = len(self.sent) - bisect.bisect_right(self.sent, time - limit.window)
        return in_window >= limit.max_queries

    def next_request(self, path: str, time: float) -> Optional[AccessRequest]:
        """The request the crawler would send now, or None when it holds back."""
        if not self.policy_fetched:
            return self._request(POLICY_PATH, time)
        if not self.permits(path) or self.saturated(time):
            return None
        return self._request(path, time)

    def submit(self, request: AccessRequest, policy: ExclusionPolicy,
               ledger: AssentLedger) -> AccessDecision:
        decision, _ = evaluate_access(policy, request, ledger)
        if request.path == POLICY_PATH:
            self.policy_fetched = True
            self.record = match_record(policy, self.agent_token)
        elif decision.verdict == "ALLOW":
            bisect.insort(self.sent, request.time)
        return decision

    def crawl(self, path: str, time: float, policy: ExclusionPolicy,
              ledger: AssentLedger) -> Optional[AccessDecision]:
        """Fetch the policy first if needed, then request `path` if permitted."""
        if not self.policy_fetched:
            self.submit(self._request(POLICY_PATH, time), policy, ledger)
        request = self.next_request(path, time)
        if request is None:
            return None
        return self.submit(request, policy, ledger)

# services/traffic_service.py
"""Site-side view of robot traffic: per-address blocking, load accounting, metasites."""
from collections import deque
from core.config import settings
from models.market import FixedStrategy, MyopicOptimalStrategy
from models.protocol import AccessRequest, ExclusionPolicy
from models.scenario import ScenarioConfig, SellerSpec
from models.traffic import (
    CrawlerAgent,
    LoadReport,
    MetasiteConfig,
    MetasiteResult,
    SiteQuery,
    TrafficConfig,
    TrafficEvent,
)
from pydantic import BaseModel
from services.exclusion_service import AssentLedger, CompliantCrawler, evaluate_access
from services.simulation_service import simulation_engine
from typing import Deque, Dict, List, Optional, Set, Tuple
import logging
import math
import threading

logger = logging.getLogger(__name__)


class TrafficLedger:
    """Events, per-address accepted-query ticks and the blocklist of one run.

    The blocklist only grows; blocking is never lifted within a run.
    """

    def __init__(self):
        self.lock = threading.Lock()
        self.events: List[TrafficEvent] = []
        self.recent: Dict[str, Deque[int]] = {}
        self.blocklist: Set[str] = set()


def observe_query(ledger: TrafficLedger, query: SiteQuery, threshold: int,
                  window: int) -> Tuple[TrafficLedger, bool]:
    """Accept or refuse one query; block its address on the (threshold+1)-th query in a window."""
    if threshold < 1 or window < 1:
        raise ValueError("observe_query needs threshold >= 1 and window >= 1")

    address = query.observed_address
    with ledger.lock:
        blocked = address in ledger.blocklist
        if not blocked:
            recent = ledger.recent.setdefault(address, deque())
            while recent and recent[0] <= query.tick - window:
                recent.popleft()
            if len(recent) + 1 > threshold:
                ledger.blocklist.add(address)
                blocked = True
                logger.info(f"🚫 Blocked {address} at tick {query.tick} ({len(recent) + 1} queries in {window} ticks)")
            else:
                recent.append(query.tick)

        ledger.events.append(TrafficEvent(
            tick=query.tick,
            address=address,
            agent=query.agent_id,
            path=query.path,
            outcome="refused" if blocked else "accepted",
            is_robot=query.is_robot,
        ))
    return ledger, blocked


def load_fraction(ledger: TrafficLedger, window: int,
                  capacity_threshold: Optional[float] = None,
                  end_tick: Optional[int] = None) -> LoadReport:
    """Robot share of all queries in the ticks (end_tick - window, end_tick].

    `end_tick` defaults to the tick of the latest event.
    """
    if window < 1:
        raise ValueError("load_fraction needs window >= 1")
    threshold = settings.CAPACITY_THRESHOLD if capacity_threshold is None else capacity_threshold

    with ledger.lock:
        events = list(ledger.events)
    if end_tick is None:
        if not events:
            return LoadReport()
        end_tick = events[-1].tick
    in_window = [e for e in events if end_tick - window < e.tick <= end_tick]
    if not in_window:
        return LoadReport()
    robot = sum(1 for e in in_window if e.is_robot)
    total = len(in_window)
    fraction = robot / total
    return LoadReport(
        robot_queries=robot,
        total_queries=total,
        robot_fraction=fraction,
        harm_flag=fraction > threshold,
    )


def aggregate_load(per_robot_fraction: float, robot_count: int,
                   capacity_threshold: Optional[float] = None) -> LoadReport:
    """Load of k robots each taking fraction f, capped at the whole site."""
    if not 0.0 <= per_robot_fraction <= 1.0 or robot_count < 0:
        raise ValueError("aggregate_load needs f in [0, 1] and k >= 0")
    threshold = settings.CAPACITY_THRESHOLD if capacity_threshold is None else capacity_threshold
    combined = min(robot_count * per_robot_fraction, 1.0)
    return LoadReport(
        robot_fraction=combined,
        harm_flag=combined > threshold,
        source="aggregate",
        robot_count=robot_count,
    )


def _default_metasite_market(num_sellers: int) -> ScenarioConfig:
    return ScenarioConfig(
        type1_fraction=0.75,
        sellers=[SellerSpec(strategy=MyopicOptimalStrategy()) for _ in range(num_sellers)],
    )


def metasite_scenario(config: MetasiteConfig, scenario: Optional[ScenarioConfig] = None,
                      seed: Optional[int] = None) -> MetasiteResult:
    """
    Query load of a price-comparison metasite over `config.ticks` ticks.

    The metasite queries every seller on each refresh (ticks t with t % r == 0).
    With vendor robots on, every seller re-price is preceded by one query to
    the metasite, and sellers only ever see the snapshot from the last refresh.
    """
    if scenario is None:
        scenario = _default_metasite_market(config.num_sellers or 1)
    num_sellers = config.num_sellers or len(scenario.sellers)
    if num_sellers != len(scenario.sellers):
        raise ValueError("metasite num_sellers must match the scenario's sellers")
    period = config.refresh_period
    seed = scenario.seed if seed is None else seed

    metasite_queries, vendor_queries = [], []
    state = simulation_engine.build_state(scenario, seed) if config.vendor_robot else None
    snapshot = state.prices if state is not None else None

    for tick in range(config.ticks):
        refreshes = period is not None and tick % period == 0
        metasite_queries.append(num_sellers if refreshes else 0)
        if state is None:
            vendor_queries.append(0)
            continue
        if refreshes:
            snapshot = state.prices
        market = simulation_engine.market_at(scenario, tick, config.ticks)
        record = simulation_engine.advance(state, market, observed_prices=snapshot)
        updater = state.sellers[record.updated_seller]
        vendor_queries.append(0 if isinstance(updater.strategy, FixedStrategy) else 1)

    total_metasite, total_vendor = sum(metasite_queries), sum(vendor_queries)
    logger.info(f"🛒 Metasite: {total_metasite} refresh queries, {total_vendor} vendor-robot queries")
    return MetasiteResult(
        metasite_queries=metasite_queries,
        vendor_queries=vendor_queries,
        total_metasite=total_metasite,
        total_vendor=total_vendor,
        total=total_metasite + total_vendor,
    )


class TrafficRun(BaseModel):
    events: List[TrafficEvent]
    windows: List[LoadReport]
    overall: LoadReport
    aggregate: List[LoadReport]
    metasite: Optional[MetasiteResult] = None
    blocklist: List[str]


def queries_at(rate: float, tick: int) -> int:
    """Queries issued in `tick` at a fractional per-tick rate, accumulated exactly."""
    return math.floor(round((tick + 1) * rate, 9)) - math.floor(round(tick * rate, 9))


def run_traffic(config: TrafficConfig, policy: Optional[ExclusionPolicy] = None,
                assent_ledger: Optional[AssentLedger] = None,
                market: Optional[ScenarioConfig] = None) -> Tuple[TrafficRun, TrafficLedger, AssentLedger]:
    """
    Drive robot agents and human background traffic through the site defenses.

    Per tick the agents query in config order, then humans spread round-robin
    over `human_addresses`. Every query passes the address blocker; accepted
    robot queries are then evaluated against the exclusion policy.
    """
    policy = policy if policy is not None else ExclusionPolicy()
    assent_ledger = assent_ledger if assent_ledger is not None else AssentLedger()
    ledger = TrafficLedger()
    crawlers: Dict[str, CompliantCrawler] = {
        agent.id: CompliantCrawler(
            agent.agent_token, agent.declared_purpose, agent.catalog_fraction,
            agent.origin_address, agent.proxy_address,
        )
        for agent in config.agents if agent.compliant
    }
    logger.info(f"🚀 Traffic run: {len(config.agents)} robots, {config.ticks} ticks")

    human_cursor = 0
    windows: List[LoadReport] = []
    for tick in range(config.ticks):
        time = tick * config.seconds_per_tick
        for agent in config.agents:
            for n in range(queries_at(agent.rate, tick)):
                path = agent.paths[n % len(agent.paths)]
                _robot_query(agent, crawlers.get(agent.id), path, tick, time, config,
                             policy, ledger, assent_ledger)

        for _ in range(queries_at(config.human_rate, tick)):
            address = f"human-{human_cursor % config.human_addresses}"
            human_cursor += 1
            observe_query(ledger, SiteQuery(
                tick=tick, agent_id="human", origin_address=address, is_robot=False,
            ), config.block_threshold, config.block_window)

        if (tick + 1) % config.load_window == 0:
            windows.append(load_fraction(ledger, config.load_window, config.capacity_threshold,
                                         end_tick=tick))

    overall = load_fraction(ledger, max(config.ticks, 1), config.capacity_threshold,
                            end_tick=config.ticks - 1)
    robot_agents = len(config.agents)
    per_robot = overall.robot_fraction / robot_agents if robot_agents else 0.0
    aggregate = [aggregate_load(per_robot, k, config.capacity_threshold)
                 for k in config.aggregate_robot_counts]
    metasite = metasite_scenario(config.metasite, market) if config.metasite is not None else None

    result = TrafficRun(
        events=ledger.events,
        windows=windows,
        overall=overall,
        aggregate=aggregate,
        metasite=metasite,
        blocklist=sorted(ledger.blocklist),
    )
    logger.info(f"✅ Traffic run complete: robot fraction {overall.robot_fraction:.4f}, "
                f"{len(result.blocklist)} blocked addresses")
    return result, ledger, assent_ledger


def _robot_query(agent: CrawlerAgent, crawler: Optional[CompliantCrawler], path: str,
                 tick: int, time: float, config: TrafficConfig, policy: ExclusionPolicy,
                 ledger: TrafficLedger, assent_ledger: AssentLedger):
    if crawler is not None:
        request = crawler.next_request(path, time)
        if request is None:
            return
    else:
        request = None

    query = SiteQuery(
        tick=tick,
        agent_id=agent.id,
        origin_address=agent.origin_address,
        proxy_address=agent.proxy_address,
        path=request.path if request is not None else path,
    )
    _, blocked = observe_query(ledger, query, config.block_threshold, config.block_window)
    if blocked:
        return

    if crawler is not None:
        crawler.submit(request, policy, assent_ledger)
    else:
        evaluate_access(policy, AccessRequest(
            agent_token=agent.agent_token,
            origin_address=agent.origin_address,
            proxy_address=agent.proxy_address,
            path=path,
            declared_purpose=agent.declared_purpose,
            time=time,
            catalog_fraction_fetched=agent.catalog_fraction,
        ), assent_ledger)

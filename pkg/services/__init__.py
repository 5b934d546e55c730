from .simulation_service import simulation_engine
from .exclusion_service import evaluate_access, ledger_report, match_record
from .traffic_service import aggregate_load, load_fraction, metasite_scenario, observe_query, run_traffic

__all__ = [
    "simulation_engine",
    "evaluate_access",
    "ledger_report",
    "match_record",
    "aggregate_load",
    "load_fraction",
    "metasite_scenario",
    "observe_query",
    "run_traffic",
]

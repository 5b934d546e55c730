# db/artifact_store.py
from core.config import settings
from models.market import TickRecord
from models.traffic import TrafficEvent
from pathlib import Path
from typing import Any, Dict, Iterable, List
import json
import logging

import pandas as pd

logger = logging.getLogger(__name__)

PRICES_COLUMNS = ["tick", "seller_id", "price", "profit"]
EVENTS_COLUMNS = ["tick", "address", "agent", "path", "outcome"]


class ArtifactStore:
    """Writes run outputs as CSV and JSON files; nothing carries a wall-clock time."""

    def __init__(self):
        pass

    def prepare(self, out_dir) -> Path:
        path = Path(out_dir)
        path.mkdir(parents=True, exist_ok=True)
        return path

    def _write_csv(self, frame: pd.DataFrame, path: Path):
        frame.to_csv(
            path,
            index=False,
            float_format=settings.CSV_FLOAT_FORMAT,
            lineterminator="\n",
        )
        logger.info(f"💾 Wrote {len(frame)} rows to {path}")

    def write_prices(self, out_dir, series: Iterable[TickRecord]) -> Path:
        """prices.csv: one row per seller per tick."""
        rows: List[Dict[str, Any]] = []
        for record in series:
            for seller_id, (price, profit) in enumerate(zip(record.prices, record.profits)):
                rows.append({"tick": record.tick, "seller_id": seller_id, "price": price, "profit": profit})
        path = self.prepare(out_dir) / "prices.csv"
        self._write_csv(pd.DataFrame(rows, columns=PRICES_COLUMNS), path)
        return path

    def write_events(self, out_dir, events: Iterable[TrafficEvent]) -> Path:
        rows = [event.model_dump(include=set(EVENTS_COLUMNS)) for event in events]
        path = self.prepare(out_dir) / "events.csv"
        self._write_csv(pd.DataFrame(rows, columns=EVENTS_COLUMNS), path)
        return path

    def write_json(self, out_dir, name: str, payload: Dict[str, Any]) -> Path:
        path = self.prepare(out_dir) / name
        path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        logger.info(f"💾 Wrote {path}")
        return path


# Global artifact store instance
artifact_store = ArtifactStore()

# utils/robots_parser.py
import re
import logging
from typing import List, Optional, Tuple

import numpy as np

from core.exceptions import PolicyParseError
from models.protocol import CrawlLimit, ExclusionPolicy, PolicyRecord

logger = logging.getLogger(__name__)

CRAWL_LIMIT_RE = re.compile(r"^(\d{1,12})/(\d{1,12})$", re.ASCII)
AMOUNT_RE = re.compile(r"^(\d+(\.\d*)?|\.\d+)$", re.ASCII)


class _RecordBuilder:
    """Accumulates the directives of one record while parsing."""

    def __init__(self):
        self.agents: List[str] = []
        self.disallow: List[str] = []
        self.crawl_limit: Optional[CrawlLimit] = None
        self.purpose_allow: Optional[Tuple[str, ...]] = None
        self.amount_limit: Optional[float] = None
        self.terms_uri: Optional[str] = None
        self.data_classes: List[Tuple[str, str]] = []
        self.has_rules = False

    def build(self) -> PolicyRecord:
        return PolicyRecord(
            agents=tuple(self.agents),
            disallow=tuple(self.disallow),
            crawl_limit=self.crawl_limit,
            purpose_allow=self.purpose_allow,
            amount_limit=self.amount_limit,
            terms_uri=self.terms_uri,
            data_classes=tuple(self.data_classes),
        )


def _parse_crawl_limit(value: str, line_no: int) -> CrawlLimit:
    match = CRAWL_LIMIT_RE.match(value)
    if not match:
        raise PolicyParseError(f"invalid Crawl-limit '{value}', expected N/seconds", line_no)
    max_queries, window = int(match.group(1)), int(match.group(2))
    if max_queries < 1 or window < 1:
        raise PolicyParseError("Crawl-limit needs N >= 1 and window >= 1", line_no)
    return CrawlLimit(max_queries=max_queries, window=window)


def _parse_amount(value: str, line_no: int) -> float:
    if not AMOUNT_RE.match(value):
        raise PolicyParseError(f"invalid Amount-limit '{value}', expected a decimal", line_no)
    amount = float(value)
    if not 0 < amount <= 1:
        raise PolicyParseError("Amount-limit must lie in (0, 1]", line_no)
    return amount


def _parse_purposes(value: str) -> Tuple[str, ...]:
    tokens = {token.strip().lower() for token in value.split(",")}
    return tuple(sorted(token for token in tokens if token))


def parse_policy(data: bytes) -> ExclusionPolicy:
    """
    Parse a robot exclusion file with the fair-use extension directives.

    Grammar: one `Field: value` per line, `#` comments, records separated by
    blank lines, field names case-insensitive, LF or CRLF endings.

    Extension directives:
      Crawl-limit: N/seconds
      Purpose-allow: research,nonprofit
      Amount-limit: 0.25
      Terms: <opaque text>
      Data-class: <path-prefix> <label>

    Unknown directives become warnings; malformed lines raise PolicyParseError.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        line_no = data[:e.start].count(b"\n") + 1
        raise PolicyParseError("invalid UTF-8", line_no) from e

    records: List[PolicyRecord] = []
    warnings: List[str] = []
    current: Optional[_RecordBuilder] = None

    def close_record():
        nonlocal current
        if current is not None:
            if current.agents:
                records.append(current.build())
            else:
                warnings.append("record with an empty User-agent dropped")
        current = None

    for line_no, raw in enumerate(text.split("\n"), start=1):
        raw = raw.rstrip("\r")
        if not raw.strip():
            close_record()
            continue

        line = raw.split("#", 1)[0].strip()
        if not line:
            continue

        if ":" not in line:
            raise PolicyParseError(f"missing ':' separator in '{line}'", line_no)
        field, value = line.split(":", 1)
        field = field.strip().lower()
        value = value.strip()

        if field == "user-agent":
            if current is None or current.has_rules:
                close_record()
                current = _RecordBuilder()
            agent = value.lower()
            if agent and agent not in current.agents:
                current.agents.append(agent)
            continue

        if current is None:
            warnings.append(f"line {line_no}: '{field}' outside any User-agent record ignored")
            continue
        current.has_rules = True

        if field == "disallow":
            if value:
                current.disallow.append(value)
        elif field == "crawl-limit":
            current.crawl_limit = _parse_crawl_limit(value, line_no)
        elif field == "purpose-allow":
            current.purpose_allow = _parse_purposes(value)
        elif field == "amount-limit":
            current.amount_limit = _parse_amount(value, line_no)
        elif field == "terms":
            current.terms_uri = value
        elif field == "data-class":
            parts = value.split()
            if len(parts) != 2 or not parts[0].startswith("/"):
                raise PolicyParseError(f"invalid Data-class '{value}', expected '<prefix> <label>'", line_no)
            current.data_classes.append((parts[0], parts[1]))
        else:
            warnings.append(f"line {line_no}: unknown directive '{field}' ignored")

    close_record()

    if sum(1 for record in records if record.is_wildcard) > 1:
        warnings.append("more than one wildcard record; only the first applies")

    for warning in warnings:
        logger.warning(f"⚠️ robots.txt {warning}")
    return ExclusionPolicy(records=records, warnings=warnings)


def serialize_policy(policy: ExclusionPolicy) -> bytes:
    """Canonical text: fixed field order, LF endings, one blank line between records."""
    blocks = []
    for record in policy.records:
        lines = [f"User-agent: {agent}" for agent in record.agents]
        if record.disallow:
            lines.extend(f"Disallow: {prefix}" for prefix in record.disallow)
        else:
            lines.append("Disallow:")
        if record.crawl_limit is not None:
            lines.append(f"Crawl-limit: {record.crawl_limit.max_queries}/{record.crawl_limit.window}")
        if record.purpose_allow is not None:
            lines.append(f"Purpose-allow: {','.join(record.purpose_allow)}")
        if record.amount_limit is not None:
            lines.append(f"Amount-limit: {np.format_float_positional(record.amount_limit, trim='-')}")
        if record.terms_uri is not None:
            lines.append(f"Terms: {record.terms_uri}")
        lines.extend(f"Data-class: {prefix} {label}" for prefix, label in record.data_classes)
        blocks.append("\n".join(lines) + "\n")
    return "\n".join(blocks).encode("utf-8")

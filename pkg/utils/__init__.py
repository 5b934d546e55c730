from .robots_parser import parse_policy, serialize_policy

__all__ = [
    "parse_policy",
    "serialize_policy",
]

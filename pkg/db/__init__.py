from .artifact_store import artifact_store

__all__ = ["artifact_store"]

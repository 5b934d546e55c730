from .simulate import simulate
from .robots import robots
from .traffic import traffic

__all__ = ["simulate", "robots", "traffic"]

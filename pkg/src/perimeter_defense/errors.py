class PerimeterDefenseError(Exception):
    """Base class for all errors raised by this package."""


class CollocatedError(PerimeterDefenseError, ValueError):
    """Agents share a position, so the dominance region is undefined."""


class SpeedRatioError(PerimeterDefenseError, ValueError):
    pass


class EmptyRegionError(PerimeterDefenseError, ValueError):
    pass


class NoFeasibleEngagementError(PerimeterDefenseError):
    """No head-on engagement keeps the intruder's dominance region off the target."""


class NoBoundaryError(PerimeterDefenseError):
    pass


class ChainIndexError(PerimeterDefenseError, ValueError):
    pass


class DegenerateChainError(PerimeterDefenseError, ValueError):
    pass


class ConfigParseError(PerimeterDefenseError, ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.key = key

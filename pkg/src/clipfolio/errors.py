"""Exception hierarchy shared by all modules."""


class ClipfolioError(Exception):
    """Base class for every error raised by this package."""


# data
class ParseError(ClipfolioError, ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class MisalignedDates(ClipfolioError, ValueError):
    def __init__(self, asset: str, date: str):
        self.asset, self.date = asset, date
        super().__init__(f"asset {asset!r} has no close on {date}")


class NonPositivePrice(ClipfolioError, ValueError):
    def __init__(self, asset: str, date: str):
        self.asset, self.date = asset, date
        super().__init__(f"asset {asset!r} has a non-positive or non-finite close on {date}")


class UnknownAssetClass(ClipfolioError, ValueError):
    def __init__(self, asset: str):
        self.asset = asset
        super().__init__(f"asset {asset!r} has no valid asset class")


class InvalidSpec(ClipfolioError, ValueError):
    pass


class PanelTooShort(ClipfolioError, ValueError):
    pass


class InvalidRange(ClipfolioError, ValueError):
    pass


# nn
class DimensionMismatch(ClipfolioError, ValueError):
    pass


class TapeMismatch(ClipfolioError, ValueError):
    pass


class ShapeMismatch(ClipfolioError, ValueError):
    pass


class CheckpointMismatch(ClipfolioError, ValueError):
    pass


# env
class NotOnSimplex(ClipfolioError, ValueError):
    pass


class RangeOutOfBounds(ClipfolioError, IndexError):
    pass


class DegenerateConcentration(ClipfolioError, ValueError):
    pass


class EpisodeTooShort(ClipfolioError, ValueError):
    pass


# algo
class DataTooShort(ClipfolioError, ValueError):
    pass


# metrics
class EmptySeries(ClipfolioError, ValueError):
    pass


class DegenerateSeries(ClipfolioError, ValueError):
    pass


class NoDownside(ClipfolioError, ValueError):
    pass


class TooFewRebalances(ClipfolioError, ValueError):
    pass


# baselines
class EmptyUniverse(ClipfolioError, ValueError):
    pass


class MissingClass(ClipfolioError, ValueError):
    pass


# backtest
class PortfolioWipedOut(ClipfolioError, ArithmeticError):
    pass


class ScheduleOutOfRange(ClipfolioError, ValueError):
    pass


class StrategyFailure(ClipfolioError, RuntimeError):
    pass


class MismatchedRanges(ClipfolioError, ValueError):
    pass


class UntaggedAsset(ClipfolioError, KeyError):
    pass


class UnknownAsset(ClipfolioError, KeyError):
    pass


# cli
class ConfigError(ClipfolioError, ValueError):
    pass


class MissingCheckpoint(ClipfolioError, FileNotFoundError):
    pass

"""Exception hierarchy shared across the toolkit.

Everything raised deliberately derives from ToolError; the CLI maps these
to exit code 2 (data error) and anything else to exit code 3.
"""


class ToolError(Exception):
    """Base class for all expected failures."""


# graph loading / construction
class ParseError(ToolError):
    pass


class DuplicateEdge(ToolError):
    pass


class SelfLoop(ToolError):
    pass


class NonPositiveWeight(ToolError):
    pass


class NotSymmetric(ToolError):
    pass


class NotSquare(ToolError):
    pass


# filtration
class EmptyGraph(ToolError):
    pass


# persistence
class InvalidComplex(ToolError):
    pass


# entropy
class EmptyBarcode(ToolError):
    pass


# automaton extraction
class SeriesTooShort(ToolError):
    pass


class InitialNotSteady(ToolError):
    pass


class NoPlateaus(ToolError):
    pass


# Chu spaces
class NoGenerators(ToolError):
    pass


class LabelClash(ToolError):
    pass


class ChuTooLarge(ToolError):
    pass


# simulator
class WidthMismatch(ToolError):
    pass


class DimensionMismatch(ToolError):
    pass


class ZeroTotalVolume(ToolError):
    pass


class ConfigError(ToolError):
    pass

"""
CoreMotif — Exception hierarchy. Each family carries the CLI exit status it maps to.
"""


class CoreMotifError(Exception):
    exit_code = 2


# ── Usage (exit 1) ──
class UsageError(CoreMotifError):
    exit_code = 1


class ConfigError(UsageError):
    """Bad flag values, unsupported motif tags, conflicting options."""


# ── Data (exit 2) ──
class DataError(CoreMotifError):
    exit_code = 2


class ParseError(DataError):
    def __init__(self, line_no, message):
        # type: (int, str) -> None
        self.line_no = line_no
        super().__init__("line {}: {}".format(line_no, message))


class EmptyGraphError(DataError):
    pass


class EmptySubgraphError(DataError):
    pass


class NodeIndexError(DataError, IndexError):
    pass


class OracleLimitError(DataError):
    pass


class NoEmbeddableNodesError(DataError):
    pass


class DegenerateClusteringError(DataError):
    pass


class RecoveryError(DataError):
    pass


class DegenerateDistributionError(DataError):
    pass


class ModularityError(DataError):
    pass


class CoverageError(DataError):
    def __init__(self, missing_id, message=None):
        self.missing_id = missing_id
        super().__init__(message or "labels missing for node {}".format(missing_id))


# ── Numerics (exit 3) ──
class ConvergenceError(CoreMotifError):
    exit_code = 3

    def __init__(self, residual, message=None):
        # type: (float, str) -> None
        self.residual = residual
        super().__init__(message or "eigensolver did not converge (residual {:.3e})".format(residual))

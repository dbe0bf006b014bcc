from typing import Optional


class PedcrossError(Exception):
    """Root of every error raised by the package"""


class ShapeError(PedcrossError, ValueError):
    """Operand shapes are incompatible for a tensor or layer operation"""


class ConfigError(PedcrossError, ValueError):
    """A configuration record failed validation"""

    def __init__(self, violations: list[str], source: str = "config") -> None:
        self.violations = list(violations)
        super().__init__(f"{source}: " + "; ".join(self.violations))


class GradCheckError(PedcrossError, ArithmeticError):
    """Gradient check hit non-finite values"""


class TrackFormatError(PedcrossError, ValueError):
    """A track record on disk is malformed or violates its invariants"""

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None) -> None:
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field '{field}'")
        prefix = f"tracks ({', '.join(where)})" if where else "tracks"
        super().__init__(f"{prefix}: {message}")


class CheckpointError(PedcrossError, ValueError):
    """Checkpoint file is corrupt, truncated or incompatible"""


class DivergenceError(PedcrossError, ArithmeticError):
    """Training produced a non-finite loss or gradient"""

    def __init__(self, message: str, epoch: int, step: int) -> None:
        self.epoch = epoch
        self.step = step
        super().__init__(f"training diverged at epoch {epoch}, step {step}: {message}")


class MetricsError(PedcrossError, ValueError):
    """A metric is undefined for the given scores"""


class StreamMissingError(PedcrossError, KeyError):
    """An enabled input stream has no data in the batch"""

    def __init__(self, stream: str) -> None:
        self.stream = stream
        super().__init__(f"model: batch is missing data for enabled stream '{stream}'")

    def __str__(self) -> str:
        return self.args[0]


class FeatureError(PedcrossError, ValueError):
    """Input features cannot be encoded or standardized"""


class NonFiniteGradientError(PedcrossError, ArithmeticError):
    """An optimizer received a NaN or infinite gradient"""

    def __init__(self, parameter: str) -> None:
        self.parameter = parameter
        super().__init__(f"optimizer: non-finite gradient for '{parameter}', update skipped")

# snncodec/errors.py


class SnnCodecError(Exception):
    """Root of every error raised by the package."""


class DimensionError(SnnCodecError, ValueError):
    """Tensor shapes do not fit the operation."""


class ContractError(SnnCodecError, ValueError):
    """A precondition of an operation was violated."""


class NumericError(SnnCodecError, ArithmeticError):
    """Non-finite values where finite ones are required."""


class FormatError(SnnCodecError, ValueError):
    """A dataset or checkpoint file does not match its binary layout."""


class ConfigError(SnnCodecError, ValueError):
    """An invalid model or run configuration."""


class TrainingError(SnnCodecError, RuntimeError):
    def __init__(self, message, epoch=None, batch=None):
        self.epoch = epoch
        self.batch = batch
        where = f" (epoch {epoch}, batch {batch})" if epoch is not None else ""
        super().__init__(f"{message}{where}")

"""Exception hierarchy shared by the simulator modules."""


class SpinAdcError(Exception):
    """Base class for all simulator errors."""


class InvalidConfig(SpinAdcError, ValueError):
    pass


class AboveCurie(SpinAdcError, ValueError):
    """Bias heating pushed the effective temperature to or past T_C."""


class InstabilityDetected(SpinAdcError, RuntimeError):
    """|m| left the unit sphere by more than the allowed drift before renormalization."""


class ResetFailed(SpinAdcError, RuntimeError):
    pass


class InfeasibleWidth(SpinAdcError, ValueError):
    pass


class TransferError(SpinAdcError):
    """Raised when a ramp does not produce a usable transfer curve."""


class NonMonotonicTransfer(TransferError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"output code decreased after code {index}")


class ConfigError(SpinAdcError):
    """Problem in a user supplied configuration file or flag."""

"""Exception hierarchy shared by the simulator modules."""


class SimulationError(Exception):
    """A fault that aborts a simulation run."""


class AddressFault(SimulationError):
    """An address falls outside every mapped range (or outside a device)."""


class EventBudgetExceeded(SimulationError):
    """The engine dispatched more events than its configured budget."""


class ProtocolError(SimulationError):
    """A CXL.mem conversion was asked to do something the protocol forbids."""


class UnsupportedCommand(SimulationError):
    """A request kind the Home Agent does not convert; dropped with a warning."""


class MshrError(SimulationError):
    """Misuse of the miss status holding registers (duplicate id, bad completion)."""


class ConfigError(ValueError):
    """Invalid run configuration. ``key`` names the offending field."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class TraceParseError(ValueError):
    def __init__(self, lineno, reason):
        super().__init__(f"line {lineno}: {reason}")
        self.lineno = lineno
        self.reason = reason

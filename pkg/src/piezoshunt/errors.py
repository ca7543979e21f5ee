"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument violates a documented precondition."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to converge or produced invalid results."""


class NetlistError(ParameterError):
    """Netlist text violates the dialect or a structural invariant."""

    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ConfigError(ParameterError):
    """Scenario configuration is malformed or inconsistent."""

    def __init__(self, message, section=None, line_no=None):
        loc = ""
        if section is not None:
            loc += f"[{section}] "
        if line_no is not None:
            loc += f"line {line_no}: "
        super().__init__(loc + message)
        self.section = section
        self.line_no = line_no

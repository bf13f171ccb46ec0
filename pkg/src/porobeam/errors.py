"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line front end, so a
failing invocation can be diagnosed from its status alone.
"""


class PorobeamError(Exception):
    exit_code = 1


class UsageError(PorobeamError, ValueError):
    exit_code = 2


class ParameterError(PorobeamError, ValueError):
    """One or more physical parameters violate the standing assumptions."""

    exit_code = 7

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(str(p) for p in self.problems))


class NonPositiveParameter(ParameterError):
    exit_code = 7

    def __init__(self, name, value=None):
        self.name = name
        self.value = value
        Exception.__init__(self, f"parameter {name!r} must be > 0 (got {value!r})")
        self.problems = [self]


class EllipticityViolated(ParameterError):
    exit_code = 8

    def __init__(self, value):
        self.value = value
        Exception.__init__(self, f"mu*xi - b**2 must be > 0 (got {value!r})")
        self.problems = [self]


class TooFewElements(PorobeamError, ValueError):
    exit_code = 9

    def __init__(self, s):
        self.s = s
        super().__init__(f"need at least 2 elements for an interior node (got s={s})")


class DimensionMismatch(PorobeamError, ValueError):
    exit_code = 13


class NonFiniteSample(PorobeamError, ValueError):
    exit_code = 14

    def __init__(self, index, value=None):
        self.index = index
        super().__init__(f"profile is not finite at interior node {index} (value {value!r})")


class SingularSystem(PorobeamError, ArithmeticError):
    exit_code = 10


class ResidualTooLarge(PorobeamError, ArithmeticError):
    exit_code = 11

    def __init__(self, residual, tol):
        self.residual = residual
        self.tol = tol
        super().__init__(f"relative residual {residual:.3e} exceeds {tol:.1e}")


class InsufficientHistory(PorobeamError, ValueError):
    exit_code = 15

    def __init__(self, n):
        self.n = n
        super().__init__(f"state at level n={n} lacks the history needed (n >= 2 required)")


class NonPositiveEnergy(PorobeamError, ValueError):
    exit_code = 12

    def __init__(self, n, value=None):
        self.n = n
        super().__init__(f"energy sample {n} is not positive ({value!r}); cannot take log")


class WindowTooSmall(PorobeamError, ValueError):
    exit_code = 16

    def __init__(self, size):
        self.size = size
        super().__init__(f"fit window holds {size} samples; at least 3 are needed")


class StepNotRecorded(PorobeamError, LookupError):
    exit_code = 17

    def __init__(self, t):
        self.t = t
        super().__init__(f"no recorded step at t={t!r}")


class ConfigError(PorobeamError, ValueError):
    exit_code = 4


class ParseError(ConfigError):
    exit_code = 4

    def __init__(self, line, text=""):
        self.line = line
        super().__init__(f"cannot parse config line {line}: {text!r}")


class UnknownKey(ConfigError):
    exit_code = 5

    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown config key {name!r}")


class MissingKey(ConfigError):
    exit_code = 6

    def __init__(self, name):
        self.name = name
        super().__init__(f"missing config key {name!r}")

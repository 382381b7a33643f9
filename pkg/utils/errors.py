"""
Error types - every failure the library can report, with the CLI exit code it maps to.

Exit codes: 2 config/validation, 3 capability (dense cap, subset count), 4 numerical.
"""
from typing import List, Optional


class QDarwinError(ValueError):
    exit_code = 4


# ===== config / validation (exit 2) =====

class ConfigError(QDarwinError):
    exit_code = 2


class ConfigFileError(ConfigError):
    pass


class ScenarioValidationError(ConfigError):
    """Aggregates every violated invariant as 'field.path: message' lines."""

    def __init__(self, problems: List[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class BadDistribution(ConfigError):
    pass


class BadDelta(ConfigError):
    pass


class BadProbability(ConfigError):
    pass


class BadExponent(ConfigError):
    pass


class BadHaziness(ConfigError):
    pass


class TrivialSystem(ConfigError):
    pass


class FieldPresent(ConfigError):
    pass


class EmptyEnvironment(ConfigError):
    pass


# ===== capability (exit 3) =====

class CapabilityError(QDarwinError):
    exit_code = 3


class TooLarge(CapabilityError):
    pass


class TooManySubsets(CapabilityError):
    pass


class MixedEnvironment(CapabilityError):
    pass


class MixedSystem(CapabilityError):
    pass


# ===== numerical (exit 4) =====

class NotAState(QDarwinError):
    pass


class NotHermitian(NotAState):
    pass


class NotPSD(NotAState):
    pass


class DimMismatch(QDarwinError):
    pass


class ZeroInformation(QDarwinError):
    pass


class NumericalError(QDarwinError):
    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)

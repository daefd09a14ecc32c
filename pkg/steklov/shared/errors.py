from typing import Optional

# Exit codes
EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class SteklovError(Exception):
    """Base error; `detail` is shown to the user, `exit_code` is what the CLI returns."""

    exit_code = EXIT_USAGE

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class ArgumentError(SteklovError):
    pass


class UsageError(SteklovError):
    pass


class DomainError(SteklovError):
    pass


class MeshLoadError(SteklovError):
    def __init__(self, detail: str, line: Optional[int] = None):
        if line is not None:
            detail = f"line {line}: {detail}"
        super().__init__(detail)
        self.line = line


class CapabilityError(SteklovError):
    pass


class ResolutionError(SteklovError):
    pass


class AssemblyError(SteklovError):
    exit_code = EXIT_NUMERICAL


class InversionError(SteklovError):
    exit_code = EXIT_NUMERICAL

    def __init__(self, detail: str, sigma_min: float = 0.0, label: Optional[str] = None):
        if label:
            detail = f"{label}: {detail}"
        super().__init__(f"{detail} (sigma_min={sigma_min:.3e})")
        self.sigma_min = sigma_min
        self.label = label


class BracketError(SteklovError):
    exit_code = EXIT_TOLERANCE

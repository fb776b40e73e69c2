from typing import Any, Dict, Optional


class LabError(Exception):
    # base for everything the lab raises on purpose
    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics: Dict[str, Any] = dict(diagnostics or {})


class ValidationError(LabError, ValueError):
    # bad input: preconditions, schema, domain
    pass


class NumericalError(LabError, RuntimeError):
    # solver did not converge, non-finite values, integrator gave up
    pass


class EscapeError(NumericalError):
    """orbit left the validated domain

    keeps the partial orbit so callers can still report it
    """

    def __init__(self, message: str, escape_index: int, partial: Any = None,
                 diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message, diagnostics)
        self.escape_index = escape_index
        self.partial = partial
        self.diagnostics.setdefault("escape_index", escape_index)

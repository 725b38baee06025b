"""Error hierarchy shared by every solver and the command-line front end."""

from __future__ import annotations

from typing import Any


class CapacityError(Exception):
    """Base class for all capwater failures.

    ``code`` is a stable machine-readable tag and ``exit_code`` the process status the CLI
    reports for it.
    """

    code = "capacity_error"
    exit_code = 1

    def __init__(self, message: str, **diagnostics: Any) -> None:
        super().__init__(message)
        self.diagnostics: dict[str, Any] = dict(diagnostics)

    def as_dict(self) -> dict[str, Any]:
        """Return a JSON-serializable description used for diagnostics output."""
        payload: dict[str, Any] = {"code": self.code, "message": str(self)}
        if self.diagnostics:
            payload["diagnostics"] = {key: _plain(value) for key, value in self.diagnostics.items()}
        return payload


class DomainError(CapacityError, ValueError):
    """An argument lies outside the domain of the requested function."""

    code = "domain_error"


class RegimeError(DomainError):
    """A regime-specific solver was called outside its regime."""

    code = "regime_error"


class InfeasibleEnergyError(DomainError):
    """The energy budget is below the vacuum floor of the ensemble."""

    code = "infeasible_energy"


class SizeError(DomainError):
    """The problem is too large for an exhaustive search."""

    code = "size_error"


class ModelError(CapacityError, ValueError):
    """A noise description is malformed or violates its invariants."""

    code = "model_error"


class BracketError(CapacityError, RuntimeError):
    """The root bracket shows no sign change."""

    code = "bracket_error"
    exit_code = 2


class ConvergenceError(CapacityError, RuntimeError):
    """An iterative solver hit its iteration cap."""

    code = "convergence_error"
    exit_code = 2


class SolverError(ConvergenceError):
    """A nested root search failed; diagnostics carry endpoint residuals."""

    code = "solver_error"


def _plain(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if hasattr(value, "item"):
        try:
            return value.item()
        except (TypeError, ValueError):
            return str(value)
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)

from __future__ import annotations

import numpy as np
import pytest

from capwater.core.errors import (
    BracketError,
    CapacityError,
    ConvergenceError,
    DomainError,
    InfeasibleEnergyError,
    ModelError,
    RegimeError,
    SizeError,
    SolverError,
)


@pytest.mark.parametrize(
    ("error", "exit_code"),
    [
        (DomainError, 1),
        (RegimeError, 1),
        (InfeasibleEnergyError, 1),
        (SizeError, 1),
        (ModelError, 1),
        (BracketError, 2),
        (ConvergenceError, 2),
        (SolverError, 2),
    ],
)
def test_exit_codes(error: type[CapacityError], exit_code: int) -> None:
    assert error.exit_code == exit_code
    assert issubclass(error, CapacityError)


def test_as_dict_converts_numpy_diagnostics() -> None:
    exc = SolverError("no root", lo=np.float64(0.5), values=(np.float64(1.0), 2), label=object)
    payload = exc.as_dict()
    assert payload["code"] == "solver_error"
    assert payload["message"] == "no root"
    assert payload["diagnostics"]["lo"] == 0.5
    assert payload["diagnostics"]["values"] == [1.0, 2]
    assert isinstance(payload["diagnostics"]["label"], str)


def test_domain_errors_are_value_errors() -> None:
    assert isinstance(RegimeError("x"), ValueError)
    assert isinstance(ConvergenceError("x"), RuntimeError)
    assert "diagnostics" not in DomainError("plain").as_dict()

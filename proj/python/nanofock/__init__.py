"""Fock-state preparation in driven nanomechanical resonators.

Frequencies and rates are angular (rad/s). Wigner functions use the alpha-plane
convention with W(0, 0) = 2/pi for the vacuum.
"""

from ._core import (
    ArgumentError,
    BucklingError,
    ConfigError,
    Derived,
    MemoryGuardError,
    NumericalError,
    PreconditionError,
    __version__,
    config_schema,
    derive,
    full_populations,
    quoted,
    reduced_populations,
    run,
    spectrum,
    spectrum_round_trip,
    validate,
    wigner,
    wigner_origin,
)

__all__ = [
    "ArgumentError",
    "BucklingError",
    "ConfigError",
    "Derived",
    "MemoryGuardError",
    "NumericalError",
    "PreconditionError",
    "__version__",
    "config_schema",
    "derive",
    "full_populations",
    "quoted",
    "reduced_populations",
    "run",
    "spectrum",
    "spectrum_round_trip",
    "validate",
    "wigner",
    "wigner_origin",
]

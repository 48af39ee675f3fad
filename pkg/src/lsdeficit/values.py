"""Value containers shared across functionals, transport, and bounds."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ArgumentError, NumericalError

# Functionals that are nonnegative by definition; a value below minus its
# error bar means the computation, not the math, is broken.
_NONNEGATIVE = {"D", "I_rel", "I_plain", "TV", "deficit"}


@dataclass(frozen=True)
class FunctionalValue:
    """A computed functional with its quadrature error estimate."""

    name: str
    value: float
    error_estimate: float

    def __post_init__(self) -> None:
        if self.error_estimate < 0:
            raise ArgumentError("error_estimate must be >= 0")
        nonneg = self.name in _NONNEGATIVE or self.name.startswith("T[")
        if nonneg and self.value < -(self.error_estimate + 1e-9):
            raise NumericalError(
                f"{self.name} = {self.value} is negative beyond its error "
                f"estimate {self.error_estimate}"
            )
        if self.name == "N" and not self.value > 0:
            raise NumericalError(f"entropy power must be positive, got {self.value}")

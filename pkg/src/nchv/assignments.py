from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

from src.quantum.core import BASE_OBSERVABLES, ObservableName


@dataclass(frozen=True)
class Assignment:
    """Noncontextual values v(Z1), v(X1), v(Z2), v(X2).

    Products are never stored: v(AB) = v(A) v(B) whatever else is measured alongside.
    """

    values: Tuple[int, int, int, int]

    def __post_init__(self):
        if len(self.values) != 4 or any(v not in (1, -1) for v in self.values):
            raise ValueError(f"an assignment needs four values in {{+1, -1}}, got {self.values}")

    def value(self, name: ObservableName | str) -> int:
        result = 1
        for factor in ObservableName(name).factors:
            result *= self.values[BASE_OBSERVABLES.index(factor)]
        return result

    def __str__(self) -> str:
        pairs = zip(BASE_OBSERVABLES, self.values)
        return " ".join(f"v({name.value})={value:+d}" for name, value in pairs)


@dataclass(frozen=True)
class Constraint:
    """The product of the listed observables must equal `required`."""

    factors: Tuple[ObservableName, ...]
    required: int

    @classmethod
    def of(cls, *names: ObservableName | str, required: int) -> Constraint:
        if required not in (1, -1):
            raise ValueError(f"required value must be +1 or -1, got {required}")
        return cls(tuple(ObservableName(name) for name in names), required)

    def holds(self, assignment: Assignment) -> bool:
        product = 1
        for name in self.factors:
            product *= assignment.value(name)
        return product == self.required

    def __str__(self) -> str:
        if len(self.factors) == 1:
            term = self.factors[0].value
        else:
            term = "".join(
                f"({name.value})" if name.is_product else name.value for name in self.factors
            )
        return f"{term} = {self.required:+d}"


def enumerate_assignments() -> List[Assignment]:
    """All 16 valuations, all-(+1) first."""
    return [Assignment(values) for values in itertools.product((1, -1), repeat=4)]


def consistent_assignments(
    constraints: Iterable[Constraint], assignments: Sequence[Assignment] | None = None
) -> List[Assignment]:
    constraints = list(constraints)
    pool = enumerate_assignments() if assignments is None else assignments
    return [a for a in pool if all(c.holds(a) for c in constraints)]

"""Analytic operation counting.

Multiplies and adds are counted separately (a fused multiply-add is 2 flops).
Each solver charges a fixed count per executed line; where only an order of
growth is natural (QR, sketch application) the explicit constant is documented
on the function that charges it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

MATVEC = "matvec"
SKETCH = "sketch-build"
SUBSOLVER = "subsolver"
VECTOR = "vector-ops"
INNER = "inner-products"
FACTOR = "factorization"
ESTIMATE = "estimation"

CATEGORIES = (MATVEC, SKETCH, SUBSOLVER, VECTOR, INNER, FACTOR, ESTIMATE)

_INT64_MAX = 2**63 - 1


@dataclass
class FlopCounter:
    """Additive flop accumulator with per-category tallies.

    ``events`` counts how many charges landed in each category, which lets tests
    assert structural facts (e.g. the number of reductions per iteration).
    """

    tallies: dict = field(default_factory=lambda: {c: 0 for c in CATEGORIES})
    events: dict = field(default_factory=lambda: {c: 0 for c in CATEGORIES})

    @property
    def total(self) -> int:
        return sum(self.tallies.values())

    def charge(self, category: str, amount: int) -> "FlopCounter":
        if category not in self.tallies:
            raise KeyError(f"unknown flop category {category!r}")
        amount = int(amount)
        if amount < 0:
            raise ValueError("flop charge must be nonnegative")
        if amount == 0:
            return self
        if self.total + amount > _INT64_MAX:
            raise OverflowError("flop counter exceeded 64-bit range")
        self.tallies[category] += amount
        self.events[category] += 1
        return self

    def merge(self, other: "FlopCounter", into: str | None = None) -> "FlopCounter":
        """Add ``other``'s tallies; with ``into`` everything lands in one category."""
        for cat, amount in other.tallies.items():
            if amount:
                self.charge(into or cat, amount)
        return self

    def copy(self) -> "FlopCounter":
        return FlopCounter(dict(self.tallies), dict(self.events))

    def as_dict(self) -> dict:
        return {"total": self.total, **self.tallies}


def charge(counter: FlopCounter | None, category: str, amount: int) -> None:
    """Charge ``amount`` flops when a counter is supplied; no-op otherwise."""
    if counter is not None:
        counter.charge(category, amount)


def householder_r_flops(rows: int, cols: int) -> int:
    """R-factor-only Householder QR of a rows x cols matrix: 2c^2(r - c/3)."""
    return int(round(2 * cols * cols * (rows - cols / 3.0)))

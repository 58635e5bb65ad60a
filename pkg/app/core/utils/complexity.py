"""Per-step operation counts of the three schedulers.

Counts are evaluated in exact rationals and rounded half-up, so the
published table values come out by integer equality.
"""

from dataclasses import asdict, dataclass
from fractions import Fraction
from math import floor
from typing import Dict, Optional, Sequence, Union

from app.core.errors import DomainError

Number = Union[int, Fraction]

BENCHMARK_FIRST_HIDDEN = 50

BIG_O = {
    "montecarlo": {"lower": "O(M^3 n' + N S M)", "upper": "O(N S M^3 n')"},
    "proposed": {"lower": "O(N^2 + N C)", "upper": "O(N^2 + N C)"},
    "benchmark_drl": {"lower": "O(N M^3 + N^2 M + N^3)", "upper": "O(N M^3 + N^2 M + N^3)"},
}


@dataclass(frozen=True)
class ComplexityBounds:
    lower: int
    upper: int

    def __post_init__(self):
        if self.lower > self.upper:
            raise DomainError(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    def to_list(self):
        return [self.lower, self.upper]

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)


def round_half_up(value: Number) -> int:
    return floor(Fraction(value) + Fraction(1, 2))


def _check_positive(**values: int) -> None:
    for name, value in values.items():
        if int(value) != value or value < 1:
            raise DomainError(f"{name} must be a positive integer, got {value}")


def layer_ops(sizes: Sequence[Number]) -> Fraction:
    """Multiply-adds plus activations of one forward pass: ``sum l_{i+1} (2 l_i + 1)``."""
    return sum((Fraction(b) * (2 * Fraction(a) + 1) for a, b in zip(sizes[:-1], sizes[1:])), Fraction(0))


def montecarlo_bounds(N: int, M: int, C: int, S: int, nprime: int) -> ComplexityBounds:
    """Bounds for the lookahead scheduler; ``C`` does not enter."""
    _check_positive(N=N, M=M, C=C, S=S, nprime=nprime)
    m3 = Fraction(M) ** 3
    lower = (m3 / 3 + 8 * m3 * nprime + 22 * M ** 2 * nprime + 4 * M ** 2 + 12 * M * nprime
             + N * S * (4 + M) + N)
    extra = N * S * (22 * m3 / 3 + 16 * m3 * nprime + 10 * M ** 2 * nprime + 8 * M ** 2 + M + 3)
    return ComplexityBounds(round_half_up(lower), round_half_up(lower + extra))


def proposed_bounds(N: int, C: int) -> ComplexityBounds:
    _check_positive(N=N, C=C)
    lower = (30 * N + 31) * layer_ops([C + 1, 4, N + 1]) + 3
    return ComplexityBounds(round_half_up(lower), round_half_up(lower + N))


def benchmark_bounds(N: int, M: int, C: int,
                     first_hidden: Optional[Number] = BENCHMARK_FIRST_HIDDEN) -> ComplexityBounds:
    """Bounds for the full-state DQN scheduler.

    ``first_hidden`` is the width of the first hidden layer. The default is the
    deployed network's fixed width, which reproduces the published rows for every
    ``M``; ``None`` scales it with the state as ``2.5 M``.
    """
    _check_positive(N=N, M=M, C=C)
    width = Fraction(5, 2) * M if first_hidden is None else Fraction(first_hidden)
    if width <= 0:
        raise DomainError(f"first hidden width must be positive, got {first_hidden}")
    lower = (30 * N + 1) * layer_ops([M + M * M + C, width, M, N, N]) + 3
    return ComplexityBounds(round_half_up(lower), round_half_up(lower + N - 1))


def complexity_table(N: int, M: int, C: int, S: int, nprime: int) -> Dict[str, Dict]:
    """One table row: bounds and asymptotic order per scheduler."""
    bounds = {
        "proposed": proposed_bounds(N, C),
        "benchmark_drl": benchmark_bounds(N, M, C),
        "montecarlo": montecarlo_bounds(N, M, C, S, nprime),
    }
    return {
        name: {"bounds": b.to_list(), "big_o": BIG_O[name]}
        for name, b in bounds.items()
    }

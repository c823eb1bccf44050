"""Exact ground truth: satisfying-assignment counts, the analytic correlation
mean, and the closed-form SNR model.

Pairing every draw of ``tau`` with its partner in ``sigma`` shows that only
matching minterms survive the expectation, each contributing
``E[d**2]**(n*m) = (1/12)**(n*m)``. The mean of ``tau * sigma`` is therefore
``K * (1/12)**(n*m)`` with ``K`` the number of satisfying assignments inside
the subspace left by the bindings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .cnf import CnfFormula, PartialAssignment

__all__ = [
    "MINTERM_POWER",
    "ENUMERATION_LIMIT",
    "EnumerationLimitError",
    "BudgetError",
    "ExactResult",
    "SnrEstimate",
    "count_satisfying",
    "minterm_mean",
    "snr",
    "required_samples",
    "sigma_terms_3sat",
]

MINTERM_POWER = 1.0 / 12.0  # E[d**2] for d uniform on [-0.5, 0.5]
ENUMERATION_LIMIT = 30
_CHUNK_BITS = 20


class EnumerationLimitError(ValueError):
    pass


class BudgetError(ValueError):
    """The sample count needed for a requested SNR exceeds the allowed cap."""

    def __init__(self, needed: int, cap: int):
        self.needed = needed
        self.cap = cap
        super().__init__(f"{needed} samples needed, cap is {cap}")


def minterm_mean(n: int, m: int) -> float:
    """Mean contribution of one matching minterm, ``(1/12)**(n*m)``.

    Underflows to 0.0 once ``n*m`` passes about 285.
    """
    return MINTERM_POWER ** (n * m)


@dataclass(frozen=True)
class ExactResult:
    satisfying_count: int
    analytic_mean: float
    n: int
    m: int

    @property
    def satisfiable(self) -> bool:
        return self.satisfying_count > 0

    @property
    def log10_mean(self) -> float:
        """Magnitude of the analytic mean, valid past double-precision underflow."""
        if self.satisfying_count == 0:
            return -math.inf
        return math.log10(self.satisfying_count) - self.n * self.m * math.log10(12)


def count_satisfying(
    formula: CnfFormula,
    bindings: Optional[PartialAssignment] = None,
    limit: int = ENUMERATION_LIMIT,
) -> ExactResult:
    """Count full assignments that extend ``bindings`` and satisfy ``formula``."""
    n = formula.n
    bindings = bindings or PartialAssignment.unbound(n)
    if bindings.n != n:
        raise ValueError(f"bindings cover {bindings.n} variables, formula has {n}")
    free = [i for i, v in enumerate(bindings.values) if v is None]
    if len(free) > limit:
        raise EnumerationLimitError(
            f"{len(free)} unbound variables exceeds the enumeration limit of {limit}"
        )
    slot = {var: k for k, var in enumerate(free)}

    # Reduce each clause to the unbound literals it still needs.
    reduced = []
    for clause in formula.clauses:
        lits = []
        satisfied = False
        for lit in clause:
            state = bindings.values[lit.variable - 1]
            if state is None:
                lits.append((slot[lit.variable - 1], lit.positive))
            elif state == lit.positive:
                satisfied = True
                break
        if satisfied:
            continue
        if not lits:
            return ExactResult(0, 0.0, n, formula.m)
        reduced.append(lits)

    total = 0
    size = 1 << len(free)
    step = 1 << _CHUNK_BITS
    for start in range(0, size, step):
        x = np.arange(start, min(size, start + step), dtype=np.int64)
        ok = np.ones(x.shape, dtype=bool)
        for lits in reduced:
            sat = np.zeros(x.shape, dtype=bool)
            for k, positive in lits:
                bit = ((x >> k) & 1).astype(bool)
                sat |= bit if positive else ~bit
            ok &= sat
        total += int(ok.sum())
    return ExactResult(total, total * minterm_mean(n, formula.m), n, formula.m)


@dataclass(frozen=True)
class SnrEstimate:
    """Model SNR between a ``K``-solution instance and an unsatisfiable one.

    ``sigma`` is the model standard deviation of the sample mean, which
    treats the ``O(2**(n*m))`` cross products as independent. It is a
    model estimate, not a measurement.
    """

    mu1: float
    sigma: float
    snr: float
    n: int
    m: int
    samples: int
    k: int


def _snr_value(nm: int, samples: int, k: int) -> float:
    return k * math.sqrt(samples - 1) / (3 * 2.0**nm)


def snr(n: int, m: int, samples: int, k: int = 1) -> SnrEstimate:
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    if samples < 2:
        raise ValueError("need at least 2 samples")
    if k < 1:
        raise ValueError("K must be >= 1")
    nm = n * m
    mu1 = k * minterm_mean(n, m)
    sigma = minterm_mean(n, m) * 2.0**nm / math.sqrt(samples - 1)
    return SnrEstimate(mu1, sigma, _snr_value(nm, samples, k), n, m, samples, k)


def required_samples(
    n: int, m: int, k: int = 1, target: float = 5.0, cap: Optional[int] = None
) -> int:
    """Smallest sample count whose model SNR reaches ``target``.

    Solves ``K*sqrt(N-1)/(3*2**(n*m)) >= target`` exactly in rationals, then
    nudges by one so the result agrees with :func:`snr` in floating point.
    """
    if target <= 0:
        raise ValueError("target SNR must be positive")
    if k < 1:
        raise ValueError("K must be >= 1")
    if n < 0 or m < 0:
        raise ValueError("n and m must be non-negative")
    nm = n * m
    ratio = Fraction(3 * 2**nm) * Fraction(target) / k
    sq = ratio * ratio
    need = 1 + sq.numerator // sq.denominator + (sq.numerator % sq.denominator != 0)
    need = max(need, 2)
    while _snr_value(nm, need, k) < target:
        need += 1
    while need > 2 and _snr_value(nm, need - 1, k) >= target:
        need -= 1
    if cap is not None and need > cap:
        raise BudgetError(need, cap)
    return need


def sigma_terms_3sat(n: int, m: int) -> int:
    """Minterm products in the expanded ``Sigma`` of an exact 3-SAT instance.

    A clause with three distinct variables is falsified by ``2**(n-3)``
    minterms, so each clause factor holds ``2**n - 2**(n-3)`` of them. The
    count does not hold for other clause widths.
    """
    if n < 3:
        raise ValueError("3-SAT needs n >= 3")
    if m < 0:
        raise ValueError("m must be non-negative")
    return (2**n - 2 ** (n - 3)) ** m

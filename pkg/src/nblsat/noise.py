"""Noise superpositions and streaming estimation of the correlation mean.

Each sample ``t`` owns a tape of ``2*n*m`` independent draws, uniform on
[-0.5, 0.5], indexed by (clause, variable, polarity). The hyperspace value
``tau`` and the instance value ``sigma`` are evaluated on the same tape and
their product ``S = tau * sigma`` is averaged over samples. The long-run mean
is ``K * (1/12)**(n*m)`` where ``K`` counts satisfying assignments.

Draws are counter based: the draw at (seed, t, coordinate) is a hash of the
three, so any partition of the sample range into blocks reproduces the same
stream.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

import numpy as np

from . import _pykernel
from .cnf import CnfFormula, PartialAssignment
from .kernels import get_kernel

__all__ = [
    "SeedSpec",
    "NoiseTape",
    "CorrelationEstimate",
    "StoppingRule",
    "draw_tape",
    "eval_tau",
    "eval_sigma",
    "sample_sn",
    "accumulate",
    "merge",
    "run_correlation",
    "run_trace",
    "clause_codes",
    "binding_mask",
]

_U64 = 1 << 64
_SIGMA_SALT = 0x5DEECE66D2545F49


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < _U64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def key(self) -> int:
        return _pykernel.mix64(self.master_seed + _pykernel.GAMMA)

    @property
    def sigma_key(self) -> int:
        """Key of an independent tape family, used only by the decoupled control."""
        return _pykernel.mix64(self.key ^ _SIGMA_SALT)


def _as_seed(seed) -> SeedSpec:
    return seed if isinstance(seed, SeedSpec) else SeedSpec(int(seed))


def _check_counter(t_end: int, n: int, m: int) -> None:
    if t_end * 2 * n * m >= _U64:
        raise OverflowError(
            f"sample index {t_end} with n*m={n * m} overflows the 64-bit counter"
        )


@dataclass(frozen=True, eq=False)
class NoiseTape:
    """One sample's draws, ``values[j, i, p]`` with 0-based clause/variable and
    ``p = 0`` for the positive literal, ``1`` for the negative one."""

    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if v.ndim != 3 or v.shape[2] != 2:
            raise ValueError(f"tape must have shape (m, n, 2), got {v.shape}")
        if v.size and (v.min() < -0.5 or v.max() > 0.5):
            raise ValueError("tape draws must lie in [-0.5, 0.5]")

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def draw(self, clause: int, variable: int, positive: bool) -> float:
        """Draw for a 1-based (clause, variable) pair."""
        return float(self.values[clause - 1, variable - 1, 0 if positive else 1])

    def __eq__(self, other):
        if not isinstance(other, NoiseTape):
            return NotImplemented
        return np.array_equal(self.values, other.values)


def draw_tape(seed, t: int, n: int, m: int, *, independent: bool = False) -> NoiseTape:
    """Tape of sample ``t``. ``independent=True`` reads the decoupled family."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    if t < 0:
        raise ValueError("sample index must be non-negative")
    _check_counter(t + 1, n, m)
    s = _as_seed(seed)
    key = s.sigma_key if independent else s.key
    return NoiseTape(_pykernel.draws(key, t, 1, n, m)[0])


def eval_tau(tape: NoiseTape, bindings: Optional[PartialAssignment] = None) -> float:
    """Product over variables of (positive product + negative product).

    A variable bound to true drops its negative branch and vice versa.
    """
    v = tape.values
    out = 1.0
    for i in range(tape.n):
        state = None if bindings is None else bindings.values[i]
        pos = float(np.prod(v[:, i, 0])) if state is not False else 0.0
        neg = float(np.prod(v[:, i, 1])) if state is not True else 0.0
        out *= pos + neg
    return out


def eval_sigma(tape: NoiseTape, formula: CnfFormula) -> float:
    """Product over clauses of the superposition of clause-satisfying minterms.

    Each clause contributes its local hyperspace minus the single cube of
    minterms that falsify it, so every satisfying minterm appears exactly
    once whatever the number of true literals. Empty clauses contribute 0,
    tautologies their full hyperspace.
    """
    if (tape.m, tape.n) != (formula.m, formula.n):
        raise ValueError("tape dimensions do not match the formula")
    out = 1.0
    for j, row in enumerate(clause_codes(formula)):
        a, b = tape.values[j, :, 0], tape.values[j, :, 1]
        s = a + b
        falsify = np.where(row == 0, s, np.where(row == 1, b, np.where(row == 2, a, 0.0)))
        out *= float(np.prod(s)) - float(np.prod(falsify))
    return out


def sample_sn(seed, t: int, formula: CnfFormula,
              bindings: Optional[PartialAssignment] = None) -> float:
    tape = draw_tape(seed, t, formula.n, formula.m)
    return eval_tau(tape, bindings) * eval_sigma(tape, formula)


def clause_codes(formula: CnfFormula) -> np.ndarray:
    """``(m, n)`` int8 matrix: 0 absent, 1 positive, 2 negative, 3 both polarities."""
    code = np.zeros((formula.m, formula.n), dtype=np.int8)
    for j, clause in enumerate(formula.clauses):
        for lit in clause:
            code[j, lit.variable - 1] |= 1 if lit.positive else 2
    return code


def binding_mask(n: int, bindings: Optional[PartialAssignment]) -> np.ndarray:
    """``(n, 2)`` int8 matrix of which tau branches survive the bindings."""
    allow = np.ones((n, 2), dtype=np.int8)
    if bindings is not None:
        if bindings.n != n:
            raise ValueError(f"bindings cover {bindings.n} variables, formula has {n}")
        for i, state in enumerate(bindings.values):
            if state is True:
                allow[i, 1] = 0
            elif state is False:
                allow[i, 0] = 0
    return allow


@dataclass(frozen=True)
class CorrelationEstimate:
    """Running count, mean and sum of squared deviations of a sample stream."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else math.nan

    @property
    def stderr(self) -> float:
        if self.count < 2:
            return math.nan
        return math.sqrt(self.m2 / (self.count * (self.count - 1)))

    @property
    def z_score(self) -> float:
        se = self.stderr
        if se > 0:
            return self.mean / se
        if self.mean == 0 or math.isnan(se):
            return 0.0
        return math.copysign(math.inf, self.mean)

    def accumulate(self, value: float) -> "CorrelationEstimate":
        count = self.count + 1
        delta = value - self.mean
        mean = self.mean + delta / count
        return CorrelationEstimate(count, mean, self.m2 + delta * (value - mean))

    def merge(self, other: "CorrelationEstimate") -> "CorrelationEstimate":
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        count = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.count / count)
        m2 = self.m2 + other.m2 + delta * delta * (self.count * other.count / count)
        return CorrelationEstimate(count, mean, m2)

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "CorrelationEstimate":
        est = cls()
        for v in values:
            est = est.accumulate(float(v))
        return est


def accumulate(est: CorrelationEstimate, value: float) -> CorrelationEstimate:
    return est.accumulate(value)


def merge(a: CorrelationEstimate, b: CorrelationEstimate) -> CorrelationEstimate:
    return a.merge(b)


@dataclass(frozen=True)
class StoppingRule:
    """When to stop sampling.

    With ``converge`` set, sampling stops after the first block at which at
    least ``min_samples`` have been drawn and either the running mean moved by
    less than ``10**-digits`` of itself since the previous block, or
    ``|mean| < zero_band * stderr``. ``max_samples`` always ends the run.
    """

    max_samples: int = 10**8
    block_size: int = 1 << 16
    digits: int = 3
    min_samples: int = 1 << 20
    zero_band: float = 1.0
    converge: bool = True

    def __post_init__(self):
        if self.max_samples < 1:
            raise ValueError("max_samples must be positive")
        if self.block_size < 1:
            raise ValueError("block_size must be positive")
        if self.digits < 1:
            raise ValueError("digits must be positive")

    @classmethod
    def fixed(cls, samples: int, block_size: int = 1 << 16) -> "StoppingRule":
        return cls(max_samples=samples, block_size=block_size, converge=False)

    def converged(self, prev: CorrelationEstimate, cur: CorrelationEstimate) -> bool:
        if not self.converge or cur.count < self.min_samples or prev.count == 0:
            return False
        if abs(cur.mean - prev.mean) < 10.0**-self.digits * abs(cur.mean):
            return True
        return abs(cur.mean) < self.zero_band * cur.stderr


def _segments(end: int, block_size: int, cuts: Iterable[int] = ()) -> list[tuple[int, int]]:
    bounds = set(range(block_size, end, block_size))
    bounds.update(c for c in cuts if 0 < c < end)
    bounds.add(end)
    out, start = [], 0
    for b in sorted(bounds):
        out.append((start, b - start))
        start = b
    return out


class _Sampler:
    def __init__(self, formula, bindings, seed, kernel, decouple):
        s = _as_seed(seed)
        self.kernel = get_kernel(kernel)
        self.code = clause_codes(formula)
        self.allow = binding_mask(formula.n, bindings)
        self.key, self.sigma_key = s.key, s.sigma_key
        self.decouple = bool(decouple)
        self.n, self.m = formula.n, formula.m

    def block(self, seg: tuple[int, int]) -> CorrelationEstimate:
        t0, count = seg
        c, mean, m2 = self.kernel.block_stats(
            self.key, self.sigma_key, self.decouple, t0, count, self.code, self.allow
        )
        return CorrelationEstimate(int(c), float(mean), float(m2))

    def map(self, segments, threads: int) -> Iterator[CorrelationEstimate]:
        """Block estimates in segment order. Threads only change who computes."""
        if threads <= 1:
            yield from map(self.block, segments)
            return
        wave = threads * 4
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for k in range(0, len(segments), wave):
                yield from pool.map(self.block, segments[k : k + wave])


def run_correlation(
    formula: CnfFormula,
    bindings: Optional[PartialAssignment] = None,
    seed=0,
    stop: Optional[StoppingRule] = None,
    *,
    threads: int = 1,
    kernel: Optional[str] = None,
    decouple: bool = False,
) -> CorrelationEstimate:
    """Estimate the mean of ``tau * sigma`` over samples ``t = 0, 1, ...``.

    Blocks are merged left to right in sample order, so the result depends on
    ``(formula, bindings, seed, stop)`` only, never on ``threads``.
    ``decouple=True`` evaluates sigma on an independent tape family (a
    negative control whose mean is zero for every instance).
    """
    stop = stop or StoppingRule()
    _check_counter(stop.max_samples, formula.n, formula.m)
    sampler = _Sampler(formula, bindings, seed, kernel, decouple)
    est = CorrelationEstimate()
    for block in sampler.map(_segments(stop.max_samples, stop.block_size), threads):
        prev, est = est, est.merge(block)
        if stop.converged(prev, est):
            break
    return est


def run_trace(
    formula: CnfFormula,
    bindings: Optional[PartialAssignment],
    seed,
    checkpoints: Iterable[int],
    *,
    block_size: int = 1 << 16,
    threads: int = 1,
    kernel: Optional[str] = None,
    decouple: bool = False,
    stop: Optional[StoppingRule] = None,
) -> Iterator[CorrelationEstimate]:
    """Yield the running estimate at each checkpoint sample count (ascending).

    With a converging ``stop`` rule the run may end early; the estimate at
    the stopping point is then yielded as the last record.
    """
    points = sorted({int(c) for c in checkpoints if c > 0})
    if not points:
        return
    _check_counter(points[-1], formula.n, formula.m)
    sampler = _Sampler(formula, bindings, seed, kernel, decouple)
    wanted = set(points)
    est = CorrelationEstimate()
    for block in sampler.map(_segments(points[-1], block_size, points), threads):
        prev, est = est, est.merge(block)
        converged = stop is not None and stop.converged(prev, est)
        if est.count in wanted or converged:
            yield est
        if converged:
            return

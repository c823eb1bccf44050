"""CNF formulas, partial assignments and DIMACS I/O.

All public interfaces use 1-based variable indices, as DIMACS does.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

__all__ = [
    "Literal",
    "Clause",
    "CnfFormula",
    "PartialAssignment",
    "NormalizationReport",
    "DimacsError",
    "parse_dimacs",
    "write_dimacs",
    "normalize",
    "evaluate",
]


class DimacsError(ValueError):
    """Malformed DIMACS input. ``line`` and ``column`` are 1-based."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        self.reason = message
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


@dataclass(frozen=True, order=True)
class Literal:
    variable: int
    positive: bool = True

    def __post_init__(self):
        if self.variable < 1:
            raise ValueError(f"variable index must be >= 1, got {self.variable}")

    @classmethod
    def from_int(cls, value: int) -> "Literal":
        if value == 0:
            raise ValueError("0 is not a literal")
        return cls(abs(value), value > 0)

    def to_int(self) -> int:
        return self.variable if self.positive else -self.variable

    def __neg__(self) -> "Literal":
        return Literal(self.variable, not self.positive)

    def __str__(self) -> str:
        return f"x{self.variable}" if self.positive else f"~x{self.variable}"


@dataclass(frozen=True)
class Clause:
    literals: tuple[Literal, ...] = ()

    @classmethod
    def of(cls, *ints: int) -> "Clause":
        return cls(tuple(Literal.from_int(v) for v in ints))

    def __len__(self) -> int:
        return len(self.literals)

    def __iter__(self):
        return iter(self.literals)

    @property
    def is_empty(self) -> bool:
        return not self.literals

    @property
    def is_tautology(self) -> bool:
        seen = set(self.literals)
        return any(-lit in seen for lit in seen)

    def to_ints(self) -> list[int]:
        return [lit.to_int() for lit in self.literals]


@dataclass(frozen=True)
class CnfFormula:
    """A CNF instance over variables ``1..n``.

    ``header_mismatch`` records a clause count that disagreed with the DIMACS
    header; it does not take part in equality.
    """

    n: int
    clauses: tuple[Clause, ...] = ()
    header_mismatch: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("variable count must be non-negative")
        for j, clause in enumerate(self.clauses):
            for lit in clause:
                if lit.variable > self.n:
                    raise ValueError(
                        f"clause {j + 1} uses variable {lit.variable} > n={self.n}"
                    )

    @classmethod
    def from_ints(cls, n: int, clauses: Iterable[Sequence[int]]) -> "CnfFormula":
        return cls(n, tuple(Clause.of(*c) for c in clauses))

    @property
    def m(self) -> int:
        return len(self.clauses)

    @property
    def has_empty_clause(self) -> bool:
        return any(c.is_empty for c in self.clauses)

    def to_ints(self) -> list[list[int]]:
        return [c.to_ints() for c in self.clauses]


@dataclass(frozen=True)
class PartialAssignment:
    """Per-variable state: ``True``, ``False`` or ``None`` (unbound)."""

    values: tuple[Optional[bool], ...]

    @classmethod
    def unbound(cls, n: int) -> "PartialAssignment":
        return cls((None,) * n)

    @classmethod
    def from_literals(cls, n: int, literals: Iterable[int]) -> "PartialAssignment":
        a = cls.unbound(n)
        for value in literals:
            lit = Literal.from_int(value)
            a = a.bind(lit.variable, lit.positive)
        return a

    @classmethod
    def from_bools(cls, bits: Sequence[bool]) -> "PartialAssignment":
        return cls(tuple(bool(b) for b in bits))

    @property
    def n(self) -> int:
        return len(self.values)

    def __getitem__(self, variable: int) -> Optional[bool]:
        if not 1 <= variable <= len(self.values):
            raise IndexError(f"variable {variable} out of range 1..{len(self.values)}")
        return self.values[variable - 1]

    def bind(self, variable: int, value: bool) -> "PartialAssignment":
        if self[variable] is not None:
            raise ValueError(f"variable {variable} is already bound")
        vals = list(self.values)
        vals[variable - 1] = bool(value)
        return PartialAssignment(tuple(vals))

    def is_bound(self, variable: int) -> bool:
        return self[variable] is not None

    @property
    def is_full(self) -> bool:
        return all(v is not None for v in self.values)

    @property
    def unbound_count(self) -> int:
        return sum(v is None for v in self.values)

    def to_literals(self) -> list[int]:
        return [i if v else -i for i, v in enumerate(self.values, 1) if v is not None]


@dataclass(frozen=True)
class NormalizationReport:
    removed_duplicate_literals: int = 0
    tautological_clauses: tuple[int, ...] = ()
    empty_clause_present: bool = False

    @property
    def is_clean(self) -> bool:
        return not (
            self.removed_duplicate_literals
            or self.tautological_clauses
            or self.empty_clause_present
        )


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF text.

    Comment lines (``c ...``) may appear anywhere; a ``%`` line ends the
    clause section (SATLIB files carry one). A trailing clause without its
    ``0`` terminator is accepted. A clause count that disagrees with the
    header only sets ``header_mismatch``.
    """
    if not text or not text.strip():
        raise DimacsError("empty input")

    n = declared_m = None
    clauses: list[Clause] = []
    current: list[Literal] = []

    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("c"):
            continue
        if stripped.startswith("%"):
            break
        if stripped.startswith("p"):
            col = line.index("p") + 1
            if n is not None:
                raise DimacsError("duplicate problem line", lineno, col)
            parts = stripped.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError("expected 'p cnf <n> <m>'", lineno, col)
            try:
                n, declared_m = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError("non-integer in problem line", lineno, col) from None
            if n < 0 or declared_m < 0:
                raise DimacsError("negative count in problem line", lineno, col)
            continue
        if n is None:
            raise DimacsError("clause data before 'p cnf' header", lineno, 1)
        pos = 0
        for token in stripped.split():
            col = line.index(token, pos) + 1
            pos = col - 1 + len(token)
            try:
                value = int(token)
            except ValueError:
                raise DimacsError(f"non-integer token {token!r}", lineno, col) from None
            if value == 0:
                clauses.append(Clause(tuple(current)))
                current = []
            elif abs(value) > n:
                raise DimacsError(
                    f"literal {value} exceeds declared variable count {n}", lineno, col
                )
            else:
                current.append(Literal.from_int(value))

    if n is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        clauses.append(Clause(tuple(current)))
    return CnfFormula(n, tuple(clauses), header_mismatch=len(clauses) != declared_m)


def write_dimacs(formula: CnfFormula) -> str:
    lines = [f"p cnf {formula.n} {formula.m}"]
    for clause in formula.clauses:
        lines.append(" ".join([*map(str, clause.to_ints()), "0"]))
    return "\n".join(lines) + "\n"


def normalize(formula: CnfFormula) -> tuple[CnfFormula, NormalizationReport]:
    """Drop repeated literals inside each clause; flag tautologies and empty clauses.

    Clause order and first-occurrence literal order are preserved.
    """
    removed = 0
    tautologies = []
    clauses = []
    for j, clause in enumerate(formula.clauses):
        unique = tuple(dict.fromkeys(clause.literals))
        removed += len(clause) - len(unique)
        out = Clause(unique)
        if out.is_tautology:
            tautologies.append(j)
        clauses.append(out)
    report = NormalizationReport(removed, tuple(tautologies), formula.has_empty_clause)
    return CnfFormula(formula.n, tuple(clauses)), report


def evaluate(formula: CnfFormula, assignment: PartialAssignment) -> Optional[bool]:
    """Three-valued evaluation: ``True``, ``False``, or ``None`` if undetermined."""
    if assignment.n != formula.n:
        raise ValueError(f"assignment has {assignment.n} variables, formula has {formula.n}")
    result: Optional[bool] = True
    for clause in formula.clauses:
        status: Optional[bool] = False
        for lit in clause:
            value = assignment.values[lit.variable - 1]
            if value is None:
                status = None
            elif value == lit.positive:
                status = True
                break
        if status is False:
            return False
        if status is None:
            result = None
    return result

# apps/erasure/params.py
"""
Consortium erasure-code parameters and the three placement constraints.

    Eq. 1  n <= N,  l <= M,  ceil(n / l) <= N / M
    Eq. 2  n - k >= x
    Eq. 3  ceil(n / l) * y <= n - k
"""
import math
from dataclasses import dataclass, field

from apps.core.exceptions import ConfigurationError, ConstraintViolation


@dataclass(frozen=True)
class Violation:
    equation: str
    detail: str


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def equations(self) -> list[str]:
        return [v.equation for v in self.violations]


@dataclass(frozen=True)
class CodeParams:
    """(N, M, x, y, n, k, l) for one consortium."""

    N: int  # DBNodes in the consortium
    M: int  # organizations
    x: int  # tolerated node failures
    y: int  # tolerated organization failures
    n: int  # chunks per stripe
    k: int  # data chunks per stripe
    l: int  # noqa: E741  organizations per stripe

    @property
    def parity(self) -> int:
        return self.n - self.k

    @property
    def group_cap(self) -> int:
        """Most chunks of one stripe a single organization may hold."""
        return math.ceil(self.n / self.l)

    @property
    def nodes_per_org(self) -> int:
        return self.N // self.M

    def validate(self) -> ValidationResult:
        return validate_params(self)

    def require_valid(self) -> "CodeParams":
        result = validate_params(self)
        if not result.ok:
            raise ConstraintViolation(result.violations)
        return self


def validate_params(p: CodeParams) -> ValidationResult:
    for name in ("N", "M", "x", "y", "n", "k", "l"):
        value = getattr(p, name)
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise ConfigurationError(
                f"code parameter {name} must be a positive integer, got {value!r}",
                field=name)
    if p.N % p.M:
        raise ConfigurationError(
            f"N={p.N} DBNodes cannot be split evenly over M={p.M} organizations",
            field="N")

    violations = []
    if p.k >= p.n:
        violations.append(Violation("k < n", f"k={p.k} must be below n={p.n}"))
    if p.l > p.n:
        violations.append(Violation("l <= n", f"l={p.l} groups need at least as many chunks, n={p.n}"))

    eq1 = []
    if p.n > p.N:
        eq1.append(f"n={p.n} > N={p.N}")
    if p.l > p.M:
        eq1.append(f"l={p.l} > M={p.M}")
    if p.group_cap > p.nodes_per_org:
        eq1.append(f"ceil(n/l)={p.group_cap} > N/M={p.nodes_per_org}")
    if eq1:
        violations.append(Violation("Eq. 1", ", ".join(eq1)))

    if p.parity < p.x:
        violations.append(Violation("Eq. 2", f"n-k={p.parity} < x={p.x}"))

    if p.group_cap * p.y > p.parity:
        violations.append(Violation(
            "Eq. 3", f"ceil(n/l)*y={p.group_cap * p.y} > n-k={p.parity}"))

    return ValidationResult(tuple(violations))

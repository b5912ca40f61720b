"""Exact polynomial solutions with data x^{2p} (one dimension).

J*q - q maps even polynomials to even polynomials of lower degree: the
binomial expansion of (x - y)^{2j} integrates term by term against J, odd
moments vanish, and the x^{2j} term cancels. Iterating this action gives
the closed-form solution

    u(x, t) = x^{2p} + sum_{k=1}^{p} c_k(x) t^k / k

with c_1 = J*x^{2p} - x^{2p} and c_k = (J*c_{k-1} - c_{k-1})/(k-1). The
recursion terminates: c_p is a constant, so one more step gives zero.
When the moment table is rational, every coefficient is an exact Fraction
and the residual checks below are exact identities, not approximations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from .kernels import MomentTable


def _format_coef(c) -> str:
    if isinstance(c, Rational):
        return str(Fraction(c))
    return f"{float(c):.12g}"


@dataclass(frozen=True)
class EvenPolynomial:
    """Coefficients of x^0, x^2, ..., x^{2d}; trailing zeros stripped."""

    coeffs: tuple

    def __post_init__(self):
        c = tuple(self.coeffs)
        while c and c[-1] == 0:
            c = c[:-1]
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def monomial(cls, two_j: int, coef=1) -> "EvenPolynomial":
        if two_j % 2 or two_j < 0:
            raise ValueError("even nonnegative power required")
        j = two_j // 2
        return cls((0,) * j + (coef,))

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        # degree in x; zero polynomial reports -1
        return 2 * (len(self.coeffs) - 1) if self.coeffs else -1

    def __call__(self, x: float):
        acc = 0
        xx = x * x
        for c in reversed(self.coeffs):
            acc = acc * xx + c
        return acc

    def __add__(self, other: "EvenPolynomial") -> "EvenPolynomial":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        merged = list(a)
        for i, c in enumerate(b):
            merged[i] = merged[i] + c
        return EvenPolynomial(tuple(merged))

    def __sub__(self, other: "EvenPolynomial") -> "EvenPolynomial":
        return self + other.scale(-1)

    def scale(self, factor) -> "EvenPolynomial":
        return EvenPolynomial(tuple(c * factor for c in self.coeffs))

    def divide(self, k: int) -> "EvenPolynomial":
        return EvenPolynomial(
            tuple(
                c / Fraction(k) if isinstance(c, Rational) else c / k
                for c in self.coeffs
            )
        )

    def as_string(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for j in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[j]
            if c == 0:
                continue
            if j == 0:
                parts.append(_format_coef(c))
            else:
                power = "x^2" if j == 1 else f"x^{2 * j}"
                parts.append(power if c == 1 else f"{_format_coef(c)} {power}")
        return " + ".join(parts)


def moment_convolve(q: EvenPolynomial, table: MomentTable) -> EvenPolynomial:
    """Exact image J*q - q under the moment algebra.

    x^{2j} contributes sum_{i<j} C(2j, 2i) m_{2(j-i)} x^{2i}; constants map
    to zero (unit mass).
    """
    if q.is_zero:
        return q
    out = EvenPolynomial(())
    for j, a in enumerate(q.coeffs):
        if a == 0 or j == 0:
            continue
        contrib = [
            a * math.comb(2 * j, 2 * i) * table.get(2 * (j - i)) for i in range(j)
        ]
        out = out + EvenPolynomial(tuple(contrib))
    return out


@dataclass(frozen=True)
class PolySolution:
    """u(x,t) = x^{2p} + sum_k c_k(x) t^k / k with verified structure."""

    p: int
    coefficients: tuple[EvenPolynomial, ...]  # c_1 ... c_p
    table: MomentTable
    exact: bool

    def leading_term(self) -> tuple[int, "Fraction | float"]:
        c_p = self.coefficients[-1]
        const = c_p.coeffs[0] if c_p.coeffs else 0
        if isinstance(const, Rational):
            return self.p, Fraction(const, self.p)
        return self.p, const / self.p

    def as_string(self) -> str:
        parts = [f"x^{2 * self.p}" if self.p > 1 else "x^2"]
        for k, c in enumerate(self.coefficients, start=1):
            term = c.divide(k)
            if term.is_zero:
                continue
            t_pow = "t" if k == 1 else f"t^{k}"
            parts.append(f"({term.as_string()}) {t_pow}")
        return " + ".join(parts)


def explicit_solution(p: int, table: MomentTable) -> PolySolution:
    """Build the solution for data x^{2p} and verify it symbolically.

    Raises InternalConsistencyError via the embedded checks if the
    recursion fails to terminate or the PDE residual is nonzero; with a
    rational moment table both checks are exact.
    """
    if not (isinstance(p, int) and p >= 1):
        raise ValueError("p must be an integer >= 1")
    coeffs = [moment_convolve(EvenPolynomial.monomial(2 * p), table)]
    for k in range(1, p):
        coeffs.append(moment_convolve(coeffs[-1], table).divide(k))
    sol = PolySolution(
        p=p,
        coefficients=tuple(coeffs),
        table=table,
        exact=table.exact,
    )
    _verify(sol, table)
    return sol


def _verify(sol: PolySolution, table: MomentTable) -> None:
    from .errors import InternalConsistencyError

    p, cs = sol.p, sol.coefficients
    for k, c in enumerate(cs, start=1):
        if c.degree != 2 * (p - k):
            raise InternalConsistencyError(
                f"c_{k} has degree {c.degree}, expected {2 * (p - k)}"
            )
    past_end = moment_convolve(cs[-1], table)
    if not past_end.is_zero:
        raise InternalConsistencyError(
            f"recursion does not terminate: c_{p + 1} = {past_end.as_string()}"
        )
    # residual on the assembled polynomial, not on the recursion steps:
    # at fixed t, u(., t) collapses to one even polynomial in x, and
    # J*u - u of that must equal u_t = sum_k c_k t^{k-1}
    for t in (Fraction(1), Fraction(2), Fraction(1, 3)):
        u_at = EvenPolynomial.monomial(2 * p)
        du_at = EvenPolynomial(())
        for k, c in enumerate(cs, start=1):
            u_at = u_at + c.scale(t**k / k)
            du_at = du_at + c.scale(t ** (k - 1))
        diff = moment_convolve(u_at, table) - du_at
        if sol.exact:
            bad = not diff.is_zero
        else:
            scale = max((abs(float(c)) for c in du_at.coeffs), default=1.0)
            bad = any(abs(float(c)) > 1e-10 * max(scale, 1.0) for c in diff.coeffs)
        if bad:
            raise InternalConsistencyError(
                f"nonzero PDE residual at t={t}: {diff.as_string()}"
            )


def evaluate_solution(sol: PolySolution, x: float, t: float) -> float:
    acc = float(x) ** (2 * sol.p)
    for k, c in enumerate(sol.coefficients, start=1):
        acc += float(c(x)) * t**k / k
    return acc

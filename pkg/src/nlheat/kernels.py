"""Kernel families, their moments, and grid discretization.

Six families of symmetric probability densities J on R:

  uniform(rho)                 1/(2 rho) on [-rho, rho]
  bump(rho)                    (pi/(4 rho)) cos(pi x/(2 rho)) on [-rho, rho]
  gaussian(gamma)              (gamma^2/pi)^{1/2} e^{-gamma^2 x^2}
  power(gamma0)                (gamma0/2) (1+|x|)^{-(1+gamma0)}
  exptail(gamma0)              (gamma0/2) e^{-gamma0 |x|}
  tempered(gamma0, alpha0)     C e^{-gamma0 |x|} (1+|x|)^{-(N+1+alpha0)}

All are normalized to unit mass. The tempered exponent N+1+alpha0 makes the
advertised alpha0 the exact critical exponent of the tempered moment
integral int J e^{gamma0|y|} (1+|y|)^{N+alpha} dy (finite iff alpha < alpha0).
The jump of the uniform density is sampled at its midpoint value 1/(4 rho),
which keeps sampled trapezoid quadrature second order in h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import integrate as _sciint
from scipy.special import erf

from .errors import (
    DiscretizationQualityError,
    DomainTooSmallError,
    MomentDivergesError,
    MomentTableError,
)
from .grid import Grid, GridFunction, integrate, sample

FAMILIES = ("uniform", "bump", "gaussian", "power", "exptail", "tempered")

# relative slack for deciding that a point sits on the uniform jump; grid
# nodes like 100*0.01 are not bit-equal to 1.0
_EDGE_RTOL = 1e-12


class Decay(Enum):
    SLOW = "slow"
    FAST = "fast"


@dataclass(frozen=True)
class KernelSpec:
    """Parameters of one kernel family.

    dim is carried for symbolic classification only (power exponents read
    N + alpha there); all numerics require dim == 1.
    """

    family: str
    rho: float | None = None
    gamma: float | None = None
    gamma0: float | None = None
    alpha0: float | None = None
    dim: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if not (isinstance(self.dim, int) and self.dim >= 1):
            raise ValueError("dim must be a positive integer")
        need = {
            "uniform": ("rho",),
            "bump": ("rho",),
            "gaussian": ("gamma",),
            "power": ("gamma0",),
            "exptail": ("gamma0",),
            "tempered": ("gamma0", "alpha0"),
        }[self.family]
        for name in ("rho", "gamma", "gamma0", "alpha0"):
            value = getattr(self, name)
            if name in need:
                if value is None or not (value > 0 and math.isfinite(value)):
                    raise ValueError(f"{self.family} kernel needs {name} > 0")
            elif value is not None:
                raise ValueError(f"{self.family} kernel does not take {name}")


def uniform(rho: float) -> KernelSpec:
    return KernelSpec("uniform", rho=float(rho))


def bump(rho: float) -> KernelSpec:
    return KernelSpec("bump", rho=float(rho))


def gaussian(gamma: float) -> KernelSpec:
    return KernelSpec("gaussian", gamma=float(gamma))


def power_tail(gamma0: float) -> KernelSpec:
    return KernelSpec("power", gamma0=float(gamma0))


def exponential_tail(gamma0: float) -> KernelSpec:
    return KernelSpec("exptail", gamma0=float(gamma0))


def tempered_stable(gamma0: float, alpha0: float) -> KernelSpec:
    return KernelSpec("tempered", gamma0=float(gamma0), alpha0=float(alpha0))


def _require_1d(spec: KernelSpec) -> None:
    if spec.dim != 1:
        raise ValueError("numeric kernel operations require dim == 1")


@lru_cache(maxsize=None)
def _tempered_half_mass(gamma0: float, alpha0: float) -> float:
    # int_0^inf e^{-g0 y} (1+y)^{-(2+a0)} dy, 1-D
    val, _ = _sciint.quad(
        lambda y: math.exp(-gamma0 * y) * (1.0 + y) ** (-(2.0 + alpha0)),
        0.0,
        np.inf,
        epsabs=1e-300,
        epsrel=1e-12,
        limit=200,
    )
    return val


def normalizer(spec: KernelSpec) -> float:
    """The constant C making the family formula a unit-mass density (1-D)."""
    _require_1d(spec)
    if spec.family == "uniform":
        return 1.0 / (2.0 * spec.rho)
    if spec.family == "bump":
        return math.pi / (4.0 * spec.rho)
    if spec.family == "gaussian":
        return math.sqrt(spec.gamma**2 / math.pi)
    if spec.family == "power":
        return spec.gamma0 / 2.0
    if spec.family == "exptail":
        return spec.gamma0 / 2.0
    return 1.0 / (2.0 * _tempered_half_mass(spec.gamma0, spec.alpha0))


def evaluate(spec: KernelSpec, x):
    """Pointwise J(x); exactly 0 outside [-rho, rho] for compact families.

    Accepts scalars or arrays.
    """
    _require_1d(spec)
    arr = np.abs(np.asarray(x, dtype=np.float64))
    scalar = arr.ndim == 0
    r = np.atleast_1d(arr)
    c = normalizer(spec)
    if spec.family == "uniform":
        rho = spec.rho
        on_edge = np.abs(r - rho) <= _EDGE_RTOL * max(1.0, rho)
        out = np.where(r < rho, c, 0.0)
        out[on_edge] = 0.5 * c
    elif spec.family == "bump":
        rho = spec.rho
        inside = r <= rho * (1.0 + _EDGE_RTOL)
        out = np.zeros_like(r)
        out[inside] = np.maximum(0.0, c * np.cos(math.pi * r[inside] / (2.0 * rho)))
    elif spec.family == "gaussian":
        out = c * np.exp(-(spec.gamma**2) * r * r)
    elif spec.family == "power":
        out = c * (1.0 + r) ** (-(1.0 + spec.gamma0))
    elif spec.family == "exptail":
        out = c * np.exp(-spec.gamma0 * r)
    else:
        out = c * np.exp(-spec.gamma0 * r) * (1.0 + r) ** (-(2.0 + spec.alpha0))
    return float(out[0]) if scalar else out


def _truncated_mass(spec: KernelSpec, half_extent: float) -> float:
    """int_{-L}^{L} J, via closed forms where available."""
    L = half_extent
    if spec.family in ("uniform", "bump"):
        return 1.0 if L >= spec.rho else float("nan")
    if spec.family == "gaussian":
        return float(erf(spec.gamma * L))
    if spec.family == "power":
        return 1.0 - (1.0 + L) ** (-spec.gamma0)
    if spec.family == "exptail":
        return 1.0 - math.exp(-spec.gamma0 * L)
    tail, _ = _sciint.quad(
        lambda y: math.exp(-spec.gamma0 * y) * (1.0 + y) ** (-(2.0 + spec.alpha0)),
        L,
        np.inf,
        epsabs=1e-300,
        epsrel=1e-12,
        limit=200,
    )
    return 1.0 - 2.0 * normalizer(spec) * tail


@dataclass(frozen=True)
class DiscretizationReport:
    rescale_factor: float
    tail_deficit: float
    quadrature_dev: float
    band_halfwidth: float


def discretize_with_report(
    spec: KernelSpec, grid: Grid
) -> tuple[GridFunction, DiscretizationReport]:
    """Sample J and renormalize to exact unit discrete (trapezoid) mass.

    For smooth families the raw sampled mass must match the truncated true
    integral within 10 h^2 (quadrature quality band); the tail lost beyond
    [-L, L] is reported separately and is not part of the band.
    """
    _require_1d(spec)
    if spec.family in ("uniform", "bump") and grid.half_extent < spec.rho * (1 - 1e-12):
        raise DomainTooSmallError(
            f"grid half extent {grid.half_extent} is smaller than the kernel "
            f"support radius {spec.rho}",
            min_half_extent=spec.rho,
        )
    raw = sample(lambda x: evaluate(spec, x), grid)
    raw_mass = integrate(raw)
    truncated = _truncated_mass(spec, grid.half_extent)
    dev = raw_mass - truncated
    band = 10.0 * grid.spacing**2
    if spec.family != "uniform" and abs(dev) > band:
        raise DiscretizationQualityError(
            f"sampled mass {raw_mass:.17g} deviates from truncated integral "
            f"{truncated:.17g} by {dev:.3e}, beyond the 10 h^2 band {band:.3e}; "
            f"refine the grid"
        )
    rescale = 1.0 / raw_mass
    values = raw.values * rescale
    # nudge the center node by the residual rounding so the discrete mass
    # identity is sharp (at most one ulp worth of correction)
    mass2 = grid.spacing * (values.sum() - 0.5 * (values[0] + values[-1]))
    values = values.copy()
    values[grid.center_index] += (1.0 - mass2) / grid.spacing
    report = DiscretizationReport(
        rescale_factor=rescale,
        tail_deficit=max(0.0, 1.0 - truncated),
        quadrature_dev=dev,
        band_halfwidth=band,
    )
    return GridFunction(grid, values), report


def discretize(spec: KernelSpec, grid: Grid) -> GridFunction:
    gf, _ = discretize_with_report(spec, grid)
    return gf


def _quad_moment(spec: KernelSpec, log_weight, a=0.0, b=np.inf) -> float:
    # evaluate J(y) * e^{log_weight(y)} in log space; the weights grow
    # exponentially and would overflow before the kernel decay kicks in
    def f(y: float) -> float:
        j = evaluate(spec, y)
        if j <= 0.0:
            return 0.0
        s = math.log(j) + log_weight(y)
        return math.exp(s) if s > -745.0 else 0.0

    val, _ = _sciint.quad(f, a, b, epsabs=1e-300, epsrel=1e-11, limit=400)
    return 2.0 * val


def abs_moment(spec: KernelSpec, gamma: float) -> float:
    """int J(y) |y|^gamma dy for real gamma >= 0 (closed form where known)."""
    _require_1d(spec)
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if gamma == 0:
        return 1.0
    if spec.family == "uniform":
        return spec.rho**gamma / (gamma + 1.0)
    if spec.family == "gaussian":
        g = spec.gamma
        return math.gamma((gamma + 1.0) / 2.0) / (math.sqrt(math.pi) * g**gamma)
    if spec.family == "power":
        g0 = spec.gamma0
        if gamma >= g0:
            raise MomentDivergesError(
                f"absolute moment of order {gamma} diverges for power tail "
                f"with critical exponent {g0}"
            )
        return math.exp(
            math.log(g0)
            + math.lgamma(gamma + 1.0)
            + math.lgamma(g0 - gamma)
            - math.lgamma(g0 + 1.0)
        )
    if spec.family == "exptail":
        return math.exp(math.lgamma(gamma + 1.0) - gamma * math.log(spec.gamma0))
    if spec.family == "bump":
        return _quad_moment(
            spec, lambda y: gamma * math.log(y) if y > 0 else -math.inf, 0.0, spec.rho
        )
    return _quad_moment(spec, lambda y: gamma * math.log(y) if y > 0 else -math.inf)


def moment(spec: KernelSpec, order: int) -> float:
    """Even moment m_order = int J(y) y^order dy.

    Raises MomentDivergesError when the integral diverges (power family at
    or above its critical exponent).
    """
    if not (isinstance(order, int) and order >= 0 and order % 2 == 0):
        raise ValueError("order must be a nonnegative even integer")
    if order == 0:
        return 1.0
    return abs_moment(spec, float(order))


def _moment_exact(spec: KernelSpec, order: int) -> Fraction | None:
    """Exact rational moment when the family's closed form is rational in
    its (exact binary float) parameter; None otherwise."""
    p = order // 2
    if spec.family == "uniform":
        r = Fraction(spec.rho)
        return r**order / (order + 1)
    if spec.family == "gaussian":
        g = Fraction(spec.gamma)
        return Fraction(_double_factorial(order - 1)) / (2 * g * g) ** p
    if spec.family == "exptail":
        g0 = Fraction(spec.gamma0)
        return Fraction(math.factorial(order)) / g0**order
    return None


def _double_factorial(k: int) -> int:
    if k <= 0:
        return 1
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def exp_moment(spec: KernelSpec, gamma: float) -> float:
    """int J(y) e^{gamma |y|} dy for gamma >= 0.

    Raises MomentDivergesError at or above the critical exponent of the
    exponential-type families, and for any gamma > 0 on the power family.
    """
    _require_1d(spec)
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if gamma == 0:
        return 1.0
    if spec.family == "uniform":
        gr = gamma * spec.rho
        return math.expm1(gr) / gr
    if spec.family == "bump":
        return _quad_moment(spec, lambda y: gamma * y, 0.0, spec.rho)
    if spec.family == "gaussian":
        g = spec.gamma
        return math.exp(gamma**2 / (4.0 * g * g)) * (1.0 + float(erf(gamma / (2.0 * g))))
    if spec.family == "power":
        raise MomentDivergesError(
            "exponential moments of the power-tail family diverge for any gamma > 0"
        )
    if gamma >= spec.gamma0:
        raise MomentDivergesError(
            f"exponential moment at gamma = {gamma} is at/above the critical "
            f"exponent {spec.gamma0}"
        )
    if spec.family == "exptail":
        return spec.gamma0 / (spec.gamma0 - gamma)
    return _quad_moment(spec, lambda y: gamma * y)


def tempered_moment(spec: KernelSpec, gamma: float, alpha: float) -> float:
    """int J(y) e^{gamma |y|} (1+|y|)^{N+alpha} dy with N = spec.dim.

    For the tempered family this is finite for gamma < gamma0 (any alpha)
    and for gamma == gamma0 with alpha < alpha0, where it has the closed
    form 2C/(alpha0 - alpha).
    """
    _require_1d(spec)
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    n_alpha = spec.dim + alpha

    def weight(y: float) -> float:
        # log of e^{gamma y} (1+y)^{N+alpha}
        return gamma * y + n_alpha * math.log1p(y)

    if spec.family in ("uniform", "bump"):
        return _quad_moment(spec, weight, 0.0, spec.rho)
    if spec.family == "gaussian":
        return _quad_moment(spec, weight)
    if spec.family == "power":
        if gamma > 0:
            raise MomentDivergesError(
                "tempered moments with gamma > 0 diverge for the power-tail family"
            )
        if n_alpha >= spec.gamma0:
            raise MomentDivergesError(
                f"power-tail tempered moment diverges: N+alpha = {n_alpha} >= "
                f"gamma0 = {spec.gamma0}"
            )
        return _quad_moment(spec, weight)
    if spec.family == "exptail":
        if gamma >= spec.gamma0:
            raise MomentDivergesError(
                f"tempered moment diverges at gamma = {gamma} >= gamma0 = {spec.gamma0}"
            )
        return _quad_moment(spec, weight)
    # tempered family
    if gamma > spec.gamma0:
        raise MomentDivergesError(
            f"tempered moment diverges at gamma = {gamma} > gamma0 = {spec.gamma0}"
        )
    if gamma == spec.gamma0:
        if alpha >= spec.alpha0:
            raise MomentDivergesError(
                f"tempered moment at the critical pair diverges: alpha = {alpha} "
                f">= alpha0 = {spec.alpha0}"
            )
        return 2.0 * normalizer(spec) / (spec.alpha0 - alpha)
    return _quad_moment(spec, weight)


def decay_class(spec: KernelSpec) -> Decay:
    """Slow kernels admit barrier lemmas; fast kernels have all exponential
    moments and are handled through heat-kernel estimates."""
    if spec.family in ("power", "exptail", "tempered"):
        return Decay.SLOW
    return Decay.FAST


def critical_exponents(spec: KernelSpec) -> tuple[float, float | None]:
    """(gamma0, alpha0); gamma0 = inf for compact/gaussian, alpha0 only for
    the tempered family. For the power family gamma0 is a moment exponent,
    for exptail/tempered an exponential-moment exponent."""
    if spec.family in ("uniform", "bump", "gaussian"):
        return math.inf, None
    if spec.family == "tempered":
        return spec.gamma0, spec.alpha0
    return spec.gamma0, None


@dataclass(frozen=True)
class MomentTable:
    """Even moments m_0, m_2, ..., plus how each was obtained.

    exact is True when values are Fractions (closed forms rational in the
    exact binary value of the parameter).
    """

    orders: tuple[int, ...]
    values: tuple
    methods: tuple[str, ...]
    exact: bool

    def get(self, order: int):
        try:
            return self.values[self.orders.index(order)]
        except ValueError:
            raise MomentTableError(f"moment of order {order} not in table") from None


def moment_table(spec: KernelSpec, max_order: int = 16) -> MomentTable:
    """Build the even-moment table up to max_order (inclusive).

    Uses exact rational closed forms for uniform/gaussian/exptail, floats
    (closed form or adaptive quadrature) otherwise. Divergent orders raise
    MomentDivergesError.
    """
    if not (isinstance(max_order, int) and max_order >= 0 and max_order % 2 == 0):
        raise ValueError("max_order must be a nonnegative even integer")
    orders = tuple(range(0, max_order + 1, 2))
    exact = spec.family in ("uniform", "gaussian", "exptail")
    values = []
    methods = []
    for k in orders:
        if exact:
            values.append(_moment_exact(spec, k) if k else Fraction(1))
            methods.append("closed-form")
        else:
            values.append(moment(spec, k))
            methods.append(
                "closed-form" if spec.family == "power" else "quadrature"
            )
    return MomentTable(orders, tuple(values), tuple(methods), exact)


def to_kv(spec: KernelSpec) -> str:
    """Flat key-value serialization, exact round-trip via repr floats.

    The gamma key carries gamma for the gaussian family and gamma0 for the
    heavy-tailed families (no family has both).
    """
    parts = [f"family={spec.family}"]
    if spec.rho is not None:
        parts.append(f"rho={spec.rho!r}")
    if spec.gamma is not None:
        parts.append(f"gamma={spec.gamma!r}")
    if spec.gamma0 is not None:
        parts.append(f"gamma={spec.gamma0!r}")
    if spec.alpha0 is not None:
        parts.append(f"alpha={spec.alpha0!r}")
    parts.append(f"N={spec.dim}")
    return " ".join(parts)


def from_kv(text: str) -> KernelSpec:
    fields: dict[str, str] = {}
    for token in text.split():
        key, _, value = token.partition("=")
        fields[key] = value
    family = fields["family"]
    kwargs = {}
    if "rho" in fields:
        kwargs["rho"] = float(fields["rho"])
    if "gamma" in fields:
        if family == "gaussian":
            kwargs["gamma"] = float(fields["gamma"])
        else:
            kwargs["gamma0"] = float(fields["gamma"])
    if "alpha" in fields:
        kwargs["alpha0"] = float(fields["alpha"])
    return KernelSpec(family, dim=int(fields.get("N", 1)), **kwargs)

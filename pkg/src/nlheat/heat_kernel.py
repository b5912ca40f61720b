"""Regular part of the nonlocal heat kernel.

The fundamental solution of u_t = J*u - u splits into an atom plus a
smooth part, e^{-t} delta + omega(x, t), with

    omega(x, t) = e^{-t} sum_{n>=1} t^n J*^n(x) / n!

Truncating at order K drops a tail whose sup norm is at most
||J||_inf e^{-t} (e^t t^K / K!) = ||J||_inf t^K / K!, since every power
satisfies ||J*^n||_inf <= ||J||_inf. All factorial arithmetic happens in
log space; naive doubles overflow around K = 170.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .convolution import IteratedConvolutions, convolve_fft, iterate, support_radius
from .errors import DomainTooSmallError, GridMismatchError
from .grid import Grid, GridFunction, integrate
from .kernels import KernelSpec

_ORDER_CAP = 2000


def _log_weight(n: int, t: float) -> float:
    # ln of e^{-t} t^n / n!
    if t == 0.0:
        return -math.inf
    return n * math.log(t) - math.lgamma(n + 1) - t


def truncation_order(t: float, tol: float, j_sup: float = 1.0) -> int:
    """Smallest K >= 1 with j_sup * t^K / K! <= tol."""
    if not (t >= 0 and math.isfinite(t)):
        raise ValueError("t must be finite and nonnegative")
    if not (tol > 0 and j_sup > 0):
        raise ValueError("tol and j_sup must be positive")
    if t == 0.0:
        return 1
    log_tol = math.log(tol) - math.log(j_sup)
    for k in range(1, _ORDER_CAP + 1):
        if k * math.log(t) - math.lgamma(k + 1) <= log_tol:
            return k
    raise ValueError(f"no order below {_ORDER_CAP} meets tol={tol} at t={t}")


@dataclass(frozen=True)
class OmegaExpansion:
    """Truncated series for omega(., t) with certified error accounting.

    remainder_bound controls the sup norm of the dropped tail;
    truncation_loss is the mass the convolution grid lost, weighted by the
    series coefficients. Together they bracket the mass identity
    integrate(omega) = 1 - e^{-t}.
    """

    grid: Grid
    t: float
    order: int
    function: GridFunction
    remainder_bound: float
    truncation_loss: float
    weights: tuple[float, ...]
    iterates: IteratedConvolutions

    @property
    def mass(self) -> float:
        return integrate(self.function)

    @property
    def mass_expected(self) -> float:
        return -math.expm1(-self.t)


def _resolve_order(t: float, tol: float, j_sup: float, min_order: int) -> int:
    k = truncation_order(t, tol, j_sup)
    # below t / j_sup the sup-norm bound no longer dominates the mass tail
    # t^{K+1}/(K+1)!, and the mass-identity invariant would be unverifiable
    k = max(k, math.ceil(t / j_sup), min_order, 1)
    return k


def omega(
    spec: KernelSpec,
    grid: Grid,
    t: float,
    tol: float = 1e-12,
    method: str = "fft",
    min_order: int = 1,
    loss_tol: float = 1e-9,
    iterates: IteratedConvolutions | None = None,
) -> OmegaExpansion:
    """Assemble omega_K(., t) = e^{-t} sum_{n=1}^K t^n J*^n / n!.

    High powers may legitimately spill past the grid: what matters is the
    series-weighted mass loss, so the per-power check inside iterate is
    disabled and the weighted total is policed against loss_tol instead.
    Pass a precomputed IteratedConvolutions (of sufficient order, on the
    same grid) to share kernel powers across several times.
    """
    if not (t >= 0 and math.isfinite(t)):
        raise ValueError("t must be finite and nonnegative")
    j = kernels.discretize(spec, grid)
    j_sup = float(j.values.max())
    k = _resolve_order(t, tol, j_sup, min_order)
    if iterates is not None:
        if iterates.grid != grid:
            raise GridMismatchError("iterates were computed on a different grid")
        if iterates.order < k:
            iterates = None
    if iterates is None:
        iterates = iterate(j, k, method=method, mass_tol=math.inf)
    weights = tuple(math.exp(_log_weight(n, t)) for n in range(1, k + 1))
    values = np.zeros(grid.point_count)
    loss = 0.0
    for n in range(1, k + 1):
        w = weights[n - 1]
        values += w * iterates.term(n).values
        loss += w * iterates.truncation_deficit(n)
    if loss > loss_tol:
        m2 = grid.spacing * float(np.dot(grid.nodes**2, j.values))
        suggested = 6.5 * math.sqrt(max(m2, grid.spacing**2) * k) + support_radius(
            j, 1e-14
        )
        raise DomainTooSmallError(
            f"series-weighted truncation loss {loss:.3e} exceeds {loss_tol:.1e} "
            f"at t={t}, K={k}; a half extent of about {suggested:.3g} should "
            f"suffice",
            min_half_extent=suggested,
        )
    remainder = math.exp(
        math.log(j_sup) + k * math.log(t) - math.lgamma(k + 1)
    ) if t > 0 else 0.0
    return OmegaExpansion(
        grid=grid,
        t=t,
        order=k,
        function=GridFunction(grid, values),
        remainder_bound=remainder,
        truncation_loss=loss,
        weights=weights,
        iterates=iterates,
    )


def omega_residual(
    spec: KernelSpec,
    grid: Grid,
    t: float,
    dt: float,
    tol: float = 1e-12,
    method: str = "fft",
) -> float:
    """Sup norm of the discrete PDE residual of omega at time t.

    Central difference in time against J*omega - omega + e^{-t} J,
    restricted to |x| <= L - support_radius(J): outside that collar the
    convolution is contaminated by zero extension. All three time slices
    share one set of kernel powers at a common order, so the truncation
    error is smooth in t and the residual scales as O(dt^2) + O(tol).
    """
    if not (t > dt > 0):
        raise ValueError("need t > dt > 0")
    j = kernels.discretize(spec, grid)
    j_sup = float(j.values.max())
    k = _resolve_order(t + dt, tol, j_sup, 1)
    # truncation cancels from the residual: the discrete powers satisfy
    # J*^{n+1} = J * J*^n exactly under the same grid operator
    iterates = iterate(j, k, method=method, mass_tol=math.inf)
    slices = {
        s: omega(spec, grid, s, tol=tol, min_order=k, iterates=iterates).function
        for s in (t - dt, t, t + dt)
    }
    dot = (slices[t + dt].values - slices[t - dt].values) / (2 * dt)
    rhs = (
        convolve_fft(slices[t], j).values
        - slices[t].values
        + math.exp(-t) * j.values
    )
    collar = grid.half_extent - support_radius(j, 1e-14)
    mask = np.abs(grid.nodes) <= collar
    if not np.any(mask):
        raise ValueError("grid too small: residual collar is empty")
    return float(np.max(np.abs(dot[mask] - rhs[mask])))


def order_for_range(
    spec: KernelSpec, x_max: float, t: float, rel_tol: float = 1e-9
) -> int:
    """Order making the series relatively accurate out to |x| = x_max.

    The global sup-norm criterion of truncation_order is useless in the
    far tail, where omega itself is far below tol: tail work (envelope
    fits, growth probes, lower bounds) needs every term that contributes
    at x_max. A per-family proxy for ln J*^n(x_max) locates the dominant
    term and the cutoff where later terms drop below rel_tol of it.
    """
    if not (x_max > 0 and t >= 0):
        raise ValueError("need x_max > 0 and t >= 0")
    if t == 0.0:
        return 1
    fam = spec.family
    if fam in ("uniform", "bump"):
        n_min = max(1, math.ceil(x_max / spec.rho))
        m2 = kernels.moment(spec, 2)
    elif fam == "gaussian":
        n_min = 1
        m2 = kernels.moment(spec, 2)
    else:
        # heavy tails: J*^n(x) ~ n J(x), so terms decay like n t^n / n!
        n_min, m2 = 1, None

    def log_term(n: int) -> float:
        base = _log_weight(n, t)
        if m2 is None:
            return base + math.log(n)
        if n < n_min:
            return -math.inf
        var = n * m2
        return base - x_max * x_max / (2 * var) - 0.5 * math.log(2 * math.pi * var)

    logs = [log_term(n) for n in range(1, _ORDER_CAP + 1)]
    peak = max(range(len(logs)), key=logs.__getitem__)
    cut = math.log(rel_tol) + logs[peak]
    for i in range(peak + 1, len(logs)):
        if logs[i] <= cut:
            return max(i + 3, n_min + 2)  # n = i + 1, plus margin
    raise ValueError(f"order cap {_ORDER_CAP} exceeded for x_max={x_max}, t={t}")

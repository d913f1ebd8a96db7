"""Shifted-and-scaled Chebyshev polynomial used to reason about Krylov
acceleration, with numerical verification of its defining properties.

The polynomial is p(x) = (1+gamma)*alpha * T_q(x/alpha) / T_q(1+gamma). Its
three defining properties:

  1. p((1+gamma)*alpha) = (1+gamma)*alpha
  2. p(x) >= x for all x >= (1+gamma)*alpha
  3. |p(x)| <= alpha / 2**(q*sqrt(gamma) - 1) on [0, alpha]

and, for odd q, p contains only odd-powered monomials. The iteration code
never evaluates p (its shift depends on unknown spectral quantities); this
module exists to verify the theory on grids and to feed diagnostic tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ShiftedChebyshev",
    "cheb_eval",
    "cheb_coefficients",
    "shifted_poly_eval",
    "verify_bounds",
    "BoundReport",
]


def cheb_eval(q, x):
    """First-kind Chebyshev polynomial T_q(x).

    Uses the three-term recurrence on [-1, 1] and the closed form
    ((x + sqrt(x^2-1))^q + (x - sqrt(x^2-1))^q) / 2 outside, where the
    recurrence would be the more expensive route and the closed form is
    exact and stable.
    """
    q = int(q)
    if q < 0:
        raise ValueError("degree must be nonnegative")
    x = float(x)
    if abs(x) <= 1.0:
        if q == 0:
            return 1.0
        t_prev, t_cur = 1.0, x
        for _ in range(q - 1):
            t_prev, t_cur = t_cur, 2.0 * x * t_cur - t_prev
        return t_cur
    sign = 1.0
    if x < 0.0:
        # T_q(-x) = (-1)^q T_q(x)
        x = -x
        sign = -1.0 if q % 2 else 1.0
    s = math.sqrt(x * x - 1.0)
    return sign * 0.5 * ((x + s) ** q + (x - s) ** q)


def cheb_coefficients(q):
    """Monomial coefficients of T_q as exact integers, lowest degree first."""
    q = int(q)
    if q < 0:
        raise ValueError("degree must be nonnegative")
    if q == 0:
        return [1]
    prev = [1]
    cur = [0, 1]
    for _ in range(q - 1):
        nxt = [0] + [2 * c for c in cur]
        for i, c in enumerate(prev):
            nxt[i] -= c
        prev, cur = cur, nxt
    return cur


@dataclass(frozen=True)
class ShiftedChebyshev:
    """The degree-q polynomial (1+gamma)*alpha * T_q(x/alpha) / T_q(1+gamma)."""

    alpha: float
    gamma: float
    q: int

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must be in (0, 1]")
        if int(self.q) < 1:
            raise ValueError("q must be at least 1")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "q", int(self.q))

    @property
    def scale(self):
        """T_q(1+gamma), always computed via the closed form."""
        return cheb_eval(self.q, 1.0 + self.gamma)

    def __call__(self, x):
        return (1.0 + self.gamma) * self.alpha * cheb_eval(self.q, x / self.alpha) / self.scale

    @property
    def tail_bound(self):
        """alpha / 2**(q*sqrt(gamma) - 1), the proven ceiling on [0, alpha]."""
        return self.alpha / 2.0 ** (self.q * math.sqrt(self.gamma) - 1.0)


def shifted_poly_eval(p, x):
    """Evaluate a ShiftedChebyshev at x."""
    return p(x)


@dataclass(frozen=True)
class BoundReport:
    """Grid verification outcome for one ShiftedChebyshev.

    ``worst`` entries record the largest violation observed (negative or
    zero means the property held with margin). ``odd_symmetry_ok`` is None
    when q is even and the check does not apply.
    """

    fixed_point_ok: bool
    fixed_point_err: float
    growth_ok: bool
    growth_worst: float
    tail_ok: bool
    tail_worst: float
    tail_bound: float
    odd_symmetry_ok: bool | None
    odd_symmetry_err: float | None
    grid_points: int

    @property
    def passed(self):
        checks = [self.fixed_point_ok, self.growth_ok, self.tail_ok]
        if self.odd_symmetry_ok is not None:
            checks.append(self.odd_symmetry_ok)
        return all(checks)


def verify_bounds(p, grid_points=10001):
    """Check the three polynomial properties on documented grids.

    Property 1 at the fixed point exactly; property 2 on a log-spaced grid
    over [(1+gamma)*alpha, 100*alpha]; property 3 on a uniform grid over
    [0, alpha]. For odd q the odd-symmetry identity p(-x) = -p(x) is checked
    on the union of both grids.
    """
    grid_points = int(grid_points)
    if grid_points < 100:
        raise ValueError("grid_points must be at least 100")
    a, g, q = p.alpha, p.gamma, p.q

    edge = (1.0 + g) * a
    err1 = abs(p(edge) - edge) / edge
    fixed_ok = err1 < 1e-10

    hi_grid = np.geomspace(edge, 100.0 * a, grid_points)
    hi_grid[0] = edge
    growth_worst = -math.inf
    for x in hi_grid:
        # violation when p(x) < x beyond rounding
        viol = (x - p(x)) / x
        growth_worst = max(growth_worst, viol)
    growth_ok = growth_worst <= 1e-12

    lo_grid = np.linspace(0.0, a, grid_points)
    bound = p.tail_bound
    tail_worst = -math.inf
    for x in lo_grid:
        tail_worst = max(tail_worst, abs(p(x)) - bound)
    tail_ok = tail_worst <= 0.0

    odd_ok = None
    odd_err = None
    if q % 2 == 1:
        odd_err = 0.0
        for x in np.concatenate([lo_grid[1:], hi_grid]):
            lhs = p(-x)
            rhs = -p(x)
            denom = max(abs(rhs), 1e-300)
            odd_err = max(odd_err, abs(lhs - rhs) / denom)
        odd_ok = odd_err < 1e-10

    return BoundReport(
        fixed_point_ok=bool(fixed_ok),
        fixed_point_err=float(err1),
        growth_ok=bool(growth_ok),
        growth_worst=float(growth_worst),
        tail_ok=bool(tail_ok),
        tail_worst=float(tail_worst),
        tail_bound=float(bound),
        odd_symmetry_ok=None if odd_ok is None else bool(odd_ok),
        odd_symmetry_err=None if odd_err is None else float(odd_err),
        grid_points=grid_points,
    )

"""Critical times and the related scalar constants.

The critical time t* of a vertex pair is the root of m(v, w, t) = 1.  For
v != w the map t -> m(v, w, t) is strictly increasing wherever a path
exists (all series coefficients are nonnegative, at least one positive),
so bisection with a doubling bracket gives a simple certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import UnreachableError
from .genfun import m_eval
from .graphs import BaseGraph, VertexId


@dataclass(frozen=True)
class CriticalTime:
    t_star: float
    abs_err: float
    reachable: bool = True

    def __float__(self):
        return self.t_star


def critical_time(g: BaseGraph, v: VertexId, w: VertexId,
                  tol: float = 1e-10) -> CriticalTime:
    """Solve m(v, w, t) = 1 by bisection to within ``tol``.

    Raises UnreachableError when no path from v to w exists within the
    search horizon, which corresponds to an infinite critical time.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    g.check_vertex(v)
    g.check_vertex(w)
    if v == w:
        return CriticalTime(0.0, 0.0, True)
    if not g.reachable(v, w):
        raise UnreachableError(f"no path from {v!r} to {w!r}")
    # m-evaluation an order tighter than the bracket so the root error is
    # dominated by bisection width
    m_tol = tol / 10.0
    hi = 1.0
    while m_eval(g, v, w, hi, m_tol).value <= 1.0:
        hi *= 2.0
        if hi > 2.0 ** 60:
            raise UnreachableError(f"m({v!r}, {w!r}, t) never reaches 1")
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if m_eval(g, v, w, mid, m_tol).value < 1.0:
            lo = mid
        else:
            hi = mid
    return CriticalTime(0.5 * (lo + hi), 0.5 * (hi - lo), True)


def solve_alpha_star(tol: float = 1e-12) -> float:
    """The unique positive root of coth(alpha) = alpha, near 1.19968."""
    if tol <= 0:
        raise ValueError("tol must be > 0")
    f = lambda a: 1.0 / math.tanh(a) - a
    lo, hi = 1.0 + 1e-9, 2.0
    # f(lo) > 0 (coth blows up toward 1), f(hi) < 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def diagonal_time_constant(rho: float = 1.0, tol: float = 1e-12) -> float:
    """High-dimensional diagonal time constant (1/(2 rho)) sqrt(alpha*^2 - 1).

    ``rho`` is the weight distribution's density at zero; 1 for Exp(1).
    """
    if rho <= 0:
        raise ValueError("rho must be > 0")
    a = solve_alpha_star(tol)
    return math.sqrt(a * a - 1.0) / (2.0 * rho)


def solve_theta(x: float, tol: float = 1e-12) -> float:
    """Nonnegative root of (sinh h)^x (cosh h)^(1-x) = 1 for x in [0, 1].

    This is the limiting first-passage time between hypercube vertices
    whose Hamming distance is the fraction x of the dimension.  It is 0 at
    x = 0 and increases to ln(1 + sqrt 2) at x = 1.
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must be in [0, 1]")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    if x == 0.0:
        return 0.0
    # strictly increasing in h, negative near 0+, positive at h = 1
    f = lambda h: x * math.log(math.sinh(h)) + (1.0 - x) * math.log(math.cosh(h))
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def directed_chain_ratio(k: int) -> float:
    """t*/k for the endpoints 0, k of the directed chain: (k!)^(1/k) / k.

    The single length-k path gives m(0, k, t) = t^k/k! exactly, so the
    critical time is (k!)^(1/k).  The ratio decreases toward 1/e.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    return math.exp(math.lgamma(k + 1) / k) / k

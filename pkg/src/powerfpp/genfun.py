"""Path-generating function of a base graph, with certified error bounds.

For vertices v, w the generating function at time t sums, over every walk
from v to w, the product of its edge intensities times t^length/length!.
It equals the (v, w) entry of the matrix exponential of the weighted
adjacency operator and is evaluated here by truncated exponential series.

Truncation is certified: intensity-weighted counts of length-j walks from
a fixed vertex are at most delta_out^j, so the omitted tail beyond order N
is at most (delta_out*t)^(N+1)/(N+1)! * exp(delta_out*t).  Every returned
value carries that bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import TolUnreachableError
from .graphs import BaseGraph, VertexId

SERIES_ORDER_CAP = 10_000
DEFAULT_SCALAR_TOL = 1e-12
DEFAULT_ROW_TOL = 1e-10


@dataclass(frozen=True)
class CertifiedValue:
    """A float plus a rigorous absolute error bound."""

    value: float
    abs_err: float

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class SeriesPlan:
    """Chosen truncation order and its certified tail bound."""

    order: int
    tail_bound: float


def series_plan(rate_times_t: float, tol: float,
                cap: int = SERIES_ORDER_CAP) -> SeriesPlan:
    """Smallest order N whose tail bound is at most ``tol``.

    The bound is (x)^(N+1)/(N+1)! * e^x with x = delta_out * t, evaluated
    in log space so large x cannot overflow.
    """
    x = rate_times_t
    if x <= 0.0:
        return SeriesPlan(0, 0.0)
    log_tol = math.log(tol)
    lx = math.log(x)
    for n in range(cap + 1):
        log_tail = (n + 1) * lx - math.lgamma(n + 2) + x
        if log_tail <= log_tol:
            return SeriesPlan(n, math.exp(log_tail))
    raise TolUnreachableError(
        f"series order cap {cap} insufficient for rate*t={x:.3g}, tol={tol:.3g}")


def _kahan_add(total, comp, term):
    y = term - comp
    s = total + y
    comp = (s - total) - y
    return s, comp


# --- finite graphs: dense matrix series ----------------------------------

def matrix_series(g: BaseGraph, t: float, tol: float = DEFAULT_SCALAR_TOL):
    """All-pairs generating function matrix for a finite graph.

    Returns (M, entry_err) where every entry of M is within entry_err of
    the true value.  Results are cached on the graph; the matrix must not
    be mutated by callers.
    """
    key = ("mat", t, tol)
    hit = g._caches.get(key)
    if hit is not None:
        return hit
    plan = series_plan(g.delta_out * t, tol)
    A = g.adjacency
    n = A.shape[0]
    M = np.eye(n)
    comp = np.zeros((n, n))
    term = np.eye(n)
    for j in range(1, plan.order + 1):
        term = (term @ A) * (t / j)
        # compensated accumulation keeps rounding below the certified tail
        y = term - comp
        s = M + y
        comp = (s - M) - y
        M = s
    out = (M, plan.tail_bound)
    if len(g._caches) > 200_000:
        g._caches.clear()
    g._caches[key] = out
    return out


# --- oracle graphs: sparse vector iteration -------------------------------

def _vector_series(g: BaseGraph, v: VertexId, t: float, tol: float,
                   direction: str):
    """Dict of generating-function values from (or to) ``v`` on any graph.

    Walks of length <= N from v stay within graph distance N, so the
    iteration is automatically confined to the relevant ball.
    """
    rate = g.delta_out if direction == "out" else g.delta_in
    plan = series_plan(rate * t, tol)
    step = g.out_edges if direction == "out" else g.in_edges
    u = {v: 1.0}
    totals = {v: 1.0}
    comps = {v: 0.0}
    coeff = 1.0
    for j in range(1, plan.order + 1):
        nxt: dict = {}
        for x, ux in u.items():
            for y, lam in step(x):
                nxt[y] = nxt.get(y, 0.0) + lam * ux
        u = nxt
        coeff *= t / j
        for y, uy in u.items():
            tot, comp = totals.get(y, 0.0), comps.get(y, 0.0)
            tot, comp = _kahan_add(tot, comp, uy * coeff)
            totals[y] = tot
            comps[y] = comp
    return totals, plan


@dataclass
class MRow:
    """One row (or column) of the generating function.

    ``entries`` maps each vertex seen within the certified ball to a
    CertifiedValue; ``omitted_mass`` bounds the total weight of all walks
    not accounted for, including those ending outside the ball; ``order``
    is the series truncation order (also the ball radius used).
    """

    entries: dict
    omitted_mass: float
    order: int

    def __getitem__(self, v):
        return self.entries[v]

    def get(self, v, default=None):
        return self.entries.get(v, default)


def m_eval(g: BaseGraph, v: VertexId, w: VertexId, t: float,
           tol: float = DEFAULT_SCALAR_TOL) -> CertifiedValue:
    """Generating function m(v, w, t) with certified absolute error <= tol."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    g.check_vertex(v)
    g.check_vertex(w)
    if t == 0.0:
        return CertifiedValue(1.0 if v == w else 0.0, 0.0)
    if g.is_finite:
        M, err = matrix_series(g, t, tol)
        return CertifiedValue(float(M[g.index[v], g.index[w]]), err)
    totals, plan = _vector_series(g, v, t, tol, "out")
    return CertifiedValue(totals.get(w, 0.0), plan.tail_bound)


def m_row(g: BaseGraph, v: VertexId, t: float, tol: float = DEFAULT_ROW_TOL,
          direction: str = "out") -> MRow:
    """All values m(v, x, t) (direction "out") or m(x, v, t) ("in").

    Each entry's absolute error is at most ``tol``; so is the certified
    bound on the total mass missing from the row.
    """
    if direction not in ("out", "in"):
        raise ValueError("direction must be 'out' or 'in'")
    g.check_vertex(v)
    if g.is_finite:
        M, err = matrix_series(g, t, tol)
        i = g.index[v]
        vec = M[i, :] if direction == "out" else M[:, i]
        entries = {x: CertifiedValue(float(vec[j]), err)
                   for j, x in enumerate(g.vertices)}
        plan = series_plan(g.delta_out * t, tol)
        return MRow(entries, plan.tail_bound, plan.order)
    totals, plan = _vector_series(g, v, t, tol, direction)
    entries = {x: CertifiedValue(val, plan.tail_bound)
               for x, val in totals.items()}
    return MRow(entries, plan.tail_bound, plan.order)


# --- closed forms ----------------------------------------------------------

def bessel_i(k: int, x: float) -> float:
    """Modified Bessel function I_k(x) by its own convergent series."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if x == 0.0:
        return 1.0 if k == 0 else 0.0
    half = x / 2.0
    # log-space start avoids overflow in half**k / k!
    log_term = k * math.log(half) - math.lgamma(k + 1)
    term = math.exp(log_term)
    total, comp = 0.0, 0.0
    i = 0
    while True:
        total, comp = _kahan_add(total, comp, term)
        term *= half * half / ((i + 1) * (k + i + 1))
        i += 1
        if term < 1e-18 * max(total, 1.0):
            total, comp = _kahan_add(total, comp, term)
            return total


def closed_form_m(family: str, t: float, *, q: Optional[int] = None,
                  k: Optional[int] = None, l: Optional[int] = None,
                  lam: Optional[float] = None) -> float:
    """Closed-form generating-function values for the special graphs.

    family:
      "K2"              antipodal pair of K_2: sinh t
      "Kq"              vertices 0,1 of K_q: (e^((q-1)t) - e^(-t)) / q
      "Zchain"          0 to k on the undirected chain: I_k(2t)
      "DirectedEdge"    the single directed edge: t
      "CalibratedChain" endpoints of the l-step directed chain with
                        uniform intensity lam: lam^l t^l / l!
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if family == "K2":
        return math.sinh(t)
    if family == "Kq":
        if q is None or q < 2:
            raise ValueError("Kq needs q >= 2")
        return (math.exp((q - 1) * t) - math.exp(-t)) / q
    if family == "Zchain":
        if k is None or k < 0:
            raise ValueError("Zchain needs k >= 0")
        return bessel_i(k, 2.0 * t)
    if family == "DirectedEdge":
        return t
    if family == "CalibratedChain":
        if l is None or l < 1 or lam is None:
            raise ValueError("CalibratedChain needs l >= 1 and lam")
        return math.exp(l * math.log(lam * t) - math.lgamma(l + 1)) if t > 0 else 0.0
    raise ValueError(f"unknown closed form family {family!r}")

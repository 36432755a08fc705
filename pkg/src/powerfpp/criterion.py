"""Sharpness criterion for the power-graph first-passage limit.

For a pair v, w with critical time t*, the criterion function

    f(s, t) = sum over x, y of m(v,x,s) m(x,y,t) m(y,w,t*-s-t) ln m(x,y,t)

on the triangle {s, t >= 0, s + t <= t*} decides whether the first-passage
time between n-fold repeated endpoints converges to t*: it does exactly
when f <= 0 everywhere.  Terms 0 ln 0 count as 0.  A positive value
yields, via the tilted sum with the middle factor raised to 1 - alpha, a
certified margin c > 0 by which the limit exceeds t*.

Everything here is certified: each evaluation carries a rigorous error
bound assembled from the series tails of its factors, and the returned
classification records the evidence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations
from typing import Optional

import numpy as np

from .critical import CriticalTime, critical_time
from .errors import NoMarginError, TooLargeError
from .genfun import CertifiedValue, m_row, matrix_series
from .graphs import BaseGraph, VertexId

POSITIVE = "POSITIVE"
NONPOSITIVE = "NONPOSITIVE"
UNDECIDED = "UNDECIDED"

_INV_E = math.exp(-1.0)


def _abs_xlnx_max(hi: float) -> float:
    """max of u*|ln u| over [0, hi]."""
    if hi <= 0.0:
        return 0.0
    if hi <= _INV_E:
        return -hi * math.log(hi)
    if hi <= 1.0:
        return _INV_E
    return max(_INV_E, hi * math.log(hi))


@dataclass(frozen=True)
class MarginCertificate:
    """Certificate that the tilted sum stays below one on a u-interval.

    At the point (s, t), the sum with middle exponent 1 - alpha is
    certified < 1 for every u in [t* - s - t, t* - s - t + c]; since the
    sum is nondecreasing in u, the endpoint check suffices.
    """

    s: float
    t: float
    alpha: float
    c: float
    max_tilted_sum: float


@dataclass
class CriterionReport:
    classification: str
    sup_value: float
    sup_err: float
    argmax: tuple
    grid_stats: dict
    t_star: float
    v: VertexId = None
    w: VertexId = None
    graph: str = ""
    decision_eps: float = 1e-6
    margin: Optional[MarginCertificate] = None
    points: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        d = {
            "classification": self.classification,
            "sup_value": self.sup_value,
            "sup_err": self.sup_err,
            "argmax": {"s": self.argmax[0], "t": self.argmax[1]},
            "t_star": self.t_star,
            "v": self.v,
            "w": self.w,
            "graph": self.graph,
            "decision_eps": self.decision_eps,
            "grid_stats": self.grid_stats,
        }
        if self.margin is not None:
            d["margin"] = {
                "s": self.margin.s, "t": self.margin.t,
                "alpha": self.margin.alpha, "c": self.margin.c,
                "max_tilted_sum": self.margin.max_tilted_sum,
            }
        return d


# --- pointwise evaluation --------------------------------------------------


def _f_from_parts(a, ea, B, eb, c, ec):
    """Certified sum of a_x * B_xy ln(B_xy) * c_y over all x, y.

    Inputs are nonnegative vectors/matrix with uniform per-entry error
    bounds.  Entries whose certified interval includes 0 contribute 0 to
    the value and the worst |u ln u| over the interval to the error.
    """
    B = np.maximum(B, 0.0)
    a = np.maximum(a, 0.0)
    c = np.maximum(c, 0.0)
    safe = B - eb > 0.0
    Bs = np.where(safe, B, 1.0)
    lnB = np.log(Bs)
    g = np.where(safe, Bs * lnB, 0.0)
    value = float(a @ g @ c)

    a_hi = a + ea
    c_hi = c + ec
    outer_hi = np.outer(a_hi, c_hi)
    # safe entries: |d(u ln u)/du| = |1 + ln u| maximized at an interval end
    lo = np.where(safe, np.maximum(B - eb, 1e-300), 1.0)
    hi = B + eb
    m1 = np.maximum(np.abs(1.0 + np.log(lo)), np.abs(1.0 + np.log(np.maximum(hi, 1e-300))))
    err_safe = np.where(safe, outer_hi * m1 * eb + np.abs(g) * (outer_hi - np.outer(a, c)), 0.0)
    # entries straddling 0: whole term clamped, bound |u ln u| on [0, B+eb]
    gcap = np.vectorize(_abs_xlnx_max)(np.where(safe, 0.0, hi)) if not safe.all() else 0.0
    err_unsafe = np.where(safe, 0.0, outer_hi * gcap)
    err = float(np.sum(err_safe) + np.sum(err_unsafe))
    return value, err


def f_eval(g: BaseGraph, v: VertexId, w: VertexId, t_star: float,
           s: float, t: float, m_tol: float = 1e-12,
           t_err: float = 0.0, u_err: float = 0.0) -> CertifiedValue:
    """Certified evaluation of the criterion function at one point.

    ``t_err`` and ``u_err`` declare uncertainty in the middle time and in
    t* - s - t (e.g. the bisection width of t*).  They widen the factor
    error bounds via the entrywise derivative caps |dm/dt| <= d_o e^(d_o t),
    so the returned interval covers the true point.
    """
    ts = float(t_star)
    u = ts - s - t
    if s < 0 or t < 0 or u < -1e-12:
        raise ValueError("need s, t >= 0 and s + t <= t_star")
    u = max(u, 0.0)
    eb_extra = g.delta_out * math.exp(g.delta_out * t) * t_err
    ec_extra = g.delta_out * math.exp(g.delta_out * u) * u_err
    if g.is_finite:
        Ms, es = matrix_series(g, s, m_tol)
        Mt, et = matrix_series(g, t, m_tol)
        Mu, eu = matrix_series(g, u, m_tol)
        iv, iw = g.index[v], g.index[w]
        value, err = _f_from_parts(Ms[iv, :], es, Mt, et + eb_extra,
                                   Mu[:, iw], eu + ec_extra)
    else:
        value, err = _f_oracle(g, v, w, s, t, u, m_tol, eb_extra, ec_extra)
    return CertifiedValue(value, err)


def _f_oracle(g: BaseGraph, v, w, s, t, u, m_tol, eb_extra=0.0, ec_extra=0.0):
    """Ball-restricted evaluation with an explicit tail bound (infinite graphs)."""
    row = m_row(g, v, s, m_tol, "out")
    col = m_row(g, w, u, m_tol, "in")
    gln_cap = _abs_xlnx_max(math.exp(g.delta_out * t))
    col_mass_cap = math.exp(g.delta_in * u)
    row_mass_cap = math.exp(g.delta_out * s)
    value = 0.0
    err = row.omitted_mass * gln_cap * col_mass_cap \
        + row_mass_cap * gln_cap * col.omitted_mass
    for x, ax in row.entries.items():
        mid = m_row(g, x, t, m_tol, "out")
        err += (ax.value + ax.abs_err) * _abs_xlnx_max(mid.omitted_mass) * col_mass_cap
        for y, cy in col.entries.items():
            b = mid.get(y)
            bv = max(b.value, 0.0) if b is not None else 0.0
            eb = (b.abs_err if b is not None else mid.omitted_mass) + eb_extra
            av, cv = max(ax.value, 0.0), max(cy.value, 0.0)
            hi_ac = (av + ax.abs_err) * (cv + cy.abs_err + ec_extra)
            if bv - eb > 0.0:
                gval = bv * math.log(bv)
                m1 = max(abs(1.0 + math.log(bv - eb)), abs(1.0 + math.log(bv + eb)))
                value += av * gval * cv
                err += hi_ac * m1 * eb + abs(gval) * (hi_ac - av * cv)
            else:
                err += hi_ac * _abs_xlnx_max(bv + eb)
    return value, err


def tilted_sum(g: BaseGraph, v: VertexId, w: VertexId, s: float, t: float,
               u: float, alpha: float, m_tol: float = 1e-12) -> CertifiedValue:
    """Certified sum of m(v,x,s) m(x,y,t)^(1+alpha) m(y,w,u).

    At alpha = 0 and u = t* - s - t this collapses by convolution to
    m(v, w, t*) = 1; its alpha-derivative at 0 is the criterion function.
    """
    if min(s, t, u) < 0:
        raise ValueError("need s, t, u >= 0")
    if alpha <= -1:
        raise ValueError("alpha must exceed -1")
    if not g.is_finite:
        raise TooLargeError("tilted_sum supports finite graphs")
    Ms, ea = matrix_series(g, s, m_tol)
    Mt, eb = matrix_series(g, t, m_tol)
    Mu, ec = matrix_series(g, u, m_tol)
    iv, iw = g.index[v], g.index[w]
    a = np.maximum(Ms[iv, :], 0.0)
    B = np.maximum(Mt, 0.0)
    c = np.maximum(Mu[:, iw], 0.0)
    p = 1.0 + alpha
    G = B ** p
    value = float(a @ G @ c)
    a_hi, c_hi = a + ea, c + ec
    outer_hi = np.outer(a_hi, c_hi)
    safe = B - eb > 0.0
    lo = np.where(safe, np.maximum(B - eb, 1e-300), 1.0)
    hi = B + eb
    # derivative p*xi^alpha is monotone in xi; take the worse interval end
    deriv = p * np.maximum(lo ** alpha, hi ** alpha)
    err_g = np.where(safe, deriv * eb, hi ** p)
    err = float(np.sum(outer_hi * err_g + G * (outer_hi - np.outer(a, c))))
    return CertifiedValue(value, err)


# --- global classification ---------------------------------------------------


def sup_f_classify(g: BaseGraph, v: VertexId, w: VertexId,
                   t_star: Optional[CriticalTime] = None, grid: int = 24,
                   max_depth: int = 12, decision_eps: float = 1e-6,
                   m_tol: float = 1e-12) -> CriterionReport:
    """Classify the sign of sup f over its triangular domain.

    A coarse lattice pass is followed by adaptive refinement of the cell
    holding the running maximum together with the frontier of cells along
    the domain boundary with t above 0.9 t*, where the known positive
    maxima concentrate.  POSITIVE and NONPOSITIVE are certified up to the
    evaluated points; NONPOSITIVE is a numerical verdict on those points,
    not a proof over the continuum.
    """
    if t_star is None:
        t_star = critical_time(g, v, w, tol=1e-12)
    ts = float(t_star)
    terr = t_star.abs_err if isinstance(t_star, CriticalTime) else 0.0

    evals: dict = {}

    def ev(s, t):
        s = min(max(s, 0.0), ts)
        t = min(max(t, 0.0), ts - s)
        key = (s, t)
        if key not in evals:
            evals[key] = f_eval(g, v, w, ts, s, t, m_tol=m_tol, u_err=terr)
        return key, evals[key]

    h = ts / grid
    for i in range(grid + 1):
        for j in range(grid + 1 - i):
            ev(i * h, j * h)

    cells = [(i * h, j * h, h) for i in range(grid) for j in range(grid)
             if (i + j) * h < ts - 1e-15]

    def cell_points(s0, t0, size):
        pts = [(s0, t0), (s0 + size, t0), (s0, t0 + size), (s0 + size, t0 + size),
               (s0 + 0.5 * size, t0 + 0.5 * size)]
        return [ev(s, t) for s, t in pts]

    def best_point():
        return max(evals.items(), key=lambda kv: kv[1].value)

    depth = 0
    for depth in range(1, max_depth + 1):
        (bs, bt), _ = best_point()
        to_split = []
        rest = []
        for (s0, t0, size) in cells:
            in_band = (t0 + size > 0.9 * ts) and (s0 == 0.0 or s0 + t0 + 2 * size > ts)
            holds_max = (s0 <= bs <= s0 + size) and (t0 <= bt <= t0 + size)
            (to_split if in_band or holds_max else rest).append((s0, t0, size))
        for (s0, t0, size) in to_split:
            half = 0.5 * size
            for ds in (0.0, half):
                for dt in (0.0, half):
                    cs, ct = s0 + ds, t0 + dt
                    if cs + ct < ts - 1e-15:
                        rest.append((cs, ct, half))
                        cell_points(cs, ct, half)
        cells = rest

    (bs, bt), bv = best_point()
    max_upper = max(cv.value + cv.abs_err for cv in evals.values())
    if bv.value - bv.abs_err > decision_eps:
        cls = POSITIVE
    elif max_upper <= decision_eps:
        cls = NONPOSITIVE
    else:
        cls = UNDECIDED
    pts = sorted((s, t, cv.value, cv.abs_err) for (s, t), cv in evals.items())
    return CriterionReport(
        classification=cls, sup_value=bv.value, sup_err=bv.abs_err,
        argmax=(bs, bt),
        grid_stats={"evaluations": len(evals), "grid": grid,
                    "max_depth": max_depth, "depth_reached": depth},
        t_star=ts, v=v, w=w, graph=g.name, decision_eps=decision_eps,
        points=pts)


DEFAULT_ALPHA_GRID = (0.5, 0.3, 0.2, 0.1, 0.05, 0.03, 0.02, 0.015, 0.01,
                      0.007, 0.005, 0.003, 0.002, 0.001)


def not_sharp_margin(g: BaseGraph, v: VertexId, w: VertexId,
                     report: CriterionReport, alpha_grid=DEFAULT_ALPHA_GRID,
                     m_tol: float = 1e-12) -> MarginCertificate:
    """Extract a certified margin c > 0 from a POSITIVE classification.

    At the report's argmax, scan the tilt exponents for one that brings
    the certified tilted sum below 1 at u = t* - s - t, then push u upward
    (the sum is nondecreasing in u) until it reaches 1.  The best
    extension length over the grid is returned.
    """
    if report.classification != POSITIVE:
        raise ValueError("margin extraction requires a POSITIVE report")
    s, t = report.argmax
    ts = report.t_star
    u0 = max(ts - s - t, 0.0)
    best = None
    for alpha in alpha_grid:
        s0 = tilted_sum(g, v, w, s, t, u0, -alpha, m_tol)
        if s0.value + s0.abs_err >= 1.0:
            continue
        lo, hi = u0, u0 + ts
        top = tilted_sum(g, v, w, s, t, hi, -alpha, m_tol)
        if top.value + top.abs_err < 1.0:
            lo, cert = hi, top
        else:
            cert = s0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                sm = tilted_sum(g, v, w, s, t, mid, -alpha, m_tol)
                if sm.value + sm.abs_err < 1.0:
                    lo, cert = mid, sm
                else:
                    hi = mid
        c = lo - u0
        if c > 0.0 and (best is None or c > best.c):
            best = MarginCertificate(s=s, t=t, alpha=alpha, c=c,
                                     max_tilted_sum=cert.value + cert.abs_err)
    if best is None:
        raise NoMarginError("no alpha in the grid certifies a sum below 1")
    return best


# --- symmetry condition --------------------------------------------------------


def automorphisms(g: BaseGraph, max_vertices: int = 8) -> list[dict]:
    """All weighted-adjacency-preserving vertex bijections, brute force."""
    if not g.is_finite:
        raise TooLargeError("automorphism search needs a finite graph")
    n = g.num_vertices()
    if n > max_vertices:
        raise TooLargeError(f"|V| = {n} exceeds max_vertices = {max_vertices}")
    A = g.adjacency
    autos = []
    for perm in permutations(range(n)):
        p = np.array(perm)
        if np.allclose(A[np.ix_(p, p)], A, rtol=0.0, atol=1e-12):
            autos.append({g.vertices[i]: g.vertices[perm[i]] for i in range(n)})
    return autos


def symmetry_condition(g: BaseGraph, v: VertexId, w: VertexId,
                       max_vertices: int = 8) -> Optional[dict]:
    """Search for a permutation certifying that f is nonpositive.

    Looks for sigma with (v, x) ~ (sigma(x), w) and (x, w) ~ (v, sigma(x))
    for every vertex x, where ~ is simultaneous equivalence of ordered
    pairs under some automorphism.  Returns a witness mapping or None.
    Existence implies f(s, t) is independent of s and convex in t, hence
    nonpositive.
    """
    if not g.is_finite:
        raise TooLargeError("symmetry check needs a finite graph")
    n = g.num_vertices()
    if n > max_vertices:
        raise TooLargeError(f"|V| = {n} exceeds max_vertices = {max_vertices}")
    autos = automorphisms(g, max_vertices)
    idx = g.index
    # orbit id for each ordered pair under the automorphism group
    orbit = {}
    for a in range(n):
        for b in range(n):
            if (a, b) in orbit:
                continue
            members = {(idx[phi[g.vertices[a]]], idx[phi[g.vertices[b]]])
                       for phi in autos}
            rep = min(members)
            for mgr in members:
                orbit[mgr] = rep
    iv, iw = idx[v], idx[w]
    for perm in permutations(range(n)):
        if all(orbit[(iv, x)] == orbit[(perm[x], iw)]
               and orbit[(x, iw)] == orbit[(iv, perm[x])]
               for x in range(n)):
            return {g.vertices[x]: g.vertices[perm[x]] for x in range(n)}
    return None

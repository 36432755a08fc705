"""Exact sampling of the endpoint-conditioned random walk.

The walk is the rate-delta_out uniformized walk on a graph, run for time
t* and conditioned to end at w.  Its path law is explicit: a path gamma
is traced with probability (prod of edge intensities) t*^|gamma|/|gamma|!,
and given the path, jump times are distributed as sorted uniforms on
(0, t*).  That makes exact sampling a three-step procedure: draw the jump
count from its explicit law, unroll the path backward-count by backward
count, then sort uniforms.

Power-graph walks are merged tuples of independent base walks, one per
coordinate.  On top of the samplers sit Monte Carlo estimators for the
criterion function, the self-avoidance probability, and a certified
lower-bound functional for the probability that the first-passage time
beats t*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import TolUnreachableError, UnreachableError
from .genfun import m_eval, series_plan
from .graphs import BaseGraph, VertexId, ball


@dataclass
class WalkSample:
    """One realization: vertices[0..L], strictly increasing jump_times in
    (0, t*), and for power walks the coordinate touched by each jump."""

    vertices: list
    jump_times: np.ndarray
    coordinates: Optional[list] = None

    @property
    def num_jumps(self) -> int:
        return len(self.jump_times)

    def vertex_at(self, time: float):
        """State at a given time (right-continuous)."""
        return self.vertices[int(np.searchsorted(self.jump_times, time, side="right"))]


@dataclass
class JumpLengthLaw:
    """P(L = l) proportional to (weighted l-step path count) t*^l / l!.

    At t = t* the normalizer m(v, w, t*) equals 1, so the probabilities
    are the raw terms; ``tail_mass`` bounds everything beyond l_max.
    """

    lengths: np.ndarray
    probabilities: np.ndarray
    tail_mass: float


class ConditionedWalkSampler:
    """Sampler for the conditioned walk from v to w in time t_star.

    Precomputes backward weighted path counts toward w up to the length
    where the certified tail of the jump-count law drops below
    ``tail_tol``; infinite graphs are reduced to the ball around v that
    contains every path of that length.
    """

    def __init__(self, g: BaseGraph, v: VertexId, w: VertexId, t_star: float,
                 tail_tol: float = 1e-9):
        if t_star <= 0:
            raise ValueError("t_star must be > 0 (v != w)")
        g.check_vertex(v)
        g.check_vertex(w)
        plan = series_plan(g.delta_out * t_star, tail_tol)
        self.l_max = plan.order
        if not g.is_finite:
            g = ball(g, v, self.l_max)
        self.g = g
        self.v, self.w, self.t_star = v, w, t_star
        n = g.num_vertices()
        iv, iw = g.index[v], g.index[w]
        A = g.adjacency
        # counts[j][x] = weighted number of length-j paths from x to w
        counts = np.zeros((self.l_max + 1, n))
        counts[0, iw] = 1.0
        for j in range(1, self.l_max + 1):
            counts[j] = A @ counts[j - 1]
        self.counts = counts
        lengths, probs = [], []
        coeff = 1.0
        for l in range(self.l_max + 1):
            p = counts[l, iv] * coeff
            if p > 0.0:
                lengths.append(l)
                probs.append(p)
            coeff *= t_star / (l + 1)
        if not probs:
            raise UnreachableError(f"no path from {v!r} to {w!r} within {self.l_max} steps")
        total = math.fsum(probs)
        self.law = JumpLengthLaw(np.array(lengths), np.array(probs) / total,
                                 tail_mass=max(0.0, 1.0 - total))
        if self.law.tail_mass > 10 * tail_tol + 1e-6:
            raise TolUnreachableError(
                f"jump-count law leaves mass {self.law.tail_mass:.3g} beyond l_max")
        self._out = [g._out[i] for i in range(n)]

    def sample(self, rng: np.random.Generator) -> WalkSample:
        g = self.g
        L = int(rng.choice(self.law.lengths, p=self.law.probabilities))
        path = [self.v]
        x = g.index[self.v]
        for j in range(L):
            remaining = L - j - 1
            nbrs = self._out[x]
            weights = np.array([lam * self.counts[remaining, y]
                                for y, lam, _ in nbrs])
            total = weights.sum()
            x = nbrs[int(rng.choice(len(nbrs), p=weights / total))][0]
            path.append(g.vertices[x])
        times = np.sort(rng.uniform(0.0, self.t_star, L))
        return WalkSample(vertices=path, jump_times=times)


def sample_conditioned_walk(g: BaseGraph, v: VertexId, w: VertexId,
                            t_star: float, rng: np.random.Generator) -> WalkSample:
    """One conditioned-walk sample; build a ConditionedWalkSampler to amortize."""
    return get_sampler(g, v, w, t_star).sample(rng)


def get_sampler(g: BaseGraph, v, w, t_star, tail_tol: float = 1e-9) -> ConditionedWalkSampler:
    key = ("walk", v, w, t_star, tail_tol)
    hit = g._caches.get(key)
    if hit is None:
        hit = ConditionedWalkSampler(g, v, w, t_star, tail_tol)
        g._caches[key] = hit
    return hit


def sample_power_walk(base: BaseGraph, v: VertexId, w: VertexId, n: int,
                      t_star: float, rng: np.random.Generator) -> WalkSample:
    """Conditioned walk on the n-fold power between repeated endpoints.

    Coordinates evolve independently, so the product walk is the time
    merge of n base-graph walks; vertices come out as n-tuples and each
    jump records which coordinate moved.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    sampler = get_sampler(base, v, w, t_star)
    events = []
    for k in range(n):
        wk = sampler.sample(rng)
        for i, ti in enumerate(wk.jump_times):
            events.append((float(ti), k, wk.vertices[i + 1]))
    events.sort()
    current = [v] * n
    vertices = [tuple(current)]
    coords = []
    times = []
    for ti, k, new_vertex in events:
        current[k] = new_vertex
        vertices.append(tuple(current))
        coords.append(k)
        times.append(ti)
    return WalkSample(vertices=vertices, jump_times=np.array(times),
                      coordinates=coords)


def sample_unconditioned_walk(g: BaseGraph, v: VertexId, horizon: float,
                              rng: np.random.Generator):
    """Final state of the rate-delta_out uniformized walk at the horizon.

    Each tick picks an outgoing edge with probability intensity/delta_out;
    leftover probability moves the walker to an absorbing fail state,
    reported as None.
    """
    g.check_vertex(v)
    rate = g.delta_out
    x = v
    for _ in range(int(rng.poisson(rate * horizon))):
        u = rng.uniform(0.0, rate)
        acc = 0.0
        nxt = None
        for y, lam in g.out_edges(x):
            acc += lam
            if u < acc:
                nxt = y
                break
        if nxt is None:
            return None
        x = nxt
    return x


@dataclass
class MCEstimate:
    estimate: float
    stderr: float
    samples: int


def mc_f_estimate(g: BaseGraph, v: VertexId, w: VertexId, s: float, t: float,
                  samples: int, rng: np.random.Generator,
                  t_star: Optional[float] = None) -> MCEstimate:
    """Monte Carlo value of the criterion function at (s, t).

    Averages ln m(X_s, X_(s+t), t) over conditioned-walk samples; the
    deterministic evaluation is the oracle this converges to.
    """
    from .critical import critical_time
    if t_star is None:
        t_star = critical_time(g, v, w, tol=1e-12).t_star
    if s < 0 or t < 0 or s + t > t_star + 1e-12:
        raise ValueError("need s, t >= 0 and s + t <= t_star")
    if t == 0.0:
        return MCEstimate(0.0, 0.0, samples)
    sampler = get_sampler(g, v, w, t_star)
    memo: dict = {}
    total = 0.0
    total_sq = 0.0
    for _ in range(samples):
        walk = sampler.sample(rng)
        x = walk.vertex_at(s)
        y = walk.vertex_at(s + t)
        key = (x, y)
        val = memo.get(key)
        if val is None:
            val = math.log(m_eval(sampler.g, x, y, t, 1e-12).value)
            memo[key] = val
        total += val
        total_sq += val * val
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / max(samples - 1, 1)
    return MCEstimate(mean, math.sqrt(var / samples), samples)


def exact_self_avoiding_probability(base: BaseGraph, v: VertexId, w: VertexId,
                                    n: int, t_star: float,
                                    max_vertices: int = 64) -> float:
    """Sum of (prod intensities) t*^len/len! over self-avoiding paths of
    the n-fold power graph, by depth-first enumeration.

    This equals the probability that the conditioned power walk is
    self-avoiding, giving an exact oracle for the empirical estimate.
    """
    from .errors import TooLargeError
    if not base.is_finite:
        raise TooLargeError("enumeration needs a finite base graph")
    size = base.num_vertices() ** n
    if size > max_vertices:
        raise TooLargeError(f"|V|^n = {size} exceeds {max_vertices}")
    plan = series_plan(n * base.delta_out * t_star, 1e-14)
    l_max = min(plan.order, size - 1)
    idx = base.index
    out = base._out
    start = (idx[v],) * n
    goal = (idx[w],) * n
    total = 0.0

    def walk_from(state, visited, length, weight):
        nonlocal total
        if state == goal:
            # self-avoiding paths cannot revisit the goal, so stop here
            coeff = math.exp(length * math.log(t_star) - math.lgamma(length + 1)) \
                if length > 0 else 1.0
            total += weight * coeff
            return
        if length >= l_max:
            return
        for k in range(n):
            for y, lam, _ in out[state[k]]:
                nxt = state[:k] + (y,) + state[k + 1:]
                if nxt in visited:
                    continue
                walk_from(nxt, visited | {nxt}, length + 1, weight * lam)

    walk_from(start, {start}, 0, 1.0)
    return total


def empirical_self_avoiding_probability(base: BaseGraph, v, w, n: int,
                                        t_star: float, samples: int,
                                        rng: np.random.Generator) -> MCEstimate:
    hits = 0
    for _ in range(samples):
        walk = sample_power_walk(base, v, w, n, t_star, rng)
        if len(set(walk.vertices)) == len(walk.vertices):
            hits += 1
    p = hits / samples
    return MCEstimate(p, math.sqrt(max(p * (1 - p), 1e-300) / samples), samples)


def success_lower_bound(base: BaseGraph, v: VertexId, w: VertexId, n: int,
                        t_star: float, samples: int, rng: np.random.Generator,
                        delta_quantum: float = 1e-9) -> MCEstimate:
    """Monte Carlo lower-bound functional for P(T <= t*) on the power graph.

    Estimates the expectation of 1{walk self-avoiding} exp(-C), where C
    sums the power-graph generating function over all ordered pairs of
    walk positions at their time gap.  Each power value is a product of
    base-graph values (one per coordinate), memoized on gaps quantized to
    ``delta_quantum``; the quantization error is far below the Monte
    Carlo noise it feeds into.
    """
    sampler = get_sampler(base, v, w, t_star)
    g = sampler.g
    memo: dict = {}

    def m_base(x, y, dq):
        key = (x, y, dq)
        val = memo.get(key)
        if val is None:
            val = m_eval(g, x, y, dq * delta_quantum, 1e-12).value
            memo[key] = val
        return val

    total = 0.0
    total_sq = 0.0
    for _ in range(samples):
        walk = sample_power_walk(base, v, w, n, t_star, rng)
        if len(set(walk.vertices)) != len(walk.vertices):
            continue
        times = [0.0] + [float(x) for x in walk.jump_times]
        verts = walk.vertices
        c_sum = 0.0
        for i in range(len(verts)):
            for j in range(i + 1, len(verts)):
                dq = int(round((times[j] - times[i]) / delta_quantum))
                prod = 1.0
                for k in range(n):
                    prod *= m_base(verts[i][k], verts[j][k], dq)
                    if prod == 0.0:
                        break
                c_sum += prod
        val = math.exp(-c_sum)
        total += val
        total_sq += val * val
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / max(samples - 1, 1)
    return MCEstimate(mean, math.sqrt(var / samples), samples)

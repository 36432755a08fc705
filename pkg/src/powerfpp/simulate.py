"""Monte Carlo first-passage percolation on implicit power graphs.

The n-fold power of a finite base graph is never materialized: vertices
are fixed-radix codes over base-vertex indices, neighbors come from the
base adjacency applied per coordinate, and each edge weight is recreated
on demand from a keyed hash (see rng).  First-passage times are exact
shortest-path distances under those weights, found by best-first search.

General weight distributions enter through a single monotone coupling:
an edge's underlying draw is standard exponential and the model maps it
through h(t) = inf{x >= 0 : F(x) >= 1 - e^(-t)}, the quantile transport
that sends Exp(1) to F.  Comparing models on one seed therefore compares
them edge by edge.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    FrontierExhaustedError,
    InvalidDistributionError,
    UnreachableError,
)
from .graphs import BaseGraph, VertexId
from .rng import edge_payload, keyed_exponential

MAX_BASE_VERTICES = 255
MAX_POWER = 64
DEFAULT_NODE_BUDGET = 50_000_000


@dataclass(frozen=True)
class WeightModel:
    """Edge weight distribution plus its zero-density and coupling map.

    ``rho`` is the density of the distribution function at 0 (the slope
    of F there); it scales the high-dimensional limits.  ``h`` is the
    quantile coupling applied to Exp(1) draws.
    """

    kind: str
    rate: float = 1.0
    a: float = 0.0
    b: float = 1.0
    quantile_ps: tuple = ()
    quantile_xs: tuple = ()
    rho: float = 1.0

    def h(self, t: float) -> float:
        """Map an Exp(1) value to this distribution, monotonically."""
        if t < 0:
            raise ValueError("t must be >= 0")
        if self.kind == "exponential":
            return t / self.rate
        if self.kind == "uniform":
            if t == 0.0:
                return 0.0
            return self.a + (self.b - self.a) * -math.expm1(-t)
        # piecewise-linear quantile table at level 1 - e^(-t)
        p = -math.expm1(-t)
        return float(np.interp(p, self.quantile_ps, self.quantile_xs))

    def describe(self) -> dict:
        d = {"kind": self.kind, "rho": self.rho}
        if self.kind == "exponential":
            d["rate"] = self.rate
        elif self.kind == "uniform":
            d["a"], d["b"] = self.a, self.b
        else:
            d["quantiles"] = [list(self.quantile_ps), list(self.quantile_xs)]
        return d


def make_weight_model(spec) -> WeightModel:
    """Build a WeightModel from a dict or a CLI-style string.

    Accepted forms: {"kind": "exponential", "rate": r},
    {"kind": "uniform", "a": a, "b": b},
    {"kind": "table", "quantiles": [[p, x], ...]};
    strings "exp:RATE", "uniform:A,B", "table:PATH" (JSON file with a
    "quantiles" list).
    """
    if isinstance(spec, str):
        spec = _parse_model_string(spec)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidDistributionError(f"bad weight model spec {spec!r}")
    kind = spec["kind"]
    if kind == "exponential":
        rate = float(spec.get("rate", 1.0))
        if not (rate > 0 and math.isfinite(rate)):
            raise InvalidDistributionError(f"exponential rate must be > 0, got {rate}")
        return WeightModel(kind="exponential", rate=rate, rho=rate)
    if kind == "uniform":
        a, b = float(spec.get("a", 0.0)), float(spec.get("b", 1.0))
        if not (a < b and math.isfinite(a) and math.isfinite(b) and a >= 0):
            raise InvalidDistributionError(f"uniform needs 0 <= a < b, got {a}, {b}")
        rho = 1.0 / (b - a) if a == 0.0 else 0.0
        return WeightModel(kind="uniform", a=a, b=b, rho=rho)
    if kind == "table":
        knots = spec.get("quantiles")
        if not knots or len(knots) < 2:
            raise InvalidDistributionError("table needs at least two (p, x) knots")
        ps = [float(p) for p, _ in knots]
        xs = [float(x) for _, x in knots]
        if ps != sorted(ps) or xs != sorted(xs) or ps[0] != 0.0 or ps[-1] != 1.0:
            raise InvalidDistributionError(
                "quantile knots must be nondecreasing with p spanning [0, 1]")
        if any(x < 0 for x in xs):
            raise InvalidDistributionError("weights must be nonnegative")
        # density at 0 from the initial quantile slope
        if xs[0] > 0.0:
            rho = 0.0
        else:
            i = next((j for j in range(1, len(xs)) if xs[j] > 0.0), None)
            if i is None:
                raise InvalidDistributionError("degenerate quantile table (all zero)")
            if ps[i - 1] > 0.0:
                rho = math.inf  # flat zero segment: an atom at weight 0
            else:
                rho = (ps[i] - ps[i - 1]) / (xs[i] - xs[i - 1])
        return WeightModel(kind="table", quantile_ps=tuple(ps),
                           quantile_xs=tuple(xs), rho=rho)
    raise InvalidDistributionError(f"unknown weight model kind {kind!r}")


def _parse_model_string(text: str) -> dict:
    try:
        kind, _, rest = text.partition(":")
        if kind == "exp":
            return {"kind": "exponential", "rate": float(rest or 1.0)}
        if kind == "uniform":
            a, b = rest.split(",")
            return {"kind": "uniform", "a": float(a), "b": float(b)}
        if kind == "table":
            import json
            with open(rest) as fh:
                return {"kind": "table", "quantiles": json.load(fh)["quantiles"]}
    except InvalidDistributionError:
        raise
    except Exception as exc:
        raise InvalidDistributionError(f"cannot parse weight spec {text!r}: {exc}") from exc
    raise InvalidDistributionError(f"cannot parse weight spec {text!r}")


# --- implicit power-graph search ------------------------------------------


class PowerGraphSearch:
    """Shortest-path engine on the n-fold power of a finite base graph."""

    def __init__(self, base: BaseGraph, n: int, model: WeightModel,
                 seed: int, node_budget: int = DEFAULT_NODE_BUDGET):
        if not base.is_finite:
            raise UnreachableError("simulation needs a finite base graph")
        nb = base.num_vertices()
        if nb > MAX_BASE_VERTICES:
            raise ValueError(f"base graph too large ({nb} > {MAX_BASE_VERTICES})")
        if not 1 <= n <= MAX_POWER:
            raise ValueError(f"power must be in 1..{MAX_POWER}")
        self.base = base
        self.n = n
        self.model = model
        self.seed = seed
        self.node_budget = node_budget
        self.radix = nb
        self.code_bytes = max(1, (int(nb ** n).bit_length() + 7) // 8)
        # per base vertex: list of (neighbor index, intensity, edge idx, oriented)
        self.adj = [[(y, lam, k, base.edges[k].oriented) for y, lam, k in base._out[i]]
                    for i in range(nb)]

    def encode(self, coords) -> int:
        code = 0
        for c in reversed(coords):
            code = code * self.radix + c
        return code

    def weight(self, replica: int, tail_code: int, head_code: int,
               edge_index: int, intensity: float, oriented: bool) -> float:
        if not oriented and head_code < tail_code:
            tail_code, head_code = head_code, tail_code
        payload = edge_payload(replica, tail_code, head_code, edge_index,
                               self.code_bytes)
        exp1 = keyed_exponential(self.seed, payload)
        return self.model.h(exp1 / intensity)

    def first_passage(self, start_coords, goal_coords, replica: int = 0):
        """Dijkstra from start to goal; returns (time, geodesic hops, pops)."""
        n, radix, adj = self.n, self.radix, self.adj
        start = self.encode(start_coords)
        goal = self.encode(goal_coords)
        dist = {start: 0.0}
        hops = {start: 0}
        heap = [(0.0, start)]
        done = set()
        pops = 0
        powers = [radix ** k for k in range(n)]
        while heap:
            d, x = heapq.heappop(heap)
            if x in done:
                continue
            done.add(x)
            pops += 1
            if x == goal:
                return d, hops[x], pops
            if pops > self.node_budget:
                raise FrontierExhaustedError(
                    f"node budget {self.node_budget} exhausted")
            rem = x
            for k in range(n):
                ck = rem % radix
                rem //= radix
                pk = powers[k]
                for y, lam, eidx, oriented in adj[ck]:
                    ny = x + (y - ck) * pk
                    if ny in done:
                        continue
                    w = self.weight(replica, x, ny, eidx, lam, oriented)
                    nd = d + w
                    if nd < dist.get(ny, math.inf):
                        dist[ny] = nd
                        hops[ny] = hops[x] + 1
                        heapq.heappush(heap, (nd, ny))
        raise UnreachableError("goal not reached (disconnected power graph)")


def first_passage_time(base: BaseGraph, n: int, v: VertexId, w: VertexId,
                       model: WeightModel, seed: int, replica: int = 0,
                       node_budget: int = DEFAULT_NODE_BUDGET,
                       w_coords: Optional[list] = None) -> dict:
    """One first-passage time between repeated endpoints of the n-fold power.

    ``w_coords`` optionally overrides the goal with an explicit coordinate
    vector of base vertices (used for endpoints at partial distance).
    The result is a pure function of (base, n, model, seed, replica).
    """
    base.check_vertex(v)
    base.check_vertex(w)
    if not base.reachable(v, w):
        raise UnreachableError(f"no path from {v!r} to {w!r} in the base graph")
    search = PowerGraphSearch(base, n, model, seed, node_budget)
    iv = base.index[v]
    goal = [base.index[x] for x in w_coords] if w_coords is not None \
        else [base.index[w]] * n
    time, length, pops = search.first_passage([iv] * n, goal, replica)
    return {"time": time, "geodesic_length": length, "pops": pops}


# --- ensembles -----------------------------------------------------------------


@dataclass
class SimulationSummary:
    """Ensemble statistics of first-passage times on one configuration."""

    replicas: int
    mean: float
    stderr: float
    quantiles: dict
    cdf_points: list
    geodesic_lengths: dict
    config: dict
    times: list = field(default_factory=list)

    def empirical_cdf(self, t: float) -> float:
        return sum(1 for x in self.times if x <= t) / len(self.times)

    def to_dict(self) -> dict:
        return {
            "replicas": self.replicas,
            "times": {"mean": self.mean, "stderr": self.stderr,
                      "quantiles": self.quantiles},
            "cdf_points": self.cdf_points,
            "geodesic_lengths": self.geodesic_lengths,
            "config": self.config,
            "samples": self.times,
        }


def run_ensemble(base: BaseGraph, n: int, v: VertexId, w: VertexId,
                 model: WeightModel, replicas: int, seed: int,
                 hamming_k: Optional[int] = None,
                 node_budget: int = DEFAULT_NODE_BUDGET) -> SimulationSummary:
    """Independent replicas of one configuration, summarized.

    ``hamming_k`` makes the endpoints differ in exactly k coordinates
    (the remaining n - k stay at v).  Replicas derive their randomness
    from (seed, replica id) only, so results are order-independent.
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    base.check_vertex(v)
    base.check_vertex(w)
    if not base.reachable(v, w):
        raise UnreachableError(f"no path from {v!r} to {w!r} in the base graph")
    if hamming_k is not None and not 0 <= hamming_k <= n:
        raise ValueError("hamming_k must be in 0..n")
    search = PowerGraphSearch(base, n, model, seed, node_budget)
    iv, iw = base.index[v], base.index[w]
    goal = [iw] * n if hamming_k is None else [iw] * hamming_k + [iv] * (n - hamming_k)
    times = []
    lengths = []
    for r in range(replicas):
        t, length, _pops = search.first_passage([iv] * n, goal, replica=r)
        times.append(t)
        lengths.append(length)
    arr = np.array(times)
    mean = math.fsum(times) / replicas
    std = arr.std(ddof=1) if replicas > 1 else 0.0
    qs = {q: float(np.quantile(arr, q / 100.0)) for q in (5, 25, 50, 75, 95)}
    order = np.sort(arr)
    cdf_points = [(float(t), (i + 1) / replicas) for i, t in enumerate(order)]
    config = {
        "graph": base.name or base.to_spec(), "n": n, "v": v, "w": w,
        "model": model.describe(), "replicas": replicas, "seed": seed,
        "hamming_k": hamming_k,
    }
    return SimulationSummary(
        replicas=replicas, mean=mean, stderr=float(std / math.sqrt(replicas)),
        quantiles=qs, cdf_points=cdf_points,
        geodesic_lengths={"mean": float(np.mean(lengths)),
                          "min": int(min(lengths)), "max": int(max(lengths))},
        config=config, times=times)

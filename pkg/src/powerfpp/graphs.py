"""Base graphs: finite edge lists and oracle-backed infinite graphs.

A base graph may mix directed and undirected edges, carries a positive
intensity (rate) per edge, and is always loopless.  Finite graphs are
validated and indexed eagerly; infinite graphs (the undirected and
directed chains) are represented by pure neighbor oracles together with
declared degree bounds, which is all the series machinery needs.

Parallel edges are accepted on input and normalized away: an edge of
multiplicity k, or k parallel copies, is equivalent to a single edge of
k-fold intensity for every quantity computed here.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Optional

import numpy as np

from .errors import (
    GraphError,
    LoopEdgeError,
    NonpositiveIntensityError,
    OracleGraphUnsupportedError,
    UnknownVertexError,
)

VertexId = Hashable


@dataclass(frozen=True)
class Edge:
    """A loopless edge with positive intensity.

    ``oriented`` distinguishes a one-way edge from an undirected one; an
    undirected edge is stored once and expanded to both directions by the
    neighbor oracle.  ``multiplicity`` survives only until normalization.
    """

    tail: VertexId
    head: VertexId
    oriented: bool = False
    intensity: float = 1.0
    multiplicity: int = 1

    def validate(self) -> None:
        if self.tail == self.head:
            raise LoopEdgeError(f"loop edge at {self.tail!r}")
        if not (self.intensity > 0.0 and math.isfinite(self.intensity)):
            raise NonpositiveIntensityError(
                f"edge ({self.tail!r}, {self.head!r}) has intensity {self.intensity!r}"
            )
        if self.multiplicity < 1:
            raise GraphError(
                f"edge ({self.tail!r}, {self.head!r}) has multiplicity {self.multiplicity}"
            )


#: neighbor oracle signature: vertex -> iterable of (neighbor, intensity, oriented)
NeighborFn = Callable[[VertexId], Iterable[tuple[VertexId, float, bool]]]


class BaseGraph:
    """Finite or oracle-backed base graph.

    Finite graphs expose an index, adjacency lists, a dense weighted
    adjacency matrix, and exact degree statistics.  Oracle graphs expose
    out/in neighbor functions plus declared bounds ``delta`` (max total
    degree), ``delta_out`` and ``delta_in`` (max total outgoing/incoming
    intensity); the declarations are trusted.

    Instances are immutable after construction and safe for concurrent
    reads.  Oracle neighbor functions must be pure.
    """

    def __init__(self):
        raise TypeError("use BaseGraph.finite(...) or BaseGraph.oracle(...)")

    # --- constructors -------------------------------------------------

    @classmethod
    def finite(cls, vertices: Iterable[VertexId], edges: Iterable[Edge],
               name: str = "") -> "BaseGraph":
        g = object.__new__(cls)
        g.kind = "finite"
        g.name = name
        g.vertices = list(vertices)
        if len(set(g.vertices)) != len(g.vertices):
            raise GraphError("duplicate vertex ids")
        g.index = {v: i for i, v in enumerate(g.vertices)}
        g.edges = _normalize_edges(g.index, edges)
        n = len(g.vertices)
        g._out = [[] for _ in range(n)]   # (nbr index, intensity, edge index)
        g._in = [[] for _ in range(n)]
        for k, e in enumerate(g.edges):
            i, j = g.index[e.tail], g.index[e.head]
            g._out[i].append((j, e.intensity, k))
            g._in[j].append((i, e.intensity, k))
            if not e.oriented:
                g._out[j].append((i, e.intensity, k))
                g._in[i].append((j, e.intensity, k))
        g.adjacency = np.zeros((n, n))
        for i in range(n):
            for j, lam, _ in g._out[i]:
                g.adjacency[i, j] += lam
        g.delta_out = float(g.adjacency.sum(axis=1).max()) if n else 0.0
        g.delta_in = float(g.adjacency.sum(axis=0).max()) if n else 0.0
        deg = [0.0] * n
        for e in g.edges:
            deg[g.index[e.tail]] += e.intensity
            deg[g.index[e.head]] += e.intensity
        g.delta = max(deg) if n else 0.0
        g._out_fn = None
        g._in_fn = None
        g._caches = {}
        return g

    @classmethod
    def oracle(cls, out_fn: NeighborFn, in_fn: NeighborFn, delta: float,
               delta_out: float, delta_in: Optional[float] = None,
               name: str = "") -> "BaseGraph":
        g = object.__new__(cls)
        g.kind = "oracle"
        g.name = name
        g.vertices = None
        g.index = None
        g.edges = None
        g.adjacency = None
        g._out_fn = out_fn
        g._in_fn = in_fn
        g.delta = float(delta)
        g.delta_out = float(delta_out)
        g.delta_in = float(delta_out if delta_in is None else delta_in)
        g._caches = {}
        return g

    # --- queries --------------------------------------------------------

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    def num_vertices(self) -> int:
        if not self.is_finite:
            raise OracleGraphUnsupportedError("oracle graph has no vertex count")
        return len(self.vertices)

    def check_vertex(self, v: VertexId) -> None:
        if self.is_finite and v not in self.index:
            raise UnknownVertexError(f"unknown vertex {v!r}")

    def out_edges(self, v: VertexId):
        """(neighbor, intensity) pairs for edges leaving ``v``."""
        if self.is_finite:
            i = self.index[v]
            return [(self.vertices[j], lam) for j, lam, _ in self._out[i]]
        return [(w, lam) for w, lam, _ in self._out_fn(v)]

    def in_edges(self, v: VertexId):
        """(neighbor, intensity) pairs for edges entering ``v``."""
        if self.is_finite:
            i = self.index[v]
            return [(self.vertices[j], lam) for j, lam, _ in self._in[i]]
        return [(w, lam) for w, lam, _ in self._in_fn(v)]

    def reachable(self, v: VertexId, w: VertexId, max_steps: Optional[int] = None) -> bool:
        """BFS reachability following edge orientations.

        Finite graphs search exhaustively (a path exists iff one of fewer
        than ``|V|`` steps exists); oracle graphs stop after ``max_steps``
        levels (default 1000).
        """
        self.check_vertex(v)
        self.check_vertex(w)
        if v == w:
            return True
        horizon = (self.num_vertices() if self.is_finite
                   else (1000 if max_steps is None else max_steps))
        seen = {v}
        frontier = [v]
        for _ in range(horizon):
            nxt = []
            for x in frontier:
                for y, _lam in self.out_edges(x):
                    if y == w:
                        return True
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            if not nxt:
                return False
            frontier = nxt
        return False

    def distance(self, v: VertexId, w: VertexId) -> int:
        """Unweighted directed graph distance (hops); raises if unreachable."""
        self.check_vertex(v)
        self.check_vertex(w)
        if v == w:
            return 0
        seen = {v}
        frontier = [v]
        d = 0
        limit = self.num_vertices() if self.is_finite else 100000
        while frontier and d < limit:
            d += 1
            nxt = []
            for x in frontier:
                for y, _lam in self.out_edges(x):
                    if y == w:
                        return d
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        raise GraphError(f"no path from {v!r} to {w!r}")

    def to_spec(self) -> dict:
        """Normalized JSON-ready description (finite graphs only)."""
        if not self.is_finite:
            raise OracleGraphUnsupportedError("cannot serialize an oracle graph")
        edges = []
        for e in sorted(self.edges, key=lambda e: (str(e.tail), str(e.head), e.oriented)):
            rec = {"from": e.tail, "to": e.head}
            if e.oriented:
                rec["directed"] = True
            if e.intensity != 1.0:
                rec["intensity"] = e.intensity
            edges.append(rec)
        return {"vertices": list(self.vertices), "edges": edges}

    def __repr__(self):
        if self.is_finite:
            return (f"BaseGraph(finite, |V|={len(self.vertices)}, "
                    f"|E|={len(self.edges)}, name={self.name!r})")
        return f"BaseGraph(oracle, name={self.name!r})"


def _normalize_edges(index: dict, edges: Iterable[Edge]) -> list[Edge]:
    """Validate, fold multiplicity into intensity, merge parallel edges."""
    merged: dict[tuple, float] = {}
    order: list[tuple] = []
    for e in edges:
        e.validate()
        if e.tail not in index:
            raise UnknownVertexError(f"unknown vertex {e.tail!r}")
        if e.head not in index:
            raise UnknownVertexError(f"unknown vertex {e.head!r}")
        if e.oriented:
            key = (e.tail, e.head, True)
        else:
            a, b = sorted((e.tail, e.head), key=lambda s: (str(type(s)), str(s)))
            key = (a, b, False)
        if key not in merged:
            merged[key] = 0.0
            order.append(key)
        merged[key] += e.intensity * e.multiplicity
    return [Edge(tail=k[0], head=k[1], oriented=k[2], intensity=merged[k])
            for k in order]


# --- graph spec parsing -------------------------------------------------

def build_graph(spec: dict) -> BaseGraph:
    """Build a validated graph from its JSON description.

    Two forms are accepted::

        {"vertices": [...], "edges": [{"from": ..., "to": ...,
                                       "directed": bool, "intensity": x,
                                       "multiplicity": k}, ...]}
        {"builtin": "Z" | "Zdir" | "Kq" | "Path" | "Cycle" | "DirectedEdge"
                    | "CalibratedChain" | "Paw",
         "params": {...}}
    """
    if not isinstance(spec, dict):
        raise GraphError("graph spec must be a JSON object")
    if "builtin" in spec:
        return _build_builtin(spec["builtin"], spec.get("params", {}))
    if "vertices" not in spec or "edges" not in spec:
        raise GraphError("graph spec needs 'vertices' and 'edges' (or 'builtin')")
    vertices = [str(v) for v in spec["vertices"]]
    edges = []
    for rec in spec["edges"]:
        try:
            tail, head = str(rec["from"]), str(rec["to"])
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed edge record {rec!r}") from exc
        edges.append(Edge(
            tail=tail, head=head,
            oriented=bool(rec.get("directed", False)),
            intensity=float(rec.get("intensity", 1.0)),
            multiplicity=int(rec.get("multiplicity", 1)),
        ))
    return BaseGraph.finite(vertices, edges, name=str(spec.get("name", "")))


def _build_builtin(kind: str, params: dict) -> BaseGraph:
    if kind == "Z":
        return chain_graph()
    if kind == "Zdir":
        return directed_chain_graph()
    if kind == "Kq":
        return complete_graph(int(params.get("q", 2)))
    if kind == "Path":
        return path_graph(int(params.get("k", 1)))
    if kind == "Cycle":
        return cycle_graph(int(params.get("n", 4)))
    if kind == "DirectedEdge":
        return directed_edge_graph()
    if kind == "CalibratedChain":
        return calibrated_chain(int(params["l"]),
                                t_star=params.get("t_star"),
                                lam=params.get("lambda"))
    if kind == "Paw":
        return paw_graph()
    raise GraphError(f"unknown builtin graph {kind!r}")


def load_graph(path: str) -> BaseGraph:
    with open(path) as fh:
        return build_graph(json.load(fh))


# --- builtin zoo ---------------------------------------------------------

def complete_graph(q: int) -> BaseGraph:
    """K_q on vertices "0" .. "q-1", all undirected unit edges."""
    if q < 2:
        raise GraphError("complete graph needs q >= 2")
    vs = [str(i) for i in range(q)]
    edges = [Edge(vs[i], vs[j]) for i in range(q) for j in range(i + 1, q)]
    return BaseGraph.finite(vs, edges, name=f"K{q}")


def path_graph(k: int) -> BaseGraph:
    """Undirected path with k edges on vertices "0" .. "k"."""
    if k < 1:
        raise GraphError("path graph needs k >= 1")
    vs = [str(i) for i in range(k + 1)]
    edges = [Edge(vs[i], vs[i + 1]) for i in range(k)]
    return BaseGraph.finite(vs, edges, name=f"path{k}")


def cycle_graph(n: int) -> BaseGraph:
    if n < 3:
        raise GraphError("cycle needs n >= 3")
    vs = [str(i) for i in range(n)]
    edges = [Edge(vs[i], vs[(i + 1) % n]) for i in range(n)]
    return BaseGraph.finite(vs, edges, name=f"cycle{n}")


def directed_edge_graph() -> BaseGraph:
    """Two vertices, one directed unit edge "0" -> "1"."""
    return BaseGraph.finite(["0", "1"], [Edge("0", "1", oriented=True)],
                            name="directed_edge")


def paw_graph() -> BaseGraph:
    """Triangle a-b-v plus pendant w attached to a (all undirected)."""
    vs = ["a", "b", "v", "w"]
    edges = [Edge("a", "b"), Edge("b", "v"), Edge("v", "a"), Edge("a", "w")]
    return BaseGraph.finite(vs, edges, name="paw")


def calibrated_chain(l: int, t_star: Optional[float] = None,
                     lam: Optional[float] = None) -> BaseGraph:
    """Directed path 0 -> 1 -> ... -> l with one uniform intensity.

    The intensity defaults to (l!)^(1/l) / t_star, which places the
    chain's critical time between its endpoints exactly at ``t_star``.
    """
    if l < 1:
        raise GraphError("calibrated chain needs l >= 1")
    if lam is None:
        if t_star is None or not t_star > 0:
            raise GraphError("calibrated chain needs t_star > 0 or an explicit lambda")
        lam = math.exp(math.lgamma(l + 1) / l) / t_star
    vs = [str(i) for i in range(l + 1)]
    edges = [Edge(vs[i], vs[i + 1], oriented=True, intensity=lam) for i in range(l)]
    return BaseGraph.finite(vs, edges, name=f"calibrated_chain{l}")


def chain_graph() -> BaseGraph:
    """The doubly infinite undirected chain on the integers."""
    def nbrs(v):
        v = int(v)
        return [(v - 1, 1.0, False), (v + 1, 1.0, False)]
    return BaseGraph.oracle(nbrs, nbrs, delta=2.0, delta_out=2.0, name="Z")


def directed_chain_graph() -> BaseGraph:
    """The doubly infinite directed chain, edges i -> i+1."""
    def out(v):
        return [(int(v) + 1, 1.0, True)]
    def inc(v):
        return [(int(v) - 1, 1.0, True)]
    return BaseGraph.oracle(out, inc, delta=2.0, delta_out=1.0, delta_in=1.0,
                            name="Zdir")


# --- products and balls ---------------------------------------------------

def product_vertex(v1: VertexId, v2: VertexId) -> str:
    """Stable unambiguous id for a product-graph vertex."""
    return json.dumps([v1, v2], separators=(",", ":"))


def cartesian_product(g1: BaseGraph, g2: BaseGraph) -> BaseGraph:
    """Cartesian product of two finite graphs.

    Vertices are pairs; each factor edge is copied once per vertex of the
    other factor, keeping its orientation and intensity.
    """
    if not (g1.is_finite and g2.is_finite):
        raise OracleGraphUnsupportedError("cartesian product needs finite factors")
    vs = [product_vertex(a, b) for a in g1.vertices for b in g2.vertices]
    edges = []
    for e in g1.edges:
        for b in g2.vertices:
            edges.append(Edge(product_vertex(e.tail, b), product_vertex(e.head, b),
                              oriented=e.oriented, intensity=e.intensity))
    for a in g1.vertices:
        for e in g2.edges:
            edges.append(Edge(product_vertex(a, e.tail), product_vertex(a, e.head),
                              oriented=e.oriented, intensity=e.intensity))
    name = f"({g1.name or '?'})x({g2.name or '?'})"
    return BaseGraph.finite(vs, edges, name=name)


def ball(g: BaseGraph, center: VertexId, radius: int) -> BaseGraph:
    """Induced subgraph on the union of the out-ball and in-ball at ``center``.

    Any path of length <= radius starting or ending at the center stays
    inside, which is what confines series evaluation on infinite graphs.
    """
    if radius < 0:
        raise GraphError("radius must be >= 0")
    g.check_vertex(center)
    keep = {center}
    for direction in ("out", "in"):
        frontier = [center]
        seen = {center}
        for _ in range(radius):
            nxt = []
            for x in frontier:
                nbrs = g.out_edges(x) if direction == "out" else g.in_edges(x)
                for y, _lam in nbrs:
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        keep |= seen
    keep_list = sorted(keep, key=lambda v: (str(type(v)), str(v)))
    edges = []
    if g.is_finite:
        for e in g.edges:
            if e.tail in keep and e.head in keep:
                edges.append(e)
    else:
        seen_undirected = set()
        for x in keep_list:
            for y, lam, oriented in g._out_fn(x):
                if y not in keep:
                    continue
                if oriented:
                    edges.append(Edge(x, y, oriented=True, intensity=lam))
                else:
                    # the oracle reports an undirected edge from both endpoints
                    key = tuple(sorted((x, y), key=lambda s: (str(type(s)), str(s))))
                    if key in seen_undirected:
                        continue
                    seen_undirected.add(key)
                    edges.append(Edge(key[0], key[1], oriented=False, intensity=lam))
    return BaseGraph.finite(keep_list, edges,
                            name=f"ball({g.name or '?'},{center},{radius})")

"""Labelled graphs, conflict-graph construction, random instances, and
percolation-threshold analysis.

Graphs are immutable. Vertex ids are strings throughout so that every
artifact serializes to the same JSON schema.
"""

from __future__ import annotations

import json
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from random import Random
from typing import Iterable, NamedTuple

from .errors import GraphFormatError


class Vertex(NamedTuple):
    id: str
    label: str = ""
    weight: float = 1.0


class Edge(NamedTuple):
    u: str
    v: str
    label: str = ""


@dataclass(frozen=True)
class LabelledGraph:
    """Simple undirected graph with opaque labels and vertex weights."""

    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(Vertex(*v) for v in self.vertices))
        object.__setattr__(self, "edges", tuple(Edge(*e) for e in self.edges))
        ids = set()
        for v in self.vertices:
            if v.id in ids:
                raise ValueError(f"duplicate vertex id {v.id!r}")
            ids.add(v.id)
            if not (math.isfinite(v.weight) and v.weight >= 0):
                raise ValueError(f"vertex {v.id!r}: weight must be finite and non-negative")
        seen = set()
        for e in self.edges:
            if e.u == e.v:
                raise ValueError(f"self-loop at {e.u!r}")
            if e.u not in ids:
                raise ValueError(f"dangling endpoint {e.u!r}")
            if e.v not in ids:
                raise ValueError(f"dangling endpoint {e.v!r}")
            key = frozenset((e.u, e.v))
            if key in seen:
                raise ValueError(f"duplicate edge {e.u!r}-{e.v!r}")
            seen.add(key)

    @cached_property
    def _adjacency(self) -> dict[str, frozenset[str]]:
        adj: dict[str, set[str]] = {v.id: set() for v in self.vertices}
        for e in self.edges:
            adj[e.u].add(e.v)
            adj[e.v].add(e.u)
        return {k: frozenset(s) for k, s in adj.items()}

    @cached_property
    def _weights(self) -> dict[str, float]:
        return {v.id: float(v.weight) for v in self.vertices}

    @cached_property
    def _labels(self) -> dict[str, str]:
        return {v.id: v.label for v in self.vertices}

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def vertex_ids(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.vertices)

    def weight(self, vid: str) -> float:
        return self._weights[vid]

    def label(self, vid: str) -> str:
        return self._labels[vid]

    def neighbors(self, vid: str) -> frozenset[str]:
        return self._adjacency[vid]

    def degree(self, vid: str) -> int:
        return len(self._adjacency[vid])

    def has_vertex(self, vid: str) -> bool:
        return vid in self._weights

    def has_edge(self, u: str, v: str) -> bool:
        return v in self._adjacency.get(u, frozenset())

    def density_percent(self) -> float:
        """Realized density as a percentage of all possible edges.

        Defined as 0 for graphs with fewer than two vertices.
        """
        n = self.num_vertices
        if n < 2:
            return 0.0
        return 100.0 * self.num_edges / (n * (n - 1) // 2)


@dataclass(frozen=True)
class ConflictGraph(LabelledGraph):
    """Labelled graph whose vertices may carry (source1, source2) provenance."""

    provenance: dict[str, tuple[str, str]] = field(default_factory=dict)

    def __post_init__(self):
        super().__post_init__()
        ids = {v.id for v in self.vertices}
        for vid in self.provenance:
            if vid not in ids:
                raise ValueError(f"provenance for unknown vertex {vid!r}")
        pairs = list(self.provenance.values())
        if len(set(pairs)) != len(pairs):
            raise ValueError("provenance pairs must be unique")


@dataclass(frozen=True)
class ConflictRules:
    """Which pairings conflict. The bijection rule is always in force."""

    edge_consistency: bool = True
    label_mismatch: bool = True
    vertex_weight: float = 1.0


@dataclass(frozen=True)
class DegreeHistogram:
    """Counts of vertices per degree, over a graph with n_vertices vertices."""

    counts: dict[int, int]
    n_vertices: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.n_vertices:
            raise ValueError("degree counts must sum to the vertex count")
        for k in self.counts:
            if not 0 <= k <= max(self.n_vertices - 1, 0):
                raise ValueError(f"impossible degree {k} for {self.n_vertices} vertices")


def parse_labelled_graph(text: str) -> LabelledGraph:
    """Parse the JSON graph format, reporting schema violations by location.

    Returns a ConflictGraph when any vertex carries provenance.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"malformed syntax: {exc}") from exc
    if not isinstance(doc, dict):
        raise GraphFormatError("top level must be an object")

    raw_vertices = doc.get("vertices", [])
    raw_edges = doc.get("edges", [])
    if not isinstance(raw_vertices, list):
        raise GraphFormatError("vertices: must be a list")
    if not isinstance(raw_edges, list):
        raise GraphFormatError("edges: must be a list")

    vertices: list[Vertex] = []
    provenance: dict[str, tuple[str, str]] = {}
    seen_ids: set[str] = set()
    for i, rv in enumerate(raw_vertices):
        where = f"vertices[{i}]"
        if not isinstance(rv, dict) or "id" not in rv:
            raise GraphFormatError(f"{where}: expected an object with an 'id'")
        vid = rv["id"]
        if not isinstance(vid, str):
            raise GraphFormatError(f"{where}: id must be a string")
        if vid in seen_ids:
            raise GraphFormatError(f"{where}: duplicate vertex id {vid!r}")
        seen_ids.add(vid)
        label = rv.get("label", "")
        if not isinstance(label, str):
            raise GraphFormatError(f"{where}: label must be a string")
        weight = rv.get("weight", 1.0)
        if not isinstance(weight, (int, float)) or isinstance(weight, bool):
            raise GraphFormatError(f"{where}: weight must be a number")
        weight = float(weight)
        if not math.isfinite(weight) or weight < 0:
            raise GraphFormatError(f"{where}: negative or non-finite weight")
        if "provenance" in rv:
            prov = rv["provenance"]
            if (not isinstance(prov, list) or len(prov) != 2
                    or not all(isinstance(p, str) for p in prov)):
                raise GraphFormatError(f"{where}: provenance must be a pair of strings")
            provenance[vid] = (prov[0], prov[1])
        vertices.append(Vertex(vid, label, weight))

    edges: list[Edge] = []
    seen_edges: set[frozenset[str]] = set()
    for i, re in enumerate(raw_edges):
        where = f"edges[{i}]"
        if not isinstance(re, dict) or "u" not in re or "v" not in re:
            raise GraphFormatError(f"{where}: expected an object with 'u' and 'v'")
        u, v = re["u"], re["v"]
        if not isinstance(u, str) or not isinstance(v, str):
            raise GraphFormatError(f"{where}: endpoints must be strings")
        for end in (u, v):
            if end not in seen_ids:
                raise GraphFormatError(f"{where}: dangling endpoint {end!r}")
        if u == v:
            raise GraphFormatError(f"{where}: self-loop at {u!r}")
        key = frozenset((u, v))
        if key in seen_edges:
            raise GraphFormatError(f"{where}: duplicate edge {u!r}-{v!r}")
        seen_edges.add(key)
        label = re.get("label", "")
        if not isinstance(label, str):
            raise GraphFormatError(f"{where}: label must be a string")
        edges.append(Edge(u, v, label))

    if provenance:
        return ConflictGraph(tuple(vertices), tuple(edges), provenance)
    return LabelledGraph(tuple(vertices), tuple(edges))


def graph_to_json(g: LabelledGraph, indent: int | None = None) -> str:
    """Serialize a graph to the JSON schema accepted by parse_labelled_graph."""
    provenance = getattr(g, "provenance", {})
    vertices = []
    for v in g.vertices:
        rv: dict = {"id": v.id, "label": v.label, "weight": v.weight}
        if v.id in provenance:
            rv["provenance"] = list(provenance[v.id])
        vertices.append(rv)
    edges = [{"u": e.u, "v": e.v, "label": e.label} for e in g.edges]
    return json.dumps({"vertices": vertices, "edges": edges}, indent=indent)


def build_conflict_graph(g1: LabelledGraph, g2: LabelledGraph,
                         rules: ConflictRules = ConflictRules()) -> ConflictGraph:
    """Pair up same-labelled vertices of g1 and g2 and connect conflicting pairs.

    A vertex (u, a) represents mapping u in g1 onto a in g2. Two pairings
    conflict when they reuse a vertex (bijection rule), when exactly one of
    the corresponding source edges exists (edge consistency), or when both
    exist with different labels (label mismatch).
    """
    pairs: list[tuple[str, str]] = []
    for vu in g1.vertices:
        for va in g2.vertices:
            if vu.label == va.label:
                pairs.append((vu.id, va.id))

    ids = [f"{u}|{a}" for u, a in pairs]
    vertices = tuple(Vertex(vid, g1.label(u), rules.vertex_weight)
                     for vid, (u, a) in zip(ids, pairs))
    provenance = {vid: pair for vid, pair in zip(ids, pairs)}

    e1_labels = {frozenset((e.u, e.v)): e.label for e in g1.edges}
    e2_labels = {frozenset((e.u, e.v)): e.label for e in g2.edges}

    edges: list[Edge] = []
    for i, j in combinations(range(len(pairs)), 2):
        u, a = pairs[i]
        v, b = pairs[j]
        if u == v or a == b:
            edges.append(Edge(ids[i], ids[j]))
            continue
        k1, k2 = frozenset((u, v)), frozenset((a, b))
        in1, in2 = k1 in e1_labels, k2 in e2_labels
        if rules.edge_consistency and in1 != in2:
            edges.append(Edge(ids[i], ids[j]))
        elif rules.label_mismatch and in1 and in2 and e1_labels[k1] != e2_labels[k2]:
            edges.append(Edge(ids[i], ids[j]))
    return ConflictGraph(vertices, tuple(edges), provenance)


def generate_random_instance(n: int, d_range: tuple[float, float],
                             seed: int) -> ConflictGraph:
    """Random unit-weight conflict graph with density drawn from d_range.

    Edges are added uniformly at random without replacement until the
    realized density (percent of all possible edges) first reaches the
    drawn target, so the overshoot is at most one edge. Pure function of
    (n, d_range, seed).
    """
    lo, hi = d_range
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 <= lo <= hi <= 100:
        raise ValueError("density range must satisfy 0 <= lo <= hi <= 100")

    ids = [f"v{i}" for i in range(n)]
    vertices = tuple(Vertex(vid) for vid in ids)
    if n == 1:
        if hi > 0:
            warnings.warn("single-vertex instance has no edges; density treated as 0")
        return ConflictGraph(vertices, ())

    rng = Random(seed)
    d = rng.uniform(lo, hi)
    total = n * (n - 1) // 2
    pairs = list(combinations(range(n), 2))
    rng.shuffle(pairs)
    m = min(total, math.ceil(d * total / 100 - 1e-9)) if d > 0 else 0
    edges = tuple(Edge(ids[i], ids[j]) for i, j in pairs[:m])
    return ConflictGraph(vertices, edges)


def degree_distribution(g: LabelledGraph) -> DegreeHistogram:
    counts = Counter(g.degree(v.id) for v in g.vertices)
    return DegreeHistogram(dict(sorted(counts.items())), g.num_vertices)


def percolation_threshold(hist: DegreeHistogram) -> float:
    """Critical bond-occupation probability from the degree histogram.

    Computed as the ratio of the first derivative to the second derivative,
    at 1, of the degree generating function: sum(k*p_k) / sum(k*(k-1)*p_k).
    """
    if not hist.counts:
        raise ValueError("empty degree histogram")
    num = sum(k * c for k, c in hist.counts.items())
    den = sum(k * (k - 1) * c for k, c in hist.counts.items())
    if den == 0:
        raise ValueError("no giant component possible")
    return num / den


def connected_components(g: LabelledGraph,
                         subset: Iterable[str]) -> list[frozenset[str]]:
    """Partition subset into maximal connected sets of the induced subgraph."""
    subset = set(subset)
    for vid in subset:
        if not g.has_vertex(vid):
            raise ValueError(f"unknown vertex id {vid!r}")
    components: list[frozenset[str]] = []
    unvisited = set(subset)
    for start in sorted(subset):
        if start not in unvisited:
            continue
        comp = {start}
        unvisited.discard(start)
        frontier = [start]
        while frontier:
            cur = frontier.pop()
            for nbr in g.neighbors(cur):
                if nbr in unvisited:
                    unvisited.discard(nbr)
                    comp.add(nbr)
                    frontier.append(nbr)
        components.append(frozenset(comp))
    return components

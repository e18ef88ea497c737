"""Heuristic minor embedding into the hardware graph, validation, metrics,
and metric-based selection.

The embedder grows one chain per logical vertex: vertices are placed in
random order, each new chain is routed along cheapest paths toward the
chains of already-placed neighbors, overlaps are allowed temporarily at an
exponentially growing cost and repaired by rerouting, and finished chains
are trimmed of redundant qubits. A failed attempt is a value, not an
exception, so embeddability-rate experiments can be scripted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from random import Random

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .chimera import HardwareGraph
from .graphs import LabelledGraph
from .seeds import derive_seed

_NO_PREDECESSOR = -9999


@dataclass(frozen=True)
class Embedding:
    """Map from logical variable to its chain of physical qubits."""

    chains: dict[str, frozenset[int]]

    def __post_init__(self):
        clean = {}
        for var, chain in self.chains.items():
            chain = frozenset(int(q) for q in chain)
            if not chain:
                raise ValueError(f"empty chain for {var!r}")
            clean[str(var)] = chain
        object.__setattr__(self, "chains", clean)

    @cached_property
    def variables(self) -> tuple[str, ...]:
        return tuple(sorted(self.chains))

    def chain_sizes(self) -> tuple[int, ...]:
        return tuple(len(self.chains[v]) for v in self.variables)


@dataclass(frozen=True)
class EmbeddingMetrics:
    total_qubits: int
    longest_chain: int
    chain_std: float


@dataclass(frozen=True)
class ValidityReport:
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class EmbeddingResult:
    """Outcome of find_embedding; embedding is None when every trial failed."""

    embedding: Embedding | None
    trials: int
    successes: int

    @property
    def ok(self) -> bool:
        return self.embedding is not None


class _Router:
    """Shortest-path machinery over the usable hardware graph.

    Qubit costs grow exponentially with the number of chains already using
    the qubit, so chains may overlap temporarily but reroutes are steered
    hard away from contested qubits: the base is the hardware size, making
    any free detour cheaper than one shared qubit.
    """

    def __init__(self, hw: HardwareGraph):
        self.hw = hw
        self.n = hw.num_qubits
        rows, cols = [], []
        for u, v in hw.usable_edges:
            rows.extend((u, v))
            cols.extend((v, u))
        template = csr_matrix(
            (np.ones(len(rows)), (np.array(rows, np.int64), np.array(cols, np.int64))),
            shape=(self.n, self.n))
        self.indices = template.indices
        self.indptr = template.indptr
        self.usage = np.zeros(self.n, np.int64)
        self.usable = np.zeros(self.n, bool)
        self.usable[list(hw.usable_qubits)] = True
        self.penalty = float(max(self.n, 2))

    def cost(self, rng: Random, jitter: float) -> np.ndarray:
        """Per-qubit entry cost, with a small multiplicative jitter so equally
        cheap routes vary between calls."""
        cost = np.minimum(self.penalty ** self.usage.astype(np.float64), 1e12)
        if jitter:
            nprng = np.random.default_rng(rng.getrandbits(63))
            cost = cost * (1.0 + jitter * nprng.random(self.n))
        return cost

    def graph(self, cost: np.ndarray) -> csr_matrix:
        """Directed adjacency whose edge weights are the target qubit's cost."""
        return csr_matrix((cost[self.indices], self.indices, self.indptr),
                          shape=(self.n, self.n))

    def add(self, chain: set[int]):
        for q in chain:
            self.usage[q] += 1

    def remove(self, chain: set[int]):
        for q in chain:
            self.usage[q] -= 1

    def overfull_qubits(self) -> set[int]:
        return set(int(q) for q in np.flatnonzero(self.usage > 1))

    def overlapped(self) -> bool:
        return bool(np.any(self.usage > 1))


def _route_vertex(router: _Router, placed_chains: list[set[int]],
                  rng: Random, jitter: float = 0.05) -> set[int] | None:
    """Build a chain for one vertex toward its placed neighbors' chains.

    The chain root is the qubit minimizing the summed path cost to every
    neighbor chain; roots inside a neighbor chain are banned, otherwise
    stacking on a neighbor always undercuts an honest route. Paths are
    walked back nearest-neighbor-first and may branch off qubits already
    claimed for this chain, Steiner-tree style.
    """
    cost = router.cost(rng, jitter)
    if not placed_chains:
        candidates = np.flatnonzero(router.usable)
        if not len(candidates):
            return None
        best = cost[candidates].min()
        choices = [int(q) for q in candidates[cost[candidates] == best]]
        return {rng.choice(choices)}

    graph = router.graph(cost)
    dists, preds = [], []
    for chain in placed_chains:
        members = sorted(chain)
        dist, pred, _ = dijkstra(graph, directed=True, indices=members,
                                 return_predecessors=True, min_only=True)
        dist[members] = np.inf
        dists.append(dist)
        preds.append(pred)

    total = np.sum(dists, axis=0)
    total[~router.usable] = np.inf
    best = total.min()
    if not np.isfinite(best):
        return None
    minimizers = np.flatnonzero(total == best)
    root = int(minimizers[rng.randrange(len(minimizers))])

    chain = {root}
    order = sorted(range(len(placed_chains)), key=lambda i: dists[i][root])
    for i in order:
        source_chain, dist, pred = placed_chains[i], dists[i], preds[i]
        anchors = [q for q in sorted(chain) if np.isfinite(dist[q])]
        if not anchors:
            return None
        cur = min(anchors, key=lambda q: dist[q])
        while cur not in source_chain:
            chain.add(cur)
            cur = int(pred[cur])
            if cur == _NO_PREDECESSOR:
                return None
    return chain


def _chain_connected(chain: set[int], hw: HardwareGraph) -> bool:
    start = next(iter(chain))
    seen = {start}
    frontier = [start]
    while frontier:
        cur = frontier.pop()
        for nbr in hw.adjacency.get(cur, ()):
            if nbr in chain and nbr not in seen:
                seen.add(nbr)
                frontier.append(nbr)
    return len(seen) == len(chain)


def _chains_coupled(a: set[int], b: set[int], hw: HardwareGraph) -> bool:
    if len(a) > len(b):
        a, b = b, a
    return any(nbr in b for q in a for nbr in hw.adjacency.get(q, ()))


def _trim_chain(vertex: str, chains: dict[str, set[int]], logical: LabelledGraph,
                hw: HardwareGraph):
    """Drop chain qubits not needed for connectivity or edge coverage."""
    chain = chains[vertex]
    nbr_chains = [chains[u] for u in logical.neighbors(vertex) if u in chains]
    changed = True
    while changed and len(chain) > 1:
        changed = False
        for q in sorted(chain):
            trial = chain - {q}
            if not _chain_connected(trial, hw):
                continue
            if all(_chains_coupled(trial, other, hw) for other in nbr_chains):
                chain.discard(q)
                changed = True
                break
    chains[vertex] = chain


def _reroute(router: _Router, chains: dict[str, set[int]], vertex: str,
             logical: LabelledGraph, rng: Random, jitter: float) -> bool:
    """Tear out one chain and route it afresh; keep the old one on failure."""
    router.remove(chains[vertex])
    placed = [chains[u] for u in sorted(logical.neighbors(vertex)) if chains[u]]
    chain = _route_vertex(router, placed, rng, jitter)
    if chain is None:
        router.add(chains[vertex])
        return False
    chains[vertex] = chain
    router.add(chain)
    return True


def _grow_embedding(logical: LabelledGraph, hw: HardwareGraph, rng: Random,
                    repair_rounds: int = 48, stale_cap: int = 12) -> dict[str, set[int]] | None:
    """One embedding attempt: place every vertex, then repair overlaps.

    Repair reroutes contested chains first and mostly leaves clean ones
    alone. Conflicts that survive reroutes are usually walled in by clean
    chains, so stagnation escalates in two ways: reroute jitter heats up,
    letting chains accept slightly longer detours, and every few stale
    rounds the contested chains plus their logical neighborhood are torn
    out together so the rebuild sees the region empty. Progress is judged
    on (worst usage, conflict count); shrinking total usage alone is
    cosmetic while a conflict persists. Too many stale rounds abandons
    the attempt.
    """
    router = _Router(hw)
    order = list(logical.vertex_ids())
    rng.shuffle(order)
    chains: dict[str, set[int]] = {}

    for vertex in order:
        placed = [chains[u] for u in sorted(logical.neighbors(vertex)) if u in chains]
        chain = _route_vertex(router, placed, rng)
        if chain is None:
            return None
        chains[vertex] = chain
        router.add(chain)

    best_key = None
    stale = 0
    for rnd in range(repair_rounds):
        if not router.overlapped():
            break
        if stale and stale % 5 == 0:
            over = router.overfull_qubits()
            hot = set(v for v in order if chains[v] & over)
            for v in sorted(hot):
                hot.update(u for u in logical.neighbors(v))
            torn = [v for v in order if v in hot]
            rng.shuffle(torn)
            for vertex in torn:
                router.remove(chains[vertex])
                chains[vertex] = set()
            for vertex in torn:
                placed = [chains[u] for u in sorted(logical.neighbors(vertex))
                          if chains[u]]
                chain = _route_vertex(router, placed, rng)
                if chain is None:
                    return None
                chains[vertex] = chain
                router.add(chain)

        jitter = 0.05 + 0.15 * min(stale, 5)
        over = router.overfull_qubits()
        sweep = [v for v in order if chains[v] & over]
        rng.shuffle(sweep)
        if rnd % 4 == 3:
            cold = [v for v in order if not (chains[v] & over)]
            rng.shuffle(cold)
            sweep += cold
        for vertex in sweep:
            _reroute(router, chains, vertex, logical, rng, jitter)

        key = (int(router.usage.max()), int(np.sum(router.usage > 1)))
        if best_key is None or key < best_key:
            best_key, stale = key, 0
        else:
            stale += 1
            if stale > stale_cap:
                return None
    if router.overlapped():
        return None

    for vertex in sorted(chains):
        _trim_chain(vertex, chains, logical, hw)
    return chains


def find_embedding(logical: LabelledGraph, hw: HardwareGraph, trials: int = 100,
                   seed: int = 0) -> EmbeddingResult:
    """Best valid embedding over independent trials, by fewest physical qubits.

    Deterministic given the seed; each trial derives its own sub-seed.
    Returns a failure result instead of raising when no trial succeeds.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if logical.num_vertices == 0:
        return EmbeddingResult(Embedding({}), trials, trials)

    best: Embedding | None = None
    best_total = None
    successes = 0
    for trial in range(trials):
        rng = Random(derive_seed(seed, "embed-trial", trial))
        chains = _grow_embedding(logical, hw, rng)
        if chains is None:
            continue
        emb = Embedding({v: frozenset(c) for v, c in chains.items()})
        if not validate_embedding(emb, logical, hw).ok:
            continue
        successes += 1
        total = sum(len(c) for c in emb.chains.values())
        if best is None or total < best_total:
            best, best_total = emb, total
    return EmbeddingResult(best, trials, successes)


def validate_embedding(emb: Embedding, logical: LabelledGraph,
                       hw: HardwareGraph) -> ValidityReport:
    """List every invariant violation; an empty report means valid."""
    violations: list[str] = []
    for var in logical.vertex_ids():
        if var not in emb.chains:
            violations.append(f"missing chain for {var!r}")

    owner: dict[int, str] = {}
    for var in emb.variables:
        for q in sorted(emb.chains[var]):
            if not 0 <= q < hw.num_qubits:
                violations.append(f"illegal qubit id {q} in chain {var!r}")
            elif not hw.is_usable_qubit(q):
                violations.append(f"disabled qubit {q} in chain {var!r}")
            if q in owner:
                violations.append(f"overlap: qubit {q} in chains {owner[q]!r} and {var!r}")
            else:
                owner[q] = var

    for var in emb.variables:
        chain = set(emb.chains[var])
        if all(0 <= q < hw.num_qubits and hw.is_usable_qubit(q) for q in chain):
            if not _chain_connected(chain, hw):
                violations.append(f"disconnected chain {var!r}")

    for e in logical.edges:
        if e.u in emb.chains and e.v in emb.chains:
            if not _chains_coupled(set(emb.chains[e.u]), set(emb.chains[e.v]), hw):
                violations.append(f"uncovered logical edge ({e.u!r}, {e.v!r})")
    return ValidityReport(tuple(violations))


def embedding_metrics(emb: Embedding) -> EmbeddingMetrics:
    """Total qubit count, longest chain, and population std of chain sizes."""
    sizes = emb.chain_sizes()
    if not sizes:
        raise ValueError("embedding has no chains")
    return EmbeddingMetrics(int(sum(sizes)), int(max(sizes)),
                            float(np.std(np.array(sizes, np.float64))))


_CRITERIA = {
    "pq": lambda m: m.total_qubits,
    "lch": lambda m: m.longest_chain,
    "std": lambda m: m.chain_std,
}


def select_by_criterion(pool: list[Embedding], criterion: str) -> Embedding:
    """Embedding minimizing the chosen metric; earliest wins ties."""
    if not pool:
        raise ValueError("empty embedding pool")
    key = _CRITERIA.get(criterion.lower())
    if key is None:
        raise ValueError(f"unknown criterion {criterion!r}; expected pq, lch, or std")
    best = pool[0]
    best_value = key(embedding_metrics(best))
    for emb in pool[1:]:
        value = key(embedding_metrics(emb))
        if value < best_value:
            best, best_value = emb, value
    return best


def embedding_to_json(emb: Embedding, indent: int | None = None) -> str:
    return json.dumps({"chains": {v: sorted(emb.chains[v]) for v in emb.variables}},
                      indent=indent)


def embedding_from_json(text: str) -> Embedding:
    doc = json.loads(text)
    return Embedding({str(v): frozenset(c) for v, c in doc["chains"].items()})


def pool_to_json(pool: list[Embedding], indent: int | None = None) -> str:
    return json.dumps([json.loads(embedding_to_json(e)) for e in pool], indent=indent)


def pool_from_json(text: str) -> list[Embedding]:
    return [Embedding({str(v): frozenset(c) for v, c in doc["chains"].items()})
            for doc in json.loads(text)]

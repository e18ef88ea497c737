"""Objective construction for the co-k-plex problem and the transformations
down to hardware form: polynomial, QUBO, Ising, and gauge changes.

All downstream code is minimization; maximization polynomials are negated
during quadratization.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Callable, Iterable, Mapping

from .errors import BudgetExceededError
from .graphs import Edge, LabelledGraph, Vertex


@dataclass(frozen=True)
class PseudoBooleanPolynomial:
    """Multilinear polynomial over 0/1 variables with a tracked offset.

    Term keys are frozensets of variable ids; an empty key is folded into
    the offset and zero coefficients are dropped.
    """

    terms: dict[frozenset[str], float]
    sense: str = "min"
    offset: float = 0.0

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")
        clean: dict[frozenset[str], float] = {}
        offset = float(self.offset)
        for key, coeff in self.terms.items():
            key = frozenset(key)
            coeff = float(coeff)
            if not key:
                offset += coeff
            elif coeff != 0.0:
                clean[key] = clean.get(key, 0.0) + coeff
        clean = {k: c for k, c in clean.items() if c != 0.0}
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "offset", offset)

    @property
    def degree(self) -> int:
        return max((len(k) for k in self.terms), default=0)

    @cached_property
    def variables(self) -> tuple[str, ...]:
        return tuple(sorted(set().union(*self.terms) if self.terms else set()))

    def evaluate(self, assignment: Mapping[str, int]) -> float:
        total = self.offset
        for key, coeff in self.terms.items():
            prod = 1
            for var in key:
                prod *= assignment[var]
                if prod == 0:
                    break
            total += coeff * prod
        return total


@dataclass(frozen=True)
class QuboProblem:
    """Minimization of a quadratic polynomial over 0/1 variables."""

    linear: dict[str, float]
    quadratic: dict[tuple[str, str], float]
    offset: float = 0.0

    def __post_init__(self):
        lin = {v: float(c) for v, c in self.linear.items() if float(c) != 0.0}
        quad: dict[tuple[str, str], float] = {}
        for pair, coeff in self.quadratic.items():
            u, v = pair
            if u == v:
                raise ValueError(f"quadratic term with repeated variable {u!r}")
            key = (u, v) if u < v else (v, u)
            quad[key] = quad.get(key, 0.0) + float(coeff)
        quad = {k: c for k, c in quad.items() if c != 0.0}
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "quadratic", quad)
        object.__setattr__(self, "offset", float(self.offset))

    @cached_property
    def variables(self) -> tuple[str, ...]:
        names = set(self.linear)
        for u, v in self.quadratic:
            names.add(u)
            names.add(v)
        return tuple(sorted(names))

    def energy(self, z: Mapping[str, int]) -> float:
        total = self.offset
        for var, coeff in self.linear.items():
            total += coeff * z[var]
        for (u, v), coeff in self.quadratic.items():
            total += coeff * z[u] * z[v]
        return total


@dataclass(frozen=True)
class IsingProblem:
    """Minimization of local fields plus pairwise couplings over spins."""

    h: dict[str, float]
    J: dict[tuple[str, str], float]
    offset: float = 0.0

    def __post_init__(self):
        h = {v: float(c) for v, c in self.h.items() if float(c) != 0.0}
        J: dict[tuple[str, str], float] = {}
        for pair, coeff in self.J.items():
            u, v = pair
            if u == v:
                raise ValueError(f"coupling with repeated variable {u!r}")
            key = (u, v) if u < v else (v, u)
            J[key] = J.get(key, 0.0) + float(coeff)
        J = {k: c for k, c in J.items() if c != 0.0}
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "offset", float(self.offset))

    @cached_property
    def variables(self) -> tuple[str, ...]:
        names = set(self.h)
        for u, v in self.J:
            names.add(u)
            names.add(v)
        return tuple(sorted(names))

    @cached_property
    def adjacency(self) -> dict[str, frozenset[str]]:
        adj: dict[str, set[str]] = {v: set() for v in self.variables}
        for u, v in self.J:
            adj[u].add(v)
            adj[v].add(u)
        return {k: frozenset(s) for k, s in adj.items()}

    @property
    def num_variables(self) -> int:
        return len(self.variables)


def interaction_graph(p: IsingProblem) -> LabelledGraph:
    """Unweighted graph with a vertex per variable and an edge per coupling."""
    vertices = tuple(Vertex(v) for v in p.variables)
    edges = tuple(Edge(u, v) for u, v in sorted(p.J))
    return LabelledGraph(vertices, edges)


def ising_energy(p: IsingProblem, spins: Mapping[str, int]) -> float:
    """Energy of a full spin assignment, offset included."""
    for var in p.variables:
        if var not in spins:
            raise ValueError(f"assignment missing variable {var!r}")
    total = p.offset
    for var, coeff in p.h.items():
        total += coeff * spins[var]
    for (u, v), coeff in p.J.items():
        total += coeff * spins[u] * spins[v]
    return total


def gauge_transform(p: IsingProblem, g: Mapping[str, int]) -> IsingProblem:
    """Flip the sign convention of selected spins: h'_i = g_i h_i, J'_ij = g_i g_j J_ij.

    Energies are preserved under s'_i = g_i s_i; applying the same gauge
    twice is the identity.
    """
    for var in p.variables:
        if var not in g:
            raise ValueError(f"gauge missing variable {var!r}")
        if g[var] not in (-1, 1):
            raise ValueError(f"gauge value for {var!r} must be +1 or -1")
    h = {v: g[v] * c for v, c in p.h.items()}
    J = {(u, v): g[u] * g[v] * c for (u, v), c in p.J.items()}
    return IsingProblem(h, J, p.offset)


def enumerate_induced_stars(g: LabelledGraph, k: int,
                            budget: int = 10**7) -> list[tuple[str, frozenset[str]]]:
    """All (k+1)-subsets whose induced subgraph is a star with k leaves.

    Reported as (center, leaves); the center has degree k within the subset
    and the leaves are pairwise non-adjacent. For k=1 each edge is reported
    once with the smaller endpoint as center.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if k == 1:
        if g.num_edges > budget:
            raise BudgetExceededError("star enumeration budget exceeded")
        return sorted((min(e.u, e.v), frozenset((max(e.u, e.v),))) for e in g.edges)

    examined = 0
    stars: list[tuple[str, frozenset[str]]] = []
    for center in sorted(g.vertex_ids()):
        nbrs = sorted(g.neighbors(center))
        if len(nbrs) < k:
            continue
        examined += math.comb(len(nbrs), k)
        if examined > budget:
            raise BudgetExceededError("star enumeration budget exceeded")
        for leaves in combinations(nbrs, k):
            if all(not g.has_edge(a, b) for a, b in combinations(leaves, 2)):
                stars.append((center, frozenset(leaves)))
    return stars


def _dominated_subsets(g: LabelledGraph, k: int, budget: int) -> set[frozenset[str]]:
    """(k+1)-subsets containing a vertex adjacent to the other k members."""
    examined = 0
    subsets: set[frozenset[str]] = set()
    for center in sorted(g.vertex_ids()):
        nbrs = sorted(g.neighbors(center))
        if len(nbrs) < k:
            continue
        examined += math.comb(len(nbrs), k)
        if examined > budget:
            raise BudgetExceededError("star enumeration budget exceeded")
        for others in combinations(nbrs, k):
            subsets.add(frozenset((center,) + others))
    return subsets


def build_cokplex_polynomial(g: LabelledGraph, k: int,
                             penalty_rule: Callable[[tuple[float, ...]], float] | None = None,
                             budget: int = 10**7) -> PseudoBooleanPolynomial:
    """Maximization polynomial whose optima are the maximum weighted co-k-plexes.

    Vertex weights enter linearly; every (k+1)-subset in which some member
    is adjacent to all k others receives one penalty term. The penalty
    coefficient must exceed the smallest weight in the subset; the default
    is that minimum plus 1, which keeps unit-weight instances integral.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if penalty_rule is None:
        penalty_rule = lambda weights: min(weights) + 1.0

    terms: dict[frozenset[str], float] = {}
    for vid in g.vertex_ids():
        terms[frozenset((vid,))] = terms.get(frozenset((vid,)), 0.0) + g.weight(vid)
    for subset in _dominated_subsets(g, k, budget):
        weights = tuple(g.weight(v) for v in sorted(subset))
        a = penalty_rule(weights)
        if a <= min(weights):
            raise ValueError("penalty coefficient must exceed the smallest weight")
        terms[subset] = terms.get(subset, 0.0) - a
    return PseudoBooleanPolynomial(terms, "max", 0.0)


def _fresh_name(base: str, used: set[str]) -> str:
    name = base
    while name in used:
        name = "_" + name
    return name


def quadratize(poly: PseudoBooleanPolynomial) -> QuboProblem:
    """Reduce to a minimization QUBO by iterated pairwise product substitution.

    The most frequent pair among higher-order terms is replaced by an
    auxiliary variable with a penalty strong enough that every minimum of
    the output has the auxiliary equal to the product, so optima restricted
    to the original variables are preserved (value and argmin).
    """
    if poly.sense == "max":
        terms = {k: -c for k, c in poly.terms.items()}
        offset = -poly.offset
    else:
        terms = dict(poly.terms)
        offset = poly.offset

    used = set().union(*terms) if terms else set()
    aux_index = 0
    while any(len(key) > 2 for key in terms):
        pair_counts: Counter[tuple[str, str]] = Counter()
        for key in terms:
            if len(key) > 2:
                for pair in combinations(sorted(key), 2):
                    pair_counts[pair] += 1
        best = max(pair_counts.values())
        u, v = min(p for p, c in pair_counts.items() if c == best)

        aux = _fresh_name(f"w{aux_index}", used)
        aux_index += 1
        used.add(aux)

        strength = 1.0 + sum(abs(c) for key, c in terms.items() if u in key and v in key)
        replaced: dict[frozenset[str], float] = {}
        for key, coeff in terms.items():
            if len(key) > 2 and u in key and v in key:
                key = (key - {u, v}) | {aux}
            replaced[key] = replaced.get(key, 0.0) + coeff
        for key, coeff in ((frozenset((u, v)), strength),
                           (frozenset((u, aux)), -2.0 * strength),
                           (frozenset((v, aux)), -2.0 * strength),
                           (frozenset((aux,)), 3.0 * strength)):
            replaced[key] = replaced.get(key, 0.0) + coeff
        terms = {k: c for k, c in replaced.items() if c != 0.0}

    linear: dict[str, float] = {}
    quadratic: dict[tuple[str, str], float] = {}
    for key, coeff in terms.items():
        if len(key) == 1:
            (var,) = key
            linear[var] = linear.get(var, 0.0) + coeff
        else:
            a, b = sorted(key)
            quadratic[(a, b)] = quadratic.get((a, b), 0.0) + coeff
    return QuboProblem(linear, quadratic, offset)


def qubo_to_ising(q: QuboProblem) -> IsingProblem:
    """Exact change of variables z = (1 - s) / 2; energies match per assignment."""
    h: dict[str, float] = defaultdict(float)
    J: dict[tuple[str, str], float] = defaultdict(float)
    offset = q.offset
    for var, c in q.linear.items():
        offset += c / 2
        h[var] -= c / 2
    for (u, v), c in q.quadratic.items():
        offset += c / 4
        h[u] -= c / 4
        h[v] -= c / 4
        J[(u, v)] += c / 4
    return IsingProblem(dict(h), dict(J), offset)


def _doc_to_parts(doc: dict) -> tuple[dict, dict, float]:
    linear = {str(v): float(c) for v, c in doc.get("linear", {}).items()}
    quadratic = {}
    for entry in doc.get("quadratic", []):
        u, v, c = entry
        quadratic[(str(u), str(v))] = float(c)
    return linear, quadratic, float(doc.get("offset", 0.0))


def _parts_to_doc(linear: Mapping[str, float], quadratic: Mapping[tuple[str, str], float],
                  offset: float) -> dict:
    return {
        "linear": {v: linear[v] for v in sorted(linear)},
        "quadratic": [[u, v, quadratic[(u, v)]] for u, v in sorted(quadratic)],
        "offset": offset,
    }


def qubo_to_json(q: QuboProblem, indent: int | None = None) -> str:
    return json.dumps(_parts_to_doc(q.linear, q.quadratic, q.offset), indent=indent)


def qubo_from_json(text: str) -> QuboProblem:
    linear, quadratic, offset = _doc_to_parts(json.loads(text))
    return QuboProblem(linear, quadratic, offset)


def ising_to_json(p: IsingProblem, indent: int | None = None) -> str:
    return json.dumps(_parts_to_doc(p.h, p.J, p.offset), indent=indent)


def ising_from_json(text: str) -> IsingProblem:
    h, J, offset = _doc_to_parts(json.loads(text))
    return IsingProblem(h, J, offset)

"""Independent brute-force oracles and instance factories for the tests.

These deliberately avoid the package's own solvers so that equivalence
tests compare two separate implementations.
"""

from itertools import combinations, product
from random import Random

from anneal_forge.formulation import IsingProblem, PseudoBooleanPolynomial, QuboProblem
from anneal_forge.graphs import Edge, LabelledGraph, Vertex


def binary_assignments(variables):
    variables = list(variables)
    for bits in product((0, 1), repeat=len(variables)):
        yield dict(zip(variables, bits))


def spin_assignments(variables):
    variables = list(variables)
    for signs in product((-1, 1), repeat=len(variables)):
        yield dict(zip(variables, signs))


def brute_poly_best(poly: PseudoBooleanPolynomial):
    """Optimal value and all optimizing assignments of a polynomial."""
    maximize = poly.sense == "max"
    best = None
    argbest = []
    for assignment in binary_assignments(poly.variables):
        value = poly.evaluate(assignment)
        if best is None or (value > best if maximize else value < best):
            best, argbest = value, [assignment]
        elif value == best:
            argbest.append(assignment)
    return best, argbest


def brute_qubo_min(q: QuboProblem):
    best = None
    argbest = []
    for z in binary_assignments(q.variables):
        value = q.energy(z)
        if best is None or value < best:
            best, argbest = value, [z]
        elif value == best:
            argbest.append(z)
    return best, argbest


def brute_ising_min(p: IsingProblem):
    from anneal_forge.formulation import ising_energy
    best = None
    argbest = []
    for s in spin_assignments(p.variables):
        value = ising_energy(p, s)
        if best is None or value < best:
            best, argbest = value, [s]
        elif value == best:
            argbest.append(s)
    return best, argbest


def is_cokplex(g: LabelledGraph, subset, k: int) -> bool:
    """Each selected vertex may have at most k-1 selected neighbors."""
    subset = set(subset)
    return all(len(g.neighbors(v) & subset) <= k - 1 for v in subset)


def brute_cokplex(g: LabelledGraph, k: int):
    """Maximum weight and all maximum-weight co-k-plexes, by full enumeration."""
    ids = list(g.vertex_ids())
    best = 0.0
    argbest = [frozenset()]
    for r in range(1, len(ids) + 1):
        for subset in combinations(ids, r):
            if not is_cokplex(g, subset, k):
                continue
            weight = sum(g.weight(v) for v in subset)
            if weight > best:
                best, argbest = weight, [frozenset(subset)]
            elif weight == best:
                argbest.append(frozenset(subset))
    return best, argbest


def random_graph(rng: Random, n: int, p: float, unit_weights=True) -> LabelledGraph:
    vertices = tuple(
        Vertex(f"v{i}", "", 1.0 if unit_weights else rng.randint(1, 5))
        for i in range(n))
    edges = tuple(Edge(f"v{i}", f"v{j}") for i, j in combinations(range(n), 2)
                  if rng.random() < p)
    return LabelledGraph(vertices, edges)


def random_ising(rng: Random, n: int, p: float = 0.5, scale: float = 2.0) -> IsingProblem:
    names = [f"s{i}" for i in range(n)]
    h = {v: rng.uniform(-scale, scale) for v in names if rng.random() < 0.8}
    J = {(a, b): rng.uniform(-scale, scale)
         for a, b in combinations(names, 2) if rng.random() < p}
    return IsingProblem(h, J, rng.uniform(-1, 1))


def random_qubo(rng: Random, n: int, p: float = 0.5) -> QuboProblem:
    names = [f"z{i}" for i in range(n)]
    linear = {v: rng.uniform(-2, 2) for v in names if rng.random() < 0.8}
    quadratic = {(a, b): rng.uniform(-2, 2)
                 for a, b in combinations(names, 2) if rng.random() < p}
    return QuboProblem(linear, quadratic, rng.uniform(-1, 1))

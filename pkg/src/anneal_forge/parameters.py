"""Parameter setting for embedded Ising problems.

Turns a logical Ising problem plus an embedding into a physical problem on
hardware qubits: an iterative preprocessing step fixes variables whose
optimal spin is forced by their local field, logical fields and couplings
are distributed over chains, ferromagnetic intra-chain couplers hold each
chain together, and a scaling factor brings everything into the hardware's
value ranges. Two schemes are provided: a closed-form theoretical setter
and an empirical search that weakens chain couplers only as far as needed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .chimera import HardwareGraph
from .embedding import Embedding
from .errors import ParameterError
from .formulation import IsingProblem, _doc_to_parts, _parts_to_doc
from .sampler import SampleSet, sa_sample
from .seeds import derive_seed


def _sign(x: float) -> float:
    return 1.0 if x >= 0 else -1.0


@dataclass(frozen=True)
class HardwareRanges:
    """Value ranges the physical problem must respect.

    h_max and j_max bound fields and couplers; target is the tighter range
    the theoretical setter scales distributed values into.
    """

    h_max: float = 2.0
    j_max: float = 1.0
    target: float = 0.8

    def __post_init__(self):
        if self.h_max <= 0 or self.j_max <= 0 or self.target <= 0:
            raise ValueError("hardware ranges must be positive")


@dataclass(frozen=True)
class EmbeddedIsing:
    """Physical Ising problem produced by a parameter-setting scheme.

    chain_strengths holds, per logical variable, the value actually applied
    to every usable intra-chain coupler of its chain. fixed maps logical
    variables removed by preprocessing to their forced spins. alpha is the
    scaling factor applied to the distributed fields and couplers.
    """

    physical: IsingProblem
    chain_strengths: dict[str, float]
    alpha: float
    fixed: dict[str, int]
    method: str

    def __post_init__(self):
        if self.method not in ("theoretical", "empirical"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")


def preprocess_fix_qubits(
        logical: IsingProblem) -> tuple[IsingProblem, dict[str, int], dict[str, float]]:
    """Iteratively fix variables whose field outweighs their couplings.

    A variable with C_i = sum of neighboring |J| minus |h_i| below zero is
    optimal at the spin opposing its field; it is removed, its couplings
    fold into the neighbors' fields, and its field folds into the offset.
    Returns the reduced problem, the fixed-spin map, and the final C values
    of the surviving variables.
    """
    h = {v: logical.h.get(v, 0.0) for v in logical.variables}
    J = dict(logical.J)
    offset = logical.offset
    fixed: dict[str, int] = {}

    def c_values():
        c = {v: -abs(h[v]) for v in h}
        for (u, v), coeff in J.items():
            c[u] += abs(coeff)
            c[v] += abs(coeff)
        return c

    while True:
        c = c_values()
        negatives = sorted(v for v, value in c.items() if value < 0)
        if not negatives:
            return IsingProblem(h, J, offset), fixed, c
        var = negatives[0]
        spin = 1 if h[var] < 0 else -1
        fixed[var] = spin
        offset += h[var] * spin
        for pair in sorted(J):
            if var in pair:
                other = pair[0] if pair[1] == var else pair[1]
                h[other] += J.pop(pair) * spin
        del h[var]


def _intra_couplers(chain: frozenset[int], hw: HardwareGraph) -> list[tuple[int, int]]:
    qubits = sorted(chain)
    return [(u, v) for i, u in enumerate(qubits) for v in qubits[i + 1:]
            if hw.is_usable_edge(u, v)]


def _inter_couplers(a: frozenset[int], b: frozenset[int],
                    hw: HardwareGraph) -> list[tuple[int, int]]:
    pairs = set()
    for p in a:
        for q in b:
            if hw.is_usable_edge(p, q):
                pairs.add((p, q) if p < q else (q, p))
    return sorted(pairs)


def _check_chains(reduced: IsingProblem, emb: Embedding):
    for var in reduced.variables:
        if var not in emb.chains:
            raise ParameterError(f"embedding has no chain for logical variable {var!r}")


def _distribute_couplings(reduced: IsingProblem, emb: Embedding,
                          hw: HardwareGraph) -> dict[tuple[int, int], float]:
    phys_J: dict[tuple[int, int], float] = {}
    for (i, j), coeff in sorted(reduced.J.items()):
        couplers = _inter_couplers(emb.chains[i], emb.chains[j], hw)
        if not couplers:
            raise ParameterError(
                f"no usable couplers realize logical edge ({i!r}, {j!r})")
        share = coeff / len(couplers)
        for pair in couplers:
            phys_J[pair] = share
    return phys_J


def set_parameters_theoretical(logical: IsingProblem, emb: Embedding,
                               hw: HardwareGraph,
                               ranges: HardwareRanges = HardwareRanges(),
                               eps: float = 0.1) -> EmbeddedIsing:
    """Closed-form parameter setting with ground-state preservation.

    After preprocessing, each logical coupling is split evenly over the
    usable couplers between the two chains, each physical field is set so
    a chain's fields sum to the logical field while every qubit's field is
    dominated by its outside couplings, and provisional intra-chain
    strengths are derived from the chain's C value. The scaling factor
    brings fields and couplers into the target range while keeping the
    provisional strengths above -1; intra-chain couplers are then pinned
    to -1, which can only be stronger.
    """
    reduced, fixed, c_values = preprocess_fix_qubits(logical)
    _check_chains(reduced, emb)

    phys_J = _distribute_couplings(reduced, emb, hw)
    outside: dict[int, float] = {}
    for (p, q), coeff in phys_J.items():
        outside[p] = outside.get(p, 0.0) + abs(coeff)
        outside[q] = outside.get(q, 0.0) + abs(coeff)

    phys_h: dict[int, float] = {}
    provisional: dict[str, float] = {}
    intra: dict[str, list[tuple[int, int]]] = {}
    for var in reduced.variables:
        chain = emb.chains[var]
        size = len(chain)
        h_i = reduced.h.get(var, 0.0)
        c_i = c_values[var]
        for qubit in sorted(chain):
            phys_h[qubit] = _sign(h_i) * (outside.get(qubit, 0.0) - c_i / size)
        provisional[var] = -((size - 1) / size) * c_i - eps
        intra[var] = _intra_couplers(chain, hw)

    bounds = [ranges.target / max(abs(value) for value in phys_h.values())
              if any(phys_h.values()) else None,
              ranges.target / max(abs(value) for value in phys_J.values())
              if phys_J else None,
              1.0 / max(abs(provisional[var]) for var in provisional
                        if len(emb.chains[var]) > 1)
              if any(len(emb.chains[var]) > 1 for var in provisional) else None]
    finite = [b for b in bounds if b is not None]
    alpha = min(finite) if finite else 1.0

    h = {str(q): alpha * value for q, value in phys_h.items()}
    J = {(str(p), str(q)): alpha * value for (p, q), value in phys_J.items()}
    strengths: dict[str, float] = {}
    for var in reduced.variables:
        strengths[var] = -1.0
        for p, q in intra[var]:
            J[(str(p), str(q))] = -1.0
    physical = IsingProblem(h, J, 0.0)
    return EmbeddedIsing(physical, strengths, alpha, fixed, "theoretical")


def compute_scaling_factor(h_values, j_values, f_values,
                           ranges: HardwareRanges = HardwareRanges()) -> float:
    """Largest joint factor keeping fields and couplers within hardware range.

    Ferromagnetic strengths live on couplers and share the coupler bound.
    All-zero inputs need no scaling and give 1.
    """
    bounds = []
    mh = max((abs(v) for v in h_values), default=0.0)
    if mh > 0:
        bounds.append(ranges.h_max / mh)
    mj = max((abs(v) for v in j_values), default=0.0)
    mf = max((abs(v) for v in f_values), default=0.0)
    coupler = max(mj, mf)
    if coupler > 0:
        bounds.append(ranges.j_max / coupler)
    return min(bounds) if bounds else 1.0


def _default_inner_solver(p: IsingProblem, reads: int, seed: int) -> SampleSet:
    # probe sweeps sized so long chains can order; the probe is tiny anyway
    return sa_sample(p, reads=reads, sweeps=1024, seed=seed)


def _any_unbroken_read(ss: SampleSet, chains: dict[str, frozenset[int]]) -> bool:
    index = {v: k for k, v in enumerate(ss.variables)}
    multi = [[index[str(q)] for q in sorted(chain) if str(q) in index]
             for chain in chains.values() if len(chain) > 1]
    for read in range(ss.num_reads):
        row = ss.spins[read]
        if all(len({int(row[k]) for k in cols}) <= 1 for cols in multi):
            return True
    return False


def set_parameters_empirical(logical: IsingProblem, emb: Embedding,
                             hw: HardwareGraph,
                             ranges: HardwareRanges = HardwareRanges(),
                             eps_step: float = 0.5, iters: int = 5,
                             inner_solver=None, seed: int = 0,
                             max_rounds: int = 10) -> EmbeddedIsing:
    """Search for the weakest uniform chain strength that avoids breaks.

    Fields and couplings are split evenly over chain qubits and couplers.
    Starting at F = -1, each round jointly rescales (h, J, F) into range,
    solves the physical problem iters times with the inner solver, and
    stops at the first round where some solution has no broken chain;
    otherwise F decreases by eps_step. Exceeding max_rounds raises.
    """
    if inner_solver is None:
        inner_solver = _default_inner_solver
    reduced, fixed, _ = preprocess_fix_qubits(logical)
    _check_chains(reduced, emb)

    base_J = _distribute_couplings(reduced, emb, hw)
    base_h: dict[int, float] = {}
    intra: dict[str, list[tuple[int, int]]] = {}
    for var in reduced.variables:
        chain = emb.chains[var]
        for qubit in sorted(chain):
            base_h[qubit] = reduced.h.get(var, 0.0) / len(chain)
        intra[var] = _intra_couplers(chain, hw)

    for round_index in range(max_rounds):
        strength = -1.0 - round_index * eps_step
        alpha = compute_scaling_factor(base_h.values(), base_J.values(),
                                       [strength], ranges)
        h = {str(q): alpha * value for q, value in base_h.items()}
        J = {(str(p), str(q)): alpha * value for (p, q), value in base_J.items()}
        applied = alpha * strength
        for var in reduced.variables:
            for p, q in intra[var]:
                J[(str(p), str(q))] = applied
        physical = IsingProblem(h, J, 0.0)
        ss = inner_solver(physical, iters,
                          derive_seed(seed, "empirical-round", round_index))
        if _any_unbroken_read(ss, {v: emb.chains[v] for v in reduced.variables}):
            strengths = {var: applied for var in reduced.variables}
            return EmbeddedIsing(physical, strengths, alpha, fixed, "empirical")
    raise ParameterError("empirical F search diverged")


def embedded_to_json(e: EmbeddedIsing, indent: int | None = None) -> str:
    doc = _parts_to_doc(e.physical.h, e.physical.J, e.physical.offset)
    doc["alpha"] = e.alpha
    doc["chain_strengths"] = {v: e.chain_strengths[v] for v in sorted(e.chain_strengths)}
    doc["fixed"] = {v: e.fixed[v] for v in sorted(e.fixed)}
    doc["method"] = e.method
    return json.dumps(doc, indent=indent)


def embedded_from_json(text: str) -> EmbeddedIsing:
    doc = json.loads(text)
    h, J, offset = _doc_to_parts(doc)
    return EmbeddedIsing(IsingProblem(h, J, offset),
                         {str(v): float(c) for v, c in doc["chain_strengths"].items()},
                         float(doc["alpha"]),
                         {str(v): int(s) for v, s in doc["fixed"].items()},
                         str(doc["method"]))

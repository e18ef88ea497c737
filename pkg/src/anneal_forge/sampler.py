"""Classical solvers: the simulated-annealing sampler that stands in for
the annealer, exact brute-force references, and greedy descent.
"""

from __future__ import annotations

import base64
import json
import time
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import _kernels
from .formulation import IsingProblem, ising_energy, ising_from_json, ising_to_json
from .graphs import LabelledGraph


@dataclass(frozen=True)
class SampleSet:
    """Spin samples of one problem, one row per read, in read order."""

    problem: IsingProblem
    variables: tuple[str, ...]
    spins: np.ndarray
    energies: np.ndarray
    config: dict
    wall_time_per_read: float

    @property
    def num_reads(self) -> int:
        return int(self.spins.shape[0])

    def assignment(self, read: int) -> dict[str, int]:
        return {v: int(s) for v, s in zip(self.variables, self.spins[read])}


def problem_arrays(p: IsingProblem):
    """Canonical dense arrays for kernels: sorted variables, fields, CSR
    neighbor lists, and coupler triples."""
    variables = p.variables
    index = {v: i for i, v in enumerate(variables)}
    n = len(variables)
    h = np.zeros(n, np.float64)
    for v, c in p.h.items():
        h[index[v]] = c

    nbrs: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    cu = np.empty(len(p.J), np.int64)
    cv = np.empty(len(p.J), np.int64)
    cj = np.empty(len(p.J), np.float64)
    for k, ((u, v), c) in enumerate(sorted(p.J.items())):
        iu, iv = index[u], index[v]
        nbrs[iu].append((iv, c))
        nbrs[iv].append((iu, c))
        cu[k], cv[k], cj[k] = iu, iv, c

    nbr_ptr = np.zeros(n + 1, np.int64)
    for i in range(n):
        nbr_ptr[i + 1] = nbr_ptr[i] + len(nbrs[i])
    nbr_idx = np.empty(nbr_ptr[-1], np.int64)
    nbr_val = np.empty(nbr_ptr[-1], np.float64)
    pos = 0
    for i in range(n):
        for j, c in sorted(nbrs[i]):
            nbr_idx[pos] = j
            nbr_val[pos] = c
            pos += 1
    return variables, h, nbr_ptr, nbr_idx, nbr_val, cu, cv, cj


def _energies(spins: np.ndarray, h, cu, cv, cj, offset: float) -> np.ndarray:
    if spins.shape[1] == 0:
        return np.full(spins.shape[0], offset, np.float64)
    e = spins.astype(np.float64) @ h
    if len(cj):
        e += (spins[:, cu] * spins[:, cv]).astype(np.float64) @ cj
    return e + offset


def sa_sample(p: IsingProblem, reads: int = 1000, sweeps: int = 1000,
              schedule: tuple[float, float] = (0.1, 10.0), seed: int = 0) -> SampleSet:
    """Sample with independent simulated-annealing reads.

    Each read runs single-spin-flip Metropolis sweeps in fixed variable
    order while the inverse temperature rises geometrically from
    schedule[0] to schedule[1]. Deterministic given the seed.
    """
    if reads < 1 or sweeps < 1:
        raise ValueError("reads and sweeps must be at least 1")
    beta_min, beta_max = schedule
    if not 0 < beta_min <= beta_max:
        raise ValueError("schedule must satisfy 0 < beta_min <= beta_max")

    variables, h, nbr_ptr, nbr_idx, nbr_val, cu, cv, cj = problem_arrays(p)
    start = time.perf_counter()
    if variables:
        spins = _kernels.sa_kernel(len(variables), h, nbr_ptr, nbr_idx, nbr_val,
                                   reads, sweeps, float(beta_min), float(beta_max),
                                   seed & (2**63 - 1))
    else:
        spins = np.empty((reads, 0), np.int8)
    elapsed = time.perf_counter() - start
    energies = _energies(spins, h, cu, cv, cj, p.offset)
    config = {"reads": reads, "sweeps": sweeps,
              "schedule": ["geometric", float(beta_min), float(beta_max)],
              "seed": int(seed)}
    return SampleSet(p, variables, spins, energies, config, elapsed / reads)


def brute_force_ground(p: IsingProblem, cap: int = 26):
    """Exact minimum energy and the complete set of minimizing assignments.

    Exhaustive over all spin assignments; refuses problems larger than cap.
    """
    variables = p.variables
    n = len(variables)
    if n > cap:
        raise ValueError(f"variable cap exceeded: {n} > {cap}")
    if n == 0:
        return p.offset, [{}]

    _, h, _, _, _, cu, cv, cj = problem_arrays(p)
    shifts = np.arange(n, dtype=np.uint32)
    chunk = 1 << min(n, 20)
    best = np.inf
    best_codes: list[np.ndarray] = []
    for start in range(0, 1 << n, chunk):
        codes = np.arange(start, start + chunk, dtype=np.uint32)
        bits = (codes[:, None] >> shifts) & 1
        spins = (1 - 2 * bits).astype(np.int8)
        e = _energies(spins, h, cu, cv, cj, p.offset)
        lo = e.min()
        if lo < best:
            best = lo
            best_codes = [codes[e == lo]]
        elif lo == best:
            best_codes.append(codes[e == lo])

    states = []
    for codes in best_codes:
        for code in codes:
            code = int(code)
            states.append({v: 1 - 2 * ((code >> j) & 1)
                           for j, v in enumerate(variables)})
    return float(best), states


def brute_force_cokplex(g: LabelledGraph, k: int, cap: int = 24):
    """Exact maximum weighted co-k-plex by pruned subset search.

    Every vertex of a feasible set has at most k-1 neighbors inside it.
    Returns the best weight and every optimal vertex set.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    ids = sorted(g.vertex_ids())
    if len(ids) > cap:
        raise ValueError(f"vertex cap exceeded: {len(ids)} > {cap}")
    weights = [g.weight(v) for v in ids]
    nbr_sets = [frozenset(ids.index(u) for u in g.neighbors(v)) for v in ids]
    suffix = [0.0] * (len(ids) + 1)
    for i in range(len(ids) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + weights[i]

    best = 0.0
    argbest: list[frozenset[str]] = [frozenset()]
    selected: list[int] = []
    counts = [0] * len(ids)

    def visit(i: int, weight: float):
        nonlocal best, argbest
        if weight > best:
            best = weight
            argbest = [frozenset(ids[j] for j in selected)]
        elif weight == best and selected:
            argbest.append(frozenset(ids[j] for j in selected))
        if i == len(ids) or weight + suffix[i] < best:
            return
        v_nbrs = nbr_sets[i]
        in_count = sum(1 for j in selected if j in v_nbrs)
        if in_count <= k - 1 and all(counts[j] <= k - 2 for j in selected if j in v_nbrs):
            selected.append(i)
            for j in selected[:-1]:
                if j in v_nbrs:
                    counts[j] += 1
            counts[i] = in_count
            visit(i + 1, weight + weights[i])
            selected.pop()
            for j in selected:
                if j in v_nbrs:
                    counts[j] -= 1
        visit(i + 1, weight)

    visit(0, 0.0)
    if best == 0.0 and frozenset() not in argbest:
        argbest.insert(0, frozenset())
    return best, sorted(set(argbest), key=sorted)


def greedy_descent(p: IsingProblem, state: Mapping[str, int]) -> dict[str, int]:
    """Strictly-improving single-flip descent to a 1-flip local minimum.

    The flip with the largest energy decrease is taken each step; among
    equal decreases the lowest variable id wins. Idempotent.
    """
    variables, h, nbr_ptr, nbr_idx, nbr_val, _, _, _ = problem_arrays(p)
    for v in variables:
        if v not in state:
            raise ValueError(f"assignment missing variable {v!r}")
    if not variables:
        return {}
    spins = np.array([[state[v] for v in variables]], np.int8)
    _kernels.greedy_kernel(spins, h, nbr_ptr, nbr_idx, nbr_val)
    return {v: int(s) for v, s in zip(variables, spins[0])}


def sampleset_energies_valid(ss: SampleSet, tol: float = 1e-9) -> bool:
    """Recompute each stored energy from its assignment."""
    return all(abs(ising_energy(ss.problem, ss.assignment(r)) - ss.energies[r]) <= tol
               for r in range(ss.num_reads))


def _chain_break_counts(ss: SampleSet, emb) -> np.ndarray:
    """Per-read count of chains whose qubits disagree; absent qubits skipped."""
    index = {v: i for i, v in enumerate(ss.variables)}
    counts = np.zeros(ss.num_reads, np.int64)
    for var in emb.variables:
        cols = [index[str(q)] for q in sorted(emb.chains[var]) if str(q) in index]
        if len(cols) > 1:
            block = ss.spins[:, cols]
            counts += (block != block[:, :1]).any(axis=1)
    return counts


def sampleset_to_csv(ss: SampleSet, emb=None) -> str:
    """One row per read: index, energy, broken chains, spins as a base64
    bitmap (bit j set means variable j is +1, in variable order)."""
    broken = _chain_break_counts(ss, emb) if emb is not None \
        else np.zeros(ss.num_reads, np.int64)
    lines = ["read_index,energy,broken_chains,spins"]
    for r in range(ss.num_reads):
        bits = base64.b64encode(np.packbits(ss.spins[r] == 1)).decode("ascii")
        lines.append(f"{r},{float(ss.energies[r])!r},{int(broken[r])},{bits}")
    return "\n".join(lines) + "\n"


def sampleset_config_json(ss: SampleSet, indent: int | None = None) -> str:
    """Sidecar document: the problem, variable order, and sampler config."""
    return json.dumps({"problem": json.loads(ising_to_json(ss.problem)),
                       "variables": list(ss.variables),
                       "config": ss.config,
                       "wall_time_per_read_s": ss.wall_time_per_read},
                      indent=indent)


def sampleset_from_csv(csv_text: str, sidecar_text: str,
                       tol: float = 1e-9) -> SampleSet:
    """Rebuild a SampleSet from its CSV and sidecar; energies are verified."""
    doc = json.loads(sidecar_text)
    problem = ising_from_json(json.dumps(doc["problem"]))
    variables = tuple(doc["variables"])
    if variables != problem.variables:
        raise ValueError("sidecar variable order disagrees with the problem")

    lines = csv_text.strip().split("\n")
    if lines[0] != "read_index,energy,broken_chains,spins":
        raise ValueError("unrecognized sample CSV header")
    n = len(variables)
    spins = np.empty((len(lines) - 1, n), np.int8)
    energies = np.empty(len(lines) - 1, np.float64)
    for row, line in enumerate(lines[1:]):
        _, energy, _, blob = line.split(",")
        energies[row] = float(energy)
        raw = np.frombuffer(base64.b64decode(blob), np.uint8)
        bits = np.unpackbits(raw, count=n) if n else np.empty(0, np.uint8)
        spins[row] = np.where(bits == 1, 1, -1)

    ss = SampleSet(problem, variables, spins, energies, doc["config"],
                   float(doc["wall_time_per_read_s"]))
    if not sampleset_energies_valid(ss, tol):
        raise ValueError("stored energies disagree with the assignments")
    return ss

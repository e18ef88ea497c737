"""Decoding physical samples back to logical assignments.

Each logical variable takes the majority spin of its chain, exact ties
fall to a seeded fair coin, and the decoded assignment is optionally
refined by greedy descent on the logical problem. Chain breakage is
summarized per read and in aggregate so the broken-qubit probability can
be compared against percolation thresholds.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from random import Random
from typing import Mapping

import numpy as np

from .embedding import Embedding
from .formulation import IsingProblem, interaction_graph, ising_energy
from .graphs import LabelledGraph, connected_components
from .sampler import SampleSet, greedy_descent
from .seeds import derive_seed


def _chain_spins(sample: Mapping[str, int], emb: Embedding,
                 var: str) -> list[int]:
    spins = []
    for q in sorted(emb.chains[var]):
        name = str(q)
        if name not in sample:
            raise ValueError(f"sample missing value for qubit {name}")
        spins.append(int(sample[name]))
    return spins


def majority_vote(sample: Mapping[str, int], emb: Embedding,
                  seed: int = 0) -> dict[str, int]:
    """Most repeated spin per chain; exact ties decided by a fair coin.

    Variables are processed in sorted order so coin consumption, and hence
    the output, is deterministic for a given seed.
    """
    rng = Random(seed)
    logical: dict[str, int] = {}
    for var in emb.variables:
        total = sum(_chain_spins(sample, emb, var))
        if total > 0:
            logical[var] = 1
        elif total < 0:
            logical[var] = -1
        else:
            logical[var] = 1 if rng.random() < 0.5 else -1
    return logical


def broken_qubits(sample: Mapping[str, int], emb: Embedding) -> frozenset[str]:
    """Logical variables whose chain spins are not unanimous."""
    return frozenset(var for var in emb.variables
                     if len(set(_chain_spins(sample, emb, var))) > 1)


def biggest_broken_cluster(broken: frozenset[str],
                           logical: LabelledGraph) -> int:
    """Size of the largest connected set of broken variables (0 if none)."""
    if not broken:
        return 0
    return max(len(c) for c in connected_components(logical, broken))


def _broken_matrix(ss: SampleSet, emb: Embedding) -> np.ndarray:
    """Boolean reads x variables matrix of chain breakage indicators."""
    index = {v: k for k, v in enumerate(ss.variables)}
    out = np.zeros((ss.num_reads, len(emb.variables)), bool)
    for j, var in enumerate(emb.variables):
        cols = []
        for q in sorted(emb.chains[var]):
            name = str(q)
            if name not in index:
                raise ValueError(f"sample missing value for qubit {name}")
            cols.append(index[name])
        if len(cols) > 1:
            block = ss.spins[:, cols]
            out[:, j] = (block != block[:, :1]).any(axis=1)
    return out


def estimate_p_bq(ss: SampleSet, emb: Embedding) -> float:
    """Mean over reads and logical variables of the chain-broken indicator."""
    if ss.num_reads == 0:
        raise ValueError("empty sample set")
    if not emb.variables:
        return 0.0
    return float(_broken_matrix(ss, emb).mean())


def fraction_reads_broken(ss: SampleSet, emb: Embedding) -> float:
    """Fraction of reads in which at least one chain is broken.

    Secondary aggregation of the same indicator used by estimate_p_bq.
    """
    if ss.num_reads == 0:
        raise ValueError("empty sample set")
    if not emb.variables:
        return 0.0
    return float(_broken_matrix(ss, emb).any(axis=1).mean())


@dataclass(frozen=True)
class DecodedSet:
    """Per-read logical decodes of one physical sample set.

    assignments hold the refined logical states with the fixed map merged
    in; mv_energies are the energies before greedy refinement. broken sets
    contain only variables whose multi-qubit chain disagreed.
    """

    problem: IsingProblem
    assignments: tuple[dict, ...]
    mv_energies: np.ndarray
    refined_energies: np.ndarray
    broken: tuple[frozenset[str], ...]
    biggest_clusters: tuple[int, ...]
    p_bq: float

    @property
    def num_reads(self) -> int:
        return len(self.assignments)


def decode_and_refine(ss: SampleSet, emb: Embedding, logical: IsingProblem,
                      fixed: Mapping[str, int] | None = None,
                      seed: int = 0) -> DecodedSet:
    """Majority-vote each read, merge fixed spins, refine by greedy descent.

    Chains of preprocessed (fixed) variables are never sampled, so voting
    runs on the remaining chains only. Both the vote energy and the refined
    energy are recorded per read.
    """
    fixed = dict(fixed or {})
    live = Embedding({v: emb.chains[v] for v in emb.variables
                      if v not in fixed})
    graph = interaction_graph(logical)

    assignments = []
    mv_energies = []
    refined_energies = []
    broken_sets = []
    clusters = []
    for read in range(ss.num_reads):
        sample = ss.assignment(read)
        voted = majority_vote(sample, live, derive_seed(seed, "decode-read", read))
        voted.update(fixed)
        refined = greedy_descent(logical, voted)
        broken = broken_qubits(sample, live)
        assignments.append(refined)
        mv_energies.append(ising_energy(logical, voted))
        refined_energies.append(ising_energy(logical, refined))
        broken_sets.append(broken)
        clusters.append(biggest_broken_cluster(
            broken & frozenset(graph.vertex_ids()), graph))
    p_bq = estimate_p_bq(ss, live) if ss.num_reads else 0.0
    return DecodedSet(logical, tuple(assignments),
                      np.asarray(mv_energies, np.float64),
                      np.asarray(refined_energies, np.float64),
                      tuple(broken_sets), tuple(clusters), p_bq)


def decoded_to_csv(ds: DecodedSet) -> str:
    """One row per read: vote energy, refined energy, breakage summary."""
    buf = io.StringIO()
    buf.write("read_index,mv_energy,refined_energy,num_broken,"
              "biggest_broken_cluster\n")
    for read in range(ds.num_reads):
        buf.write(f"{read},{float(ds.mv_energies[read])!r},"
                  f"{float(ds.refined_energies[read])!r},{len(ds.broken[read])},"
                  f"{ds.biggest_clusters[read]}\n")
    return buf.getvalue()

"""Empirical embedding selection: score a pool of embeddings by sampled
success probability and keep the best through a two-stage tournament.

Stage 1 scores every embedding; the top finalists are rescored in stage 2
and the argmax wins. Success means a decoded, refined read reaches the
target energy, which is the known ground energy when available and the
best energy observed across the pool otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chimera import HardwareGraph
from .decoding import decode_and_refine
from .embedding import Embedding, find_embedding
from .errors import AnnealForgeError, EmbeddingError
from .formulation import IsingProblem
from .graphs import LabelledGraph
from .parameters import (
    HardwareRanges,
    set_parameters_empirical,
    set_parameters_theoretical,
)
from .sampler import sa_sample
from .seeds import derive_seed


@dataclass(frozen=True)
class SelectionConfig:
    """Tournament sizes and the solver settings used for scoring."""

    stage1_reads: int = 1000
    stage2_reads: int | None = None
    finalists: int = 5
    sweeps: int = 256
    tol: float = 1e-9
    param_method: str = "theoretical"

    def __post_init__(self):
        if self.stage1_reads < 1 or self.finalists < 1 or self.sweeps < 1:
            raise ValueError("tournament counts must be positive")
        if self.stage2_reads is not None and self.stage2_reads < 1:
            raise ValueError("tournament counts must be positive")
        if self.param_method not in ("theoretical", "empirical"):
            raise ValueError(f"unknown parameter method {self.param_method!r}")


@dataclass(frozen=True)
class EmbeddingScore:
    """Scoring record of one pool member; stages are None when not run."""

    index: int
    stage1: float | None
    stage2: float | None
    error: str | None = None


@dataclass(frozen=True)
class SelectionResult:
    embedding: Embedding
    winner_index: int
    scores: tuple[EmbeddingScore, ...]
    target_energy: float
    used_known_ground: bool


def build_embedding_pool(logical: LabelledGraph, hw: HardwareGraph,
                         size: int, seed: int = 0,
                         max_attempts: int | None = None) -> list[Embedding]:
    """Collect up to size distinct valid embeddings from single-trial runs.

    Distinctness is inequality of chain maps. The pool may come back short
    when the attempt budget (default 3x size) runs out.
    """
    if size < 1:
        raise ValueError("pool size must be positive")
    attempts = 3 * size if max_attempts is None else max_attempts
    pool: list[Embedding] = []
    seen = set()
    for attempt in range(attempts):
        result = find_embedding(logical, hw, trials=1,
                                seed=derive_seed(seed, "pool-attempt", attempt))
        if not result.ok:
            continue
        key = tuple(sorted((v, tuple(sorted(c)))
                           for v, c in result.embedding.chains.items()))
        if key in seen:
            continue
        seen.add(key)
        pool.append(result.embedding)
        if len(pool) == size:
            break
    return pool


def _score_one(logical: IsingProblem, emb: Embedding, hw: HardwareGraph,
               ranges: HardwareRanges, config: SelectionConfig,
               reads: int, seed: int) -> np.ndarray:
    """Refined energies of one scoring run; exceptions surface to caller."""
    if config.param_method == "theoretical":
        embedded = set_parameters_theoretical(logical, emb, hw, ranges)
    else:
        embedded = set_parameters_empirical(logical, emb, hw, ranges,
                                            seed=derive_seed(seed, "params"))
    ss = sa_sample(embedded.physical, reads=reads, sweeps=config.sweeps,
                   seed=derive_seed(seed, "sample"))
    decoded = decode_and_refine(ss, emb, logical, embedded.fixed,
                                seed=derive_seed(seed, "decode"))
    return decoded.refined_energies


def select_empirically(pool, logical: IsingProblem, hw: HardwareGraph,
                       ground_energy: float | None = None,
                       config: SelectionConfig = SelectionConfig(),
                       ranges: HardwareRanges = HardwareRanges(),
                       seed: int = 0) -> SelectionResult:
    """Two-stage success-probability tournament over an embedding pool.

    Finalists are ranked by stage-1 success against the stage-1 target;
    reported scores use the final target, which can drop if stage 2 finds
    a lower energy under the best-found fallback. Per-embedding failures
    exclude that embedding only.
    """
    pool = list(pool)
    if not pool:
        raise ValueError("empty embedding pool")

    stage1_energies: dict[int, np.ndarray] = {}
    errors: dict[int, str] = {}
    for i, emb in enumerate(pool):
        try:
            stage1_energies[i] = _score_one(
                logical, emb, hw, ranges, config, config.stage1_reads,
                derive_seed(seed, "select-stage1", i))
        except (AnnealForgeError, ValueError) as exc:
            errors[i] = f"{type(exc).__name__}: {exc}"
    if not stage1_energies:
        raise EmbeddingError("every embedding in the pool failed scoring")

    if ground_energy is not None:
        target = float(ground_energy)
    else:
        target = min(float(e.min()) for e in stage1_energies.values()
                     if e.size)

    def fraction(energies: np.ndarray, tgt: float) -> float:
        if not energies.size:
            return 0.0
        return float(np.mean(energies <= tgt + config.tol))

    ranking = sorted(stage1_energies,
                     key=lambda i: (-fraction(stage1_energies[i], target), i))
    finalists = ranking[:config.finalists]

    stage2_reads = config.stage2_reads or config.stage1_reads
    stage2_energies: dict[int, np.ndarray] = {}
    for i in finalists:
        try:
            stage2_energies[i] = _score_one(
                logical, pool[i], hw, ranges, config, stage2_reads,
                derive_seed(seed, "select-stage2", i))
        except (AnnealForgeError, ValueError) as exc:
            errors[i] = f"{type(exc).__name__}: {exc}"
    if not stage2_energies:
        raise EmbeddingError("every finalist failed stage-2 scoring")

    if ground_energy is None:
        observed = [float(e.min()) for e in stage2_energies.values() if e.size]
        if observed:
            target = min(target, min(observed))

    scores = tuple(
        EmbeddingScore(
            i,
            fraction(stage1_energies[i], target) if i in stage1_energies else None,
            fraction(stage2_energies[i], target) if i in stage2_energies else None,
            errors.get(i))
        for i in range(len(pool)))
    winner = min(stage2_energies,
                 key=lambda i: (-fraction(stage2_energies[i], target), i))
    return SelectionResult(pool[winner], winner, scores, target,
                           ground_energy is not None)

"""Tests for embedding pool construction and empirical selection."""

import pytest

from anneal_forge.chimera import apply_defects, build_chimera
from anneal_forge.embedding import Embedding, validate_embedding
from anneal_forge.errors import EmbeddingError
from anneal_forge.formulation import IsingProblem, interaction_graph
from anneal_forge.sampler import brute_force_ground
from anneal_forge.selection import (
    SelectionConfig,
    build_embedding_pool,
    select_empirically,
)


def triangle_problem():
    return IsingProblem({"a": -0.2},
                        {("a", "b"): -1.0, ("b", "c"): -0.5, ("a", "c"): 0.4})


FAST = SelectionConfig(stage1_reads=40, finalists=2, sweeps=32)


class TestBuildEmbeddingPool:
    def test_pool_members_are_valid_and_distinct(self):
        hw = build_chimera(2, 2, 4)
        logical = interaction_graph(triangle_problem())
        pool = build_embedding_pool(logical, hw, size=5, seed=1)
        assert len(pool) == 5
        seen = set()
        for emb in pool:
            assert validate_embedding(emb, logical, hw).ok
            key = tuple(sorted(emb.chains.items()))
            assert key not in seen
            seen.add(key)

    def test_deterministic(self):
        hw = build_chimera(2, 2, 4)
        logical = interaction_graph(triangle_problem())
        one = build_embedding_pool(logical, hw, size=3, seed=2)
        two = build_embedding_pool(logical, hw, size=3, seed=2)
        assert [e.chains for e in one] == [e.chains for e in two]

    def test_budget_exhaustion_gives_short_pool(self):
        hw = build_chimera(1, 1, 4)
        dead = apply_defects(hw, disabled_qubits=tuple(range(8)))
        logical = interaction_graph(triangle_problem())
        pool = build_embedding_pool(logical, dead, size=4, seed=0)
        assert pool == []

    def test_size_must_be_positive(self):
        hw = build_chimera(1, 1, 4)
        with pytest.raises(ValueError):
            build_embedding_pool(interaction_graph(triangle_problem()), hw, 0)


class TestSelectionConfig:
    def test_rejects_bad_counts(self):
        with pytest.raises(ValueError):
            SelectionConfig(stage1_reads=0)
        with pytest.raises(ValueError):
            SelectionConfig(finalists=0)
        with pytest.raises(ValueError):
            SelectionConfig(stage2_reads=0)

    def test_rejects_unknown_method(self):
        with pytest.raises(ValueError):
            SelectionConfig(param_method="oracle")


class TestSelectEmpirically:
    def setup_method(self):
        self.hw = build_chimera(2, 2, 4)
        self.logical = triangle_problem()
        self.ground, _ = brute_force_ground(self.logical)
        self.pool = build_embedding_pool(interaction_graph(self.logical),
                                         self.hw, size=4, seed=3)
        assert len(self.pool) == 4

    def test_pool_of_one(self):
        result = select_empirically(self.pool[:1], self.logical, self.hw,
                                    ground_energy=self.ground, config=FAST,
                                    seed=1)
        assert result.winner_index == 0
        assert result.embedding.chains == self.pool[0].chains
        assert result.scores[0].stage1 is not None
        assert result.scores[0].stage2 is not None
        assert result.used_known_ground

    def test_winner_has_best_stage2_score(self):
        result = select_empirically(self.pool, self.logical, self.hw,
                                    ground_energy=self.ground, config=FAST,
                                    seed=2)
        stage2 = {s.index: s.stage2 for s in result.scores
                  if s.stage2 is not None}
        assert stage2
        assert stage2[result.winner_index] == max(stage2.values())
        winners = [i for i, v in sorted(stage2.items())
                   if v == stage2[result.winner_index]]
        assert result.winner_index == winners[0]

    def test_score_table_covers_pool(self):
        result = select_empirically(self.pool, self.logical, self.hw,
                                    ground_energy=self.ground, config=FAST,
                                    seed=4)
        assert len(result.scores) == len(self.pool)
        assert [s.index for s in result.scores] == list(range(len(self.pool)))
        scored = [s for s in result.scores if s.stage1 is not None]
        assert len(scored) == len(self.pool)
        finalists = [s for s in result.scores if s.stage2 is not None]
        assert len(finalists) == FAST.finalists

    def test_best_found_fallback(self):
        result = select_empirically(self.pool, self.logical, self.hw,
                                    config=FAST, seed=5)
        assert not result.used_known_ground
        assert result.target_energy >= self.ground - 1e-9

    def test_known_ground_recorded_as_target(self):
        result = select_empirically(self.pool, self.logical, self.hw,
                                    ground_energy=self.ground, config=FAST,
                                    seed=6)
        assert result.target_energy == self.ground
        assert result.used_known_ground

    def test_failed_embeddings_are_excluded(self):
        broken = Embedding({"a": {0, 4}, "b": {1}})
        pool = [broken] + self.pool[:2]
        result = select_empirically(pool, self.logical, self.hw,
                                    ground_energy=self.ground, config=FAST,
                                    seed=7)
        assert result.scores[0].error is not None
        assert result.scores[0].stage1 is None
        assert result.winner_index in (1, 2)

    def test_all_failures_raise(self):
        broken = Embedding({"a": {0, 4}})
        with pytest.raises(EmbeddingError):
            select_empirically([broken, broken], self.logical, self.hw,
                               config=FAST, seed=8)

    def test_empty_pool_rejected(self):
        with pytest.raises(ValueError):
            select_empirically([], self.logical, self.hw, config=FAST)

    def test_deterministic(self):
        one = select_empirically(self.pool, self.logical, self.hw,
                                 ground_energy=self.ground, config=FAST, seed=9)
        two = select_empirically(self.pool, self.logical, self.hw,
                                 ground_energy=self.ground, config=FAST, seed=9)
        assert one.scores == two.scores
        assert one.winner_index == two.winner_index

    def test_empirical_parameter_method(self):
        config = SelectionConfig(stage1_reads=30, finalists=2, sweeps=32,
                                 param_method="empirical")
        result = select_empirically(self.pool[:2], self.logical, self.hw,
                                    ground_energy=self.ground, config=config,
                                    seed=10)
        assert result.scores[result.winner_index].stage2 is not None

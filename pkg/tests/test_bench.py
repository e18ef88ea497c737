"""Benchmark pipeline: grid orchestration, tables, and reproducibility."""

import json

import pytest

from anneal_forge.bench import (
    TABLES,
    BenchConfig,
    config_from_json,
    config_to_json,
    run_bench,
    write_run,
)
from anneal_forge.chimera import build_chimera
from anneal_forge.errors import EmbeddingError


SMOKE = BenchConfig(sizes=(10,), density_ranges=((70.0, 80.0),), instances=2,
                    calls=2, anneals=50, sweeps=32, embed_trials=4,
                    pool_size=3, pool_attempts=9, selection_reads=40,
                    finalists=2, bootstrap_iterations=100,
                    tts_percentiles=(25, 50), seed=7)


@pytest.fixture(scope="module")
def smoke_run():
    return run_bench(SMOKE)


def rows(run, name):
    lines = run.tables[name].strip().split("\n")
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


class TestConfig:
    def test_defaults_are_valid(self):
        cfg = BenchConfig()
        assert cfg.sizes == tuple(range(18, 51, 4))
        assert len(cfg.density_ranges) == 3

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            BenchConfig(sizes=())
        with pytest.raises(ValueError):
            BenchConfig(instances=0)
        with pytest.raises(ValueError):
            BenchConfig(tau_us=0.0)
        with pytest.raises(ValueError):
            BenchConfig(density_ranges=((80.0, 70.0),))
        with pytest.raises(ValueError):
            BenchConfig(tts_percentiles=(0,))

    def test_json_round_trip(self):
        text = config_to_json(SMOKE)
        assert config_from_json(text) == SMOKE

    def test_unknown_field_rejected(self):
        doc = json.loads(config_to_json(SMOKE))
        doc["reads"] = 10
        with pytest.raises(ValueError, match="unknown config fields"):
            config_from_json(json.dumps(doc))


class TestSmokeRun:
    def test_completes_without_error(self, smoke_run):
        assert smoke_run.ok
        assert smoke_run.error is None

    def test_all_tables_present(self, smoke_run):
        assert set(smoke_run.tables) == set(TABLES)

    def test_row_counts_match_grid(self, smoke_run):
        assert len(rows(smoke_run, "instances")) == 2
        assert len(rows(smoke_run, "embeddability")) == 2
        assert len(rows(smoke_run, "criteria_comparison")) == 2 * 4
        assert len(rows(smoke_run, "param_comparison")) == 2 * 2
        assert len(rows(smoke_run, "pbq_vs_pc")) == 2
        assert len(rows(smoke_run, "r99_decode")) == 2
        assert len(rows(smoke_run, "tts")) == len(SMOKE.tts_percentiles)

    def test_small_instances_get_exact_targets(self, smoke_run):
        for row in rows(smoke_run, "instances"):
            assert row["target_source"] == "exact"
            assert row["target_energy"] != ""

    def test_success_probabilities_in_range(self, smoke_run):
        for table in ("criteria_comparison", "param_comparison"):
            for row in rows(smoke_run, table):
                assert 0.0 <= float(row["success_prob"]) <= 1.0

    def test_criteria_cover_all_four(self, smoke_run):
        seen = {(r["instance"], r["criterion"])
                for r in rows(smoke_run, "criteria_comparison")}
        assert seen == {(str(i), c) for i in range(2)
                        for c in ("pq", "lch", "std", "empirical")}

    def test_residual_nonnegative_at_exact_target(self, smoke_run):
        for row in rows(smoke_run, "param_comparison"):
            assert float(row["residual"]) >= -1e-9

    def test_refined_never_worse_than_vote_only(self, smoke_run):
        for row in rows(smoke_run, "r99_decode"):
            assert float(row["theta_refined"]) >= float(row["theta_mv"])
            assert float(row["r99_refined"]) <= float(row["r99_mv"])

    def test_percolation_column_positive(self, smoke_run):
        for row in rows(smoke_run, "pbq_vs_pc"):
            assert float(row["p_c"]) > 0.0
            assert 0.0 <= float(row["p_bq"]) <= 1.0

    def test_timings_cover_every_instance(self, smoke_run):
        cells = smoke_run.timings["cells"]
        assert len(cells) == 1
        stamps = cells[0]["instances"]
        assert len(stamps) == 2
        for stamp in stamps:
            assert stamp["embed_seconds"] > 0.0
            assert set(stamp["setup_seconds"]) == {"theoretical", "empirical"}

    def test_rerun_is_byte_identical(self, smoke_run):
        again = run_bench(SMOKE)
        for name in TABLES:
            assert again.tables[name] == smoke_run.tables[name]


class TestUnembeddable:
    def test_becomes_data_point_not_error(self):
        cfg = BenchConfig(sizes=(14,), density_ranges=((70.0, 80.0),),
                          instances=1, calls=1, anneals=20, sweeps=16,
                          embed_trials=2, pool_size=2, pool_attempts=4,
                          selection_reads=20, finalists=1,
                          bootstrap_iterations=50, tts_percentiles=(50,),
                          seed=3)
        run = run_bench(cfg, build_chimera(1, 1, 4))
        assert run.ok
        (emb_row,) = rows(run, "embeddability")
        assert emb_row["pool_found"] == "0"
        assert emb_row["best_total_qubits"] == ""
        (inst_row,) = rows(run, "instances")
        assert inst_row["target_source"] == "unembedded"
        assert rows(run, "tts") == []
        assert rows(run, "criteria_comparison") == []


class TestEmpiricalDivergence:
    def test_becomes_zero_success_row(self, monkeypatch):
        import anneal_forge.bench as bench_mod
        from anneal_forge.errors import ParameterError

        def diverge(*args, **kwargs):
            raise ParameterError("empirical F search diverged")

        monkeypatch.setattr(bench_mod, "set_parameters_empirical", diverge)
        run = run_bench(SMOKE)
        assert run.ok
        by_method = {(r["instance"], r["method"]): r
                     for r in rows(run, "param_comparison")}
        for i in range(2):
            emp = by_method[(str(i), "empirical")]
            assert emp["converged"] == "0"
            assert emp["success_prob"] == "0.0"
            assert emp["alpha"] == ""
            theor = by_method[(str(i), "theoretical")]
            assert theor["converged"] == "1"
            assert float(theor["success_prob"]) >= 0.0


class TestStageFailure:
    def test_error_recorded_with_partial_tables(self, monkeypatch):
        import anneal_forge.bench as bench_mod

        def explode(*args, **kwargs):
            raise EmbeddingError("forced failure")

        monkeypatch.setattr(bench_mod, "select_empirically", explode)
        run = run_bench(SMOKE)
        assert not run.ok
        assert run.error["stage"] == "EmbeddingError"
        assert "forced failure" in run.error["message"]
        assert run.error["instance"] == 0
        assert len(rows(run, "embeddability")) == 1
        assert rows(run, "criteria_comparison") == []


class TestWriteRun:
    def test_writes_tables_and_sidecars(self, smoke_run, tmp_path):
        written = write_run(smoke_run, tmp_path)
        names = {p.split("/")[-1] for p in written}
        assert names == {f"{n}.csv" for n in TABLES} | {"timings.json",
                                                        "config.json"}
        body = (tmp_path / "instances.csv").read_text()
        assert body == smoke_run.tables["instances"]
        cfg = config_from_json((tmp_path / "config.json").read_text())
        assert cfg == SMOKE

    def test_error_record_written_when_present(self, smoke_run, tmp_path):
        import dataclasses

        failed = dataclasses.replace(
            smoke_run, error={"stage": "embedding", "message": "x"})
        write_run(failed, tmp_path)
        doc = json.loads((tmp_path / "error.json").read_text())
        assert doc["stage"] == "embedding"

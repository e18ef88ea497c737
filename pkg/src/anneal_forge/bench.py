"""Benchmark pipeline over a grid of random instances.

For every (size, density) cell the pipeline generates conflict graphs,
formulates the co-k-plex Ising problem, embeds it, sets parameters both
ways, samples, decodes, and aggregates statistics into CSV tables:
embeddability, per-criterion embedding comparison, theoretical-versus-
empirical parameter setting, broken-qubit probability versus percolation
threshold, vote-only versus refined R99, and bootstrap time-to-solution.

All randomness derives from the master seed, so rerunning a config
reproduces the CSV bodies byte for byte. Wall-clock measurements are
therefore kept out of the tables and reported in a separate timings
document.
"""

from __future__ import annotations

import io
import json
import time
from dataclasses import dataclass, fields

import numpy as np

from .chimera import HardwareGraph, bundled_defect_topology
from .decoding import decode_and_refine
from .embedding import embedding_metrics, select_by_criterion
from .errors import AnnealForgeError, ParameterError, StageError
from .formulation import (
    build_cokplex_polynomial,
    interaction_graph,
    quadratize,
    qubo_to_ising,
)
from .graphs import degree_distribution, generate_random_instance, percolation_threshold
from .parameters import set_parameters_empirical, set_parameters_theoretical
from .sampler import brute_force_ground, sa_sample
from .seeds import derive_seed
from .selection import SelectionConfig, build_embedding_pool, select_empirically
from .stats import bootstrap_tts, posterior, r99, residual_energy, success_probability

CRITERIA = ("pq", "lch", "std", "empirical")
PARAM_METHODS = ("theoretical", "empirical")

TABLES = ("instances", "embeddability", "criteria_comparison",
          "param_comparison", "pbq_vs_pc", "r99_decode", "tts")

_HEADERS = {
    "instances": ("size,d_lo,d_hi,instance,vertices,edges,density_percent,"
                  "ising_vars,target_energy,target_source"),
    "embeddability": ("size,d_lo,d_hi,instance,pool_found,best_total_qubits,"
                      "best_longest_chain,best_chain_std"),
    "criteria_comparison": ("size,d_lo,d_hi,instance,criterion,total_qubits,"
                            "longest_chain,chain_std,success_prob"),
    "param_comparison": ("size,d_lo,d_hi,instance,method,alpha,success_prob,"
                         "mean_biggest_cluster,residual,residual_is_relative,"
                         "converged"),
    "pbq_vs_pc": "size,d_lo,d_hi,instance,p_bq,fraction_reads_broken,p_c",
    "r99_decode": ("size,d_lo,d_hi,instance,theta_mv,theta_refined,"
                   "r99_mv,r99_refined"),
    "tts": "size,d_lo,d_hi,q,tau_us,instances,mean_us,std_us,clamped_draws",
}


@dataclass(frozen=True)
class BenchConfig:
    """Grid shape and solver budget of one benchmark run.

    Defaults follow the full study design; desk runs shrink counts, never
    the pipeline itself.
    """

    sizes: tuple[int, ...] = tuple(range(18, 51, 4))
    density_ranges: tuple[tuple[float, float], ...] = ((65.0, 75.0),
                                                       (75.0, 85.0),
                                                       (85.0, 95.0))
    instances: int = 10
    k: int = 1
    calls: int = 5
    anneals: int = 10_000
    sweeps: int = 1000
    tau_us: float = 5.0
    # embedder attempt budget for filling the pool; pool_attempts overrides
    embed_trials: int = 100
    pool_size: int = 50
    pool_attempts: int | None = None
    selection_reads: int = 1000
    finalists: int = 5
    bootstrap_iterations: int = 1000
    tts_percentiles: tuple[int, ...] = (25, 50, 75)
    ground_cap: int = 26
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        object.__setattr__(self, "density_ranges",
                           tuple((float(lo), float(hi))
                                 for lo, hi in self.density_ranges))
        object.__setattr__(self, "tts_percentiles",
                           tuple(int(q) for q in self.tts_percentiles))
        counts = (self.instances, self.k, self.calls, self.anneals,
                  self.sweeps, self.embed_trials, self.pool_size,
                  self.selection_reads, self.finalists,
                  self.bootstrap_iterations, self.ground_cap)
        if not self.sizes or min(self.sizes) < 1:
            raise ValueError("sizes must be positive")
        if any(c < 1 for c in counts):
            raise ValueError("all counts must be positive")
        if self.tau_us <= 0:
            raise ValueError("tau must be positive")
        for lo, hi in self.density_ranges:
            if not 0 <= lo <= hi <= 100:
                raise ValueError("density ranges must lie within [0, 100]")
        for q in self.tts_percentiles:
            if not 0 < q < 100:
                raise ValueError("percentiles must lie strictly in (0, 100)")


def config_to_json(cfg: BenchConfig, indent: int | None = None) -> str:
    doc = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    doc["sizes"] = list(doc["sizes"])
    doc["density_ranges"] = [list(r) for r in doc["density_ranges"]]
    doc["tts_percentiles"] = list(doc["tts_percentiles"])
    return json.dumps(doc, indent=indent)


def config_from_json(text: str) -> BenchConfig:
    doc = json.loads(text)
    known = {f.name for f in fields(BenchConfig)}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    if "density_ranges" in doc:
        doc["density_ranges"] = tuple(tuple(r) for r in doc["density_ranges"])
    return BenchConfig(**doc)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


class _Table:
    def __init__(self, name: str):
        self.name = name
        self.buf = io.StringIO()
        self.buf.write(_HEADERS[name] + "\n")

    def row(self, *values):
        self.buf.write(",".join(_fmt(v) for v in values) + "\n")

    def body(self) -> str:
        return self.buf.getvalue()


@dataclass
class BenchRun:
    """Tables plus out-of-band timing data and the first failure, if any."""

    config: BenchConfig
    tables: dict[str, str]
    timings: dict
    error: dict | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _solve_and_decode(ising, emb, embedded, cfg, root, label):
    """C calls of N anneals each, decoded; returns the DecodedSets."""
    decoded = []
    for call in range(cfg.calls):
        ss = sa_sample(embedded.physical, reads=cfg.anneals, sweeps=cfg.sweeps,
                       seed=derive_seed(root, "solve", label, call))
        decoded.append(decode_and_refine(
            ss, emb, ising, embedded.fixed,
            seed=derive_seed(root, "decode", label, call)))
    return decoded


def _best_energy(decoded_sets) -> float:
    return min(float(ds.refined_energies.min()) for ds in decoded_sets
               if ds.num_reads)


def _success_fraction(counts, cfg) -> float:
    return sum(counts) / (cfg.calls * cfg.anneals)


def _run_instance(cfg: BenchConfig, hw: HardwareGraph, tables, size, d_lo,
                  d_hi, index):
    """Full pipeline for one instance; returns (posterior | None, timing)."""
    root = derive_seed(cfg.seed, "instance", size, d_lo, d_hi, index)
    timing = {"instance": index}
    cell = (size, d_lo, d_hi, index)

    g = generate_random_instance(size, (d_lo, d_hi), derive_seed(root, "graph"))
    poly = build_cokplex_polynomial(g, cfg.k)
    ising = qubo_to_ising(quadratize(poly))

    attempts = cfg.pool_attempts if cfg.pool_attempts is not None \
        else cfg.embed_trials
    start = time.perf_counter()
    pool = build_embedding_pool(interaction_graph(ising), hw, cfg.pool_size,
                                seed=derive_seed(root, "pool"),
                                max_attempts=attempts)
    timing["embed_seconds"] = time.perf_counter() - start

    if pool:
        m = embedding_metrics(select_by_criterion(pool, "pq"))
        tables["embeddability"].row(*cell, len(pool), m.total_qubits,
                                    m.longest_chain, m.chain_std)
    else:
        tables["embeddability"].row(*cell, 0, None, None, None)
        tables["instances"].row(*cell, g.num_vertices, g.num_edges,
                                g.density_percent(), ising.num_variables,
                                None, "unembedded")
        return None, timing

    if ising.num_variables <= cfg.ground_cap:
        target, _ = brute_force_ground(ising, cap=cfg.ground_cap)
        target_source = "exact"
    else:
        target = None
        target_source = "best_found"

    # per-criterion embedding comparison
    selected = {c: select_by_criterion(pool, c) for c in ("pq", "lch", "std")}
    sel_cfg = SelectionConfig(stage1_reads=cfg.selection_reads,
                              finalists=cfg.finalists, sweeps=cfg.sweeps)
    selection = select_empirically(pool, ising, hw, ground_energy=target,
                                   config=sel_cfg,
                                   seed=derive_seed(root, "selection"))
    selected["empirical"] = selection.embedding

    decoded = {}
    setup_seconds = {}
    embedded_by_method = {}
    for crit in CRITERIA:
        emb = selected[crit]
        timer = time.perf_counter()
        embedded = set_parameters_theoretical(ising, emb, hw)
        elapsed = time.perf_counter() - timer
        if crit == "pq":
            setup_seconds["theoretical"] = elapsed
            embedded_by_method["theoretical"] = embedded
        decoded[crit] = _solve_and_decode(ising, emb, embedded, cfg, root,
                                          f"crit-{crit}")

    # a diverged weakest-F search is an instance outcome, not a run failure
    timer = time.perf_counter()
    try:
        embedded_emp = set_parameters_empirical(
            ising, selected["pq"], hw,
            seed=derive_seed(root, "params-empirical"))
    except ParameterError:
        embedded_emp = None
    setup_seconds["empirical"] = time.perf_counter() - timer
    decoded_methods = {"theoretical": decoded["pq"]}
    if embedded_emp is not None:
        embedded_by_method["empirical"] = embedded_emp
        decoded_methods["empirical"] = _solve_and_decode(
            ising, selected["pq"], embedded_emp, cfg, root, "param-empirical")
    timing["setup_seconds"] = setup_seconds

    if target is None:
        candidates = [_best_energy(d) for d in decoded.values()]
        candidates += [_best_energy(d) for m, d in decoded_methods.items()
                       if m != "theoretical"]
        target = min(candidates)
    tables["instances"].row(*cell, g.num_vertices, g.num_edges,
                            g.density_percent(), ising.num_variables,
                            target, target_source)

    for crit in CRITERIA:
        m = embedding_metrics(selected[crit])
        counts = success_probability(decoded[crit], target)
        tables["criteria_comparison"].row(*cell, crit,
                                          m.total_qubits, m.longest_chain,
                                          m.chain_std,
                                          _success_fraction(counts, cfg))

    for method in PARAM_METHODS:
        if method not in decoded_methods:
            tables["param_comparison"].row(*cell, method, None, 0.0, None,
                                           None, None, 0)
            continue
        sets = decoded_methods[method]
        counts = success_probability(sets, target)
        clusters = [c for ds in sets for c in ds.biggest_clusters]
        res = residual_energy(_best_energy(sets), target)
        tables["param_comparison"].row(
            *cell, method, embedded_by_method[method].alpha,
            _success_fraction(counts, cfg),
            float(np.mean(clusters)) if clusters else 0.0,
            res.value, res.relative, 1)

    theor = decoded_methods["theoretical"]
    p_bq = float(np.mean([ds.p_bq for ds in theor]))
    broken_fraction = float(np.mean(
        [np.mean([1.0 if b else 0.0 for b in ds.broken]) for ds in theor]))
    p_c = percolation_threshold(degree_distribution(g))
    tables["pbq_vs_pc"].row(*cell, p_bq, broken_fraction, p_c)

    y_ref = success_probability(theor, target)
    y_mv = success_probability(theor, target, energies="mv")
    post_ref = posterior(y_ref, cfg.anneals)
    post_mv = posterior(y_mv, cfg.anneals)
    tables["r99_decode"].row(*cell, post_mv.mean, post_ref.mean,
                             r99(post_mv.mean), r99(post_ref.mean))
    return post_ref, timing


def run_bench(cfg: BenchConfig, hw: HardwareGraph | None = None) -> BenchRun:
    """Execute the full grid; never raises on pipeline errors.

    The first stage failure stops the run; everything produced so far is
    kept and the failure is described in the result's error record.
    """
    if hw is None:
        hw = bundled_defect_topology()
    tables = {name: _Table(name) for name in TABLES}
    timings = {"cells": []}
    error = None
    started = time.perf_counter()

    for size in cfg.sizes:
        if error:
            break
        for d_lo, d_hi in cfg.density_ranges:
            if error:
                break
            cell_timing = {"size": size, "d_lo": d_lo, "d_hi": d_hi,
                           "instances": []}
            posteriors = []
            for index in range(cfg.instances):
                try:
                    post, timing = _run_instance(cfg, hw, tables, size,
                                                 d_lo, d_hi, index)
                except AnnealForgeError as exc:
                    stage = exc.stage if isinstance(exc, StageError) \
                        else type(exc).__name__
                    error = {"stage": stage, "message": str(exc),
                             "size": size, "d_lo": d_lo, "d_hi": d_hi,
                             "instance": index}
                    break
                cell_timing["instances"].append(timing)
                if post is not None:
                    posteriors.append(post)
            timings["cells"].append(cell_timing)
            if error:
                break
            for q in cfg.tts_percentiles:
                if not posteriors:
                    continue
                t = bootstrap_tts(posteriors, q=q, b=cfg.bootstrap_iterations,
                                  tau_us=cfg.tau_us,
                                  seed=derive_seed(cfg.seed, "tts", size,
                                                   d_lo, d_hi, q))
                tables["tts"].row(size, d_lo, d_hi, q, cfg.tau_us,
                                  len(posteriors), t.mean_us, t.std_us,
                                  t.clamped_draws)

    timings["total_seconds"] = time.perf_counter() - started
    return BenchRun(cfg, {name: t.body() for name, t in tables.items()},
                    timings, error)


def write_run(run: BenchRun, out_dir) -> list[str]:
    """Persist tables, timings, config, and any error record; returns paths."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, body in run.tables.items():
        path = out / f"{name}.csv"
        path.write_text(body)
        written.append(str(path))
    (out / "timings.json").write_text(json.dumps(run.timings, indent=2))
    written.append(str(out / "timings.json"))
    (out / "config.json").write_text(config_to_json(run.config, indent=2))
    written.append(str(out / "config.json"))
    if run.error is not None:
        (out / "error.json").write_text(json.dumps(run.error, indent=2))
        written.append(str(out / "error.json"))
    return written

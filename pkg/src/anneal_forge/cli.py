"""Command-line pipeline over the library.

Every subcommand is a thin composition of module operations: it reads the
persisted artifacts of earlier stages, runs one stage, and writes its own
artifacts into the --out directory under fixed names. Any stage can
therefore be rerun from its inputs alone, and identical seeds reproduce
identical outputs.

Exit codes: 0 on success, 2 on a stage failure. Failures leave a
machine-readable error.json in the output directory when one is given.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .bench import BenchConfig, config_from_json, run_bench, write_run
from .chimera import HardwareGraph, bundled_defect_topology, topology_from_json
from .decoding import decode_and_refine, decoded_to_csv
from .embedding import (
    embedding_from_json,
    embedding_metrics,
    embedding_to_json,
    pool_to_json,
    select_by_criterion,
)
from .errors import AnnealForgeError, EmbeddingError
from .formulation import (
    build_cokplex_polynomial,
    interaction_graph,
    ising_from_json,
    ising_to_json,
    quadratize,
    qubo_to_ising,
    qubo_to_json,
)
from .graphs import (
    ConflictRules,
    build_conflict_graph,
    degree_distribution,
    generate_random_instance,
    graph_to_json,
    parse_labelled_graph,
    percolation_threshold,
)
from .parameters import (
    embedded_from_json,
    embedded_to_json,
    set_parameters_empirical,
    set_parameters_theoretical,
)
from .sampler import sa_sample, sampleset_config_json, sampleset_from_csv, sampleset_to_csv
from .selection import SelectionConfig, build_embedding_pool, select_empirically
from .stats import bootstrap_tts, posterior, r99, tts_to_json

CRITERIA = ("pq", "lch", "std", "empirical")


def _read(path) -> str:
    return Path(path).read_text()


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_topology(path: str | None) -> HardwareGraph:
    if path is None:
        return bundled_defect_topology()
    return topology_from_json(_read(path))


def cmd_gen(args) -> int:
    g = generate_random_instance(args.n, (args.d_lo, args.d_hi), args.seed)
    (_out_dir(args) / "graph.json").write_text(graph_to_json(g, indent=2))
    return 0


def cmd_conflict(args) -> int:
    g1 = parse_labelled_graph(_read(args.first))
    g2 = parse_labelled_graph(_read(args.second))
    rules = ConflictRules(edge_consistency=not args.no_edge_consistency,
                          label_mismatch=not args.no_label_mismatch,
                          vertex_weight=args.weight)
    conflict = build_conflict_graph(g1, g2, rules)
    (_out_dir(args) / "conflict.json").write_text(graph_to_json(conflict, indent=2))
    return 0


def cmd_qubo(args) -> int:
    g = parse_labelled_graph(_read(args.input))
    qubo = quadratize(build_cokplex_polynomial(g, args.k))
    out = _out_dir(args)
    (out / "qubo.json").write_text(qubo_to_json(qubo, indent=2))
    (out / "ising.json").write_text(ising_to_json(qubo_to_ising(qubo), indent=2))
    return 0


def cmd_embed(args) -> int:
    ising = ising_from_json(_read(args.input))
    hw = _load_topology(args.topology)
    pool = build_embedding_pool(interaction_graph(ising), hw, args.pool,
                                seed=args.seed, max_attempts=args.attempts)
    if not pool:
        raise EmbeddingError("no embedding found within the attempt budget")
    if args.criterion == "empirical":
        config = SelectionConfig(stage1_reads=args.reads, sweeps=args.sweeps)
        chosen = select_empirically(pool, ising, hw, config=config,
                                    seed=args.seed).embedding
    else:
        chosen = select_by_criterion(pool, args.criterion)
    out = _out_dir(args)
    (out / "embedding.json").write_text(embedding_to_json(chosen, indent=2))
    (out / "pool.json").write_text(pool_to_json(pool, indent=2))
    m = embedding_metrics(chosen)
    print(f"pool {len(pool)}, chose {args.criterion}: {m.total_qubits} qubits, "
          f"longest chain {m.longest_chain}, chain std {m.chain_std:.3f}")
    return 0


def cmd_params(args) -> int:
    ising = ising_from_json(_read(args.input))
    emb = embedding_from_json(_read(args.embedding))
    hw = _load_topology(args.topology)
    if args.param_method == "theoretical":
        embedded = set_parameters_theoretical(ising, emb, hw)
    else:
        embedded = set_parameters_empirical(ising, emb, hw, seed=args.seed)
    (_out_dir(args) / "embedded.json").write_text(embedded_to_json(embedded, indent=2))
    return 0


def cmd_solve(args) -> int:
    text = _read(args.input)
    doc = json.loads(text)
    problem = embedded_from_json(text).physical if "alpha" in doc \
        else ising_from_json(text)
    emb = embedding_from_json(_read(args.embedding)) if args.embedding else None
    ss = sa_sample(problem, reads=args.reads, sweeps=args.sweeps, seed=args.seed)
    out = _out_dir(args)
    (out / "samples.csv").write_text(sampleset_to_csv(ss, emb))
    (out / "samples_config.json").write_text(sampleset_config_json(ss, indent=2))
    return 0


def cmd_decode(args) -> int:
    ss = sampleset_from_csv(_read(args.samples), _read(args.sidecar))
    emb = embedding_from_json(_read(args.embedding))
    logical = ising_from_json(_read(args.input))
    fixed = embedded_from_json(_read(args.embedded)).fixed if args.embedded else None
    decoded = decode_and_refine(ss, emb, logical, fixed, seed=args.seed)
    (_out_dir(args) / "decoded.csv").write_text(decoded_to_csv(decoded))
    return 0


def _read_decoded_energies(path) -> tuple[list[float], list[float]]:
    lines = _read(path).strip().split("\n")
    header = "read_index,mv_energy,refined_energy,num_broken,biggest_broken_cluster"
    if lines[0] != header:
        raise ValueError(f"unrecognized decoded CSV header in {path}")
    mv, refined = [], []
    for line in lines[1:]:
        parts = line.split(",")
        mv.append(float(parts[1]))
        refined.append(float(parts[2]))
    return mv, refined


def cmd_stats(args) -> int:
    series = [_read_decoded_energies(p) for p in args.decoded]
    reads = {len(mv) for mv, _ in series}
    if len(reads) != 1:
        raise ValueError("decoded files disagree on reads per call")
    (anneals,) = reads
    if anneals == 0:
        raise ValueError("decoded files contain no reads")
    bound = args.ground + args.tol
    y_mv = [sum(e <= bound for e in mv) for mv, _ in series]
    y_refined = [sum(e <= bound for e in refined) for _, refined in series]
    post_mv = posterior(y_mv, anneals)
    post_refined = posterior(y_refined, anneals)
    tts = bootstrap_tts([post_refined], q=args.q, b=args.bootstrap,
                        tau_us=args.tau_us, seed=args.seed)
    doc = {"calls": len(series), "anneals_per_call": anneals,
           "ground_energy": args.ground,
           "y_mv": y_mv, "y_refined": y_refined,
           "theta_mv": post_mv.mean, "theta_refined": post_refined.mean,
           "r99_mv": r99(post_mv.mean), "r99_refined": r99(post_refined.mean),
           "tts": json.loads(tts_to_json(tts))}
    (_out_dir(args) / "stats.json").write_text(json.dumps(doc, indent=2))
    return 0


def cmd_percolate(args) -> int:
    g = parse_labelled_graph(_read(args.input))
    doc = {"percolation_threshold": percolation_threshold(degree_distribution(g))}
    print(json.dumps(doc))
    if args.out:
        (_out_dir(args) / "percolation.json").write_text(json.dumps(doc, indent=2))
    return 0


def cmd_bench(args) -> int:
    cfg = config_from_json(_read(args.config)) if args.config else BenchConfig()
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    hw = _load_topology(args.topology)
    run = run_bench(cfg, hw)
    write_run(run, args.out)
    if run.error is not None:
        print(f"error: bench stopped at stage {run.error['stage']}: "
              f"{run.error['message']}", file=sys.stderr)
        return 2
    return 0


def _add_common(p, out_required=True, seed_default=0):
    p.add_argument("--out", required=out_required,
                   help="output directory for this stage's artifacts")
    p.add_argument("--seed", type=int, default=seed_default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anneal-forge",
        description="Molecular-similarity annealing pipeline, one stage per "
                    "subcommand.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random conflict-graph instance")
    p.add_argument("--n", type=int, required=True, help="vertex count")
    p.add_argument("--d-lo", type=float, default=75.0)
    p.add_argument("--d-hi", type=float, default=85.0)
    _add_common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("conflict", help="build a conflict graph from two "
                                        "labelled graphs")
    p.add_argument("--first", required=True)
    p.add_argument("--second", required=True)
    p.add_argument("--no-edge-consistency", action="store_true")
    p.add_argument("--no-label-mismatch", action="store_true")
    p.add_argument("--weight", type=float, default=1.0)
    _add_common(p)
    p.set_defaults(func=cmd_conflict)

    p = sub.add_parser("qubo", help="formulate the co-k-plex QUBO and Ising "
                                    "problems")
    p.add_argument("--input", required=True, help="conflict graph JSON")
    p.add_argument("--k", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_qubo)

    p = sub.add_parser("embed", help="embed the problem and pick one "
                                     "embedding by criterion")
    p.add_argument("--input", required=True, help="Ising problem JSON")
    p.add_argument("--topology", help="hardware topology JSON (default: "
                                      "bundled defect topology)")
    p.add_argument("--pool", type=int, default=10)
    p.add_argument("--attempts", type=int, default=None)
    p.add_argument("--criterion", choices=CRITERIA, default="pq")
    p.add_argument("--reads", type=int, default=1000,
                   help="anneals per embedding for the empirical criterion")
    p.add_argument("--sweeps", type=int, default=256)
    _add_common(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("params", help="set hardware parameters for an "
                                      "embedded problem")
    p.add_argument("--input", required=True, help="Ising problem JSON")
    p.add_argument("--embedding", required=True)
    p.add_argument("--topology")
    p.add_argument("--param-method", choices=("theoretical", "empirical"),
                   default="theoretical")
    _add_common(p)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("solve", help="sample a problem with simulated "
                                     "annealing")
    p.add_argument("--input", required=True,
                   help="embedded problem JSON or plain Ising problem JSON")
    p.add_argument("--embedding", help="embedding JSON, for the "
                                       "broken-chain column")
    p.add_argument("--reads", type=int, default=1000)
    p.add_argument("--sweeps", type=int, default=1000)
    _add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("decode", help="decode samples to logical assignments")
    p.add_argument("--samples", required=True)
    p.add_argument("--sidecar", required=True)
    p.add_argument("--embedding", required=True)
    p.add_argument("--input", required=True, help="logical Ising problem JSON")
    p.add_argument("--embedded", help="embedded problem JSON, for fixed spins")
    _add_common(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("stats", help="success statistics and bootstrap TTS "
                                     "from decoded calls")
    p.add_argument("--decoded", nargs="+", required=True,
                   help="decoded CSVs, one per solver call")
    p.add_argument("--ground", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--tau-us", type=float, default=5.0)
    p.add_argument("--q", type=int, default=50)
    p.add_argument("--bootstrap", type=int, default=1000)
    _add_common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("percolate", help="bond-percolation threshold of a "
                                         "graph's degree distribution")
    p.add_argument("--input", required=True)
    _add_common(p, out_required=False)
    p.set_defaults(func=cmd_percolate)

    p = sub.add_parser("bench", help="run the benchmark grid")
    p.add_argument("--config", help="BenchConfig JSON (default: full study "
                                    "defaults)")
    p.add_argument("--topology")
    _add_common(p, seed_default=None)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (AnnealForgeError, ValueError, OSError, json.JSONDecodeError) as exc:
        record = {"stage": args.command, "error": type(exc).__name__,
                  "message": str(exc)}
        if getattr(args, "out", None):
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            (out / "error.json").write_text(json.dumps(record, indent=2))
        print(f"error: {record['message']}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

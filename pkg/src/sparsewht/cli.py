"""Command-line harness.

Subcommands: synth, wht, recover, bench (snr | scaling | kernels),
de-table, sketch. Experiment settings come from an optional JSON config
file with flag overrides; exit code is 0 on completion and 2 on a
configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import analysis, kernels, peeling, sketch
from .fwht import fwht
from .bin_detect import DetectorConfig, make_detector
from .experiments import (
    SCALING_COLUMNS,
    SNR_COLUMNS,
    ConfigError,
    ExperimentConfig,
    run_scaling_sweep,
    run_snr_sweep,
    write_csv,
)
from .signal_model import SparseSpectrum, draw_spectrum


def _load_config(args) -> ExperimentConfig:
    raw = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    if args.algo is not None:
        raw["algorithm"] = args.algo
    if args.n is not None:
        raw["n_values"] = args.n
    if args.k is not None:
        raw["k_values"] = args.k
    if args.snr_db is not None:
        raw["snr_db_values"] = args.snr_db
    if args.trials is not None:
        raw["trials"] = args.trials
    if args.seed is not None:
        raw["seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        raw["workers"] = args.workers
    return ExperimentConfig.from_dict(raw)


def _add_experiment_flags(parser) -> None:
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--out", required=True, help="output CSV path")
    parser.add_argument("--algo", choices=("noiseless", "near-linear", "nso", "so"))
    parser.add_argument("--snr-db", type=float, nargs="+")
    parser.add_argument("--n", type=int, nargs="+")
    parser.add_argument("--k", type=int, nargs="+")
    parser.add_argument("--workers", type=int)


def _cmd_synth(args) -> int:
    rng = np.random.default_rng(args.seed or 0)
    spectrum = draw_spectrum(args.n[0], args.k[0], args.rho, rng, constellation=not args.continuous)
    spectrum.save(args.out)
    print(f"wrote {spectrum.sparsity} coefficients to {args.out}")
    return 0


def _cmd_wht(args) -> int:
    values = np.loadtxt(args.infile, dtype=np.float64, ndmin=1)
    transformed = fwht(values)
    n = int(math.log2(len(values)))
    entries = {i: float(v) for i, v in enumerate(transformed) if abs(v) > args.tol}
    SparseSpectrum(n, entries).save(args.out)
    print(f"wrote {len(entries)} coefficients above |{args.tol}| to {args.out}")
    return 0


def _cmd_recover(args) -> int:
    from . import codes, frontend
    from .signal_model import NoisyAccess, sigma_for_snr, snr_from_db

    truth = SparseSpectrum.load(args.spectrum)
    n, k = truth.n, truth.sparsity
    ss = np.random.SeedSequence(entropy=args.seed or 0)
    rng_noise, rng_offsets, rng_code = (np.random.default_rng(s) for s in ss.spawn(3))
    rho = max(abs(v) for v in truth.entries.values()) if truth.entries else 1.0
    if args.snr_db is None:
        sigma, snr_linear = 0.0, math.inf
    else:
        snr_linear = snr_from_db(args.snr_db[0])
        sigma = sigma_for_snr(rho, k, 1 << n, snr_linear)
    access = NoisyAccess(truth, sigma, rng_noise)
    plan = frontend.build_plan(n, max(k, 1), profile="benchmark")
    algo = args.algo or ("noiseless" if sigma == 0 else "nso")
    code = codes.build_regular_ldpc(n, rng_code) if algo == "so" else None
    offsets = frontend.build_offsets(algo, plan, code=code, rng=rng_offsets)
    nu2 = max((1 << n) * sigma * sigma / plan.bins, (1e-9 * rho) ** 2)
    gamma = 1.0 if sigma == 0 else DetectorConfig.default_gamma(snr_linear)
    cfg = DetectorConfig(gamma=gamma, nu2=nu2, rho=rho,
                         zero_tol=1e-9 * math.sqrt(1 << n) * rho)
    obs = frontend.observe(access, plan, offsets)
    recovered, report = peeling.decode(obs, plan, offsets, make_detector(plan, offsets, cfg, code=code),
                                       max_iters=2 * k + 10,
                                       stall_energy=plan.c_groups * plan.bins * (1 + gamma) * nu2)
    recovered.save(args.out)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report.to_json() + "\n")
    check = peeling.verify_support(recovered, truth)
    print(f"recovered {recovered.sparsity}/{k} coefficients; support match: {check.support_match}")
    return 0


def _cmd_bench_snr(args) -> int:
    rows = run_snr_sweep(_load_config(args))
    write_csv(args.out, rows, SNR_COLUMNS)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_bench_scaling(args) -> int:
    rows = run_scaling_sweep(_load_config(args))
    write_csv(args.out, rows, SCALING_COLUMNS)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_bench_kernels(args) -> int:
    """Time the hot kernels on the numba path against the numpy path."""
    backends = ["numpy"] + (["numba"] if kernels.HAS_NUMBA else [])
    if "numba" in backends:
        kernels.warmup()
    rng = np.random.default_rng(0)
    rows = []

    def timed(fn, reps):
        t0 = time.perf_counter_ns()
        for _ in range(reps):
            fn()
        return (time.perf_counter_ns() - t0) / reps

    for b in (8, 12):
        mat = rng.standard_normal((64, 1 << b))
        for backend in backends:
            work = mat.copy()
            ns = timed(lambda: kernels.fwht_rows_inplace(work, backend=backend), args.reps)
            rows.append({"kernel": "fwht_rows", "backend": backend, "size": f"64x{1 << b}",
                         "reps": args.reps, "ns_per_call": ns})
    for q in (1 << 8, 1 << 12):
        cands = rng.integers(0, 1 << 20, size=q).astype(np.uint64)
        offs = rng.integers(0, 1 << 20, size=48).astype(np.uint64)
        u = rng.standard_normal(48)
        for backend in backends:
            ns = timed(lambda: kernels.singleton_search(u, offs, cands, backend=backend), args.reps)
            rows.append({"kernel": "singleton_search", "backend": backend, "size": str(q),
                         "reps": args.reps, "ns_per_call": ns})
    columns = ("kernel", "backend", "size", "reps", "ns_per_call")
    write_csv(args.out, rows, columns)
    for row in rows:
        print(f"{row['kernel']:>17} {row['backend']:>6} {row['size']:>8} {row['ns_per_call']:>14.0f} ns")
    return 0


def _cmd_de_table(args) -> int:
    rows = [{"C": c, "eta_min": round(eta, 4), "C_eta_min": round(ceta, 4)}
            for c, eta, ceta in analysis.de_table(tuple(args.cs))]
    write_csv(args.out, rows, ("C", "eta_min", "C_eta_min"))
    for row in rows:
        print(f"C={row['C']}  eta_min={row['eta_min']:.4f}  C*eta={row['C_eta_min']:.4f}")
    return 0


def _cmd_sketch(args) -> int:
    graph = sketch.Hypergraph.load(args.graph)
    budget = args.budget or sum(1 << (len(e) - 1) for e in graph.edges)
    max_edge = max((len(e) for e in graph.edges), default=2)
    result = sketch.sketch_recover(graph, sparsity_budget=budget, seed=args.seed or 0,
                                   coeff_resolution=2.0 ** (1 - max_edge))
    result.spectrum.save(args.out)
    print(f"queries: {result.queries}")
    if result.partial:
        print("partial: budget exceeded, some bins unresolved")
    if result.edges is not None:
        for e in result.edges:
            print("edge:", " ".join(str(v) for v in sorted(e)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparsewht",
                                     description="Sparse Walsh-Hadamard recovery toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="draw a random sparse spectrum to a file")
    p.add_argument("--n", type=int, nargs=1, required=True)
    p.add_argument("--k", type=int, nargs=1, required=True)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--continuous", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_synth)

    p = sub.add_parser("wht", help="transform a dense signal file")
    p.add_argument("infile")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_wht)

    p = sub.add_parser("recover", help="recover a spectrum through the sparse pipeline")
    p.add_argument("--spectrum", required=True, help="ground-truth spectrum file")
    p.add_argument("--snr-db", type=float, nargs=1)
    p.add_argument("--algo", choices=("noiseless", "near-linear", "nso", "so"))
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(fn=_cmd_recover)

    bench = sub.add_parser("bench", help="benchmark sweeps")
    bench_sub = bench.add_subparsers(dest="bench_command", required=True)
    p = bench_sub.add_parser("snr", help="success rate over an SNR grid")
    _add_experiment_flags(p)
    p.set_defaults(fn=_cmd_bench_snr)
    p = bench_sub.add_parser("scaling", help="runtime and samples over n")
    _add_experiment_flags(p)
    p.set_defaults(fn=_cmd_bench_scaling)
    p = bench_sub.add_parser("kernels", help="numba vs numpy kernel timings")
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_bench_kernels)

    p = sub.add_parser("de-table", help="minimum-redundancy table as CSV")
    p.add_argument("--cs", type=int, nargs="+", default=[2, 3, 4, 5, 6])
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_de_table)

    p = sub.add_parser("sketch", help="recover a hypergraph from cut queries")
    p.add_argument("--graph", required=True, help="hypergraph file")
    p.add_argument("--budget", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_sketch)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

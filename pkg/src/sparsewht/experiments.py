"""Seeded Monte-Carlo sweeps: success-vs-SNR curves and scaling runs.

Every trial derives its own generator streams from (seed, trial index),
so results are reproducible and independent of how trials are distributed
over workers. Runtime covers observation generation plus decoding only;
drawing the spectrum and the noise realization is excluded.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import codes, frontend, peeling
from .bin_detect import DetectorConfig, make_detector
from .signal_model import NoisyAccess, draw_spectrum, sigma_for_snr, snr_from_db

ALGORITHMS = ("noiseless", "near-linear", "nso", "so")

SNR_COLUMNS = ("n", "K", "snr_db", "algorithm", "trials", "successes", "success_rate",
               "mean_samples", "mean_runtime_ns")
SCALING_COLUMNS = ("n", "K", "algorithm", "success_rate", "samples", "nominal_samples",
                   "runtime_ns", "meets_threshold")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str = "nso"
    n_values: tuple = (14,)
    k_values: tuple = (10,)
    snr_db_values: tuple = (10.0,)  # an entry of None means noise-free
    trials: int = 200
    seed: int = 0
    success_threshold: float = 0.95
    rho: float = 1.0
    profile: str = "benchmark"
    p1: int | None = None
    p2: int | None = None
    p3: int | None = None
    gamma: float | None = None
    decode_rounds: int = 30
    workers: int = 1

    def validate(self) -> "ExperimentConfig":
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.n_values or not self.k_values:
            raise ConfigError("need at least one n and one K")
        if any(not isinstance(v, int) or v < 1 for v in self.n_values):
            raise ConfigError("n values must be positive integers")
        if any(not isinstance(v, int) or v < 1 for v in self.k_values):
            raise ConfigError("K values must be positive integers")
        if self.profile not in ("benchmark", "theory"):
            raise ConfigError("profile must be 'benchmark' or 'theory'")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        return self

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        clean = dict(raw)
        for key in ("n_values", "k_values", "snr_db_values"):
            if key in clean and clean[key] is not None:
                clean[key] = tuple(clean[key])
        return cls(**clean).validate()


@dataclass(frozen=True)
class TrialResult:
    support_ok: bool
    values_ok: bool
    runtime_ns: int
    samples_distinct: int
    samples_nominal: int
    sweeps: int
    peels: int
    stalled: bool
    conflicts: int


def nominal_sample_count(algorithm: str, n: int, k: int, c_groups: int = 3,
                         p1: int | None = None, p2: int | None = None, p3: int | None = None) -> int:
    """The configured sample-cost formula value C * B * P_nominal."""
    bins = 1 << max(1, math.ceil(math.log2(k)))
    if algorithm == "nso":
        p1 = p1 or 2 * n
        p2 = p2 or n
        return c_groups * bins * p1 * p2
    if algorithm == "so":
        p1 = p1 or n
        p2 = p2 or n
        p3 = p3 or 2 * n
        return c_groups * bins * (p1 + p2 + p3)
    if algorithm == "noiseless":
        return c_groups * bins * (n + 1)
    if algorithm == "near-linear":
        return c_groups * bins * (p1 or 3 * n)
    raise ConfigError(f"unknown algorithm {algorithm!r}")


def run_trial(config: ExperimentConfig, n: int, k: int, snr_db: float | None, trial: int) -> TrialResult:
    """One seeded draw-observe-decode-verify round."""
    ss = np.random.SeedSequence(entropy=config.seed, spawn_key=(n, k, trial))
    rng_spec, rng_noise, rng_offsets, rng_code = (np.random.default_rng(s) for s in ss.spawn(4))

    spectrum = draw_spectrum(n, k, config.rho, rng_spec)
    size = 1 << n
    if snr_db is None:
        sigma, snr_linear = 0.0, math.inf
    else:
        snr_linear = snr_from_db(snr_db)
        sigma = sigma_for_snr(config.rho, k, size, snr_linear)
    access = NoisyAccess(spectrum, sigma, rng_noise)
    access.prepare()

    plan = frontend.build_plan(n, k, profile=config.profile)
    code = codes.build_regular_ldpc(n, rng_code) if config.algorithm == "so" else None
    offsets = frontend.build_offsets(config.algorithm, plan, p1=config.p1, p2=config.p2,
                                     p3=config.p3, code=code, rng=rng_offsets)

    nu2 = max(size * sigma * sigma / plan.bins, (1e-9 * config.rho) ** 2)
    gamma = config.gamma
    if gamma is None:
        gamma = 1.0 if snr_db is None else DetectorConfig.default_gamma(snr_linear)
    cfg = DetectorConfig(
        gamma=gamma,
        nu2=nu2,
        rho=config.rho,
        zero_tol=1e-9 * math.sqrt(size) * config.rho,
        decode_rounds=config.decode_rounds,
    )
    detector = make_detector(plan, offsets, cfg, code=code)
    stall_energy = plan.c_groups * plan.bins * (1.0 + gamma) * nu2

    t0 = time.perf_counter_ns()
    obs = frontend.observe(access, plan, offsets)
    recovered, report = peeling.decode(obs, plan, offsets, detector,
                                       max_iters=2 * k + 10, stall_energy=stall_energy)
    runtime_ns = time.perf_counter_ns() - t0

    check = peeling.verify_support(recovered, spectrum)
    return TrialResult(check.support_match, check.values_match, runtime_ns,
                       obs.distinct_samples, obs.nominal_samples,
                       report.sweeps, report.peels, report.stalled, report.conflicts)


def _trial_star(args):
    return run_trial(*args)


def _run_trials(config: ExperimentConfig, n: int, k: int, snr_db: float | None) -> list:
    jobs = [(config, n, k, snr_db, t) for t in range(config.trials)]
    if config.workers <= 1:
        return [run_trial(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(_trial_star, jobs))


def run_snr_sweep(config: ExperimentConfig) -> list:
    """Success-rate rows over the (n, K, SNR) grid. Fixed column order."""
    config.validate()
    rows = []
    for n in config.n_values:
        for k in config.k_values:
            for snr_db in config.snr_db_values or (None,):
                results = _run_trials(config, n, k, snr_db)
                successes = sum(r.support_ok for r in results)
                rows.append({
                    "n": n,
                    "K": k,
                    "snr_db": "" if snr_db is None else snr_db,
                    "algorithm": config.algorithm,
                    "trials": config.trials,
                    "successes": successes,
                    "success_rate": successes / config.trials,
                    "mean_samples": float(np.mean([r.samples_distinct for r in results])),
                    "mean_runtime_ns": float(np.mean([r.runtime_ns for r in results])),
                })
    return rows


def run_scaling_sweep(config: ExperimentConfig) -> list:
    """Runtime/sample rows over n at fixed K, flagging points below the
    success threshold; nominal counts come from the cost formulas."""
    config.validate()
    n_values = config.n_values if len(config.n_values) > 1 else tuple(range(7, 18))
    rows = []
    for k in config.k_values:
        for n in n_values:
            snr_db = (config.snr_db_values or (10.0,))[0]
            results = _run_trials(config, n, k, snr_db)
            rate = sum(r.support_ok for r in results) / config.trials
            rows.append({
                "n": n,
                "K": k,
                "algorithm": config.algorithm,
                "success_rate": rate,
                "samples": float(np.mean([r.samples_distinct for r in results])),
                "nominal_samples": nominal_sample_count(config.algorithm, n, k,
                                                        p1=config.p1, p2=config.p2, p3=config.p3),
                "runtime_ns": float(np.mean([r.runtime_ns for r in results])),
                "meets_threshold": int(rate >= config.success_threshold),
            })
    return rows


def write_csv(path, rows: list, columns: tuple) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(str(row[c]) for c in columns) + "\n")

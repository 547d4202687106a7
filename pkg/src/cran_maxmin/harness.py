"""Experiment configuration, the Monte-Carlo sweep driver, and CSV emission.

A sweep runs every (fronthaul capacity, trial, scheme) combination; channels
are redrawn per trial from a sub-seed, shared across capacities and schemes
so the comparison is paired.  Rows are ordered by (capacity, trial, scheme)
regardless of worker completion order, and aggregate rows (trial = "mean")
follow the raw rows.  With timing disabled (the default) identical
(config, seed) pairs produce byte-identical CSV files.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from cran_maxmin.association import (
    SolveCache,
    run_algorithm1,
    run_benchmark2,
    run_benchmark3,
)
from cran_maxmin.beamforming import SolverIndeterminate, SolverTolerances
from cran_maxmin.channels import GenConfig, generate_channels, generate_topology, \
    noise_power, trial_seed
from cran_maxmin.model import NetworkConfig

WORKERS_ENV_VAR = "CRAN_MAXMIN_WORKERS"
SCHEMES = ("alg1", "bench1", "bench2", "bench3")
CSV_COLUMNS = ("fronthaul_bps", "scheme", "trial", "gamma_linear", "gamma_db",
               "iterations", "runtime_ms", "status")


class ConfigError(ValueError):
    """Configuration problem, reported with the offending field."""


@dataclass
class ExperimentConfig:
    n_rrh: int = 3
    n_users: int = 6
    n_antennas: int = 2
    bandwidth_hz: float = 10e6
    tx_power_dbm: float | list = 30.0
    noise_psd_dbm_hz: float = -169.0
    noise_figure_db: float = 7.0
    radius_m: float = 500.0
    pathloss_a_db: float = 30.6
    pathloss_b: float = 36.7
    min_distance_m: float = 1.0
    rrh_placement: str = "uniform"
    rrh_ring_frac: float = 0.5
    fronthaul_sweep_bps: list = field(default_factory=lambda: [5e6, 10e6, 15e6,
                                                               20e6, 40e6, 80e6])
    fronthaul_cap_bps: Optional[float | list] = None  # single-instance runs
    trials: int = 20
    seed: int = 1
    schemes: list = field(default_factory=lambda: list(SCHEMES))
    redraw: str = "both"  # redraw "both" topology+fading, or "fading" only
    bisection_rel_tol: float = 1e-4
    cone_feas_tol: float = 1e-7
    max_bisection_iters: int = 60

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials: must be >= 1")
        sweep = list(self.fronthaul_sweep_bps)
        if not sweep:
            raise ConfigError("fronthaul_sweep_bps: must be nonempty")
        if any(b >= a for a, b in zip(sweep[1:], sweep[:-1])):
            raise ConfigError("fronthaul_sweep_bps: must be strictly increasing")
        self.fronthaul_sweep_bps = [float(v) for v in sweep]
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad or not self.schemes:
            raise ConfigError(f"schemes: must be a nonempty subset of {SCHEMES}, "
                              f"got {self.schemes}")
        if self.redraw not in ("both", "fading"):
            raise ConfigError("redraw: must be 'both' or 'fading'")

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path, "r", encoding="utf-8") as f:
                doc = json.load(f)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}")
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ConfigError(str(exc))

    # -- derived pieces -----------------------------------------------------
    def tolerances(self) -> SolverTolerances:
        return SolverTolerances(self.bisection_rel_tol, self.cone_feas_tol,
                                self.max_bisection_iters)

    def gen_config(self) -> GenConfig:
        return GenConfig(self.radius_m, self.pathloss_a_db, self.pathloss_b,
                         self.noise_psd_dbm_hz, self.noise_figure_db,
                         self.min_distance_m, self.rrh_placement,
                         self.rrh_ring_frac)

    def power_caps_w(self) -> tuple:
        dbm = self.tx_power_dbm
        if not isinstance(dbm, (list, tuple)):
            dbm = [dbm] * self.n_rrh
        if len(dbm) != self.n_rrh:
            raise ConfigError(f"tx_power_dbm: expected {self.n_rrh} values")
        return tuple(10.0 ** ((float(v) - 30.0) / 10.0) for v in dbm)

    def noise_power_w(self) -> float:
        return noise_power(self.noise_psd_dbm_hz, self.noise_figure_db,
                           self.bandwidth_hz)

    def network_config(self, fronthaul_bps) -> NetworkConfig:
        if not isinstance(fronthaul_bps, (list, tuple)):
            fronthaul_bps = [float(fronthaul_bps)] * self.n_rrh
        return NetworkConfig(self.n_rrh, self.n_users, self.n_antennas,
                             self.bandwidth_hz, self.power_caps_w(),
                             tuple(float(v) for v in fronthaul_bps),
                             self.noise_power_w())

    def single_fronthaul(self) -> float | list:
        if self.fronthaul_cap_bps is not None:
            return self.fronthaul_cap_bps
        return self.fronthaul_sweep_bps[0]


_RUNNERS = {
    "alg1": lambda ch, cfg, tol, topo, cache: run_algorithm1(
        ch, cfg, tol, "residual", cache=cache),
    "bench1": lambda ch, cfg, tol, topo, cache: run_algorithm1(
        ch, cfg, tol, "leakage", cache=cache),
    "bench2": lambda ch, cfg, tol, topo, cache: run_benchmark2(
        ch, cfg, tol, topo, cache=cache),
    "bench3": lambda ch, cfg, tol, topo, cache: run_benchmark3(
        ch, cfg, tol, topo, cache=cache),
}


def run_scheme(scheme: str, ch, netcfg, tol, topology=None, cache=None):
    if scheme not in _RUNNERS:
        raise ConfigError(f"scheme: unknown scheme '{scheme}'")
    return _RUNNERS[scheme](ch, netcfg, tol, topology, cache)


def draw_trial(cfg: ExperimentConfig, trial: int):
    """Topology and channels for one trial from its sub-seed."""
    gen = cfg.gen_config()
    if cfg.redraw == "both":
        topo_seed = trial_seed(cfg.seed, 2 * trial)
    else:
        topo_seed = trial_seed(cfg.seed, 0)
    chan_seed = trial_seed(cfg.seed, 2 * trial + 1)
    topo = generate_topology(gen, cfg.n_rrh, cfg.n_users, topo_seed)
    ch = generate_channels(topo, gen, cfg.n_antennas, chan_seed,
                           noise_power_w=cfg.noise_power_w())
    return topo, ch


def _run_trial(cfg: ExperimentConfig, trial: int) -> list:
    topo, ch = draw_trial(cfg, trial)
    tol = cfg.tolerances()
    # the removal/activation paths only depend on the channels, so one cache
    # serves every capacity and scheme of the trial
    cache = SolveCache(ch, cfg.power_caps_w(), cfg.noise_power_w(), tol)
    rows = []
    for t_bps in cfg.fronthaul_sweep_bps:
        netcfg = cfg.network_config(t_bps)
        for scheme in cfg.schemes:
            start = time.perf_counter()
            try:
                report = run_scheme(scheme, ch, netcfg, tol, topo, cache)
                gamma = report.final_gamma
                iters = len(report.iterations)
                status = "ok"
            except SolverIndeterminate:
                gamma, iters, status = math.nan, 0, "indeterminate"
            elapsed_ms = 1e3 * (time.perf_counter() - start)
            rows.append({
                "fronthaul_bps": t_bps,
                "scheme": scheme,
                "trial": trial,
                "gamma_linear": gamma,
                "gamma_db": _to_db(gamma),
                "iterations": iters,
                "runtime_ms": elapsed_ms,
                "status": status,
            })
    return rows


def _to_db(gamma: float) -> float:
    if math.isnan(gamma):
        return math.nan
    return 10.0 * math.log10(gamma) if gamma > 0 else -math.inf


def resolve_workers(override: Optional[int] = None) -> int:
    if override is not None:
        return max(1, int(override))
    env = os.environ.get(WORKERS_ENV_VAR)
    return max(1, int(env)) if env else 1


def run_sweep(cfg: ExperimentConfig, workers: Optional[int] = None):
    """Run the full (capacity x trial x scheme) grid.

    Returns (rows, aggregates): raw rows sorted by (capacity, trial, scheme)
    and one mean row per (capacity, scheme) over the trials that solved;
    failed trials are excluded from the mean and counted in the status field.
    """
    nworkers = resolve_workers(workers)
    trials = list(range(cfg.trials))
    if nworkers > 1 and len(trials) > 1:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            chunks = list(pool.map(_run_trial, [cfg] * len(trials), trials))
    else:
        chunks = [_run_trial(cfg, t) for t in trials]
    rows = [row for chunk in chunks for row in chunk]
    scheme_order = {s: i for i, s in enumerate(cfg.schemes)}
    rows.sort(key=lambda r: (r["fronthaul_bps"], r["trial"],
                             scheme_order[r["scheme"]]))

    aggregates = []
    for t_bps in cfg.fronthaul_sweep_bps:
        for scheme in cfg.schemes:
            group = [r for r in rows
                     if r["fronthaul_bps"] == t_bps and r["scheme"] == scheme]
            ok = [r for r in group if r["status"] == "ok"]
            nfail = len(group) - len(ok)
            if ok:
                mean_gamma = sum(r["gamma_linear"] for r in ok) / len(ok)
                mean_iters = sum(r["iterations"] for r in ok) / len(ok)
                mean_ms = sum(r["runtime_ms"] for r in ok) / len(ok)
            else:
                mean_gamma, mean_iters, mean_ms = math.nan, math.nan, math.nan
            aggregates.append({
                "fronthaul_bps": t_bps,
                "scheme": scheme,
                "trial": "mean",
                "gamma_linear": mean_gamma,
                "gamma_db": _to_db(mean_gamma),
                "iterations": mean_iters,
                "runtime_ms": mean_ms,
                "status": f"mean_of_{len(ok)}_failed_{nfail}",
            })
    return rows, aggregates


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def write_csv(path, rows, aggregates, timing: bool = False) -> None:
    """Emit raw rows then aggregate rows.  Unless timing is requested the
    runtime column is zeroed so reruns are byte-identical."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(CSV_COLUMNS) + "\n")
        for row in list(rows) + list(aggregates):
            out = dict(row)
            if not timing:
                out["runtime_ms"] = 0.0
            f.write(",".join(_fmt(out[col]) for col in CSV_COLUMNS) + "\n")

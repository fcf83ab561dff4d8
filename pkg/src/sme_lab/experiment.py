"""Configuration-driven experiment harness with CSV persistence.

A JSON config describes the system, noise and input laws, the list of noise
bounds handed to the set estimator, horizons, seeds and solver knobs. The
harness simulates one trajectory per seed, runs the set estimator once per
assumed bound, fits the least-squares benchmark at every checkpoint, and
appends one CSV row per (seed, checkpoint, estimator).

CSV schema (floats printed with 9 significant digits, empty where a column
does not apply to the estimator):

    seed,t,estimator,diam_lower,diam_upper,lse_diam,wall_ms

Runs are deterministic: rows are sorted by (seed, t, estimator) before
writing and the wall-time column is zero unless ``record_timing`` is set
(real timings intentionally break byte-level reproducibility).
"""

from __future__ import annotations

import concurrent.futures
import csv
import json
import math
import os
import time
from dataclasses import dataclass

import numpy as np

from sme_lab.estimators import default_checkpoints, lse_at_checkpoints, run_sme
from sme_lab.geometry import (
    TRUNCATED_GAUSSIAN,
    UNIFORM,
    GeometryError,
    NoiseDistribution,
    support_from_config,
)
from sme_lab.lti import LinearSystem, PureNoise, SimulationBlowUp, simulate
from sme_lab.membership import DiameterConfig

CSV_HEADER = ["seed", "t", "estimator", "diam_lower", "diam_upper", "lse_diam", "wall_ms"]

SEED_ENV_VAR = "SME_LAB_SEED"


class ConfigError(ValueError):
    """Schema violation in an experiment config."""


@dataclass
class ExperimentRecord:
    seed: int
    t: int
    estimator: str
    diam_lower: float | None
    diam_upper: float | None
    lse_diam: float | None
    wall_ms: float

    def row(self):
        return [
            str(self.seed),
            str(self.t),
            self.estimator,
            _fmt(self.diam_lower),
            _fmt(self.diam_upper),
            _fmt(self.lse_diam),
            _fmt(self.wall_ms),
        ]


@dataclass
class RunFailure:
    seed: int
    t: int
    estimator: str
    message: str


def _fmt(x):
    return "" if x is None else f"{x:.9g}"


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    system: LinearSystem
    noise: NoiseDistribution
    input_support_cfg: dict
    input_law: str
    w_used: list  # (name, ConvexSupport) pairs
    T: int
    n_seeds: int
    base_seed: int
    checkpoints: list
    diam: DiameterConfig
    lse_lambda: float
    lse_delta: float
    lse_s_bound: float | None
    lse_variance_proxy: float | None
    run_lse: bool
    x0: np.ndarray
    record_timing: bool
    out: str | None

    def seed_for(self, index: int) -> int:
        return self.base_seed + index


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def build_system(cfg: dict) -> LinearSystem:
    kind = cfg.get("kind", "explicit")
    if kind == "explicit":
        _require("A" in cfg and "B" in cfg, "explicit system needs 'A' and 'B'")
        return LinearSystem(np.asarray(cfg["A"], dtype=float), np.asarray(cfg["B"], dtype=float))
    if kind == "random":
        for key in ("n_x", "n_u"):
            _require(key in cfg, f"random system needs '{key}'")
        return random_system(
            int(cfg["n_x"]),
            int(cfg["n_u"]),
            float(cfg.get("spectral_cap", 0.9)),
            int(cfg.get("seed", 0)),
        )
    if kind == "external":
        path = cfg.get("path")
        _require(
            isinstance(path, str) and os.path.exists(path),
            "external system config must point at an existing JSON file with 'A' and 'B' "
            "(this model's matrices are not bundled; supply your own)",
        )
        with open(path) as fh:
            data = json.load(fh)
        _require("A" in data and "B" in data, "external system file needs 'A' and 'B'")
        return LinearSystem(np.asarray(data["A"], dtype=float), np.asarray(data["B"], dtype=float))
    raise ConfigError(f"unknown system kind {kind!r}")


def random_system(n_x: int, n_u: int, spectral_cap: float, seed: int) -> LinearSystem:
    """Gaussian matrices with ``A`` rescaled to the requested spectral radius cap."""
    if not 0 < spectral_cap <= 1:
        raise ConfigError("spectral_cap must be in (0, 1]")
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n_x, n_x))
    B = rng.normal(size=(n_x, n_u))
    rho = float(np.abs(np.linalg.eigvals(A)).max())
    if rho > spectral_cap:
        A *= spectral_cap / rho
    return LinearSystem(A, B)


def _build_distribution(cfg: dict, dim: int, seed: int = 0) -> NoiseDistribution:
    law = cfg.get("law", UNIFORM)
    _require(law in (UNIFORM, TRUNCATED_GAUSSIAN), f"unknown law {law!r}")
    _require("support" in cfg, "distribution needs a 'support' block")
    try:
        support = support_from_config(cfg["support"], dim=dim)
    except GeometryError as exc:
        raise ConfigError(str(exc)) from exc
    _require(support.dim == dim, f"support dimension {support.dim} != expected {dim}")
    return NoiseDistribution(support, law, seed)


def load_config(path: str, seed_override: int | None = None) -> ExperimentConfig:
    with open(path) as fh:
        raw = json.load(fh)
    return parse_config(raw, seed_override)


def parse_config(raw: dict, seed_override: int | None = None) -> ExperimentConfig:
    _require(isinstance(raw, dict), "config must be a JSON object")
    _require("system" in raw, "config needs a 'system' block")
    _require("noise" in raw, "config needs a 'noise' block")
    system = build_system(raw["system"])

    T = int(raw.get("T", 0))
    _require(T >= 1, "T must be >= 1")
    n_seeds = int(raw.get("n_seeds", 1))
    _require(n_seeds >= 1, "n_seeds must be >= 1")

    env_seed = os.environ.get(SEED_ENV_VAR)
    if seed_override is not None:
        base_seed = seed_override
    elif env_seed is not None:
        base_seed = int(env_seed)
    else:
        base_seed = int(raw.get("base_seed", 0))

    noise = _build_distribution(raw["noise"], system.n_x)

    # inputs default to the same law/shape family as the noise, at input dim
    input_cfg = raw.get("input")
    if input_cfg is None:
        support_cfg = dict(raw["noise"]["support"])
        if support_cfg.get("kind") in ("box", "l1ball"):
            a = support_cfg["a"]
            _require(len(a) >= 1, "weighted support needs weights")
            support_cfg["a"] = (list(a) * system.n_u)[: system.n_u]
        if support_cfg.get("kind") == "l2ball":
            support_cfg["dim"] = system.n_u
        input_cfg = {"law": raw["noise"].get("law", UNIFORM), "support": support_cfg}
    input_law = input_cfg.get("law", UNIFORM)
    _build_distribution(input_cfg, system.n_u)  # validates now, rebuilt per seed

    w_used_raw = raw.get("w_used")
    _require(isinstance(w_used_raw, list) and w_used_raw, "config needs a nonempty 'w_used' list")
    w_used = []
    for item in w_used_raw:
        _require(isinstance(item, dict) and "support" in item, "each w_used entry needs 'support'")
        try:
            sup = support_from_config(item["support"], dim=system.n_x)
        except GeometryError as exc:
            raise ConfigError(str(exc)) from exc
        _require(sup.dim == system.n_x, "w_used support dimension must equal n_x")
        w_used.append((item.get("name", sup.name()), sup))
    names = [name for name, _ in w_used]
    _require(len(set(names)) == len(names), "w_used names must be unique")

    checkpoints = raw.get("checkpoints") or default_checkpoints(T)
    checkpoints = [int(c) for c in checkpoints]
    _require(
        all(0 <= c <= T for c in checkpoints) and checkpoints == sorted(set(checkpoints)),
        "checkpoints must be strictly increasing integers in [0, T]",
    )

    diam_raw = raw.get("diam", {})
    diam = DiameterConfig(
        n_dirs=diam_raw.get("n_dirs"),
        tol=float(diam_raw.get("tol", 1e-7)),
        max_iters=int(diam_raw.get("max_iters", 200)),
        seed=int(diam_raw.get("seed", 0)),
        r_prior=float(diam_raw.get("r_prior", 10.0)),
        prune_budget=diam_raw.get("prune_budget"),
    )
    _require(diam.tol > 0 and diam.r_prior > 0, "diam tol and r_prior must be positive")

    lse_raw = raw.get("lse", {})
    run_lse = bool(lse_raw.get("enabled", True))
    x0 = np.asarray(raw.get("x0", np.zeros(system.n_x)), dtype=float)
    _require(x0.shape == (system.n_x,), "x0 dimension must equal n_x")

    return ExperimentConfig(
        system=system,
        noise=noise,
        input_support_cfg=input_cfg,
        input_law=input_law,
        w_used=w_used,
        T=T,
        n_seeds=n_seeds,
        base_seed=base_seed,
        checkpoints=checkpoints,
        diam=diam,
        lse_lambda=float(lse_raw.get("lambda", 1e-3)),
        lse_delta=float(lse_raw.get("delta", 0.05)),
        lse_s_bound=lse_raw.get("s_bound"),
        lse_variance_proxy=lse_raw.get("variance_proxy"),
        run_lse=run_lse,
        x0=x0,
        record_timing=bool(raw.get("record_timing", False)),
        out=raw.get("out"),
    )


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------


def _input_distribution(config: ExperimentConfig) -> NoiseDistribution:
    return _build_distribution(config.input_support_cfg, config.system.n_u)


def run_single_seed(config: ExperimentConfig, seed_index: int):
    """All records and failures for one seed; pure function of (config, seed)."""
    seed = config.seed_for(seed_index)
    records: list[ExperimentRecord] = []
    failures: list[RunFailure] = []
    try:
        traj = simulate(
            config.system,
            PureNoise(_input_distribution(config)),
            config.noise,
            config.T,
            x0=config.x0,
            seed=seed,
        )
    except SimulationBlowUp as exc:
        failures.append(RunFailure(seed, -1, "simulate", str(exc)))
        return records, failures

    for name, W in config.w_used:
        tag = f"sme:{name}"
        t0 = time.perf_counter()
        result = run_sme(traj, W, config.checkpoints, config.diam)
        elapsed = (time.perf_counter() - t0) * 1000.0
        per_row = elapsed / max(len(result.checkpoints), 1) if config.record_timing else 0.0
        for chk in result.checkpoints:
            records.append(
                ExperimentRecord(seed, chk.t, tag, chk.diam_lower, chk.diam_upper, None, per_row)
            )
        if result.failure is not None:
            failures.append(RunFailure(seed, result.failure.t, tag, result.failure.message))

    if config.run_lse:
        vp = config.lse_variance_proxy
        if vp is None:
            vp = config.noise.cov_trace()
        s_bound = config.lse_s_bound
        if s_bound is None:
            s_bound = 1.5 * float(np.linalg.norm(config.system.theta))
        t0 = time.perf_counter()
        fits = lse_at_checkpoints(
            traj,
            config.checkpoints,
            lam=config.lse_lambda,
            delta_conf=config.lse_delta,
            variance_proxy=vp,
            s_bound=s_bound,
        )
        elapsed = (time.perf_counter() - t0) * 1000.0
        per_row = elapsed / max(len(fits), 1) if config.record_timing else 0.0
        for t, fit in fits:
            records.append(ExperimentRecord(seed, t, "lse", None, None, fit.diam_report, per_row))
    return records, failures


def run_experiment(config: ExperimentConfig, parallel: int | None = None):
    """Fan seeds out to a process pool; output order is seed-sorted and
    therefore independent of scheduling."""
    if parallel is None:
        parallel = os.cpu_count() or 1
    parallel = max(1, min(parallel, config.n_seeds))
    records: list[ExperimentRecord] = []
    failures: list[RunFailure] = []
    if parallel == 1:
        results = [run_single_seed(config, i) for i in range(config.n_seeds)]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=parallel) as pool:
            futures = [pool.submit(run_single_seed, config, i) for i in range(config.n_seeds)]
            results = [f.result() for f in futures]
    for recs, fails in results:
        records.extend(recs)
        failures.extend(fails)
    records.sort(key=lambda r: (r.seed, r.t, r.estimator))
    failures.sort(key=lambda f: (f.seed, f.t))
    return records, failures


def write_records(records, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow(rec.row())


def read_records(path):
    """Rows as dicts with numeric fields parsed (None where blank)."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in CSV_HEADER if c not in (reader.fieldnames or [])]
        if missing:
            raise ConfigError(f"CSV missing columns: {missing}")
        for row in reader:
            out.append(
                {
                    "seed": int(row["seed"]),
                    "t": int(row["t"]),
                    "estimator": row["estimator"],
                    "diam_lower": _parse(row["diam_lower"]),
                    "diam_upper": _parse(row["diam_upper"]),
                    "lse_diam": _parse(row["lse_diam"]),
                    "wall_ms": _parse(row["wall_ms"]),
                }
            )
    return out


def _parse(s):
    return None if s == "" else float(s)


# ---------------------------------------------------------------------------
# summaries
# ---------------------------------------------------------------------------

SUMMARY_HEADER = ["estimator", "t", "mean", "std", "loglog_slope"]


def summarize_records(rows):
    """Per (estimator, t) mean/std over seeds of the reported diameter, plus
    the log-log slope of mean diameter over the upper half of checkpoints."""
    series: dict[str, dict[int, list[float]]] = {}
    for row in rows:
        value = row["lse_diam"] if row["estimator"] == "lse" else row["diam_upper"]
        if value is None:
            continue
        series.setdefault(row["estimator"], {}).setdefault(row["t"], []).append(value)

    out = []
    for estimator in sorted(series):
        ts = sorted(series[estimator])
        means = {}
        stds = {}
        for t in ts:
            vals = np.asarray(series[estimator][t], dtype=float)
            means[t] = float(vals.mean())
            stds[t] = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
        upper = [t for t in ts if t > 0][len([t for t in ts if t > 0]) // 2 :]
        slope = float("nan")
        if len(upper) >= 2 and all(means[t] > 0 for t in upper):
            slope = float(
                np.polyfit(np.log([t for t in upper]), np.log([means[t] for t in upper]), 1)[0]
            )
        for t in ts:
            out.append(
                {
                    "estimator": estimator,
                    "t": t,
                    "mean": means[t],
                    "std": stds[t],
                    "loglog_slope": slope,
                }
            )
    return out


def write_summary(summary_rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_HEADER)
        for row in summary_rows:
            writer.writerow(
                [
                    row["estimator"],
                    str(row["t"]),
                    _fmt(row["mean"]),
                    _fmt(row["std"]),
                    "" if math.isnan(row["loglog_slope"]) else _fmt(row["loglog_slope"]),
                ]
            )


def summarize_csv(csv_in, csv_out):
    rows = read_records(csv_in)
    summary = summarize_records(rows)
    write_summary(summary, csv_out)
    return summary

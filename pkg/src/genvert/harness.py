"""Reproducible experiment runner: noise sweeps, success-rate-vs-latent-width
studies, timing comparisons, and Monte-Carlo estimation of the norm-extension
constants of random weight matrices.

Every trial is a pure function of (config, base_seed): trial seeds are
``base_seed XOR trial_index`` and component generators are PCG64 seeded with
``SeedSequence([trial_seed, tag])`` (tags: 0 network, 1 latent, 2 noise,
3 descent init).  Records are merged in (method, trial) order regardless of
scheduling, so CSV output is byte-identical across runs on one platform.
Wall-clock times are kept in memory for the timing tables but stay out of
the records CSV, which must be reproducible byte-for-byte.
"""

from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .baseline import ForwardOperator, GdConfig, gd_invert
from .invert import InversionError, LpInvertConfig, invert_network
from .linalg import LinalgError, Matrix, Vector, norm_l1, norm_l2, norm_linf
from .model import (PRNG_FAMILY, forward, gaussian_samples, random_gaussian_net,
                    seeded_rng)

METHODS = ("linf", "l1", "relaxed", "gd")

SEED_RULE = ("trial_seed = base_seed XOR trial_index; component generators are "
             "PCG64(SeedSequence([trial_seed, tag])) with tags net=0 latent=1 "
             "noise=2 descent=3")
RELATIVE_NOISE_DEFINITION = "l2(noise) / l2(clean observation)"


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "none"  # "none", "uniform" (U(-a, a)) or "gaussian" (std a)
    level: float = 0.0
    seed: int | None = None  # only for standalone draws; sweeps use trial seeds

    def __post_init__(self):
        if self.kind not in ("none", "uniform", "gaussian"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.level < 0:
            raise ValueError("noise level must be nonnegative")

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "none" or self.level == 0.0:
            return np.zeros(n)
        if self.kind == "uniform":
            return self.level * (2.0 * rng.random(n) - 1.0)
        return self.level * gaussian_samples(rng, n)


@dataclass(frozen=True)
class TrialConfig:
    dims: tuple[int, ...]
    methods: tuple[str, ...] = ("linf",)
    noise: NoiseSpec = NoiseSpec()
    trials: int = 20
    success_threshold: float = 1e-3
    base_seed: int = 0
    weight_std_rule: str = "unit"
    lp: LpInvertConfig = field(default_factory=LpInvertConfig)
    gd: GdConfig = field(default_factory=GdConfig)

    def __post_init__(self):
        if len(self.dims) < 2:
            raise ValueError("dims must list at least input and output widths")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.success_threshold > 0:
            raise ValueError("success_threshold must be positive")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
        if not self.methods:
            raise ValueError("at least one method is required")


@dataclass(frozen=True)
class TrialRecord:
    method: str
    trial: int
    noise_kind: str
    noise_level: float
    rel_noise: float
    rel_error: float
    residual_linf: float
    residual_l1: float
    residual_l2: float
    success: bool
    solver_count: int
    error: str = ""
    wall_time_s: float = 0.0  # kept out of the CSV: not a function of the seed


RECORD_COLUMNS = ("method", "trial", "noise_kind", "noise_level", "rel_noise",
                  "rel_error", "residual_linf", "residual_l1", "residual_l2",
                  "success", "solver_count", "error")


def _trial_seed(base_seed: int, trial: int) -> int:
    return base_seed ^ trial


def _component_rng(trial_seed: int, tag: int) -> np.random.Generator:
    return seeded_rng(np.random.SeedSequence([trial_seed, tag]))


def _worker_count(n_tasks: int) -> int:
    env = os.environ.get("GENVERT_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, n_tasks))


def _run_trial(cfg: TrialConfig, trial: int) -> list[TrialRecord]:
    tseed = _trial_seed(cfg.base_seed, trial)
    net = random_gaussian_net(cfg.dims, cfg.weight_std_rule,
                              seed=np.random.SeedSequence([tseed, 0]))
    z_star = gaussian_samples(_component_rng(tseed, 1), net.input_dim)
    x_clean = forward(net, Vector(z_star)).data
    e = cfg.noise.draw(_component_rng(tseed, 2), net.output_dim)
    x = Vector(x_clean + e)
    clean_norm = norm_l2(x_clean)
    rel_noise = norm_l2(e) / clean_norm if clean_norm > 0 else 0.0

    out = []
    for method in cfg.methods:
        started = time.perf_counter()
        rel_error = float("inf")
        residuals = (float("inf"),) * 3
        solver_count = 0
        error = ""
        try:
            if method == "gd":
                gd_cfg = replace(cfg.gd, init_seed=int(tseed))
                report = gd_invert(net, x, ForwardOperator.identity(), gd_cfg)
                solver_count = report.iterations
            else:
                report = invert_network(net, x, method, cfg.lp)
                solver_count = report.lp_solves
            z = report.latent.data
            denom = norm_l2(z_star)
            rel_error = norm_l2(z - z_star) / denom if denom > 0 else norm_l2(z)
            residuals = (report.residual_linf, report.residual_l1, report.residual_l2)
        except (InversionError, LinalgError) as exc:
            error = type(exc).__name__
        wall = time.perf_counter() - started
        out.append(TrialRecord(
            method=method, trial=trial, noise_kind=cfg.noise.kind,
            noise_level=cfg.noise.level, rel_noise=rel_noise, rel_error=rel_error,
            residual_linf=residuals[0], residual_l1=residuals[1],
            residual_l2=residuals[2],
            success=(not error) and rel_error <= cfg.success_threshold,
            solver_count=solver_count, error=error, wall_time_s=wall))
    return out


def run_noise_sweep(cfg: TrialConfig) -> list[TrialRecord]:
    """One record per (trial, method): fresh seeded network and latent per
    trial, observation = forward output plus drawn noise.  Method failures are
    recorded (error column, infinite error), never raised."""
    workers = _worker_count(cfg.trials)
    if workers == 1:
        per_trial = [_run_trial(cfg, t) for t in range(cfg.trials)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_trial = list(pool.map(lambda t: _run_trial(cfg, t), range(cfg.trials)))
    records = [r for trial_records in per_trial for r in trial_records]
    order = {m: i for i, m in enumerate(cfg.methods)}
    records.sort(key=lambda r: (order[r.method], r.trial))
    return records


@dataclass(frozen=True)
class SuccessRow:
    k: int
    method: str
    success_rate: float
    trials: int


def run_success_vs_k(cfg: TrialConfig, k_values) -> list[SuccessRow]:
    """Success rate per method per latent width; hidden/output widths come
    from cfg.dims[1:].  Widths above the first hidden layer are rejected."""
    hidden = cfg.dims[1]
    rows = []
    for k in k_values:
        k = int(k)
        if k < 1:
            raise ValueError("latent width must be positive")
        if k > hidden:
            raise ValueError(f"latent width {k} exceeds hidden width {hidden}; "
                             "the expanding-layer setting is violated")
        sub = replace(cfg, dims=(k,) + tuple(cfg.dims[1:]))
        records = run_noise_sweep(sub)
        for method in cfg.methods:
            hits = [r.success for r in records if r.method == method]
            rows.append(SuccessRow(k, method, float(np.mean(hits)), len(hits)))
    return rows


@dataclass(frozen=True)
class TimingRow:
    method: str
    k: int
    mean_wall_s: float
    trials: int


def run_timing(cfg: TrialConfig) -> list[TimingRow]:
    """Mean wall-clock seconds per method on identical per-trial instances.
    Absolute numbers are machine-dependent; only the ordering is meaningful."""
    records = run_noise_sweep(cfg)
    rows = []
    for method in cfg.methods:
        times = [r.wall_time_s for r in records if r.method == method]
        rows.append(TimingRow(method, cfg.dims[0], float(np.mean(times)), len(times)))
    return rows


def estimate_assumption_constant(W: Matrix, m: int, norm: str = "linf",
                                 samples: int = 1000, seed: int = 0) -> float:
    """Monte-Carlo lower estimate of min ||W_I u|| / ||u|| over row subsets of
    size m, in the infinity or l1 norm."""
    if norm not in ("linf", "l1"):
        raise ValueError(f"norm must be 'linf' or 'l1', got {norm!r}")
    if m <= W.cols:
        raise ValueError(f"subset size {m} must exceed the column count {W.cols}")
    if m > W.rows:
        raise ValueError(f"subset size {m} exceeds the row count {W.rows}")
    if samples < 1:
        raise ValueError("samples must be at least 1")
    measure = norm_linf if norm == "linf" else norm_l1
    rng = seeded_rng(seed)
    best = np.inf
    for _ in range(samples):
        rows = rng.choice(W.rows, size=m, replace=False)
        u = gaussian_samples(rng, W.cols)
        denom = measure(u)
        if denom == 0.0:
            continue
        best = min(best, measure(W.data[rows] @ u) / denom)
    return float(best)


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_to_csv(records: list[TrialRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    writer.writerow(RECORD_COLUMNS)
    for r in records:
        writer.writerow([_cell(getattr(r, col)) for col in RECORD_COLUMNS])
    return buf.getvalue()


def success_table_to_csv(rows: list[SuccessRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    writer.writerow(("k", "method", "success_rate", "trials"))
    for r in rows:
        writer.writerow([r.k, r.method, _cell(r.success_rate), r.trials])
    return buf.getvalue()


def timing_table_to_csv(rows: list[TimingRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    writer.writerow(("method", "k", "mean_wall_s", "trials"))
    for r in rows:
        writer.writerow([r.method, r.k, _cell(r.mean_wall_s), r.trials])
    return buf.getvalue()


def sweep_metadata(cfg: TrialConfig) -> str:
    """Sidecar key=value description of a run; contains no volatile values."""
    lines = [
        f"package=genvert {__version__}",
        f"prng_family={PRNG_FAMILY}",
        f"seed_rule={SEED_RULE}",
        f"relative_noise={RELATIVE_NOISE_DEFINITION}",
        f"dims={','.join(str(d) for d in cfg.dims)}",
        f"weight_std_rule={cfg.weight_std_rule}",
        f"methods={','.join(cfg.methods)}",
        f"noise_kind={cfg.noise.kind}",
        f"noise_level={cfg.noise.level!r}",
        f"trials={cfg.trials}",
        f"success_threshold={cfg.success_threshold!r}",
        f"base_seed={cfg.base_seed}",
        f"lp_epsilon_init={cfg.lp.epsilon_init!r}",
        f"lp_alpha={cfg.lp.alpha!r}",
        f"lp_epsilon_rule={cfg.lp.epsilon_rule}",
        f"lp_assumed_c={cfg.lp.assumed_c!r}",
        f"lp_max_epsilon_rounds={cfg.lp.max_epsilon_rounds}",
        f"gd_learning_rate={cfg.gd.learning_rate!r}",
        f"gd_max_iters={cfg.gd.max_iters}",
        f"gd_grad_norm_stop={cfg.gd.grad_norm_stop!r}",
        f"gd_init={cfg.gd.init}",
        f"gd_restarts={cfg.gd.restarts}",
        "wall_time_in_csv=false",
    ]
    return "\n".join(lines) + "\n"

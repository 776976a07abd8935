"""Experiment orchestration: configs, dataset I/O, runs and sweeps.

File formats
------------
Datasets are headerless CSV, one point per row, coordinates as decimal
floats, with an optional final integer label column.  Weights are stored as
an undirected edge list ``i,j`` (0-based, i < j).  Diagnostics rows are
``step,i,j,dist,N,theta_hat,q,T,accepted`` with accepted as 0/1.  All floats
are written with 17 significant digits, so every file parses back to the
exact same values.

Configs are flat ``key = value`` text with ``#`` comments.  Serialization
orders keys alphabetically, which also makes the config hash independent of
field order in the source file.
"""

from __future__ import annotations

import csv
import hashlib
import math
import time
from dataclasses import dataclass, fields, replace
from multiprocessing import Pool
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .coefficients import GeometryParams, suggest_lambda
from .core import BandwidthSchedule, StepDiagnostics, WeightMatrix, awc_run, awc_run_many, build_schedule
from .datagen import Dataset, ManifoldSpec, add_bounded_noise, sample_circle_gap, sample_uniform_manifold
from .evaluation import local_rand_index, misclassification_rate

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "RunRecord",
    "SweepCell",
    "parse_config",
    "parse_config_file",
    "serialize_config",
    "config_hash",
    "run_experiment",
    "run_sweep",
    "reproduce_circle_config",
    "write_dataset_csv",
    "read_dataset_csv",
    "write_edge_list",
    "read_edge_list",
    "write_diagnostics_csv",
    "read_diagnostics_csv",
    "write_summary_csv",
    "read_summary_csv",
    "DEFAULT_LAMBDA_GRID",
    "CIRCLE_RADII",
]


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


#: radii 2^(i/2 - 2), i = 0..4: geometric with ratio sqrt(2), ending at 1
CIRCLE_RADII = tuple(2.0 ** (i / 2.0 - 2.0) for i in range(5))

#: default threshold sweep: fine steps where the interesting transitions
#: happen, coarse tail, and +inf so a best index always exists
DEFAULT_LAMBDA_GRID = tuple(0.5 * k for k in range(1, 25)) + (14.0, 16.0, 20.0, 26.0, 32.0, math.inf)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one run or sweep needs; see module docstring for the file format."""

    dataset: str = "circle-gap"  # circle-gap | uniform-circle | uniform-sphere2 | segment | file:PATH
    n: int = 500
    eps: float = 0.9
    noise: float = 0.0
    labeled: bool = False
    h0: float = 0.25
    b: float = math.sqrt(2.0)
    steps: int = 4
    radii: Optional[tuple] = None
    lam: str = "auto"  # "auto", a number, or comma-separated sweep values
    alpha: float = 4.0
    d: int = 1
    kappa: float = 0.0
    r_xi: float = 0.0
    b_prime: float = 1.5
    q_radius: str = "previous"
    update: str = "retest"  # retest | carry
    repeats: int = 100
    seed: int = 20260811
    threads: int = 1
    out: str = "awc-out"
    eps_list: Optional[tuple] = None
    n_list: Optional[tuple] = None

    def schedule(self) -> BandwidthSchedule:
        if self.radii is not None:
            return BandwidthSchedule(self.radii)
        return build_schedule(self.h0, self.b, self.steps)

    def geometry(self) -> GeometryParams:
        return GeometryParams(d=self.d, kappa=self.kappa, r_xi=self.r_xi, b_prime=self.b_prime)

    def lambda_value(self, n: int) -> float:
        """Single threshold for a plain run; rejects sweep lists."""
        values = self.lambda_list(n)
        if len(values) != 1:
            raise ConfigError("run needs a single lambda; got a sweep list")
        return values[0]

    def lambda_list(self, n: int) -> tuple:
        if self.lam == "auto":
            return (suggest_lambda(n, self.alpha),)
        try:
            return tuple(float(tok) for tok in str(self.lam).split(","))
        except ValueError as exc:
            raise ConfigError(f"bad lambda value {self.lam!r}") from exc

    def validate(self) -> "ExperimentConfig":
        try:
            self.schedule()
            self.geometry()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        if self.repeats < 1:
            raise ConfigError("repeats must be at least 1")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if not (0.0 <= self.eps <= 1.0):
            raise ConfigError("eps must lie in [0, 1]")
        if self.noise < 0.0:
            raise ConfigError("noise must be >= 0")
        if self.update not in ("retest", "carry"):
            raise ConfigError("update must be 'retest' or 'carry'")
        if self.q_radius not in ("previous", "current"):
            raise ConfigError("q_radius must be 'previous' or 'current'")
        known = {"circle-gap", "uniform-circle", "uniform-sphere2", "segment"}
        if self.dataset not in known and not self.dataset.startswith("file:"):
            raise ConfigError(f"unknown dataset {self.dataset!r}")
        return self


_TUPLE_FIELDS = {"radii", "eps_list", "n_list"}
_INT_FIELDS = {"n", "steps", "d", "repeats", "seed", "threads"}
_FLOAT_FIELDS = {"eps", "noise", "h0", "b", "alpha", "kappa", "r_xi", "b_prime"}
_BOOL_FIELDS = {"labeled"}
# "lambda" is the natural config-file spelling but a reserved word in Python
_KEY_TO_FIELD = {"lambda": "lam"}
_FIELD_TO_KEY = {v: k for k, v in _KEY_TO_FIELD.items()}


def serialize_config(config: ExperimentConfig) -> str:
    lines = []
    for f in sorted(fields(ExperimentConfig), key=lambda f: f.name):
        value = getattr(config, f.name)
        if value is None:
            continue
        if f.name in _TUPLE_FIELDS:
            if f.name == "n_list":
                text = ",".join(str(int(v)) for v in value)
            else:
                text = ",".join(_fmt(v) for v in value)
        elif f.name in _FLOAT_FIELDS:
            text = _fmt(value)
        elif f.name in _BOOL_FIELDS:
            text = "true" if value else "false"
        else:
            text = str(value)
        lines.append(f"{_FIELD_TO_KEY.get(f.name, f.name)} = {text}")
    return "\n".join(lines) + "\n"


def parse_config(text: str) -> ExperimentConfig:
    values: dict = {}
    names = {f.name for f in fields(ExperimentConfig)}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        key = _KEY_TO_FIELD.get(key, key)
        if key not in names:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            if key in _TUPLE_FIELDS:
                items = [tok.strip() for tok in val.split(",") if tok.strip()]
                values[key] = tuple(int(t) for t in items) if key == "n_list" else tuple(
                    float(t) for t in items
                )
            elif key in _INT_FIELDS:
                values[key] = int(val)
            elif key in _FLOAT_FIELDS:
                values[key] = float(val)
            elif key in _BOOL_FIELDS:
                if val.lower() not in ("true", "false", "0", "1"):
                    raise ValueError(val)
                values[key] = val.lower() in ("true", "1")
            else:
                values[key] = val
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from exc
    return ExperimentConfig(**values).validate()


def parse_config_file(path: str | Path) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def config_hash(config: ExperimentConfig) -> str:
    return hashlib.sha256(serialize_config(config).encode("utf-8")).hexdigest()[:16]


# ---------------------------------------------------------------------------
# dataset construction and CSV round-trips


def build_dataset(config: ExperimentConfig, seed: int, stream: int = 0) -> Dataset:
    if config.dataset.startswith("file:"):
        return read_dataset_csv(config.dataset[5:], labeled=config.labeled)
    if config.dataset == "circle-gap":
        data = sample_circle_gap(config.n, config.eps, seed, stream)
    elif config.dataset == "uniform-circle":
        data = sample_uniform_manifold(ManifoldSpec("circle"), config.n, seed, stream)
    elif config.dataset == "uniform-sphere2":
        data = sample_uniform_manifold(ManifoldSpec("sphere2"), config.n, seed, stream)
    elif config.dataset == "segment":
        data = sample_uniform_manifold(ManifoldSpec("segment"), config.n, seed, stream)
    else:
        raise ConfigError(f"unknown dataset {config.dataset!r}")
    if config.noise > 0.0:
        # noise streams sit far from the sampling stream to avoid overlap
        data = add_bounded_noise(data, config.noise, seed, stream + (1 << 32))
    return data


def write_dataset_csv(path: str | Path, data: Dataset) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for idx in range(data.n):
            row = [_fmt(c) for c in data.points[idx]]
            if data.labels is not None:
                row.append(str(int(data.labels[idx])))
            writer.writerow(row)


def read_dataset_csv(path: str | Path, labeled: bool = False) -> Dataset:
    points, labels = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            if labeled:
                points.append([float(tok) for tok in row[:-1]])
                labels.append(int(row[-1]))
            else:
                points.append([float(tok) for tok in row])
    return Dataset(points=np.array(points, dtype=np.float64),
                   labels=np.array(labels, dtype=np.int64) if labeled else None)


def write_edge_list(path: str | Path, weights: WeightMatrix) -> None:
    iu, ju = weights.edge_list()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for a, b in zip(iu.tolist(), ju.tolist()):
            writer.writerow([a, b])


def read_edge_list(path: str | Path, n: int) -> WeightMatrix:
    iu, ju = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if row:
                iu.append(int(row[0]))
                ju.append(int(row[1]))
    return WeightMatrix.from_pairs(n, np.array(iu, dtype=np.int64), np.array(ju, dtype=np.int64))


_DIAG_HEADER = ["step", "i", "j", "dist", "N", "theta_hat", "q", "T", "accepted"]


def write_diagnostics_csv(path: str | Path, diagnostics: Sequence[StepDiagnostics]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_DIAG_HEADER)
        for diag in diagnostics:
            for idx in range(diag.n_pairs):
                writer.writerow(
                    [
                        diag.step,
                        int(diag.i[idx]),
                        int(diag.j[idx]),
                        _fmt(diag.dist[idx]),
                        int(diag.N[idx]),
                        _fmt(diag.theta_hat[idx]),
                        _fmt(diag.q[idx]),
                        _fmt(diag.T[idx]),
                        int(diag.accepted[idx]),
                    ]
                )


def read_diagnostics_csv(path: str | Path) -> list[dict]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != _DIAG_HEADER:
            raise ValueError(f"unexpected diagnostics header {header!r}")
        for row in reader:
            rows.append(
                {
                    "step": int(row[0]),
                    "i": int(row[1]),
                    "j": int(row[2]),
                    "dist": float(row[3]),
                    "N": int(row[4]),
                    "theta_hat": float(row[5]),
                    "q": float(row[6]),
                    "T": float(row[7]),
                    "accepted": bool(int(row[8])),
                }
            )
    return rows


_SUMMARY_HEADER = ["eps", "n", "mean_rand", "frac_perfect", "mean_min_lambda"]


def write_summary_csv(path: str | Path, rows: Sequence["SweepCell"]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_SUMMARY_HEADER)
        for cell in rows:
            writer.writerow(
                [_fmt(cell.eps), cell.n, _fmt(cell.mean_rand), _fmt(cell.frac_perfect), _fmt(cell.mean_min_lambda)]
            )


def read_summary_csv(path: str | Path) -> list["SweepCell"]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != _SUMMARY_HEADER:
            raise ValueError(f"unexpected summary header {header!r}")
        for row in reader:
            out.append(
                SweepCell(
                    eps=float(row[0]),
                    n=int(row[1]),
                    mean_rand=float(row[2]),
                    frac_perfect=float(row[3]),
                    mean_min_lambda=float(row[4]),
                )
            )
    return out


# ---------------------------------------------------------------------------
# single runs


@dataclass
class RunRecord:
    """Summary of one completed run; wall time never enters the CSV outputs."""

    config_hash: str
    n: int
    lambda_used: float
    step_summary: list  # (step, pairs_tested, pairs_rejected)
    rand_index: Optional[float]
    misclassification: Optional[float]
    n_edges: int
    wall_time_s: float


def run_experiment(config: ExperimentConfig, out_dir: str | Path | None = None) -> RunRecord:
    """Run once, write dataset/weights/diagnostics/metrics CSVs, return the record."""
    config = config.validate()
    started = time.perf_counter()
    data = build_dataset(config, config.seed)
    schedule = config.schedule()
    lam = config.lambda_value(data.n)
    weights, diagnostics = awc_run(
        data,
        schedule,
        lam,
        config.geometry(),
        q_radius=config.q_radius,
        carry_forward=config.update == "carry",
    )
    rand = miscls = None
    if data.labels is not None:
        rand = local_rand_index(weights, data, schedule[-1])
        miscls = misclassification_rate(weights, data, schedule[-1])
    record = RunRecord(
        config_hash=config_hash(config),
        n=data.n,
        lambda_used=lam,
        step_summary=[(d.step, d.n_pairs, d.n_rejected) for d in diagnostics],
        rand_index=rand,
        misclassification=miscls,
        n_edges=weights.n_edges,
        wall_time_s=time.perf_counter() - started,
    )
    out = Path(out_dir if out_dir is not None else config.out)
    out.mkdir(parents=True, exist_ok=True)
    write_dataset_csv(out / "dataset.csv", data)
    write_edge_list(out / "weights.csv", weights)
    write_diagnostics_csv(out / "diagnostics.csv", diagnostics)
    with open(out / "metrics.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["config_hash", "n", "lambda", "n_edges", "rand_index", "misclassification"])
        writer.writerow(
            [
                record.config_hash,
                record.n,
                _fmt(record.lambda_used),
                record.n_edges,
                "" if rand is None else _fmt(rand),
                "" if miscls is None else _fmt(miscls),
            ]
        )
    return record


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepCell:
    """One (eps, n) cell of a sweep summary."""

    eps: float
    n: int
    mean_rand: float
    frac_perfect: float
    mean_min_lambda: float


def _sweep_task(args) -> tuple:
    config, eps, n, cell_idx, rep = args
    stream = (cell_idx << 20) | rep
    data = build_dataset(replace(config, eps=eps, n=n), config.seed, stream)
    schedule = config.schedule()
    lambdas = config.lambda_list(n)
    geometry = config.geometry()
    denses = awc_run_many(
        data,
        schedule,
        lambdas,
        geometry,
        q_radius=config.q_radius,
        carry_forward=config.update == "carry",
    )
    best = -1.0
    min_lambda = math.nan
    for lam, dense in zip(lambdas, denses):
        rand = local_rand_index(dense, data, schedule[-1])
        if rand > best:
            best = rand
            min_lambda = lam
    return cell_idx, rep, best, min_lambda


def run_sweep(
    config: ExperimentConfig, out_dir: str | Path | None = None, threads: int | None = None
) -> list[SweepCell]:
    """Sweep eps_list x n_list with ``repeats`` trials per cell.

    Per trial, runs the full schedule once per lambda in the sweep list and
    keeps the best local accuracy index plus the smallest lambda attaining
    it.  Repeats execute in parallel; the summary is aggregated in a fixed
    order so the output is deterministic for a given config.
    """
    config = config.validate()
    eps_list = config.eps_list or (config.eps,)
    n_list = config.n_list or (config.n,)
    if config.lam == "auto":
        raise ConfigError("sweep needs an explicit lambda list, not 'auto'")
    cells = [(eps, n) for eps in eps_list for n in n_list]
    tasks = [
        (config, eps, n, cell_idx, rep)
        for cell_idx, (eps, n) in enumerate(cells)
        for rep in range(config.repeats)
    ]
    threads = threads if threads is not None else config.threads
    if threads > 1:
        with Pool(processes=threads) as pool:
            results = pool.map(_sweep_task, tasks, chunksize=1)
    else:
        results = [_sweep_task(t) for t in tasks]
    by_cell: dict[int, list] = {idx: [] for idx in range(len(cells))}
    for cell_idx, rep, best, min_lambda in results:
        by_cell[cell_idx].append((rep, best, min_lambda))
    rows = []
    for cell_idx, (eps, n) in enumerate(cells):
        entries = sorted(by_cell[cell_idx])
        bests = np.array([e[1] for e in entries])
        min_lams = np.array([e[2] for e in entries])
        rows.append(
            SweepCell(
                eps=eps,
                n=n,
                mean_rand=float(bests.mean()),
                frac_perfect=float((bests == 1.0).mean()),
                mean_min_lambda=float(min_lams.mean()),
            )
        )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_summary_csv(out / "summary.csv", rows)
    return rows


def reproduce_circle_config(repeats: int = 100, seed: int = 20260811, threads: int = 1) -> ExperimentConfig:
    """The canned desk-scale circle experiment.

    Unit circle, two clusters cut by the |y| <= 1/4 band, radii 2^(i/2 - 2)
    up to 1, overlap coefficient adjusted for intrinsic dimension 1 only
    (curvature and noise treated as zero), threshold swept over the default
    grid with the best index kept per sample.
    """
    return ExperimentConfig(
        dataset="circle-gap",
        eps_list=(0.6, 0.7, 0.8, 0.9, 1.0),
        n_list=(100, 200, 500),
        radii=CIRCLE_RADII,
        lam=",".join(_fmt(v) for v in DEFAULT_LAMBDA_GRID),
        d=1,
        kappa=0.0,
        r_xi=0.0,
        repeats=repeats,
        seed=seed,
        threads=threads,
    )


def reproduce_circle(
    out_dir: str | Path, repeats: int = 100, seed: int = 20260811, threads: int = 1
) -> list[SweepCell]:
    """Run the canned circle sweep and write summary plus per-figure extracts."""
    config = reproduce_circle_config(repeats=repeats, seed=seed, threads=threads)
    rows = run_sweep(config, out_dir=out_dir, threads=threads)
    out = Path(out_dir)
    with open(out / "fig_rand_data.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["eps", "n", "mean_rand", "frac_perfect"])
        for cell in rows:
            writer.writerow([_fmt(cell.eps), cell.n, _fmt(cell.mean_rand), _fmt(cell.frac_perfect)])
    with open(out / "fig_lambda_data.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "mean_min_lambda"])
        for cell in rows:
            if cell.eps == 0.9:
                writer.writerow([cell.n, _fmt(cell.mean_min_lambda)])
    return rows

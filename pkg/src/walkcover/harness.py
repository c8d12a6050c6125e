"""Reproducible ensembles: configs, seed-splitting, CSV, and analysis.

A RunConfig fully determines an ensemble: replica i's walk j draws the
seed mix64(master XOR golden*(i*walkers+j+1)), every replica simulates
independently, and records merge in replica order — so the output is a
pure function of the config, independent of the thread count.  The
experiment-identity part of the config (everything except thread count
and output paths) is hashed into the CSV header for provenance.

CSV rows are (experiment, replica, seed, n, statistic, value, extra)
with floats in repr form and the extra parameters as canonical JSON, so
export -> import round-trips records exactly.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, NamedTuple

import csv as _csv

import numpy as np

from . import experiments as xp
from .errors import InsufficientDataError, MalformedFileError, SaturationError
from .experiments import Measurement
from .potential import exact_green
from .rng import replica_seed

EXPERIMENT_KINDS = (
    "cover",
    "cover_k",
    "cover_multi",
    "origin_radius",
    "vn",
    "excursion",
    "exit_time",
    "potential",
)

_CSV_COLUMNS = ("experiment", "replica", "seed", "n", "statistic", "value", "extra")
_CSV_MAGIC = "# walkcover-results v1"


@dataclass(frozen=True)
class RunConfig:
    """Everything an ensemble run depends on.

    checkpoints is the n schedule (cover/origin_radius/vn kinds); radii
    is the r schedule (exit_time, potential); ks the multiplicities
    tracked at every checkpoint (cover_k); walkers the number of joint
    walks per replica (cover_multi); samples optional explicit V(n)
    sample times; center/annulus/stop_radius the excursion geometry.
    """

    experiment: str
    master_seed: int
    replicas: int
    threads: int = 1
    checkpoints: tuple[int, ...] = ()
    radii: tuple[float, ...] = ()
    ks: tuple[int, ...] = (1,)
    walkers: int = 1
    samples: tuple[int, ...] = ()
    center: tuple[int, int] = (0, 0)
    annulus: tuple[float, float] = (0.0, 0.0)
    stop_radius: float = 0.0
    out_dir: str = ""

    def __post_init__(self):
        if self.experiment not in EXPERIMENT_KINDS:
            raise ValueError(
                f"unknown experiment kind {self.experiment!r}; choose from {EXPERIMENT_KINDS}"
            )
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.walkers < 1:
            raise ValueError("walkers must be >= 1")
        if any(b <= a for a, b in zip(self.checkpoints, self.checkpoints[1:])):
            raise ValueError("checkpoints must be strictly increasing")

    # -- canonical forms ---------------------------------------------------

    def identity_json(self) -> str:
        """Canonical JSON of the experiment identity: every field except
        the execution details (thread count, output directory)."""
        d = asdict(self)
        d.pop("threads")
        d.pop("out_dir")
        return json.dumps(d, sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.identity_json().encode()).hexdigest()[:16]

    def to_json(self) -> str:
        """Full lossless JSON (includes threads and out_dir)."""
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        for key in ("checkpoints", "radii", "ks", "samples", "center", "annulus"):
            if key in d and d[key] is not None:
                d[key] = tuple(d[key])
        return cls(**d)


@dataclass(frozen=True)
class RunRecord:
    """One replica's measurements (seed is the replica's first walk seed)."""

    replica: int
    seed: int
    rows: tuple[Measurement, ...]


def _replica_record(config: RunConfig, i: int) -> RunRecord:
    seeds = [replica_seed(config.master_seed, i * config.walkers + j)
             for j in range(config.walkers)]
    kind = config.experiment
    if kind == "cover":
        rows = xp.cover_replica(seeds[0], config.checkpoints)
    elif kind == "cover_k":
        ks_by_n = {n: config.ks for n in config.checkpoints}
        rows = xp.cover_replica(seeds[0], config.checkpoints, ks_by_n=ks_by_n)
    elif kind == "cover_multi":
        ks_by_n = {n: config.ks for n in config.checkpoints}
        rows = xp.cover_multi_replica(seeds, config.checkpoints, ks_by_n=ks_by_n)
    elif kind == "origin_radius":
        rows = xp.origin_radius_replica(seeds[0], config.checkpoints)
    elif kind == "vn":
        n_max = config.checkpoints[-1]
        samples = config.samples or tuple(
            int(v) for v in xp.vn_sample_grid(1000, n_max, 160)
        )
        rows = xp.vn_replica(seeds[0], n_max, samples)
    elif kind == "exit_time":
        rows = xp.exit_time_replica(seeds[0], config.radii)
    elif kind == "excursion":
        rho, big_r = config.annulus
        counts = xp.annulus_excursion_counts(
            np.array([seeds[0]], dtype=np.uint64),
            config.center, rho, big_r, config.stop_radius,
        )
        rows = [Measurement(0, "excursion_count", float(counts[0]), {
            "cx": config.center[0], "cy": config.center[1],
            "rho": float(rho), "big_r": float(big_r),
            "stop_radius": float(config.stop_radius),
        })]
    elif kind == "potential":
        rows = [
            Measurement(0, "green_00", float(exact_green((0, 0), r)), {"r": float(r)})
            for r in config.radii
        ]
    else:  # pragma: no cover - __post_init__ rejects unknown kinds
        raise ValueError(f"unhandled experiment kind {kind!r}")
    return RunRecord(replica=i, seed=seeds[0], rows=tuple(rows))


def run_ensemble(config: RunConfig) -> list[RunRecord]:
    """Simulate all replicas; deterministic given the config identity,
    whatever the thread count."""
    indices = range(config.replicas)
    if config.threads == 1:
        return [_replica_record(config, i) for i in indices]
    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        return list(pool.map(lambda i: _replica_record(config, i), indices))


# -- CSV round trip --------------------------------------------------------------


def _canonical_extra(extra: dict) -> str:
    return json.dumps(extra, sort_keys=True, separators=(",", ":"))


def export_csv(records: Iterable[RunRecord], path, config: RunConfig | None = None) -> None:
    """Write records with a provenance header.

    Line 1 is the format tag, line 2 the experiment-identity JSON, line
    3 its hash, line 4 the column names; rows follow in record order.
    """
    identity = config.identity_json() if config is not None else "{}"
    digest = (config.config_hash() if config is not None
              else hashlib.sha256(identity.encode()).hexdigest()[:16])
    experiment = config.experiment if config is not None else ""
    with open(path, "w", newline="") as fh:
        fh.write(_CSV_MAGIC + "\n")
        fh.write(f"# config {identity}\n")
        fh.write(f"# config_hash {digest}\n")
        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(_CSV_COLUMNS)
        for rec in records:
            for row in rec.rows:
                writer.writerow([
                    experiment, rec.replica, rec.seed, row.n, row.statistic,
                    repr(float(row.value)), _canonical_extra(row.extra),
                ])


def import_csv(path) -> tuple[list[RunRecord], dict]:
    """Read records back; returns (records, config identity dict).

    A config-hash mismatch is reported as a warning and the import
    proceeds; structural problems (bad header, missing columns) raise
    MalformedFileError.
    """
    with open(path, "r", newline="") as fh:
        first = fh.readline().rstrip("\n")
        if first != _CSV_MAGIC:
            raise MalformedFileError(f"not a results file (leading line {first!r})")
        config_line = fh.readline().rstrip("\n")
        hash_line = fh.readline().rstrip("\n")
        if not config_line.startswith("# config ") or not hash_line.startswith("# config_hash "):
            raise MalformedFileError("missing config header lines")
        identity = config_line[len("# config "):]
        stored_hash = hash_line[len("# config_hash "):]
        actual = hashlib.sha256(identity.encode()).hexdigest()[:16]
        if stored_hash != actual:
            warnings.warn(
                f"config hash mismatch: header says {stored_hash}, content hashes to {actual}",
                stacklevel=2,
            )
        try:
            config_dict = json.loads(identity)
        except json.JSONDecodeError as e:
            raise MalformedFileError(f"config header is not valid JSON: {e}") from e
        reader = _csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedFileError("missing column header row") from None
        if tuple(header) != _CSV_COLUMNS:
            missing = set(_CSV_COLUMNS) - set(header)
            raise MalformedFileError(
                f"column header {header} does not match {_CSV_COLUMNS}"
                + (f" (missing {sorted(missing)})" if missing else "")
            )
        by_replica: dict[int, dict] = {}
        for line in reader:
            if len(line) != len(_CSV_COLUMNS):
                raise MalformedFileError(f"row has {len(line)} fields, expected {len(_CSV_COLUMNS)}")
            _, replica, seed, n, statistic, value, extra = line
            entry = by_replica.setdefault(int(replica), {"seed": int(seed), "rows": []})
            entry["rows"].append(
                Measurement(int(n), statistic, float(value), json.loads(extra))
            )
    records = [
        RunRecord(replica=i, seed=entry["seed"], rows=tuple(entry["rows"]))
        for i, entry in sorted(by_replica.items())
    ]
    return records, config_dict


# -- analysis --------------------------------------------------------------------


def iter_rows(records, statistic: str | None = None, n: int | None = None,
              where: Callable[[Measurement], bool] | None = None):
    """Yield (record, row) pairs matching the filters."""
    for rec in records:
        for row in rec.rows:
            if statistic is not None and row.statistic != statistic:
                continue
            if n is not None and row.n != n:
                continue
            if where is not None and not where(row):
                continue
            yield rec, row


def collect_values(records, statistic: str, n: int | None = None,
                   where: Callable[[Measurement], bool] | None = None) -> np.ndarray:
    """All matching row values as a float array (record order)."""
    return np.array([row.value for _, row in iter_rows(records, statistic, n, where)],
                    dtype=np.float64)


class ExponentEstimate(NamedTuple):
    slope: float
    intercept: float
    half_width: float


def estimate_exponent(records, statistic: str, n_range=None, *,
                      x_key: str = "n", sqrt_values: bool = False,
                      where: Callable[[Measurement], bool] | None = None,
                      bootstrap: int = 400) -> ExponentEstimate:
    """Least-squares slope of median log(statistic) against log x.

    x is the checkpoint column by default, or a numeric extra parameter
    named by x_key (e.g. "r" for exit times).  sqrt_values halves the
    log for statistics stored as exact squares.  The half-width is a
    95% bootstrap band over replicas with a fixed internal seed, so the
    estimate is deterministic.
    """
    lo, hi = (float(n_range[0]), float(n_range[1])) if n_range else (-math.inf, math.inf)
    per_replica: dict[int, dict[float, list[float]]] = {}
    for rec, row in iter_rows(records, statistic, None, where):
        x = float(row.n) if x_key == "n" else float(row.extra[x_key])
        if not lo <= x <= hi:
            continue
        v = float(row.value)
        if v <= 0:
            raise ValueError(
                f"nonpositive value {v} for {statistic} at x={x}: cannot take logs"
            )
        if sqrt_values:
            v = math.sqrt(v)
        per_replica.setdefault(rec.replica, {}).setdefault(x, []).append(v)
    replicas = sorted(per_replica)
    xs = sorted({x for d in per_replica.values() for x in d})
    if len(xs) < 3:
        raise InsufficientDataError(
            f"need at least 3 distinct x values for a slope, have {len(xs)}"
        )
    if len(replicas) < 2:
        raise InsufficientDataError(
            f"need at least 2 replicas for a confidence width, have {len(replicas)}"
        )

    def slope_of(chosen) -> tuple[float, float]:
        log_x, log_med = [], []
        for x in xs:
            vals = [v for i in chosen for v in per_replica[i].get(x, ())]
            if not vals:
                continue
            log_x.append(math.log(x))
            log_med.append(math.log(float(np.median(vals))))
        if len(log_x) < 2:
            return math.nan, math.nan
        a, b = np.polyfit(log_x, log_med, 1)
        return float(a), float(b)

    slope, intercept = slope_of(replicas)
    gen = np.random.default_rng(0x5EEDFACE)
    boot = np.empty(bootstrap, dtype=np.float64)
    idx = np.array(replicas)
    for b in range(bootstrap):
        sample = idx[gen.integers(0, idx.size, size=idx.size)]
        boot[b], _ = slope_of(sample)
    boot = boot[~np.isnan(boot)]
    if boot.size:
        lo_q, hi_q = np.quantile(boot, [0.025, 0.975])
        half = float(max(hi_q - slope, slope - lo_q, 0.0))
    else:  # pragma: no cover - only if every resample degenerates
        half = math.inf
    return ExponentEstimate(slope=slope, intercept=intercept, half_width=half)


class SurvivalTable(NamedTuple):
    n: int
    count: int
    rows: list[tuple[float, float, float, float]]  # (y, empirical, limit, gap)
    ks: float


def survival_vs_limit(records, n: int | None = None, y_grid=None) -> SurvivalTable:
    """Empirical survival of (ln R_n)^2 / ln n against exp(-4y).

    Uses origin_radius_sq rows at the common checkpoint n (inferred when
    unique).  The KS distance is the exact sup-gap between the empirical
    CDF (ties handled) and 1 - exp(-4y).
    """
    ns = sorted({row.n for _, row in iter_rows(records, "origin_radius_sq")})
    if not ns:
        raise ValueError("no origin_radius_sq rows to analyse")
    if n is None:
        if len(ns) > 1:
            raise ValueError(f"records hold several checkpoints {ns}; pass n explicitly")
        n = ns[0]
    r_sq = collect_values(records, "origin_radius_sq", n=n)
    if r_sq.size == 0:
        raise ValueError(f"no origin_radius_sq rows at n={n}")
    y = (0.5 * np.log(r_sq)) ** 2 / math.log(n)
    if y_grid is None:
        y_grid = np.concatenate((np.linspace(0.0, 1.0, 21), [math.log(2.0) / 4.0]))
        y_grid = np.unique(np.round(y_grid, 12))
    rows = []
    for yv in np.asarray(y_grid, dtype=np.float64):
        emp = float(np.mean(y >= yv))
        lim = math.exp(-4.0 * yv)
        rows.append((float(yv), emp, lim, emp - lim))
    ys = np.sort(y)
    uniq, counts = np.unique(ys, return_counts=True)
    below = np.concatenate(([0], np.cumsum(counts)))[:-1] / ys.size  # P(Y < y)
    at_or_below = np.cumsum(counts) / ys.size  # P(Y <= y)
    limit_cdf = 1.0 - np.exp(-4.0 * uniq)
    ks = float(np.max(np.maximum(np.abs(limit_cdf - below), np.abs(limit_cdf - at_or_below))))
    return SurvivalTable(n=int(n), count=int(r_sq.size), rows=rows, ks=ks)


class SweepRow(NamedTuple):
    alpha: float
    k: int
    median_ratio: float  # median of ln max(R~(n;k), 1) / ln n
    prediction: float  # (1 - sqrt(alpha)) / 4


def multiplicity_sweep(records, alphas, n: int) -> list[SweepRow]:
    """Measured multiplicity exponents next to the predicted curve.

    alpha maps to the threshold k(alpha) = max(1, ceil(alpha (ln n)^2 /
    pi)); the measured column is the replica-median of ln R~(n; k)/ln n
    (an empty covered disc contributes ratio 0).  Rows whose counts
    saturated make the sweep unreliable, so they raise SaturationError.
    """
    ks = xp.multiplicity_thresholds(alphas, n)
    out = []
    for alpha, k in zip(alphas, ks):
        vals = []
        for _, row in iter_rows(records, "r_tilde_sq", n=n,
                                where=lambda r, k=k: r.extra.get("k") == k):
            if row.extra.get("saturated"):
                raise SaturationError(
                    f"counts saturated at n={n}, k={k}: sweep values would be wrong"
                )
            vals.append(row.value)
        if not vals:
            raise InsufficientDataError(f"no r_tilde_sq rows with k={k} at n={n}")
        ratios = [0.5 * math.log(max(v, 1.0)) / math.log(n) for v in vals]
        out.append(SweepRow(
            alpha=float(alpha), k=int(k),
            median_ratio=float(np.median(ratios)),
            prediction=(1.0 - math.sqrt(alpha)) / 4.0,
        ))
    return out

"""Command-line front end.

Subcommands:
    simulate   run any ensemble from a JSON config file
    cover      covered-disc ensemble shortcut (single or joint walks)
    excursion  annulus excursion-count ensemble shortcut
    potential  Green/hitting oracle tables for a disc
    estimate   log-log slope of a statistic in a results CSV

Common flags: --config <json>, --seed, --replicas, --threads, --out.
Output files land in --out if given, else $WALKCOVER_OUT_DIR, else the
working directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import WalkcoverError
from .harness import RunConfig, estimate_exponent, export_csv, import_csv, run_ensemble
from .potential import export_oracle_csv, green_origin_values

OUT_DIR_ENV = "WALKCOVER_OUT_DIR"


def _default_out_dir(config: RunConfig | None = None) -> Path:
    if config is not None and config.out_dir:
        return Path(config.out_dir)
    return Path(os.environ.get(OUT_DIR_ENV, "."))


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(float(v)) for v in text.split(",") if v.strip())


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _load_config(args, defaults: dict) -> RunConfig:
    """Config file first, then command-line overrides, then defaults."""
    base: dict = {}
    if getattr(args, "config", None):
        base = json.loads(Path(args.config).read_text())
    merged = {**defaults, **base}
    for key in ("seed", "replicas", "threads"):
        val = getattr(args, key, None)
        if val is not None:
            merged["master_seed" if key == "seed" else key] = val
    return RunConfig.from_dict(merged)


def _run_and_write(config: RunConfig, out: str | None) -> Path:
    records = run_ensemble(config)
    if out:
        path = Path(out)
    else:
        name = f"{config.experiment}_seed{config.master_seed}.csv"
        path = _default_out_dir(config) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    export_csv(records, path, config)
    rows = sum(len(r.rows) for r in records)
    print(f"wrote {rows} rows from {config.replicas} replicas to {path}")
    return path


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with RunConfig fields")
    p.add_argument("--seed", type=int, help="master seed (overrides config)")
    p.add_argument("--replicas", type=int, help="replica count (overrides config)")
    p.add_argument("--threads", type=int, help="worker threads (overrides config)")
    p.add_argument("--out", help="output CSV path")


def _cmd_simulate(args) -> int:
    if not args.config:
        print("simulate needs --config <json>", file=sys.stderr)
        return 2
    config = _load_config(args, defaults={})
    _run_and_write(config, args.out)
    return 0


def _cmd_cover(args) -> int:
    defaults = {
        "experiment": "cover_multi" if args.walkers > 1 else
                      ("cover_k" if args.ks != (1,) else "cover"),
        "master_seed": 1,
        "replicas": 4,
        "checkpoints": args.checkpoints,
        "ks": args.ks,
        "walkers": args.walkers,
    }
    config = _load_config(args, defaults)
    _run_and_write(config, args.out)
    return 0


def _cmd_excursion(args) -> int:
    rho, big_r = args.annulus
    defaults = {
        "experiment": "excursion",
        "master_seed": 1,
        "replicas": 1000,
        "center": tuple(args.center),
        "annulus": (rho, big_r),
        "stop_radius": args.stop_radius,
    }
    config = _load_config(args, defaults)
    _run_and_write(config, args.out)
    return 0


def _cmd_potential(args) -> int:
    radii = args.green or (args.radius,)
    for r, g in zip(radii, green_origin_values(radii)):
        print(f"G(0,0) on D(0,{r}): {g!r}")
    if args.out:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        export_oracle_csv(args.radius, path)
        print(f"wrote oracle table for r={args.radius} to {path}")
    return 0


def _cmd_estimate(args) -> int:
    records, _ = import_csv(args.input)
    est = estimate_exponent(
        records,
        args.statistic,
        n_range=tuple(args.n_range) if args.n_range else None,
        x_key=args.x_key,
        sqrt_values=args.sqrt_values,
    )
    print(f"slope {est.slope!r}  intercept {est.intercept!r}  half_width {est.half_width!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="walkcover",
                                     description="covered-disc statistics of planar random walks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run an ensemble described by a JSON config")
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("cover", help="covered-disc ensemble")
    _add_common(p)
    p.add_argument("--checkpoints", type=_ints, default=(10_000, 100_000),
                   help="comma-separated n schedule")
    p.add_argument("--ks", type=_ints, default=(1,), help="multiplicity thresholds")
    p.add_argument("--walkers", type=int, default=1, help="joint walks per replica")
    p.set_defaults(func=_cmd_cover)

    p = sub.add_parser("excursion", help="annulus excursion-count ensemble")
    _add_common(p)
    p.add_argument("--center", type=_ints, default=(16, 0), help="annulus centre x,y")
    p.add_argument("--annulus", type=_floats, default=(4.0, 8.0), help="inner,outer radii")
    p.add_argument("--stop-radius", dest="stop_radius", type=float, default=64.0)
    p.set_defaults(func=_cmd_excursion)

    p = sub.add_parser("potential", help="exact Green/hitting tables")
    p.add_argument("--radius", type=float, default=16.0, help="disc radius for the table")
    p.add_argument("--green", type=_floats, default=None,
                   help="also print G(0,0) for these radii")
    p.add_argument("--out", help="write the per-site oracle CSV here")
    p.set_defaults(func=_cmd_potential)

    p = sub.add_parser("estimate", help="fit a scaling exponent from a results CSV")
    p.add_argument("--input", required=True, help="results CSV from simulate/cover")
    p.add_argument("--statistic", required=True)
    p.add_argument("--x-key", dest="x_key", default="n",
                   help="abscissa: 'n' or an extra-params key like 'r'")
    p.add_argument("--n-range", dest="n_range", type=_floats, default=None,
                   help="inclusive x window lo,hi")
    p.add_argument("--sqrt-values", dest="sqrt_values", action="store_true",
                   help="statistic is stored squared; halve the log")
    p.set_defaults(func=_cmd_estimate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except WalkcoverError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())

"""Command-line entry point: ``regmatch <subcommand> [options]``.

Every subcommand accepts ``--config`` (key=value or JSON file), the common
overrides ``--seed``, ``--trials``, ``--out`` and ``--workers``, and
``--set key=value`` for any other config key.  Exit status is 0 when the
experiment's thresholds pass, 1 when they fail and 2 on a config error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, RegMatchError
from .experiments import ExperimentConfig, _coerce, parse_config_text, report_paths, run_experiment

SUBCOMMANDS = {
    "generate": "generate",
    "validate": "validate",
    "luby": "luby",
    "tv": "tv",
    "preservation": "preservation",
    "warmup": "warmup",
    "fast": "fast",
    "node-avg": "node_avg",
    "lowerbound": "lowerbound",
    "martingale": "martingale",
}

HELP = {
    "generate": "write random regular graphs as edge lists",
    "validate": "report regularity and bipartiteness of a graph",
    "luby": "one round of distributed Luby per trial",
    "tv": "total-variation gap between distributed and sequential Luby",
    "preservation": "multi-round Luby with per-round degree snapshots",
    "warmup": "sampling stage plus augmenting-path phases",
    "fast": "colour coding plus O(log 1/eps) Luby rounds",
    "node-avg": "maximal matching with node-averaged finish times",
    "lowerbound": "gadget instances against truncated algorithms",
    "martingale": "Monte-Carlo check of the shifted martingale tails",
}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="regmatch", description="Matching experiments on regular graphs.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, help=HELP[name])
        sp.add_argument("--config", help="key=value or JSON config file")
        sp.add_argument("--seed", type=int, help="master seed (required here or in the config)")
        sp.add_argument("--trials", type=int)
        sp.add_argument("--out", help="output directory for CSV and JSON reports")
        sp.add_argument("--workers", type=int)
        sp.add_argument("--graph-file", help="read the input graph from an edge-list file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key, e.g. --set graph.n=2000 --set eps=0.05")
        sp.add_argument("--quiet", action="store_true", help="print only the output paths")
    return ap


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}", field="config") from exc
        for key, val in parse_config_text(text).items():
            if key in ("graph", "params") and isinstance(val, dict):
                prefix = "graph." if key == "graph" else ""
                data.update({prefix + k: v for k, v in val.items()})
            else:
                data[key] = val
    data["kind"] = SUBCOMMANDS[args.command]
    for key in ("seed", "trials", "out", "workers"):
        val = getattr(args, key)
        if val is not None:
            data[key] = val
    if args.graph_file:
        data["graph.family"] = "file"
        data["graph.file"] = args.graph_file
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}", field="set")
        key, val = item.split("=", 1)
        data[key.strip()] = _coerce(val)
    return ExperimentConfig.from_mapping(data)


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        rep = run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except RegMatchError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    csv_path, json_path = report_paths(cfg)
    if args.quiet:
        print(csv_path)
        print(json_path)
    else:
        summary = {k: (v["mean"] if isinstance(v, dict) else v) for k, v in rep.aggregates.items()}
        print(json.dumps({"kind": cfg.kind, "passed": rep.passed, **summary, "csv": csv_path, "json": json_path},
                         indent=1))
    return 0 if rep.passed else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

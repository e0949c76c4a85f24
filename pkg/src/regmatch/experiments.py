"""Experiment configuration, dispatch, aggregation and report persistence.

A config is a key=value text file (``#`` starts a comment) or the same
mapping as JSON.  Top-level keys are ``kind``, ``seed``, ``trials``,
``out``, ``workers`` and ``min_pass``; keys prefixed ``graph.`` describe
the input graph; every other key is an algorithm parameter.  Example::

    kind = fast
    seed = 7
    trials = 50
    graph.family = bipartite_regular
    graph.n = 20000
    graph.delta = 256
    eps = 0.05

Trial ``t`` uses graph seed ``split_seed(seed, t, STREAM_SAMPLE)`` and
algorithm seed ``split_seed(seed, t)``, so reports depend only on the
config.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ConfigError, RegMatchError
from .graph import (
    Graph,
    complete_bipartite,
    complete_graph,
    cycle_graph,
    gen_regular_bipartite,
    gen_regular_general,
    path_graph,
    petersen_graph,
    read_edge_list,
    star_graph,
    validate,
    write_edge_list,
)
from .rng import STREAM_SAMPLE, split_seed

VERSION = "0.1.0"

KINDS = (
    "generate",
    "validate",
    "luby",
    "tv",
    "preservation",
    "warmup",
    "fast",
    "node_avg",
    "lowerbound",
    "martingale",
)
KIND_ALIASES = {"luby_one_round": "luby", "node-avg": "node_avg"}
GRAPH_FAMILIES = (
    "bipartite_regular",
    "general_regular",
    "cycle",
    "path",
    "complete",
    "complete_bipartite",
    "star",
    "petersen",
    "file",
)
TOP_KEYS = ("kind", "seed", "trials", "out", "workers", "min_pass")

SUBSTITUTION_NOTES = (
    "fractional hypergraph matching: sequential raise-and-freeze scheme with total weight at least "
    "nu/(f+1/2), standing in for the distributed black box",
    "node-averaged maximal matching: phase 2 repeats one-round Luby on the residual graph in place "
    "of a nearly-maximal independent set subroutine",
    "fast matcher: run outside the proven degree regime; results are empirical",
    "adversary trials test only this repository's algorithms and are one-sided evidence",
)


def _coerce(text: str):
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


@dataclass
class ExperimentConfig:
    kind: str
    seed: int
    trials: int = 1
    out: str = "results"
    workers: int = 1
    min_pass: int | None = None
    graph: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, data: dict) -> ExperimentConfig:
        """Build and validate a config from a flat or nested mapping.

        Raises:
            ConfigError: naming the offending field.
        """
        flat: dict = {}
        for key, val in data.items():
            if key in ("graph", "params") and isinstance(val, dict):
                prefix = "graph." if key == "graph" else ""
                for k2, v2 in val.items():
                    flat[prefix + k2] = v2
            else:
                flat[key] = val
        if "kind" not in flat:
            raise ConfigError("missing experiment kind", field="kind")
        if flat.get("seed") is None:
            raise ConfigError("a seed is required", field="seed")
        kind = KIND_ALIASES.get(str(flat["kind"]), str(flat["kind"]))
        if kind not in KINDS:
            raise ConfigError(f"unknown kind {flat['kind']!r}; expected one of {KINDS}", field="kind")
        graph = {k[6:]: v for k, v in flat.items() if k.startswith("graph.")}
        params = {k: v for k, v in flat.items() if k not in TOP_KEYS and not k.startswith("graph.")}
        cfg = cls(
            kind=kind,
            seed=_int(flat["seed"], "seed"),
            trials=_int(flat.get("trials", 1), "trials"),
            out=str(flat.get("out", "results")),
            workers=_int(flat.get("workers", 1), "workers"),
            min_pass=None if flat.get("min_pass") is None else _int(flat["min_pass"], "min_pass"),
            graph=graph,
            params=params,
        )
        cfg.check()
        return cfg

    @classmethod
    def from_text(cls, text: str) -> ExperimentConfig:
        """Parse key=value lines, or JSON when the text starts with ``{``."""
        return cls.from_mapping(parse_config_text(text))

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> ExperimentConfig:
        with open(path) as fh:
            return cls.from_text(fh.read())

    def check(self) -> None:
        if self.trials < 1:
            raise ConfigError("must be at least 1", field="trials")
        if self.workers < 1:
            raise ConfigError("must be at least 1", field="workers")
        if self.min_pass is not None and not 0 <= self.min_pass <= self.trials:
            raise ConfigError("must lie in [0, trials]", field="min_pass")
        fam = self.graph.get("family")
        if fam is not None and fam not in GRAPH_FAMILIES:
            raise ConfigError(f"unknown graph family {fam!r}", field="graph.family")
        for key in ("n", "delta", "a", "b"):
            if key in self.graph and (not isinstance(self.graph[key], int) or self.graph[key] < 0):
                raise ConfigError("must be a non-negative integer", field=f"graph.{key}")
        for key in ("eps", "inner_eps"):
            if key in self.params:
                v = self.params[key]
                if not isinstance(v, (int, float)) or not 0 < v < 1:
                    raise ConfigError("must lie in (0, 1)", field=key)
        for key in ("rounds", "samples", "budget", "c_prime", "path_cap", "max_phases", "r", "k", "rho", "t"):
            if key in self.params:
                v = self.params[key]
                if not isinstance(v, int) or v < 0:
                    raise ConfigError("must be a non-negative integer", field=key)

    def as_dict(self) -> dict:
        return asdict(self)


def parse_config_text(text: str) -> dict:
    """Raw mapping from key=value lines or a JSON object, without validation."""
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON config: {exc}", field=None) from exc
        if not isinstance(data, dict):
            raise ConfigError("JSON config must be an object", field=None)
        return data
    data = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}", field=None)
        key, val = line.split("=", 1)
        data[key.strip()] = _coerce(val)
    return data


def _int(val, name: str) -> int:
    if isinstance(val, bool) or not isinstance(val, (int, str)):
        raise ConfigError(f"must be an integer, got {val!r}", field=name)
    try:
        return int(val)
    except ValueError as exc:
        raise ConfigError(f"must be an integer, got {val!r}", field=name) from exc


# --- graphs ------------------------------------------------------------------


def build_graph(spec: dict, seed: int) -> Graph:
    """Materialize a graph spec.

    Raises:
        ConfigError: on a missing or unknown field.
    """
    fam = spec.get("family", "file" if "file" in spec else None)
    if fam is None:
        raise ConfigError("required", field="graph.family")

    def need(key):
        if key not in spec:
            raise ConfigError(f"required for family {fam}", field=f"graph.{key}")
        return spec[key]

    try:
        if fam == "bipartite_regular":
            return gen_regular_bipartite(need("n"), need("delta"), seed)
        if fam == "general_regular":
            return gen_regular_general(need("n"), need("delta"), seed)
        if fam == "cycle":
            return cycle_graph(need("n"))
        if fam == "path":
            return path_graph(need("n"))
        if fam == "complete":
            return complete_graph(need("n"))
        if fam == "complete_bipartite":
            return complete_bipartite(need("a"), need("b"))
        if fam == "star":
            return star_graph(need("n"))
        if fam == "petersen":
            return petersen_graph()
        if fam == "file":
            return read_edge_list(need("file"))
    except ConfigError:
        raise
    except (OSError, ValueError, RegMatchError) as exc:
        raise ConfigError(f"graph construction failed: {exc}", field="graph") from exc
    raise ConfigError(f"unknown graph family {fam!r}", field="graph.family")


# --- per-kind trial drivers --------------------------------------------------


def _trial(cfg: ExperimentConfig, t: int) -> list[dict]:
    """Run trial ``t`` and return its records (most kinds produce one)."""
    seed = split_seed(cfg.seed, t)
    gseed = split_seed(cfg.seed, t, STREAM_SAMPLE)
    p = cfg.params
    base = {"trial": t, "seed": seed}
    kind = cfg.kind

    if kind == "martingale":
        from .martingale import ProcessSpec, mc_martingale_check

        spec = ProcessSpec(p.get("process", "bernoulli"), t=p.get("t", 1000), M=float(p.get("M", 1.0)),
                           q=float(p.get("q", 1 / 6)))
        rep = mc_martingale_check(p.get("side", "upper"), spec, p.get("samples", 20000), seed)
        return [{**base, **row, "pass": not row["violation"]} for row in rep.rows]

    if kind == "lowerbound":
        from .lowerbound import _one_trial, build_instance

        family = p.get("family", "cycle")
        params = {key: p[key] for key in ("delta", "r", "k", "rho") if key in p}
        rec = _one_trial((family, params, p.get("algo", "luby_multi"), p.get("budget", 1), cfg.seed, t))
        if t == 0 and p.get("export", False):
            os.makedirs(cfg.out, exist_ok=True)
            build_instance(family, params, rec["instance_seed"]).export(os.path.join(cfg.out, f"{family}_0.edges"))
        rec = {k2: v for k2, v in rec.items() if k2 != "trial"}
        thr = float(p.get("threshold", 0.0))
        return [{**base, **rec, "pass": rec["failure_frequency"] >= thr}]

    g = build_graph(cfg.graph, gseed)
    n = g.node_count

    if kind == "generate":
        os.makedirs(cfg.out, exist_ok=True)
        path = os.path.join(cfg.out, f"graph_{t}.edges")
        write_edge_list(g, path)
        rep = validate(g)
        return [{**base, "file": path, "node_count": n, "edge_count": g.edge_count,
                 "is_regular": rep.is_regular, "is_bipartite": rep.is_bipartite, "pass": True}]

    if kind == "validate":
        rep = validate(g)
        d = rep.as_dict()
        d.pop("degree_histogram")
        return [{**base, **d, "pass": rep.is_regular}]

    if kind == "luby":
        from .luby import luby_round_distributed

        m = luby_round_distributed(g, p.get("c_prime", 2), seed)
        rec = {**base, "matching_size": m.size, "matched_fraction": 2 * m.size / n if n else 0.0}
        if g.edge_count <= 64:
            won = m.edge_set()
            for i, (a, b) in enumerate(g.edges.tolist()):
                rec[f"edge_{i}"] = int((a, b) in won)
        thr = p.get("min_matched_fraction")
        rec["pass"] = True if thr is None else rec["matched_fraction"] >= float(thr)
        return [rec]

    if kind == "tv":
        from .luby import tv_distance_estimate

        tv = tv_distance_estimate(g, p.get("samples", 100000), p.get("c_prime", 2), seed)
        thr = float(p.get("threshold", 0.02))
        return [{**base, "tv": float(tv), "pass": float(tv) <= thr}]

    if kind == "preservation":
        from .fast import preservation_run

        _m, snaps = preservation_run(g, p.get("rounds", 4), seed)
        out = []
        for s in snaps:
            d = s.as_dict()
            d["degree_histogram"] = json.dumps(d["degree_histogram"], sort_keys=True)
            out.append({**base, **d, "pass": True})
        return out

    if kind == "fast":
        from .fast import approx_match_fast

        eps = p.get("eps", 0.05)
        res = approx_match_fast(g, eps, seed, p.get("c_prime", 2))
        return [{**base, **res.as_dict(), "pass": res.unmatched_fraction <= eps}]

    if kind == "warmup":
        from .oracle import max_matching_bipartite
        from .warmup import warmup_full

        eps = p.get("eps", 0.45)
        inner = p.get("inner_eps", 0.3)
        rep = warmup_full(g, eps, seed, inner_eps=inner, path_cap=p.get("path_cap", 10**7),
                          max_phases=p.get("max_phases"))
        opt = max_matching_bipartite(g).size
        size = rep.matching.size
        return [{**base, **rep.inner.as_dict(), "opt": opt, "d": rep.d,
                 "pass": size >= opt - inner * n and not rep.inner.cap_triggered}]

    if kind == "node_avg":
        from .fast import maximal_match_node_avg

        res = maximal_match_node_avg(g, seed, p.get("c_prime", 2))
        return [{**base, **res.as_dict(), "pass": res.matching.is_maximal_in(g)}]

    raise ConfigError(f"unknown kind {kind!r}", field="kind")


def _run_one(args) -> list[dict]:
    cfg, t = args
    return _trial(cfg, t)


# --- reports -----------------------------------------------------------------


def aggregate(records: list[dict]) -> dict:
    """mean/std/min/max of every numeric column (bools excluded), plus pass counts."""
    out = {}
    keys = []
    for r in records:
        for k in r:
            if k not in keys:
                keys.append(k)
    for k in keys:
        if k in ("trial", "seed", "pass"):
            continue
        vals = [r[k] for r in records if k in r]
        if vals and all(isinstance(v, (int, float, Fraction)) and not isinstance(v, bool) for v in vals):
            arr = np.array([float(v) for v in vals])
            out[k] = {
                "mean": float(arr.mean()),
                "std": float(arr.std()),
                "min": float(arr.min()),
                "max": float(arr.max()),
            }
    out["pass_count"] = sum(bool(r.get("pass", True)) for r in records)
    out["records"] = len(records)
    return out


@dataclass
class ExperimentReport:
    config: dict
    records: list
    aggregates: dict
    passed: bool
    provenance: dict

    def as_dict(self) -> dict:
        return {
            "config": self.config,
            "aggregates": self.aggregates,
            "passed": self.passed,
            "provenance": self.provenance,
            "records": self.records,
        }

    def csv_text(self) -> str:
        keys = []
        for r in self.records:
            for k in r:
                if k not in keys:
                    keys.append(k)
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in self.records:
            w.writerow({k: _cell(r.get(k, "")) for k in keys})
        return buf.getvalue()


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Fraction):
        return str(v)
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def report_paths(cfg: ExperimentConfig) -> tuple[str, str]:
    stem = os.path.join(cfg.out, f"{cfg.kind}_seed{cfg.seed}")
    return stem + ".csv", stem + ".json"


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ExperimentReport:
    """Run every trial, aggregate, and persist CSV (records) and JSON (aggregates).

    Trials run on up to ``cfg.workers`` processes; records are merged in
    trial order so the output does not depend on scheduling.  ``passed``
    requires at least ``min_pass`` trials (default: all) to pass.
    """
    cfg.check()
    jobs = [(cfg, t) for t in range(cfg.trials)]
    if cfg.workers > 1 and cfg.trials > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(cfg.workers) as ex:
            chunks = list(ex.map(_run_one, jobs))
    else:
        chunks = [_run_one(j) for j in jobs]
    records = [_jsonable(r) for chunk in chunks for r in chunk]
    agg = aggregate(records)
    trial_pass = [all(bool(r.get("pass", True)) for r in chunk) for chunk in chunks]
    need = cfg.trials if cfg.min_pass is None else cfg.min_pass
    agg["trials_passed"] = int(sum(trial_pass))
    passed = sum(trial_pass) >= need
    prov = {"library": "regmatch", "version": VERSION, "substitutions": list(SUBSTITUTION_NOTES)}
    rep = ExperimentReport(_jsonable(cfg.as_dict()), records, agg, passed, prov)
    if write:
        os.makedirs(cfg.out, exist_ok=True)
        csv_path, json_path = report_paths(cfg)
        _atomic_write(csv_path, rep.csv_text())
        _atomic_write(json_path, json.dumps(_jsonable(rep.as_dict()), indent=1, sort_keys=True))
    return rep

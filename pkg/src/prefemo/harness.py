"""Batch experiment runner: scenario grids, replicated runs, metric
collection, statistics, and rank-matrix export.

An experiment is the cross product problems x algorithms x scenarios x
replications. Each run gets the seed base_seed + replicate index, executes
independently (embarrassingly parallel), and lands in an append-only result
store as one self-describing JSON file; completed keys are skipped on rerun,
so interrupted experiments resume for free. Wall-clock time never enters the
store, which keeps files byte-identical across repeats of the same config.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .algorithms import ALGORITHM_KINDS, AlgorithmSpec, PREFERENCE_KINDS, run
from .metrics import (
    MINIMIZED_METRICS,
    ep_accuracy,
    hypervolume,
    igd,
    r_hv,
    r_igd,
    rank_table,
    wilcoxon_signed_rank,
)
from .problems import (
    ProblemSpec,
    evaluate_batch,
    load_asset_history,
    make_spec,
    sample_true_front,
    synthetic_history,
)
from .scalarize import ReferencePoint, das_dennis, uniform_weights

SCHEMA_VERSION = 1
FRONT_SAMPLE_COUNT = 1000


class ExperimentError(ValueError):
    """Configuration problems; .errors carries the itemized list."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def _data() -> dict:
    with resources.files("prefemo.data").joinpath("scenarios.json").open("r") as fh:
        return json.load(fh)


@dataclass(frozen=True)
class Scenario:
    """One reference-point setting: a vector, a named placement resolved per
    problem, or a whole-front reference set."""

    name: str
    z: tuple | None = None
    placement: tuple | None = None  # (balanced|extreme, on_pf|infeasible|feasible)
    reference_set: dict | None = None  # {"H": int} or {"count": int}

    def __post_init__(self):
        provided = sum(x is not None for x in (self.z, self.placement, self.reference_set))
        if provided != 1:
            raise ValueError(f"scenario {self.name!r} needs exactly one of z/placement/reference_set")

    def resolve_points(self, problem: ProblemSpec, coordinates: dict) -> list[ReferencePoint]:
        if self.z is not None:
            return [ReferencePoint(np.array(self.z, dtype=float))]
        if self.placement is not None:
            table = coordinates.get(problem.instance_id, {})
            mode, place = self.placement
            try:
                z = table[mode][place]
            except KeyError:
                raise ExperimentError(
                    [f"no preset coordinates for {problem.instance_id} {mode}/{place}"]
                ) from None
            return [ReferencePoint(np.array(z, dtype=float))]
        if "H" in self.reference_set:
            vectors = das_dennis(problem.m, int(self.reference_set["H"])).vectors
        else:
            vectors = uniform_weights(problem.m, int(self.reference_set["count"])).vectors
        return [ReferencePoint(v) for v in vectors]

    @property
    def is_point(self) -> bool:
        return self.reference_set is None


@dataclass
class ExperimentConfig:
    problems: list[dict]
    algorithms: list[dict]
    scenarios: list[Scenario]
    budget: int
    replications: int = 31
    base_seed: int = 1
    delta_extent: float = 0.2
    output_dir: str = "prefemo-results"

    def seeds(self) -> list[int]:
        return [self.base_seed + k for k in range(self.replications)]


def problem_from_config(cfg: dict) -> ProblemSpec:
    family = cfg["family"].upper()
    if family.startswith("PORTFOLIO"):
        if "synthetic" in cfg:
            syn = cfg["synthetic"]
            hist = synthetic_history(
                n_assets=int(syn.get("assets", 58)),
                periods=int(syn.get("periods", 120)),
                seed=int(syn.get("seed", 2024)),
            )
        else:
            hist = load_asset_history(cfg["returns_csv"], cfg["turnovers_csv"])
        return make_spec(family, history=hist)
    return make_spec(family, m=cfg.get("m"), n=cfg.get("n"))


def scenario_from_config(cfg: dict) -> Scenario:
    return Scenario(
        name=cfg["name"],
        z=tuple(cfg["z"]) if "z" in cfg else None,
        placement=tuple(cfg["placement"]) if "placement" in cfg else None,
        reference_set=cfg.get("reference_set"),
    )


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Validate a raw config dict; raises ExperimentError with every problem found."""
    errors: list[str] = []
    problems = raw.get("problems") or []
    algorithms = raw.get("algorithms") or []
    scenarios_raw = raw.get("scenarios") or []
    if not problems:
        errors.append("no problems configured")
    if not algorithms:
        errors.append("no algorithms configured")
    if not scenarios_raw:
        errors.append("no scenarios configured")

    specs: list[ProblemSpec] = []
    for i, cfg in enumerate(problems):
        try:
            specs.append(problem_from_config(cfg))
        except Exception as exc:
            errors.append(f"problems[{i}]: {exc}")

    ids = []
    for i, cfg in enumerate(algorithms):
        kind = cfg.get("kind")
        if kind not in ALGORITHM_KINDS:
            errors.append(f"algorithms[{i}]: unknown kind {kind!r}")
            continue
        ids.append(cfg.get("id", kind))
        if int(cfg.get("population_size", 100)) < 2:
            errors.append(f"algorithms[{i}]: population_size must be >= 2")
    if len(set(ids)) != len(ids):
        errors.append("algorithm ids are not unique (set an explicit 'id' per entry)")

    scenarios: list[Scenario] = []
    for i, cfg in enumerate(scenarios_raw):
        try:
            scenarios.append(scenario_from_config(cfg))
        except Exception as exc:
            errors.append(f"scenarios[{i}]: {exc}")

    replications = int(raw.get("replications", 31))
    if replications < 1:
        errors.append("replications must be >= 1")
    budget = int(raw.get("budget", 0))
    for i, cfg in enumerate(algorithms):
        if budget < int(cfg.get("population_size", 100)):
            errors.append(f"budget {budget} cannot cover algorithms[{i}] population")
            break

    coordinates = _data()["scenario_coordinates"]
    for spec in specs:
        for sc in scenarios:
            if sc.z is not None and len(sc.z) != spec.m:
                errors.append(
                    f"scenario {sc.name!r} dimension {len(sc.z)} != {spec.instance_id} m={spec.m}"
                )
            if sc.placement is not None and spec.instance_id not in coordinates:
                errors.append(f"no preset coordinates for {spec.instance_id}")

    if errors:
        raise ExperimentError(errors)
    return ExperimentConfig(
        problems=list(problems),
        algorithms=list(algorithms),
        scenarios=scenarios,
        budget=budget,
        replications=replications,
        base_seed=int(raw.get("base_seed", 1)),
        delta_extent=float(raw.get("delta_extent", 0.2)),
        output_dir=raw.get("output_dir", "prefemo-results"),
    )


# ---------------------------------------------------------------------- store


class ResultStore:
    """Append-only directory of per-run JSON records, keyed by
    (problem, algorithm, scenario, seed)."""

    def __init__(self, root: str):
        self.root = root
        self.runs_dir = os.path.join(root, "runs")
        os.makedirs(self.runs_dir, exist_ok=True)

    @staticmethod
    def key(problem_id: str, algo_id: str, scenario: str, seed: int) -> str:
        return f"{problem_id}__{algo_id}__{scenario}__s{seed}"

    def path(self, key: str) -> str:
        return os.path.join(self.runs_dir, key + ".json")

    def has(self, key: str) -> bool:
        return os.path.exists(self.path(key))

    def write(self, key: str, record: dict) -> None:
        tmp = self.path(key) + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(record, fh, sort_keys=True, indent=0)
        os.replace(tmp, self.path(key))

    def read(self, key: str) -> dict:
        with open(self.path(key), encoding="utf-8") as fh:
            return json.load(fh)

    def keys(self) -> list[str]:
        return sorted(
            name[: -len(".json")]
            for name in os.listdir(self.runs_dir)
            if name.endswith(".json")
        )

    def records(self) -> list[dict]:
        return [self.read(k) for k in self.keys()]

    def write_config(self, raw_config: dict) -> None:
        path = os.path.join(self.root, "config.json")
        payload = {"schema_version": SCHEMA_VERSION, "config": raw_config}
        if os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                existing = json.load(fh)
            if existing != payload:
                raise ExperimentError(
                    ["store already holds a different config; use a fresh output_dir"]
                )
            return
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=1)


# ------------------------------------------------------------------- metrics


def instance_reference(problem: ProblemSpec, front_samples: np.ndarray | None) -> np.ndarray:
    """Shared worst-corner point for one problem instance.

    Analytic fronts: the sampled front's nadir plus a 10% margin. Portfolio
    instances: the per-objective worst over the single-asset and uniform
    allocations, same margin; deterministic given the asset history.
    """
    if front_samples is not None:
        basis = front_samples
    else:
        n = problem.n
        X = np.vstack([np.eye(n), np.full((1, n), 1.0 / n)])
        basis = evaluate_batch(problem, X)
    lo = basis.min(axis=0)
    hi = basis.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return hi + 0.1 * span


def compute_run_metrics(
    problem: ProblemSpec,
    scenario: Scenario,
    refs: list[ReferencePoint],
    F: np.ndarray,
    seed: int,
    delta_extent: float,
) -> list[dict]:
    samples = (
        sample_true_front(problem, FRONT_SAMPLE_COUNT) if problem.has_analytic_front else None
    )
    worst = instance_reference(problem, samples)
    out: list[dict] = []

    def add(metric: str, value: float, **extra):
        out.append({"metric": metric, "value": float(value), "extra": extra})

    hv_kwargs = {"mc_samples": 100_000, "mc_seed": seed}
    mc = problem.m > 4
    if scenario.is_point:
        zr = refs[0]
        add("EP", ep_accuracy(F, zr))
        add("R_HV", r_hv(F, zr, delta_extent, worst, **hv_kwargs),
            delta_extent=delta_extent, **({"mc_seed": seed} if mc else {}))
        if samples is not None:
            add("R_IGD", r_igd(F, zr, delta_extent, samples, worst), delta_extent=delta_extent)
    if samples is not None:
        add("IGD", igd(F, samples))
        # whole-front mode beyond 4 objectives sticks to IGD; the
        # hypervolume cost grows too fast even under Monte Carlo
        if problem.m <= 4:
            add("HV", hypervolume(F, worst))
    return out


def execute_cell(cell: dict) -> dict:
    """Run one (problem, algorithm, scenario, seed) cell to a record dict."""
    problem = problem_from_config(cell["problem"])
    scenario = scenario_from_config(cell["scenario"])
    coordinates = cell.get("coordinates") or {}
    algo_cfg = dict(cell["algorithm"])
    algo_cfg.pop("id", None)
    kind = algo_cfg["kind"]
    refs = scenario.resolve_points(problem, coordinates)
    try:
        spec = AlgorithmSpec(
            reference_points=tuple(refs) if kind in PREFERENCE_KINDS else (),
            **algo_cfg,
        )
        result = run(spec, problem, cell["budget"], cell["seed"])
        F = result.final_population.objectives()
        metrics = compute_run_metrics(
            problem, scenario, refs, F, cell["seed"], cell["delta_extent"]
        )
        return {
            "schema_version": SCHEMA_VERSION,
            "key": cell["key"],
            "cell": {
                "problem": cell["problem"],
                "algorithm": cell["algorithm"],
                "scenario": cell["scenario"],
                "seed": cell["seed"],
                "budget": cell["budget"],
                "delta_extent": cell["delta_extent"],
            },
            "status": "ok",
            "generations": result.records[-1].generation,
            "evaluations": result.records[-1].evaluations,
            "final_objectives": F.tolist(),
            "metrics": metrics,
        }
    except Exception as exc:  # record the failure, keep the experiment going
        return {
            "schema_version": SCHEMA_VERSION,
            "key": cell["key"],
            "cell": {
                "problem": cell["problem"],
                "algorithm": cell["algorithm"],
                "scenario": cell["scenario"],
                "seed": cell["seed"],
                "budget": cell["budget"],
                "delta_extent": cell["delta_extent"],
            },
            "status": "failed",
            "error": f"{type(exc).__name__}: {exc}",
            "metrics": [],
        }


def run_experiment(raw_config: dict, jobs: int = 1, progress=None) -> tuple[ResultStore, int]:
    """Execute every missing cell of the experiment.

    Returns the store and the number of failed runs. Completed keys are
    skipped, so a rerun over an existing store only fills gaps.
    """
    config = config_from_dict(raw_config)
    store = ResultStore(config.output_dir)
    store.write_config(raw_config)
    coordinates = _data()["scenario_coordinates"]

    cells = []
    for prob_cfg in config.problems:
        problem = problem_from_config(prob_cfg)
        for algo_cfg in config.algorithms:
            algo_id = algo_cfg.get("id", algo_cfg["kind"])
            for sc in config.scenarios:
                sc_cfg = {"name": sc.name}
                if sc.z is not None:
                    sc_cfg["z"] = list(sc.z)
                if sc.placement is not None:
                    sc_cfg["placement"] = list(sc.placement)
                if sc.reference_set is not None:
                    sc_cfg["reference_set"] = sc.reference_set
                for seed in config.seeds():
                    key = ResultStore.key(problem.instance_id, algo_id, sc.name, seed)
                    if store.has(key):
                        continue
                    cells.append(
                        {
                            "key": key,
                            "problem": prob_cfg,
                            "algorithm": algo_cfg,
                            "scenario": sc_cfg,
                            "seed": seed,
                            "budget": config.budget,
                            "delta_extent": config.delta_extent,
                            "coordinates": coordinates,
                        }
                    )

    failures = 0
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for record in pool.map(execute_cell, cells):
                store.write(record["key"], record)
                failures += record["status"] != "ok"
                if progress:
                    progress(record)
    else:
        for cell in cells:
            record = execute_cell(cell)
            store.write(record["key"], record)
            failures += record["status"] != "ok"
            if progress:
                progress(record)
    return store, failures


# ----------------------------------------------------------------- analysis


def _collect(store: ResultStore) -> dict:
    """records grouped[(problem, scenario, metric)][algorithm] = {seed: value}"""
    grouped: dict = {}
    failed: dict = {}
    for rec in store.records():
        cell = rec["cell"]
        problem_id = problem_from_config(cell["problem"]).instance_id
        algo_id = cell["algorithm"].get("id", cell["algorithm"]["kind"])
        scenario = cell["scenario"]["name"]
        seed = cell["seed"]
        if rec["status"] != "ok":
            failed.setdefault((problem_id, scenario), {}).setdefault(algo_id, 0)
            failed[(problem_id, scenario)][algo_id] += 1
            continue
        for m in rec["metrics"]:
            grouped.setdefault((problem_id, scenario, m["metric"]), {}).setdefault(
                algo_id, {}
            )[seed] = m["value"]
    return {"grouped": grouped, "failed": failed}


def summarize(store: ResultStore, metric: str | None = None, alpha: float = 0.05) -> dict:
    """Per-cell medians, interquartile ranges, best flags, and significance.

    The best algorithm per (problem, scenario, metric) is the best median;
    every other algorithm is tested against it with the two-sided Wilcoxon
    signed-rank test over seed-paired values.
    """
    data = _collect(store)
    cells = []
    for (problem_id, scenario, metric_id), per_algo in sorted(data["grouped"].items()):
        if metric is not None and metric_id != metric:
            continue
        minimize = metric_id in MINIMIZED_METRICS
        stats = {}
        for algo_id, by_seed in sorted(per_algo.items()):
            values = np.array([by_seed[s] for s in sorted(by_seed)])
            # infinite sentinels (degenerate region scores) propagate to a
            # None median/iqr below; the interpolation warning is expected
            with np.errstate(invalid="ignore"):
                med = float(np.median(values))
                q1, q3 = np.percentile(values, [25, 75])
            stats[algo_id] = {
                "median": med if math.isfinite(med) else None,
                "iqr": float(q3 - q1) if math.isfinite(q3 - q1) else None,
                "runs": int(values.size),
                "failed": data["failed"].get((problem_id, scenario), {}).get(algo_id, 0),
                "degenerate": int(np.sum(~np.isfinite(values))),
            }
        scored = {
            a: s["median"] for a, s in stats.items() if s["median"] is not None
        }
        if not scored:
            continue
        best = min(scored, key=lambda a: scored[a] if minimize else -scored[a])
        significance = {}
        best_by_seed = per_algo[best]
        for algo_id, by_seed in per_algo.items():
            if algo_id == best:
                continue
            shared = sorted(set(by_seed) & set(best_by_seed))
            pair_a = [by_seed[s] for s in shared]
            pair_b = [best_by_seed[s] for s in shared]
            finite = [
                (x, y) for x, y in zip(pair_a, pair_b) if math.isfinite(x) and math.isfinite(y)
            ]
            if len(finite) >= 2:
                outcome = wilcoxon_signed_rank(
                    [x for x, _ in finite], [y for _, y in finite], alpha=alpha
                )
                significance[algo_id] = {
                    "p_value": outcome.p_value,
                    "significant": outcome.significant,
                    "n": outcome.n_effective,
                }
        cells.append(
            {
                "problem": problem_id,
                "scenario": scenario,
                "metric": metric_id,
                "algorithms": stats,
                "best": best,
                "significance_vs_best": significance,
            }
        )
    return {
        "schema_version": SCHEMA_VERSION,
        "iqr_convention": "linear-interpolation percentiles, Q3 minus Q1",
        "alpha": alpha,
        "cells": cells,
        "incomplete": _missing_cells(store),
    }


def _missing_cells(store: ResultStore) -> list[str]:
    """Expected-but-absent run keys, judged against the store's config."""
    config_path = os.path.join(store.root, "config.json")
    if not os.path.exists(config_path):
        return []
    with open(config_path, encoding="utf-8") as fh:
        raw = json.load(fh)["config"]
    have = set(store.keys())
    missing = []
    seeds = [int(raw.get("base_seed", 1)) + k for k in range(int(raw.get("replications", 31)))]
    for p in raw.get("problems", []):
        problem_id = problem_from_config(p).instance_id
        for a in raw.get("algorithms", []):
            algo_id = a.get("id", a["kind"])
            for s in raw.get("scenarios", []):
                for seed in seeds:
                    key = ResultStore.key(problem_id, algo_id, s["name"], seed)
                    if key not in have:
                        missing.append(key)
    return missing


def export_heatmap(store: ResultStore, metric: str, out_base: str) -> dict:
    """Write the instance-by-algorithm rank matrix and rank-frequency counts.

    Emits <out_base>_ranks.csv, <out_base>_rankfreq.csv, and <out_base>.json.
    Raises ExperimentError listing the gaps if the matrix is incomplete.
    """
    data = _collect(store)
    instances = sorted({(p, s) for (p, s, m) in data["grouped"] if m == metric})
    algorithms = {
        a for key, per in data["grouped"].items() if key[2] == metric for a in per
    }
    # The store config names the full algorithm roster; observed records
    # alone would silently shrink the matrix when an algorithm's runs are
    # missing entirely. Instances stay observation-driven because a metric
    # may be legitimately inapplicable to some (no analytic front, say).
    config_path = os.path.join(store.root, "config.json")
    if os.path.exists(config_path):
        with open(config_path, encoding="utf-8") as fh:
            raw = json.load(fh)["config"]
        algorithms |= {a.get("id", a["kind"]) for a in raw.get("algorithms", [])}
    algorithms = sorted(algorithms)
    if not instances:
        raise ExperimentError([f"no records for metric {metric!r}"])
    gaps = []
    medians = np.zeros((len(algorithms), len(instances)))
    for j, (p, s) in enumerate(instances):
        per = data["grouped"].get((p, s, metric), {})
        for i, a in enumerate(algorithms):
            if a not in per or not per[a]:
                gaps.append(f"{p}/{s} missing {a}")
                continue
            medians[i, j] = np.median(list(per[a].values()))
    if gaps:
        raise ExperimentError(["incomplete matrix"] + gaps)
    ranks = rank_table(medians, minimize=metric in MINIMIZED_METRICS)
    max_rank = len(algorithms)
    freq = np.zeros((len(algorithms), max_rank), dtype=int)
    for i in range(len(algorithms)):
        for j in range(len(instances)):
            freq[i, ranks[i, j] - 1] += 1

    instance_labels = [f"{p}/{s}" for p, s in instances]
    with open(out_base + "_ranks.csv", "w", encoding="utf-8") as fh:
        fh.write("algorithm," + ",".join(instance_labels) + "\n")
        for i, a in enumerate(algorithms):
            fh.write(a + "," + ",".join(str(r) for r in ranks[i]) + "\n")
    with open(out_base + "_rankfreq.csv", "w", encoding="utf-8") as fh:
        fh.write("algorithm," + ",".join(f"rank{r}" for r in range(1, max_rank + 1)) + "\n")
        for i, a in enumerate(algorithms):
            fh.write(a + "," + ",".join(str(c) for c in freq[i]) + "\n")
    payload = {
        "schema_version": SCHEMA_VERSION,
        "metric": metric,
        "algorithms": algorithms,
        "instances": instance_labels,
        "ranks": ranks.tolist(),
        "rank_frequency": freq.tolist(),
    }
    with open(out_base + ".json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
    return payload


# ------------------------------------------------------------------ presets


def scenario_presets() -> dict:
    """Named experiment fragments shipped as versioned data."""
    return _data()["presets"]


def session_presets() -> dict:
    """Named interactive-session presets (see prefemo.steer)."""
    return _data()["sessions"]


def preset_config(name: str, output_dir: str | None = None) -> dict:
    """Materialize a named preset into a runnable experiment config."""
    presets = scenario_presets()
    if name not in presets:
        raise ExperimentError(
            [f"unknown preset {name!r}; available: {', '.join(sorted(presets))}"]
        )
    raw = json.loads(json.dumps(presets[name]))  # deep copy
    raw.pop("description", None)
    if raw.get("scenarios") == "coordinates":
        raw["scenarios"] = [
            {"name": f"{mode}-{place}", "placement": [mode, place]}
            for mode in ("balanced", "extreme")
            for place in ("on_pf", "infeasible", "feasible")
        ]
    raw["output_dir"] = output_dir or os.path.join("prefemo-results", name)
    return raw

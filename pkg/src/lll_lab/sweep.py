"""Parameter sweeps: vary one knob, run seeded experiments, emit CSV rows.

Column schema (stable, golden-tested):
  param, T_mean, node_avg, worst_case, insecure_frac, max_component,
  probes_p50, probes_max, e_good_rate

Seeds are dispatched to a small worker pool (LLL_LAB_THREADS caps it) and
results are merged in seed order, so output bytes depend only on the config.
"""

from __future__ import annotations

import csv
import io
import math
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .classify import insecure_subgraph
from .errors import ValidationError
from .generators import gen_ksat
from .instance import LLLInstance
from .lca import LcaSession, structural_probe_bound
from .localsim import run_meta

SWEEP_COLUMNS = ("param", "T_mean", "node_avg", "worst_case", "insecure_frac",
                 "max_component", "probes_p50", "probes_max", "e_good_rate")

SWEEP_PARAMS = ("p", "n", "d", "seeds")


@dataclass
class SweepConfig:
    param: str
    values: list[float]
    seeds: list[int] = field(default_factory=lambda: list(range(10)))
    num_clauses: int = 2000
    k: int = 10
    max_occurrence: int = 2
    instance_seed: int = 1
    query_samples: int = 20


def worker_count() -> int:
    raw = os.environ.get("LLL_LAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_seeds(fn, seeds):
    workers = worker_count()
    if workers == 1:
        return [fn(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seeds))


def _instance_for(config: SweepConfig, value: float, index: int) -> tuple[LLLInstance, list[int]]:
    seeds = config.seeds
    num_clauses, k, occ = config.num_clauses, config.k, config.max_occurrence
    if config.param == "p":
        k = _k_from_p(value)
    elif config.param == "n":
        num_clauses = int(value)
    elif config.param == "d":
        occ = int(value)
    elif config.param == "seeds":
        seeds = list(range(int(value)))
    else:
        raise ValidationError(f"unknown sweep parameter {config.param!r}")
    instance = gen_ksat(num_clauses, k, occ, config.instance_seed + index)
    return instance, seeds


def _k_from_p(p: float) -> int:
    if not (0.0 < p < 1.0):
        raise ValidationError("swept p must lie in (0, 1)")
    k = round(math.log2(1.0 / p))
    if abs(2.0 ** -k - p) > 1e-9:
        raise ValidationError("swept p must be a power of two for the k-SAT profile")
    return max(2, k)


@dataclass
class SeedOutcome:
    T: int
    node_avg: float
    worst: int
    insecure_frac: float
    max_component: int
    e_good: bool
    terminated: bool
    probes: list[int]


def _run_one(instance: LLLInstance, seed: int, query_samples: int) -> SeedOutcome:
    _values, report = run_meta(instance, seed)
    sub = insecure_subgraph(instance, report.classification)
    session = LcaSession(instance, seed, params=report.params)
    rng = random.Random(seed * 7919 + 17)
    nodes = sorted(rng.sample(range(instance.n), min(query_samples, instance.n)))
    probes = []
    for v in nodes:
        _vals, stats = session.query(v)
        bound = structural_probe_bound(instance, report.params, stats.explored)
        if stats.probes > bound:
            raise AssertionError(
                f"probe count {stats.probes} exceeds structural bound {bound}")
        probes.append(stats.probes)
    return SeedOutcome(
        T=report.T_global,
        node_avg=report.node_averaged,
        worst=report.worst_case,
        insecure_frac=report.insecure_fraction,
        max_component=sub.max_component_size(),
        e_good=report.e_good,
        terminated=report.terminated,
        probes=probes,
    )


def run_sweep(config: SweepConfig) -> tuple[list[dict], bool]:
    """Returns (rows, non_termination_flag)."""
    if config.param not in SWEEP_PARAMS:
        raise ValidationError(f"sweep parameter must be one of {SWEEP_PARAMS}")
    if not config.values:
        raise ValidationError("sweep needs at least one value")
    rows = []
    non_term = False
    for index, value in enumerate(config.values):
        instance, seeds = _instance_for(config, value, index)
        outcomes = _map_seeds(
            lambda s, inst=instance: _run_one(inst, s, config.query_samples), seeds)
        non_term = non_term or any(not o.terminated for o in outcomes)
        all_probes = sorted(p for o in outcomes for p in o.probes)
        rows.append({
            "param": value,
            "T_mean": sum(o.T for o in outcomes) / len(outcomes),
            "node_avg": sum(o.node_avg for o in outcomes) / len(outcomes),
            "worst_case": max(o.worst for o in outcomes),
            "insecure_frac": sum(o.insecure_frac for o in outcomes) / len(outcomes),
            "max_component": max(o.max_component for o in outcomes),
            "probes_p50": all_probes[len(all_probes) // 2] if all_probes else 0,
            "probes_max": all_probes[-1] if all_probes else 0,
            "e_good_rate": sum(1 for o in outcomes if o.e_good) / len(outcomes),
        })
    return rows, non_term


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, quoting=csv.QUOTE_MINIMAL,
                            lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()

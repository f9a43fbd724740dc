"""Meta-algorithm in the LOCAL model with per-node round accounting.

Phase 1 runs the resampler globally for phase1_steps; risky and insecure
nodes are classified from that prefix.  Secure nodes terminate with their
phase-1 values, charged the classification radius plus two rounds per
simulated step.  Phase 2 continues the resampler restricted to risky nodes.
If any non-risky event is satisfied after phase 1 the restricted run can
diverge from the global one, so the run is marked fallback and the global
output is emitted; otherwise the restricted continuation reproduces the
global run exactly and the outputs agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

from .classify import Classification, NarrowParams, classify_risky, derive_params
from .instance import LLLInstance
from .randomness import RandomnessTable, sample_table
from .resampler import ExecutionLog, replay_indices, run_cps
from .witness import e_good_holds


@dataclass
class LocalRunReport:
    rounds: list[int]                  # per-node termination round
    node_averaged: float
    worst_case: int
    phase1_steps: int
    secure_round: int
    insecure_fraction: float
    e_good: bool
    fallback_used: bool
    terminated: bool
    T_global: int
    params: NarrowParams
    classification: Classification

    def round_histogram(self) -> list[tuple[int, int]]:
        counts: dict[int, int] = {}
        for r in self.rounds:
            counts[r] = counts.get(r, 0) + 1
        return sorted(counts.items())


def node_averaged(report: LocalRunReport) -> float:
    """Arithmetic mean of per-node termination rounds (64-bit float)."""
    return sum(report.rounds) / len(report.rounds)


def _restricted_continuation(instance: LLLInstance, table: RandomnessTable,
                             log: ExecutionLog, phase1: int, risky: frozenset[int],
                             max_steps: int):
    """Resume from the phase-1 state, resampling risky events only.

    Returns (steps, final_indices, clean) where clean is False iff some
    non-risky event was satisfied at a step past phase 1.
    """
    graph = instance.graph
    indices = replay_indices(log, min(phase1, log.total_steps))
    satisfied = set()
    for ev in instance.events:
        values = tuple(table.value(v, indices[v]) for v in ev.vars)
        if ev.holds(values):
            satisfied.add(ev.id)
    steps: list[frozenset[int]] = []
    clean = True
    while len(steps) < max_steps:
        if any(e not in risky for e in satisfied):
            clean = False
        sat_risky = satisfied & risky
        if not sat_risky:
            break
        chosen = [e for e in sat_risky
                  if not any(u in sat_risky and u < e for u in graph.adjacency[e])]
        touched: set[int] = set()
        for e in chosen:
            touched.update(instance.events[e].vars)
        for v in touched:
            indices[v] += 1
        steps.append(frozenset(chosen))
        affected = set(chosen)
        for e in chosen:
            affected.update(graph.adjacency[e])
        for e in affected:
            values = tuple(table.value(v, indices[v]) for v in instance.events[e].vars)
            if instance.events[e].holds(values):
                satisfied.add(e)
            else:
                satisfied.discard(e)
    if satisfied:
        clean = clean and not (satisfied - risky)
    return steps, indices, clean


def run_meta(instance: LLLInstance, seed: int,
             params: NarrowParams | None = None,
             max_steps: int | None = None) -> tuple[list[int], LocalRunReport]:
    """Run the meta-algorithm; returns (final values, report)."""
    table = sample_table(instance, seed)
    log, global_values = run_cps(instance, table, max_steps)
    if params is None:
        params = derive_params(instance)
    phase1 = params.phase1_steps
    prefix = log.truncated(min(phase1, log.total_steps))
    classification = classify_risky(instance, prefix, params)
    e_good = e_good_holds(log)

    cap = max(64, 4 * max(log.total_steps, phase1))
    steps2, indices2, clean = _restricted_continuation(
        instance, table, log, phase1, classification.risky, cap)
    restricted_values = [table.value(v, indices2[v]) for v in range(instance.num_vars)]

    fallback = (not clean) or (restricted_values != global_values) or not log.terminated
    values = global_values  # equal to the restricted output in non-fallback runs

    secure_round = (2 * params.R_max + 2) + 2 * phase1
    rounds = [secure_round] * instance.n
    if fallback:
        extra = 2 * max(0, log.total_steps - phase1)
        rounds = [secure_round + extra] * instance.n
    else:
        last_near: dict[int, int] = {}
        for k, step in enumerate(steps2, start=1):
            for e in step:
                last_near[e] = k
                for u in instance.graph.adjacency[e]:
                    last_near[u] = k
        for u in classification.insecure:
            rounds[u] = secure_round + 2 * last_near.get(u, 0)

    report = LocalRunReport(
        rounds=rounds,
        node_averaged=sum(rounds) / len(rounds),
        worst_case=max(rounds),
        phase1_steps=phase1,
        secure_round=secure_round,
        insecure_fraction=len(classification.insecure) / instance.n,
        e_good=e_good,
        fallback_used=fallback,
        terminated=log.terminated,
        T_global=log.total_steps,
        params=params,
        classification=classification,
    )
    return values, report

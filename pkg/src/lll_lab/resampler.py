"""The resampling algorithm: while satisfied bad events remain, resample the
dependent variables of those with locally minimal IDs.

A run is fully determined by (instance, seed): the randomness table fixes
every value each variable will ever take, and the selection rule is
deterministic.  The execution log records the independent sets S_1..S_T of
events resampled per step.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field

from .errors import ValidationError
from .instance import DependencyGraph, LLLInstance
from .randomness import RandomnessTable


@dataclass
class AssignmentView:
    """Current table index per variable; value of x is x_{index[x]}."""

    indices: list[int]

    def current_value(self, table: RandomnessTable, var_id: int) -> int:
        return table.value(var_id, self.indices[var_id])


@dataclass
class ExecutionLog:
    """Sequence S_1..S_T plus per-step resampled variable sets.

    Keeps references to the instance and graph so tree extraction and index
    queries need no extra arguments.
    """

    instance: LLLInstance
    steps: list[frozenset[int]]
    step_vars: list[frozenset[int]]
    terminated: bool
    resample_counts: dict[int, int] = field(default_factory=dict)

    @property
    def graph(self) -> DependencyGraph:
        return self.instance.graph

    @property
    def total_steps(self) -> int:
        return len(self.steps)

    def resample_total(self) -> int:
        return sum(len(s) for s in self.steps)

    def truncated(self, t_max: int) -> "ExecutionLog":
        """Prefix S_1..S_{t_max} (still a valid log of a partial run)."""
        steps = self.steps[:t_max]
        step_vars = self.step_vars[:t_max]
        counts: dict[int, int] = {}
        for vs in step_vars:
            for v in vs:
                counts[v] = counts.get(v, 0) + 1
        return ExecutionLog(self.instance, steps, step_vars,
                            terminated=False, resample_counts=counts)


def _eval_at(instance: LLLInstance, table: RandomnessTable,
             indices: list[int], event_id: int) -> bool:
    ev = instance.events[event_id]
    values = tuple(table.value(v, indices[v]) for v in ev.vars)
    return ev.holds(values)


def satisfied_events(instance: LLLInstance, view: AssignmentView,
                     table: RandomnessTable) -> set[int]:
    """From-scratch evaluation of every event under the current assignment."""
    return {e.id for e in instance.events
            if _eval_at(instance, table, view.indices, e.id)}


def locally_minimal(satisfied: set[int], graph: DependencyGraph) -> set[int]:
    """Members of `satisfied` with no satisfied neighbor of smaller ID."""
    out = set()
    for v in satisfied:
        if not any(u in satisfied and u < v for u in graph.adjacency[v]):
            out.add(v)
    return out


def default_max_steps(instance: LLLInstance) -> int:
    return max(64, math.ceil(50 * instance.log1p_n()))


def run_cps(instance: LLLInstance, table: RandomnessTable,
            max_steps: int | None = None) -> tuple[ExecutionLog, list[int]]:
    """Run the resampler to quiescence (or max_steps); returns (log, values).

    The satisfied set is maintained incrementally: after a step only events
    adjacent to a resampled event are re-evaluated.  Non-termination within
    max_steps is flagged on the log, not raised.
    """
    if max_steps is None:
        max_steps = default_max_steps(instance)
    if max_steps < 1:
        raise ValidationError("max_steps must be >= 1")
    graph = instance.graph
    indices = [0] * instance.num_vars
    satisfied = {e.id for e in instance.events
                 if _eval_at(instance, table, indices, e.id)}
    steps: list[frozenset[int]] = []
    step_vars: list[frozenset[int]] = []
    counts: dict[int, int] = {}
    while satisfied and len(steps) < max_steps:
        chosen = locally_minimal(satisfied, graph)
        resampled_vars: set[int] = set()
        for e in chosen:
            resampled_vars.update(instance.events[e].vars)
        for v in resampled_vars:
            indices[v] += 1
            counts[v] = counts.get(v, 0) + 1
        steps.append(frozenset(chosen))
        step_vars.append(frozenset(resampled_vars))
        affected = set(chosen)
        for e in chosen:
            affected.update(graph.adjacency[e])
        for e in affected:
            if _eval_at(instance, table, indices, e):
                satisfied.add(e)
            else:
                satisfied.discard(e)
    log = ExecutionLog(instance, steps, step_vars,
                       terminated=not satisfied, resample_counts=counts)
    values = [table.value(v, indices[v]) for v in range(instance.num_vars)]
    return log, values


def value_index_at(log: ExecutionLog, var_id: int, t: int) -> int:
    """Number of steps s <= t whose resampled set touches var_id."""
    if not (0 <= t <= log.total_steps):
        raise ValidationError(f"step {t} outside 0..{log.total_steps}")
    return sum(1 for vs in log.step_vars[:t] if var_id in vs)


def replay_indices(log: ExecutionLog, t: int) -> list[int]:
    """Per-variable table indices current after step t (0 = initial state)."""
    indices = [0] * log.instance.num_vars
    for vs in log.step_vars[:t]:
        for v in vs:
            indices[v] += 1
    return indices


def assignment_digest(values: list[int]) -> str:
    """64-bit hash of a final assignment for cross-run equality checks."""
    h = hashlib.blake2b(digest_size=8)
    for v in values:
        h.update(struct.pack("<q", v))
    return h.hexdigest()


def run_report(log: ExecutionLog, values: list[int], seed: int) -> dict:
    return {
        "seed": seed,
        "T": log.total_steps,
        "terminated": log.terminated,
        "resample_total": log.resample_total(),
        "per_step_sizes": [len(s) for s in log.steps],
        "final_assignment_digest": assignment_digest(values),
    }

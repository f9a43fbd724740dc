"""Staggered local simulation of the resampler on a probed region.

A node at graph distance i from the anchor set is simulated for resampling
steps t <= horizon0 - floor(i/2).  This schedule guarantees that whenever a
node simulates step t, every node within distance 2 of it has simulated step
t-1, so locally computed steps coincide with the global run's steps for all
nodes inside their horizons.  The soundness condition is asserted on every
simulated step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .instance import LLLInstance
from .randomness import RandomnessTable


@dataclass
class StaggeredState:
    steps: list[frozenset[int]]             # S_t for t = 1..len(steps); may contain empty sets
    step_vars: list[frozenset[int]]
    indices: dict[int, int]                 # sparse per-variable table index
    satisfied: set[int]
    horizons: dict[int, int]
    quiesced: bool
    phase2_steps: int = 0
    fallback_signal: bool = field(default=False)

    def current_value(self, table: RandomnessTable, var: int) -> int:
        return table.value(var, self.indices.get(var, 0))


def _eval_local(instance: LLLInstance, table: RandomnessTable,
                indices: dict[int, int], event_id: int) -> bool:
    ev = instance.events[event_id]
    values = tuple(table.value(v, indices.get(v, 0)) for v in ev.vars)
    return ev.holds(values)


class ScheduleViolation(RuntimeError):
    """A simulated step lacked a distance-2 neighbor's previous step."""


def staggered_phase1(instance: LLLInstance, table: RandomnessTable,
                     region_dists: dict[int, int], horizon0: int,
                     initial_satisfied=None) -> StaggeredState:
    """Simulate steps 1..horizon0 on the region under the staggered schedule.

    `initial_satisfied` may carry the precomputed set of events satisfied
    under the all-x_0 assignment; region events are intersected with it.
    """
    graph = instance.graph
    horizons = {e: horizon0 - (dist // 2) for e, dist in region_dists.items()}
    indices: dict[int, int] = {}
    if initial_satisfied is not None:
        satisfied = {e for e in initial_satisfied if e in region_dists}
    else:
        satisfied = {e for e in region_dists
                     if _eval_local(instance, table, indices, e)}
    steps: list[frozenset[int]] = []
    step_vars: list[frozenset[int]] = []
    quiesced = not satisfied
    for t in range(1, horizon0 + 1):
        if not satisfied:
            quiesced = True
            break
        active = [e for e in satisfied if horizons[e] >= t]
        if not active:
            break  # all remaining satisfied events are frozen by the schedule
        chosen = []
        for e in active:
            if not any(u in satisfied and u < e for u in graph.adjacency[e]):
                chosen.append(e)
        _assert_schedule(graph, horizons, chosen, t)
        if chosen:
            _apply_step(instance, table, indices, satisfied, chosen, region_dists)
        steps.append(frozenset(chosen))
        step_vars.append(frozenset(v for e in chosen
                                   for v in instance.events[e].vars))
    return StaggeredState(steps, step_vars, indices, satisfied, horizons,
                          quiesced=quiesced or not satisfied)


def _assert_schedule(graph, horizons: dict[int, int], chosen, t: int) -> None:
    for e in chosen:
        for w in (e, *graph.adjacency[e], *graph.square_adjacency[e]):
            if horizons.get(w, -1) < t - 1:
                raise ScheduleViolation(
                    f"step {t} at event {e}: neighbor {w} not simulated at {t - 1}")


def _apply_step(instance, table, indices, satisfied, chosen, region_dists) -> None:
    graph = instance.graph
    touched: set[int] = set()
    for e in chosen:
        touched.update(instance.events[e].vars)
    for v in touched:
        indices[v] = indices.get(v, 0) + 1
    affected = set(chosen)
    for e in chosen:
        affected.update(graph.adjacency[e])
    for e in affected:
        if e not in region_dists:
            continue
        if _eval_local(instance, table, indices, e):
            satisfied.add(e)
        else:
            satisfied.discard(e)


def staggered_phase2(instance: LLLInstance, table: RandomnessTable,
                     state: StaggeredState, risky: set[int],
                     region_dists: dict[int, int], max_extra_steps: int) -> StaggeredState:
    """Continue the simulation restricted to risky events until quiescence.

    Blocking is evaluated inside the risky-induced subgraph, matching the
    restricted phase of the meta-algorithm.  If a non-risky region event is
    satisfied while risky resampling is still pending, the schedule's
    correctness premise fails and the fallback signal is raised.
    """
    graph = instance.graph
    eligible = risky & set(region_dists)
    for _ in range(max_extra_steps):
        sat_risky = state.satisfied & eligible
        watched = set()
        for e in eligible:
            watched.add(e)
            watched.update(graph.adjacency[e])
        if any(e in state.satisfied and e not in risky for e in watched):
            state.fallback_signal = True
        if not sat_risky:
            break
        chosen = [e for e in sat_risky
                  if not any(u in sat_risky and u < e for u in graph.adjacency[e])]
        _apply_step(instance, table, state.indices, state.satisfied, chosen,
                    region_dists)
        state.steps.append(frozenset(chosen))
        state.step_vars.append(frozenset(v for e in chosen
                                         for v in instance.events[e].vars))
        state.phase2_steps += 1
    state.quiesced = not state.satisfied
    return state

"""Per-node query answering with probe accounting.

A query explores the insecure component of the queried node with a stack,
probing a fixed-radius ball around every popped node, then simulates the
resampler on the probed region under the staggered schedule and finally runs
the restricted continuation on the risky nodes it found.  Returned values
match the global run exactly whenever no non-risky event is satisfied past
phase 1; that failure branch is detected as in the LOCAL meta-run, flagged,
and answered with the global run's values.

Probes are charged per node revealed (event spec, adjacent edges, and the
node's table columns).  Queries never share probes: two identical queries
cost the same.  In VOLUME mode the probed region is additionally asserted to
stay connected.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .classify import NarrowParams, derive_params, _find_certificate
from .errors import ValidationError
from .instance import LLLInstance
from .randomness import sample_table
from .resampler import ExecutionLog, default_max_steps, run_cps
from .stagger import staggered_phase1, staggered_phase2


@dataclass(frozen=True)
class ProbeStats:
    probes: int
    explored_nodes: int
    component_size: int
    rounds_simulated: int
    fallback: bool
    explored: tuple[int, ...] = ()


@dataclass
class ProbeLedger:
    """Per-session aggregate of query probe counts (no cross-query discount)."""

    entries: list[ProbeStats] = field(default_factory=list)

    def record(self, stats: ProbeStats) -> None:
        self.entries.append(stats)

    def merge(self, other: "ProbeLedger") -> None:
        self.entries.extend(other.entries)

    def summary(self) -> dict:
        probes = sorted(e.probes for e in self.entries)
        return {
            "queries": len(self.entries),
            "probes_total": sum(probes),
            "probes_p50": probes[len(probes) // 2] if probes else 0,
            "probes_max": probes[-1] if probes else 0,
            "fallbacks": sum(1 for e in self.entries if e.fallback),
        }


class _Prober:
    """Reveals balls around nodes; counts distinct node reveals per query."""

    def __init__(self, instance: LLLInstance):
        self.graph = instance.graph
        self.revealed: set[int] = set()

    def probe_ball(self, center: int, radius: int) -> dict[int, int]:
        dist = {center: 0}
        queue = deque([center])
        while queue:
            u = queue.popleft()
            if dist[u] >= radius:
                continue
            for w in self.graph.adjacency[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        self.revealed.update(dist)
        return dist

    @property
    def probes(self) -> int:
        return len(self.revealed)

    def region_connected(self, start: int) -> bool:
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w in self.graph.adjacency[u]:
                if w in self.revealed and w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == len(self.revealed)


class LcaSession:
    """Query answering for one (instance, seed); queries are independent."""

    def __init__(self, instance: LLLInstance, seed: int,
                 params: NarrowParams | None = None,
                 volume_mode: bool = False,
                 max_steps: int | None = None):
        self.instance = instance
        self.seed = seed
        self.table = sample_table(instance, seed)
        self.params = params if params is not None else derive_params(instance)
        self.volume_mode = volume_mode
        self.max_steps = max_steps if max_steps is not None else default_max_steps(instance)
        self.ledger = ProbeLedger()
        self._global: tuple[ExecutionLog, list[int]] | None = None
        self._global_fallback: bool | None = None
        self._sat0: frozenset[int] | None = None

    # the fallback branch consults the global run, mirroring the LOCAL
    # meta-run; its cost is not charged to the probe ledger
    def global_run(self) -> tuple[ExecutionLog, list[int]]:
        if self._global is None:
            self._global = run_cps(self.instance, self.table, self.max_steps)
        return self._global

    def global_fallback(self) -> bool:
        """True iff some non-risky event is satisfied past phase 1 globally."""
        if self._global_fallback is None:
            from .localsim import run_meta
            _, report = run_meta(self.instance, self.seed, params=self.params,
                                 max_steps=self.max_steps)
            self._global_fallback = report.fallback_used
        return self._global_fallback

    def initially_satisfied(self) -> frozenset[int]:
        if self._sat0 is None:
            sat = set()
            for ev in self.instance.events:
                values = tuple(self.table.value(v, 0) for v in ev.vars)
                if ev.holds(values):
                    sat.add(ev.id)
            self._sat0 = frozenset(sat)
        return self._sat0

    def query(self, v: int) -> tuple[dict[int, int], ProbeStats]:
        if not (0 <= v < self.instance.n):
            raise ValidationError(f"unknown event {v}")
        params = self.params
        graph = self.instance.graph
        probe_radius = params.R_max + 2
        prober = _Prober(self.instance)
        sat0 = self.initially_satisfied()

        stack = [v]
        added = {v}
        explored: list[int] = []
        component: set[int] = set()
        risky_flags: dict[int, bool] = {}
        ball_dists: dict[int, dict[int, int]] = {}
        while stack:
            u = stack.pop()
            explored.append(u)
            ball_dists[u] = prober.probe_ball(u, probe_radius)
            flags = self._risky_flags_near(u, ball_dists[u], risky_flags, sat0)
            insecure_u = flags.get(u, False) or any(
                flags.get(w, False) for w in graph.adjacency[u])
            if insecure_u:
                component.add(u)
                for w in graph.adjacency[u]:
                    if w in added:
                        continue
                    insecure_w = flags.get(w, False) or any(
                        flags.get(z, False) for z in graph.adjacency[w])
                    if insecure_w:
                        added.add(w)
                        stack.append(w)

        if component:
            region = _multi_source_dists(graph, component, prober.revealed)
        else:
            region = ball_dists[v]
        state = staggered_phase1(self.instance, self.table, region,
                                 params.phase1_steps, initial_satisfied=sat0)
        risky_here = {u for u, f in risky_flags.items() if f and u in region}
        state = staggered_phase2(self.instance, self.table, state, risky_here,
                                 region, max_extra_steps=self.max_steps)

        fallback = self.global_fallback() or state.fallback_signal
        if fallback:
            _, global_values = self.global_run()
            values = {var: global_values[var] for var in self.instance.events[v].vars}
        else:
            values = {var: state.current_value(self.table, var)
                      for var in self.instance.events[v].vars}

        if self.volume_mode and not prober.region_connected(v):
            raise ValidationError("VOLUME mode: probed region is disconnected")

        stats = ProbeStats(
            probes=prober.probes,
            explored_nodes=len(set(explored)),
            component_size=len(component),
            rounds_simulated=params.phase1_steps + state.phase2_steps,
            fallback=fallback,
            explored=tuple(sorted(set(explored))),
        )
        self.ledger.record(stats)
        return values, stats

    def _risky_flags_near(self, u: int, region: dict[int, int],
                          cache: dict[int, bool],
                          sat0: frozenset[int]) -> dict[int, bool]:
        """Risky flags for u and its 2-neighborhood from u's probed ball."""
        params = self.params
        graph = self.instance.graph
        targets = {u, *graph.adjacency[u], *graph.square_adjacency[u]}
        if all(w in cache for w in targets):
            return {w: cache[w] for w in targets}
        state = staggered_phase1(self.instance, self.table, region,
                                 params.phase1_steps, initial_satisfied=sat0)
        local_log = ExecutionLog(self.instance, state.steps, state.step_vars,
                                 terminated=False)
        total_resamples = sum(len(s) for s in local_log.steps)
        roots: dict[int, list[int]] = {}
        for t, step in enumerate(local_log.steps, start=1):
            for w in step:
                if w in targets:
                    roots.setdefault(w, []).append(t)
        flags: dict[int, bool] = {}
        for w in targets:
            if w in cache:
                flags[w] = cache[w]
                continue
            ts = roots.get(w)
            if not ts or total_resamples < params.size_threshold:
                flags[w] = False
            else:
                flags[w] = _find_certificate(local_log, w, ts, params) is not None
            cache[w] = flags[w]
        return flags


def _multi_source_dists(graph, anchors: set[int], region) -> dict[int, int]:
    region_set = set(region)
    dist = {}
    queue = deque()
    for a in sorted(anchors):
        if a in region_set:
            dist[a] = 0
            queue.append(a)
    while queue:
        u = queue.popleft()
        for w in graph.adjacency[u]:
            if w in region_set and w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def query(instance: LLLInstance, table_seed: int, v: int,
          params: NarrowParams | None = None,
          volume_mode: bool = False) -> tuple[dict[int, int], ProbeStats]:
    """One-shot query; builds a session and answers for node v."""
    session = LcaSession(instance, table_seed, params=params, volume_mode=volume_mode)
    return session.query(v)


def structural_probe_bound(instance: LLLInstance, params: NarrowParams,
                           explored: tuple[int, ...]) -> int:
    """Sum of |ball(u, 2 R_max + 2)| over the explored nodes.

    Probed balls have radius R_max + 2, so the probe count of any query is
    bounded by this quantity exactly.
    """
    from .instance import ball
    return sum(len(ball(instance.graph, u, 2 * params.R_max + 2)) for u in explored)

"""LLL instance model: variables, bad events, exact probabilities, dependency graph.

An instance is a set of finite-domain independent random variables plus a set
of bad events over them.  Two events are dependent (adjacent in the dependency
graph) iff they share a variable.  Event probabilities are always computed
exactly from the variable distributions, never estimated.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import deque
from dataclasses import dataclass, field

from .errors import ValidationError

PROB_TOL = 1e-12
MAX_EVENT_VARS = 20

KIND_CLAUSE = "clause"
KIND_MONOCHROMATIC = "monochromatic"
KIND_FORBIDDEN = "forbidden-set"
PREDICATE_KINDS = (KIND_CLAUSE, KIND_MONOCHROMATIC, KIND_FORBIDDEN)


@dataclass(frozen=True)
class Variable:
    """A finite-domain random variable with an explicit distribution."""

    id: int
    domain_size: int
    distribution: tuple[float, ...]

    def validate(self) -> None:
        if self.domain_size < 2:
            raise ValidationError(f"variable {self.id}: domain_size must be >= 2")
        if len(self.distribution) != self.domain_size:
            raise ValidationError(
                f"variable {self.id}: distribution length != domain_size")
        if any(p < 0 for p in self.distribution):
            raise ValidationError(f"variable {self.id}: negative probability")
        if abs(sum(self.distribution) - 1.0) > PROB_TOL:
            raise ValidationError(
                f"variable {self.id}: distribution sums to {sum(self.distribution)!r}")


@dataclass(frozen=True)
class BadEvent:
    """A bad event over an ordered tuple of variables.

    The event id doubles as its tie-breaking ID in the resampling algorithm.
    Predicates:
      clause          holds iff the variables realize exactly the payload
                      assignment (all variables boolean); models a falsified
                      k-SAT clause,
      monochromatic   holds iff all variables take equal values,
      forbidden-set   holds iff the assignment is one of the listed tuples.
    """

    id: int
    vars: tuple[int, ...]
    kind: str
    payload: tuple | None = None

    def holds(self, values: tuple) -> bool:
        """Evaluate the predicate on values aligned with self.vars."""
        if self.kind == KIND_CLAUSE:
            return values == self.payload
        if self.kind == KIND_MONOCHROMATIC:
            first = values[0]
            return all(v == first for v in values)
        return values in self.payload_set

    @property
    def payload_set(self) -> frozenset:
        # cached lazily; frozen dataclass so stash via __dict__
        cached = self.__dict__.get("_payload_set")
        if cached is None:
            cached = frozenset(self.payload or ())
            self.__dict__["_payload_set"] = cached
        return cached


@dataclass
class DependencyGraph:
    """Event adjacency (shared variables) and distance-2 neighborhoods."""

    adjacency: list[tuple[int, ...]]
    square_adjacency: list[tuple[int, ...]] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._nbr_sets = [frozenset(a) for a in self.adjacency]
        if not self.square_adjacency:
            self.square_adjacency = [
                tuple(sorted(self._two_ball(v) - {v})) for v in range(len(self.adjacency))
            ]
        self._n2_sets = [frozenset(a) for a in self.square_adjacency]

    def _two_ball(self, v: int) -> set[int]:
        out = set(self.adjacency[v])
        for u in self.adjacency[v]:
            out.update(self.adjacency[u])
        return out

    @property
    def n(self) -> int:
        return len(self.adjacency)

    @property
    def d(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def are_adjacent(self, u: int, v: int) -> bool:
        return v in self._nbr_sets[u]

    def within_two(self, u: int, v: int) -> bool:
        """dist_G(u, v) <= 2, counting u == v as distance 0."""
        return u == v or v in self._nbr_sets[u] or v in self._n2_sets[u]


class LLLInstance:
    """Immutable LLL instance; d and p are always recomputed, never trusted."""

    def __init__(self, variables: list[Variable], events: list[BadEvent]):
        self.variables = list(variables)
        self.events = list(events)
        self._validate()
        self.var_events: list[tuple[int, ...]] = self._index_var_events()
        self.graph = build_dependency_graph(self)
        self.event_probs = [event_probability(self, e.id) for e in self.events]
        for ev, prob in zip(self.events, self.event_probs):
            if prob >= 1.0:
                raise ValidationError(f"event {ev.id}: probability {prob} >= 1")

    # -- derived scalars ---------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.events)

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    @property
    def d(self) -> int:
        return self.graph.d

    @property
    def p(self) -> float:
        return max(self.event_probs)

    def log1p_n(self) -> float:
        """log_{1/p} n; 0.0 for the degenerate p == 0 case."""
        if self.p <= 0.0:
            return 0.0
        return math.log(self.n) / math.log(1.0 / self.p)

    # -- validation ---------------------------------------------------------

    def _validate(self) -> None:
        if not self.events:
            raise ValidationError("instance has no events")
        for i, var in enumerate(self.variables):
            if var.id != i:
                raise ValidationError("variable ids must be 0..m-1 in order")
            var.validate()
        referenced: set[int] = set()
        for i, ev in enumerate(self.events):
            if ev.id != i:
                raise ValidationError("event ids must be 0..n-1 in order")
            self._validate_event(ev)
            referenced.update(ev.vars)
        unused = set(range(len(self.variables))) - referenced
        if unused:
            raise ValidationError(f"variables referenced by no event: {sorted(unused)}")

    def _validate_event(self, ev: BadEvent) -> None:
        if not ev.vars:
            raise ValidationError(f"event {ev.id}: needs at least one variable")
        if len(set(ev.vars)) != len(ev.vars):
            raise ValidationError(f"event {ev.id}: duplicate variable ids")
        if len(ev.vars) > MAX_EVENT_VARS:
            raise ValidationError(
                f"event {ev.id}: more than {MAX_EVENT_VARS} variables")
        for v in ev.vars:
            if not (0 <= v < len(self.variables)):
                raise ValidationError(f"event {ev.id}: unknown variable {v}")
        if ev.kind not in PREDICATE_KINDS:
            raise ValidationError(f"event {ev.id}: unknown predicate kind {ev.kind!r}")
        if ev.kind == KIND_CLAUSE:
            if ev.payload is None or len(ev.payload) != len(ev.vars):
                raise ValidationError(f"event {ev.id}: clause payload mismatch")
            for v, val in zip(ev.vars, ev.payload):
                if self.variables[v].domain_size != 2:
                    raise ValidationError(
                        f"event {ev.id}: clause over non-boolean variable {v}")
                if val not in (0, 1):
                    raise ValidationError(f"event {ev.id}: clause value {val!r}")
        elif ev.kind == KIND_FORBIDDEN:
            if ev.payload is None:
                raise ValidationError(f"event {ev.id}: forbidden-set needs payload")
            seen = set()
            for assignment in ev.payload:
                if len(assignment) != len(ev.vars):
                    raise ValidationError(
                        f"event {ev.id}: forbidden assignment arity mismatch")
                for v, val in zip(ev.vars, assignment):
                    if not (0 <= val < self.variables[v].domain_size):
                        raise ValidationError(
                            f"event {ev.id}: out-of-domain value {val!r}")
                if assignment in seen:
                    raise ValidationError(f"event {ev.id}: duplicate forbidden entry")
                seen.add(assignment)

    def _index_var_events(self) -> list[tuple[int, ...]]:
        idx: list[list[int]] = [[] for _ in self.variables]
        for ev in self.events:
            for v in ev.vars:
                idx[v].append(ev.id)
        return [tuple(lst) for lst in idx]


# -- operations --------------------------------------------------------------


def build_dependency_graph(instance: LLLInstance) -> DependencyGraph:
    """Edges between events sharing at least one variable; no self-loops."""
    nbrs: list[set[int]] = [set() for _ in instance.events]
    by_var: dict[int, list[int]] = {}
    for ev in instance.events:
        for v in ev.vars:
            by_var.setdefault(v, []).append(ev.id)
    for ids in by_var.values():
        for a, b in itertools.combinations(ids, 2):
            if a != b:
                nbrs[a].add(b)
                nbrs[b].add(a)
    return DependencyGraph([tuple(sorted(s)) for s in nbrs])


def eval_event(event: BadEvent, assignment) -> bool:
    """True iff the bad event occurs under the assignment.

    `assignment` is either a mapping var-id -> value or a sequence aligned
    with event.vars.
    """
    if isinstance(assignment, dict):
        try:
            values = tuple(assignment[v] for v in event.vars)
        except KeyError as exc:
            raise ValidationError(f"assignment missing variable {exc.args[0]}") from None
    else:
        if len(assignment) != len(event.vars):
            raise ValidationError("assignment does not cover exactly event.vars")
        values = tuple(assignment)
    return event.holds(values)


def event_probability(instance: LLLInstance, event_id: int) -> float:
    """Exact probability of the event under the product measure of its vars."""
    ev = instance.events[event_id]
    dists = [instance.variables[v].distribution for v in ev.vars]
    if ev.kind == KIND_CLAUSE:
        prob = 1.0
        for dist, val in zip(dists, ev.payload):
            prob *= dist[val]
        return prob
    if ev.kind == KIND_MONOCHROMATIC:
        shared = min(len(d) for d in dists)
        total = 0.0
        for c in range(shared):
            term = 1.0
            for dist in dists:
                term *= dist[c]
            total += term
        return total
    total = 0.0
    for assignment in ev.payload:
        term = 1.0
        for dist, val in zip(dists, assignment):
            term *= dist[val]
        total += term
    return total


@dataclass(frozen=True)
class CriterionReport:
    d: int
    p: float
    delta: float
    threshold: float
    satisfied: bool
    trivially_local: bool


def check_criterion(instance: LLLInstance, delta: float) -> CriterionReport:
    """Check p <= d^-(10+delta).  Advisory: callers warn but proceed."""
    d, p = instance.d, instance.p
    if d < 2:
        return CriterionReport(d, p, delta, 1.0, True, True)
    threshold = d ** -(10.0 + delta)
    return CriterionReport(d, p, delta, threshold, p <= threshold, False)


def ball(graph: DependencyGraph, v: int, r: int) -> set[int]:
    """All events at graph distance <= r from v (BFS)."""
    if r < 0:
        raise ValidationError("ball radius must be >= 0")
    seen = {v}
    frontier = [v]
    for _ in range(r):
        nxt = []
        for u in frontier:
            for w in graph.adjacency[u]:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        if not nxt:
            break
        frontier = nxt
    return seen


def bfs_distances(graph: DependencyGraph, v: int, r_max: int | None = None) -> dict[int, int]:
    """Map node -> dist_G(v, node) for nodes within r_max (all if None)."""
    dist = {v: 0}
    queue = deque([v])
    while queue:
        u = queue.popleft()
        du = dist[u]
        if r_max is not None and du >= r_max:
            continue
        for w in graph.adjacency[u]:
            if w not in dist:
                dist[w] = du + 1
                queue.append(w)
    return dist


# -- instance file format -----------------------------------------------------
#
# Top-level keys `variables` and `events`; predicate is {kind, payload}.
# Round trips are byte-identical modulo whitespace.


def instance_to_doc(instance: LLLInstance) -> dict:
    return {
        "variables": [
            {"id": v.id, "domain_size": v.domain_size,
             "distribution": list(v.distribution)}
            for v in instance.variables
        ],
        "events": [
            {"id": e.id, "vars": list(e.vars),
             "predicate": {"kind": e.kind, "payload": _payload_to_doc(e)}}
            for e in instance.events
        ],
    }


def _payload_to_doc(ev: BadEvent):
    if ev.kind == KIND_CLAUSE:
        return list(ev.payload)
    if ev.kind == KIND_FORBIDDEN:
        return [list(a) for a in ev.payload]
    return None


def instance_from_doc(doc: dict) -> LLLInstance:
    try:
        variables = [
            Variable(int(v["id"]), int(v["domain_size"]),
                     tuple(float(p) for p in v["distribution"]))
            for v in doc["variables"]
        ]
        events = []
        for e in doc["events"]:
            pred = e["predicate"]
            kind = pred["kind"]
            payload = pred.get("payload")
            if kind == KIND_CLAUSE:
                payload = tuple(int(x) for x in payload)
            elif kind == KIND_FORBIDDEN:
                payload = tuple(tuple(int(x) for x in a) for a in payload)
            else:
                payload = None
            events.append(BadEvent(int(e["id"]), tuple(int(v) for v in e["vars"]),
                                   kind, payload))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed instance document: {exc}") from exc
    return LLLInstance(variables, events)


def save_instance(instance: LLLInstance, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_instance(instance))


def dumps_instance(instance: LLLInstance) -> str:
    return json.dumps(instance_to_doc(instance), indent=2) + "\n"


def load_instance(path: str) -> LLLInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_doc(json.load(fh))

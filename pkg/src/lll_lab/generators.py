"""Seeded instance generators: bounded-occurrence k-SAT and hypergraph coloring.

Both generators use the same slot-pool construction: every variable gets a
bounded number of occurrence slots, the pool is shuffled and dealt into
events, and clashes (duplicate variables inside one event) are repaired by
swapping with later slots.  The occurrence bound then holds by construction,
so d <= arity * (max_occurrence - 1).
"""

from __future__ import annotations

import math
import random

from .errors import GenerationError, ValidationError
from .instance import (
    KIND_CLAUSE,
    KIND_MONOCHROMATIC,
    BadEvent,
    LLLInstance,
    Variable,
)

_RESTART_BUDGET = 50


def _deal_slots(num_events: int, arity: int, max_occurrence: int,
                rng: random.Random) -> list[list[int]]:
    """Deal variable ids into num_events groups of `arity` distinct ids."""
    total = num_events * arity
    num_vars = max(arity, math.ceil(total / max_occurrence))
    if num_vars < arity:
        raise GenerationError("fewer variables than event arity")
    base, extra = divmod(total, num_vars)
    # every variable used at least once, none beyond max_occurrence
    counts = [base + (1 if i < extra else 0) for i in range(num_vars)]
    if max(counts) > max_occurrence or min(counts) < 1:
        raise GenerationError(
            f"infeasible parameters: {num_events} events of arity {arity} "
            f"with occurrence bound {max_occurrence}")
    pool = [v for v, c in enumerate(counts) for _ in range(c)]

    for _ in range(_RESTART_BUDGET):
        rng.shuffle(pool)
        slots = pool[:]
        ok = True
        for e in range(num_events):
            lo = e * arity
            block = slots[lo:lo + arity]
            if len(set(block)) == arity:
                continue
            if not _repair_block(slots, lo, arity, num_events, rng):
                ok = False
                break
        if ok:
            return [sorted(slots[e * arity:(e + 1) * arity]) for e in range(num_events)]
    raise GenerationError("could not deal distinct variables within retry budget")


def _repair_block(slots: list[int], lo: int, arity: int, num_events: int,
                  rng: random.Random) -> bool:
    """Swap duplicate slots in block [lo, lo+arity) with later compatible slots."""
    hi = lo + arity
    for _ in range(64):
        block = slots[lo:hi]
        dup_pos = _first_duplicate(block)
        if dup_pos is None:
            return True
        candidates = list(range(hi, num_events * arity))
        rng.shuffle(candidates)
        swapped = False
        for j in candidates:
            if slots[j] in block:
                continue
            other_lo = (j // arity) * arity
            other = slots[other_lo:other_lo + arity]
            moved = block[dup_pos]
            if other.count(moved) > 0:
                continue
            slots[lo + dup_pos], slots[j] = slots[j], slots[lo + dup_pos]
            swapped = True
            break
        if not swapped:
            return False
    return False


def _first_duplicate(block: list[int]) -> int | None:
    seen: set[int] = set()
    for i, v in enumerate(block):
        if v in seen:
            return i
        seen.add(v)
    return None


def gen_ksat(num_clauses: int, k: int, max_occurrence: int, seed: int) -> LLLInstance:
    """Random k-SAT with every variable in <= max_occurrence clauses.

    Bad event = clause falsified, so each event probability is exactly 2^-k.
    """
    if k < 2:
        raise ValidationError("k must be >= 2")
    if max_occurrence < 1:
        raise ValidationError("max_occurrence must be >= 1")
    if num_clauses < 1:
        raise ValidationError("num_clauses must be >= 1")
    rng = random.Random(seed)
    groups = _deal_slots(num_clauses, k, max_occurrence, rng)
    num_vars = 1 + max(v for g in groups for v in g)
    variables = [Variable(i, 2, (0.5, 0.5)) for i in range(num_vars)]
    events = []
    for cid, grp in enumerate(groups):
        # the payload is the unique assignment falsifying the clause; literal
        # polarities are implicit in it
        payload = tuple(rng.randrange(2) for _ in grp)
        events.append(BadEvent(cid, tuple(grp), KIND_CLAUSE, payload))
    return LLLInstance(variables, events)


def gen_hypergraph_coloring(num_edges: int, edge_size: int, max_degree: int,
                            num_colors: int, seed: int) -> LLLInstance:
    """Random linear-ish hypergraph; bad event = hyperedge monochromatic.

    Event probability is exactly num_colors^(1 - edge_size).
    """
    if edge_size < 2:
        raise ValidationError("edge_size must be >= 2")
    if num_colors < 2:
        raise ValidationError("num_colors must be >= 2")
    if max_degree < 1:
        raise ValidationError("max_degree must be >= 1")
    rng = random.Random(seed)
    groups = _deal_slots(num_edges, edge_size, max_degree, rng)
    num_vars = 1 + max(v for g in groups for v in g)
    dist = tuple([1.0 / num_colors] * num_colors)
    variables = [Variable(i, num_colors, dist) for i in range(num_vars)]
    events = [BadEvent(eid, tuple(grp), KIND_MONOCHROMATIC) for eid, grp in enumerate(groups)]
    return LLLInstance(variables, events)


def permute_event_ids(instance: LLLInstance, seed: int) -> LLLInstance:
    """Relabel events by a seeded random permutation of 0..n-1.

    Equivalent in distribution to the random-ID convention of the resampling
    algorithm; useful for checking that results do not lean on generator order.
    """
    rng = random.Random(seed)
    perm = list(range(instance.n))
    rng.shuffle(perm)  # perm[old] = new
    order = sorted(range(instance.n), key=lambda old: perm[old])
    events = [
        BadEvent(new_id, instance.events[old].vars, instance.events[old].kind,
                 instance.events[old].payload)
        for new_id, old in enumerate(order)
    ]
    return LLLInstance(instance.variables, events)


def make_desk_instance(seed: int, num_clauses: int = 2000, k: int = 10,
                       max_occurrence: int = 2) -> LLLInstance:
    """Default desk-scale profile: p = 2^-k flirting with the criterion boundary."""
    return gen_ksat(num_clauses, k, max_occurrence, seed)


def make_cycle_instance(num_events: int = 8) -> LLLInstance:
    """Cycle of two-variable clause events (p = 1/4, d = 2).

    Event i covers variables (i, i+1 mod n) and holds iff both are 0.  Small
    and high-probability, so tree frequencies resolve with modest trials.
    """
    if num_events < 3:
        raise ValidationError("cycle needs at least 3 events")
    variables = [Variable(i, 2, (0.5, 0.5)) for i in range(num_events)]
    events = [BadEvent(i, (i, (i + 1) % num_events), KIND_CLAUSE, (0, 0))
              for i in range(num_events)]
    return LLLInstance(variables, events)

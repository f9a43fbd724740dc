"""Monte-Carlo verification of witness-tree probability bounds.

Frequencies are estimated over independent randomness tables.  For speed the
tables are pre-sampled in bulk (counter-based numpy generator keyed by the
run seed) instead of going through the hash-per-entry table; the distribution
contract is identical and every trial is a pure function of (seed, trial).

The adversarial variant freezes all indices of variables outside the ball
around the tree's root to scanned constants, modeling worst-case behavior of
independent randomness.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ResolutionError, ValidationError
from .instance import KIND_CLAUSE, KIND_MONOCHROMATIC, LLLInstance, ball
from .resampler import ExecutionLog
from .witness import (
    build_occurring,
    build_possible,
    shape_radius_and_boundary,
    shape_size,
)

MC_MAX_TREE_SIZE = 3
_CHUNK = 20_000


class BoundViolation(AssertionError):
    """An estimated frequency exceeded its probability bound by > 4 stderr."""


@dataclass(frozen=True)
class McResult:
    shape: tuple
    mode: str                 # "occurring" or "possible"
    frequency: float
    stderr: float
    bound: float
    trials: int
    count: int
    nonterminated: int

    def within_bound(self) -> bool:
        return self.frequency <= self.bound + 4.0 * self.stderr


def _compile_events(instance: LLLInstance):
    evals = []
    for ev in instance.events:
        vs = ev.vars
        if ev.kind == KIND_CLAUSE:
            pay = ev.payload

            def f(cur, vs=vs, pay=pay):
                for v, p in zip(vs, pay):
                    if cur[v] != p:
                        return False
                return True
        elif ev.kind == KIND_MONOCHROMATIC:

            def f(cur, vs=vs):
                first = cur[vs[0]]
                for v in vs[1:]:
                    if cur[v] != first:
                        return False
                return True
        else:
            pset = ev.payload_set

            def f(cur, vs=vs, pset=pset):
                return tuple(cur[v] for v in vs) in pset
        evals.append(f)
    return evals


class TrialEngine:
    """Streams execution logs of independent seeded trials of one instance."""

    def __init__(self, instance: LLLInstance, seed: int, max_steps: int = 64,
                 frozen: dict[int, int] | None = None):
        self.instance = instance
        self.seed = seed
        self.max_steps = max_steps
        self.depth = max_steps + 1
        self.frozen = dict(frozen or {})
        self._evals = _compile_events(instance)
        self._adj = instance.graph.adjacency
        self._cums = [np.array(_cum(v.distribution)) for v in instance.variables]
        self.nonterminated = 0

    def logs(self, trials: int):
        """Yield (steps, step_vars) per trial; entries are frozensets."""
        rng = np.random.Generator(np.random.Philox(key=self.seed & (2**64 - 1)))
        # cap the pre-sampled block at ~32M table entries
        cells = max(1, self.instance.num_vars * self.depth)
        chunk_cap = max(1, min(_CHUNK, 32_000_000 // cells))
        remaining = trials
        while remaining > 0:
            chunk = min(chunk_cap, remaining)
            remaining -= chunk
            vals = self._sample_chunk(rng, chunk)
            for row in vals:
                yield self._run(row)

    def _sample_chunk(self, rng, chunk: int) -> list:
        m = self.instance.num_vars
        wide = any(v.domain_size > 255 for v in self.instance.variables)
        out = np.empty((chunk, m, self.depth),
                       dtype=np.uint16 if wide else np.uint8)
        for v in range(m):
            if v in self.frozen:
                out[:, v, :] = self.frozen[v]
            else:
                u = rng.random((chunk, self.depth))
                out[:, v, :] = np.searchsorted(self._cums[v], u, side="right")
        return [row.tolist() for row in out]

    def _run(self, row) -> tuple[list[frozenset[int]], list[frozenset[int]]]:
        evals = self._evals
        adj = self._adj
        ev_vars = [e.vars for e in self.instance.events]
        idx = [0] * len(row)
        cur = [r[0] for r in row]
        sat = {e for e in range(len(evals)) if evals[e](cur)}
        steps: list[frozenset[int]] = []
        step_vars: list[frozenset[int]] = []
        while sat and len(steps) < self.max_steps:
            chosen = [e for e in sat
                      if not any(u in sat and u < e for u in adj[e])]
            touched: set[int] = set()
            for e in chosen:
                touched.update(ev_vars[e])
            for v in touched:
                idx[v] += 1
                cur[v] = row[v][idx[v]]
            steps.append(frozenset(chosen))
            step_vars.append(frozenset(touched))
            affected = set(chosen)
            for e in chosen:
                affected.update(adj[e])
            for e in affected:
                if evals[e](cur):
                    sat.add(e)
                else:
                    sat.discard(e)
        if sat:
            self.nonterminated += 1
        return steps, step_vars


def _cum(distribution) -> list[float]:
    cum, acc = [], 0.0
    for p in distribution:
        acc += p
        cum.append(acc)
    cum[-1] = 1.0
    return cum


def _as_log(instance: LLLInstance, steps, step_vars) -> ExecutionLog:
    return ExecutionLog(instance, steps, step_vars, terminated=True)


def mc_shape_frequencies(instance: LLLInstance, targets: list[tuple[tuple, str]],
                         trials: int, seed: int,
                         frozen: dict[int, int] | None = None,
                         max_steps: int = 64) -> list[McResult]:
    """Estimate occurrence/possible frequencies for many shapes in one pass.

    `targets` holds (shape, mode) pairs.  A shape matched in mode "possible"
    uses the admission radius equal to its own G-radius, so its boundary set
    coincides with the admission shell.
    """
    for shape, mode in targets:
        if shape_size(shape) > MC_MAX_TREE_SIZE:
            raise ResolutionError(
                f"tree of size {shape_size(shape)} too large to resolve")
        if mode not in ("occurring", "possible"):
            raise ValidationError(f"unknown mode {mode!r}")
    engine = TrialEngine(instance, seed, max_steps=max_steps, frozen=frozen)
    by_root: dict[int, list[int]] = {}
    radii = []
    for i, (shape, mode) in enumerate(targets):
        radius, bcount = shape_radius_and_boundary(instance, shape)
        radii.append((radius, bcount))
        by_root.setdefault(shape[0], []).append(i)
    counts = [0] * len(targets)
    for steps, step_vars in engine.logs(trials):
        if not steps:
            continue
        log = None
        for root, idxs in by_root.items():
            hit_ts = [t for t, s in enumerate(steps, start=1) if root in s]
            if not hit_ts:
                continue
            if log is None:
                log = _as_log(instance, steps, step_vars)
            matched: set[int] = set()
            for t in hit_ts:
                occ_shape = None
                poss_shapes: dict[int, tuple] = {}
                for i in idxs:
                    if i in matched:
                        continue
                    shape, mode = targets[i]
                    if mode == "occurring":
                        if occ_shape is None:
                            occ_shape = build_occurring(log, root, t).shape()
                        if occ_shape == shape:
                            matched.add(i)
                    else:
                        r = radii[i][0]
                        if r not in poss_shapes:
                            poss_shapes[r] = build_possible(log, root, t, r).shape()
                        if poss_shapes[r] == shape:
                            matched.add(i)
            for i in matched:
                counts[i] += 1
    p = instance.p
    results = []
    for i, (shape, mode) in enumerate(targets):
        size = shape_size(shape)
        bcount = radii[i][1]
        bound = p ** size if mode == "occurring" else p ** (size - bcount)
        freq = counts[i] / trials
        stderr = math.sqrt(freq * (1.0 - freq) / trials)
        results.append(McResult(shape, mode, freq, stderr, bound, trials,
                                counts[i], engine.nonterminated))
    return results


def mc_occurrence_probability(instance: LLLInstance, shape: tuple, trials: int,
                              seed: int, mode: str = "occurring",
                              frozen: dict[int, int] | None = None,
                              check: bool = True) -> McResult:
    """Frequency with which the shape is generated, asserted against its bound."""
    result = mc_shape_frequencies(instance, [(shape, mode)], trials, seed,
                                  frozen=frozen)[0]
    if check and not result.within_bound():
        raise BoundViolation(
            f"{mode} frequency {result.frequency:.6g} exceeds bound "
            f"{result.bound:.6g} + 4*{result.stderr:.2g}")
    return result


def outside_variables(instance: LLLInstance, shape: tuple) -> list[int]:
    """Variables independent of every event within ball(root, g_radius + 1)."""
    radius, _ = shape_radius_and_boundary(instance, shape)
    inside_events = ball(instance.graph, shape[0], radius + 1)
    inside_vars: set[int] = set()
    for e in inside_events:
        inside_vars.update(instance.events[e].vars)
    return [v for v in range(instance.num_vars) if v not in inside_vars]


def adversarial_scan(instance: LLLInstance, shape: tuple, trials: int, seed: int,
                     check: bool = True) -> list[McResult]:
    """Possible-tree bound under every constant setting of outside variables."""
    out_vars = outside_variables(instance, shape)
    domains = [range(instance.variables[v].domain_size) for v in out_vars]
    results = []
    for combo in itertools.product(*domains):
        frozen = dict(zip(out_vars, combo))
        results.append(mc_occurrence_probability(
            instance, shape, trials, seed, mode="possible",
            frozen=frozen, check=check))
    return results

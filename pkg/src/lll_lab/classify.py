"""Narrowness parameters, risky/insecure classification, and the structure of
the insecure subgraph: components, ruling sets, network decomposition.

A node is risky when some R-filtered tree rooted at one of its resamples is
both large (size >= ceil(lambda * ell)) and narrow (boundary fraction <= eps)
for some R up to R_max.  Insecure nodes are risky nodes and their neighbors;
everything else can keep its phase-1 values.

Desk-scale instances usually fall below the asymptotic regime (log_{1/p} n
< 2); they are flagged trivially_local and the real-valued ell is clamped to
1 before taking the integral ceilings, which only strengthens the secure-node
guarantee.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from .errors import ValidationError
from .instance import LLLInstance, bfs_distances
from .randomness import RandomnessTable
from .resampler import ExecutionLog
from .stagger import staggered_phase1
from .witness import WitnessTree, build_possible, is_narrow

DIAMETER_CAP = 10_000


@dataclass(frozen=True)
class NarrowParams:
    eps: float
    lam: float                 # 2 / eps
    ell: float                 # log_{1/(1-eps)} log_{1/p} n (raw, may be <= 0)
    ell_eff: float             # max(ell, 1.0); basis for the integer fields
    size_threshold: int        # ceil(lam * ell_eff)
    R_max: int                 # ceil(2 (lam + 2) ell_eff)
    phase1_steps: int          # ceil((lam + 2) ell_eff)
    log1p_n: float
    feasible: bool             # d^10 <= (1/p)^(1 - 2 eps)
    trivially_local: bool      # d < 2 or log_{1/p} n < 2

    def as_dict(self) -> dict:
        return {
            "eps": self.eps, "lambda": self.lam, "ell": self.ell,
            "ell_eff": self.ell_eff, "size_threshold": self.size_threshold,
            "R_max": self.R_max, "phase1_steps": self.phase1_steps,
            "log1p_n": self.log1p_n, "feasible": self.feasible,
            "trivially_local": self.trivially_local,
        }


def narrow_params(n: int, d: int, p: float, eps_override: float | None = None) -> NarrowParams:
    """Parameter derivation from the raw (n, d, p) triple."""
    if n < 2:
        raise ValidationError("need n >= 2 events")
    if not (0.0 <= p < 1.0):
        raise ValidationError("need p < 1")
    if eps_override is not None and not (0.0 < eps_override < 0.1):
        raise ValidationError("eps must lie in the open interval (0, 0.1)")

    log_inv_p = math.inf if p == 0.0 else math.log(1.0 / p)
    log1p_n = 0.0 if p == 0.0 else math.log(n) / log_inv_p

    if eps_override is not None:
        eps = eps_override
    elif d >= 2 and 0.0 < p:
        delta = log_inv_p / math.log(d) - 10.0
        eps = min(0.099, 0.9 * delta / (2.0 * (10.0 + delta))) if delta > 0 else 0.099
        if eps <= 0:
            eps = 0.099
    else:
        eps = 0.099

    if d < 2:
        feasible = True
    elif p == 0.0:
        feasible = True
    else:
        feasible = 10.0 * math.log(d) <= (1.0 - 2.0 * eps) * log_inv_p

    trivially_local = d < 2 or log1p_n < 2.0
    lam = 2.0 / eps
    if log1p_n > 0.0:
        ell = math.log(log1p_n) / math.log(1.0 / (1.0 - eps))
    else:
        ell = -math.inf
    ell_eff = max(ell, 1.0)
    return NarrowParams(
        eps=eps, lam=lam, ell=ell, ell_eff=ell_eff,
        size_threshold=math.ceil(lam * ell_eff),
        R_max=math.ceil(2.0 * (lam + 2.0) * ell_eff),
        phase1_steps=math.ceil((lam + 2.0) * ell_eff),
        log1p_n=log1p_n, feasible=feasible, trivially_local=trivially_local,
    )


def derive_params(instance: LLLInstance, eps_override: float | None = None) -> NarrowParams:
    return narrow_params(instance.n, instance.d, instance.p, eps_override)


@dataclass(frozen=True)
class RiskyCertificate:
    t: int
    R: int
    size: int
    boundary_count: int
    g_radius: int
    depth: int


@dataclass
class Classification:
    risky: frozenset[int]
    insecure: frozenset[int]
    certificates: dict[int, RiskyCertificate]
    params: NarrowParams


def _qualifies(tree: WitnessTree, params: NarrowParams) -> bool:
    return tree.size >= params.size_threshold and is_narrow(tree, params.eps)


def classify_risky(instance: LLLInstance, log: ExecutionLog,
                   params: NarrowParams) -> Classification:
    """Scan every root (v, t) of the log and every R <= R_max for a certificate."""
    graph = instance.graph
    roots: dict[int, list[int]] = {}
    for t, step in enumerate(log.steps, start=1):
        for v in step:
            roots.setdefault(v, []).append(t)
    risky: set[int] = set()
    certificates: dict[int, RiskyCertificate] = {}
    for v, ts in roots.items():
        dists = bfs_distances(graph, v, r_max=params.R_max)
        available = sum(
            1 for t_s, step in enumerate(log.steps, start=1)
            if t_s <= max(ts)
            for u in step if u in dists)
        if available < params.size_threshold:
            continue  # no tree rooted at v can reach the size threshold
        cert = _find_certificate(log, v, ts, params)
        if cert is not None:
            risky.add(v)
            certificates[v] = cert
    insecure = set(risky)
    for v in risky:
        insecure.update(graph.adjacency[v])
    return Classification(frozenset(risky), frozenset(insecure), certificates, params)


def _find_certificate(log: ExecutionLog, v: int, ts: list[int],
                      params: NarrowParams) -> RiskyCertificate | None:
    for t in sorted(ts, reverse=True):
        for R in range(0, params.R_max + 1):
            tree = build_possible(log, v, t, R)
            if _qualifies(tree, params):
                return RiskyCertificate(t, R, tree.size, tree.boundary_count,
                                        tree.g_radius, tree.depth)
    return None


def rebuild_certificate(instance: LLLInstance, log: ExecutionLog, v: int,
                        cert: RiskyCertificate, params: NarrowParams) -> WitnessTree:
    """Re-derive the certified tree; raises if it no longer qualifies."""
    tree = build_possible(log, v, cert.t, cert.R)
    if (tree.size, tree.boundary_count, tree.g_radius, tree.depth) != (
            cert.size, cert.boundary_count, cert.g_radius, cert.depth):
        raise ValidationError(f"certificate for event {v} does not reproduce")
    if not _qualifies(tree, params):
        raise ValidationError(f"certificate for event {v} does not qualify")
    return tree


def local_risky_flag(instance: LLLInstance, table: RandomnessTable, v: int,
                     params: NarrowParams, ball_radius: int | None = None) -> bool:
    """Recompute v's risky flag from its truncated ball only.

    Runs the resampler inside ball(v, 2 R_max + 2) under the staggered
    schedule anchored at v, then classifies v from the local log.  Locality
    of riskiness predicts agreement with the global computation.
    """
    if ball_radius is None:
        ball_radius = 2 * params.R_max + 2
    region = bfs_distances(instance.graph, v, r_max=ball_radius)
    state = staggered_phase1(instance, table, region, params.phase1_steps)
    local_log = ExecutionLog(instance, state.steps, state.step_vars, terminated=False)
    ts = [t for t, step in enumerate(local_log.steps, start=1) if v in step]
    if not ts:
        return False
    dists = bfs_distances(instance.graph, v, r_max=params.R_max)
    available = sum(1 for step in local_log.steps for u in step if u in dists)
    if available < params.size_threshold:
        return False
    return _find_certificate(local_log, v, ts, params) is not None


# -- insecure subgraph analytics ----------------------------------------------


@dataclass(frozen=True)
class ComponentInfo:
    nodes: tuple[int, ...]
    size: int
    diameter: int
    diameter_exact: bool


@dataclass
class InsecureSubgraph:
    nodes: frozenset[int]
    edges: tuple[tuple[int, int], ...]
    components: list[ComponentInfo]

    def max_component_size(self) -> int:
        return max((c.size for c in self.components), default=0)

    def max_diameter(self) -> int:
        return max((c.diameter for c in self.components), default=0)


def insecure_subgraph(instance: LLLInstance, classification: Classification) -> InsecureSubgraph:
    graph = instance.graph
    nodes = classification.insecure
    edges = tuple(sorted(
        (u, v) for u in nodes for v in graph.adjacency[u] if v in nodes and u < v))
    seen: set[int] = set()
    components = []
    for start in sorted(nodes):
        if start in seen:
            continue
        comp = _component(graph, nodes, start)
        seen.update(comp)
        components.append(_component_info(instance, comp))
    return InsecureSubgraph(nodes, edges, components)


def _component(graph, nodes: frozenset[int], start: int) -> list[int]:
    comp = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for w in graph.adjacency[u]:
            if w in nodes and w not in comp:
                comp.add(w)
                queue.append(w)
    return sorted(comp)


def _component_info(instance: LLLInstance, comp: list[int]) -> ComponentInfo:
    # diameter with respect to distances in the full graph G
    exact = len(comp) <= DIAMETER_CAP
    sources = comp if exact else comp[:64]
    comp_set = set(comp)
    diameter = 0
    for s in sources:
        dists = bfs_distances(instance.graph, s)
        diameter = max(diameter, max(dists.get(u, 0) for u in comp_set))
    return ComponentInfo(tuple(comp), len(comp), diameter, exact)


def ruling_set(instance: LLLInstance, subgraph: InsecureSubgraph,
               alpha: int, beta: int) -> frozenset[int]:
    """Greedy-by-ID (alpha, beta)-ruling set of G' under distances in G."""
    if alpha != beta + 1:
        raise ValidationError("expected alpha == beta + 1")
    chosen: set[int] = set()
    for v in sorted(subgraph.nodes):
        if not _hits_within(instance, v, chosen, alpha - 1):
            chosen.add(v)
    return frozenset(chosen)


def _hits_within(instance: LLLInstance, v: int, targets: set[int], radius: int) -> bool:
    if not targets:
        return False
    if v in targets:
        return True
    seen = {v}
    frontier = [v]
    for _ in range(radius):
        nxt = []
        for u in frontier:
            for w in instance.graph.adjacency[u]:
                if w in targets:
                    return True
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return False


def verify_ruling_set(instance: LLLInstance, subgraph: InsecureSubgraph,
                      rulers: frozenset[int], alpha: int, beta: int) -> bool:
    """Independent BFS recheck of separation and domination."""
    for s in rulers:
        others = rulers - {s}
        if _hits_within(instance, s, others, alpha - 1):
            return False
    for v in subgraph.nodes:
        if not _hits_within(instance, v, set(rulers), beta):
            return False
    return True


@dataclass
class Decomposition:
    assignment: dict[int, tuple[int, int]]   # node -> (color, cluster id)
    colors: int
    cluster_count: int
    max_cluster_diameter: int
    valid: bool


def network_decomposition(instance: LLLInstance, subgraph: InsecureSubgraph,
                          rulers: frozenset[int]) -> Decomposition:
    """Contract insecure nodes to their closest ruler, then greedy-color clusters."""
    if not subgraph.nodes:
        return Decomposition({}, 0, 0, 0, True)
    closest = _closest_ruler(instance, rulers)
    clusters: dict[int, list[int]] = {}
    for v in subgraph.nodes:
        clusters.setdefault(closest[v], []).append(v)
    cluster_ids = sorted(clusters)
    cluster_adj: dict[int, set[int]] = {c: set() for c in cluster_ids}
    for u, v in subgraph.edges:
        cu, cv = closest[u], closest[v]
        if cu != cv:
            cluster_adj[cu].add(cv)
            cluster_adj[cv].add(cu)
    color: dict[int, int] = {}
    for c in cluster_ids:
        used = {color[d] for d in cluster_adj[c] if d in color}
        k = 0
        while k in used:
            k += 1
        color[c] = k
    assignment = {v: (color[closest[v]], closest[v]) for v in subgraph.nodes}
    max_diam = 0
    for c in cluster_ids:
        info = _component_info(instance, sorted(clusters[c]))
        max_diam = max(max_diam, info.diameter)
    valid = _colors_valid(subgraph, assignment)
    return Decomposition(assignment, max(color.values()) + 1, len(cluster_ids),
                         max_diam, valid)


def _closest_ruler(instance: LLLInstance, rulers: frozenset[int]) -> dict[int, int]:
    # multi-source BFS; ties go to the smaller ruler id via seeding order
    owner: dict[int, int] = {}
    queue = deque()
    for r in sorted(rulers):
        owner[r] = r
        queue.append(r)
    while queue:
        u = queue.popleft()
        for w in instance.graph.adjacency[u]:
            if w not in owner:
                owner[w] = owner[u]
                queue.append(w)
    return owner


def _colors_valid(subgraph: InsecureSubgraph, assignment: dict[int, tuple[int, int]]) -> bool:
    for u, v in subgraph.edges:
        cu, ku = assignment[u]
        cv, kv = assignment[v]
        if ku != kv and cu == cv:
            return False
    return True

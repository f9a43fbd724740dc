"""Witness trees extracted from execution logs.

A witness tree explains one resample: scanning the log backwards from the
root's step, every resampled event within graph distance 2 of some tree node
is attached below the deepest such node.  Nodes are copies (event, step), so
the node set is a multiset over events.  The G-radius of a tree is the
maximum graph distance from any node's event to the root's event, and the
boundary is the set of nodes sitting exactly at that radius.

`build_possible` applies the same generation with an admission filter
dist_G(u, root) <= R; its node multiset is nested in R and reaches the
occurring tree once R exceeds the occurring tree's radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError
from .instance import LLLInstance, bfs_distances
from .resampler import ExecutionLog


@dataclass
class WitnessTree:
    instance: LLLInstance
    nodes: list[tuple[int, int]]        # (event id, step); index 0 is the root
    parents: list[int]                  # parent index; -1 for the root
    depths: list[int]
    dist_to_root: list[int]             # graph distance of node's event to root event

    @property
    def root(self) -> tuple[int, int]:
        return self.nodes[0]

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def depth(self) -> int:
        return max(self.depths)

    @property
    def g_radius(self) -> int:
        return max(self.dist_to_root)

    def boundary_nodes(self) -> list[int]:
        """Indices of nodes at graph distance exactly g_radius from the root."""
        r = self.g_radius
        return [i for i, dist in enumerate(self.dist_to_root) if dist == r]

    @property
    def boundary_count(self) -> int:
        return len(self.boundary_nodes())

    def node_multiset(self) -> frozenset[tuple[int, int]]:
        # a (event, step) pair is admitted at most once, so a set suffices
        return frozenset(self.nodes)

    def children(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in self.nodes]
        for i, par in enumerate(self.parents):
            if par >= 0:
                out[par].append(i)
        return out

    def shape(self) -> tuple:
        """Canonical (event, children) form, step labels ignored."""
        kids = self.children()

        def canon(i: int) -> tuple:
            return (self.nodes[i][0], tuple(sorted(canon(c) for c in kids[i])))

        return canon(0)


@dataclass(frozen=True)
class TreeStats:
    size: int
    depth: int
    g_radius: int
    boundary_count: int
    value_indices: tuple[tuple[tuple[int, int], int], ...]


def tree_stats(tree: WitnessTree) -> TreeStats:
    pairs = []
    for i, (event, _step) in enumerate(tree.nodes):
        for var in tree.instance.events[event].vars:
            pairs.append(((i, var), value_index_in_tree(tree, i, var)))
    return TreeStats(tree.size, tree.depth, tree.g_radius, tree.boundary_count,
                     tuple(pairs))


def _build(log: ExecutionLog, v: int, t: int, radius_filter: int | None) -> WitnessTree:
    if not (1 <= t <= log.total_steps) or v not in log.steps[t - 1]:
        raise ValidationError(f"event {v} is not in S_{t}")
    graph = log.graph
    scan_cap = 2 * (t - 1) if radius_filter is None else radius_filter
    dists = bfs_distances(graph, v, r_max=scan_cap)

    nodes: list[tuple[int, int]] = [(v, t)]
    parents = [-1]
    depths = [0]
    node_events = [v]
    for i in range(t - 1, 0, -1):
        additions = []
        for u in sorted(log.steps[i - 1]):
            if radius_filter is not None:
                du = dists.get(u)
                if du is None or du > radius_filter:
                    continue
            best = None
            for j, w in enumerate(node_events):
                if graph.within_two(u, w):
                    key = (depths[j], w, nodes[j][1])  # deepest, then highest ID, then latest step
                    if best is None or key > best[0]:
                        best = (key, j)
            if best is not None:
                additions.append((u, best[1]))
        # all nodes of one step attach against the same snapshot of the tree
        for u, parent_idx in additions:
            nodes.append((u, i))
            parents.append(parent_idx)
            depths.append(depths[parent_idx] + 1)
            node_events.append(u)
    dist_to_root = [dists.get(ev, _far_dist(graph, v, ev)) for ev in node_events]
    return WitnessTree(log.instance, nodes, parents, depths, dist_to_root)


def _far_dist(graph, v: int, ev: int) -> int:
    # only reachable events are ever attached, so a capped BFS miss cannot
    # happen for occurring trees; recompute unbounded as a safety net
    return bfs_distances(graph, v)[ev]


def build_occurring(log: ExecutionLog, v: int, t: int) -> WitnessTree:
    """The unique occurring witness tree rooted at (v, t); requires v in S_t."""
    return _build(log, v, t, None)


def build_possible(log: ExecutionLog, v: int, t: int, R: int) -> WitnessTree:
    """R-possible tree: generation ignores resamples beyond distance R of v."""
    if R < 0:
        raise ValidationError("R must be >= 0")
    return _build(log, v, t, R)


def value_index_in_tree(tree: WitnessTree, node_idx: int, var: int) -> int:
    """Count of tree nodes depending on var at depth >= the node's depth.

    For occurring trees this equals the variable's table index after the
    node's step; it is the module's strongest exact oracle.
    """
    if not (0 <= node_idx < tree.size):
        raise ValidationError(f"node {node_idx} not in tree")
    event = tree.nodes[node_idx][0]
    if var not in tree.instance.events[event].vars:
        raise ValidationError(f"variable {var} is not dependent for event {event}")
    min_depth = tree.depths[node_idx]
    count = 0
    for j, (ev, _step) in enumerate(tree.nodes):
        if tree.depths[j] >= min_depth and var in tree.instance.events[ev].vars:
            count += 1
    return count


def is_narrow(tree: WitnessTree, eps: float) -> bool:
    """At most an eps fraction of nodes on the boundary.

    A single-node tree has radius 0 and its root on the boundary, so it is
    never eps-narrow for eps < 1.
    """
    if not (0.0 < eps < 1.0):
        raise ValidationError("eps must lie in (0, 1)")
    return tree.boundary_count <= eps * tree.size


def root_candidates(log: ExecutionLog):
    """All (v, t) pairs with v in S_t, i.e. every valid witness tree root."""
    for t, step in enumerate(log.steps, start=1):
        for v in sorted(step):
            yield v, t


def max_occurring_tree_size(log: ExecutionLog) -> int:
    """Max size over all occurring trees; 0 for an empty log."""
    best = 0
    for v, t in root_candidates(log):
        best = max(best, build_occurring(log, v, t).size)
    return best


def e_good_threshold(instance: LLLInstance) -> float:
    return 5.0 * instance.log1p_n()


def e_good_holds(log: ExecutionLog) -> bool:
    """True iff no occurring tree reaches size 5 * log_{1/p} n."""
    return max_occurring_tree_size(log) < e_good_threshold(log.instance)


# -- abstract trees (shapes without step labels) ------------------------------


def shape_size(shape: tuple) -> int:
    return 1 + sum(shape_size(c) for c in shape[1])


def shape_events(shape: tuple) -> list[int]:
    out = [shape[0]]
    for c in shape[1]:
        out.extend(shape_events(c))
    return out


def shape_radius_and_boundary(instance: LLLInstance, shape: tuple) -> tuple[int, int]:
    """(g_radius, boundary_count) of an abstract tree on this instance's graph."""
    root = shape[0]
    dists = bfs_distances(instance.graph, root)
    node_dists = [dists[e] for e in shape_events(shape)]
    radius = max(node_dists)
    return radius, sum(1 for d in node_dists if d == radius)


# -- golden dump format --------------------------------------------------------


def dump_tree(tree: WitnessTree) -> str:
    """One node per line: depth<TAB>event_id<TAB>step<TAB>parent_index, root first."""
    lines = []
    for i, (event, step) in enumerate(tree.nodes):
        lines.append(f"{tree.depths[i]}\t{event}\t{step}\t{tree.parents[i]}")
    return "\n".join(lines) + "\n"


def parse_tree_dump(text: str) -> list[tuple[int, int, int, int]]:
    rows = []
    for line in text.strip().splitlines():
        depth, event, step, parent = (int(x) for x in line.split("\t"))
        rows.append((depth, event, step, parent))
    return rows

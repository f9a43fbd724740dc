"""Invariant suites runnable on any instance: the machine-checkable side of
every module, used by the `verify` command and exercised again in CI.

Each check returns (suite, name, passed, detail).  Suites:
  trees           exact structure lemmas on extracted witness trees
  probability     enumeration duality + Monte-Carlo frequency bounds
  classification  parameter sanity, certificates, contrapositive, analytics
  lca             query/global agreement, probe bounds, determinism
  local           meta-run equivalence and round accounting
"""

from __future__ import annotations

from dataclasses import dataclass

from .classify import (
    classify_risky,
    derive_params,
    insecure_subgraph,
    local_risky_flag,
    network_decomposition,
    rebuild_certificate,
    ruling_set,
    verify_ruling_set,
)
from .enumeration import brute_force_shapes, enumerate_trees, tree_count_bound
from .errors import RegimeError
from .instance import LLLInstance
from .lca import LcaSession, structural_probe_bound
from .localsim import run_meta
from .mc import adversarial_scan, mc_shape_frequencies, outside_variables
from .randomness import sample_table
from .resampler import run_cps, value_index_at
from .witness import (
    build_occurring,
    build_possible,
    dump_tree,
    e_good_holds,
    is_narrow,
    parse_tree_dump,
    root_candidates,
    value_index_in_tree,
)

ALL_SUITES = ("trees", "probability", "classification", "lca", "local")


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str


@dataclass
class VerifyReport:
    checks: list[CheckResult]
    non_termination: bool

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "non_termination": self.non_termination,
            "checks": [
                {"suite": c.suite, "name": c.name, "passed": c.passed,
                 "detail": c.detail}
                for c in self.checks
            ],
        }


def run_suites(instance: LLLInstance, seeds: list[int],
               suites: tuple[str, ...] = ALL_SUITES,
               mc_trials: int = 20_000) -> VerifyReport:
    checks: list[CheckResult] = []
    non_term = False
    runs = []
    for seed in seeds:
        table = sample_table(instance, seed)
        log, values = run_cps(instance, table)
        non_term = non_term or not log.terminated
        runs.append((seed, table, log, values))

    if "trees" in suites:
        checks.extend(_suite_trees(instance, runs))
    if "probability" in suites:
        checks.extend(_suite_probability(instance, seeds[0] if seeds else 0, mc_trials))
    if "classification" in suites:
        checks.extend(_suite_classification(instance, runs))
    if "lca" in suites:
        checks.extend(_suite_lca(instance, seeds))
    if "local" in suites:
        checks.extend(_suite_local(instance, seeds))
    return VerifyReport(checks, non_term)


def _suite_trees(instance, runs) -> list[CheckResult]:
    shape_ok, shape_n = True, 0
    varspec_ok, varspec_n = True, 0
    nesting_ok = True
    dump_ok = True
    narrow_ok = True
    for _seed, _table, log, _values in runs:
        for v, t in root_candidates(log):
            tree = build_occurring(log, v, t)
            shape_n += 1
            if not (tree.depth == t - 1 and tree.size >= t
                    and tree.g_radius <= 2 * (t - 1)):
                shape_ok = False
            for i, (ev, step) in enumerate(tree.nodes):
                for var in instance.events[ev].vars:
                    varspec_n += 1
                    if value_index_in_tree(tree, i, var) != value_index_at(log, var, step):
                        varspec_ok = False
            prev = None
            for radius in range(0, 2 * (t - 1) + 2):
                pt = build_possible(log, v, t, radius)
                ms = pt.node_multiset()
                if prev is not None and not prev <= ms:
                    nesting_ok = False
                prev = ms
                if radius > tree.g_radius and ms != tree.node_multiset():
                    nesting_ok = False
            if tree.size == 1 and is_narrow(tree, 0.099):
                narrow_ok = False
            rows = parse_tree_dump(dump_tree(tree))
            if [(r[0], r[1], r[2], r[3]) for r in rows] != [
                    (tree.depths[i], tree.nodes[i][0], tree.nodes[i][1], tree.parents[i])
                    for i in range(tree.size)]:
                dump_ok = False
    return [
        CheckResult("trees", "shape_lemma", shape_ok, f"{shape_n} trees"),
        CheckResult("trees", "value_index_equality", varspec_ok, f"{varspec_n} node/var pairs"),
        CheckResult("trees", "possible_nesting", nesting_ok, "node multisets nested in R"),
        CheckResult("trees", "single_node_not_narrow", narrow_ok, "radius-0 boundary rule"),
        CheckResult("trees", "dump_round_trip", dump_ok, "tab-separated dump"),
    ]


def _suite_probability(instance, seed, mc_trials) -> list[CheckResult]:
    out = []
    graph = instance.graph
    try:
        sample_roots = list(range(min(3, instance.n)))
        dual_ok = True
        bound_ok = True
        for v in sample_roots:
            enum = set(enumerate_trees(graph, v, 4))
            brute = brute_force_shapes(graph, v, 4)
            if enum != brute:
                dual_ok = False
            if graph.d >= 1 and len(enum) >= tree_count_bound(graph.d, 4):
                bound_ok = False
        out.append(CheckResult("probability", "enumeration_duality", dual_ok,
                               f"{len(sample_roots)} roots, size <= 4"))
        out.append(CheckResult("probability", "enumeration_bound", bound_ok,
                               "count < (5 d^2)^k"))
    except RegimeError:
        out.append(CheckResult("probability", "enumeration_duality", True,
                               "skipped: instance outside exhaustive regime"))

    targets = _generic_targets(instance)
    if instance.num_vars > 256:
        out.append(CheckResult("probability", "mc_frequency_bounds", True,
                               "skipped: instance too large for trial batches"))
    elif targets and instance.p > 0:
        results = mc_shape_frequencies(instance, targets, mc_trials, seed)
        mc_ok = all(r.within_bound() for r in results)
        detail = "; ".join(
            f"{r.mode} f={r.frequency:.4g} b={r.bound:.4g}" for r in results)
        out.append(CheckResult("probability", "mc_frequency_bounds", mc_ok, detail))
        pair = next((s for s, m in targets if m == "possible"), None)
        if pair is not None and len(outside_variables(instance, pair)) <= 6:
            scan = adversarial_scan(instance, pair, max(2000, mc_trials // 4),
                                    seed + 1, check=False)
            out.append(CheckResult(
                "probability", "adversarial_outside", all(r.within_bound() for r in scan),
                f"{len(scan)} constant settings"))
    return out


def _generic_targets(instance) -> list[tuple[tuple, str]]:
    """A few small shapes that are plausible on this instance's graph."""
    targets: list[tuple[tuple, str]] = []
    graph = instance.graph
    for v in range(min(2, instance.n)):
        targets.append(((v, ()), "occurring"))
    for v in range(instance.n):
        smaller = [u for u in graph.adjacency[v] if u < v]
        if smaller:
            shape = (v, ((smaller[0], ()),))
            targets.append((shape, "occurring"))
            targets.append((shape, "possible"))
            break
    return targets


def _suite_classification(instance, runs) -> list[CheckResult]:
    params = derive_params(instance)
    p_ok = params.size_threshold >= 1 and params.R_max >= 0 and params.phase1_steps >= 1
    cert_ok = True
    closure_ok = True
    contrapositive_ok = True
    rs_ok = True
    nd_ok = True
    locality_ok = True
    locality_n = 0
    for seed, table, log, _values in runs:
        prefix = log.truncated(min(params.phase1_steps, log.total_steps))
        cls = classify_risky(instance, prefix, params)
        for v, cert in cls.certificates.items():
            try:
                rebuild_certificate(instance, prefix, v, cert, params)
            except Exception:
                cert_ok = False
        expected = set(cls.risky)
        for v in cls.risky:
            expected.update(instance.graph.adjacency[v])
        if expected != set(cls.insecure):
            closure_ok = False
        if e_good_holds(log):
            for t, step in enumerate(log.steps, start=1):
                if t >= params.phase1_steps and any(
                        v not in cls.insecure for v in step):
                    contrapositive_ok = False
        sub = insecure_subgraph(instance, cls)
        alpha = 2 * params.R_max + 5  # 4(lambda+2)ell + 5 at the integer scale
        rulers = ruling_set(instance, sub, alpha, alpha - 1)
        if not verify_ruling_set(instance, sub, rulers, alpha, alpha - 1):
            rs_ok = False
        decomp = network_decomposition(instance, sub, rulers)
        if not decomp.valid:
            nd_ok = False
        for v in sorted(cls.risky)[:3] + list(range(min(2, instance.n))):
            locality_n += 1
            local = local_risky_flag(instance, table, v, params)
            if local != (v in cls.risky):
                locality_ok = False
    return [
        CheckResult("classification", "params_sane", p_ok, str(params.as_dict())),
        CheckResult("classification", "certificates_rebuild", cert_ok, "exact reproduction"),
        CheckResult("classification", "insecure_closure", closure_ok, "risky + neighbors"),
        CheckResult("classification", "late_steps_insecure", contrapositive_ok,
                    "no secure event past phase 1 under E_good"),
        CheckResult("classification", "ruling_set_verified", rs_ok, "BFS recheck"),
        CheckResult("classification", "decomposition_valid", nd_ok,
                    "same-color clusters non-adjacent"),
        CheckResult("classification", "risky_locality", locality_ok,
                    f"{locality_n} truncated-ball recomputations"),
    ]


def _suite_lca(instance, seeds) -> list[CheckResult]:
    agree_ok = True
    bound_ok = True
    det_ok = True
    volume_ok = True
    checked = 0
    for seed in seeds:
        session = LcaSession(instance, seed)
        _, global_values = session.global_run()
        sample = range(0, instance.n, max(1, instance.n // 10))
        for v in sample:
            values, stats = session.query(v)
            checked += 1
            if not stats.fallback:
                if any(global_values[var] != val for var, val in values.items()):
                    agree_ok = False
            if stats.probes > structural_probe_bound(instance, session.params,
                                                     stats.explored):
                bound_ok = False
            values2, stats2 = session.query(v)
            if values2 != values or stats2.probes != stats.probes:
                det_ok = False
        vol = LcaSession(instance, seed, volume_mode=True)
        try:
            vol.query(0)
        except Exception:
            volume_ok = False
    return [
        CheckResult("lca", "query_matches_global", agree_ok, f"{checked} queries"),
        CheckResult("lca", "probe_bound_structural", bound_ok, "ball-sum bound"),
        CheckResult("lca", "query_determinism", det_ok, "repeat queries identical"),
        CheckResult("lca", "volume_connectivity", volume_ok, "probed region connected"),
    ]


def _suite_local(instance, seeds) -> list[CheckResult]:
    equiv_ok = True
    rounds_ok = True
    hist_ok = True
    fallbacks = 0
    for seed in seeds:
        values, report = run_meta(instance, seed)
        table = sample_table(instance, seed)
        log, global_values = run_cps(instance, table)
        if values != global_values:
            equiv_ok = False
        if report.fallback_used:
            fallbacks += 1
        if any(r < report.secure_round for r in report.rounds):
            rounds_ok = False
        if report.node_averaged > report.worst_case + 1e-9:
            rounds_ok = False
        if sum(n for _r, n in report.round_histogram()) != instance.n:
            hist_ok = False
    return [
        CheckResult("local", "output_equivalence", equiv_ok,
                    f"{len(seeds)} seeds, {fallbacks} fallbacks"),
        CheckResult("local", "round_accounting", rounds_ok,
                    "insecure rounds >= secure round; mean <= max"),
        CheckResult("local", "histogram_complete", hist_ok, "counts sum to n"),
    ]

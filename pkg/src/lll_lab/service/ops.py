"""Service operations: the shared implementation behind both the HTTP routes
and the CLI subcommands (the CLI is a thin in-process client of these)."""

from __future__ import annotations

import importlib.resources as resources
import json

from ..classify import derive_params, insecure_subgraph, network_decomposition, ruling_set, verify_ruling_set
from ..errors import ValidationError
from ..generators import gen_hypergraph_coloring, gen_ksat
from ..instance import LLLInstance, check_criterion, instance_from_doc, instance_to_doc, load_instance
from ..lca import LcaSession
from ..localsim import run_meta
from ..randomness import sample_table
from ..resampler import run_cps, run_report
from ..sweep import SweepConfig, rows_to_csv, run_sweep
from ..verify import ALL_SUITES, run_suites
from . import schemas as sc


def build_instance(spec: sc.GeneratorSpec) -> LLLInstance:
    if spec.kind == "ksat":
        return gen_ksat(spec.num_clauses, spec.k, spec.max_occurrence, spec.seed)
    return gen_hypergraph_coloring(spec.num_edges, spec.edge_size,
                                   spec.max_degree, spec.num_colors, spec.seed)


def resolve_instance(ref: sc.InstanceRef) -> LLLInstance:
    if ref.path is not None:
        return load_instance(ref.path)
    if ref.document is not None:
        return instance_from_doc(ref.document)
    return build_instance(ref.generator)


def bundled_tiny_instance() -> LLLInstance:
    data = resources.files("lll_lab").joinpath("data/tiny.json").read_text()
    return instance_from_doc(json.loads(data))


def gen_op(req: sc.GenRequest) -> sc.GenResponse:
    instance = build_instance(req.generator)
    crit = check_criterion(instance, req.criterion_delta)
    return sc.GenResponse(
        document=instance_to_doc(instance),
        n=instance.n, d=instance.d, p=instance.p, num_vars=instance.num_vars,
        criterion=sc.CriterionModel(**crit.__dict__),
    )


def run_op(req: sc.RunRequest) -> sc.RunReportModel:
    instance = resolve_instance(req.instance)
    table = sample_table(instance, req.seed)
    log, values = run_cps(instance, table, req.max_steps)
    return sc.RunReportModel(**run_report(log, values, req.seed))


def classify_op(req: sc.ClassifyRequest) -> sc.ClassifyResponse:
    instance = resolve_instance(req.instance)
    params = derive_params(instance, eps_override=req.eps)
    _values, report = run_meta(instance, req.seed, params=params,
                               max_steps=req.max_steps)
    cls = report.classification
    sub = insecure_subgraph(instance, cls)
    alpha = 2 * params.R_max + 5
    rulers = ruling_set(instance, sub, alpha, alpha - 1)
    verified = verify_ruling_set(instance, sub, rulers, alpha, alpha - 1)
    decomp = network_decomposition(instance, sub, rulers)
    return sc.ClassifyResponse(
        seed=req.seed,
        params=sc.ParamsModel.model_validate(params.as_dict()),
        risky_count=len(cls.risky),
        insecure_count=len(cls.insecure),
        components=[sc.ComponentModel(size=c.size, diameter=c.diameter)
                    for c in sub.components],
        decomposition=sc.DecompositionModel(
            colors=decomp.colors, max_cluster_diameter=decomp.max_cluster_diameter,
            cluster_count=decomp.cluster_count, valid=decomp.valid),
        ruling_set_size=len(rulers),
        ruling_set_verified=verified,
        local=sc.LocalReportModel(
            node_averaged=report.node_averaged, worst_case=report.worst_case,
            phase1_steps=report.phase1_steps, secure_round=report.secure_round,
            insecure_fraction=report.insecure_fraction, e_good=report.e_good,
            fallback_used=report.fallback_used, terminated=report.terminated,
            T_global=report.T_global),
        round_histogram=report.round_histogram(),
    )


def query_op(req: sc.QueryRequest) -> sc.QueryResponse:
    instance = resolve_instance(req.instance)
    session = LcaSession(instance, req.seed, volume_mode=req.volume_mode)
    values, stats = session.query(req.node)
    return sc.QueryResponse(
        node=req.node, values=values, probes=stats.probes,
        explored_nodes=stats.explored_nodes, component_size=stats.component_size,
        rounds_simulated=stats.rounds_simulated, fallback=stats.fallback,
    )


def verify_op(req: sc.VerifyRequest) -> sc.VerifyResponse:
    instance = (resolve_instance(req.instance) if req.instance is not None
                else bundled_tiny_instance())
    suites = tuple(req.suites) if req.suites else ALL_SUITES
    unknown = [s for s in suites if s not in ALL_SUITES]
    if unknown:
        raise ValidationError(f"unknown suites: {unknown}")
    report = run_suites(instance, req.seeds, suites, mc_trials=req.mc_trials)
    return sc.VerifyResponse(
        passed=report.passed,
        non_termination=report.non_termination,
        checks=[sc.CheckModel(**c.__dict__) for c in report.checks],
    )


def sweep_op(req: sc.SweepRequest) -> sc.SweepResponse:
    config = SweepConfig(
        param=req.param, values=list(req.values), seeds=list(req.seeds),
        num_clauses=req.num_clauses, k=req.k, max_occurrence=req.max_occurrence,
        instance_seed=req.instance_seed, query_samples=req.query_samples,
    )
    rows, non_term = run_sweep(config)
    return sc.SweepResponse(csv=rows_to_csv(rows), rows=rows, non_termination=non_term)

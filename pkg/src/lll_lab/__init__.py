"""lll-lab: a simulation and verification lab for resampling-based Lovász
Local Lemma algorithms.

Core surface:
  instance    variables, bad events, exact probabilities, dependency graph
  generators  bounded-occurrence k-SAT and hypergraph coloring instances
  randomness  replayable counter-mode randomness tables
  resampler   the resample-locally-minimal-IDs algorithm and its logs
  witness     witness trees, structure lemmas, enumeration, MC bounds
  classify    risky/insecure events, insecure-subgraph analytics
  localsim    LOCAL meta-run with node-averaged round accounting
  lca         per-node queries with probe accounting
  service     FastAPI wrapper; cli is a thin client of it
"""

from .instance import (
    BadEvent,
    DependencyGraph,
    LLLInstance,
    Variable,
    ball,
    build_dependency_graph,
    check_criterion,
    eval_event,
    event_probability,
    load_instance,
    save_instance,
)
from .randomness import RandomnessTable, sample_table, value
from .resampler import ExecutionLog, locally_minimal, run_cps, satisfied_events, value_index_at
from .witness import WitnessTree, build_occurring, build_possible, is_narrow, max_occurring_tree_size
from .classify import NarrowParams, classify_risky, derive_params, insecure_subgraph
from .localsim import LocalRunReport, node_averaged, run_meta
from .lca import LcaSession, ProbeStats, query

__version__ = "0.1.0"

__all__ = [
    "BadEvent", "DependencyGraph", "LLLInstance", "Variable",
    "ball", "build_dependency_graph", "check_criterion", "eval_event",
    "event_probability", "load_instance", "save_instance",
    "RandomnessTable", "sample_table", "value",
    "ExecutionLog", "locally_minimal", "run_cps", "satisfied_events", "value_index_at",
    "WitnessTree", "build_occurring", "build_possible", "is_narrow",
    "max_occurring_tree_size",
    "NarrowParams", "classify_risky", "derive_params", "insecure_subgraph",
    "LocalRunReport", "node_averaged", "run_meta",
    "LcaSession", "ProbeStats", "query",
    "__version__",
]

"""Fault-tolerant online bin packing with primary/standby replicas.

The package bundles the placement engine and its failure/recovery
adjustment, an independent validity checker, a brute-force optimal oracle,
a weight auditor for the competitive analysis, trace tooling, and a CLI.
"""

from .model import (
    Config,
    InvariantViolationError,
    PackingState,
    TraceError,
    format_ratio,
    parse_ratio,
)
from .classify import ClassConstants, classify
from .checker import Packing, Verdict, check_static_validity, packing_from_document
from .invariants import check_runtime_invariants
from .oracle import dedicated_baseline, optimal_packing
from .trace import Event, SimResult, generate_trace, run_trace
from .weights import (
    WeightReport,
    audit_algorithm_packing,
    audit_opt_bin,
    exception_bound,
    replica_weight,
    total_weight,
)

__all__ = [
    "ClassConstants",
    "Config",
    "Event",
    "InvariantViolationError",
    "Packing",
    "PackingState",
    "SimResult",
    "TraceError",
    "Verdict",
    "WeightReport",
    "audit_algorithm_packing",
    "audit_opt_bin",
    "check_runtime_invariants",
    "check_static_validity",
    "classify",
    "dedicated_baseline",
    "exception_bound",
    "format_ratio",
    "generate_trace",
    "optimal_packing",
    "packing_from_document",
    "parse_ratio",
    "replica_weight",
    "run_trace",
    "total_weight",
]

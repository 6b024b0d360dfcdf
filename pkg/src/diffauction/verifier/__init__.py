"""Incentive auditing, instance generation and the GIDM counter-example."""

from .audit import (
    AuditResult,
    CorpusSummary,
    DeviationReport,
    IRViolation,
    MechanismFailure,
    audit,
    audit_corpus,
    check_ir,
    check_strategy_proof,
    replay,
)
from .counterexample import (
    CounterexampleError,
    narrative_violations,
    reconstruct_gidm_counterexample,
    search_counterexamples,
)
from .deviations import Deviation, DeviationLimitError, deviation_set, neighbor_subsets
from .generate import DISTRIBUTIONS, TOPOLOGIES, gen_corpus, gen_instance

__all__ = [
    "DISTRIBUTIONS",
    "TOPOLOGIES",
    "AuditResult",
    "CorpusSummary",
    "CounterexampleError",
    "Deviation",
    "DeviationLimitError",
    "DeviationReport",
    "IRViolation",
    "MechanismFailure",
    "audit",
    "audit_corpus",
    "check_ir",
    "check_strategy_proof",
    "deviation_set",
    "gen_corpus",
    "gen_instance",
    "narrative_violations",
    "neighbor_subsets",
    "reconstruct_gidm_counterexample",
    "replay",
    "search_counterexamples",
]

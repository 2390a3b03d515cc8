from histstream.harness.audit import AuditConfig, AuditResult, run_audit
from histstream.harness.experiment import ExperimentConfig, ExperimentResult, run_experiment
from histstream.harness.structure import StructureReport, check_structure

__all__ = [
    "AuditConfig",
    "AuditResult",
    "ExperimentConfig",
    "ExperimentResult",
    "StructureReport",
    "check_structure",
    "run_audit",
    "run_experiment",
]

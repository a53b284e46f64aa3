from .model import (
    ConstraintReport,
    IlpModel,
    VariableAssignment,
    build_model,
    check_assignment,
    encode_path,
    export_lp,
)
from .oracle import DEFAULT_NODE_LIMIT, InstanceTooLarge, brute_force_optimal, brute_force_simple

__all__ = [
    "ConstraintReport",
    "DEFAULT_NODE_LIMIT",
    "IlpModel",
    "InstanceTooLarge",
    "VariableAssignment",
    "brute_force_optimal",
    "brute_force_simple",
    "build_model",
    "check_assignment",
    "encode_path",
    "export_lp",
]

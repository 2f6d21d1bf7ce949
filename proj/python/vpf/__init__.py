"""Viscoelastic phase-field tumour growth: meshes, tensor calculus, runs."""

from ._vpf import (
    Box,
    ConfigError,
    LambdaElement,
    MeshError,
    ModelParams,
    RunConfig,
    RunControl,
    Segment,
    SolverError,
    SpdError,
    TriMesh,
    apply_config_text,
    build_lambda,
    build_structured,
    chain_rule_residual,
    chain_rule_sweep,
    gradient_log_sweep,
    lambda_consistency_order,
    norm_equiv_sweep,
    preset_config,
    preset_names,
    refine_near_interface,
    run,
    write_vtk,
)

__all__ = [
    "Box",
    "ConfigError",
    "LambdaElement",
    "MeshError",
    "ModelParams",
    "RunConfig",
    "RunControl",
    "Segment",
    "SolverError",
    "SpdError",
    "TriMesh",
    "apply_config_text",
    "build_lambda",
    "build_structured",
    "chain_rule_residual",
    "chain_rule_sweep",
    "gradient_log_sweep",
    "lambda_consistency_order",
    "norm_equiv_sweep",
    "preset_config",
    "preset_names",
    "refine_near_interface",
    "run",
    "write_vtk",
]

"""Maxwell eigenvalues with vector Lagrange elements on macro-element meshes."""
from .assemble import assemble_mass, assemble_mixed, assemble_rot_rot
from .bench import (ExperimentConfig, Perturbation, reference_spectrum, run_convergence,
                    run_spectrum)
from .eig import EigenResult, lowest_nonzero, solve_generalized, spectrum_error
from .estimators import LagrangeMaxwellEigensolver, MacroSplit
from .fespace import build_pressure_space, build_scalar_space, build_vector_space
from .mesh import (Mesh, MeshError, generate_jittered, generate_structured, perturb_vertices,
                   plant_near_singular_vertex, read_mesh, write_mesh)
from .refine import RefinedMesh, clough_tocher, powell_sabin, refine
from .singular import classify, theta
from .verify import check_exactness, infsup_constant, scott_zhang, solve_source

__version__ = "0.1.0"

__all__ = [
    "Mesh", "MeshError", "RefinedMesh", "EigenResult", "ExperimentConfig", "Perturbation",
    "MacroSplit", "LagrangeMaxwellEigensolver",
    "generate_structured", "generate_jittered", "perturb_vertices", "plant_near_singular_vertex",
    "read_mesh", "write_mesh", "powell_sabin", "clough_tocher", "refine", "classify", "theta",
    "build_vector_space", "build_scalar_space", "build_pressure_space",
    "assemble_rot_rot", "assemble_mass", "assemble_mixed",
    "solve_generalized", "lowest_nonzero", "spectrum_error",
    "check_exactness", "infsup_constant", "solve_source", "scott_zhang",
    "reference_spectrum", "run_spectrum", "run_convergence",
]

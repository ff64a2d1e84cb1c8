"""DG discretization of Friedrichs' systems with domain-decomposed ROMs."""

from .mesh import build_cartesian_mesh, partition_stripes, partition_from_labels
from .systems import (
    FriedrichsSystem, BoundaryCheckResult, check_axioms, boundary_D,
    make_adr_system, make_elasticity_system_2d, make_maxwell_matrices,
    make_advection_reaction_system, make_reaction_system, dissipative_transform,
)
from .dg import DGSpace, AssembledSystem, NormReport, assemble, solve, norms, convergence_study
from .rom import (
    SnapshotSet, ReducedBasis, EstimatorReport, pod, project, online_solve,
    estimate, write_snapshots, read_snapshots, train_test_split,
)
from .ddrom import (
    BlockSystem, LocalBases, IndicatorField, block_assemble, local_pod,
    block_project, block_solve, add_interface_penalty, identity_bases,
    indicator_variance, indicator_grassmannian, repartition, reconstruction_scan,
)
from .families import (
    ParametricFamily, get_family, manufactured_adr, advection_strip,
    synthetic_rank_one_snapshots,
)
from .config import ConfigError, load_config, validate_config, config_hash

__version__ = "0.1.0"

"""Mean-field phase diagrams, Gaussian fluctuations and ground-state
factorization for collective spin-boson models."""

from .errors import (
    BadDataset,
    BadPartition,
    ConfigError,
    EmsymError,
    NotBroken,
    NotStationary,
    OnBoundary,
    OutOfMemoryBudget,
    Unstable,
)
from .landau import (
    CouplingPair,
    LandauPhase,
    MfPoint,
    MfSolution,
    SymmetryClass,
    classify_symmetry,
    fluctuation_curvatures,
    mf_energy,
    minimize_mf,
)
from .quadratic import (
    GaussianGround,
    QuadraticBosonForm,
    SymplecticSpectrum,
    diagonalize,
    entanglement_entropy,
    ground_state_covariance,
    is_particle_conserving,
)
from .dicke import (
    DickeParams,
    DickePhase,
    SpinBosonMf,
    classify_lines,
    effective_hamiltonian,
    ground_state_entropy,
    mean_field,
    quadratic_expansion,
)
from .lattice import (
    LatticeGeometry,
    LatticeParams,
    critical_coupling,
    effective_lattice_hamiltonian,
    factorization_residual,
    mean_field_uniform,
    verify_uniform_minimum,
)
from .lmg import (
    BlochMf,
    LmgParams,
    LmgPhase,
    block_entropy,
    curvatures,
    entanglement_curve,
    locate_factorization_crossing,
    rotated_hamiltonian,
    symmetry_residual,
    two_block_form,
)
from .ed import EdResult, dicke_ed, lmg_ed, product_fidelity, quadratic_ed
from .scan import ScanConfig, ScanDataset, emit_csv, emit_json, load_config, run_scan

__version__ = "0.1.0"

"""Canonical quantization toolkit for nonreciprocal superconducting circuits.

Takes a lumped-element netlist with capacitors, inductors, Josephson
junctions, phase-slip junctions, Belevitch transformers and ideal
gyrators/circulators, and produces the canonical quadratic-plus-cosine
Hamiltonian together with its symplectic normal-mode decomposition,
backed by an independent time-domain oracle.
"""

from .errors import (
    BadParamsError,
    BadSignError,
    BlockPartitionError,
    ConstraintViolationError,
    DanglingNodeError,
    DegeneratePairError,
    DimensionMismatchError,
    DisconnectedError,
    InfeasibleTreeError,
    InvalidImmittanceError,
    MatrixShapeError,
    ModeViolationError,
    NetlistError,
    NetlistSyntaxError,
    NoAdmittanceError,
    NoImpedanceError,
    NonConvergenceError,
    NonPositiveValueError,
    NotOrthogonalError,
    NotPositiveDefiniteError,
    NrcircError,
    NumericError,
    PairingFailureError,
    SingularKineticError,
    SingularMatrixError,
    SingularProjectionError,
    TopologyError,
    TopologyUnsupportedError,
    TransformerLoopError,
    UnknownClassError,
    UnknownElementError,
)
from .fixtures import FIXTURES, circulator_jj, fixture, nr_blackbox_fig2, vd_gyrator, z_circulator_ps
from .graph import (
    Branch,
    CircuitGraph,
    LoopMatrix,
    TreeChordPartition,
    block,
    build_graph,
    loop_matrix,
    select_tree,
)
from .hamiltonian import (
    ChargeDualHamiltonian,
    PotentialTerm,
    QuadraticFluxHamiltonian,
    assemble_bkd,
    assemble_burkard,
    assemble_charge_dual,
    assemble_sdevice,
    hamiltonian_value,
)
from .immittance import (
    ImmittanceDescription,
    cyclic_circulator,
    gyrator_scattering,
    ideal_circulator,
    immittance_convert,
)
from .netlist import (
    Capacitor,
    ExternalFlux,
    Inductor,
    JosephsonJunction,
    Netlist,
    NonreciprocalDevice,
    PhaseSlip,
    TransformerBank,
    parse_netlist,
    render_netlist,
)
from .oracle import (
    ResidualReport,
    Trajectory,
    integrate_full_sdevice,
    integrate_hamiltonian,
    kirchhoff_residual,
    linearized_frequencies,
)
from .reducer import (
    CirculatorSpectrum,
    EffectiveLoops,
    ReductionRecord,
    circulator_spectrum,
    eliminate_transformers,
    freeze_reduction,
    real_basis,
)
from .symplectic import (
    HarmonicBlock,
    LadderMap,
    ModeReport,
    NormalModes,
    ladder_map,
    mode_frequencies,
    mode_report,
    normal_coordinates,
    omega_spectrum,
    williamson,
)
from .units import PHI0, PHI0_BAR, E_CHARGE, PhysicalConstants

__version__ = "0.1.0"

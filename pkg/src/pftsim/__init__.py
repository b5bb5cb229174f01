"""Exact simulation of perfect state and function transfer on engineered hopping lattices."""

__version__ = "0.1.0"

from .lattice import (
    CouplingError,
    CouplingProfile,
    LatticeDims,
    LatticeError,
    UnsupportedSizeError,
    as_dims,
    coupling_profile,
    i_power,
    magnetic_number,
    mirror_site,
    pst_time,
    signature,
)
from .wigner import (
    MAX_TWO_L,
    WignerD,
    quarter_turn_phase,
    wigner_d,
    wigner_d_oracle,
    wigner_d_sum,
)
from .dynamics import (
    AmplitudeVector,
    DenseOperator,
    QuasiAngularMomentum,
    apply_propagator,
    chain_hamiltonian,
    chain_hamiltonian_from_profile,
    commutator_norm,
    disorder_perturb,
    fidelity_sweep,
    lattice_hamiltonian,
    mirror_arrival_phase,
    mirror_permutation,
    propagator_analytic,
    propagator_analytic_1d,
    propagator_numeric,
    quasi_L,
    transfer_amplitude,
)
from .fock import (
    BOSON,
    FERMION,
    HARDCORE,
    SPIN_DOWN,
    SPIN_UP,
    DegenerateFunctionError,
    FockBasis,
    FockVector,
    HardcoreEquivalenceReport,
    ModeIndex,
    MultiSectorState,
    PolynomialFunction,
    TransferReport,
    apply_annihilation,
    apply_creation,
    build_hopping,
    build_one_body,
    build_onsite_repulsion,
    build_quasi_L_fock,
    build_total_spin,
    entangled_transfer_check,
    enumerate_basis,
    evolve_fock,
    fit_transfer,
    function_transfer_check,
    hardcore_equivalence_check,
    no_init_transfer_check,
    qubit_transfer_check,
    state_from_function,
)
from .dressing import (
    DressedTransferReport,
    DressingSpec,
    dress,
    dressed_transfer_check,
    lz_dressing_unitary,
    random_unitary,
)

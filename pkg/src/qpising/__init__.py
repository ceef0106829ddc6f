"""Quasiperiodic kicked-Ising Floquet circuit simulator.

Dense state-vector and MPS/TEBD backends for the driven Ising model with a
quasiperiodic longitudinal field on 1D chains and heavy-hexagonal lattices,
plus the crossover diagnostics (autocorrelation, quantum Fisher
information, entanglement entropy) and a sweep CLI.
"""

from .circuit import (
    Circuit,
    FloquetParams,
    Gate,
    build_floquet_cycle,
    circuit_unitary,
    gate_unitary,
    repeat_cycles,
    transpile_to_clifford_set,
)
from .errors import (
    AdjacencyError,
    AngleWindowError,
    CapacityError,
    ColoringError,
    ConfigError,
    InsufficientDataError,
    NumericalInvariantError,
    QpIsingError,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .lattice import (
    LatticeSpec,
    QpFieldParams,
    assign_qp_fields,
    build_chain,
    build_heavy_hex,
    load_coupling_map,
)
from .mps import (
    MpsState,
    mps_all_expect_z,
    mps_apply_one_site,
    mps_apply_two_site,
    mps_bond_entropy,
    mps_expect_z,
    mps_init_all_up,
    mps_run_circuit,
    mps_zz_moments,
)
from .observables import (
    FitResult,
    HaarBaseline,
    InitialPattern,
    ObservableSeries,
    autocorrelation,
    fit_log_in_t,
    fit_power_law_in_w,
    haar_qfi_baseline,
    qfi_exact,
    qfi_from_moments,
    qfi_from_samples,
)
from .sv import (
    NoiseSpec,
    StateVector,
    apply_gate,
    expect_z,
    half_cut_entropy,
    init_all_up,
    load_state,
    run_circuit,
    sample_bitstrings,
    save_state,
)

__version__ = "0.1.0"

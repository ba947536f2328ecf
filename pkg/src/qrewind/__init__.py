"""Rewinding unknown quantum states with partial-swap ancilla protocols."""

from .channel import (
    SwapSchedule,
    dme_error_bound,
    dme_error_term,
    partial_swap_evolve,
    partial_swap_step,
    partial_swap_step_joint,
    swap_operator,
)
from .complexity import (
    ComplexityEstimate,
    EntropySpec,
    max_top_eigenvalue,
    max_top_eigenvalue_search,
    steps_high_entropy,
    steps_known_hamiltonian,
)
from .errors import (
    ConvergenceError,
    DegenerateHamiltonianError,
    EmptySubspaceError,
    InfiniteThresholdError,
    ResourceBudgetError,
)
from .linalg import (
    eig_hermitian,
    expm_hermitian_scaled,
    max_eigenvalue,
    partial_trace_ancilla,
    spectral_norm,
    tensor_product,
    trace_distance,
    von_neumann_entropy,
)
from .protocol import (
    AncillaSpec,
    ReversalReport,
    complement_ancilla,
    energy_truncate,
    estimate_net_shift,
    net_accuracy,
    net_accuracy_frozen,
    optimal_beta,
    optimal_beta_frozen,
    run_reversal,
    thermal_ancilla,
    thermal_error_bound,
    thermal_linearization_error,
    threshold_rate,
)
from .sampling import SplitMix64, gue_hamiltonian, random_density, random_pure_state
from .states import DensityMatrix, Hamiltonian
from .wavepacket import (
    SpreadEstimate,
    WavePacketConfig,
    WavepacketCost,
    cost_from_protocol_bound,
    diagonal_swap_evolve,
    free_hamiltonian,
    lorentzian_packet,
    position_density,
    reversal_cost,
    spread_and_refocus,
    spread_estimate,
    spread_partition_sum,
    spread_width,
)

__version__ = "0.1.0"

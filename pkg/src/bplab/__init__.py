"""bplab: a statevector laboratory for barren plateaus in layered 1D
parametrized circuits."""

__version__ = "0.1.0"

from .circuit import (
    CircuitLayout,
    FromValues,
    HardLimit,
    ParamVector,
    Partitioned,
    Random,
    RegisterSpec,
    apply_circuit,
    build_layout,
    gate_unitary,
    generator_matrix,
    init_params,
)
from .entanglement import (
    ChoiState,
    Partition,
    bipartite_entropy,
    choi_state,
    collective_entropy,
    default_partition,
    mixing_metric,
    mutual_information_sum,
)
from .errors import ConfigurationError, NumericError, TopologyError
from .gradients import (
    GradientVector,
    VarianceReport,
    finite_difference_grad,
    grad_cost,
    grad_expectation,
    grad_variance_estimate,
)
from .groundstates import (
    CompressorDataset,
    LongRangeHamiltonian,
    build_matrix,
    ground_state,
    make_compressor_dataset,
    random_hamiltonian,
)
from .observables import (
    CostFunction,
    ObservableSum,
    PauliString,
    cost_value,
    expectation,
    pauli_string,
    x_magnetization,
    z_magnetization,
)
from .qcore import (
    ATOL_SPECTRAL,
    ATOL_STRUCTURAL,
    DensityMatrix,
    HermitianMatrix,
    StateVector,
    apply_two_qubit,
    hermitian_eig,
    partial_trace,
    zero_state,
)
from .training import (
    AMSGradConfig,
    AMSGradState,
    LangevinConfig,
    RegularizationConfig,
    TrainReport,
    amsgrad_step,
    langevin_gradient,
    pretrain_minimize_sc,
    regularized_gradient,
    train,
)

"""Classical capacities of single-mode phase-insensitive Gaussian channels."""

__version__ = "0.1.0"

from .gaussian_core import (
    ChannelKind,
    ChannelParams,
    DomainError,
    GaussianState,
    apply_channel,
    g_entropy,
    make_squeezed_state,
    mean_photon_number,
    von_neumann_entropy,
)
from .general import (
    EncodingSpec,
    GridSpec,
    MeasurementSpec,
    brute_force_capacity,
    general_capacity,
    optimal_encoding_split,
    optimal_gaussian_capacity,
    optimal_input_squeezing,
    two_quadrature_optimum_over_s,
)
from .holevo import GaussianEnsemble, holevo_bound, holevo_quantity
from .number_state import ba_capacity, number_state_capacity, pure_loss_transition
from .protocols import (
    CapacityResult,
    Protocol,
    coarse_grained_coherent_capacity,
    coherent_capacity,
    coherent_single_quadrature_capacity,
    critical_photon_number,
    optimal_squeezing,
    squeezed_capacity,
)

"""Final-state projection model of black hole evaporation with a general
boundary unitary: states, evaporation maps, fidelities and entanglement."""

__version__ = "0.1.0"

from .tensor import (  # noqa: E402
    DensityOperator,
    HilbertLayout,
    StateVector,
    hermitian_eigenvalues,
    kron,
    partial_inner_product,
    partial_trace,
    partial_transpose,
    svd,
)
from .states import (  # noqa: E402
    BoundaryUnitary,
    RngStream,
    final_boundary_bra,
    haar_state,
    haar_unitary,
    random_mixed_state,
    unruh_excited,
    unruh_vacuum,
)
from .evaporation import (  # noqa: E402
    evaporate_density,
    evaporate_pure,
    mixedness,
    mixedness_report,
    transfer_operator,
    w_operator,
)
from .fidelity import (  # noqa: E402
    MCEstimate,
    fidelity_bound_report,
    m_operator_analytic,
    m_operator_mc,
    mean_fidelity_closed,
    mean_fidelity_mc,
    teleportation_fidelity,
)
from .config import ConfigError, ExperimentConfig, validate_config  # noqa: E402
from .report import ExperimentReport, emit  # noqa: E402
from .runner import run  # noqa: E402

"""Hybrid multi-agent consensus: averager, copier and voter agents on one network."""

from .errors import (
    ConvergenceFailure,
    DegenerateEigenvectorError,
    HmanError,
    NoSubdominantError,
    NoVotersError,
    ValidationError,
)
from .graph import (
    GraphDiagnostics,
    NetworkMatrix,
    diagnose,
    erdos_renyi_network,
    is_aperiodic,
    is_strongly_connected,
    read_matrix,
    validate,
    write_matrix,
)
from .model import (
    AgentRoster,
    AgentType,
    Hman,
    Trajectory,
    consensus_time,
    monte_carlo_msd,
    run_to_consensus,
    simulate,
    step,
)
from .moments import (
    ExpectedEov,
    ExtendedRecursion,
    build_extended_recursion,
    gamma2_reachability,
    iterate_eov,
    mean_square_deviation,
)
from .spectral import (
    SpectralReport,
    bound_sweep,
    check_lambda2_embedding,
    consensus_time_bound,
    dominant_of_g2,
    lambda_s,
    rate_ordering_report,
    spectral_report,
    spectrum,
    subdominant,
)

__version__ = "0.1.0"

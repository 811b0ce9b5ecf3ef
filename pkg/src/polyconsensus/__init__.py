"""Consensus certificates for formations of identical polynomial agents.

The package assembles linear matrix inequality systems whose feasibility
proves exponential consensus of N agents coupled over a symmetric pattern
graph, solves them with a margin objective, independently verifies the
resulting certificates, and checks them dynamically by simulation.
"""

from .config import ConfigError, canonical_hash, load_model_config, parse_model_config
from .dynamics import (
    FormationModel,
    PolynomialVectorField,
    SimulationTrace,
    builtin_model,
    decrease_witness,
    disagreement,
    field_from_terms,
    lyapunov_value,
    rhs,
    rk4_simulate,
    write_trace,
)
from .lmi import (
    DecisionLayout,
    FeasibilityProblem,
    KypRealization,
    LmiBlock,
    assemble_theorem1,
    assemble_theorem2,
    decision_variables,
    decrease_matrix,
    evaluate_blocks,
    kyp_pencil,
    kyp_phi_from_realization,
    kyp_realization,
    kyp_stacked_powers,
    lyapunov_positivity_matrix,
    polynomial_to_gram,
    theorem2_gram_matrices,
)
from .pattern import (
    SpectralData,
    check_assumption1,
    cycle_laplacian,
    eigendecompose,
    from_edge_list,
)
from .polybasis import (
    MonomialBasis,
    SlackBasis,
    build_basis,
    build_slack_basis,
    count_iota,
    count_rho,
    eval_chi,
    gram_map,
    product_exponents,
    selector_gamma,
    selector_pi,
)
from .sdp import (
    SCHEMA_VERSION,
    Certificate,
    SolveResult,
    VerificationReport,
    certificate_from_solution,
    export_sdpa,
    import_sdpa_solution,
    load_certificate,
    read_sdpa,
    save_certificate,
    solve,
    verify_certificate,
)

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "ConfigError",
    "DecisionLayout",
    "FeasibilityProblem",
    "FormationModel",
    "KypRealization",
    "LmiBlock",
    "MonomialBasis",
    "PolynomialVectorField",
    "SCHEMA_VERSION",
    "SimulationTrace",
    "SolveResult",
    "SpectralData",
    "VerificationReport",
    "assemble_theorem1",
    "assemble_theorem2",
    "builtin_model",
    "build_basis",
    "build_slack_basis",
    "canonical_hash",
    "certificate_from_solution",
    "check_assumption1",
    "count_iota",
    "count_rho",
    "cycle_laplacian",
    "decision_variables",
    "decrease_matrix",
    "decrease_witness",
    "disagreement",
    "eigendecompose",
    "eval_chi",
    "evaluate_blocks",
    "export_sdpa",
    "field_from_terms",
    "from_edge_list",
    "gram_map",
    "import_sdpa_solution",
    "kyp_pencil",
    "kyp_phi_from_realization",
    "kyp_realization",
    "kyp_stacked_powers",
    "load_certificate",
    "load_model_config",
    "lyapunov_positivity_matrix",
    "lyapunov_value",
    "parse_model_config",
    "polynomial_to_gram",
    "product_exponents",
    "read_sdpa",
    "rhs",
    "rk4_simulate",
    "save_certificate",
    "selector_gamma",
    "selector_pi",
    "solve",
    "theorem2_gram_matrices",
    "verify_certificate",
    "write_trace",
]

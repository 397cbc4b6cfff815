"""Stock-flow consistent growth model with fractional-reserve and full-reserve banking."""

from .accounting import (
    AuditReport,
    ExtensiveState,
    FlowSnapshot,
    InitializationError,
    audit_trajectory,
    balance_sheet_audit,
    bank_dividends,
    build_flows,
    consistent_init,
    extensive_from_intensive,
    extensive_vector_field,
    full_audit,
    intensive_projection,
    narrow_init,
    simulate_extensive,
    transactions_audit,
)
from .config import ConfigError, load_params
from .dynamics import (
    AuxState,
    CoreState,
    aux_vector_field,
    consumption_share,
    core_vector_field,
    gamma_rate,
    growth_rate,
    xi_flow,
)
from .equilibrium import (
    DegenerateEquilibrium,
    EquilibriumError,
    EquilibriumNotFound,
    InteriorEquilibrium,
    equilibrium_residual,
    explosive_growth_limit,
    interior_equilibrium,
)
from .experiments import (
    ComparisonReport,
    RunBundle,
    Scenario,
    builtin_scenarios,
    compare_regimes,
    export_csv,
    export_svg,
    load_scenario,
    run_scenario,
)
from .integrator import (
    IntegratorConfig,
    PreconditionError,
    Termination,
    Trajectory,
    classify_regime,
    integrate,
    onset_of_decline,
)
from .model import (
    DomainError,
    ModelParams,
    PortfolioMatrix,
    RangeError,
    inflation,
    kappa,
    kappa_inverse,
    phillips,
    phillips_inverse,
    profit_share,
    reduced_lambdas,
    validate_params,
)

__version__ = "0.1.0"

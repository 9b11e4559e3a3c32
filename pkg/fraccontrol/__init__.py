"""fraccontrol: approximative Steuerungen für semilineare Caputo-Evolutionsgleichungen
mit nichtlokalen Anfangsbedingungen in spektraler Abschneidung.
"""
from fraccontrol.errors import (
    ConvergenceError,
    DomainError,
    FracControlError,
    QuadratureError,
    RootBracketError,
    ScenarioError,
    SolverError,
)
from fraccontrol.mittag import gamma_fn, ml, ml_array, wright_pdf
from fraccontrol.model import (
    NonlinearitySpec,
    NonlocalPoint,
    NonlocalSpec,
    SpectralModel,
    Trajectory,
    apply_s_classical,
    apply_sq,
    eval_g,
    heat1d_model,
    operator_norms,
)
from fraccontrol.scenario import Scenario, load_scenario, parse_scenario
from fraccontrol.solver import (
    FixedPointConfig,
    SynthesisReport,
    approximating_sweep,
    picard_solve,
    solve_mild,
    theta_map,
)
from fraccontrol.varmin import (
    ControlLaw,
    Gramian,
    MinimizeReport,
    assemble_gramian,
    check_linear_pac,
    control_value,
    eval_hn,
    minimize_j,
)

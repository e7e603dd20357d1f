"""Population-kinetics model of superradiance from a few emitters with
non-radiative decay and incoherent pump."""
from .errors import (DegenerateFormulaError, IntegrationError, NumericalFailure,
                     SRKineticsError, UnsupportedGraphError, ValidationError)
from .kinetics import (ExpSum, PowerSeries, Trajectory, analytic_two_emitter, default_time_grid,
                       power_decomposition, radiated_power, solve_cascade, solve_numeric)
from .model import (Kind, ManifoldClass, RateSet, Semantics, Transition, TransitionGraph,
                    build_general_graph, build_independent_graph, build_three_emitter_graph,
                    build_two_emitter_graph, graph_from_json, graph_to_json, superradiant_graph)
from .pump import (SteadyState, build_pumped_independent_graph, build_pumped_two_emitter_graph,
                   pumped_dynamics, steady_state)
from .stochastic import EnsembleStats, simulate_ensemble
from .yields import (Method, RqeOptimum, YieldReport, baseline_yield, maximize_rqe, rqe,
                     scan_rqe, yield_closed_form_two, yield_markov, yield_time_integral)

__version__ = "0.1.0"

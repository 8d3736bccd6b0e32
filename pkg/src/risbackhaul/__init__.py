"""RIS-assisted wireless backhaul recovery after a single cable failure.

Build a small-cell scenario, choose which surviving base stations absorb the
disconnected station's traffic, and jointly optimise precoders and RIS phase
shifts to maximise the traffic that can be redistributed.
"""

__version__ = '0.1.0'

from .errors import ConfigError, InvalidInput, NumericalFailure  # noqa: E402
from .scenario import (Scenario, ScenarioConfig, SystemParams,  # noqa: E402
                       build_scenario)
from .model import survivability, total_redistributed  # noqa: E402
from .optimizer import (SolveResult, SolverConfig, Strategy,  # noqa: E402
                        enumerate_selections, run_algorithm, solve_fixed_selection)

__all__ = ['ConfigError', 'InvalidInput', 'NumericalFailure', 'Scenario',
           'ScenarioConfig', 'SystemParams', 'build_scenario', 'survivability',
           'total_redistributed', 'SolveResult', 'SolverConfig', 'Strategy',
           'enumerate_selections', 'run_algorithm', 'solve_fixed_selection']

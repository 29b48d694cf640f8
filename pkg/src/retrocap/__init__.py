"""Retrocausal capacities of quantum channels through postselected closed timelike curves."""
from .channels import QuantumMap, BoundaryCondition, builtin_channel, from_choi, from_kraus
from .measures import (MeasureResult, SingletExtremes, dmax, doeblin_information, max_information,
                       n_copy_doeblin, pm_information, regularized_doeblin_bounds,
                       singlet_fraction_extremes)
from .capacity import (CapacityReport, ExponentReport, asymptotic_capacities, baseline_capacities,
                       exponents, one_shot_classical_capacity, one_shot_quantum_capacity)
from .pctc import LoopedMap, StrategyPair, build_strategy, loop_supermap, renormalized_loop
from .sdp import SdpProblem, SdpSolution, SolverError, solve

__version__ = "0.1.0"

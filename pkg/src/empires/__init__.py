"""Event-driven simulation and analysis of stochastic region merging.

Adjacent regions of a planar partition merge at kernel-defined rates;
this package simulates the process exactly on toroidal lattices, checks
its coupling with bond percolation, computes coarsening statistics and
critical-density estimates, and carries the exact circuit-survival
combinatorics used in the constant-rate analysis.
"""

__version__ = "0.1.0"

from .backend import backend_name
from .contour import (ChainState, CircuitSpec, closed_form_interior1,
                      convergence_sum, hitting_probability,
                      occupation_integral, simulate_chain,
                      survival_identity_check)
from .engine import (EngineConfig, EventLog, ObserverSpec, RunResult,
                     StopRule, run, run_replicas)
from .errors import (ConfigurationError, CouplingViolationError,
                     DataQualityError, EmpiresError, InvariantViolation,
                     StaleEdgeError, UnsupportedKernelError)
from .kernels import (KernelSpec, ScalingReport, rate, scaling_exponent,
                      superadditivity_probe)
from .lattice import LatticeSpec, hexagonal, square
from .partition import (AdjacencyEdge, Partition, RegionRecord,
                        init_partition, recount_geometry)
from .percolation import couple_with_empire, crossing_time, percolate
from .stats import (CurveEstimate, TrajectorySample, estimate_dcrit,
                    percolation_function, sample, trajectory)

__all__ = [
    "__version__", "backend_name",
    "LatticeSpec", "square", "hexagonal",
    "Partition", "RegionRecord", "AdjacencyEdge", "init_partition",
    "recount_geometry",
    "KernelSpec", "ScalingReport", "rate", "scaling_exponent",
    "superadditivity_probe",
    "EngineConfig", "StopRule", "ObserverSpec", "EventLog", "RunResult",
    "run", "run_replicas",
    "TrajectorySample", "sample", "trajectory", "percolation_function",
    "estimate_dcrit", "CurveEstimate",
    "percolate", "couple_with_empire", "crossing_time",
    "CircuitSpec", "ChainState", "hitting_probability",
    "closed_form_interior1", "occupation_integral", "simulate_chain",
    "survival_identity_check", "convergence_sum",
    "EmpiresError", "ConfigurationError", "StaleEdgeError",
    "UnsupportedKernelError", "DataQualityError", "CouplingViolationError",
    "InvariantViolation",
]

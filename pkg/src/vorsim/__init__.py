"""Voronoi-tessellation-driven thinning and replacement point processes.

A configuration of points carves its space into Voronoi cells; each step
removes one point with probability proportional to a statistic of its
cell (a power of the volume, a volume table, or a neighbour-count table)
and, in the replacement regime, draws a fresh point from the sampling
measure.  The package simulates these chains exactly and reproducibly,
with incremental tessellation maintenance, and ships the statistics and
diagnostics used to study their long-run behaviour, including the change
of regime in the volume exponent.
"""

from .diagnostics import (ConvergenceReport, MinorizationReport, PhaseRow,
                          PhaseSweepReport, minorization_check, phase_sweep,
                          two_chain_convergence)
from .errors import (ConfigError, DuplicatePoints, InsufficientData,
                     SelectionOutOfDomain, VorsimError)
from .process import (InitSpec, ProcessParams, SelectionSpec, Snapshot,
                      StepEvent, Trajectory, initial_configuration,
                      minorization_bound, run, selection_probabilities,
                      step)
from .space import Space
from .statistics import (DriftEstimate, PatternSummary, TestRegion,
                         clustering_index, count_in_region, estimate_drift,
                         j_function, pattern_summary, quadrat_variance,
                         selection_mass, thiel_redundancy)
from .tessellation import Tessellation, build, oracle_cell_stats, \
    replace_point

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "ConvergenceReport", "DriftEstimate", "DuplicatePoints",
    "InitSpec", "InsufficientData", "MinorizationReport", "PatternSummary",
    "PhaseRow", "PhaseSweepReport", "ProcessParams", "SelectionOutOfDomain",
    "SelectionSpec", "Snapshot", "Space", "StepEvent", "Tessellation",
    "TestRegion", "Trajectory", "VorsimError", "build", "clustering_index",
    "count_in_region", "estimate_drift", "initial_configuration",
    "j_function", "minorization_bound", "minorization_check",
    "oracle_cell_stats", "pattern_summary", "phase_sweep",
    "quadrat_variance", "replace_point", "run", "selection_mass",
    "selection_probabilities", "step", "thiel_redundancy",
    "two_chain_convergence",
]

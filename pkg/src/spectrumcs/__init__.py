"""Compressed-sensing reconstruction of sparse wideband spectra.

Greedy (OMP and the category-aware modified OMP) and convex (BPDN, modified
BPDN, MNDO) reconstructions of a spectrum vector from ``M < N`` random
Gaussian measurements, plus the Monte Carlo harness that compares them.
"""

from .convex import (
    BlockStructure,
    DenseSparseSplit,
    ProxConfig,
    bpdn,
    fista,
    group_soft_threshold,
    lipschitz_constant,
    mndo,
    modified_bpdn,
    soft_threshold,
)
from .errors import DegenerateSelectionWarning, DivergenceError, StallError, ValidationError
from .experiments import ExperimentConfig, TrialRecord, run_monte_carlo, run_single_demo, summarize
from .greedy import least_squares, modified_omp, omp, select_index
from .results import SolverResult
from .sensing import (
    MeasurementSystem,
    MeasurementVector,
    add_awgn,
    gaussian_system,
    measure,
    normalized_mse,
)
from .spectrum import (
    CategoryPartition,
    OccupancyRule,
    SpectrumVector,
    build_partition,
    generate_spectrum,
    load_scenario,
    paper_scenario,
    utilization,
)

__version__ = "0.1.0"

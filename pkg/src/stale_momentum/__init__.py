"""Asynchronous SGD as momentum: simulation, oracles, and rate analysis.

The package has three layers: a discrete-event queueing simulator that
produces staleness traces, SGD engines (sampled and exact-expectation) on
quadratic objectives, and a rate analyzer built on the growth polynomial
of the expected-iterate recurrence.  ``verify`` ties them together as
executable equivalence checks.
"""

from ._backend import HAVE_COMPILED, active_backend
from .engine import (
    Trajectory,
    ensemble_async_sgd,
    expected_iterates_exact,
    recurrence_iterates,
    run_async_sgd,
    run_momentum_sgd,
)
from .errors import (
    DivergenceError,
    DomainError,
    StaleMomentumError,
    UnsupportedObjectiveError,
)
from .objectives import NoiseModel, QuadraticObjective
from .queueing import (
    QueueConfig,
    StalenessTrace,
    histogram,
    recompute_staleness,
    simulate,
    time_per_step,
)
from .rates import (
    GrowthPolynomial,
    RateReport,
    TuningEntry,
    TuningGrid,
    convergence_rate,
    efficiency_metrics,
    growth_polynomial,
    log_spectrum,
    rate_grid,
    smallest_magnitude_root,
    strategy_compare,
    tune,
    tune_sweep,
    two_point_spectrum,
)
from .staleness import StalenessDistribution
from .verify import (
    VerificationReport,
    fit_geometric,
    verify_theorem1,
    verify_theorem2,
    verify_theorem3,
    verify_theorem4,
)

__version__ = "0.1.0"

__all__ = [
    "DivergenceError",
    "DomainError",
    "GrowthPolynomial",
    "HAVE_COMPILED",
    "NoiseModel",
    "QuadraticObjective",
    "QueueConfig",
    "RateReport",
    "StaleMomentumError",
    "StalenessDistribution",
    "StalenessTrace",
    "Trajectory",
    "TuningEntry",
    "TuningGrid",
    "UnsupportedObjectiveError",
    "VerificationReport",
    "active_backend",
    "convergence_rate",
    "efficiency_metrics",
    "ensemble_async_sgd",
    "expected_iterates_exact",
    "fit_geometric",
    "growth_polynomial",
    "histogram",
    "log_spectrum",
    "rate_grid",
    "recompute_staleness",
    "recurrence_iterates",
    "run_async_sgd",
    "run_momentum_sgd",
    "simulate",
    "smallest_magnitude_root",
    "strategy_compare",
    "time_per_step",
    "tune",
    "tune_sweep",
    "two_point_spectrum",
    "verify_theorem1",
    "verify_theorem2",
    "verify_theorem3",
    "verify_theorem4",
]

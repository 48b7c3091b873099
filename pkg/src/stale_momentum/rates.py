"""Convergence rates of the expected iterates via growth polynomials.

For a quadratic objective with eigenvalue lambda of A^T A, implicit
momentum mu_s, explicit momentum mu_l and step size alpha, the expected
iterates along that eigendirection satisfy a three-term linear recurrence
whose generating function has denominator (the growth polynomial)

    g(t) = mu_s*mu_l * t^3 - (mu_s + mu_l + mu_s*mu_l) * t^2 + z * t - 1,
    z    = 1 + mu_s + mu_l - alpha * (1 - mu_s) * lambda.

If t* is the root of g of smallest magnitude, the eigendirection contracts
like (1/|t*|)^t, and the overall rate is gamma = max over eigendirections.
gamma < 1 means the expected iterates converge.

Roots come from companion-matrix eigenvalues, computed on the reciprocal
polynomial r^3 g(1/r) = -(r^3 - z r^2 + (mu_s+mu_l+mu_s*mu_l) r - mu_s*mu_l),
whose leading coefficient is the constant term of g and never vanishes.
That polynomial is the characteristic polynomial of the three-term
recurrence, its companion matrix is the recurrence's transition matrix,
and gamma is simply the largest eigenvalue magnitude: degree drops in g
(mu_s*mu_l = 0 and so on) turn into harmless zero eigenvalues instead of
ill-conditioned near-singular leading coefficients.  Grid sweeps batch all
cells through one stacked ``eigvals`` call.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

# Explicit-momentum grid used for tuning sweeps (coarse, symmetric around
# zero so negative momentum competes on equal footing) and log-spaced step
# sizes; both are overridable everywhere they are used.  Strategy
# comparison defaults to a finer momentum grid: near-zero optima must
# resolve for the fixed-vs-tuned contrast to mean anything.
DEFAULT_MU_L_GRID = (-0.9, -0.675, -0.45, -0.225, 0.0, 0.225, 0.45, 0.675, 0.9)
DEFAULT_COMPARE_MU_L_GRID = tuple(float(x) for x in np.round(np.linspace(-0.9, 0.9, 37), 10))
DEFAULT_ALPHA_GRID = tuple(float(x) for x in np.logspace(-3.0, 0.0, 61))
DEFAULT_MU_S_SWEEP = tuple(float(x) for x in np.round(np.linspace(0.0, 0.95, 20), 10))


def two_point_spectrum(condition_number: float) -> np.ndarray:
    """Eigenvalues {1, Q}: the extremes that pin the rate."""
    if condition_number < 1:
        raise DomainError("condition number must be >= 1")
    return np.array([1.0, float(condition_number)])


def log_spectrum(condition_number: float, points: int = 10) -> np.ndarray:
    """Log-spaced eigenvalues from 1 to Q."""
    if condition_number < 1:
        raise DomainError("condition number must be >= 1")
    return np.logspace(0.0, math.log10(condition_number), points)


def _validate_params(mu_s, mu_l, alpha):
    if not 0.0 <= mu_s < 1.0:
        raise DomainError(f"mu_s must be in [0, 1), got {mu_s}")
    if not -1.0 < mu_l < 1.0:
        raise DomainError(f"mu_l must be in (-1, 1), got {mu_l}")
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")


@dataclass(frozen=True)
class GrowthPolynomial:
    """g(t) with coefficients stored low to high: (c0, c1, c2, c3)."""

    coefficients: tuple
    z: float
    mu_s: float
    mu_l: float
    alpha: float
    eigenvalue: float

    @property
    def degree(self) -> int:
        c0, c1, c2, c3 = self.coefficients
        if c3 != 0.0:
            return 3
        if c2 != 0.0:
            return 2
        if c1 != 0.0:
            return 1
        return 0

    def __call__(self, t) -> complex:
        c0, c1, c2, c3 = self.coefficients
        return ((c3 * t + c2) * t + c1) * t + c0


def growth_polynomial(mu_s: float, mu_l: float, alpha: float, eigenvalue: float) -> GrowthPolynomial:
    """Build g(t) for one eigendirection."""
    _validate_params(mu_s, mu_l, alpha)
    if not eigenvalue > 0:
        raise DomainError(f"eigenvalue must be positive, got {eigenvalue}")
    z = 1.0 + mu_s + mu_l - alpha * (1.0 - mu_s) * eigenvalue
    coeffs = (-1.0, z, -(mu_s + mu_l + mu_s * mu_l), mu_s * mu_l)
    return GrowthPolynomial(
        coefficients=coeffs, z=z, mu_s=mu_s, mu_l=mu_l, alpha=alpha, eigenvalue=eigenvalue
    )


def _companion(coeffs: np.ndarray) -> np.ndarray:
    """Companion matrix of a polynomial given ascending coefficients."""
    monic = coeffs[:-1] / coeffs[-1]
    deg = monic.size
    mat = np.zeros((deg, deg))
    mat[1:, :-1] = np.eye(deg - 1)
    mat[:, -1] = -monic
    return mat


def polynomial_roots(coeffs) -> np.ndarray:
    """All roots via companion-matrix eigenvalues (ascending coefficients)."""
    coeffs = np.asarray(coeffs, dtype=float)
    while coeffs.size > 1 and coeffs[-1] == 0.0:
        coeffs = coeffs[:-1]
    if coeffs.size <= 1:
        raise DomainError("polynomial of degree 0 has no roots")
    return np.linalg.eigvals(_companion(coeffs))


def _reciprocal_roots(poly: GrowthPolynomial) -> np.ndarray:
    """Eigenvalues of the recurrence transition matrix (roots of r^3 g(1/r)).

    Nonzero entries are the reciprocals of g's roots; zeros stand in for
    the roots g loses when its degree drops.
    """
    c0, c1, c2, c3 = poly.coefficients
    return polynomial_roots([c3, c2, c1, c0])


def smallest_magnitude_root(poly: GrowthPolynomial) -> complex:
    """Root of g with minimal |t|; either of a conjugate pair may return.

    Computed as the reciprocal of the largest-magnitude eigenvalue of the
    companion matrix of r^3 g(1/r): normalizing by g's constant term (-1)
    keeps the matrix well scaled even when the cubic or quadratic
    coefficients of g are zero or tiny.
    """
    if poly.degree == 0:
        raise DomainError("polynomial of degree 0 has no roots")
    r = _reciprocal_roots(poly)
    r_star = r[np.argmax(np.abs(r))]
    return complex(1.0 / r_star)


@dataclass(frozen=True)
class EigenRate:
    eigenvalue: float
    root: complex | None  # None when g degenerates to a constant
    rate: float


@dataclass(frozen=True)
class RateReport:
    """Per-eigendirection rates and the overall contraction factor."""

    per_eigenvalue: tuple
    mu_s: float
    mu_l: float
    alpha: float

    @property
    def gamma(self) -> float:
        return max(e.rate for e in self.per_eigenvalue)

    @property
    def stable(self) -> bool:
        return self.gamma < 1.0

    def to_dict(self) -> dict:
        return {
            "mu_s": self.mu_s,
            "mu_l": self.mu_l,
            "alpha": self.alpha,
            "gamma": self.gamma,
            "stable": self.stable,
            "per_eigenvalue": [
                {
                    "eigenvalue": e.eigenvalue,
                    "root_re": None if e.root is None else e.root.real,
                    "root_im": None if e.root is None else e.root.imag,
                    "rate": e.rate,
                }
                for e in self.per_eigenvalue
            ],
        }


def convergence_rate(eigenvalues, mu_s: float, mu_l: float, alpha: float) -> RateReport:
    """gamma = max_i 1/|t_i*| over the given eigenvalues of A^T A."""
    eigenvalues = np.atleast_1d(np.asarray(eigenvalues, dtype=float))
    per = []
    for lam in eigenvalues:
        poly = growth_polynomial(mu_s, mu_l, alpha, lam)
        if poly.degree == 0:
            # z == 0 with no momentum: the expected iterate lands on the
            # minimizer in one step along this eigendirection.
            per.append(EigenRate(eigenvalue=float(lam), root=None, rate=0.0))
            continue
        r = _reciprocal_roots(poly)
        r_star = r[np.argmax(np.abs(r))]
        per.append(
            EigenRate(eigenvalue=float(lam), root=complex(1.0 / r_star), rate=float(abs(r_star)))
        )
    return RateReport(per_eigenvalue=tuple(per), mu_s=mu_s, mu_l=mu_l, alpha=alpha)


def rate_grid(eigenvalues, mu_s: float, mu_l_grid, alpha_grid) -> np.ndarray:
    """gamma over a (mu_l, alpha) grid in one stacked eigenvalue call.

    Every cell gets the 3x3 transition matrix of its expected-iterate
    recurrence (the companion matrix of r^3 g(1/r)); gamma is the spectral
    radius, maximized over the objective's eigenvalues.
    """
    eigenvalues = np.atleast_1d(np.asarray(eigenvalues, dtype=float))
    mu_l_grid = np.asarray(mu_l_grid, dtype=float)
    alpha_grid = np.asarray(alpha_grid, dtype=float)
    if mu_l_grid.size == 0 or alpha_grid.size == 0:
        raise DomainError("tuning grids must be nonempty")
    for mu_l in mu_l_grid:
        _validate_params(mu_s, mu_l, alpha_grid.min())
    n_l, n_a, n_e = mu_l_grid.size, alpha_grid.size, eigenvalues.size
    z = (
        1.0
        + mu_s
        + mu_l_grid[:, None, None]
        - alpha_grid[None, :, None] * (1.0 - mu_s) * eigenvalues[None, None, :]
    )
    comp = np.zeros((n_l, n_a, n_e, 3, 3))
    comp[..., 1, 0] = 1.0
    comp[..., 2, 1] = 1.0
    comp[..., 0, 2] = (mu_s * mu_l_grid)[:, None, None]
    comp[..., 1, 2] = -(mu_s + mu_l_grid + mu_s * mu_l_grid)[:, None, None]
    comp[..., 2, 2] = z
    radius = np.abs(np.linalg.eigvals(comp)).max(axis=-1)
    return radius.max(axis=-1)


@dataclass(frozen=True, eq=False)
class TuningEntry:
    """Grid sweep result for one implicit-momentum value."""

    mu_s: float
    mu_l_grid: tuple
    alpha_grid: tuple
    gamma: np.ndarray = field(repr=False)  # (len(mu_l_grid), len(alpha_grid))
    best_mu_l: float = 0.0
    best_alpha: float = 0.0
    best_gamma: float = math.inf
    stable: bool = False


def tune(eigenvalues, mu_s: float, mu_l_grid=None, alpha_grid=None) -> TuningEntry:
    """Best (mu_l, alpha) for one mu_s; ties break toward smaller gamma,
    then smaller |mu_l|, then smaller alpha.

    Unstable cells (gamma >= 1) are recorded but only selectable when the
    whole grid is unstable, in which case ``stable`` is False.
    """
    mu_l_grid = np.asarray(DEFAULT_MU_L_GRID if mu_l_grid is None else mu_l_grid, dtype=float)
    alpha_grid = np.asarray(DEFAULT_ALPHA_GRID if alpha_grid is None else alpha_grid, dtype=float)
    gamma = rate_grid(eigenvalues, mu_s, mu_l_grid, alpha_grid)
    ml_idx, a_idx = np.meshgrid(
        np.arange(mu_l_grid.size), np.arange(alpha_grid.size), indexing="ij"
    )
    order = np.lexsort(
        (alpha_grid[a_idx.ravel()], np.abs(mu_l_grid[ml_idx.ravel()]), gamma.ravel())
    )
    stable_mask = gamma.ravel()[order] < 1.0
    pick = order[np.argmax(stable_mask)] if stable_mask.any() else order[0]
    i, j = np.unravel_index(pick, gamma.shape)
    return TuningEntry(
        mu_s=float(mu_s),
        mu_l_grid=tuple(mu_l_grid),
        alpha_grid=tuple(alpha_grid),
        gamma=gamma,
        best_mu_l=float(mu_l_grid[i]),
        best_alpha=float(alpha_grid[j]),
        best_gamma=float(gamma[i, j]),
        stable=bool(gamma[i, j] < 1.0),
    )


def _sweep_workers() -> int:
    env = os.environ.get("STALE_MOMENTUM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"STALE_MOMENTUM_THREADS must be an integer, got {env!r}")
    return min(8, os.cpu_count() or 1)


@dataclass(frozen=True, eq=False)
class TuningGrid:
    """Tuning entries across a mu_s sweep (canonically ordered by mu_s)."""

    entries: tuple

    @property
    def mu_s_values(self) -> np.ndarray:
        return np.array([e.mu_s for e in self.entries])

    @property
    def best_mu_l_curve(self) -> np.ndarray:
        return np.array([e.best_mu_l for e in self.entries])

    def rows(self):
        """Flat (mu_s, mu_l, alpha, gamma) cell rows in canonical order."""
        for e in self.entries:
            for i, ml in enumerate(e.mu_l_grid):
                for j, a in enumerate(e.alpha_grid):
                    yield (e.mu_s, ml, a, float(e.gamma[i, j]))

    def summary(self) -> list:
        return [
            {
                "mu_s": e.mu_s,
                "best_mu_l": e.best_mu_l,
                "best_alpha": e.best_alpha,
                "best_gamma": e.best_gamma,
                "stable": e.stable,
            }
            for e in self.entries
        ]

    def to_json(self) -> str:
        return json.dumps(self.summary())


def tune_sweep(eigenvalues, mu_s_values=None, mu_l_grid=None, alpha_grid=None) -> TuningGrid:
    """Tune over a range of mu_s values.

    Sweep cells are independent; they are evaluated in a thread pool whose
    size is capped by STALE_MOMENTUM_THREADS, and results are assembled in
    mu_s order regardless of scheduling.
    """
    mu_s_values = DEFAULT_MU_S_SWEEP if mu_s_values is None else mu_s_values
    with ThreadPoolExecutor(max_workers=_sweep_workers()) as pool:
        entries = list(
            pool.map(lambda ms: tune(eigenvalues, ms, mu_l_grid, alpha_grid), mu_s_values)
        )
    return TuningGrid(entries=tuple(entries))


@dataclass(frozen=True)
class StrategyRow:
    """Distance proxies after k steps for the three tuning strategies."""

    mu_s: float
    gamma_tuned: float  # mu_l and alpha tuned (negatives allowed)
    gamma_fixed_zero: float  # mu_l = 0, alpha tuned
    gamma_fixed_half: float  # mu_l = 0.5, alpha tuned
    proxy_tuned: float
    proxy_fixed_zero: float
    proxy_fixed_half: float
    speedup_vs_zero: float  # iteration-count ratio ln(gamma_tuned)/ln(gamma_fixed_zero)


def strategy_compare(eigenvalues, mu_s_values, k: int, mu_l_grid=None, alpha_grid=None):
    """Compare full tuning against fixed mu_l in {0, 0.5} per mu_s.

    The distance proxy is gamma^k (expected-iterate contraction after k
    steps); ``speedup_vs_zero`` is the implied ratio of iteration counts to
    reach a fixed loss, I(mu_l=0) / I(tuned) = ln(gamma_tuned) /
    ln(gamma_fixed_zero), i.e. > 1 when tuning helps.
    """
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if mu_l_grid is None:
        mu_l_grid = DEFAULT_COMPARE_MU_L_GRID
    rows = []
    for mu_s in mu_s_values:
        tuned = tune(eigenvalues, mu_s, mu_l_grid, alpha_grid)
        fixed0 = tune(eigenvalues, mu_s, [0.0], alpha_grid)
        fixed_half = tune(eigenvalues, mu_s, [0.5], alpha_grid)
        g_a, g_b, g_c = tuned.best_gamma, fixed0.best_gamma, fixed_half.best_gamma
        if 0.0 < g_a < 1.0 and 0.0 < g_b < 1.0:
            speedup = math.log(g_a) / math.log(g_b)
        else:
            speedup = math.inf if g_a < 1.0 <= g_b else math.nan
        rows.append(
            StrategyRow(
                mu_s=float(mu_s),
                gamma_tuned=g_a,
                gamma_fixed_zero=g_b,
                gamma_fixed_half=g_c,
                proxy_tuned=g_a**k,
                proxy_fixed_zero=g_b**k,
                proxy_fixed_half=g_c**k,
                speedup_vs_zero=speedup,
            )
        )
    return rows


def fitted_decay_rate(distances, t_start: int, t_end: int, node_drop: float = 10.0**-1.5) -> float:
    """Per-step decay factor fitted from ||E w_t - w_star|| over [t_start, t_end].

    Least-squares slope of log distance vs t, excluding oscillation nodes:
    complex growth-polynomial roots make the distance ring through
    near-zeros, so points below ``node_drop`` times the local (+/-5 window)
    maximum are dropped before fitting.
    """
    distances = np.asarray(distances, dtype=float)
    if not 0 <= t_start < t_end < distances.size:
        raise DomainError("fit window must lie inside the distance series")
    t = np.arange(t_start, t_end + 1)
    r = distances[t_start : t_end + 1]
    if np.any(r <= 0):
        raise DomainError("distances must be positive over the fit window")
    local_max = np.array(
        [distances[max(s - 5, 0) : s + 6].max() for s in t]
    )
    keep = r >= node_drop * local_max
    if keep.sum() < 8:
        raise DomainError("too few non-node points to fit a decay rate")
    slope = np.polyfit(t[keep], np.log(r[keep]), 1)[0]
    return float(math.exp(slope))


@dataclass(frozen=True)
class EfficiencyRow:
    workers: int
    hardware_efficiency: float  # time per step relative to one worker
    iterations: float  # steps to reach the target loss ratio
    statistical_efficiency: float  # iterations relative to one worker
    time_proxy: float  # product: normalized wall-clock to target
    unstable: bool


def efficiency_metrics(worker_counts, gamma_per_worker, target_loss_ratio: float):
    """Hardware/statistical efficiency table from per-configuration rates.

    Hardware efficiency of m workers is 1/m (the pooled write rate is m
    times the single-worker rate); statistical efficiency is I_m / I_1
    with I = ceil(ln(target_loss_ratio) / ln(gamma)).  gamma >= 1 rows are
    flagged unstable with infinite iteration counts.
    """
    worker_counts = [int(m) for m in worker_counts]
    gammas = [float(g) for g in gamma_per_worker]
    if len(worker_counts) != len(gammas):
        raise DomainError("worker_counts and gamma_per_worker must align")
    if 1 not in worker_counts:
        raise DomainError("worker_counts must include 1 (the normalization base)")
    if not 0.0 < target_loss_ratio < 1.0:
        raise DomainError("target_loss_ratio must be in (0, 1)")
    if any(g <= 0 for g in gammas):
        raise DomainError("gamma values must be positive")

    def iterations(g: float) -> float:
        if g >= 1.0:
            return math.inf
        return float(math.ceil(math.log(target_loss_ratio) / math.log(g)))

    base = iterations(gammas[worker_counts.index(1)])
    rows = []
    for m, g in zip(worker_counts, gammas):
        it = iterations(g)
        rows.append(
            EfficiencyRow(
                workers=m,
                hardware_efficiency=1.0 / m,
                iterations=it,
                statistical_efficiency=it / base,
                time_proxy=(1.0 / m) * (it / base),
                unstable=not g < 1.0,
            )
        )
    return rows

"""Sequential, momentum, and asynchronous SGD on quadratic objectives.

Two layers live here:

* Sampled runs (``run_momentum_sgd``, ``run_async_sgd``,
  ``ensemble_async_sgd``): actual stochastic trajectories with per-step
  staleness draws and optional Gaussian gradient noise.
* Expectation oracles: ``expected_iterates_exact`` is a dynamic program
  that evolves E[w_t] exactly (the gradient is linear, so the expectation
  commutes through it), and ``recurrence_iterates`` rolls the closed-form
  three-term recurrence for geometric staleness plus explicit momentum

      E w_{t+1} = (1 + mu_s + mu_l) E w_t - alpha (1 - mu_s) grad f(E w_t)
                  - (mu_s + mu_l + mu_s mu_l) E w_{t-1} + mu_s mu_l E w_{t-2}.

Conventions shared by every routine (so the oracles track the samplers
exactly): initial velocity is zero (w_{-1} := w_0), and a read of age tau
at step t is clamped to max(t - tau, 0).  In the exact DP the clamp shows
up as the tail mass of the staleness distribution being lumped onto the
oldest available iterate.

Reproducibility: a run derives two independent PCG64 streams from its seed
via ``SeedSequence(seed).spawn(2)`` (staleness draws, then noise draws);
staleness uses one uniform per step, noise one standard-normal block of
shape (T, dim).  Ensembles run one seed per member, so member i equals a
single run with that seed bit-for-bit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import DivergenceError, DomainError, UnsupportedObjectiveError
from .objectives import NoiseModel, QuadraticObjective
from .queueing import StalenessTrace
from .staleness import StalenessDistribution

DIVERGENCE_THRESHOLD = 1e12


@dataclass(eq=False)
class Trajectory:
    """Iterates w_0..w_T with the parameters that produced them."""

    iterates: np.ndarray  # (T+1, dim)
    alpha: float
    mu_l: float
    staleness: str
    seed: int | str | None
    noise_sigma: float = 0.0
    objective: QuadraticObjective | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return self.iterates.shape[0]

    @property
    def steps(self) -> int:
        return self.iterates.shape[0] - 1

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]

    def distances(self) -> np.ndarray:
        """||w_t - w_star||_2 per step (requires an attached objective)."""
        if self.objective is None:
            raise DomainError("trajectory has no attached objective")
        return np.linalg.norm(self.iterates - self.objective.w_star, axis=1)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            dim = self.iterates.shape[1]
            writer.writerow(["t"] + [f"w_{i}" for i in range(dim)] + ["f"])
            for t, w in enumerate(self.iterates):
                f_val = self.objective.value(w) if self.objective is not None else float("nan")
                writer.writerow([t] + [repr(float(x)) for x in w] + [repr(f_val)])


def _validate_common(obj, alpha, mu_l, steps, w0):
    if not isinstance(obj, QuadraticObjective):
        raise UnsupportedObjectiveError("only quadratic objectives are supported")
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if not -1.0 < mu_l < 1.0:
        raise DomainError(f"mu_l must be in (-1, 1), got {mu_l}")
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps}")
    w0 = np.ascontiguousarray(w0, dtype=float)
    if w0.shape != (obj.dim,):
        raise DomainError(f"w0 must be a {obj.dim}-vector, got shape {w0.shape}")
    return w0


def _spawn_streams(seed):
    stale_ss, noise_ss = np.random.SeedSequence(seed).spawn(2)
    return (
        np.random.Generator(np.random.PCG64(stale_ss)),
        np.random.Generator(np.random.PCG64(noise_ss)),
    )


def _staleness_per_run(source, steps, rng) -> np.ndarray:
    if isinstance(source, StalenessTrace):
        if len(source) < steps:
            raise DomainError(
                f"staleness trace has {len(source)} entries, need {steps}"
            )
        return source.staleness[:steps]
    if isinstance(source, StalenessDistribution):
        return source.sample(rng, size=steps)
    raise DomainError("staleness must be a StalenessDistribution or StalenessTrace")


def _run_batch(obj, alpha, mu_l, read_idx, noise, w0):
    """Dispatch a (T, n) batch of runs to the active kernel backend."""
    steps, n = read_idx.shape
    out = np.empty((steps + 1, n, obj.dim))
    diverged = _backend.async_runs(
        obj.hessian_diag,
        None if obj.is_diagonal else obj.hessian,
        obj.w_star,
        w0,
        float(alpha),
        float(mu_l),
        read_idx,
        noise,
        out,
    )
    if diverged is not None:
        t, run = diverged
        raise DivergenceError(
            f"iterate exceeded {DIVERGENCE_THRESHOLD:g} at step {t} (run {run})",
            last_finite_index=t - 1,
        )
    return out


def run_momentum_sgd(
    obj: QuadraticObjective,
    alpha: float,
    mu_l: float,
    steps: int,
    w0,
    noise: NoiseModel | None = None,
    seed: int = 0,
) -> Trajectory:
    """Heavy-ball SGD: w_{t+1} = w_t + mu_l (w_t - w_{t-1}) - alpha grad."""
    w0 = _validate_common(obj, alpha, mu_l, steps, w0)
    noise = noise or NoiseModel.none()
    _, noise_rng = _spawn_streams(seed)
    read_idx = np.arange(steps, dtype=np.int64).reshape(steps, 1)
    noise_arr = _draw_noise(noise, noise_rng, steps, obj.dim)
    out = _run_batch(obj, alpha, mu_l, read_idx, noise_arr, w0)
    return Trajectory(
        iterates=out[:, 0, :],
        alpha=alpha,
        mu_l=mu_l,
        staleness="none",
        seed=seed,
        noise_sigma=noise.sigma,
        objective=obj,
    )


def _draw_noise(noise, rng, steps, dim):
    if noise.sigma == 0.0:
        return np.zeros((steps, 1, dim))
    return (noise.sigma * rng.standard_normal((steps, dim))).reshape(steps, 1, dim)


def run_async_sgd(
    obj: QuadraticObjective,
    alpha: float,
    mu_l: float,
    staleness,
    steps: int,
    w0,
    noise: NoiseModel | None = None,
    seed: int = 0,
) -> Trajectory:
    """Asynchronous SGD with stale reads and server-side momentum.

    ``staleness`` is either a :class:`StalenessDistribution` (one draw per
    step) or a :class:`StalenessTrace` whose recorded staleness values are
    replayed positionally.  Reads older than the history are clamped to
    w_0.
    """
    w0 = _validate_common(obj, alpha, mu_l, steps, w0)
    noise = noise or NoiseModel.none()
    stale_rng, noise_rng = _spawn_streams(seed)
    tau = _staleness_per_run(staleness, steps, stale_rng)
    t_axis = np.arange(steps, dtype=np.int64)
    read_idx = np.maximum(t_axis - tau, 0).reshape(steps, 1)
    noise_arr = _draw_noise(noise, noise_rng, steps, obj.dim)
    out = _run_batch(obj, alpha, mu_l, read_idx, noise_arr, w0)
    desc = staleness.describe() if isinstance(staleness, StalenessDistribution) else "trace"
    return Trajectory(
        iterates=out[:, 0, :],
        alpha=alpha,
        mu_l=mu_l,
        staleness=desc,
        seed=seed,
        noise_sigma=noise.sigma,
        objective=obj,
    )


def ensemble_async_sgd(
    obj: QuadraticObjective,
    alpha: float,
    mu_l: float,
    staleness: StalenessDistribution,
    steps: int,
    w0,
    noise: NoiseModel | None = None,
    seeds=None,
) -> np.ndarray:
    """Stack of independent async runs; returns iterates (T+1, n, dim).

    Member i is bit-identical to ``run_async_sgd(..., seed=seeds[i])``.
    """
    w0 = _validate_common(obj, alpha, mu_l, steps, w0)
    if not isinstance(staleness, StalenessDistribution):
        raise DomainError("ensembles need a StalenessDistribution")
    noise = noise or NoiseModel.none()
    seeds = np.arange(1024) if seeds is None else np.asarray(seeds)
    n = seeds.size
    t_axis = np.arange(steps, dtype=np.int64)
    read_idx = np.empty((steps, n), dtype=np.int64)
    noise_arr = np.zeros((steps, n, obj.dim))
    for i, s in enumerate(seeds):
        stale_rng, noise_rng = _spawn_streams(int(s))
        tau = staleness.sample(stale_rng, size=steps)
        read_idx[:, i] = np.maximum(t_axis - tau, 0)
        if noise.sigma > 0.0:
            noise_arr[:, i, :] = noise.sigma * noise_rng.standard_normal((steps, obj.dim))
    return _run_batch(obj, alpha, mu_l, read_idx, noise_arr, w0)


def expected_iterates_exact(
    obj: QuadraticObjective,
    alpha: float,
    mu_l: float,
    staleness: StalenessDistribution,
    steps: int,
    w0,
) -> Trajectory:
    """Exact dynamic program for the expected iterates E[w_t].

    At step t the read distribution over history indices is the staleness
    pmf with all mass at delays >= min(t, L) lumped onto the oldest
    retained iterate (L is the distribution's support bound), matching the
    sampler's clamp exactly for t <= L:

        E w_{t+1} = E w_t + mu_l (E w_t - E w_{t-1})
                    - alpha * sum_l q~_l * grad f(E w_{t-l}).
    """
    w0 = _validate_common(obj, alpha, mu_l, steps, w0)
    if not isinstance(staleness, StalenessDistribution):
        raise DomainError("expected_iterates_exact needs a StalenessDistribution")
    bound = staleness.support_bound()
    q = staleness.pmf_array(bound + 1)
    w = np.empty((steps + 1, obj.dim))
    w[0] = w0
    h = obj.hessian
    for t in range(steps):
        l_max = min(t, bound)
        q_eff = q[: l_max + 1].copy()
        q_eff[l_max] = 1.0 - q[:l_max].sum()  # lump tail mass on the oldest read
        # mix of history deviations, newest first
        hist = w[t - l_max : t + 1][::-1]
        mix = q_eff @ (hist - obj.w_star)
        w_prev = w[t - 1] if t > 0 else w[0]
        w[t + 1] = w[t] + mu_l * (w[t] - w_prev) - alpha * (h @ mix)
        if not np.all(np.abs(w[t + 1]) <= DIVERGENCE_THRESHOLD):
            raise DivergenceError(
                f"expected iterate exceeded {DIVERGENCE_THRESHOLD:g} at step {t + 1}",
                last_finite_index=t,
            )
    return Trajectory(
        iterates=w,
        alpha=alpha,
        mu_l=mu_l,
        staleness=staleness.describe(),
        seed="exact",
        objective=obj,
    )


def recurrence_iterates(
    obj: QuadraticObjective,
    alpha: float,
    mu_l: float,
    mu_s: float,
    steps: int,
    w0,
) -> Trajectory:
    """Closed-form three-term recurrence for E[w_t] under geometric staleness.

    The first three iterates are seeded from the exact DP; from t = 2 on
    the recurrence above rolls forward.  Agreement with
    ``expected_iterates_exact`` is the executable form of the combined
    implicit+explicit momentum result.
    """
    w0 = _validate_common(obj, alpha, mu_l, steps, w0)
    if not 0.0 <= mu_s < 1.0:
        raise DomainError(f"mu_s must be in [0, 1), got {mu_s}")
    dist = StalenessDistribution.geometric(mu_s)
    seed_traj = expected_iterates_exact(obj, alpha, mu_l, dist, min(steps, 2), w0)
    if steps <= 2:
        return seed_traj
    w = np.empty((steps + 1, obj.dim))
    w[: 3] = seed_traj.iterates
    c_lin = 1.0 + mu_s + mu_l
    c_lag1 = mu_s + mu_l + mu_s * mu_l
    c_lag2 = mu_s * mu_l
    a_eff = alpha * (1.0 - mu_s)
    h = obj.hessian
    for t in range(2, steps):
        w[t + 1] = (
            c_lin * w[t]
            - a_eff * (h @ (w[t] - obj.w_star))
            - c_lag1 * w[t - 1]
            + c_lag2 * w[t - 2]
        )
        if not np.all(np.abs(w[t + 1]) <= DIVERGENCE_THRESHOLD):
            raise DivergenceError(
                f"recurrence iterate exceeded {DIVERGENCE_THRESHOLD:g} at step {t + 1}",
                last_finite_index=t,
            )
    return Trajectory(
        iterates=w,
        alpha=alpha,
        mu_l=mu_l,
        staleness=dist.describe(),
        seed="exact",
        objective=obj,
    )

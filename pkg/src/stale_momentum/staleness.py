"""Staleness distributions for asynchronous gradient updates.

A staleness distribution Q = (q_l) assigns probability q_l to a worker
reading the model as it was l global writes ago.  Three families are
supported:

* ``geometric``: q_l = (1 - mu_s) * mu_s**l on {0, 1, ...}.  This is the
  family induced by M workers with i.i.d. exponential work times, in which
  case mu_s = 1 - 1/M and the mean staleness is exactly M - 1.
* ``empirical``: a finite pmf over {0, ..., len(pmf)-1}, optionally backed
  by raw counts (kept so goodness-of-fit tests can use exact counts).
* ``degenerate``: all mass on a single delay l.

Instances are immutable after construction and safe to share across
threads; sampling takes an explicit ``numpy.random.Generator`` so callers
own the RNG state.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

# Default tail mass below which geometric series are truncated.
TRUNCATION_TAIL = 1e-12

_KINDS = ("geometric", "empirical", "degenerate")


def _default_truncation(mu_s: float, tail: float = TRUNCATION_TAIL) -> int:
    """Smallest L with mu_s**L < tail (L = 1 when mu_s == 0)."""
    if mu_s == 0.0:
        return 1
    level = int(math.floor(math.log(tail) / math.log(mu_s))) + 1
    return max(level, 1)


@dataclass(eq=False)
class StalenessDistribution:
    """Probability distribution of read delays (staleness)."""

    kind: str
    mu_s: float = 0.0
    pmf: np.ndarray | None = None
    counts: np.ndarray | None = None
    delay: int = 0
    truncation_level: int = 1
    # Set by from_worker_count(); keeps mean() exact where float division
    # on mu_s = 1 - 1/M would round (E tau = M - 1 holds exactly).
    worker_count: int | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown staleness kind {self.kind!r}")
        if self.pmf is not None:
            self.pmf = np.asarray(self.pmf, dtype=float)
            self.pmf.flags.writeable = False
        if self.counts is not None:
            self.counts = np.asarray(self.counts, dtype=np.int64)
            self.counts.flags.writeable = False

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------
    @classmethod
    def geometric(cls, mu_s: float, truncation_level: int | None = None) -> "StalenessDistribution":
        """Geometric staleness on {0, 1, ...}: q_l = (1 - mu_s) * mu_s**l."""
        if not 0.0 <= mu_s < 1.0:
            raise DomainError(f"mu_s must be in [0, 1), got {mu_s}")
        if truncation_level is None:
            truncation_level = _default_truncation(mu_s)
        if truncation_level < 1:
            raise DomainError("truncation_level must be >= 1")
        return cls(kind="geometric", mu_s=float(mu_s), truncation_level=truncation_level)

    @classmethod
    def from_worker_count(cls, workers: int) -> "StalenessDistribution":
        """Geometric staleness induced by ``workers`` exponential workers.

        The implicit momentum is mu_s = 1 - 1/workers and the mean
        staleness is exactly workers - 1.
        """
        if workers < 1:
            raise DomainError(f"worker count must be >= 1, got {workers}")
        mu_s = 1.0 - 1.0 / workers
        dist = cls.geometric(mu_s)
        dist.worker_count = int(workers)
        return dist

    @classmethod
    def empirical(cls, pmf, counts=None) -> "StalenessDistribution":
        """Finite pmf over delays {0, ..., len(pmf)-1}."""
        pmf = np.asarray(pmf, dtype=float)
        if pmf.ndim != 1 or pmf.size == 0:
            raise DomainError("empirical pmf must be a nonempty 1-D sequence")
        if np.any(pmf < 0):
            raise DomainError("pmf entries must be nonnegative")
        if abs(pmf.sum() - 1.0) > 1e-12:
            raise DomainError(f"pmf must sum to 1 within 1e-12, got {pmf.sum()!r}")
        return cls(
            kind="empirical",
            pmf=pmf,
            counts=counts,
            truncation_level=max(pmf.size - 1, 1),
        )

    @classmethod
    def from_counts(cls, counts) -> "StalenessDistribution":
        """Empirical distribution from raw nonnegative integer counts."""
        counts = np.asarray(counts, dtype=np.int64)
        total = counts.sum()
        if total <= 0:
            raise DomainError("counts must contain at least one observation")
        if np.any(counts < 0):
            raise DomainError("counts must be nonnegative")
        return cls(
            kind="empirical",
            pmf=counts / total,
            counts=counts,
            truncation_level=max(counts.size - 1, 1),
        )

    @classmethod
    def degenerate(cls, delay: int) -> "StalenessDistribution":
        """All mass on a single delay."""
        if delay < 0:
            raise DomainError(f"delay must be >= 0, got {delay}")
        return cls(kind="degenerate", delay=int(delay), truncation_level=max(int(delay), 1))

    # ------------------------------------------------------------------
    # pmf queries
    # ------------------------------------------------------------------
    def pmf_value(self, delay: int) -> float:
        """q_l for a single delay l."""
        if delay < 0:
            return 0.0
        if self.kind == "geometric":
            return (1.0 - self.mu_s) * self.mu_s**delay
        if self.kind == "degenerate":
            return 1.0 if delay == self.delay else 0.0
        return float(self.pmf[delay]) if delay < self.pmf.size else 0.0

    def pmf_array(self, length: int) -> np.ndarray:
        """First ``length`` probabilities [q_0, ..., q_{length-1}]."""
        l = np.arange(length)
        if self.kind == "geometric":
            return (1.0 - self.mu_s) * self.mu_s**l
        out = np.zeros(length)
        if self.kind == "degenerate":
            if self.delay < length:
                out[self.delay] = 1.0
        else:
            n = min(length, self.pmf.size)
            out[:n] = self.pmf[:n]
        return out

    def tail_mass(self, delay: int) -> float:
        """P(tau >= delay)."""
        if delay <= 0:
            return 1.0
        if self.kind == "geometric":
            return self.mu_s**delay
        if self.kind == "degenerate":
            return 1.0 if self.delay >= delay else 0.0
        return float(self.pmf[delay:].sum())

    def support_bound(self) -> int:
        """Largest delay retained for series evaluation.

        Exact (last support point) for finite kinds; the configured
        truncation level for geometric, whose tail mass beyond is below
        mu_s**truncation_level.
        """
        if self.kind == "geometric":
            return self.truncation_level
        if self.kind == "degenerate":
            return self.delay
        return self.pmf.size - 1

    # ------------------------------------------------------------------
    # moments
    # ------------------------------------------------------------------
    def mean(self) -> float:
        if self.kind == "geometric":
            if self.worker_count is not None:
                return float(self.worker_count - 1)
            return self.mu_s / (1.0 - self.mu_s) if self.mu_s else 0.0
        if self.kind == "degenerate":
            return float(self.delay)
        return float(np.arange(self.pmf.size) @ self.pmf)

    def variance(self) -> float:
        if self.kind == "geometric":
            return self.mu_s / (1.0 - self.mu_s) ** 2
        if self.kind == "degenerate":
            return 0.0
        l = np.arange(self.pmf.size)
        m = self.mean()
        return float((l - m) ** 2 @ self.pmf)

    # ------------------------------------------------------------------
    # sampling
    # ------------------------------------------------------------------
    def sample(self, rng: np.random.Generator, size: int | None = None):
        """Draw staleness values; reproducible given the generator state.

        Geometric sampling uses the inverse CDF floor(ln u / ln mu_s) on a
        single uniform u in (0, 1], so it is O(1) and exact.  Empirical
        sampling inverts the CDF of one uniform per draw.
        """
        n = 1 if size is None else size
        if self.kind == "degenerate":
            out = np.full(n, self.delay, dtype=np.int64)
        elif self.kind == "geometric":
            if self.mu_s == 0.0:
                out = np.zeros(n, dtype=np.int64)
            else:
                u = 1.0 - rng.random(n)  # in (0, 1], keeps log finite
                out = np.floor(np.log(u) / math.log(self.mu_s)).astype(np.int64)
        else:
            u = 1.0 - rng.random(n)
            cdf = np.cumsum(self.pmf)
            cdf[-1] = 1.0  # guard rounding in the last bin
            out = np.searchsorted(cdf, u, side="left").astype(np.int64)
        return int(out[0]) if size is None else out

    # ------------------------------------------------------------------
    # comparison
    # ------------------------------------------------------------------
    def total_variation(self, other: "StalenessDistribution") -> float:
        """Total variation distance, in [0, 1].

        Sums |q_l - q'_l| / 2 over the union support up to the larger
        truncation level, then adds |tail - tail'| / 2.  Beyond the last
        crossing of two geometric (or finite) pmfs one distribution
        dominates the other, so the tail term is exact rather than an
        upper bound whenever the truncation level is past that point.
        """
        length = max(self.support_bound(), other.support_bound()) + 1
        q1 = self.pmf_array(length)
        q2 = other.pmf_array(length)
        head = 0.5 * np.abs(q1 - q2).sum()
        tail = 0.5 * abs(self.tail_mass(length) - other.tail_mass(length))
        return float(head + tail)

    # ------------------------------------------------------------------
    # serialization
    # ------------------------------------------------------------------
    def to_dict(self) -> dict:
        if self.kind == "geometric":
            return {"kind": "geometric", "mu_s": self.mu_s}
        if self.kind == "degenerate":
            return {"kind": "degenerate", "l": self.delay}
        out = {"kind": "empirical", "pmf": self.pmf.tolist()}
        if self.counts is not None:
            out["counts"] = self.counts.tolist()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "StalenessDistribution":
        kind = data.get("kind")
        if kind == "geometric":
            return cls.geometric(data["mu_s"])
        if kind == "degenerate":
            return cls.degenerate(data["l"])
        if kind == "empirical":
            return cls.empirical(data["pmf"], counts=data.get("counts"))
        raise DomainError(f"unknown staleness kind {kind!r}")

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "StalenessDistribution":
        return cls.from_dict(json.loads(text))

    def describe(self) -> str:
        if self.kind == "geometric":
            return f"geometric(mu_s={self.mu_s:g})"
        if self.kind == "degenerate":
            return f"degenerate(l={self.delay})"
        return f"empirical(support={self.pmf.size})"


def geometric(mu_s: float) -> StalenessDistribution:
    """Module-level alias for :meth:`StalenessDistribution.geometric`."""
    return StalenessDistribution.geometric(mu_s)


def from_worker_count(workers: int) -> StalenessDistribution:
    """Module-level alias for :meth:`StalenessDistribution.from_worker_count`."""
    return StalenessDistribution.from_worker_count(workers)

"""Discrete-event simulation of asynchronous workers writing to one store.

M workers loop {read (instantaneous) -> work -> write (instantaneous,
atomic)}.  With i.i.d. exponential work times the staleness of a write,
i.e. the number of other writes between the worker's read and its write,
is geometrically distributed with parameter 1/M once the start-up
transient has passed; the simulation exists to exercise that law (and to
break it, via the constant work-time option).

The event loop is single-threaded and deterministic: each worker draws its
work durations from an independent PCG64 stream spawned from the master
seed (``numpy.random.SeedSequence(seed).spawn(M)``), and simultaneous
writes (possible in floating point) are ordered by worker id.  All M
workers read at t=0, so the first M writes are start-up transients; they
are kept in the trace but flagged as warm-up via ``StalenessTrace.warmup``
and excluded from the default histogram.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import DomainError
from .staleness import StalenessDistribution

MAX_INDEX = 2**63 - 1

WORK_KINDS = ("exponential", "constant")


@dataclass(frozen=True)
class QueueConfig:
    """Simulation parameters.

    ``num_writes`` counts post-warm-up writes; the trace additionally
    contains the ``workers`` warm-up writes at the front.  ``work`` selects
    the work-time distribution: "exponential" (rate ``rate``) is the model
    under study, "constant" (duration 1/rate) is the negative control with
    deterministic staleness M-1.
    """

    workers: int
    rate: float = 1.0
    num_writes: int = 100_000
    seed: int = 0
    work: str = "exponential"

    def __post_init__(self):
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}")
        if not self.rate > 0:
            raise DomainError(f"rate must be positive, got {self.rate}")
        if self.num_writes < 1:
            raise DomainError(f"num_writes must be >= 1, got {self.num_writes}")
        if self.num_writes + self.workers > MAX_INDEX:
            raise DomainError("num_writes overflows the 64-bit write index")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must fit in an unsigned 64-bit integer")
        if self.work not in WORK_KINDS:
            raise DomainError(f"work must be one of {WORK_KINDS}, got {self.work!r}")

    def to_dict(self) -> dict:
        return {
            "workers": self.workers,
            "rate": self.rate,
            "num_writes": self.num_writes,
            "seed": self.seed,
            "work": self.work,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QueueConfig":
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "QueueConfig":
        return cls.from_dict(json.loads(text))


@dataclass(eq=False)
class StalenessTrace:
    """Per-write records of a simulation run.

    Arrays are aligned; row k is the k-th global write.  ``warmup`` rows at
    the front are start-up transients (one first-write per worker).
    """

    worker_ids: np.ndarray
    staleness: np.ndarray
    write_times: np.ndarray
    warmup: int = 0
    config: QueueConfig | None = field(default=None, repr=False)

    def __post_init__(self):
        self.worker_ids = np.asarray(self.worker_ids)
        self.staleness = np.asarray(self.staleness, dtype=np.int64)
        self.write_times = np.asarray(self.write_times, dtype=float)

    def __len__(self) -> int:
        return self.staleness.size

    @property
    def total_time(self) -> float:
        return float(self.write_times[-1]) if len(self) else 0.0

    def post_warmup_staleness(self) -> np.ndarray:
        return self.staleness[self.warmup :]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["write_index", "worker_id", "staleness", "write_time"])
            for k in range(len(self)):
                writer.writerow(
                    [k, int(self.worker_ids[k]), int(self.staleness[k]),
                     repr(float(self.write_times[k]))]
                )

    @classmethod
    def from_csv(cls, path, warmup: int = 0) -> "StalenessTrace":
        ids, stal, times = [], [], []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                ids.append(int(row["worker_id"]))
                stal.append(int(row["staleness"]))
                times.append(float(row["write_time"]))
        return cls(
            worker_ids=np.array(ids, dtype=np.int32),
            staleness=np.array(stal, dtype=np.int64),
            write_times=np.array(times),
            warmup=warmup,
        )


def _initial_block(total: int, workers: int) -> int:
    # Expected share per worker plus a wide binomial margin; exhausting a
    # block is detected and repaired, so this only tunes the redraw rate.
    share = total / workers
    return min(total, int(math.ceil(share + 12.0 * math.sqrt(share) + 64.0)))


def simulate(cfg: QueueConfig) -> StalenessTrace:
    """Run the event-driven simulation; deterministic given the config."""
    total = cfg.num_writes + cfg.workers
    scale = 1.0 / cfg.rate
    block = _initial_block(total, cfg.workers)

    if cfg.work == "exponential":
        streams = [
            np.random.Generator(np.random.PCG64(child))
            for child in np.random.SeedSequence(cfg.seed).spawn(cfg.workers)
        ]
        draws = [g.exponential(scale=scale, size=block) for g in streams]
    else:
        streams = None
        draws = [np.full(block, scale) for _ in range(cfg.workers)]

    while True:
        offsets = np.zeros(cfg.workers + 1, dtype=np.int64)
        offsets[1:] = np.cumsum([d.size for d in draws])
        work = np.concatenate(draws)
        ids, stal, times, exhausted = _backend.queue_race(work, offsets, total)
        if exhausted < 0:
            break
        # Extend the dry worker's stream and re-run; the first `total`
        # events are unaffected by draws appended past the horizon.
        extra = (
            streams[exhausted].exponential(scale=scale, size=block)
            if streams is not None
            else np.full(block, scale)
        )
        draws[exhausted] = np.concatenate([draws[exhausted], extra])

    return StalenessTrace(
        worker_ids=ids,
        staleness=stal,
        write_times=times,
        warmup=cfg.workers,
        config=cfg,
    )


def histogram(trace: StalenessTrace, include_warmup: bool = False) -> StalenessDistribution:
    """Empirical staleness distribution of a trace (warm-up excluded by default)."""
    values = trace.staleness if include_warmup else trace.post_warmup_staleness()
    if values.size == 0:
        raise DomainError("trace has no staleness samples")
    counts = np.bincount(values)
    return StalenessDistribution.from_counts(counts)


def time_per_step(trace: StalenessTrace) -> float:
    """Average simulated time per write, 1/(M*rate) in expectation."""
    if len(trace) == 0:
        raise DomainError("trace is empty")
    return trace.total_time / len(trace)


def recompute_staleness(trace: StalenessTrace) -> np.ndarray:
    """Re-derive staleness from worker ids alone (self-consistency check).

    The staleness of row k is the number of rows strictly between the same
    worker's previous row and row k (or k itself for a first write).
    """
    out = np.empty(len(trace), dtype=np.int64)
    last: dict[int, int] = {}
    for k, j in enumerate(trace.worker_ids):
        out[k] = k - last.get(int(j), -1) - 1
        last[int(j)] = k
    return out

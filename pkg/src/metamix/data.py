"""Study-level data containers and log-odds-ratio construction from 2x2 counts."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DataError


@dataclass(frozen=True)
class Study:
    """One study: effect estimate y (e.g. a log odds ratio) and its standard error."""

    label: str
    y: float
    sigma: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.y):
            raise DataError(f"study {self.label!r}: effect estimate must be finite")
        if not (math.isfinite(self.sigma) and self.sigma > 0.0):
            raise DataError(f"study {self.label!r}: standard error must be positive")


@dataclass(frozen=True)
class Dataset:
    """Ordered collection of studies with unique labels, k >= 1."""

    studies: tuple[Study, ...]

    def __post_init__(self) -> None:
        if len(self.studies) < 1:
            raise DataError("dataset needs at least one study")
        labels = [s.label for s in self.studies]
        if len(set(labels)) != len(labels):
            dupes = sorted({x for x in labels if labels.count(x) > 1})
            raise DataError(f"duplicate study labels: {', '.join(dupes)}")

    @property
    def k(self) -> int:
        return len(self.studies)

    @property
    def ys(self) -> tuple[float, ...]:
        return tuple(s.y for s in self.studies)

    @property
    def sigmas(self) -> tuple[float, ...]:
        return tuple(s.sigma for s in self.studies)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.studies)


@dataclass(frozen=True)
class CountTable:
    """2x2 counts: events/size in the treatment and control arms."""

    events_t: int
    n_t: int
    events_c: int
    n_c: int

    def __post_init__(self) -> None:
        for name in ("events_t", "n_t", "events_c", "n_c"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise DataError(f"{name} must be a nonnegative integer, got {v!r}")
        if self.n_t < 1 or self.n_c < 1:
            raise DataError("both arms need at least one subject")
        if self.events_t > self.n_t or self.events_c > self.n_c:
            raise DataError("event count exceeds arm size")


def log_or_from_counts(table: CountTable) -> tuple[float, float]:
    """Woolf log odds ratio and standard error from a 2x2 table.

    If any cell is zero, 0.5 is added to all four cells first. Tables with no
    events in either arm carry no odds-ratio information and are rejected.
    """
    a = float(table.events_t)
    b = float(table.n_t - table.events_t)
    c = float(table.events_c)
    d = float(table.n_c - table.events_c)
    if table.events_t == 0 and table.events_c == 0:
        raise DataError("degenerate table: no events in either arm")
    if min(a, b, c, d) == 0.0:
        a, b, c, d = a + 0.5, b + 0.5, c + 0.5, d + 0.5
    y = math.log(a * d / (b * c))
    sigma = math.sqrt(1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d)
    return y, sigma


def subset_last(dataset: Dataset, n: int) -> Dataset:
    """Keep the last n studies in their original order.

    Chronological ordering of the input is the caller's responsibility.
    """
    if not 1 <= n <= dataset.k:
        raise DataError(f"subset size must be in 1..{dataset.k}, got {n}")
    return Dataset(dataset.studies[-n:])

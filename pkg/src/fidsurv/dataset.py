"""Containers and parsing for right-censored survival data.

A record is a pair ``(time, status)`` where status 1 marks an observed
failure and status 0 a right-censored observation. An optional third
column carries a group label for two-sample procedures. The canonical
CSV layout is ``time,status[,group]`` with an optional header row.
"""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyInput, MalformedRow, UnknownColumn

_KNOWN_COLUMNS = ("time", "status", "group")


def _as_times(values) -> np.ndarray:
    times = np.asarray(values, dtype=float)
    if times.ndim != 1:
        raise ValueError("times must be one-dimensional")
    if times.size == 0:
        raise EmptyInput("dataset has no observations")
    if not np.all(np.isfinite(times)):
        raise ValueError("all times must be finite")
    if np.any(times < 0):
        raise ValueError("times must be nonnegative")
    return times


def _as_status(values, n) -> np.ndarray:
    status = np.asarray(values)
    if status.shape != (n,):
        raise ValueError("status must align with times")
    as_int = status.astype(np.int64)
    if np.any(as_int != status) or not np.isin(as_int, (0, 1)).all():
        raise ValueError("status entries must be 0 (censored) or 1 (failure)")
    return as_int


@dataclass(frozen=True)
class SurvivalDataset:
    """Unordered right-censored sample.

    Attributes
    ----------
    times : ndarray of float
        Observation times, finite and nonnegative.
    status : ndarray of int
        1 where the time is an observed failure, 0 where it is censored.
    group : ndarray of str, optional
        Group labels aligned with ``times``, for two-sample procedures.
    """

    times: np.ndarray
    status: np.ndarray
    group: np.ndarray | None = None

    def __post_init__(self):
        times = _as_times(self.times)
        status = _as_status(self.status, times.size)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "status", status)
        if self.group is not None:
            group = np.asarray(self.group, dtype=str)
            if group.shape != times.shape:
                raise ValueError("group labels must align with times")
            object.__setattr__(self, "group", group)

    @property
    def n(self) -> int:
        return self.times.size

    def fingerprint(self) -> str:
        """Hex digest identifying the data (order-sensitive)."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.times).tobytes())
        h.update(np.ascontiguousarray(self.status).tobytes())
        if self.group is not None:
            h.update("\x1f".join(self.group.tolist()).encode())
        return h.hexdigest()


@dataclass(frozen=True)
class SortedDataset:
    """Validated sample sorted by time, failures first within ties.

    Attributes
    ----------
    times, status : ndarray
        Observations in nondecreasing time order.
    event_times : ndarray
        Distinct failure times, ascending.
    risk_counts : ndarray of int
        Number at risk (times >= s) at each event time.
    event_counts : ndarray of int
        Number of failures at each event time.
    tie_policy : str
        Policy that was applied ("failures_first" or "jitter").
    tie_policy_applied : bool
        True when the input actually contained tied times.
    """

    times: np.ndarray
    status: np.ndarray
    event_times: np.ndarray
    risk_counts: np.ndarray
    event_counts: np.ndarray
    tie_policy: str
    tie_policy_applied: bool
    source_fingerprint: str
    _cum_failures: np.ndarray = field(repr=False, default=None)

    @property
    def n(self) -> int:
        return self.times.size

    @property
    def n_failures(self) -> int:
        return int(self.status.sum())

    def at_risk(self, t):
        """Number of observations with time >= t."""
        t = np.asarray(t, dtype=float)
        return self.n - np.searchsorted(self.times, t, side="left")

    def failures_through(self, t):
        """Number of failures with time <= t."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.times, t, side="right")
        return self._cum_failures[idx]

    def fingerprint(self) -> str:
        return self.source_fingerprint


def sort_and_validate(dataset: SurvivalDataset, tie_policy: str = "failures_first") -> SortedDataset:
    """Sort a dataset by time and precompute risk-set bookkeeping.

    ``tie_policy`` is "failures_first" (stable sort placing failures ahead
    of censored observations at the same time) or "jitter" (break ties with
    a tiny deterministic perturbation seeded from the data fingerprint).
    """
    if tie_policy not in ("failures_first", "jitter"):
        raise ValueError(f"unknown tie policy: {tie_policy!r}")
    times = dataset.times.copy()
    status = dataset.status.copy()
    had_ties = np.unique(times).size < times.size

    if tie_policy == "jitter" and had_ties:
        rng = np.random.default_rng(int(dataset.fingerprint()[:15], 16))
        distinct = np.unique(times)
        gaps = np.diff(distinct)
        scale = (gaps[gaps > 0].min() if gaps.size else max(times.max(), 1.0)) * 1e-9
        times = times + rng.uniform(0.0, scale, size=times.size)

    # stable sort by time, failures ahead of censored at equal times
    order = np.lexsort((1 - status, times))
    times = times[order]
    status = status[order]

    event_times = np.unique(times[status == 1])
    risk_counts = times.size - np.searchsorted(times, event_times, side="left")
    # failures per distinct event time
    idx = np.searchsorted(event_times, times[status == 1])
    event_counts = np.bincount(idx, minlength=event_times.size).astype(np.int64)

    cum = np.concatenate(([0], np.cumsum(status)))
    return SortedDataset(
        times=times,
        status=status,
        event_times=event_times,
        risk_counts=risk_counts.astype(np.int64),
        event_counts=event_counts,
        tie_policy=tie_policy,
        tie_policy_applied=bool(had_ties),
        source_fingerprint=dataset.fingerprint(),
        _cum_failures=cum,
    )


def risk_and_event_counts(sorted_dataset: SortedDataset, t):
    """Return ``(at_risk, failures_through_t)`` for time(s) t."""
    return sorted_dataset.at_risk(t), sorted_dataset.failures_through(t)


def split_groups(dataset: SurvivalDataset) -> dict[str, SurvivalDataset]:
    """Split a labeled dataset into per-group datasets."""
    if dataset.group is None:
        raise ValueError("dataset has no group column")
    out = {}
    for label in np.unique(dataset.group):
        mask = dataset.group == label
        out[str(label)] = SurvivalDataset(dataset.times[mask], dataset.status[mask])
    return out


def _looks_like_header(row) -> bool:
    try:
        float(row[0])
    except ValueError:
        return True
    return False


def parse_dataset(source, delimiter: str = ",", header: str | bool = "auto") -> SurvivalDataset:
    """Parse CSV survival records into a :class:`SurvivalDataset`.

    Parameters
    ----------
    source : str or file-like
        CSV text or an open text stream. Columns are
        ``time,status[,group]``; a header row is detected automatically
        unless ``header`` is True or False.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source, delimiter=delimiter)

    rows = []
    for row in reader:
        if not row or all(not cell.strip() for cell in row):
            continue
        rows.append((reader.line_num, [cell.strip() for cell in row]))
    if not rows:
        raise EmptyInput("no rows in input")

    columns = None
    first_line, first_row = rows[0]
    has_header = header is True or (header == "auto" and _looks_like_header(first_row))
    if has_header:
        names = [cell.lower() for cell in first_row]
        unknown = [name for name in names if name not in _KNOWN_COLUMNS]
        if unknown:
            raise UnknownColumn(f"unknown column name(s): {', '.join(unknown)}")
        if "time" not in names or "status" not in names:
            raise UnknownColumn("header must name both 'time' and 'status'")
        if len(set(names)) != len(names):
            raise UnknownColumn("duplicate column names in header")
        columns = names
        rows = rows[1:]
        if not rows:
            raise EmptyInput("header only, no data rows")

    times, status, groups = [], [], []
    for line_num, row in rows:
        if columns is None:
            if len(row) == 2:
                columns = ["time", "status"]
            elif len(row) == 3:
                columns = ["time", "status", "group"]
            else:
                raise MalformedRow(line_num, f"expected 2 or 3 columns, got {len(row)}")
        if len(row) != len(columns):
            raise MalformedRow(line_num, f"expected {len(columns)} columns, got {len(row)}")
        record = dict(zip(columns, row))
        try:
            t = float(record["time"])
        except ValueError:
            raise MalformedRow(line_num, f"time {record['time']!r} is not a number") from None
        if not np.isfinite(t):
            raise MalformedRow(line_num, "time must be finite")
        if t < 0:
            raise MalformedRow(line_num, "time must be nonnegative")
        if record["status"] not in ("0", "1"):
            raise MalformedRow(line_num, f"status {record['status']!r} must be 0 or 1")
        times.append(t)
        status.append(int(record["status"]))
        if "group" in record:
            groups.append(record["group"])

    group = np.asarray(groups) if groups else None
    return SurvivalDataset(np.asarray(times), np.asarray(status), group)


def write_csv(dataset: SurvivalDataset, stream) -> None:
    """Write a dataset as ``time,status[,group]`` CSV with a header."""
    writer = csv.writer(stream, lineterminator="\n")
    if dataset.group is not None:
        writer.writerow(["time", "status", "group"])
        for t, d, g in zip(dataset.times, dataset.status, dataset.group):
            writer.writerow([repr(float(t)), int(d), g])
    else:
        writer.writerow(["time", "status"])
        for t, d in zip(dataset.times, dataset.status):
            writer.writerow([repr(float(t)), int(d)])

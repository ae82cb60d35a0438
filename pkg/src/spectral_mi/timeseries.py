"""Paired time-series containers, CSV ingestion and window planning."""

import csv
import io
import math
import os
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, FormatError, InsufficientDataError, ParseError


@dataclass(frozen=True)
class TimeSeries:
    """A finite, real-valued sample sequence.

    Parameters
    ----------
    samples : array_like
        One-dimensional real samples. Must be non-empty and finite.
    label : str
        Free-form name, echoed into reports.
    """

    samples: np.ndarray
    label: str = ""

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 1:
            raise ContractError(f"samples must be one-dimensional, got shape {arr.shape}")
        if arr.size < 1:
            raise ContractError("a time series needs at least one sample")
        if not np.all(np.isfinite(arr)):
            raise ContractError(f"time series {self.label!r} contains NaN or Inf")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def length(self):
        return self.samples.size

    def __len__(self):
        return self.samples.size


@dataclass(frozen=True)
class WindowPlan:
    """How a length-N record is cut into analysis windows.

    Windows are consecutive, each ``n_f`` samples long, separated by ``gap``
    skipped samples. ``demean`` asks the pipeline to subtract the global
    sample mean before windowing.
    """

    n_f: int
    n_s: int
    gap: int = 0
    demean: bool = True

    def __post_init__(self):
        if self.n_f < 2:
            raise ContractError(f"n_f must be >= 2, got {self.n_f}")
        if self.n_s < 1:
            raise ContractError(f"n_s must be >= 1, got {self.n_s}")
        if self.gap < 0:
            raise ContractError(f"gap must be >= 0, got {self.gap}")

    @property
    def required_length(self):
        return self.n_s * self.n_f + (self.n_s - 1) * self.gap

    def starts(self):
        return np.arange(self.n_s) * (self.n_f + self.gap)

    def index_ranges(self):
        """Half-open ``(start, stop)`` sample ranges of every window."""
        return [(int(s), int(s) + self.n_f) for s in self.starts()]


def plan_windows(n, n_f, n_s=None, gap=0, demean=True):
    """Build a :class:`WindowPlan` for a record of ``n`` samples.

    ``n_s=None`` (or ``"auto"``) takes as many whole windows as fit:
    ``floor((n + gap) / (n_f + gap))``. Samples left over at the end are
    discarded with a warning.
    """
    if n_f < 2:
        raise ContractError(f"n_f must be >= 2, got {n_f}")
    if gap < 0:
        raise ContractError(f"gap must be >= 0, got {gap}")
    if n_s is None or n_s == "auto":
        n_s = (n + gap) // (n_f + gap)
    n_s = int(n_s)
    if n_s < 1:
        raise InsufficientDataError(
            f"{n} samples cannot fill a single window of {n_f} samples")
    plan = WindowPlan(n_f=int(n_f), n_s=n_s, gap=int(gap), demean=demean)
    if plan.required_length > n:
        raise InsufficientDataError(
            f"plan needs {plan.required_length} samples, only {n} available")
    leftover = n - plan.required_length
    if leftover:
        warnings.warn(f"{leftover} trailing samples do not fill a window and are discarded",
                      stacklevel=2)
    return plan


def demean(ts):
    """Subtract the global sample mean."""
    x = ts.samples - ts.samples.mean()
    # a second pass removes the rounding residue of the first
    x = x - x.mean()
    return TimeSeries(x, ts.label)


def window_matrix(ts, plan):
    """Return the ``(n_s, n_f)`` array of window samples described by ``plan``."""
    if plan.required_length > ts.length:
        raise ContractError(
            f"plan needs {plan.required_length} samples but {ts.label!r} has {ts.length}")
    x = demean(ts).samples if plan.demean else ts.samples
    if plan.gap == 0:
        return x[: plan.n_s * plan.n_f].reshape(plan.n_s, plan.n_f).copy()
    idx = plan.starts()[:, None] + np.arange(plan.n_f)[None, :]
    return x[idx]


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def parse_pair_csv(text):
    """Parse two-column CSV text into a pair of :class:`TimeSeries`."""
    rows = list(csv.reader(io.StringIO(text)))
    # tolerate trailing blank lines, nothing else
    while rows and not any(c.strip() for c in rows[-1]):
        rows.pop()
    if not rows:
        raise FormatError("empty file")
    labels = ("x", "y")
    first_data = 0
    head = [c.strip() for c in rows[0]]
    if len(head) == 2 and not all(_is_number(c) for c in head):
        if any(_is_number(c) for c in head):
            raise ParseError(f"row 1: mixed header and numeric cells {head}", row=1)
        labels = (head[0], head[1])
        first_data = 1
    xs, ys = [], []
    for lineno, row in enumerate(rows[first_data:], start=first_data + 1):
        if len(row) != 2:
            raise FormatError(f"row {lineno}: expected 2 columns, found {len(row)}", row=lineno)
        try:
            a, b = float(row[0]), float(row[1])
        except ValueError:
            raise ParseError(f"row {lineno}: non-numeric cell in {row}", row=lineno) from None
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ParseError(f"row {lineno}: non-finite value in {row}", row=lineno)
        xs.append(a)
        ys.append(b)
    if not xs:
        raise FormatError("no data rows")
    return TimeSeries(np.array(xs), labels[0]), TimeSeries(np.array(ys), labels[1])


def load_pair_csv(path):
    """Load a two-column CSV file (column 1 = X, column 2 = Y).

    An optional single header row supplies the labels; otherwise they
    default to ``"x"`` and ``"y"``.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_pair_csv(fh.read())


def format_pair_csv(x, y):
    if x.length != y.length:
        raise ContractError("series must have equal length")
    buf = io.StringIO()
    buf.write(f"{x.label or 'x'},{y.label or 'y'}\n")
    for a, b in zip(x.samples.tolist(), y.samples.tolist()):
        buf.write(f"{a!r},{b!r}\n")
    return buf.getvalue()


def save_pair_csv(path, x, y):
    write_atomic(path, format_pair_csv(x, y))


def write_atomic(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)

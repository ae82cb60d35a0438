"""Windowed DFT samples of the spectral-process increments, and diagnostics.

Each analysis window contributes one realisation of the increment at every
grid frequency ``i / n_f``; stacking windows gives an ``n_f x n_s`` complex
matrix whose rows are i.i.d. sample sets for the frequency-domain MI
estimators.
"""

import io
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ParseError
from .timeseries import window_matrix, write_atomic

# Entries smaller than this fraction of a window's largest coefficient are
# FFT rounding residue and are set to exactly zero. Residue is a
# deterministic function of the window, so leaving it in place would let the
# scale-free KSG estimator detect "dependence" in pure rounding noise.
SNAP_TOL = 1e-12


@dataclass(frozen=True)
class SpectralIncrements:
    """Increment samples: ``values[i, l]`` is window ``l`` at frequency ``i/n_f``."""

    values: np.ndarray

    @property
    def n_f(self):
        return self.values.shape[0]

    @property
    def n_s(self):
        return self.values.shape[1]

    def freq(self, i):
        return i / self.n_f


@dataclass(frozen=True)
class PowerSpectrum:
    power: np.ndarray

    @property
    def n_f(self):
        return self.power.size


def spectral_increments(ts, plan, snap_tol=SNAP_TOL):
    """Unnormalised forward DFT of every window of ``ts``.

    ``values[i, l] = sum_n x_l[n] exp(-2j pi i n / n_f)`` with a rectangular
    window. The negative-frequency half is filled by conjugation, so
    conjugate symmetry holds exactly and the DC and Nyquist rows are real.
    """
    frames = window_matrix(ts, plan)
    half = np.fft.rfft(frames, axis=1)
    if snap_tol > 0:
        scale = np.abs(half).max(axis=1, keepdims=True)
        re, im = half.real.copy(), half.imag.copy()
        re[np.abs(re) <= snap_tol * scale] = 0.0
        im[np.abs(im) <= snap_tol * scale] = 0.0
        half = re + 1j * im
    n_f = plan.n_f
    full = np.empty((plan.n_s, n_f), dtype=complex)
    n_half = half.shape[1]
    full[:, :n_half] = half
    # rows n_f - i for i = 1 .. ceil(n_f / 2) - 1
    tail = np.arange(n_half, n_f)
    full[:, tail] = np.conj(half[:, n_f - tail])
    return SpectralIncrements(np.ascontiguousarray(full.T))


def integrated_spectrum(inc, window):
    """Cumulative sum over frequency of one window's increments."""
    if not 0 <= window < inc.n_s:
        raise IndexError(f"window {window} out of range [0, {inc.n_s})")
    return np.cumsum(inc.values[:, window])


def power_spectrum(inc):
    """Mean squared magnitude of the increments at each grid frequency."""
    v = inc.values
    return PowerSpectrum((v.real ** 2 + v.imag ** 2).mean(axis=1))


def increment_samples(inc, i):
    """``(n_s, 2)`` array of (real, imaginary) parts of row ``i``."""
    if not 0 <= i < inc.n_f:
        raise IndexError(f"frequency index {i} out of range [0, {inc.n_f})")
    row = inc.values[i]
    return np.column_stack([row.real, row.imag])


def _cell(z):
    return f"{z.real!r}{z.imag:+}j"


def format_increments_csv(inc):
    """CSV text: one row per frequency index, one column per window.

    The first column holds the frequency index; cells are ``re+imj`` strings
    readable by Python's ``complex()``.
    """
    buf = io.StringIO()
    buf.write("freq_index," + ",".join(f"w{l}" for l in range(inc.n_s)) + "\n")
    for i, row in enumerate(inc.values):
        buf.write(f"{i}," + ",".join(_cell(z) for z in row.tolist()) + "\n")
    return buf.getvalue()


def save_increments_csv(path, inc):
    write_atomic(path, format_increments_csv(inc))


def load_increments_csv(path):
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        try:
            if int(cells[0]) != len(rows):
                raise ParseError(f"row {lineno}: frequency index out of order", row=lineno)
            rows.append([complex(c) for c in cells[1:]])
        except ValueError:
            raise ParseError(f"row {lineno}: malformed cell", row=lineno) from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise ParseError("ragged or empty increment matrix")
    return SpectralIncrements(np.array(rows, dtype=complex))


def check_same_windows(inc_x, inc_y):
    if inc_x.n_s != inc_y.n_s:
        raise ContractError(f"window counts differ: {inc_x.n_s} vs {inc_y.n_s}")

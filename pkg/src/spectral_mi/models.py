"""Seeded simulation models and closed-form Gaussian oracles.

Linear model: ``y[n] = (h * x)[n] + w[n]`` with white Gaussian ``x`` and
``w``. Nonlinear models: a random-amplitude, random-phase cosine (one or two
tones) squared plus white noise, with the random parameters redrawn in every
analysis window so that windows are i.i.d.
"""

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ContractError, DomainError, UnsupportedModelError
from .timeseries import TimeSeries

BANDPASS_TAPS = 33
BANDPASS_EDGES = (0.15, 0.35)


@dataclass(frozen=True)
class LinearModelConfig:
    """Configuration for :func:`gen_linear`.

    ``align="causal"`` makes ``y[n]`` depend on ``x[n - m]``, ``m >= 0``.
    ``align="centered"`` advances ``y`` by the filter's group delay
    ``(len(taps) - 1) // 2``, so a linear-phase filter acts without delay.
    A time shift of one process leaves the mutual information rate
    unchanged, but it decides how much of each window of Y is explained by
    the same window of X.
    """

    taps: tuple
    sigma_x: float = 1.0
    sigma_w: float = 1.0
    n_samples: int = 640_000
    seed: int = 0
    align: str = "causal"

    def __post_init__(self):
        taps = tuple(float(t) for t in np.atleast_1d(self.taps))
        if not taps or not all(np.isfinite(taps)):
            raise ContractError("taps must be a non-empty finite sequence")
        object.__setattr__(self, "taps", taps)
        if not self.sigma_x > 0:
            raise ContractError("sigma_x must be > 0")
        if not self.sigma_w >= 0:
            raise ContractError("sigma_w must be >= 0")
        if self.n_samples < 1:
            raise ContractError("n_samples must be >= 1")
        if self.align not in ("causal", "centered"):
            raise ContractError(f"align must be 'causal' or 'centered', got {self.align!r}")

    @property
    def delay(self):
        return (len(self.taps) - 1) // 2 if self.align == "centered" else 0


@dataclass(frozen=True)
class CosineModelConfig:
    """Configuration for the squared random-cosine models.

    ``n_f`` is the window length over which one draw of amplitudes and
    phases is held.
    """

    lambda1: float = 4 / 32
    lambda2: float = None
    sigma_w: float = 1.0
    n_samples: int = 320_000
    seed: int = 0
    n_f: int = 32

    def __post_init__(self):
        for lam in (self.lambda1, self.lambda2):
            if lam is not None and not 0 < lam < 0.5:
                raise ContractError(f"frequencies must lie in (0, 0.5), got {lam}")
        if not self.sigma_w >= 0:
            raise ContractError("sigma_w must be >= 0")
        if self.n_samples < 1 or self.n_f < 1:
            raise ContractError("n_samples and n_f must be >= 1")


def lowpass_taps(beta):
    """Two-tap filter ``[beta, 1 - beta]``."""
    if not 0 <= beta <= 1:
        raise DomainError(f"beta must lie in [0, 1], got {beta}")
    return np.array([beta, 1.0 - beta])


def bandpass_taps(n_taps=BANDPASS_TAPS, edges=BANDPASS_EDGES):
    """Linear-phase Hamming-windowed sinc bandpass, unit gain mid-band.

    Band edges are in cycles per sample.
    """
    f1, f2 = edges
    m = np.arange(n_taps) - (n_taps - 1) / 2
    ideal = 2 * f2 * np.sinc(2 * f2 * m) - 2 * f1 * np.sinc(2 * f1 * m)
    taps = ideal * np.hamming(n_taps)
    centre = 0.5 * (f1 + f2)
    taps /= abs(frequency_response(taps, centre))
    # enforce exact symmetry against rounding in the scaling
    return 0.5 * (taps + taps[::-1])


def frequency_response(taps, lam):
    """``H(lam) = sum_n h[n] exp(-2j pi lam n)`` for scalar or array ``lam``."""
    taps = np.asarray(taps, dtype=float)
    lam = np.asarray(lam, dtype=float)
    n = np.arange(taps.size)
    return np.exp(-2j * np.pi * np.multiply.outer(lam, n)) @ taps


def gen_linear(cfg):
    """Simulate the linear model; returns ``(X, Y)``.

    ``len(taps) - 1`` warm-up samples (plus the alignment delay) are drawn
    ahead so the filter output is stationary from the first sample.
    """
    rng = np.random.default_rng(cfg.seed)
    h = np.asarray(cfg.taps)
    n, warm, delay = cfg.n_samples, h.size - 1, cfg.delay
    x_ext = cfg.sigma_x * rng.standard_normal(n + warm + delay)
    w = cfg.sigma_w * rng.standard_normal(n)
    y = np.convolve(x_ext, h, mode="valid")[delay:delay + n] + w
    x = x_ext[warm:warm + n]
    return TimeSeries(x, "x"), TimeSeries(y, "y")


def rayleigh(rng, size):
    """Rayleigh(1) draws by inversion, ``sqrt(-2 ln U)`` with ``U`` in (0, 1]."""
    u = 1.0 - rng.random(size)
    return np.sqrt(-2.0 * np.log(u))


def _gen_cosines(cfg, freqs):
    rng = np.random.default_rng(cfg.seed)
    n_win = -(-cfg.n_samples // cfg.n_f)
    amp = rayleigh(rng, (n_win, len(freqs)))
    phase = 2 * np.pi * rng.random((n_win, len(freqs)))
    w = cfg.sigma_w * rng.standard_normal(cfg.n_samples)
    n = np.arange(cfg.n_samples)
    win = n // cfg.n_f
    x = np.zeros(cfg.n_samples)
    for c, lam in enumerate(freqs):
        x += amp[win, c] * np.cos(2 * np.pi * lam * n + phase[win, c])
    y = x * x + w
    return TimeSeries(x, "x"), TimeSeries(y, "y")


def gen_cosine_square(cfg):
    """``x = A cos(2 pi lambda1 n + theta)``, ``y = x**2 + w``."""
    if cfg.lambda2 is not None:
        raise ContractError("single-cosine model takes no lambda2")
    return _gen_cosines(cfg, (cfg.lambda1,))


def gen_two_cosine_square(cfg):
    """Two independent random tones at ``lambda1`` and ``lambda2``, squared."""
    if cfg.lambda2 is None:
        raise ContractError("two-cosine model needs lambda2")
    return _gen_cosines(cfg, (cfg.lambda1, cfg.lambda2))


def expected_pairs(cfg):
    """Frequency pairs (as fractions of a cycle) that carry dependence.

    The square of a tone at ``a`` puts energy at ``0`` and ``2a``; two tones
    add their difference and sum frequencies.
    """
    a = cfg.lambda1
    if cfg.lambda2 is None:
        return [(a, 0.0), (a, 2 * a)]
    b = cfg.lambda2
    return [(a, 0.0), (a, b - a), (a, 2 * a), (a, b + a),
            (b, 0.0), (b, b - a), (b, b + a), (b, 2 * b)]


def expected_index_pairs(cfg):
    """:func:`expected_pairs` as frequency indices on the ``n_f`` grid."""
    return [(int(round(p * cfg.n_f)), int(round(q * cfg.n_f))) for p, q in expected_pairs(cfg)]


def _snr(taps, sigma_x, sigma_w, lam):
    return sigma_x ** 2 * np.abs(frequency_response(taps, lam)) ** 2 / sigma_w ** 2


def oracle_mi_gaussian(taps, sigma_x=1.0, sigma_w=1.0):
    """MI rate (nats/sample) of the Gaussian linear model.

    ``integral_0^0.5 ln(1 + sigma_x^2 |H|^2 / sigma_w^2) dlam`` by adaptive
    quadrature.
    """
    if not sigma_w > 0:
        raise DomainError("the MI rate diverges for noiseless observations (sigma_w = 0)")
    taps = np.asarray(taps, dtype=float)
    value, _ = integrate.quad(lambda lam: np.log1p(_snr(taps, sigma_x, sigma_w, lam)),
                              0.0, 0.5, epsabs=1e-10, epsrel=1e-10,
                              limit=200)
    return float(value)


def oracle_mif_gaussian(taps, sigma_x, sigma_w, lam, real=False):
    """Same-frequency MIF of the Gaussian linear model, ``-ln(1 - C(lam))``.

    ``C`` is the magnitude-squared coherence. ``real=True`` gives the value
    for a real-valued increment (the DC and Nyquist bins of a real series),
    which carries one degree of freedom instead of two: half the above.
    """
    if not sigma_w > 0:
        raise DomainError("sigma_w must be > 0")
    value = np.log1p(_snr(taps, sigma_x, sigma_w, lam))
    return 0.5 * value if real else value


def coherence(taps, sigma_x, sigma_w, lam):
    s = sigma_x ** 2 * np.abs(frequency_response(taps, lam)) ** 2
    return s / (s + sigma_w ** 2)


def is_real_bin(i, n_f):
    """True for the DC and (even ``n_f``) Nyquist bins."""
    return i % n_f == 0 or 2 * i == n_f


MODELS = ("lowpass", "bandpass", "cosine2", "twocosine2")


def oracle_for(model, **kw):
    """Dispatch used by the CLI; only the Gaussian models have an oracle."""
    if model == "lowpass":
        taps = lowpass_taps(kw.get("beta", 0.5))
    elif model == "bandpass":
        taps = bandpass_taps()
    elif model in MODELS:
        raise UnsupportedModelError(f"no closed-form MI for nonlinear model {model!r}")
    else:
        raise UnsupportedModelError(f"unknown model {model!r}")
    return oracle_mi_gaussian(taps, kw.get("sigma_x", 1.0), kw.get("sigma_w", 1.0))

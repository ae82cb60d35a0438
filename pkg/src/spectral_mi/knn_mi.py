"""Kraskov-Stoegbauer-Grassberger (algorithm 1) mutual information estimator.

Distances are Chebyshev (max-norm) in every space. For each point the
distance ``eps`` to its k-th nearest joint-space neighbour (self excluded)
is found, then the marginal neighbours *strictly* closer than ``eps`` are
counted. The estimate, in nats, is::

    psi(k) + psi(N) - mean(psi(n_x + 1) + psi(n_y + 1))
"""

import zlib
from dataclasses import dataclass

import numpy as np

from . import _kdtree
from .errors import ContractError, DomainError

BRUTE_FORCE_MAX = 2048
LEAF_SIZE = 16

# Bernoulli-number coefficients B_2k / (2k) of the asymptotic series
_ASYMPTOTIC = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
_SHIFT_TO = 10.0


def digamma(x):
    """Digamma function for positive real arguments (scalar or array).

    Arguments below 10 are shifted up with ``psi(x) = psi(x + 1) - 1/x``;
    the asymptotic expansion then converges to well under 1e-13.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("digamma is only defined here for x > 0")
    z = arr.copy()
    acc = np.zeros_like(z)
    small = z < _SHIFT_TO
    while np.any(small):
        acc[small] -= 1.0 / z[small]
        z[small] += 1.0
        small = z < _SHIFT_TO
    inv2 = 1.0 / (z * z)
    series = np.zeros_like(z)
    for c in reversed(_ASYMPTOTIC):
        series = (series + c) * inv2
    out = acc + np.log(z) - 0.5 / z - series
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class KsgParams:
    """Estimator settings.

    ``jitter_scale`` adds seeded Gaussian noise of that size times each
    coordinate's standard deviation, to break exact ties; zero disables it.
    ``neighbors`` selects the search: ``"brute"``, ``"tree"`` or ``"auto"``
    (brute force up to 2048 points).
    """

    k: int = 3
    jitter_scale: float = 1e-10
    seed: int = 0
    neighbors: str = "auto"

    def __post_init__(self):
        if self.k < 1:
            raise ContractError(f"k must be >= 1, got {self.k}")
        if self.jitter_scale < 0:
            raise ContractError("jitter_scale must be >= 0")
        if self.neighbors not in ("auto", "brute", "tree"):
            raise ContractError(f"unknown neighbor search {self.neighbors!r}")


def as_cloud(points, name="points"):
    """Validate and return an ``(N, d)`` float array."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[1] < 1:
        raise ContractError(f"{name} must be an (N, d) array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} has non-finite coordinates")
    return np.ascontiguousarray(arr)


def _check_pair(xs, ys, k):
    if xs.shape[0] != ys.shape[0]:
        raise ContractError(f"point counts differ: {xs.shape[0]} vs {ys.shape[0]}")
    if xs.shape[0] <= k:
        raise ContractError(f"need more than k={k} points, got {xs.shape[0]}")


def jitter(points, scale, seed):
    """Add tie-breaking noise proportional to each coordinate's spread.

    The noise stream is keyed on ``seed`` and the cloud's own bytes, so a
    cloud receives the same noise whichever argument slot it occupies.
    Constant coordinates get no noise; they add nothing to any Chebyshev
    distance.
    """
    if scale == 0:
        return points
    spread = points.std(axis=0)
    if not np.any(spread > 0):
        return points
    key = zlib.crc32(points.tobytes())
    rng = np.random.default_rng([seed, key, points.shape[1]])
    return points + rng.standard_normal(points.shape) * (scale * spread)


def _kth_distance(points, kk, method):
    if method == "brute":
        return _kdtree.brute_kth_distance(points, kk)
    tree = _kdtree.build_tree(points, LEAF_SIZE)
    return _kdtree.tree_kth_distance(tree, kk)


def _count_strict(points, radii, method):
    if method == "brute":
        return _kdtree.brute_count_within(points, radii)
    if points.shape[1] <= 2:
        if points.shape[1] == 1:
            points = np.hstack([points, np.zeros_like(points)])
        planar = _kdtree.build_planar(points)
        return _kdtree.planar_count_within(planar, points, radii)
    tree = _kdtree.build_tree(points, LEAF_SIZE)
    return _kdtree.tree_count_within(tree, radii)


def _resolve(method, n):
    if method == "auto":
        return "brute" if n <= BRUTE_FORCE_MAX else "tree"
    return method


def knn_counts(xs, ys, k=3, method="auto"):
    """Per-point KSG internals ``(eps, n_x, n_y)`` for raw (unjittered) clouds.

    ``eps[l]`` is the joint-space Chebyshev distance to the k-th nearest
    neighbour of point ``l`` excluding itself; ``n_x[l]`` and ``n_y[l]``
    count other points strictly within ``eps[l]`` in each marginal space.
    Exact duplicates sit at distance zero and so are never counted when
    ``eps`` is zero.
    """
    xs = as_cloud(xs, "xs")
    ys = as_cloud(ys, "ys")
    _check_pair(xs, ys, k)
    method = _resolve(method, xs.shape[0])
    joint = np.ascontiguousarray(np.hstack([xs, ys]))
    # k + 1 because every point is its own nearest neighbour
    eps = _kth_distance(joint, k + 1, method)
    n_x = np.maximum(_count_strict(xs, eps, method) - 1, 0)
    n_y = np.maximum(_count_strict(ys, eps, method) - 1, 0)
    return eps, n_x, n_y


def _is_constant(points):
    return bool(np.all(points == points[0]))


def ksg_mi(xs, ys, params=KsgParams()):
    """KSG estimate of I(X; Y) in nats.

    The value may be slightly negative near independence. A cloud whose
    points are all identical carries no information and yields exactly 0.
    """
    xs = as_cloud(xs, "xs")
    ys = as_cloud(ys, "ys")
    _check_pair(xs, ys, params.k)
    if _is_constant(xs) or _is_constant(ys):
        return 0.0
    xs = jitter(xs, params.jitter_scale, params.seed)
    ys = jitter(ys, params.jitter_scale, params.seed)
    _, n_x, n_y = knn_counts(xs, ys, params.k, params.neighbors)
    n = xs.shape[0]
    terms = digamma(n_x + 1.0) + digamma(n_y + 1.0)
    return float(digamma(params.k) + digamma(n) - terms.mean())

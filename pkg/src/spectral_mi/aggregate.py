"""From significant MIF pairs to a single MI estimate.

The coupled sets are the row and column unions of the significant pairs.
The joint estimate stacks the increments of every coupled frequency into
one ``2P``- and one ``2Q``-dimensional vector, estimates their MI with KSG
and divides by ``max(P, Q)``. For purely same-frequency coupling (linear
models) the diagonal shortcut ``(1/n_f) sum_{i <= n_f/2} MIF(i, i)`` is used.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError
from .knn_mi import KsgParams, ksg_mi

METHODS = ("joint", "linear_shortcut", "clustered", "zero_no_coupling")


@dataclass(frozen=True)
class CouplingSets:
    lambda_x: tuple = ()
    lambda_y: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "lambda_x", tuple(sorted({int(i) for i in self.lambda_x})))
        object.__setattr__(self, "lambda_y", tuple(sorted({int(j) for j in self.lambda_y})))

    @property
    def p(self):
        return len(self.lambda_x)

    @property
    def q(self):
        return len(self.lambda_y)


@dataclass(frozen=True)
class MiReport:
    """Headline estimate plus everything needed to reproduce it.

    ``mi_nats`` is clamped at zero; ``raw_mi_nats`` keeps the estimator's
    own (possibly negative) output.
    """

    raw_mi_nats: float
    method: str
    sets: CouplingSets = field(default_factory=CouplingSets)
    n_f: int = None
    n_s: int = None
    k: int = None
    n_p: int = None
    seed: int = None
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ContractError(f"unknown method {self.method!r}")
        if (self.method == "zero_no_coupling") != (self.sets.p == 0 and self.sets.q == 0):
            raise ContractError("zero_no_coupling is reported exactly when no pair is coupled")

    @property
    def mi_nats(self):
        return max(self.raw_mi_nats, 0.0)

    @property
    def mi_bits(self):
        return self.mi_nats / math.log(2)

    def to_dict(self):
        doc = {
            "mi_nats": self.mi_nats,
            "mi_bits": self.mi_bits,
            "raw_mi_nats": self.raw_mi_nats,
            "method": self.method,
            "lambda_x": list(self.sets.lambda_x),
            "lambda_y": list(self.sets.lambda_y),
            "p": self.sets.p,
            "q": self.sets.q,
            "n_f": self.n_f,
            "n_s": self.n_s,
            "k": self.k,
            "n_p": self.n_p,
            "seed": self.seed,
        }
        if self.config:
            doc["config"] = dict(self.config)
        return doc

    def summary(self):
        return f"MI = {self.mi_nats:.6g} nats ({self.mi_bits:.6g} bits) via {self.method}"


def coupled_sets(mask):
    """Row and column unions of the significant pairs of ``mask``."""
    a, b = np.nonzero(mask.significant)
    return CouplingSets(tuple(mask.grid[a]), tuple(mask.grid[b]))


def stack_increments(inc, indices):
    """``(n_s, 2 * len(indices))`` array ``[Re_1, Im_1, Re_2, Im_2, ...]``.

    Indices are sorted first, so the input order does not matter.
    """
    idx = sorted({int(i) for i in indices})
    if not idx:
        raise ContractError("cannot stack an empty frequency set")
    if idx[0] < 0 or idx[-1] >= inc.n_f:
        raise ContractError(f"frequency indices must lie in [0, {inc.n_f})")
    rows = inc.values[idx]
    out = np.empty((inc.n_s, 2 * len(idx)))
    out[:, 0::2] = rows.real.T
    out[:, 1::2] = rows.imag.T
    return out


def _shape(inc_x):
    return {"n_f": inc_x.n_f, "n_s": inc_x.n_s}


def estimate_mi(inc_x, inc_y, sets, params=KsgParams()):
    """Joint estimate ``I(dX(Lx); dY(Ly)) / max(P, Q)``."""
    if sets.p == 0 or sets.q == 0:
        return MiReport(0.0, "zero_no_coupling", CouplingSets(), k=params.k, **_shape(inc_x))
    raw = ksg_mi(stack_increments(inc_x, sets.lambda_x), stack_increments(inc_y, sets.lambda_y),
                 params)
    return MiReport(raw / max(sets.p, sets.q), "joint", sets, k=params.k, **_shape(inc_x))


def estimate_mi_linear(mif, sets=None):
    """Diagonal shortcut ``(1/n_f) sum_{i=0}^{n_f/2} max(MIF(i, i), 0)``."""
    if mif.mode != "cross":
        raise ContractError("the diagonal shortcut needs a cross-process MIF matrix")
    total = 0.0
    for a, i in enumerate(mif.grid):
        if 2 * i <= mif.n_f:
            v = mif.values[a, a]
            if not np.isfinite(v):
                raise ContractError(f"diagonal entry at frequency index {i} is missing")
            total += max(float(v), 0.0)
    if sets is None:
        sets = CouplingSets(tuple(mif.grid), tuple(mif.grid))
    if sets.p == 0 and sets.q == 0:
        return MiReport(0.0, "zero_no_coupling", sets, n_f=mif.n_f)
    return MiReport(total / mif.n_f, "linear_shortcut", sets, n_f=mif.n_f)


def coupling_components(mask):
    """Connected components of the bipartite graph of significant pairs.

    Returns a list of :class:`CouplingSets`, ordered by smallest X index.
    """
    pairs = [(int(i), int(j)) for i, j in mask.pairs()]
    parent = {}

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for i, j in pairs:
        for u in (("x", i), ("y", j)):
            parent.setdefault(u, u)
        ru, rv = find(("x", i)), find(("y", j))
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    groups = {}
    for u in parent:
        groups.setdefault(find(u), []).append(u)
    comps = []
    for members in groups.values():
        xs = [i for side, i in members if side == "x"]
        ys = [j for side, j in members if side == "y"]
        comps.append(CouplingSets(tuple(xs), tuple(ys)))
    comps.sort(key=lambda c: (c.lambda_x, c.lambda_y))
    return comps


def clustered_mi(mask, inc_x, inc_y, params=KsgParams()):
    """Chain-rule estimate: sum of per-component joint MI over global ``max(P, Q)``."""
    sets = coupled_sets(mask)
    if sets.p == 0:
        return MiReport(0.0, "zero_no_coupling", sets, k=params.k, **_shape(inc_x))
    total = 0.0
    for comp in coupling_components(mask):
        total += ksg_mi(stack_increments(inc_x, comp.lambda_x),
                        stack_increments(inc_y, comp.lambda_y), params)
    return MiReport(total / max(sets.p, sets.q), "clustered", sets, k=params.k, **_shape(inc_x))


def is_diagonal_only(mask):
    pairs = mask.pairs()
    return bool(pairs) and all(i == j for i, j in pairs)


def auto_method(mask, mif, inc_x, inc_y, params=KsgParams(), clustered=False):
    """Pick the estimator the significance pattern calls for.

    No significant pair gives zero; same-frequency pairs only give the
    diagonal shortcut; anything else the joint (or clustered) estimate.
    """
    sets = coupled_sets(mask)
    if sets.p == 0:
        return MiReport(0.0, "zero_no_coupling", sets, k=params.k, **_shape(inc_x))
    if is_diagonal_only(mask):
        rep = estimate_mi_linear(mif, sets)
        return MiReport(rep.raw_mi_nats, rep.method, sets, k=params.k, **_shape(inc_x))
    if clustered:
        return clustered_mi(mask, inc_x, inc_y, params)
    return estimate_mi(inc_x, inc_y, sets, params)

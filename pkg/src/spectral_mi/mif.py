"""Mutual information in frequency and its permutation significance test.

``MIF(i, j)`` is the KSG estimate between the 2-D (real, imaginary) samples
of X's increments at frequency ``i/n_f`` and Y's at ``j/n_f``. In ``auto``
mode both sides come from the same process; the matrix is then symmetric
and its diagonal is excluded (the true value is infinite).
"""

import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ExcludedPairError
from .knn_mi import KsgParams, ksg_mi
from .spectral import check_same_windows, increment_samples
from .timeseries import write_atomic

MODES = ("cross", "auto")


def default_grid(n_f, full=False):
    """Frequency indices analysed: ``0..n_f//2`` or, with ``full``, all of them."""
    return np.arange(n_f) if full else np.arange(n_f // 2 + 1)


def replicate_rng(base_seed, i, j, replicate):
    """Independent generator for one (pair, replicate) task.

    Streams depend only on their key, so results do not depend on the
    order or process in which tasks run.
    """
    return np.random.default_rng(np.random.SeedSequence([base_seed, i, j, replicate]))


@dataclass(frozen=True)
class MifMatrix:
    """MIF estimates (nats) on ``grid x grid``; excluded cells hold NaN."""

    values: np.ndarray
    grid: np.ndarray
    n_f: int
    mode: str = "cross"

    @property
    def excluded(self):
        if self.mode == "auto":
            return np.eye(len(self.grid), dtype=bool)
        return np.zeros((len(self.grid),) * 2, dtype=bool)

    def position(self, i):
        hits = np.flatnonzero(self.grid == i)
        if hits.size == 0:
            raise IndexError(f"frequency index {i} not on the grid")
        return int(hits[0])

    def at(self, i, j):
        return float(self.values[self.position(i), self.position(j)])

    def diagonal(self):
        return np.diag(self.values).copy()


@dataclass(frozen=True)
class SignificanceMask:
    """Per-pair permutation verdicts aligned with a :class:`MifMatrix`.

    ``exceed[a, b]`` counts surrogates at or above the observed value; with
    ``early_stop`` the test on a pair halts at the first such surrogate, so
    for non-significant pairs the count is a lower bound. Excluded cells
    hold -1.
    """

    significant: np.ndarray
    exceed: np.ndarray
    grid: np.ndarray
    n_p: int
    seed: int
    early_stop: bool = True

    @property
    def alpha(self):
        return 1.0 / (self.n_p + 1)

    def pairs(self):
        """Significant ``(i, j)`` frequency-index pairs, row-major."""
        a, b = np.nonzero(self.significant)
        return [(int(self.grid[p]), int(self.grid[q])) for p, q in zip(a, b)]


@dataclass(frozen=True)
class PermutationResult:
    observed: float
    significant: bool
    exceed_count: int
    surrogates: np.ndarray


def _rows(inc_x, i, inc_y, j):
    check_same_windows(inc_x, inc_y)
    if inc_x is inc_y and i == j:
        raise ExcludedPairError(
            f"within-process MIF at identical frequencies ({i}, {j}) is infinite")
    return increment_samples(inc_x, i), increment_samples(inc_y, j)


def mif_pair(inc_x, i, inc_y, j, params=KsgParams()):
    """MIF between X at frequency index ``i`` and Y at ``j``, in nats.

    Pass the same :class:`SpectralIncrements` object twice for the
    within-process quantity; then ``i == j`` is refused.
    """
    xs, ys = _rows(inc_x, i, inc_y, j)
    return ksg_mi(xs, ys, params)


def permutation_test(inc_x, i, inc_y, j, n_p, params=KsgParams(), base_seed=0,
                     early_stop=False, observed=None):
    """Compare the observed MIF with ``n_p`` pairing-destroying surrogates.

    Replicate ``r`` shuffles X's samples with :func:`replicate_rng`
    ``(base_seed, i, j, r)``. The pair is significant when the observed value
    is strictly larger than every surrogate.
    """
    if n_p < 1:
        raise ContractError(f"n_p must be >= 1, got {n_p}")
    xs, ys = _rows(inc_x, i, inc_y, j)
    if observed is None:
        observed = ksg_mi(xs, ys, params)
    surrogates = []
    exceed = 0
    for r in range(n_p):
        perm = replicate_rng(base_seed, i, j, r).permutation(xs.shape[0])
        value = ksg_mi(xs[perm], ys, params)
        surrogates.append(value)
        if value >= observed:
            exceed += 1
            if early_stop:
                break
    return PermutationResult(float(observed), exceed == 0, exceed, np.array(surrogates))


def _check_mode(inc_x, inc_y, mode):
    if mode not in MODES:
        raise ContractError(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "auto":
        if inc_y is not None and inc_y is not inc_x:
            raise ContractError("auto mode analyses a single process; pass inc_y=None")
        return inc_x, inc_x
    if inc_y is None:
        raise ContractError("cross mode needs both processes")
    check_same_windows(inc_x, inc_y)
    return inc_x, inc_y


def _pair_tasks(grid, mode):
    """(row, col) grid positions to evaluate; auto mode takes a < b only."""
    g = len(grid)
    if mode == "auto":
        return [(a, b) for a in range(g) for b in range(a + 1, g)]
    return [(a, b) for a in range(g) for b in range(g)]


def _run(fn, tasks, jobs):
    if jobs is None or jobs <= 1 or len(tasks) < 2:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, *zip(*tasks), chunksize=max(1, len(tasks) // (4 * jobs))))


def _check_grid(grid, n_f):
    grid = np.asarray(grid, dtype=int)
    if grid.ndim != 1 or grid.size == 0:
        raise ContractError("grid must be a non-empty 1-D index set")
    if np.any(grid < 0) or np.any(grid >= n_f):
        raise ContractError(f"grid indices must lie in [0, {n_f})")
    return grid


def mif_matrix(inc_x, inc_y=None, grid=None, params=KsgParams(), mode="cross", jobs=1):
    """MIF over every grid pair (upper triangle mirrored in auto mode)."""
    inc_x, inc_y = _check_mode(inc_x, inc_y, mode)
    grid = _check_grid(default_grid(inc_x.n_f) if grid is None else grid, inc_x.n_f)
    tasks = _pair_tasks(grid, mode)
    values = np.full((len(grid), len(grid)), np.nan)
    results = _run(_PairEstimate(inc_x, inc_y, grid, params),
                   tasks, jobs)
    for (a, b), v in zip(tasks, results):
        values[a, b] = v
        if mode == "auto":
            values[b, a] = v
    return MifMatrix(values, grid, inc_x.n_f, mode)


def mif_diagonal(inc_x, inc_y, grid=None, params=KsgParams(), jobs=1):
    """Same-frequency MIF only; every off-diagonal cell is left NaN."""
    inc_x, inc_y = _check_mode(inc_x, inc_y, "cross")
    grid = _check_grid(default_grid(inc_x.n_f) if grid is None else grid, inc_x.n_f)
    tasks = [(a, a) for a in range(len(grid))]
    values = np.full((len(grid), len(grid)), np.nan)
    for (a, _), v in zip(tasks, _run(_PairEstimate(inc_x, inc_y, grid, params), tasks, jobs)):
        values[a, a] = v
    return MifMatrix(values, grid, inc_x.n_f, "cross")


class _PairEstimate:
    # picklable callable for process pools
    def __init__(self, inc_x, inc_y, grid, params):
        self.inc_x, self.inc_y, self.grid, self.params = inc_x, inc_y, grid, params

    def __call__(self, a, b):
        return mif_pair(self.inc_x, int(self.grid[a]), self.inc_y, int(self.grid[b]),
                        self.params)


class _PairTest:
    def __init__(self, inc_x, inc_y, grid, n_p, params, base_seed, early_stop, observed):
        self.inc_x, self.inc_y, self.grid = inc_x, inc_y, grid
        self.n_p, self.params, self.base_seed = n_p, params, base_seed
        self.early_stop, self.observed = early_stop, observed

    def __call__(self, a, b):
        obs = None if self.observed is None else float(self.observed[a, b])
        res = permutation_test(self.inc_x, int(self.grid[a]), self.inc_y, int(self.grid[b]),
                               self.n_p, self.params, self.base_seed, self.early_stop, obs)
        return res.significant, res.exceed_count


def significance_mask(inc_x, inc_y=None, grid=None, n_p=99, params=KsgParams(), base_seed=0,
                      mode="cross", early_stop=True, mif=None, jobs=1):
    """Permutation verdict for every grid pair.

    ``mif`` may carry already computed observed values (they must come from
    the same increments and ``params``); otherwise they are recomputed.
    """
    inc_x, inc_y = _check_mode(inc_x, inc_y, mode)
    if mif is not None:
        grid = mif.grid
    grid = _check_grid(default_grid(inc_x.n_f) if grid is None else grid, inc_x.n_f)
    tasks = _pair_tasks(grid, mode)
    observed = None if mif is None else mif.values
    results = _run(_PairTest(inc_x, inc_y, grid, n_p, params, base_seed, early_stop, observed),
                   tasks, jobs)
    g = len(grid)
    significant = np.zeros((g, g), dtype=bool)
    exceed = np.full((g, g), -1, dtype=int)
    for (a, b), (sig, exc) in zip(tasks, results):
        significant[a, b] = sig
        exceed[a, b] = exc
        if mode == "auto":
            significant[b, a] = sig
            exceed[b, a] = exc
    return SignificanceMask(significant, exceed, grid, n_p, base_seed, early_stop)


def analyze(inc_x, inc_y=None, grid=None, n_p=99, params=KsgParams(), base_seed=0,
            mode="cross", early_stop=True, jobs=1):
    """MIF matrix and significance mask, each observed value computed once."""
    mif = mif_matrix(inc_x, inc_y, grid, params, mode, jobs)
    mask = significance_mask(inc_x, inc_y, None, n_p, params, base_seed, mode,
                             early_stop, mif, jobs)
    return mif, mask


# -- export -----------------------------------------------------------------

def _grid_csv(grid, cells):
    buf = io.StringIO()
    buf.write("i\\j," + ",".join(str(int(j)) for j in grid) + "\n")
    for i, row in zip(grid, cells):
        buf.write(f"{int(i)}," + ",".join(row) + "\n")
    return buf.getvalue()


def _mif_cell(excluded, v):
    if excluded:
        return "excluded"
    return repr(float(v)) if np.isfinite(v) else ""


def format_mif_csv(mif):
    """Grid-indexed CSV of MIF values in nats.

    Excluded cells read ``excluded``; cells never computed are left empty.
    """
    excl = mif.excluded
    cells = [[_mif_cell(excl[a, b], mif.values[a, b])
              for b in range(len(mif.grid))] for a in range(len(mif.grid))]
    return _grid_csv(mif.grid, cells)


def format_mask_csv(mask, excluded=None):
    g = len(mask.grid)
    if excluded is None:
        excluded = np.zeros((g, g), dtype=bool)
    cells = [["excluded" if excluded[a, b] else str(int(mask.significant[a, b]))
              for b in range(g)] for a in range(g)]
    return _grid_csv(mask.grid, cells)


def to_json_dict(mif, mask=None, params=None):
    """JSON-ready document with grid, values (null when excluded) and mask."""
    excl = mif.excluded
    doc = {
        "n_f": int(mif.n_f),
        "mode": mif.mode,
        "grid": [int(i) for i in mif.grid],
        "units": "nats",
        "values": [[None if excl[a, b] or not np.isfinite(mif.values[a, b])
                    else float(mif.values[a, b])
                    for b in range(len(mif.grid))] for a in range(len(mif.grid))],
    }
    if params is not None:
        doc["k"] = params.k
        doc["jitter_scale"] = params.jitter_scale
        doc["ksg_seed"] = params.seed
    if mask is not None:
        doc.update({
            "significant": mask.significant.astype(int).tolist(),
            "exceed_count": mask.exceed.tolist(),
            "n_p": mask.n_p,
            "alpha": mask.alpha,
            "seed": mask.seed,
            "early_stop": mask.early_stop,
        })
    return doc


def save_mif(prefix, mif, mask=None, params=None, extra=None):
    """Write ``<prefix>_mif.csv``, ``<prefix>_mask.csv`` and ``<prefix>_mif.json``."""
    paths = {"mif_csv": f"{prefix}_mif.csv", "mif_json": f"{prefix}_mif.json"}
    write_atomic(paths["mif_csv"], format_mif_csv(mif))
    if mask is not None:
        paths["mask_csv"] = f"{prefix}_mask.csv"
        write_atomic(paths["mask_csv"], format_mask_csv(mask, mif.excluded))
    doc = to_json_dict(mif, mask, params)
    if extra:
        doc["config"] = extra
    write_atomic(paths["mif_json"], json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return paths


def load_mif_json(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    values = np.array([[np.nan if v is None else v for v in row] for row in doc["values"]])
    mif = MifMatrix(values, np.array(doc["grid"]), doc["n_f"], doc["mode"])
    mask = None
    if "significant" in doc:
        mask = SignificanceMask(np.array(doc["significant"], dtype=bool),
                                np.array(doc["exceed_count"]), np.array(doc["grid"]),
                                doc["n_p"], doc["seed"], doc.get("early_stop", True))
    return mif, mask

"""End-to-end acceptance criteria, each at its stated tolerance.

Every test prints (and the session summary repeats) one PASS/FAIL line.
The full suite takes roughly an hour on one core.
"""

import math
import subprocess
import sys
import time
from functools import lru_cache

import numpy as np
import pytest
from scipy.spatial.distance import cdist

from spectral_mi.aggregate import estimate_mi_linear
from spectral_mi.knn_mi import KsgParams, knn_counts, ksg_mi
from spectral_mi.mif import default_grid, mif_diagonal, mif_matrix
from spectral_mi.models import (CosineModelConfig, LinearModelConfig, bandpass_taps,
                                expected_index_pairs, gen_cosine_square, gen_linear,
                                gen_two_cosine_square, is_real_bin, lowpass_taps,
                                oracle_mi_gaussian, oracle_mif_gaussian)
from spectral_mi.pipeline import RunConfig, run_estimate
from spectral_mi.spectral import spectral_increments
from spectral_mi.timeseries import TimeSeries, WindowPlan

pytestmark = pytest.mark.acceptance

SEEDS = range(10)
N_S = 10_000


def _linear_increments(taps, sigma_w, seed, n_f=64, align="causal"):
    cfg = LinearModelConfig(tuple(taps), 1.0, sigma_w, n_f * N_S, seed, align)
    x, y = gen_linear(cfg)
    plan = WindowPlan(n_f, N_S)
    return spectral_increments(x, plan), spectral_increments(y, plan)


def _linear_path(taps, sigma_w, seed, align="causal"):
    ix, iy = _linear_increments(taps, sigma_w, seed, align=align)
    return estimate_mi_linear(mif_diagonal(ix, iy)).mi_nats


def _within(est, ref):
    return abs(est - ref) <= max(0.10 * abs(ref), 0.03)


# -- 1 ---------------------------------------------------------------------------------

def test_criterion_01_ksg_gaussian(report_criterion):
    t0 = time.perf_counter()
    rows, ok = [], True
    for rho in (0.0, 0.5, 0.9):
        est = []
        for seed in SEEDS:
            rng = np.random.default_rng(seed)
            z = rng.standard_normal((N_S, 2))
            x = z[:, 0]
            y = rho * x + math.sqrt(1 - rho ** 2) * z[:, 1]
            est.append(ksg_mi(x, y, KsgParams(k=3, seed=seed)))
        truth = -0.5 * math.log(1 - rho ** 2)
        mean = float(np.mean(est))
        ok &= abs(mean - truth) <= 0.05
        rows.append(f"rho={rho}: {mean:.4f} vs {truth:.4f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed <= 30
    assert report_criterion(1, "KSG vs Gaussian closed form (+-0.05, <=30 s)", ok,
                            "; ".join(rows) + f"; {elapsed:.1f} s")


# -- 2 ---------------------------------------------------------------------------------

def _reference_counts(xs, ys, k):
    joint = np.hstack([xs, ys])
    eps = np.sort(cdist(joint, joint, "chebyshev"), axis=1)[:, k]
    nx = np.maximum((cdist(xs, xs, "chebyshev") < eps[:, None]).sum(axis=1) - 1, 0)
    ny = np.maximum((cdist(ys, ys, "chebyshev") < eps[:, None]).sum(axis=1) - 1, 0)
    return eps, nx, ny


def test_criterion_02_bruteforce_equivalence(report_criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    mismatches = 0
    for _ in range(200):
        n = int(rng.integers(5, 501))
        dx = int(rng.integers(1, 5))
        dy = int(rng.integers(1, 9 - dx))
        k = int(rng.integers(1, min(6, n)))
        levels = rng.choice([2, 16, 0])
        xs = rng.standard_normal((n, dx))
        ys = rng.standard_normal((n, dy)) + xs[:, :1]
        if levels:
            # coarse rounding forces ties in every space
            xs, ys = np.round(xs * levels) / levels, np.round(ys * levels) / levels
        ref = _reference_counts(xs, ys, k)
        for method in ("tree", "brute"):
            got = knn_counts(xs, ys, k, method)
            if not all(np.array_equal(a, b) for a, b in zip(got, ref)):
                mismatches += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed <= 60
    assert report_criterion(2, "accelerated == brute-force counts on 200 instances (<=60 s)", ok,
                            f"{mismatches} mismatches; {elapsed:.1f} s")


# -- 3 ---------------------------------------------------------------------------------

def test_criterion_03_gaussian_mif(report_criterion):
    t0 = time.perf_counter()
    taps = lowpass_taps(0.5)
    ix, iy = _linear_increments(taps, 1.0, seed=0)
    grid = default_grid(64)
    m = mif_matrix(ix, iy, grid)
    worst, worst_bin = 0.0, None
    for a, i in enumerate(grid):
        lam = i / 64
        h2 = abs(np.polyval(taps[::-1], np.exp(-2j * np.pi * lam))) ** 2
        if h2 / (h2 + 1) > 0.9:
            continue
        ref = oracle_mif_gaussian(taps, 1.0, 1.0, lam, real=is_real_bin(int(i), 64))
        err = abs(m.values[a, a] - ref)
        if err > worst:
            worst, worst_bin = err, int(i)
    off = m.values[~np.eye(len(grid), dtype=bool)].mean()
    elapsed = time.perf_counter() - t0
    ok = worst <= 0.07 and off <= 0.03 and elapsed <= 300
    assert report_criterion(3, "lowpass MIF diagonal vs -ln(1-C) (+-0.07), off-diagonal mean "
                            "<= 0.03, <= 5 min", ok,
                            f"max diag error {worst:.4f} at bin {worst_bin}; off-diag mean "
                            f"{off:.4f}; {elapsed:.0f} s")


# -- 4 ---------------------------------------------------------------------------------

def test_criterion_04_lowpass_curve(report_criterion):
    t0 = time.perf_counter()
    betas = (0.0, 0.25, 0.5, 0.75, 1.0)
    means, oracles, ok = {}, {}, True
    for beta in betas:
        means[beta] = float(np.mean([_linear_path(lowpass_taps(beta), 1.0, s) for s in SEEDS]))
        oracles[beta] = oracle_mi_gaussian(lowpass_taps(beta))
        ok &= _within(means[beta], oracles[beta])
    asym = max(abs(means[b] - means[1 - b]) for b in betas)
    elapsed = time.perf_counter() - t0
    ok &= asym <= 0.02 and elapsed <= 600
    detail = "; ".join(f"b={b}: {means[b]:.4f}/{oracles[b]:.4f}" for b in betas)
    assert report_criterion(4, "lowpass sweep vs oracle (max(10%, 0.03)), symmetry <= 0.02, "
                            "<= 10 min", ok, f"{detail}; asym {asym:.4f}; {elapsed:.0f} s")


# -- 5 ---------------------------------------------------------------------------------

def test_criterion_05_bandpass_curve(report_criterion):
    t0 = time.perf_counter()
    taps = bandpass_taps()
    rows, ok = [], True
    for sigma_w in (0.5, 1.0, 2.0):
        mean = float(np.mean([_linear_path(taps, sigma_w, s, align="centered") for s in SEEDS]))
        ref = oracle_mi_gaussian(taps, 1.0, sigma_w)
        ok &= _within(mean, ref)
        rows.append(f"sw={sigma_w}: {mean:.4f}/{ref:.4f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed <= 600
    assert report_criterion(5, "bandpass sweep vs oracle (max(10%, 0.03)), <= 10 min", ok,
                            "; ".join(rows) + f"; {elapsed:.0f} s")


# -- 6, 7 ------------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _cosine_run(sigma_w, seed):
    cfg = CosineModelConfig(4 / 32, None, sigma_w, 32 * N_S, seed, 32)
    x, y = gen_cosine_square(cfg)
    res = run_estimate(x, y, RunConfig(n_f=32, n_p=99, seed=seed))
    return res.report, res.mask.pairs(), res.mif.at(4, 8)


def test_criterion_06_cosine_structure(report_criterion):
    expected = set(expected_index_pairs(CosineModelConfig()))
    n_pairs = len(default_grid(32)) ** 2
    allowed_fp = math.ceil(n_pairs / 100) + 2
    recovered, contains_all, worst_fp = 0, True, 0
    for seed in SEEDS:
        report, pairs, _ = _cosine_run(1.0, seed)
        sig = set(pairs)
        contains_all &= expected <= sig
        worst_fp = max(worst_fp, len(sig - expected))
        recovered += (report.sets.p, report.sets.q) == (1, 2)
    ok = contains_all and worst_fp <= allowed_fp and recovered >= 8
    assert report_criterion(6, "cosine model: (4,0),(4,8) significant, few false positives, "
                            "P=1 Q=2 on >= 8/10 seeds", ok,
                            f"expected pairs always found: {contains_all}; max false positives "
                            f"{worst_fp} (allowed {allowed_fp}); P=1,Q=2 on {recovered}/10")


def test_criterion_07_cosine_mi(report_criterion):
    reported = [_cosine_run(1.0, s)[0].mi_nats for s in SEEDS]
    half_mif = [0.5 * _cosine_run(1.0, s)[2] for s in SEEDS]
    gap = abs(np.mean(reported) - np.mean(half_mif))
    sigmas = (0.5, 1.0, 2.0, 4.0, 8.0)
    curve = [float(np.mean([_cosine_run(sw, s)[0].mi_nats for s in SEEDS])) for sw in sigmas]
    decreasing = all(b < a for a, b in zip(curve, curve[1:]))
    ok = gap <= 0.1 and decreasing
    assert report_criterion(7, "cosine model: MI vs 1/2 MIF(4,8) within 0.1 at sw=1; strictly "
                            "decreasing in sw", ok,
                            f"MI {np.mean(reported):.4f} vs half-MIF {np.mean(half_mif):.4f} "
                            f"(gap {gap:.4f}); means over sw {sigmas}: "
                            + ", ".join(f"{c:.4f}" for c in curve))


# -- 8 ---------------------------------------------------------------------------------

def test_criterion_08_two_cosine_structure(report_criterion):
    cfg0 = CosineModelConfig(lambda2=6 / 32)
    expected = set(expected_index_pairs(cfg0))
    all_found, pq = 0, 0
    for seed in SEEDS:
        cfg = CosineModelConfig(4 / 32, 6 / 32, 1.0, 32 * N_S, seed, 32)
        x, y = gen_two_cosine_square(cfg)
        res = run_estimate(x, y, RunConfig(n_f=32, n_p=99, seed=seed))
        all_found += expected <= set(res.mask.pairs())
        pq += (res.report.sets.p, res.report.sets.q) == (2, 5)
    ok = all_found >= 8 and pq >= 8
    assert report_criterion(8, "two-cosine model: eight pairs significant and P=2 Q=5 on "
                            ">= 8/10 seeds", ok,
                            f"all eight found on {all_found}/10; P=2,Q=5 on {pq}/10")


# -- 9 ---------------------------------------------------------------------------------

def test_criterion_09_null_calibration(report_criterion):
    n_f, n_s = 16, 5000
    fractions = []
    for seed in SEEDS:
        rng = np.random.default_rng(10_000 + seed)
        x = TimeSeries(rng.standard_normal(n_f * n_s))
        y = TimeSeries(rng.standard_normal(n_f * n_s))
        res = run_estimate(x, y, RunConfig(n_f=n_f, n_p=99, seed=seed))
        fractions.append(res.mask.significant.mean())
    mean = float(np.mean(fractions))
    ok = 0.0 <= mean <= 0.03
    assert report_criterion(9, "null calibration: significant fraction in [0, 0.03]", ok,
                            f"mean fraction {mean:.4f} over 10 seeds "
                            f"(per seed: {', '.join(f'{f:.3f}' for f in fractions)})")


# -- 10 --------------------------------------------------------------------------------

def _cli(*args, cwd):
    return subprocess.run([sys.executable, "-m", "spectral_mi", *args], cwd=cwd,
                          capture_output=True, text=True)


def test_criterion_10_determinism(report_criterion, tmp_path):
    steps = [
        ("simulate", "twocosine2", "--n", "16000", "--seed", "5", "--out", "data.csv"),
        ("estimate", "data.csv", "--n-f", "16", "--n-p", "19", "--seed", "5", "--out", "{p}"),
        ("mif", "data.csv", "--n-f", "16", "--seed", "5", "--out", "{p}m"),
        ("sweep", "lowpass", "--param", "beta", "--values", "0,0.5", "--seeds", "2", "--n-f",
         "16", "--n", "16000", "--method", "linear", "--out", "{p}s"),
    ]
    outputs = []
    for run in ("a", "b"):
        d = tmp_path / run
        d.mkdir()
        for step in steps:
            proc = _cli(*[s.format(p="r") for s in step], cwd=d)
            assert proc.returncode == 0, proc.stderr
        outputs.append({f.name: f.read_bytes() for f in sorted(d.iterdir())
                        if f.suffix in (".csv", ".json")})
    same = outputs[0] == outputs[1]
    checked = sorted(outputs[0])
    assert report_criterion(10, "identical config + seed gives bitwise-identical artifacts",
                            same, f"{len(checked)} files compared: {', '.join(checked)}")

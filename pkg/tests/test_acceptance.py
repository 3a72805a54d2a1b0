"""Acceptance criteria, one recorded PASS/FAIL line each.

Run ``pytest tests/test_acceptance.py`` and read the "acceptance criteria"
section at the end of the output.
"""
import time
import warnings

import numpy as np
import pytest
from scipy.stats import spearmanr

import hodgefir as hf
from hodgefir.complex import count_components, integer_rank
from hodgefir.design import distinct_groups
from hodgefir.filtering import response_fir, response_sv

TABLE_1 = {
    1: (0.794, None), 2: (0.687, 0.597), 3: (0.482, 0.569), 4: (0.379, 0.395), 5: (0.308, 0.293),
    6: (0.268, 0.230), 7: (0.236, 0.187), 8: (0.207, 0.157), 9: (0.185, 0.135), 10: (0.167, 0.118),
}


def test_1_structural_exactness(record):
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst_b, worst_rec = 0, 0.0
    for _ in range(200):
        n = int(rng.integers(3, 31))
        cx = hf.random_complex(n, float(rng.uniform(0.1, 0.6)), float(rng.uniform(0, 1)), rng)
        if cx.n_edges == 0:
            continue
        pair = hf.incidence(cx)
        prod = pair.b1 @ pair.b2
        worst_b = max(worst_b, int(abs(prod).max()) if prod.nnz else 0)
        spec = hf.eigendecompose(hf.laplacians(pair))
        f = rng.standard_normal(cx.n_edges)
        rec = sum(hf.project(spec, f, lab) for lab in hf.Label)
        worst_rec = max(worst_rec, np.linalg.norm(rec - f) / np.linalg.norm(f))
    elapsed = time.perf_counter() - start
    ok = worst_b == 0 and worst_rec <= 1e-9 and elapsed < 10
    assert record(1, ok, f"max|B1 B2|={worst_b} max rel reconstruction={worst_rec:.2e} time={elapsed:.2f}s")


def test_2_golden_shift(record, toy, toy_lap):
    lower, upper = hf.shift(toy_lap, np.ones(10))
    idx, _ = toy.find_edge(5, 6)
    value = (lower + upper)[idx]
    assert record(2, value == 3.0, f"L1 shift of all-ones at edge (5,6) = {float(value)!r}")


def test_3_oracle_equivalence(record, toy_lap, toy_spec, sioux_lap, sioux_spec):
    rng = np.random.default_rng(3)
    worst = 0.0
    for lap, spec in ((toy_lap, toy_spec), (sioux_lap, sioux_spec)):
        u, n = spec.eigenvectors, spec.n
        for _ in range(50):
            f = rng.standard_normal(n)
            fir = hf.FirFilter(rng.standard_normal(int(rng.integers(1, 9))))
            sv = hf.SvFilter(rng.standard_normal(), rng.standard_normal(int(rng.integers(0, 5))),
                             rng.standard_normal(int(rng.integers(0, 5))))
            for filt, resp in ((fir, response_fir), (sv, response_sv)):
                oracle = u @ (resp(filt, spec).values * (u.T @ f))
                got = hf.apply_filter(filt, lap, f)
                worst = max(worst, np.linalg.norm(got - oracle) / np.linalg.norm(oracle))
    assert record(3, worst <= 1e-9, f"max relative deviation from spectral application = {worst:.2e}")


def test_4_exact_design(record, toy, toy_spec):
    n_distinct = len(distinct_groups(toy_spec.eigenvalues))
    rep = hf.run_extraction(toy, components="gradient", families="fir", lengths=[n_distinct])
    err = rep.rows[0]["nrmse"]
    worst_gap = -np.inf
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", hf.SingularDesign)
        for comp in ("gradient", "curl"):
            target = hf.DesignSpec.preserving(toy_spec, comp)
            for total in range(1, 11):
                fir = hf.design_fir(toy_spec, target, total)[1].residual
                sv = min(hf.design_sv(toy_spec, target, a, total - 1 - a)[1].residual for a in range(total))
                worst_gap = max(worst_gap, sv - fir)
    ok = err <= 1e-6 and worst_gap <= 1e-12
    assert record(4, ok, f"L={n_distinct} extraction NRMSE={err:.2e}; max(SV-FIR residual)={worst_gap:.2e}")


def test_5_denoising(record, toy):
    start = time.perf_counter()
    rep = hf.run_denoising(toy, trials=100, seed=0)
    elapsed = time.perf_counter() - start
    m = {r["method"]: r["mean_nrmse"] for r in rep.rows}
    checks = {
        "input 0.46+-0.01": abs(m["input"] - 0.46) <= 0.01,
        "SV 0.23+-0.05": abs(m["sv"] - 0.23) <= 0.05,
        "FIR 0.39+-0.05": abs(m["fir"] - 0.39) <= 0.05,
        "regularized_full > 0.46": m["regularized_full"] > 0.46,
        "regularized_lower > 0.46": m["regularized_lower"] > 0.46,
        "time < 30s": elapsed < 30,
    }
    failed = [k for k, v in checks.items() if not v]
    detail = " ".join(f"{k}={v:.3f}" for k, v in m.items()) + f" time={elapsed:.2f}s"
    if failed:
        detail += " | failed: " + "; ".join(failed)
    assert record(5, not failed, detail)


def test_6_sioux_prediction(record, sioux):
    start = time.perf_counter()
    rep = hf.run_prediction(sioux, l_totals=range(1, 11), seeds=range(10))
    elapsed = time.perf_counter() - start
    out_of_band = []
    for row in rep.rows:
        p1, p2 = TABLE_1[row["L_total"]]
        if abs(row["e1"] - p1) > 0.08:
            out_of_band.append(f"e1@{row['L_total']}={row['e1']:.3f} (ref {p1})")
        if p2 is not None and abs(row["e2"] - p2) > 0.08:
            out_of_band.append(f"e2@{row['L_total']}={row['e2']:.3f} (ref {p2})")
    lt = [r["L_total"] for r in rep.rows]
    rho1 = spearmanr(lt, [r["e1"] for r in rep.rows]).statistic
    rho2 = spearmanr(lt[1:], [r["e2"] for r in rep.rows[1:]]).statistic
    ok = not out_of_band and rho1 < 0 and rho2 < 0 and elapsed < 60
    detail = f"spearman e1={rho1:.3f} e2={rho2:.3f} time={elapsed:.2f}s; {len(out_of_band)} of 19 values outside +-0.08"
    if out_of_band:
        detail += ": " + ", ".join(out_of_band)
    assert record(6, ok, detail)


def _fir_flops(lap, length):
    with hf.diagnostics() as ops:
        hf.apply_fir(hf.FirFilter(np.ones(length)), lap, np.ones(lap.n_edges))
    return ops.flops


def test_7_complexity(record):
    rng = np.random.default_rng(7)
    lap = hf.laplacians(hf.incidence(hf.random_complex(40, 0.2, 0.5, rng)))
    lengths = np.array([4, 8, 16, 32, 64])
    slope_l = np.polyfit(np.log(lengths), np.log([_fir_flops(lap, k) for k in lengths]), 1)[0]

    nnz, flops = [], []
    for n in (6, 10, 16, 24, 34, 46, 60):
        cx = hf.random_complex(n, 0.3, 0.5, rng)
        if not 10 <= cx.n_edges <= 500:
            continue
        lap = hf.laplacians(hf.incidence(cx))
        nnz.append(lap.l1.nnz)
        flops.append(_fir_flops(lap, 8))
    slope_n = np.polyfit(np.log(nnz), np.log(flops), 1)[0]
    ok = abs(slope_l - 1) <= 0.15 and abs(slope_n - 1) <= 0.15 and len(nnz) >= 4
    assert record(7, ok, f"exponent in L={slope_l:.3f} exponent in nnz(L1)={slope_n:.3f} ({len(nnz)} complexes)")


def test_8_classification_counts(record, toy, sioux):
    details, ok = [], True
    for name, cx in (("toy", toy), ("siouxfalls", sioux)):
        pair = hf.incidence(cx)
        r1, r2 = integer_rank(pair.b1), integer_rank(pair.b2)
        spec = hf.eigendecompose(hf.laplacians(pair))
        counts = spec.counts()
        # first Betti number from the Euler characteristic, independent of any eigenvalue threshold
        chi = cx.n_nodes - cx.n_edges + cx.n_triangles
        betti1 = count_components(cx) + (cx.n_triangles - r2) - chi
        this = (
            counts[hf.Label.GRADIENT] == r1
            and counts[hf.Label.CURL] == r2
            and counts[hf.Label.HARMONIC] == cx.n_edges - r1 - r2 == betti1
        )
        ok &= this
        details.append(f"{name}: G={counts[hf.Label.GRADIENT]}/{r1} C={counts[hf.Label.CURL]}/{r2} "
                       f"H={counts[hf.Label.HARMONIC]}/betti1={betti1}")
    assert record(8, ok, "; ".join(details))

"""Acceptance criteria at desk scale.

Each criterion runs at its stated parameters and tolerances and prints one
PASS/FAIL line (run with ``pytest -s`` to see the lines for passing tests).
Heavy simulations are shared across criteria through module-scoped fixtures.
"""

import math
import time

import numpy as np
import pytest

import efnlab as E
from efnlab import verify

MASTER = 20260809


def _report(criterion, ok, detail):
    line = f"[{criterion}] {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    return line


# ---------------------------------------------------------------------------
# Shared heavy runs
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def m_sweep_beta1():
    """Criterion 1 workload: beta=1, d=1024, M in {200,500,1500,5000}, 200 trials."""
    cfg = E.ExperimentConfig(
        template=E.SignalFamilySpec(family="power-law-psd", d=1024, beta=1.0, phase_seed=1),
        M=200,
        trials=200,
        master_seed=MASTER,
        frequencies=(1, 2, 3, 4, 6, 8, 12, 16, 24, 32),
        sweep=E.SweepSpec("M", (200, 500, 1500, 5000)),
    )
    t0 = time.perf_counter()
    results = E.run_sweep(cfg)
    return results, time.perf_counter() - t0


@pytest.fixture(scope="module")
def flat_2048():
    """Criteria 2+3 workload: flat zero-DC template, d=2048, M=2000, 500 trials."""
    d = 2048
    cfg = E.ExperimentConfig(
        template=E.SignalFamilySpec(family="power-law-psd", d=d, beta=0.0, phase_seed=1),
        M=2000,
        trials=500,
        master_seed=MASTER,
        frequencies=tuple(range(d // 8, 3 * d // 8 + 1)),
    )
    t0 = time.perf_counter()
    stats = E.run_experiment(cfg)
    return stats, time.perf_counter() - t0


# ---------------------------------------------------------------------------
# Criteria
# ---------------------------------------------------------------------------

def test_criterion_1_phase_mse_inverse_in_m(m_sweep_beta1):
    results, elapsed = m_sweep_beta1
    ms = [M for M, _ in results]
    ks = results[0][1].ks
    in_band = 0
    slopes = []
    for i in range(ks.size):
        pts = [(M, stats.phase_mse[i]) for M, stats in results]
        slope = E.fit_loglog_slope(pts).slope
        slopes.append(slope)
        in_band += int(-1.15 <= slope <= -0.85)
    frac = in_band / ks.size
    ok = frac >= 0.90 and elapsed <= 180.0
    _report(
        "criterion 1: MSE ~ 1/M",
        ok,
        f"slope in [-1.15,-0.85] for {in_band}/{ks.size} k "
        f"(range {min(slopes):.3f}..{max(slopes):.3f}); runtime {elapsed:.0f}s (limit 180s)",
    )
    assert frac >= 0.90, f"only {frac:.0%} of slopes in band: {np.round(slopes, 3)}"
    assert elapsed <= 180.0, f"sweep took {elapsed:.0f}s > 180s"
    assert ms == [200, 500, 1500, 5000]


def test_monotone_convergence_in_m(m_sweep_beta1):
    """Fig. 2(a)/(b) analog: every M step improves Pearson and per-k MSE at 3 SE."""
    results, _ = m_sweep_beta1
    for (m_lo, lo), (m_hi, hi) in zip(results, results[1:]):
        dp = hi.mean_pearson - lo.mean_pearson
        se = math.hypot(hi.pearson_stderr, lo.pearson_stderr)
        assert dp > 3 * se, f"pearson step {m_lo}->{m_hi} not significant"
        dm = lo.phase_mse - hi.phase_mse
        se_k = np.hypot(lo.phase_mse_stderr, hi.phase_mse_stderr)
        assert np.all(dm > 3 * se_k), f"MSE step {m_lo}->{m_hi} not significant at all k"
    _report("invariant: monotone convergence in M", True, "all steps significant at 3 SE")


def test_criterion_2_thm2_rate_ratio(flat_2048):
    stats, elapsed = flat_2048
    ratio = stats.mse_ratio_thm2
    frac = float(np.mean((ratio >= 0.6) & (ratio <= 1.4)))
    med = float(np.median(ratio))
    ok = frac >= 0.80 and 0.75 <= med <= 1.25 and elapsed <= 300.0
    _report(
        "criterion 2: thm2 rate ratio",
        ok,
        f"in [0.6,1.4] for {frac:.1%} of mid-band k (need >=80%); median {med:.3f} "
        f"(need in [0.75,1.25]); runtime {elapsed:.0f}s (limit 300s)",
    )
    assert elapsed <= 300.0, f"run took {elapsed:.0f}s > 300s"
    assert frac >= 0.80, f"ratio in band for only {frac:.1%} of mid-band k"
    assert 0.75 <= med <= 1.25, f"median ratio {med:.3f} outside [0.75, 1.25]"


def test_criterion_3_thm2_magnitude_scaling(flat_2048):
    stats, _ = flat_2048
    scale = stats.mean_magnitude / stats.predicted_magnitude_thm2
    med = float(np.median(scale))
    ok = 0.8 <= med <= 1.2
    _report(
        "criterion 3: thm2 magnitude scaling",
        ok,
        f"median |Xhat[k]| / (sqrt(2 ln d) |X[k]|) = {med:.3f} over mid-band (need in [0.8,1.2])",
    )
    assert ok, f"median magnitude ratio {med:.3f} outside [0.8, 1.2]"


def test_criterion_4_thm1_magnitude_limit():
    ks = (1, 2, 4, 8, 16)
    cfg = E.ExperimentConfig(
        template=E.SignalFamilySpec(family="power-law-psd", d=256, beta=1.0, phase_seed=2),
        M=5000,
        trials=200,
        master_seed=MASTER,
        frequencies=ks,
    )
    stats = E.run_experiment(cfg)
    template = E.generate_template(cfg.template)
    moments = E.alignment_moments(template, 200_000, MASTER + 1, ks=ks)
    z = np.abs(stats.mean_magnitude - moments.mu_b) / np.hypot(
        stats.magnitude_stderr, moments.mu_b_stderr
    )
    ok = bool(np.all(z <= 3.0))
    _report(
        "criterion 4: thm1 magnitude limit",
        ok,
        f"|mean - MC| / combined SE at k={ks}: {np.round(z, 2)} (need all <= 3)",
    )
    assert ok, f"z-scores {z}"


def test_criterion_5_symmetry_identities():
    t0 = time.perf_counter()
    rows = verify.symmetry_suite(draws=100_000, seed=MASTER)
    elapsed = time.perf_counter() - t0
    bad = [r for r in rows if not r.passed]
    ok = not bad and elapsed <= 120.0
    worst_mu_a = max(r.measured for r in rows if "mu_A" in r.name)
    worst_mu_b = min(r.measured for r in rows if "mu_B" in r.name)
    _report(
        "criterion 5: symmetry identities",
        ok,
        f"max |z(mu_A)| = {worst_mu_a:.2f} (<=3); min z(mu_B) = {worst_mu_b:.1f} "
        f"(>=2.33); runtime {elapsed:.0f}s (limit 120s)",
    )
    assert not bad, "\n".join(r.format() for r in bad)
    assert elapsed <= 120.0


def test_criterion_6_lemma1_sign_pattern():
    rows = verify.lemma1_suite(draws=200_000, seed=MASTER)
    bad = [r for r in rows if not r.passed]
    ok = not bad
    _report(
        "criterion 6: argmax sign pattern",
        ok,
        f"min signed z over phis/bins = {min(r.measured for r in rows):.1f} (need >= 2.33)",
    )
    assert ok, "\n".join(r.format() for r in bad)


def test_criterion_7_softmax_approximation():
    gaps = {}
    for d in (256, 1024, 4096):
        soft, mc = verify.prop3_case(d, draws=100_000, seed=MASTER)
        gaps[d] = abs(soft - mc)  # max|f| = 1 for the pinned cosine functional
    ok = gaps[1024] <= 0.10 and gaps[4096] <= 0.05
    non_increasing = gaps[256] >= gaps[1024] >= gaps[4096]
    detail = (
        f"gap/max|f| = {gaps[1024]:.4f} at d=1024 (<=0.1), {gaps[4096]:.4f} at d=4096 "
        f"(<=0.05); non-increasing over d: {gaps[256]:.4f} >= {gaps[1024]:.4f} >= {gaps[4096]:.4f}"
    )
    _report("criterion 7: softmax approximation", ok and non_increasing, detail)
    assert ok, detail
    assert non_increasing, detail


def test_criterion_8_gumbel_convergence():
    rows = verify.gumbel_suite(d=4096, replicates=10_000, seed=0)
    ok = all(r.passed for r in rows)
    _report(
        "criterion 8: gumbel convergence",
        ok,
        f"KS = {rows[0].measured:.4f} (need <= 0.05)",
    )
    assert ok, rows[0].format()


def test_criterion_9_exactness_suites():
    t0 = time.perf_counter()
    rows = verify.alignment_suite(cases=1000, d=128, seed=MASTER)
    elapsed = time.perf_counter() - t0
    bad = [r for r in rows if not r.passed]
    ok = not bad and elapsed <= 30.0
    detail = "; ".join(f"{r.name}: {r.measured:.3g}" for r in rows)
    _report("criterion 9: exactness suites", ok, f"{detail}; runtime {elapsed:.0f}s (limit 30s)")
    assert not bad, "\n".join(r.format() for r in bad)
    assert elapsed <= 30.0


def test_criterion_10_psd_flatness_effect():
    t0 = time.perf_counter()
    cfg = E.ExperimentConfig(
        template=E.SignalFamilySpec(family="power-law-psd", d=512, beta=2.0, phase_seed=1),
        M=1000,
        trials=150,
        master_seed=MASTER,
        frequencies=(),
        sweep=E.SweepSpec("beta", (0.0, 1.0, 2.0)),
    )
    results = dict((beta, stats) for beta, stats in E.run_sweep(cfg))
    elapsed = time.perf_counter() - t0
    order = [2.0, 1.0, 0.0]  # flatter PSD (smaller beta) must win
    gaps = []
    for hi_beta, lo_beta in zip(order, order[1:]):
        a, b = results[hi_beta], results[lo_beta]
        gap = b.mean_pearson - a.mean_pearson
        se = math.hypot(a.pearson_stderr, b.pearson_stderr)
        gaps.append(gap / se)
    ok = all(g > 3.0 for g in gaps) and elapsed <= 300.0
    means = {b: round(s.mean_pearson, 4) for b, s in results.items()}
    _report(
        "criterion 10a: PSD flatness effect",
        ok,
        f"pearson by beta {means}; step z-scores {np.round(gaps, 1)} (need > 3); "
        f"runtime {elapsed:.0f}s",
    )
    assert ok, f"step z-scores {gaps}"


def test_criterion_10_dimension_effect():
    t0 = time.perf_counter()
    cfg = E.ExperimentConfig(
        template=E.SignalFamilySpec(family="power-law-psd", d=512, beta=0.0, phase_seed=1),
        M=1000,
        trials=60,
        master_seed=MASTER,
        frequencies=(),
        sweep=E.SweepSpec("d", (512, 2048, 8192)),
    )
    results = E.run_sweep(cfg)
    elapsed = time.perf_counter() - t0
    gaps = []
    for (d_lo, lo), (d_hi, hi) in zip(results, results[1:]):
        gap = hi.mean_pearson - lo.mean_pearson
        se = math.hypot(lo.pearson_stderr, hi.pearson_stderr)
        gaps.append(gap / se)
    ok = all(g > 3.0 for g in gaps) and elapsed <= 300.0
    means = {int(d): round(s.mean_pearson, 4) for d, s in results}
    _report(
        "criterion 10b: dimension effect",
        ok,
        f"pearson by d {means}; step z-scores {np.round(gaps, 1)} (need > 3); "
        f"runtime {elapsed:.0f}s",
    )
    assert ok, (
        f"mean Pearson not strictly increasing across d at 3 SE: {means}, z={gaps}"
    )

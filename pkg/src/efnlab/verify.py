"""Named verification suites: exactness, symmetry, and limit-theorem checks.

Each suite returns a list of :class:`CheckRow` so the CLI can print a
pass/fail table and the test suite can assert on the same numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .alignment import correlation_oracle, correlation_sequence, fourier_correlation_sequence
from .errors import InvalidArgumentError
from .experiment import ks_statistic
from .signals import (
    NoiseSample,
    SignalFamilySpec,
    TemplateSignal,
    circular_shift,
    dft,
    generate_template,
    idft,
    wrap_phase,
)
from .theory import (
    alignment_moments,
    build_conditional_gaussian,
    gumbel_constants,
    lemma1_check,
    sample_cyclostationary,
    softmax_expectation,
)

#: One-sided 99% normal quantile, the package-wide strict-inequality bar.
Z99 = 2.3263478740408408


@dataclass(frozen=True)
class CheckRow:
    name: str
    measured: float
    threshold: float
    comparator: str  # "<=" or ">="

    @property
    def passed(self) -> bool:
        if self.comparator == "<=":
            return self.measured <= self.threshold
        if self.comparator == ">=":
            return self.measured >= self.threshold
        raise InvalidArgumentError(f"bad comparator {self.comparator!r}")

    def format(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.name}: measured {self.measured:.6g} (need {self.comparator} {self.threshold:g})"


def _random_template(d: int, rng) -> TemplateSignal:
    spec = SignalFamilySpec(
        family="power-law-psd",
        d=d,
        beta=float(rng.uniform(0.0, 2.0)),
        phase_seed=int(rng.integers(0, 2**31)),
        zero_dc=False,
    )
    return generate_template(spec)


def alignment_suite(cases: int = 1000, d: int = 64, seed=12345) -> list[CheckRow]:
    """Exactness checks: dual correlation routes, argmax equality, transform
    round trips, the shift group law, and shift-phase duality."""
    rng = np.random.default_rng(seed)
    worst_rel = 0.0
    agree = 0
    worst_round = 0.0
    group_ok = 0
    worst_duality = 0.0
    for _ in range(cases):
        template = _random_template(d, rng)
        noise = NoiseSample(rng.standard_normal(d), 1.0)
        fast = correlation_sequence(noise, template)
        direct = correlation_oracle(noise, template)
        scale = np.abs(direct).max()
        worst_rel = max(worst_rel, float(np.abs(fast - direct).max() / scale))
        polar = fourier_correlation_sequence(noise, template)
        agree += int(np.argmax(fast) == np.argmax(polar))

        y = rng.standard_normal(d)
        back = idft(dft(y))
        worst_round = max(worst_round, float(np.linalg.norm(back - y) / np.linalg.norm(y)))

        a, b = int(rng.integers(-2 * d, 2 * d)), int(rng.integers(-2 * d, 2 * d))
        lhs = circular_shift(circular_shift(y, a), b)
        rhs = circular_shift(y, (a + b) % d)
        group_ok += int(np.array_equal(lhs, rhs))

        ell = int(rng.integers(0, d))
        sy = dft(circular_shift(y, ell))
        base = dft(y)
        keep = base.magnitudes > 1e-9
        k = np.arange(d)[keep]
        expected = base.phases[keep] - 2.0 * np.pi * k * ell / d
        defect = np.abs(wrap_phase(sy.phases[keep] - expected)).max(initial=0.0)
        worst_duality = max(worst_duality, float(defect))

    return [
        CheckRow("fft-vs-direct correlation (max rel err)", worst_rel, 1e-9, "<="),
        CheckRow("real-vs-fourier argmax agreement", agree / cases, 1.0, ">="),
        CheckRow("dft/idft round trip (max rel err)", worst_round, 1e-10, "<="),
        CheckRow("shift group law (fraction exact)", group_ok / cases, 1.0, ">="),
        CheckRow("shift-phase duality (max wrapped defect)", worst_duality, 1e-8, "<="),
    ]


def _symmetry_templates(d: int) -> list[tuple[str, TemplateSignal]]:
    return [
        ("delta", generate_template(SignalFamilySpec(family="delta", d=d))),
        ("power-law-1", generate_template(
            SignalFamilySpec(family="power-law-psd", d=d, beta=1.0, phase_seed=4)
        )),
        ("flat", generate_template(
            SignalFamilySpec(family="power-law-psd", d=d, beta=0.0, phase_seed=4)
        )),
    ]


def symmetry_suite(draws: int = 100_000, d: int = 64, seed=202) -> list[CheckRow]:
    """The sine term averages to zero; the cosine term is strictly positive."""
    rows = []
    freqs = [1, 5, 11]
    for i, (name, template) in enumerate(_symmetry_templates(d)):
        m = alignment_moments(template, draws, seed + i, ks=freqs)
        for j, k in enumerate(freqs):
            za = abs(m.mu_a[j]) / m.mu_a_stderr[j]
            zb = m.mu_b[j] / m.mu_b_stderr[j]
            rows.append(CheckRow(f"mu_A zero ({name}, k={k}) |z|", float(za), 3.0, "<="))
            rows.append(CheckRow(f"mu_B positive ({name}, k={k}) z", float(zb), Z99, ">="))
    return rows


def gumbel_suite(d: int = 4096, replicates: int = 10_000, seed=0) -> list[CheckRow]:
    """Normalized maxima of i.i.d. Gaussians against the standard Gumbel law."""
    g = gumbel_constants(d)
    rng = np.random.default_rng(seed)
    maxima = np.empty(replicates)
    done = 0
    block = max(1, (1 << 23) // d)
    while done < replicates:
        m = min(block, replicates - done)
        maxima[done : done + m] = rng.standard_normal((m, d)).max(axis=1)
        done += m
    ks = ks_statistic(g.a_d * (maxima - g.b_d))
    return [CheckRow(f"gumbel KS (d={d}, n={replicates})", ks, 0.05, "<=")]


# Pinned construction for the softmax-approximation check: flat zero-DC
# template, conditioning bin k=5 with unit noise magnitude and phase 0.7.
PROP3_K = 5
PROP3_NOISE_MAG = 1.0
PROP3_NOISE_PHASE = 0.7


def prop3_case(d: int, draws: int, seed) -> tuple[float, float]:
    """Return (softmax value, Monte-Carlo E[f(argmax)]) for the pinned case."""
    spec = SignalFamilySpec(family="power-law-psd", d=d, beta=0.0, phase_seed=0)
    template = generate_template(spec)
    cg = build_conditional_gaussian(template, PROP3_K, PROP3_NOISE_MAG, PROP3_NOISE_PHASE)
    r = np.arange(d)
    f = np.cos(
        2.0 * np.pi * PROP3_K * r / d + PROP3_NOISE_PHASE - template.spectrum.phases[PROP3_K]
    )
    soft = softmax_expectation(f, cg.mean)
    rng = np.random.default_rng(seed)
    total = 0.0
    done = 0
    block = max(1, (1 << 23) // d)
    while done < draws:
        m = min(block, draws - done)
        s = sample_cyclostationary(cg, rng, size=m)
        total += f[np.argmax(s, axis=1)].sum()
        done += m
    return soft, total / draws


def prop3_suite(draws: int = 100_000, seed=31) -> list[CheckRow]:
    """Softmax approximation of the argmax functional, normalized by max|f|=1."""
    rows = []
    for d, tol in ((1024, 0.10), (4096, 0.05)):
        soft, mc = prop3_case(d, draws, seed)
        rows.append(CheckRow(f"prop3 |softmax - MC| (d={d})", abs(soft - mc), tol, "<="))
    return rows


def lemma1_suite(draws: int = 200_000, seed=100) -> list[CheckRow]:
    """Argmax-probability sign pattern at d=8, k=1 for three phase offsets."""
    d, k = 8, 1
    template = generate_template(SignalFamilySpec(family="delta", d=d))
    rows = []
    for phi in (0.0, math.pi / 3.0, 2.0 * math.pi / 3.0):
        rep = lemma1_check(template, k, phi, draws, seed)
        sel = np.abs(rep.mu) > 0.3
        signed_z = (np.sign(rep.mu[sel]) * rep.diff[sel]) / rep.diff_stderr[sel]
        rows.append(
            CheckRow(f"lemma1 sign pattern (phi={phi:.3f}) min signed z", float(signed_z.min()), Z99, ">=")
        )
        rows.append(
            CheckRow(
                f"lemma1 conc-sum positive (phi={phi:.3f}) z",
                rep.conc_sum / rep.conc_sum_stderr,
                Z99,
                ">=",
            )
        )
    return rows


SUITES = {
    "alignment": alignment_suite,
    "symmetry": symmetry_suite,
    "gumbel": gumbel_suite,
    "prop3": prop3_suite,
    "lemma1": lemma1_suite,
}


def _accepted(fn, overrides: dict) -> dict:
    import inspect

    params = inspect.signature(fn).parameters
    return {k: v for k, v in overrides.items() if k in params and v is not None}


def run_suite(name: str, **overrides) -> list[CheckRow]:
    """Run one named suite (or 'all'); unknown override keys are ignored per suite."""
    if name == "all":
        rows = []
        for fn in SUITES.values():
            rows.extend(fn(**_accepted(fn, overrides)))
        return rows
    if name not in SUITES:
        raise InvalidArgumentError(f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'")
    fn = SUITES[name]
    return fn(**_accepted(fn, overrides))

"""Analytic predictions and the conditional-Gaussian machinery behind them.

Conditioning the correlation sequence on one Fourier coefficient of the noise
gives a Gaussian vector with a cosine mean and a circulant covariance.  This
module builds that object, samples it spectrally, estimates the
phase-convergence constant by Monte-Carlo, evaluates the closed-form
high-dimensional rates, and exposes the extreme-value helpers (Gumbel
normalizing constants, the softmax approximation of argmax functionals) used
to cross-validate them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import InsufficientDataError, InvalidArgumentError
from .signals import TemplateSignal

REGIMES = ("thm1-fixed-d", "thm2-high-d")


# ---------------------------------------------------------------------------
# Conditional Gaussian construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionalGaussian:
    """Law of the correlation sequence given one noise Fourier coefficient.

    mean[r] = 2 |X[k]| nmag cos(2*pi*k*r/d + nphase - phi_X[k]); the covariance
    is circulant with Fourier weights ``spectral_eigenvalues`` (already scaled
    by sigma2, so they sum to 1 and the diagonal is exactly 1).
    """

    mean: np.ndarray
    spectral_eigenvalues: np.ndarray
    sigma2: float
    k: int
    noise_magnitude: float
    noise_phase: float

    @property
    def d(self) -> int:
        return self.mean.size

    def covariance(self) -> np.ndarray:
        """Dense circulant covariance (for tests and small-d checks)."""
        first = (self.d * np.fft.ifft(self.spectral_eigenvalues)).real
        i = np.arange(self.d)
        return first[(i[:, None] - i[None, :]) % self.d]


def build_conditional_gaussian(
    template: TemplateSignal, k: int, noise_magnitude: float, noise_phase: float
) -> ConditionalGaussian:
    """Construct the conditional law at frequency k.

    The covariance weights zero the conditioned pair (k, d-k), keep bins 0 and
    d/2 as-is, and scale every other bin by sqrt(2); sigma2 is then fixed so
    the diagonal equals 1.
    """
    d = template.d
    if not (0 <= k <= d - 1):
        raise InvalidArgumentError(f"frequency index {k} out of range for d={d}")
    if noise_magnitude < 0:
        raise InvalidArgumentError("noise magnitude must be nonnegative")
    w = template.spectrum.magnitudes.astype(float) ** 2
    t = 2.0 * w
    t[0] = w[0]
    t[d // 2] = w[d // 2]
    t[k] = 0.0
    t[(d - k) % d] = 0.0
    total = t.sum()
    if total <= 0.0:
        raise InvalidArgumentError("covariance weights vanish; template has no usable spectrum")
    sigma2 = 1.0 / total
    r = np.arange(d)
    phase = 2.0 * np.pi * k * r / d + noise_phase - template.spectrum.phases[k]
    mean = 2.0 * template.spectrum.magnitudes[k] * noise_magnitude * np.cos(phase)
    return ConditionalGaussian(
        mean=mean,
        spectral_eigenvalues=sigma2 * t,
        sigma2=sigma2,
        k=k,
        noise_magnitude=float(noise_magnitude),
        noise_phase=float(noise_phase),
    )


def sample_cyclostationary(cg: ConditionalGaussian, rng, size: Optional[int] = None) -> np.ndarray:
    """Draw from the conditional law by spectral synthesis.

    Returns a (d,) vector, or (size, d) when ``size`` is given.  Each draw is
    mean + sum_l sqrt(lambda_l) (A_l cos(2*pi*l*r/d) + B_l sin(2*pi*l*r/d))
    with A, B i.i.d. standard normal, which has exactly the circulant target
    covariance.
    """
    lam = np.asarray(cg.spectral_eigenvalues, dtype=float)
    if np.any(lam < 0):
        raise InvalidArgumentError("spectral eigenvalues must be nonnegative")
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    n = 1 if size is None else int(size)
    a = rng.standard_normal((n, cg.d))
    b = rng.standard_normal((n, cg.d))
    coeff = np.sqrt(lam)[None, :] * (a - 1j * b)
    z = (cg.d * np.fft.ifft(coeff, axis=1)).real + cg.mean[None, :]
    return z[0] if size is None else z


# ---------------------------------------------------------------------------
# Gumbel constants and the softmax argmax approximation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GumbelConstants:
    """Normalizing constants for the maximum of d near-independent Gaussians."""

    a_d: float
    b_d: float
    d: int


def gumbel_constants(d: int) -> GumbelConstants:
    """a_d = sqrt(2 ln d);  b_d = a_d - (ln ln d + ln 4*pi) / (2 a_d)."""
    if d < 3:
        raise InvalidArgumentError("gumbel constants need d >= 3 (ln ln d must be defined)")
    a = math.sqrt(2.0 * math.log(d))
    b = a - (math.log(math.log(d)) + math.log(4.0 * math.pi)) / (2.0 * a)
    return GumbelConstants(a_d=a, b_d=b, d=d)


def softmax_expectation(f, mean) -> float:
    """Softmax approximation of E[f(argmax)]:
    sum_r f(r) e^{mean_r * a_d} / sum_r e^{mean_r * a_d}, a_d = sqrt(2 ln d).

    Computed with max-subtraction; the result is bounded by max |f|.
    """
    f = np.asarray(f, dtype=float)
    mu = np.asarray(mean, dtype=float)
    if f.shape != mu.shape or f.ndim != 1 or f.size == 0:
        raise InvalidArgumentError("f and mean must be equal-length 1-d sequences")
    if not (np.all(np.isfinite(f)) and np.all(np.isfinite(mu))):
        raise InvalidArgumentError("softmax_expectation requires finite inputs")
    a_d = math.sqrt(2.0 * math.log(f.size)) if f.size > 1 else 0.0
    w = a_d * mu
    w -= w.max()
    e = np.exp(w)
    return float((f * e).sum() / e.sum())


def m_star(mean, f, alpha: float) -> float:
    """Tilted log-mean-exp of the shifted means:
    a_d^{-1} * ln( d^{-1} * sum_i e^{a_d (mean_i + alpha f_i)} ).

    Its derivative in alpha at 0 equals :func:`softmax_expectation`.
    """
    mu = np.asarray(mean, dtype=float)
    fv = np.asarray(f, dtype=float)
    if mu.shape != fv.shape or mu.ndim != 1 or mu.size < 2:
        raise InvalidArgumentError("mean and f must be equal-length 1-d sequences with d >= 2")
    if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(fv)) and np.isfinite(alpha)):
        raise InvalidArgumentError("m_star requires finite inputs")
    d = mu.size
    a_d = math.sqrt(2.0 * math.log(d))
    return float((logsumexp(a_d * (mu + alpha * fv)) - math.log(d)) / a_d)


# ---------------------------------------------------------------------------
# Monte-Carlo alignment moments and the phase-rate constant
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlignmentMoments:
    """Per-frequency moments of a = |N[k]| sin(phi_e[k]), b = |N[k]| cos(phi_e[k])
    over fresh single-observation alignments, at the requested frequencies."""

    ks: np.ndarray
    mu_a: np.ndarray
    mu_a_stderr: np.ndarray
    mu_b: np.ndarray
    mu_b_stderr: np.ndarray
    second_moment_a: np.ndarray
    trials: int
    # raw sums retained for delta-method error propagation
    _sum_a2: np.ndarray
    _sum_a4: np.ndarray
    _sum_b: np.ndarray
    _sum_b2: np.ndarray
    _sum_a2b: np.ndarray


def alignment_moments(
    template: TemplateSignal,
    trials: int,
    seed,
    *,
    sigma: float = 1.0,
    ks: Optional[Sequence[int]] = None,
) -> AlignmentMoments:
    """Run ``trials`` single-observation alignments and collect the per-k
    moments of the residual-phase sine/cosine terms.

    The alignment uses the same transform-based correlation as the production
    estimator; draws are batched for speed but the statistics are per
    observation.
    """
    template.require_alignable()
    d = template.d
    kset = np.arange(d) if ks is None else np.asarray(list(ks), dtype=int)
    if kset.size and (kset.min() < 0 or kset.max() > d - 1):
        raise InvalidArgumentError("requested frequency outside [0, d-1]")
    spec_x_u = np.fft.rfft(template.samples)
    phi_x = template.spectrum.phases[kset]
    rng = np.random.default_rng(seed)

    sums = {name: np.zeros(kset.size) for name in ("a", "a2", "a4", "b", "b2", "a2b")}
    block = max(1, min(trials, (1 << 22) // d))
    done = 0
    scale = 1.0 / math.sqrt(d)
    while done < trials:
        m = min(block, trials - done)
        noise = sigma * rng.standard_normal((m, d))
        corr = np.fft.irfft(np.fft.rfft(noise, axis=1) * np.conj(spec_x_u)[None, :], d, axis=1)
        shifts = np.argmax(corr, axis=1)
        spec_n = np.fft.fft(noise, axis=1)[:, kset] * scale
        phi_e = (
            2.0 * np.pi * kset[None, :] * shifts[:, None] / d
            + np.angle(spec_n)
            - phi_x[None, :]
        )
        mag_n = np.abs(spec_n)
        a = mag_n * np.sin(phi_e)
        b = mag_n * np.cos(phi_e)
        sums["a"] += a.sum(0)
        sums["a2"] += (a**2).sum(0)
        sums["a4"] += (a**4).sum(0)
        sums["b"] += b.sum(0)
        sums["b2"] += (b**2).sum(0)
        sums["a2b"] += (a**2 * b).sum(0)
        done += m

    n = float(trials)
    mu_a = sums["a"] / n
    mu_b = sums["b"] / n
    var_a = np.maximum(sums["a2"] / n - mu_a**2, 0.0)
    var_b = np.maximum(sums["b2"] / n - mu_b**2, 0.0)
    return AlignmentMoments(
        ks=kset,
        mu_a=mu_a,
        mu_a_stderr=np.sqrt(var_a / n),
        mu_b=mu_b,
        mu_b_stderr=np.sqrt(var_b / n),
        second_moment_a=sums["a2"] / n,
        trials=trials,
        _sum_a2=sums["a2"],
        _sum_a4=sums["a4"],
        _sum_b=sums["b"],
        _sum_b2=sums["b2"],
        _sum_a2b=sums["a2b"],
    )


@dataclass(frozen=True)
class CkEstimate:
    """Monte-Carlo estimate of the per-frequency phase-rate constant
    C_k = E[(|N[k]| sin phi_e)^2] / (E[|N[k]| cos phi_e])^2."""

    ck: float
    stderr: float
    mu_a: float
    mu_a_stderr: float
    mu_b: float
    mu_b_stderr: float
    trials: int


def _ck_from_moments(m: AlignmentMoments, idx: int) -> CkEstimate:
    n = float(m.trials)
    m2a = m.second_moment_a[idx]
    mb = m.mu_b[idx]
    var_m2a = max(m._sum_a4[idx] / n - m2a**2, 0.0) / n
    var_mb = max(m._sum_b2[idx] / n - mb**2, 0.0) / n
    cov = (m._sum_a2b[idx] / n - m2a * mb) / n
    ck = m2a / mb**2
    # delta method for the ratio m2a / mb^2
    g1 = 1.0 / mb**2
    g2 = -2.0 * m2a / mb**3
    var_ck = g1 * g1 * var_m2a + g2 * g2 * var_mb + 2.0 * g1 * g2 * cov
    return CkEstimate(
        ck=float(ck),
        stderr=float(math.sqrt(max(var_ck, 0.0))),
        mu_a=float(m.mu_a[idx]),
        mu_a_stderr=float(m.mu_a_stderr[idx]),
        mu_b=float(mb),
        mu_b_stderr=float(m.mu_b_stderr[idx]),
        trials=m.trials,
    )


def estimate_ck(
    template: TemplateSignal, k: int, trials: int, seed, *, sigma: float = 1.0
) -> CkEstimate:
    """Estimate C_k with fresh noise draws through the real alignment path.

    The numerator is the plain second moment of the sine term: its mean is 0
    by the sign-flip symmetry of the argmax, so the second moment equals the
    variance the limit theorem wants.
    """
    if trials < 1000:
        raise InvalidArgumentError("estimate_ck needs at least 1000 trials")
    moments = alignment_moments(template, trials, seed, sigma=sigma, ks=[k])
    return _ck_from_moments(moments, 0)


def estimate_ck_profile(
    template: TemplateSignal, trials: int, seed, *, sigma: float = 1.0,
    ks: Optional[Sequence[int]] = None,
) -> list[CkEstimate]:
    """C_k estimates at several frequencies from one shared Monte-Carlo pass."""
    if trials < 1000:
        raise InvalidArgumentError("estimate_ck_profile needs at least 1000 trials")
    moments = alignment_moments(template, trials, seed, sigma=sigma, ks=ks)
    return [_ck_from_moments(moments, i) for i in range(moments.ks.size)]


# ---------------------------------------------------------------------------
# Closed-form / Monte-Carlo predictions
# ---------------------------------------------------------------------------

def _check_regime(regime: str):
    if regime not in REGIMES:
        raise InvalidArgumentError(f"unknown regime {regime!r}; choose from {REGIMES}")


def predict_phase_mse(
    template: TemplateSignal,
    k: int,
    M: int,
    regime: str,
    *,
    ck: Optional[float] = None,
    ck_trials: int = 4000,
    seed=0,
) -> float:
    """Predicted phase MSE at bin k for M observations.

    thm1-fixed-d -> C_k / M with C_k estimated by Monte-Carlo (or passed in);
    thm2-high-d  -> 1 / (4 |X[k]|^2 M ln d).
    """
    _check_regime(regime)
    if M < 1:
        raise InvalidArgumentError("M must be >= 1")
    if regime == "thm2-high-d":
        mags = template.spectrum.magnitudes
        if mags[k] <= template.floor * mags.max():
            raise InvalidArgumentError(
                f"bin {k}: template magnitude below floor; thm2 prediction undefined"
            )
        return 1.0 / (4.0 * mags[k] ** 2 * M * math.log(template.d))
    if ck is None:
        ck = estimate_ck(template, k, ck_trials, seed).ck
    return ck / M


def predict_magnitude(
    template: TemplateSignal,
    k: int,
    regime: str,
    *,
    mu_b: Optional[float] = None,
    trials: int = 20000,
    seed=0,
    sigma: float = 1.0,
) -> float:
    """Predicted estimator magnitude at bin k.

    thm1-fixed-d -> Monte-Carlo E[|N[k]| cos(phi_e[k])];
    thm2-high-d  -> sqrt(2 ln d) * |X[k]|.
    """
    _check_regime(regime)
    if regime == "thm2-high-d":
        return math.sqrt(2.0 * math.log(template.d)) * float(template.spectrum.magnitudes[k])
    if mu_b is None:
        mu_b = float(alignment_moments(template, trials, seed, sigma=sigma, ks=[k]).mu_b[0])
    return float(mu_b)


def prediction_rows(
    template: TemplateSignal,
    M: int,
    ks: Sequence[int],
    *,
    ck_trials: int = 4000,
    seed=0,
    sigma: float = 1.0,
) -> list[dict]:
    """Prediction table: one row per (k, regime) with the predicted phase MSE
    and magnitude.  CSV-ready; the Monte-Carlo pass is shared across rows."""
    profile = estimate_ck_profile(template, ck_trials, seed, sigma=sigma, ks=ks)
    mags = template.spectrum.magnitudes
    rows = []
    for est, k in zip(profile, ks):
        rows.append(
            {
                "k": int(k),
                "template_magnitude": float(mags[k]),
                "predicted_mse": est.ck / M,
                "predicted_magnitude": est.mu_b,
                "regime": "thm1-fixed-d",
            }
        )
        rows.append(
            {
                "k": int(k),
                "template_magnitude": float(mags[k]),
                "predicted_mse": predict_phase_mse(template, int(k), M, "thm2-high-d"),
                "predicted_magnitude": predict_magnitude(template, int(k), "thm2-high-d"),
                "regime": "thm2-high-d",
            }
        )
    return rows


# ---------------------------------------------------------------------------
# Sign-pattern check for the argmax probability inequalities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Lemma1Report:
    """Empirical argmax frequencies of S1 ~ N(+mu, Sigma) vs S2 ~ N(-mu, Sigma).

    mu[l] = cos(2*pi*k*l/d + phi); Sigma is the sigma2-normalized conditional
    covariance built from the template at frequency k.  diff[l] estimates
    P[argmax S1 = l] - P[argmax S2 = l], whose sign should match sign(mu[l]);
    conc_sum estimates sum_l cos(2*pi*k*l/d + phi) * diff[l], which should be
    positive.
    """

    k: int
    phi: float
    trials: int
    mu: np.ndarray
    freq_pos: np.ndarray
    freq_neg: np.ndarray
    diff: np.ndarray
    diff_stderr: np.ndarray
    conc_sum: float
    conc_sum_stderr: float

    def signs_match(self, min_abs_mu: float = 0.3) -> bool:
        sel = np.abs(self.mu) > min_abs_mu
        return bool(np.all(np.sign(self.diff[sel]) == np.sign(self.mu[sel])))


def lemma1_check(
    template: TemplateSignal, k: int, phi: float, trials: int, seed
) -> Lemma1Report:
    """Sample the +mu and -mu processes on common noise and tabulate argmaxes.

    Pairing the draws cancels most of the sampling noise in the frequency
    differences; standard errors come from the per-draw paired statistics.
    """
    if trials < 100_000:
        raise InsufficientDataError("lemma1_check needs at least 1e5 draws")
    d = template.d
    cg = build_conditional_gaussian(template, k, 1.0, 0.0)
    r = np.arange(d)
    mu = np.cos(2.0 * np.pi * k * r / d + phi)
    rng = np.random.default_rng(seed)

    count1 = np.zeros(d)
    count2 = np.zeros(d)
    count_both = np.zeros(d)
    conc_sum = 0.0
    conc_sumsq = 0.0
    lam = cg.spectral_eigenvalues
    block = max(1, min(trials, (1 << 21) // d))
    done = 0
    while done < trials:
        m = min(block, trials - done)
        a = rng.standard_normal((m, d))
        b = rng.standard_normal((m, d))
        z = (d * np.fft.ifft(np.sqrt(lam)[None, :] * (a - 1j * b), axis=1)).real
        r1 = np.argmax(z + mu[None, :], axis=1)
        r2 = np.argmax(z - mu[None, :], axis=1)
        count1 += np.bincount(r1, minlength=d)
        count2 += np.bincount(r2, minlength=d)
        same = r1 == r2
        if same.any():
            count_both += np.bincount(r1[same], minlength=d)
        term = np.cos(2.0 * np.pi * k * r1 / d + phi) - np.cos(2.0 * np.pi * k * r2 / d + phi)
        conc_sum += term.sum()
        conc_sumsq += (term**2).sum()
        done += m

    n = float(trials)
    freq1 = count1 / n
    freq2 = count2 / n
    diff = freq1 - freq2
    var_diff = np.maximum((count1 + count2 - 2.0 * count_both) / n - diff**2, 0.0)
    mean_conc = conc_sum / n
    var_conc = max(conc_sumsq / n - mean_conc**2, 0.0)
    return Lemma1Report(
        k=k,
        phi=float(phi),
        trials=trials,
        mu=mu,
        freq_pos=freq1,
        freq_neg=freq2,
        diff=diff,
        diff_stderr=np.sqrt(var_diff / n),
        conc_sum=float(mean_conc),
        conc_sum_stderr=float(math.sqrt(var_conc / n)),
    )

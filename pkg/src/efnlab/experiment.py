"""Seeded Monte-Carlo orchestration: trials, sweeps, and aggregate statistics.

Reproducibility scheme: every observation gets its own RNG stream derived
from ``SeedSequence(master_seed, spawn_key=(trial_index, observation_index))``,
so no (trial, observation) pair ever shares a stream and results cannot
depend on scheduling.  Trials are aggregated in index order, which makes the
output identical whether they ran serially or across a process pool.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import InsufficientDataError, InvalidArgumentError
from .estimator import EfnEstimate, pearson_correlation, phase_error
from .signals import SignalFamilySpec, TemplateSignal, generate_template, wrap_phase
from .theory import estimate_ck_profile, predict_magnitude, predict_phase_mse

# Reserved single-element spawn key for the prediction Monte-Carlo; disjoint
# from the (trial, observation) two-element keys used for noise streams.
_CK_SEED_LANE = 0x5EED

SWEEP_AXES = ("M", "d", "beta", "pad-ratio")


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise InvalidArgumentError(f"sweep.axis must be one of {SWEEP_AXES}, got {self.axis!r}")
        vals = tuple(self.values)
        if len(vals) < 1 or any(b <= a for a, b in zip(vals, vals[1:])):
            raise InvalidArgumentError("sweep.values must be non-empty and strictly increasing")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one Monte-Carlo experiment."""

    template: SignalFamilySpec
    M: int
    trials: int
    sigma: float = 1.0
    master_seed: int = 0
    frequencies: tuple = ()
    sweep: Optional[SweepSpec] = None
    ck_trials: int = 4000

    def __post_init__(self):
        if self.M < 1:
            raise InvalidArgumentError(f"M must be >= 1, got {self.M}")
        if self.trials < 1:
            raise InvalidArgumentError(f"trials must be >= 1, got {self.trials}")
        if self.sigma <= 0:
            raise InvalidArgumentError(f"sigma must be positive, got {self.sigma}")
        if self.master_seed < 0:
            raise InvalidArgumentError("master_seed must be a nonnegative integer")
        freqs = tuple(int(k) for k in self.frequencies)
        if any(k < 0 or k > self.template.d - 1 for k in freqs):
            raise InvalidArgumentError(
                f"frequencies must lie in [0, {self.template.d - 1}], got {freqs}"
            )
        object.__setattr__(self, "frequencies", freqs)
        if self.ck_trials < 1000:
            raise InvalidArgumentError("ck_trials must be >= 1000")

    def to_dict(self) -> dict:
        out = {
            "template": dataclasses.asdict(self.template),
            "M": self.M,
            "trials": self.trials,
            "sigma": self.sigma,
            "master_seed": self.master_seed,
            "frequencies": list(self.frequencies),
            "ck_trials": self.ck_trials,
        }
        if self.sweep is not None:
            out["sweep"] = {"axis": self.sweep.axis, "values": list(self.sweep.values)}
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if "template" not in doc:
            raise InvalidArgumentError("config missing required field 'template'")
        tdoc = dict(doc["template"])
        if tdoc.get("samples") is not None:
            tdoc["samples"] = tuple(tdoc["samples"])
        try:
            template = SignalFamilySpec(**tdoc)
        except TypeError as e:
            raise InvalidArgumentError(f"template: {e}") from e
        sweep = None
        if doc.get("sweep") is not None:
            sweep = SweepSpec(axis=doc["sweep"]["axis"], values=tuple(doc["sweep"]["values"]))
        known = {"template", "M", "trials", "sigma", "master_seed", "frequencies", "sweep", "ck_trials"}
        unknown = set(doc) - known
        if unknown:
            raise InvalidArgumentError(f"unknown config fields: {sorted(unknown)}")
        return cls(
            template=template,
            M=int(doc.get("M", 1)),
            trials=int(doc.get("trials", 1)),
            sigma=float(doc.get("sigma", 1.0)),
            master_seed=int(doc.get("master_seed", 0)),
            frequencies=tuple(doc.get("frequencies", ())),
            sweep=sweep,
            ck_trials=int(doc.get("ck_trials", 4000)),
        )


@dataclass(frozen=True)
class TrialResult:
    trial_index: int
    phase_errors: np.ndarray  # wrapped, one entry per configured frequency
    magnitudes: np.ndarray
    pearson: float


@dataclass(frozen=True)
class AggregateStats:
    """Per-frequency statistics over all trials, with analytic predictions."""

    config: ExperimentConfig
    n_trials: int
    ks: np.ndarray
    phase_mse: np.ndarray
    phase_mse_stderr: np.ndarray
    mean_magnitude: np.ndarray
    magnitude_stderr: np.ndarray
    mean_pearson: float
    pearson_stderr: float
    predicted_mse_thm1: np.ndarray
    predicted_mse_thm2: np.ndarray
    predicted_magnitude_thm1: np.ndarray
    predicted_magnitude_thm2: np.ndarray

    @property
    def mse_ratio_thm1(self) -> np.ndarray:
        return self.phase_mse / self.predicted_mse_thm1

    @property
    def mse_ratio_thm2(self) -> np.ndarray:
        return self.phase_mse / self.predicted_mse_thm2

    def rows(self) -> list[dict]:
        """One dict per frequency (CSV-ready)."""
        out = []
        for i, k in enumerate(self.ks):
            out.append(
                {
                    "k": int(k),
                    "phase_mse": self.phase_mse[i],
                    "phase_mse_stderr": self.phase_mse_stderr[i],
                    "mean_magnitude": self.mean_magnitude[i],
                    "magnitude_stderr": self.magnitude_stderr[i],
                    "predicted_mse_thm1": self.predicted_mse_thm1[i],
                    "predicted_mse_thm2": self.predicted_mse_thm2[i],
                    "predicted_magnitude_thm1": self.predicted_magnitude_thm1[i],
                    "predicted_magnitude_thm2": self.predicted_magnitude_thm2[i],
                    "mse_ratio_thm2": self.mse_ratio_thm2[i],
                }
            )
        return out

    def summary(self) -> dict:
        return {
            "n_trials": self.n_trials,
            "mean_pearson": self.mean_pearson,
            "pearson_stderr": self.pearson_stderr,
            "frequencies": [int(k) for k in self.ks],
            "phase_mse": self.phase_mse.tolist(),
            "phase_mse_stderr": self.phase_mse_stderr.tolist(),
            "mean_magnitude": self.mean_magnitude.tolist(),
            "magnitude_stderr": self.magnitude_stderr.tolist(),
            "predicted_mse_thm1": self.predicted_mse_thm1.tolist(),
            "predicted_mse_thm2": self.predicted_mse_thm2.tolist(),
            "predicted_magnitude_thm1": self.predicted_magnitude_thm1.tolist(),
            "predicted_magnitude_thm2": self.predicted_magnitude_thm2.tolist(),
        }


def observation_rng(master_seed: int, trial_index: int, observation_index: int) -> np.random.Generator:
    """The dedicated RNG stream of one (trial, observation) pair."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(trial_index, observation_index))
    return np.random.default_rng(ss)


def _noise_block(master_seed: int, trial_index: int, M: int, d: int, sigma: float) -> np.ndarray:
    block = np.empty((M, d))
    for i in range(M):
        block[i] = observation_rng(master_seed, trial_index, i).standard_normal(d)
    if sigma != 1.0:
        block *= sigma
    return block


def _template_of(config: ExperimentConfig) -> TemplateSignal:
    template = generate_template(config.template)
    mags = template.spectrum.magnitudes
    for k in config.frequencies:
        if mags[k] <= template.floor * mags.max():
            raise InvalidArgumentError(
                f"frequencies: bin {k} is excluded for this template (magnitude at floor)"
            )
    return template


def run_trial(config: ExperimentConfig, trial_index: int) -> TrialResult:
    """One independent estimate: draw M observations, align, average, measure."""
    template = _template_of(config)
    d = template.d
    noise = _noise_block(config.master_seed, trial_index, config.M, d, config.sigma)
    spec_x_u = np.fft.rfft(template.samples)
    corr = np.fft.irfft(np.fft.rfft(noise, axis=1) * np.conj(spec_x_u)[None, :], d, axis=1)
    shifts = np.argmax(corr, axis=1)
    cols = (np.arange(d)[None, :] + shifts[:, None]) % d
    aligned = noise[np.arange(config.M)[:, None], cols]
    xhat = aligned.mean(axis=0)

    estimate = EfnEstimate.from_samples(xhat, config.M)
    ks = np.asarray(config.frequencies, dtype=int)
    if ks.size:
        errs = wrap_phase(estimate.spectrum.phases[ks] - template.spectrum.phases[ks])
        mags = estimate.spectrum.magnitudes[ks]
    else:
        errs = np.empty(0)
        mags = np.empty(0)
    return TrialResult(
        trial_index=trial_index,
        phase_errors=errs,
        magnitudes=mags,
        pearson=pearson_correlation(xhat, template.samples),
    )


def aggregate_trials(config: ExperimentConfig, results: Sequence[TrialResult]) -> AggregateStats:
    """Fold trial results (in trial-index order) into aggregate statistics."""
    results = sorted(results, key=lambda r: r.trial_index)
    n = len(results)
    if n < 1:
        raise InsufficientDataError("no trials to aggregate")
    template = _template_of(config)
    ks = np.asarray(config.frequencies, dtype=int)
    pearsons = np.asarray([r.pearson for r in results])

    if ks.size:
        errs = np.stack([r.phase_errors for r in results])
        mags = np.stack([r.magnitudes for r in results])
        sq = errs**2
        mse = sq.mean(0)
        mse_se = sq.std(0, ddof=1) / math.sqrt(n) if n > 1 else np.full(ks.size, np.nan)
        mag_mean = mags.mean(0)
        mag_se = mags.std(0, ddof=1) / math.sqrt(n) if n > 1 else np.full(ks.size, np.nan)
        ck_seed = np.random.SeedSequence(config.master_seed, spawn_key=(_CK_SEED_LANE,))
        profile = estimate_ck_profile(
            template, config.ck_trials, ck_seed, sigma=config.sigma, ks=ks
        )
        pred1 = np.asarray([est.ck / config.M for est in profile])
        pred1_mag = np.asarray([est.mu_b for est in profile])
        pred2 = np.asarray(
            [predict_phase_mse(template, int(k), config.M, "thm2-high-d") for k in ks]
        )
        pred2_mag = np.asarray(
            [predict_magnitude(template, int(k), "thm2-high-d") for k in ks]
        )
    else:
        mse = mse_se = mag_mean = mag_se = np.empty(0)
        pred1 = pred2 = pred1_mag = pred2_mag = np.empty(0)

    return AggregateStats(
        config=config,
        n_trials=n,
        ks=ks,
        phase_mse=mse,
        phase_mse_stderr=mse_se,
        mean_magnitude=mag_mean,
        magnitude_stderr=mag_se,
        mean_pearson=float(pearsons.mean()),
        pearson_stderr=float(pearsons.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan"),
        predicted_mse_thm1=pred1,
        predicted_mse_thm2=pred2,
        predicted_magnitude_thm1=pred1_mag,
        predicted_magnitude_thm2=pred2_mag,
    )


def run_experiment(config: ExperimentConfig, workers: int = 1) -> AggregateStats:
    """Run all trials (optionally across processes) and aggregate.

    The aggregate is identical for any worker count: trials are keyed by
    index, not by completion order.
    """
    _template_of(config)  # validate frequencies before spawning workers
    if workers <= 1:
        results = [run_trial(config, t) for t in range(config.trials)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_trial, [config] * config.trials, range(config.trials)))
    return aggregate_trials(config, results)


def sweep_configs(config: ExperimentConfig) -> list[tuple[float, ExperimentConfig]]:
    """Expand a sweep into (value, per-value config) pairs."""
    if config.sweep is None:
        raise InvalidArgumentError("config has no sweep")
    out = []
    for v in config.sweep.values:
        if config.sweep.axis == "M":
            c = dataclasses.replace(config, M=int(v), sweep=None)
        elif config.sweep.axis == "d":
            t = dataclasses.replace(config.template, d=int(v))
            c = dataclasses.replace(config, template=t, sweep=None)
        elif config.sweep.axis == "beta":
            t = dataclasses.replace(config.template, beta=float(v))
            c = dataclasses.replace(config, template=t, sweep=None)
        else:
            t = dataclasses.replace(config.template, pad_ratio=float(v))
            c = dataclasses.replace(config, template=t, sweep=None)
        out.append((float(v), c))
    return out


def run_sweep(config: ExperimentConfig, workers: int = 1) -> list[tuple[float, AggregateStats]]:
    return [(v, run_experiment(c, workers=workers)) for v, c in sweep_configs(config)]


class SlopeFit(NamedTuple):
    slope: float
    intercept: float
    r2: float


def fit_loglog_slope(points: Sequence[tuple]) -> SlopeFit:
    """Least-squares line through (ln x, ln y)."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise InvalidArgumentError("fit_loglog_slope needs at least 3 points")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise InvalidArgumentError("fit_loglog_slope requires strictly positive coordinates")
    lx = np.log([p[0] for p in pts])
    ly = np.log([p[1] for p in pts])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    sstot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / sstot if sstot > 0 else 1.0
    return SlopeFit(float(slope), float(intercept), r2)


def ks_statistic(samples, cdf: str = "gumbel-standard") -> float:
    """Sup distance between the empirical CDF and a reference distribution."""
    if cdf != "gumbel-standard":
        raise InvalidArgumentError(f"unknown cdf tag {cdf!r}")
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size < 100:
        raise InsufficientDataError("ks_statistic needs at least 100 samples")
    ref = np.exp(-np.exp(-x))
    i = np.arange(1, x.size + 1)
    upper = np.max(i / x.size - ref)
    lower = np.max(ref - (i - 1) / x.size)
    return float(max(upper, lower))


def gumbel_standard_ppf(u) -> np.ndarray:
    """Inverse CDF of exp(-e^{-x}) (handy for self-tests)."""
    u = np.asarray(u, dtype=float)
    return -np.log(-np.log(u))

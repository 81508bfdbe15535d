"""The align-and-average estimator and its phase/magnitude error metrics.

Averaging pure-noise observations after aligning each to a template produces
an estimate whose Fourier phases drift toward the template's -- the model
bias this package studies.  The accumulator here keeps exact (integer
fixed-point) running sums so that merging partial accumulators is associative
and commutative bit-for-bit, no matter how observations were partitioned
across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

import numpy as np

from .alignment import estimate_shift
from .errors import (
    ExcludedBinError,
    InsufficientDataError,
    InvalidArgumentError,
    LengthMismatchError,
    UndefinedCorrelationError,
)
from .signals import NoiseSample, SpectralRepr, TemplateSignal, circular_shift, dft, wrap_phase

# Scale for exact fixed-point accumulation: every finite float64 is an integer
# multiple of 2^-1074, so multiplying by 2^1074 embeds it exactly in Z.
_FIXED_EXP = 1074
_FIXED_DEN = 1 << _FIXED_EXP


def _to_fixed(v: float) -> int:
    p, q = float(v).as_integer_ratio()
    return p * (_FIXED_DEN // q)


@dataclass(frozen=True)
class EfnEstimate:
    """Finalized estimate: the average of the aligned observations."""

    samples: np.ndarray
    spectrum: SpectralRepr
    M: int

    @classmethod
    def from_samples(cls, samples, M: int) -> "EfnEstimate":
        x = np.ascontiguousarray(samples, dtype=float)
        x.setflags(write=False)
        return cls(samples=x, spectrum=dft(x), M=int(M))


class EfnAccumulator:
    """Streaming sum of aligned noise observations.

    Each accumulated observation is shifted back by the negative of its
    estimated alignment shift and added to the running sum.  Running sums are
    exact, so ``a.merge(b)`` equals accumulating the union of their
    observations in any order, exactly.
    """

    def __init__(self, template: TemplateSignal):
        self.template = template
        self._sums = [0] * template.d
        self.count = 0

    @property
    def running_sum(self) -> np.ndarray:
        """Running sum as float64 (each entry correctly rounded)."""
        return np.asarray([float(Fraction(s, _FIXED_DEN)) for s in self._sums])

    def accumulate(self, noise: NoiseSample) -> "EfnAccumulator":
        """Align one observation and add it to the running sum."""
        if noise.d != self.template.d:
            raise LengthMismatchError(
                f"noise length {noise.d} != template length {self.template.d}"
            )
        r = estimate_shift(noise, self.template).shift
        aligned = circular_shift(noise.samples, -r)
        for i, v in enumerate(aligned.tolist()):
            self._sums[i] += _to_fixed(v)
        self.count += 1
        return self

    def merge(self, other: "EfnAccumulator") -> "EfnAccumulator":
        """Combine accumulators filled over disjoint observation sets."""
        if other.template.d != self.template.d or not np.array_equal(
            other.template.samples, self.template.samples
        ):
            raise InvalidArgumentError("cannot merge accumulators built on different templates")
        out = EfnAccumulator(self.template)
        out._sums = [a + b for a, b in zip(self._sums, other._sums)]
        out.count = self.count + other.count
        return out

    def finalize(self) -> EfnEstimate:
        """Divide by the observation count; requires count >= 1."""
        if self.count < 1:
            raise InsufficientDataError("cannot finalize an empty accumulator")
        den = self.count * _FIXED_DEN
        samples = np.asarray([float(Fraction(s, den)) for s in self._sums])
        return EfnEstimate.from_samples(samples, self.count)


def accumulate(acc: EfnAccumulator, noise: NoiseSample) -> EfnAccumulator:
    """Functional alias for :meth:`EfnAccumulator.accumulate`."""
    return acc.accumulate(noise)


def _check_bin(template: TemplateSignal, k: int):
    if not (0 <= k <= template.d - 1):
        raise InvalidArgumentError(f"frequency index {k} out of range for d={template.d}")
    mags = template.spectrum.magnitudes
    if mags[k] <= template.floor * mags.max():
        raise ExcludedBinError(
            f"bin {k} excluded: template magnitude {mags[k]:.3e} is at or below the floor"
        )


def phase_error(estimate: EfnEstimate, template: TemplateSignal, k: int) -> float:
    """Wrapped phase difference of the estimate against the template at bin k.

    The raw difference is wrapped into (-pi, pi] before any squaring; bins
    where the template magnitude sits at the floor (in particular a zeroed DC)
    raise ExcludedBinError.
    """
    _check_bin(template, k)
    raw = estimate.spectrum.phases[k] - template.spectrum.phases[k]
    return float(wrap_phase(raw))


class PhaseMse(NamedTuple):
    mse: float
    stderr: float


def phase_mse(trials: Iterable[EfnEstimate], template: TemplateSignal, k: int) -> PhaseMse:
    """Mean squared wrapped phase error across independent estimates."""
    sq = np.asarray([phase_error(e, template, k) ** 2 for e in trials])
    if sq.size < 2:
        raise InsufficientDataError("phase_mse needs at least 2 trials")
    return PhaseMse(float(sq.mean()), float(sq.std(ddof=1) / math.sqrt(sq.size)))


def pearson_correlation(a, b) -> float:
    """Centered, normalized inner product of two equal-length sequences."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatchError("pearson_correlation requires equal-length 1-d inputs")
    da = a - a.mean()
    db = b - b.mean()
    na = float(da @ da)
    nb = float(db @ db)
    if na == 0.0 or nb == 0.0:
        raise UndefinedCorrelationError("correlation undefined for a constant input")
    return float(da @ db / math.sqrt(na * nb))

"""Maximal-correlation shift estimation.

The shift assigned to a noise observation n is the argmax over cyclic lags l
of <n, T_l x>, where T_l is the cyclic shift and x the template.  Three
routes compute the same correlation sequence:

* :func:`correlation_sequence`   -- FFT-based, O(d log d), the production path;
* :func:`correlation_oracle`     -- direct O(d^2) sums, the test reference;
* :func:`fourier_correlation_sequence` -- the magnitude/phase cosine-sum form,
  assembled from polar spectra.  Under the unitary convention it equals the
  real-space inner products exactly (no extra constant).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import LengthMismatchError
from .signals import NoiseSample, TemplateSignal, circular_shift

ArrayLike = Union[np.ndarray, list, tuple]


def _noise_samples(noise) -> np.ndarray:
    if isinstance(noise, NoiseSample):
        return noise.samples
    return np.asarray(noise, dtype=float)


@dataclass(frozen=True)
class AlignmentResult:
    """Outcome of shift estimation for one observation.

    shift is the argmax lag in [0, d-1]; exact ties resolve to the smallest
    index.  degenerate marks an all-equal correlation sequence (e.g. a
    template with only DC energy against zero-DC noise).
    """

    shift: int
    peak_value: float
    correlation: Optional[np.ndarray] = None
    degenerate: bool = False


def correlation_sequence(noise, template: TemplateSignal) -> np.ndarray:
    """Entry l equals <n, T_l x>, computed via fast transforms."""
    n = _noise_samples(noise)
    if n.size != template.d:
        raise LengthMismatchError(f"noise length {n.size} != template length {template.d}")
    spec_n = np.fft.rfft(n)
    spec_x = np.fft.rfft(template.samples)
    return np.fft.irfft(spec_n * np.conj(spec_x), template.d)


def correlation_oracle(noise, template: TemplateSignal) -> np.ndarray:
    """Direct O(d^2) evaluation of the same inner products (test reference)."""
    n = _noise_samples(noise)
    if n.size != template.d:
        raise LengthMismatchError(f"noise length {n.size} != template length {template.d}")
    x = template.samples
    return np.asarray([float(n @ circular_shift(x, ell)) for ell in range(template.d)])


def fourier_correlation_sequence(noise, template: TemplateSignal) -> np.ndarray:
    """Polar-form correlation: entry r is
    sum_k |X[k]| |N[k]| cos(2*pi*k*r/d + phi_N[k] - phi_X[k]).
    """
    if isinstance(noise, NoiseSample):
        spec_n = noise.spectrum
        d = noise.d
    else:
        from .signals import dft

        arr = np.asarray(noise, dtype=float)
        spec_n = dft(arr)
        d = arr.size
    if d != template.d:
        raise LengthMismatchError(f"noise length {d} != template length {template.d}")
    spec_x = template.spectrum
    c = (
        spec_x.magnitudes
        * spec_n.magnitudes
        * np.exp(1j * (spec_n.phases - spec_x.phases))
    )
    return (d * np.fft.ifft(c)).real


def estimate_shift(noise, template: TemplateSignal, *, keep_sequence: bool = False) -> AlignmentResult:
    """Align one observation against the template.

    Raises
    ------
    RejectedTemplateError
        If the template spectrum fails the non-vanishing floor.
    """
    template.require_alignable()
    corr = correlation_sequence(noise, template)
    degenerate = bool(np.all(corr == corr[0]))
    shift = 0 if degenerate else int(np.argmax(corr))
    return AlignmentResult(
        shift=shift,
        peak_value=float(corr[shift]),
        correlation=corr if keep_sequence else None,
        degenerate=degenerate,
    )

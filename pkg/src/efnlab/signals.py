"""Signal representations and spectral machinery.

Everything downstream works with real length-d signals (d even) and their
unitary DFTs: X[k] = (1/sqrt(d)) * sum_l x_l exp(-2j*pi*k*l/d).  With this
convention a unit-norm signal has unit spectral energy (Parseval), so
real-space and Fourier-space normalizations coincide.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError, RejectedTemplateError

#: Relative floor under which a spectral magnitude counts as vanishing.
NON_VANISHING_FLOOR = 1e-8


def wrap_phase(phi):
    """Wrap angles into (-pi, pi].  Accepts scalars or arrays."""
    return np.pi - (np.pi - np.asarray(phi)) % (2.0 * np.pi)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpectralRepr:
    """Magnitude/phase pairs of a length-d spectrum.

    Phases are wrapped to (-pi, pi] and set to 0 at bins whose magnitude is
    exactly zero (those bins carry no phase information).
    """

    magnitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        mags = _readonly(self.magnitudes)
        phs = _readonly(wrap_phase(self.phases))
        if mags.ndim != 1 or mags.shape != phs.shape:
            raise InvalidArgumentError("magnitudes and phases must be 1-d and equal length")
        if np.any(mags < 0):
            raise InvalidArgumentError("magnitudes must be nonnegative")
        object.__setattr__(self, "magnitudes", mags)
        object.__setattr__(self, "phases", phs)

    @property
    def d(self) -> int:
        return self.magnitudes.size

    def to_complex(self) -> np.ndarray:
        return self.magnitudes * np.exp(1j * self.phases)

    @classmethod
    def from_complex(cls, z: np.ndarray) -> "SpectralRepr":
        z = np.asarray(z, dtype=complex)
        mags = np.abs(z)
        phases = np.where(mags == 0.0, 0.0, np.angle(z))
        return cls(mags, wrap_phase(phases))

    def max_symmetry_defect(self) -> float:
        """Largest violation of the real-signal conjugate symmetry.

        For a real signal, magnitudes[k] == magnitudes[d-k] and
        phases[k] == -phases[d-k] (mod 2*pi) for 1 <= k <= d-1.
        """
        k = np.arange(1, self.d)
        dm = np.abs(self.magnitudes[k] - self.magnitudes[self.d - k])
        dp = np.abs(wrap_phase(self.phases[k] + self.phases[self.d - k]))
        dp = np.where(self.magnitudes[k] < 1e-15, 0.0, dp)
        return float(max(dm.max(initial=0.0), dp.max(initial=0.0)))


def dft(samples) -> SpectralRepr:
    """Unitary DFT of a real signal, in magnitude/phase form.

    Raises
    ------
    InvalidArgumentError
        If the input is empty or shorter than 2 samples.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise InvalidArgumentError("dft requires a 1-d signal with d >= 2")
    z = np.fft.fft(x) / math.sqrt(x.size)
    return SpectralRepr.from_complex(z)


def idft(spectrum: SpectralRepr) -> np.ndarray:
    """Inverse of :func:`dft`; returns the real signal."""
    z = spectrum.to_complex()
    return np.fft.ifft(z * math.sqrt(spectrum.d)).real


def circular_shift(signal, ell: int) -> np.ndarray:
    """Cyclic shift: output index i holds input index (i - ell) mod d."""
    return np.roll(np.asarray(signal), int(ell))


class TemplateSignal:
    """Unit-norm real template with cached spectrum.

    Parameters
    ----------
    samples : array-like
        Real signal of even length d >= 2 with Euclidean norm 1 (to 1e-12).
    floor : float
        Relative non-vanishing floor: the template is flagged usable for
        alignment only if min_{0<k} |X[k]| exceeds ``floor * max_k |X[k]|``.
    """

    def __init__(self, samples, *, floor: float = NON_VANISHING_FLOOR):
        x = _readonly(samples)
        if x.ndim != 1 or x.size < 2:
            raise InvalidArgumentError("template must be a 1-d signal with d >= 2")
        if x.size % 2 != 0:
            raise InvalidArgumentError(f"template length must be even, got {x.size}")
        if not np.all(np.isfinite(x)):
            raise InvalidArgumentError("template samples must be finite")
        nrm = float(np.linalg.norm(x))
        if abs(nrm - 1.0) > 1e-12:
            raise InvalidArgumentError(f"template must have unit norm (got {nrm!r})")
        self.samples = x
        self.d = x.size
        self.spectrum = dft(x)
        self.floor = float(floor)
        mags = self.spectrum.magnitudes
        self.non_vanishing = bool(mags[1:].min() > self.floor * mags.max())

    @classmethod
    def normalized(cls, samples, *, floor: float = NON_VANISHING_FLOOR) -> "TemplateSignal":
        """Build a template from arbitrary samples, rescaling to unit norm."""
        x = np.asarray(samples, dtype=float)
        nrm = np.linalg.norm(x)
        if nrm == 0.0 or not np.isfinite(nrm):
            raise InvalidArgumentError("cannot normalize a zero or non-finite signal")
        return cls(x / nrm, floor=floor)

    def require_alignable(self):
        """Raise RejectedTemplateError unless the spectrum clears the floor."""
        if not self.non_vanishing:
            raise RejectedTemplateError(
                "template spectrum falls below the non-vanishing floor "
                f"({self.floor:g} relative)"
            )

    def __repr__(self):
        return f"TemplateSignal(d={self.d}, non_vanishing={self.non_vanishing})"


@dataclass(frozen=True)
class NoiseSample:
    """One pure-noise observation: i.i.d. N(0, sigma^2) entries."""

    samples: np.ndarray
    sigma: float
    spectrum: SpectralRepr = field(init=False)

    def __post_init__(self):
        x = _readonly(self.samples)
        if x.ndim != 1 or x.size < 2:
            raise InvalidArgumentError("noise must be a 1-d signal with d >= 2")
        if self.sigma <= 0:
            raise InvalidArgumentError("sigma must be positive")
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "spectrum", dft(x))

    @property
    def d(self) -> int:
        return self.samples.size


def draw_noise(d: int, sigma: float, rng) -> NoiseSample:
    """Draw one NoiseSample from a Generator (or integer seed)."""
    if d < 2 or d % 2 != 0:
        raise InvalidArgumentError("d must be even and >= 2")
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    return NoiseSample(sigma * rng.standard_normal(d), sigma)


FAMILIES = ("delta", "power-law-psd", "zero-padded-pulse", "explicit-samples")


@dataclass(frozen=True)
class SignalFamilySpec:
    """Parameterization of the template generator.

    family:
        "delta"             -- x = e_0 (flat spectrum).
        "power-law-psd"     -- |X[k]| proportional to (1 + min(k, d-k))^(-beta/2),
                               random phases from phase_seed.
        "zero-padded-pulse" -- smooth bump occupying d/(1+pad_ratio) samples,
                               spectral magnitudes floored to stay non-vanishing.
        "explicit-samples"  -- caller-supplied samples (normalized).
    zero_dc:
        For the spectral families, zero the DC bin before synthesis (the
        high-dimensional theory assumes a zero DC component).
    """

    family: str
    d: int
    beta: float = 0.0
    pad_ratio: float = 0.0
    phase_seed: int = 0
    zero_dc: bool = True
    samples: Optional[tuple] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidArgumentError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.d < 2 or self.d % 2 != 0:
            raise InvalidArgumentError(f"d must be even and >= 2, got {self.d}")
        if self.beta < 0:
            raise InvalidArgumentError(f"beta must be nonnegative, got {self.beta}")
        if self.pad_ratio < 0:
            raise InvalidArgumentError(f"pad_ratio must be nonnegative, got {self.pad_ratio}")
        if self.family == "explicit-samples":
            if self.samples is None:
                raise InvalidArgumentError("explicit-samples family requires samples")
            if len(self.samples) % 2 != 0:
                raise InvalidArgumentError("explicit samples must have even length")


def _synthesize(mag_half: np.ndarray, phase_half: np.ndarray, d: int) -> np.ndarray:
    """Real signal from half-spectrum magnitudes/phases (bins 0..d/2)."""
    spec = mag_half * np.exp(1j * phase_half)
    x = np.fft.irfft(spec, d)
    return x / np.linalg.norm(x)


def generate_template(spec: SignalFamilySpec) -> TemplateSignal:
    """Deterministically build the template described by ``spec``.

    The result is unit-norm; for the spectral families the phases at bins 0
    and d/2 are fixed to 0 so the synthesized signal is exactly real.
    """
    d = spec.d
    if spec.family == "delta":
        x = np.zeros(d)
        x[0] = 1.0
        return TemplateSignal(x)

    if spec.family == "explicit-samples":
        return TemplateSignal.normalized(np.asarray(spec.samples, dtype=float))

    half = d // 2 + 1
    rng = np.random.default_rng(spec.phase_seed)
    phases = rng.uniform(-np.pi, np.pi, half)
    phases[0] = 0.0
    phases[-1] = 0.0

    if spec.family == "power-law-psd":
        k = np.arange(half)
        mag = (1.0 + k) ** (-spec.beta / 2.0)
        if spec.zero_dc:
            mag[0] = 0.0
        return TemplateSignal(_synthesize(mag, phases, d))

    # zero-padded-pulse: a centered Gaussian bump whose support shrinks as the
    # pad ratio grows; tiny spectral bins are floored so the template keeps a
    # non-vanishing spectrum and stays usable for alignment.
    width = d / (1.0 + spec.pad_ratio)
    i = np.arange(d)
    bump = np.exp(-0.5 * ((i - d / 2) / (width / 8.0)) ** 2)
    z = np.fft.rfft(bump)
    mag = np.abs(z)
    mag = np.maximum(mag, 1e-6 * mag.max())
    ph = np.where(np.abs(z) == 0.0, phases, np.angle(z))
    ph[0] = 0.0
    ph[-1] = 0.0
    if spec.zero_dc:
        mag[0] = 0.0
    return TemplateSignal(_synthesize(mag, ph, d))


def autocorrelation(template: TemplateSignal) -> np.ndarray:
    """Circular autocorrelation R[l] = sum_i x_i x_{(i+l) mod d}.

    Equals the inverse transform of the PSD; R[0] is the signal energy (1 for
    a unit-norm template) and the sequence is even-symmetric in l.
    """
    spec_u = np.fft.rfft(template.samples)
    return np.fft.irfft(np.abs(spec_u) ** 2, template.d)


@dataclass(frozen=True)
class Assumption1Diagnostic:
    """Finite-d proxies for the high-dimensional template conditions.

    tail_autocorrelation:
        max over lags in [tail_lag_fraction*d, d/2] of |R[l]| * ln d (the
        wrap-around half is mirrored by symmetry, so the band covers every
        genuinely distant lag).  Small values mean fast correlation decay.
    peak_magnitude:
        max over 0<k<=d-1 of |X[k]| * sqrt(ln d).
    dc_magnitude:
        |X[0]|; the asymptotic theory wants it exactly 0.
    """

    tail_autocorrelation: float
    peak_magnitude: float
    dc_magnitude: float
    tail_lag_fraction: float


def check_assumption1(template: TemplateSignal, tail_lag_fraction: float = 0.25) -> Assumption1Diagnostic:
    """Report the three finite-d diagnostics; no pass/fail verdict is given."""
    if not (0.0 < tail_lag_fraction <= 1.0):
        raise InvalidArgumentError("tail_lag_fraction must lie in (0, 1]")
    d = template.d
    logd = math.log(d)
    r = autocorrelation(template)
    lo = int(math.ceil(tail_lag_fraction * d))
    lo = min(lo, d // 2)
    tail = np.abs(r[lo : d // 2 + 1]).max() * logd if lo <= d // 2 else 0.0
    mags = template.spectrum.magnitudes
    return Assumption1Diagnostic(
        tail_autocorrelation=float(tail),
        peak_magnitude=float(mags[1:].max() * math.sqrt(logd)),
        dc_magnitude=float(mags[0]),
        tail_lag_fraction=tail_lag_fraction,
    )


# ---------------------------------------------------------------------------
# Serialization: a common {d, samples, magnitudes, phases} record for signals.
# ---------------------------------------------------------------------------

def signal_record(samples, spectrum: Optional[SpectralRepr] = None) -> dict:
    x = np.asarray(samples, dtype=float)
    spec = spectrum if spectrum is not None else dft(x)
    return {
        "d": int(x.size),
        "samples": x.tolist(),
        "magnitudes": spec.magnitudes.tolist(),
        "phases": spec.phases.tolist(),
    }


def signal_to_json(samples, spectrum: Optional[SpectralRepr] = None) -> str:
    return json.dumps(signal_record(samples, spectrum), indent=2)


def signal_from_json(text: str) -> np.ndarray:
    rec = json.loads(text)
    x = np.asarray(rec["samples"], dtype=float)
    if x.size != rec["d"]:
        raise InvalidArgumentError("JSON record length disagrees with its d field")
    return x


def signal_to_csv(samples) -> str:
    """One sample per row."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sample"])
    for v in np.asarray(samples, dtype=float):
        w.writerow([repr(float(v))])
    return buf.getvalue()


def signal_from_csv(text: str) -> np.ndarray:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["sample"]:
        raise InvalidArgumentError("signal CSV must start with a 'sample' header")
    return np.asarray([float(r[0]) for r in rows[1:]], dtype=float)

"""Alignment: correlation routes, argmax estimation, equivariances."""

import numpy as np
import pytest

import efnlab as E
from efnlab.errors import LengthMismatchError, RejectedTemplateError


def plaw(d, beta=1.0, seed=1, zero_dc=False):
    return E.generate_template(
        E.SignalFamilySpec(family="power-law-psd", d=d, beta=beta, phase_seed=seed, zero_dc=zero_dc)
    )


class TestCorrelationSequence:
    def test_delta_template_selects_samples(self):
        n = E.NoiseSample(np.array([0.5, -1.0, 2.0, 0.3]), 1.0)
        t = E.generate_template(E.SignalFamilySpec(family="delta", d=4))
        np.testing.assert_array_equal(E.correlation_oracle(n, t), n.samples)
        np.testing.assert_allclose(E.correlation_sequence(n, t), n.samples, atol=1e-12)

    def test_planted_copy_peaks_at_its_shift(self):
        t = plaw(64, beta=2.0)
        planted = E.circular_shift(t.samples, 5)
        corr = E.correlation_sequence(planted, t)
        assert corr[5] == pytest.approx(1.0, abs=1e-12)
        assert int(np.argmax(corr)) == 5

    def test_matches_direct_sum_oracle(self):
        rng = np.random.default_rng(42)
        t = plaw(32, beta=1.0)
        for _ in range(50):
            n = E.NoiseSample(rng.standard_normal(32), 1.0)
            fast = E.correlation_sequence(n, t)
            direct = E.correlation_oracle(n, t)
            assert np.abs(fast - direct).max() <= 1e-9 * np.abs(direct).max()

    def test_zero_noise_gives_zero_sequence(self):
        t = plaw(16)
        np.testing.assert_array_equal(E.correlation_oracle(np.zeros(16), t), np.zeros(16))

    def test_length_mismatch_rejected(self):
        t = plaw(16)
        bad = np.zeros(8)
        for fn in (E.correlation_sequence, E.correlation_oracle, E.fourier_correlation_sequence):
            with pytest.raises(LengthMismatchError):
                fn(bad, t)


class TestEstimateShift:
    def test_noise_argmax_example(self):
        t = E.generate_template(E.SignalFamilySpec(family="delta", d=4))
        res = E.estimate_shift(np.array([0.5, -1.0, 2.0, 0.3]), t)
        assert res.shift == 2
        assert res.peak_value == pytest.approx(2.0, abs=1e-12)

    def test_noiseless_planted_shift(self):
        t = plaw(64, beta=2.0)
        res = E.estimate_shift(E.circular_shift(t.samples, 5), t)
        assert res.shift == 5

    def test_scale_invariance(self):
        rng = np.random.default_rng(7)
        t = plaw(32)
        for _ in range(300):
            n = rng.standard_normal(32)
            c = float(rng.uniform(0.01, 100.0))
            assert E.estimate_shift(n, t).shift == E.estimate_shift(c * n, t).shift

    def test_shift_equivariance(self):
        rng = np.random.default_rng(17)
        t = plaw(48)
        for _ in range(100):
            n = rng.standard_normal(48)
            s = int(rng.integers(0, 48))
            base = E.estimate_shift(n, t).shift
            moved = E.estimate_shift(E.circular_shift(n, s), t).shift
            assert moved == (base + s) % 48

    def test_tie_break_smallest_index(self):
        t = E.generate_template(E.SignalFamilySpec(family="delta", d=4))
        res = E.estimate_shift(np.array([1.0, 1.0, 0.0, 0.0]), t)
        assert res.shift == 0

    def test_degenerate_flat_sequence(self):
        t = E.generate_template(E.SignalFamilySpec(family="delta", d=8))
        res = E.estimate_shift(np.zeros(8), t)
        assert res.degenerate and res.shift == 0

    def test_vanishing_template_rejected(self):
        # all energy at DC: every non-DC magnitude is below the floor
        t = E.TemplateSignal(np.full(8, 1.0 / np.sqrt(8.0)))
        assert not t.non_vanishing
        with pytest.raises(RejectedTemplateError):
            E.estimate_shift(np.zeros(8), t)

    def test_keep_sequence(self):
        t = plaw(16)
        res = E.estimate_shift(np.ones(16), t, keep_sequence=True)
        assert res.correlation is not None and res.correlation.size == 16


class TestFourierRoute:
    def test_argmax_agreement_random_pairs(self):
        rng = np.random.default_rng(3)
        agree = 0
        cases = 200
        for i in range(cases):
            t = plaw(64, beta=float(rng.uniform(0, 2)), seed=int(rng.integers(1 << 30)))
            n = E.NoiseSample(rng.standard_normal(64), 1.0)
            a = int(np.argmax(E.correlation_sequence(n, t)))
            b = int(np.argmax(E.fourier_correlation_sequence(n, t)))
            agree += int(a == b)
        assert agree == cases

    def test_equals_real_route_in_value(self):
        # under the unitary convention the polar cosine sum IS the inner product
        rng = np.random.default_rng(5)
        t = plaw(32)
        n = E.NoiseSample(rng.standard_normal(32), 1.0)
        np.testing.assert_allclose(
            E.fourier_correlation_sequence(n, t),
            E.correlation_sequence(n, t),
            atol=1e-11,
        )

    def test_constant_template_with_zero_dc_noise_is_flat(self):
        t = E.TemplateSignal(np.full(8, 1.0 / np.sqrt(8.0)))
        noise = np.arange(8.0) - np.arange(8.0).mean()
        seq = E.fourier_correlation_sequence(noise, t)
        np.testing.assert_allclose(seq, 0.0, atol=1e-12)
        assert int(np.argmax(seq)) == 0

    def test_two_term_cosine_expansion_at_d2(self):
        t = E.TemplateSignal(np.array([0.8, 0.6]))
        n = E.NoiseSample(np.array([1.3, -0.4]), 1.0)
        st, sn = t.spectrum, n.spectrum
        expected = np.array(
            [
                sum(
                    st.magnitudes[k] * sn.magnitudes[k]
                    * np.cos(2 * np.pi * k * r / 2 + sn.phases[k] - st.phases[k])
                    for k in range(2)
                )
                for r in range(2)
            ]
        )
        np.testing.assert_allclose(E.fourier_correlation_sequence(n, t), expected, atol=1e-12)

    def test_phase_flip_antisymmetry(self):
        # negating every phase difference reflects the realized argmax
        rng = np.random.default_rng(23)
        t = plaw(32, beta=0.5, seed=9)
        for _ in range(100):
            n = E.NoiseSample(rng.standard_normal(32), 1.0)
            flipped_phases = E.wrap_phase(2.0 * t.spectrum.phases - n.spectrum.phases)
            spec = E.SpectralRepr(n.spectrum.magnitudes, flipped_phases)
            n_flip = E.idft(spec)
            r = int(np.argmax(E.fourier_correlation_sequence(n, t)))
            r_flip = int(np.argmax(E.fourier_correlation_sequence(n_flip, t)))
            assert r_flip == (-r) % 32

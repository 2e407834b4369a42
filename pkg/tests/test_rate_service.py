"""Unit tests for the rate service."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from error_handling import DimensionMismatchException
from services.channel_service import complex_gaussian
from services.precoding_service import signal_covariance, zf_precoder
from services.rate_service import (
    RateSample,
    destination_rate,
    direct_secrecy_rate,
    eavesdropper_rate,
    forwarded_noise_covariance,
    logdet_capacity,
    secrecy_rate,
    worst_case_direct_rate,
    worst_case_secrecy_rate,
    whiten,
)

HALF_LOG2_1_5 = 0.5 * np.log2(1.5)  # 0.29248...
HALF_LOG2_3 = 0.5 * np.log2(3.0)    # 0.79248...


def _det2(m):
    return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]


def _inv2(m):
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / _det2(m)


@pytest.mark.unit
class TestRateSample:
    """Unit tests for RateSample."""

    def test_positive_secrecy(self):
        """Test R = R_d - R_e with nothing clipped."""
        sample = RateSample.from_rates(1.5, 0.5)
        assert sample.r_secrecy == 1.0
        assert sample.r_secrecy_clipped == 1.0

    def test_negative_secrecy_clipped(self):
        """Test that negative secrecy is kept raw and clipped at zero."""
        sample = RateSample.from_rates(1.0, 1.5)
        assert sample.r_secrecy == -0.5
        assert sample.r_secrecy_clipped == 0.0

    def test_total_clips_after_summing(self):
        """Test that per-user samples are summed before clipping."""
        total = RateSample.total([RateSample.from_rates(1.0, 0.5), RateSample.from_rates(0.2, 0.9)])
        assert total.r_d == pytest.approx(1.2)
        assert total.r_e == pytest.approx(1.4)
        assert total.r_secrecy == pytest.approx(-0.2)
        assert total.r_secrecy_clipped == 0.0


@pytest.mark.unit
class TestLogdetCapacity:
    """Unit tests for logdet_capacity."""

    def test_zero_channel(self):
        """Test det(I) = 1 gives zero capacity."""
        assert logdet_capacity([[0.0]], [[1.0]]) == 0.0

    def test_unit_scalar(self):
        """Test log2(2) = 1 bit."""
        assert logdet_capacity([[1.0]], [[1.0]]) == pytest.approx(1.0, abs=1e-12)

    def test_identity_2x2(self):
        """Test 2 log2(2) = 2 bits."""
        assert logdet_capacity(np.eye(2), np.eye(2)) == pytest.approx(2.0, abs=1e-12)

    def test_accepts_signal_covariance(self):
        """Test that a SignalCovariance is accepted in place of a matrix."""
        assert logdet_capacity(np.eye(2), signal_covariance(2, 2.0)) == pytest.approx(2.0, abs=1e-12)

    def test_dimension_mismatch(self):
        """Test that non-conformable H and Q are rejected."""
        with pytest.raises(DimensionMismatchException):
            logdet_capacity(np.ones((2, 3)), np.eye(2))

    def test_matches_naive_determinant(self, rng):
        """Test agreement with an explicit 2x2 determinant within 1e-10."""
        for _ in range(100):
            h = complex_gaussian((2, 2), rng)
            a = complex_gaussian((2, 2), rng)
            q = a @ a.conj().T
            expected = np.log2(_det2(np.eye(2) + h @ q @ h.conj().T).real)
            assert logdet_capacity(h, q) == pytest.approx(expected, abs=1e-10)

    @given(
        rows=st.integers(min_value=1, max_value=4),
        cols=st.integers(min_value=1, max_value=4),
        scale=st.floats(min_value=1.0, max_value=100.0),
        seed=st.integers(min_value=0, max_value=2**32 - 1),
    )
    @settings(max_examples=80, deadline=None)
    def test_nonnegative_and_monotone_in_energy(self, rows, cols, scale, seed):
        """Test capacity >= 0 and nondecreasing when Q is scaled by c >= 1."""
        h = complex_gaussian((rows, cols), np.random.default_rng(seed))
        q = signal_covariance(cols, 1.0).matrix
        base = logdet_capacity(h, q)
        assert base >= 0.0
        assert logdet_capacity(h, scale * q) >= base - 1e-12


@pytest.mark.unit
class TestTwoHopRates:
    """Unit tests for destination_rate and eavesdropper_rate."""

    def test_destination_scalar_oracle(self):
        """Test h_rd = p_d = h_sr = q = 1: 1/2 log2(1 + 1/2)."""
        assert destination_rate(1.0, 1.0, 1.0, 1.0) == pytest.approx(HALF_LOG2_1_5, abs=1e-10)

    def test_destination_scales_with_source_gain(self):
        """Test h_sr = 2 multiplies the numerator by four."""
        assert destination_rate(1.0, 1.0, 2.0, 1.0) == pytest.approx(HALF_LOG2_3, abs=1e-10)

    def test_destination_without_source_link(self):
        """Test that H_sr = 0 delivers nothing."""
        assert destination_rate(1.0, 1.0, 0.0, 1.0) == 0.0

    def test_destination_identity_2x2(self):
        """Test I + (1/2) I for identity channels: log2(1.5)."""
        value = destination_rate(np.eye(2), np.eye(2), np.eye(2), np.eye(2))
        assert value == pytest.approx(np.log2(1.5), abs=1e-10)

    def test_destination_matches_naive_2x2(self, rng):
        """Test the right-inverse determinant ratio against explicit 2x2 algebra."""
        q = 0.5 * np.eye(2)
        for _ in range(100):
            h_rd, p_d, h_sr = (complex_gaussian((2, 2), rng) for _ in range(3))
            e2e = h_rd @ p_d @ h_sr
            numerator = e2e @ q @ e2e.conj().T
            denominator = h_rd @ q @ h_rd.conj().T + np.eye(2)
            expected = 0.5 * np.log2(abs(_det2(np.eye(2) + numerator @ _inv2(denominator))))
            assert destination_rate(h_rd, p_d, h_sr, q) == pytest.approx(expected, abs=1e-10)

    def test_eavesdropper_blind(self):
        """Test H_re = 0 and H_se = 0 gives zero."""
        assert eavesdropper_rate(0.0, 1.0, 1.0, 0.0, 1.0) == 0.0

    def test_eavesdropper_gamma_only(self):
        """Test that only the Phase-I term remains when H_re = 0."""
        assert eavesdropper_rate(0.0, 1.0, 1.0, 1.0, 1.0) == pytest.approx(0.5, abs=1e-10)

    def test_eavesdropper_matches_destination_by_symmetry(self):
        """Test the scalar eavesdropper oracle with H_se = 0."""
        assert eavesdropper_rate(1.0, 1.0, 1.0, 0.0, 1.0) == pytest.approx(HALF_LOG2_1_5, abs=1e-10)

    def test_relay_covariance_sized_to_relays(self, rng):
        """Test a separate Q_r for the relay antennas."""
        h_rd = complex_gaussian((1, 3), rng)
        p_d = zf_precoder(h_rd).p
        h_sr = complex_gaussian((1, 3), rng)
        q_s = signal_covariance(3, 1.0)
        q_r = signal_covariance(3, 1.0)
        assert destination_rate(h_rd, p_d, h_sr, q_s, q_r) == pytest.approx(destination_rate(h_rd, p_d, h_sr, q_s))

    def test_dimension_mismatch(self):
        """Test that a precoder with the wrong stream count is rejected."""
        with pytest.raises(DimensionMismatchException):
            destination_rate(np.ones((1, 2)), np.ones((2, 2)), np.ones((1, 3)), np.eye(3))

    @given(
        n=st.integers(min_value=1, max_value=3),
        relays=st.integers(min_value=1, max_value=3),
        seed=st.integers(min_value=0, max_value=2**32 - 1),
    )
    @settings(max_examples=60, deadline=None)
    def test_rates_nonnegative(self, n, relays, seed):
        """Test R_d >= 0, and R_e >= 0 when the eavesdropper misses Phase I."""
        rng = np.random.default_rng(seed)
        n_t = 3 * n
        h_rd = complex_gaussian((n, relays * n), rng)
        p_d = complex_gaussian((relays * n, n), rng)
        h_sr = complex_gaussian((n, n_t), rng)
        q_s = signal_covariance(n_t, 1.0)
        q_r = signal_covariance(relays * n, 1.0)
        assert destination_rate(h_rd, p_d, h_sr, q_s, q_r) >= 0.0
        h_re = complex_gaussian((n, relays * n), rng)
        assert eavesdropper_rate(h_re, p_d, h_sr, np.zeros((n, n_t)), q_s, q_r) >= 0.0


@pytest.mark.unit
class TestSecrecyRate:
    """Unit tests for secrecy_rate and its worst-case and direct variants."""

    def test_identical_links_give_exact_zero(self, rng):
        """Test H_rd = H_re with H_se = 0 over 1000 random draws."""
        q = signal_covariance(3, 1.0)
        h_se = np.zeros((1, 3))
        for _ in range(1000):
            h = complex_gaussian((1, 3), rng)
            p_d = zf_precoder(h).p
            h_sr = complex_gaussian((1, 3), rng)
            sample = secrecy_rate(h, h, h_se, p_d, h_sr, q)
            assert abs(sample.r_secrecy) <= 1e-12

    def test_no_leakage(self, rng):
        """Test that a blind eavesdropper leaves R = R_d."""
        h_rd = complex_gaussian((1, 3), rng)
        p_d = zf_precoder(h_rd).p
        h_sr = complex_gaussian((1, 3), rng)
        q = signal_covariance(3, 1.0)
        sample = secrecy_rate(h_rd, np.zeros((1, 3)), np.zeros((1, 3)), p_d, h_sr, q)
        assert sample.r_secrecy == sample.r_d
        assert sample.r_d >= 0.0

    def test_scalar_oracle(self):
        """Test the scalar secrecy rate with a blind eavesdropper."""
        sample = secrecy_rate(1.0, 0.0, 0.0, 1.0, 1.0, 1.0)
        assert sample.r_secrecy == pytest.approx(HALF_LOG2_1_5, abs=1e-10)

    def test_swap_negates(self, rng):
        """Test that exchanging H_rd and H_re with H_se = 0 negates R."""
        q = signal_covariance(3, 1.0)
        h_se = np.zeros((1, 3))
        h_rd, h_re, h_sr = (complex_gaussian((1, 3), rng) for _ in range(3))
        p_d = zf_precoder(h_rd).p
        forward = secrecy_rate(h_rd, h_re, h_se, p_d, h_sr, q)
        swapped = secrecy_rate(h_re, h_rd, h_se, p_d, h_sr, q)
        assert swapped.r_secrecy == pytest.approx(-forward.r_secrecy, abs=1e-12)

    def test_worst_case_uses_strongest_eavesdropper(self):
        """Test that the largest eavesdropper rate is subtracted."""
        sample = worst_case_secrecy_rate(1.0, [(0.0, 0.0), (1.0, 0.0)], 1.0, 1.0, 1.0)
        assert sample.r_e == pytest.approx(HALF_LOG2_1_5, abs=1e-10)
        assert sample.r_secrecy == pytest.approx(0.0, abs=1e-12)

    def test_direct_identical_links(self):
        """Test H_ba = H_ea gives zero."""
        assert worst_case_direct_rate([[0.7]], [[[0.7]]], [[1.0]]).r_secrecy == 0.0

    def test_direct_blind_eavesdropper(self):
        """Test log2(2) = 1 with no leakage."""
        sample = worst_case_direct_rate([[1.0]], [[[0.0]]], [[1.0]])
        assert sample.r_secrecy == pytest.approx(1.0, abs=1e-12)

    def test_direct_scalar_oracle(self):
        """Test 1 - log2(1.25) for h_b = 1, h_e = 0.5."""
        sample = worst_case_direct_rate([[1.0]], [[[0.5]]], [[1.0]])
        assert sample.r_secrecy == pytest.approx(1.0 - np.log2(1.25), abs=1e-10)

    def test_worst_case_direct(self):
        """Test that the direct worst case subtracts the strongest eavesdropper."""
        sample = worst_case_direct_rate([[1.0]], [[[0.1]], [[0.5]]], [[1.0]])
        assert sample.r_secrecy == pytest.approx(1.0 - np.log2(1.25), abs=1e-10)
        assert sample.r_e == pytest.approx(np.log2(1.25), abs=1e-10)

    def test_direct_secrecy_single_eavesdropper(self):
        """Test the single-eavesdropper direct rate on the scalar oracles."""
        assert direct_secrecy_rate([[0.7]], [[0.7]], [[1.0]]) == 0.0
        assert direct_secrecy_rate([[1.0]], [[0.0]], [[1.0]]) == pytest.approx(1.0, abs=1e-12)
        assert direct_secrecy_rate([[1.0]], [[0.5]], [[1.0]]) == pytest.approx(0.67807, abs=1e-5)

    def test_direct_secrecy_rejects_mismatch(self):
        """Test that a channel not conformable with Q_s is rejected."""
        with pytest.raises(DimensionMismatchException):
            direct_secrecy_rate(np.ones((1, 2)), np.ones((1, 2)), np.eye(3))


def _af_chain(snr_db: float) -> RateSample:
    """Scalar AF link: h_sr = 2 and h_rd p_d = 1 to the user, 0.5 on both eavesdropper links."""
    noise = np.full(1, np.sqrt(10.0 ** (-snr_db / 10.0)))
    p_d = np.array([[1.0]])
    return secrecy_rate(
        whiten([[1.0]], noise),
        whiten([[0.5]], noise),
        whiten([[0.5]], noise),
        p_d,
        [[2.0]],
        [[1.0]],
        forwarded_noise_covariance(p_d, noise),
    )


@pytest.mark.unit
class TestForwardedNoise:
    """Unit tests for whitening and the relay noise an AF relay forwards."""

    def test_whiten_divides_rows_by_noise_amplitude(self):
        """Test row r of H scaled by 1 / |n_r|."""
        h = whiten([[2.0, 2.0], [3.0, 3.0]], [2.0, 0.5j])
        np.testing.assert_allclose(h, [[1.0, 1.0], [6.0, 6.0]])

    def test_whiten_rejects_wrong_noise_length(self):
        """Test that every receive antenna needs a noise sample."""
        with pytest.raises(DimensionMismatchException):
            whiten(np.ones((2, 3)), [1.0])

    def test_forwarded_covariance(self):
        """Test P diag(|n|^2) P^H for a two-antenna relay set."""
        q_r = forwarded_noise_covariance([[1.0], [2.0]], [0.5])
        np.testing.assert_allclose(q_r, [[0.25, 0.5], [0.5, 1.0]])

    def test_forwarded_noise_lowers_destination_rate(self):
        """Test ½ log2(2) without relay noise and ½ log2(1.5) with unit relay noise."""
        clean = destination_rate(1.0, 1.0, 1.0, 1.0, np.zeros((1, 1)))
        noisy = destination_rate(1.0, 1.0, 1.0, 1.0, forwarded_noise_covariance([[1.0]], [1.0]))
        assert clean == pytest.approx(0.5, abs=1e-12)
        assert noisy == pytest.approx(HALF_LOG2_1_5, abs=1e-10)

    def test_af_secrecy_grows_with_snr(self):
        """Test a stronger legitimate chain gains secrecy as the noise falls."""
        samples = [_af_chain(snr_db) for snr_db in (0.0, 10.0, 20.0, 30.0)]
        secrecy = [s.r_secrecy for s in samples]
        assert all(s.r_d > s.r_e for s in samples)
        assert secrecy == sorted(secrecy)
        assert secrecy[0] < secrecy[-1]

    def test_af_secrecy_oracle_at_zero_db(self):
        """Test ½ log2(3) - ½ log2(2.05) for the scalar chain at sigma^2 = 1."""
        sample = _af_chain(0.0)
        assert sample.r_d == pytest.approx(HALF_LOG2_3, abs=1e-10)
        assert sample.r_e == pytest.approx(0.5 * np.log2(2.05), abs=1e-10)

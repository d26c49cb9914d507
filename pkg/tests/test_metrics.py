import math

import numpy as np
import pytest

from ampvoc.core import AudioBuffer, ConfigurationError
from ampvoc.metrics import (
    MCD_CONSTANT,
    PitchTrack,
    _dtw_path_cost,
    m_stft,
    mae,
    mcd_dtw,
    mel_cepstra,
    metric_report,
    periodicity_error_and_vuv_f1,
    pitch_track,
    track_periodicity_and_f1,
)

from oracles import tone

SR = 24000


def noise_audio(n=8192, seed=0, amp=0.5):
    return AudioBuffer(SR, amp * np.random.default_rng(seed).uniform(-1, 1, size=n))


def voiced_audio(n=8192, f0=220.0, amp=0.5):
    return AudioBuffer(SR, tone(f0, n, amplitude=amp))


class TestMStft:
    def test_identical_is_zero(self):
        x = noise_audio()
        assert m_stft(x, x) == 0.0

    def test_half_amplitude_closed_form(self):
        x = noise_audio(16384, seed=1, amp=0.9)
        y = AudioBuffer(SR, 0.5 * x.samples)
        # spectral convergence 0.5 and log-L1 ln 2, at every resolution
        assert m_stft(x, y) == pytest.approx(0.5 + math.log(2.0), abs=1e-4)

    def test_independent_noise_positive(self):
        assert m_stft(noise_audio(seed=2), noise_audio(seed=3)) > 0.0

    def test_zero_reference_rejected(self):
        silent = AudioBuffer(SR, np.zeros(8192))
        with pytest.raises(ConfigurationError):
            m_stft(silent, noise_audio())

    def test_near_symmetry(self):
        # the spectral-convergence term normalizes by the reference, so
        # symmetry is approximate; 1e-3 holds for small perturbations
        rng = np.random.default_rng(5)
        for seed in range(3):
            a = noise_audio(seed=seed + 10)
            eps = 0.02 * float(np.sqrt(np.mean(a.samples**2)))
            b = AudioBuffer(SR, a.samples + eps * rng.normal(size=a.samples.size).astype(np.float32))
            assert abs(m_stft(a, b) - m_stft(b, a)) <= 1e-3

    def test_trims_with_warning(self):
        a = noise_audio(8192, seed=6)
        b = AudioBuffer(SR, a.samples[:8000])
        with pytest.warns(UserWarning):
            m_stft(a, b)


class TestMcd:
    def test_identical_is_zero(self):
        x = voiced_audio()
        assert mcd_dtw(x, x) == 0.0

    def test_dtw_absorbs_duration(self):
        # one frame against the same frame repeated: zero-cost alignment
        cost = np.zeros((1, 7))
        total, length = _dtw_path_cost(cost)
        assert total == 0.0 and length == 7

    def test_dtw_diagonal_preferred(self):
        cost = np.array([[0.0, 5.0], [5.0, 0.0]])
        total, length = _dtw_path_cost(cost)
        assert total == 0.0 and length == 2

    def test_constant_cepstra_hand_formula(self):
        # constant per-frame cepstra: MCD = 6.14185 * ||delta c||_2
        cr = np.tile([1.0, 0.5, -0.25], (4, 1))
        cd = np.tile([0.0, 0.5, 0.25], (6, 1))
        diff = cr[:, None, :] - cd[None, :, :]
        cost = np.sqrt(np.sum(diff * diff, axis=2))
        total, length = _dtw_path_cost(cost)
        want = MCD_CONSTANT * math.sqrt(1.0 + 0.0 + 0.25)
        assert MCD_CONSTANT == pytest.approx(6.141851, abs=1e-6)
        assert total / length == pytest.approx(math.sqrt(1.25), abs=1e-9)
        assert MCD_CONSTANT * total / length == pytest.approx(want)

    def test_time_stretch_invariance(self):
        # frame-aligned tone: doubling duration leaves MCD near zero
        period_aligned = SR / 256.0 * 2  # 187.5 Hz, period = 128 samples
        a = AudioBuffer(SR, tone(period_aligned, 8192, amplitude=0.5))
        b = AudioBuffer(SR, tone(period_aligned, 16384, amplitude=0.5))
        assert mcd_dtw(a, b) <= 0.2

    def test_cepstra_shape(self):
        ceps = mel_cepstra(voiced_audio(8192))
        assert ceps.shape == (32, 13)


class TestPitch:
    def test_pure_tone_tracked(self):
        track = pitch_track(voiced_audio(8192, f0=220.0))
        assert track.voiced.all()
        interior = track.f0[2:-2]
        assert np.abs(interior - 220.0).max() <= 2.0

    def test_white_noise_mostly_unvoiced(self):
        track = pitch_track(noise_audio(8192, seed=11))
        assert np.mean(track.voiced) < 0.5

    def test_silence_unvoiced_zero_periodicity(self):
        track = pitch_track(AudioBuffer(SR, np.zeros(8192)))
        assert not track.voiced.any()
        assert not track.periodicity.any()
        assert not track.f0.any()

    def test_voiced_iff_f0_positive(self):
        for audio in (voiced_audio(8192), noise_audio(8192, seed=12)):
            track = pitch_track(audio)
            np.testing.assert_array_equal(track.voiced, track.f0 > 0)

    def test_too_short_rejected(self):
        with pytest.raises(ConfigurationError):
            pitch_track(AudioBuffer(SR, np.zeros(512)))


class TestPeriodicityF1:
    def test_identical_perfect(self):
        x = voiced_audio()
        rmse, f1 = periodicity_error_and_vuv_f1(x, x)
        assert rmse == 0.0 and f1 == 1.0

    def test_all_unvoiced_deg_zero_recall(self):
        ref = PitchTrack(
            f0=np.array([100.0, 100.0]), periodicity=np.array([0.9, 0.9]),
            voiced=np.array([True, True]),
        )
        deg = PitchTrack(
            f0=np.zeros(2), periodicity=np.zeros(2), voiced=np.array([False, False])
        )
        rmse, f1 = track_periodicity_and_f1(ref, deg)
        assert f1 == 0.0
        assert rmse == pytest.approx(0.9)

    def test_four_frames_one_flip(self):
        ref = PitchTrack(
            f0=np.array([100.0, 100.0, 0.0, 0.0]),
            periodicity=np.array([1.0, 1.0, 0.0, 0.0]),
            voiced=np.array([True, True, False, False]),
        )
        deg = PitchTrack(
            f0=np.array([100.0, 0.0, 0.0, 0.0]),
            periodicity=np.array([1.0, 0.0, 0.0, 0.0]),
            voiced=np.array([True, False, False, False]),
        )
        _, f1 = track_periodicity_and_f1(ref, deg)
        # TP=1, FP=0, FN=1: precision 1, recall 0.5
        assert f1 == pytest.approx(2 / 3)

    def test_both_all_unvoiced_vacuous_perfect(self):
        t = PitchTrack(f0=np.zeros(3), periodicity=np.zeros(3), voiced=np.zeros(3, bool))
        rmse, f1 = track_periodicity_and_f1(t, t)
        assert (rmse, f1) == (0.0, 1.0)


class TestMonotonicityAndReport:
    def test_noise_degrades_metrics_monotonically(self):
        ref = voiced_audio(8192, f0=220.0, amp=0.5)
        rng = np.random.default_rng(20)
        noise = rng.normal(size=8192).astype(np.float32)
        sig_rms = float(np.sqrt(np.mean(ref.samples**2)))
        ms, mc = [], []
        for snr_db in (40.0, 20.0, 10.0):
            scale = sig_rms / (10 ** (snr_db / 20)) / float(np.sqrt(np.mean(noise**2)))
            deg = AudioBuffer(SR, ref.samples + scale * noise)
            ms.append(m_stft(ref, deg))
            mc.append(mcd_dtw(ref, deg))
        assert ms[0] <= ms[1] <= ms[2]
        assert mc[0] <= mc[1] <= mc[2]

    def test_mae(self):
        a = AudioBuffer(SR, np.array([0.0, 1.0, -1.0, 0.5]))
        b = AudioBuffer(SR, np.array([0.5, 1.0, -0.5, 0.5]))
        assert mae(a, b) == pytest.approx(0.25)

    def test_report_identity(self):
        x = voiced_audio(8192)
        rep = metric_report(x, x)
        assert rep.m_stft == 0.0 and rep.mcd == 0.0
        assert rep.periodicity_rmse == 0.0 and rep.vuv_f1 == 1.0 and rep.mae == 0.0
        assert set(rep.to_dict()) == {"m_stft", "mcd", "periodicity_rmse", "vuv_f1", "mae"}

"""Objective evaluation suite: multi-resolution STFT distance, mel-cepstral
distortion over a DTW alignment, YIN-based periodicity error, voiced/unvoiced
F1, and plain sample MAE.

The pitch front end is a deterministic YIN tracker (cumulative
mean-normalized difference, 50-1000 Hz search band, voicing threshold
0.25) so the suite carries no learned-model dependency. Absolute
periodicity numbers are therefore not comparable to evaluations that use a
learned pitch extractor, but identities, orderings, and monotonicity are.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.fft import dct

from .core import AudioBuffer, ConfigurationError
from .mel import MelConfig, mel_spectrogram, stft_magnitude

M_STFT_RESOLUTIONS = ((1024, 120, 600), (2048, 240, 1200), (512, 50, 240))
MCD_CONSTANT = 10.0 * np.sqrt(2.0) / np.log(10.0)  # natural-log cepstra to dB
MCD_COEFFS = slice(1, 14)  # c1..c13, c0 excluded

YIN_FRAME = 1024
YIN_HOP = 256
YIN_WINDOW = 512
YIN_FMIN = 50.0
YIN_FMAX = 1000.0
YIN_THRESHOLD = 0.25


@dataclass(frozen=True)
class PitchTrack:
    f0: np.ndarray          # Hz, 0 where unvoiced
    periodicity: np.ndarray  # in [0, 1]
    voiced: np.ndarray       # bool


@dataclass(frozen=True)
class MetricReport:
    m_stft: float
    mcd: float
    periodicity_rmse: float
    vuv_f1: float
    mae: float

    def to_dict(self) -> dict:
        return {
            "m_stft": self.m_stft,
            "mcd": self.mcd,
            "periodicity_rmse": self.periodicity_rmse,
            "vuv_f1": self.vuv_f1,
            "mae": self.mae,
        }


def _trim_pair(ref: AudioBuffer, deg: AudioBuffer):
    if ref.sample_rate != deg.sample_rate:
        raise ConfigurationError("sample rates differ")
    n = min(ref.samples.size, deg.samples.size)
    if n == 0:
        raise ConfigurationError("empty audio")
    if ref.samples.size != deg.samples.size:
        warnings.warn(
            f"length mismatch ({ref.samples.size} vs {deg.samples.size}); trimming to {n}"
        )
    return ref.samples[:n].astype(np.float64), deg.samples[:n].astype(np.float64)


def m_stft(ref: AudioBuffer, deg: AudioBuffer) -> float:
    """Mean over three resolutions of spectral convergence plus log-magnitude L1."""
    r, d = _trim_pair(ref, deg)
    if not np.any(r):
        raise ConfigurationError("reference signal has zero energy")
    total = 0.0
    for n_fft, hop, win in M_STFT_RESOLUTIONS:
        if r.size < n_fft:
            raise ConfigurationError(f"audio shorter than FFT size {n_fft}")
        sr = stft_magnitude(r, n_fft, hop, win, pad=False).astype(np.float64)
        sd = stft_magnitude(d, n_fft, hop, win, pad=False).astype(np.float64)
        sc = np.linalg.norm(sr - sd) / np.linalg.norm(sr)
        log_l1 = np.mean(
            np.abs(np.log(np.maximum(sr, 1e-7)) - np.log(np.maximum(sd, 1e-7)))
        )
        total += sc + log_l1
    return float(total / len(M_STFT_RESOLUTIONS))


def mel_cepstra(audio: AudioBuffer, cfg: MelConfig = MelConfig()) -> np.ndarray:
    """Per-frame cepstra c1..c13: orthonormal DCT-II of the log-mel bands."""
    logmel = mel_spectrogram(audio, cfg).astype(np.float64)
    ceps = dct(logmel, type=2, norm="ortho", axis=0)
    return ceps[MCD_COEFFS].T  # (frames, 13)


def _dtw_path_cost(cost: np.ndarray):
    """Monotone alignment minimizing cumulative cost; returns (total, path length)."""
    n, m = cost.shape
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    steps = np.zeros((n, m), dtype=np.uint8)  # 0: diag, 1: up (i-1), 2: left (j-1)
    for i in range(1, n + 1):
        diag = acc[i - 1, :-1]
        up = acc[i - 1, 1:]
        row = acc[i]
        for j in range(1, m + 1):
            best = diag[j - 1]
            step = 0
            if up[j - 1] < best:
                best = up[j - 1]
                step = 1
            if row[j - 1] < best:
                best = row[j - 1]
                step = 2
            row[j] = cost[i - 1, j - 1] + best
            steps[i - 1, j - 1] = step
    i, j = n - 1, m - 1
    length = 1
    while i or j:
        s = steps[i, j]
        if s == 0:
            i, j = i - 1, j - 1
        elif s == 1:
            i -= 1
        else:
            j -= 1
        length += 1
    return float(acc[n, m]), length


def mcd_dtw(ref: AudioBuffer, deg: AudioBuffer, cfg: MelConfig = MelConfig()) -> float:
    """Mel-cepstral distortion along the DTW path, in dB."""
    cr = mel_cepstra(ref, cfg)
    cd = mel_cepstra(deg, cfg)
    if cr.shape[0] == 0 or cd.shape[0] == 0:
        raise ConfigurationError("empty cepstra")
    diff = cr[:, None, :] - cd[None, :, :]
    cost = np.sqrt(np.sum(diff * diff, axis=2))
    total, length = _dtw_path_cost(cost)
    return float(MCD_CONSTANT * total / length)


def _yin_frame(frame: np.ndarray, tau_min: int, tau_max: int):
    """Returns (tau estimate or None, cmnd minimum over the search band)."""
    w = YIN_WINDOW
    a = frame[:w]
    full = frame[: w + tau_max]
    cross = np.correlate(full, a, mode="valid")  # cross[tau] = sum a[t] x[t+tau]
    e0 = float(np.dot(a, a))
    sq = np.concatenate(([0.0], np.cumsum(full * full)))
    e_tau = sq[np.arange(tau_max + 1) + w] - sq[np.arange(tau_max + 1)]
    d = e0 + e_tau - 2.0 * cross
    d = np.maximum(d, 0.0)
    cum = np.cumsum(d[1:])
    with np.errstate(divide="ignore", invalid="ignore"):
        cmnd = np.ones(tau_max + 1)
        cmnd[1:] = np.where(cum > 0, d[1:] * np.arange(1, tau_max + 1) / cum, 1.0)
    band = cmnd[tau_min : tau_max + 1]
    cm_min = float(band.min())
    if cm_min >= YIN_THRESHOLD:
        return None, cm_min
    # first dip under the threshold, refined to its local minimum
    tau = tau_min + int(np.argmax(band < YIN_THRESHOLD))
    while tau + 1 <= tau_max and cmnd[tau + 1] < cmnd[tau]:
        tau += 1
    if 0 < tau < tau_max:  # parabolic interpolation around the dip
        y0, y1, y2 = cmnd[tau - 1], cmnd[tau], cmnd[tau + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom > 0:
            tau = tau + 0.5 * (y0 - y2) / denom
    return float(tau), cm_min


def pitch_track(audio: AudioBuffer) -> PitchTrack:
    """YIN pitch, periodicity (1 - CMND minimum), and voicing flags."""
    x = audio.samples.astype(np.float64)
    sr = audio.sample_rate
    if x.size < YIN_FRAME:
        raise ConfigurationError(
            f"need at least {YIN_FRAME} samples for one analysis frame"
        )
    tau_min = max(2, int(sr / YIN_FMAX))
    tau_max = min(int(np.ceil(sr / YIN_FMIN)), YIN_FRAME - YIN_WINDOW)
    n_frames = 1 + (x.size - YIN_FRAME) // YIN_HOP
    f0 = np.zeros(n_frames)
    periodicity = np.zeros(n_frames)
    voiced = np.zeros(n_frames, dtype=bool)
    for i in range(n_frames):
        frame = x[i * YIN_HOP : i * YIN_HOP + YIN_FRAME]
        tau, cm_min = _yin_frame(frame, tau_min, tau_max)
        periodicity[i] = float(np.clip(1.0 - cm_min, 0.0, 1.0))
        if tau is not None:
            voiced[i] = True
            f0[i] = sr / tau
    return PitchTrack(f0=f0, periodicity=periodicity, voiced=voiced)


def track_periodicity_and_f1(ref: PitchTrack, deg: PitchTrack):
    """RMSE of periodicity over frames voiced in either track, and the
    voiced/unvoiced F1 of ``deg`` against ``ref``."""
    if ref.voiced.size != deg.voiced.size:
        raise ConfigurationError("tracks must share framing")
    if ref.voiced.size == 0:
        raise ConfigurationError("empty pitch tracks")
    either = ref.voiced | deg.voiced
    if np.any(either):
        diff = ref.periodicity[either] - deg.periodicity[either]
        rmse = float(np.sqrt(np.mean(diff * diff)))
    else:
        rmse = 0.0
    tp = int(np.sum(ref.voiced & deg.voiced))
    fp = int(np.sum(~ref.voiced & deg.voiced))
    fn = int(np.sum(ref.voiced & ~deg.voiced))
    if tp + fp + fn == 0:
        f1 = 1.0  # both tracks agree there is nothing voiced
    elif tp == 0:
        f1 = 0.0
    else:
        precision = tp / (tp + fp)
        recall = tp / (tp + fn)
        f1 = 2.0 * precision * recall / (precision + recall)
    return rmse, float(f1)


def periodicity_error_and_vuv_f1(ref: AudioBuffer, deg: AudioBuffer):
    r, d = _trim_pair(ref, deg)
    sr = ref.sample_rate
    return track_periodicity_and_f1(
        pitch_track(AudioBuffer(sr, r)), pitch_track(AudioBuffer(sr, d))
    )


def mae(ref: AudioBuffer, deg: AudioBuffer) -> float:
    r, d = _trim_pair(ref, deg)
    return float(np.mean(np.abs(r - d)))


def metric_report(ref: AudioBuffer, deg: AudioBuffer) -> MetricReport:
    rmse, f1 = periodicity_error_and_vuv_f1(ref, deg)
    return MetricReport(
        m_stft=m_stft(ref, deg),
        mcd=mcd_dtw(ref, deg),
        periodicity_rmse=rmse,
        vuv_f1=f1,
        mae=mae(ref, deg),
    )

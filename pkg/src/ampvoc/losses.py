"""Forward evaluation of the training objective terms.

Least-squares adversarial losses, feature-matching L1, mel-spectrogram L1,
and the weighted composites. Reduction conventions are pinned by tests:
adversarial terms average over score-map elements, feature matching
averages per layer and sums over layers, the mel term averages over all
mel cells. Composites use K = 8 sub-discriminators (5 periods + 3
resolutions) with weights 2 (feature matching) and 45 (mel).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import AudioBuffer, ConfigurationError
from .mel import MelConfig, mel_spectrogram


@dataclass(frozen=True)
class LossWeights:
    lambda_fm: float = 2.0
    lambda_mel: float = 45.0

    def __post_init__(self):
        if self.lambda_fm < 0 or self.lambda_mel < 0:
            raise ConfigurationError("loss weights must be non-negative")


@dataclass(frozen=True)
class LossReport:
    """Scalar loss terms; the composites equal the weighted sums of parts."""

    adv_g_per_sub: tuple
    adv_d_per_sub: tuple
    fm_per_sub: tuple
    mel: float
    weights: LossWeights
    total_g: float
    total_d: float
    grad_norm: float | None = None  # reserved for a future training loop

    def to_json(self) -> str:
        return json.dumps(
            {
                "adv_g": sum(self.adv_g_per_sub),
                "adv_d": sum(self.adv_d_per_sub),
                "fm": sum(self.fm_per_sub),
                "mel": self.mel,
                "L_G": self.total_g,
                "L_D": self.total_d,
                "per_sub": {
                    "adv_g": list(self.adv_g_per_sub),
                    "adv_d": list(self.adv_d_per_sub),
                    "fm": list(self.fm_per_sub),
                },
                "grad_norm": self.grad_norm,
            }
        )


def _mean_sq(x: np.ndarray) -> float:
    if x.size == 0:
        raise ConfigurationError("empty score map")
    return float(np.mean(np.square(x, dtype=np.float64)))


def adv_loss_g(fake_score: np.ndarray) -> float:
    """mean((D(G(s)) - 1)^2) over all score-map elements."""
    fake_score = np.asarray(fake_score)
    return _mean_sq(fake_score - 1.0)


def adv_loss_d(real_score: np.ndarray, fake_score: np.ndarray) -> float:
    """mean((D(x) - 1)^2) + mean(D(G(s))^2)."""
    return _mean_sq(np.asarray(real_score) - 1.0) + _mean_sq(np.asarray(fake_score))


def feature_matching_loss(real_features, fake_features) -> float:
    """Sum over layers of the per-layer mean absolute difference."""
    if len(real_features) != len(fake_features):
        raise ConfigurationError(
            f"feature lists differ in depth: {len(real_features)} vs {len(fake_features)}"
        )
    total = 0.0
    for i, (r, f) in enumerate(zip(real_features, fake_features)):
        r, f = np.asarray(r), np.asarray(f)
        if r.shape != f.shape:
            raise ConfigurationError(
                f"feature shape mismatch at layer {i}: {r.shape} vs {f.shape}"
            )
        total += float(np.mean(np.abs(r.astype(np.float64) - f.astype(np.float64))))
    return total


def mel_loss(x: AudioBuffer, x_hat: AudioBuffer, cfg: MelConfig = MelConfig()) -> float:
    """Mean absolute difference between the log-mel spectrograms."""
    if x.samples.size != x_hat.samples.size:
        raise ConfigurationError(
            f"length mismatch: {x.samples.size} vs {x_hat.samples.size} samples"
        )
    if x.sample_rate != x_hat.sample_rate:
        raise ConfigurationError("sample rates differ")
    a = mel_spectrogram(x, cfg).astype(np.float64)
    b = mel_spectrogram(x_hat, cfg).astype(np.float64)
    return float(np.mean(np.abs(a - b)))


def composite_losses(
    gen_out: AudioBuffer,
    real_audio: AudioBuffer,
    disc_real,
    disc_fake,
    mel_cfg: MelConfig = MelConfig(),
    weights: LossWeights = LossWeights(),
    expected_subs: int | None = 8,
) -> LossReport:
    """Assemble the full report from discriminator outputs on real and
    generated audio. ``disc_real``/``disc_fake`` are the concatenated
    MPD + MRD output lists, pairwise aligned.
    """
    if len(disc_real) != len(disc_fake):
        raise ConfigurationError("real/fake discriminator output counts differ")
    if expected_subs is not None and len(disc_real) != expected_subs:
        raise ConfigurationError(
            f"expected {expected_subs} sub-discriminators, got {len(disc_real)}"
        )
    adv_g, adv_d, fm = [], [], []
    for real_out, fake_out in zip(disc_real, disc_fake):
        adv_g.append(adv_loss_g(fake_out.score))
        adv_d.append(adv_loss_d(real_out.score, fake_out.score))
        fm.append(feature_matching_loss(real_out.features, fake_out.features))
    mel = mel_loss(real_audio, gen_out, mel_cfg)
    total_g = sum(g + weights.lambda_fm * f for g, f in zip(adv_g, fm))
    total_g += weights.lambda_mel * mel
    total_d = sum(adv_d)
    return LossReport(
        adv_g_per_sub=tuple(adv_g),
        adv_d_per_sub=tuple(adv_d),
        fm_per_sub=tuple(fm),
        mel=mel,
        weights=weights,
        total_g=float(total_g),
        total_d=float(total_d),
    )

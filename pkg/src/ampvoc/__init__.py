"""Neural-vocoder inference engine with anti-aliased periodic activations,
plus the loss and objective-metric toolkit around it."""

from .core import (
    AudioBuffer,
    ConfigurationError,
    Conv1dLayer,
    FormatError,
    TransposedConv1dLayer,
    ValidationError,
    conv1d,
    feature_map,
    leaky_relu,
    tanh_clamp,
    transposed_conv1d,
)
from .snake import SnakeParams, snake, snake_dalpha, snake_dx
from .antialias import (
    LowPassFilter,
    design_kaiser_lowpass,
    downsample2x,
    filtered_snake,
    upsample2x,
)
from .mel import MelConfig, mel_filterbank, mel_spectrogram, read_mel, stft_magnitude, write_mel
from .generator import (
    Generator,
    GeneratorConfig,
    build_generator,
    count_parameters,
    generate,
    variant_config,
)
from .discriminators import (
    DiscriminatorOutput,
    build_mpd,
    build_mrd,
    mpd_forward,
    mpd_reshape,
    mrd_forward,
)
from .losses import LossReport, LossWeights, adv_loss_d, adv_loss_g, composite_losses, feature_matching_loss, mel_loss
from .metrics import MetricReport, PitchTrack, m_stft, mcd_dtw, metric_report, periodicity_error_and_vuv_f1, pitch_track
from . import checkpoint

__version__ = "0.1.0"

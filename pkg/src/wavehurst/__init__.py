"""Wavelet-based Hurst exponent estimation for signals and images."""
from .dwt import Decomposition1D, Decomposition2D, dwt, dwt1d, dwt2d, idwt, idwt1d, idwt2d
from .errors import *  # noqa: F401,F403
from .estimators import (
    HurstEstimate,
    estimate,
    estimate_av,
    estimate_ols,
    estimate_tt,
    pairwise_weight,
    slope_to_hurst,
)
from .filters import WaveletFilter, make_filter
from .spectrum import (
    WaveletSpectrum,
    apply_bias_correction,
    av_variance,
    av_weight,
    default_level_range,
    level_energies,
)
from .synthesis import (
    ContaminationSpec,
    SynthesisSpec,
    contaminate,
    fbm_cov,
    synth_fbf_2d,
    synth_fbm_1d,
)

__version__ = "0.1.0"

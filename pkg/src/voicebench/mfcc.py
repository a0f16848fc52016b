"""MFCC extraction: framed power spectra, mel filtering, orthonormal DCT.

The chain is power STFT (periodic Hann, no center padding) -> triangular
mel filterbank on the linear power spectrum -> log with an absolute floor
-> DCT-II with orthonormal scaling, keeping the first n_mfcc coefficients.
A clip is summarized by the mean coefficient vector over frames.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import AudioClip
from .errors import ClipTooShort


@dataclass(frozen=True)
class MfccParams:
    """Extraction settings; defaults describe 1-second clips at 16 kHz."""

    sample_rate: int = 16000
    target_duration: float = 1.0
    n_mfcc: int = 13
    n_mels: int = 40
    n_fft: int = 400
    hop: int = 160
    fmin: float = 0.0
    fmax: float | None = None  # None means Nyquist
    log_floor: float = 1e-10

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if self.target_duration <= 0:
            raise ValueError("target_duration must be positive")
        if not (0 < self.n_mfcc <= self.n_mels):
            raise ValueError("need 0 < n_mfcc <= n_mels")
        if self.n_fft <= 0 or self.hop <= 0 or self.hop > self.n_fft:
            raise ValueError("need 0 < hop <= n_fft")
        if self.log_floor <= 0:
            raise ValueError("log_floor must be positive")
        fmax = self.resolved_fmax
        if not (0 <= self.fmin < fmax <= self.sample_rate / 2):
            raise ValueError("need 0 <= fmin < fmax <= sample_rate/2")

    @property
    def resolved_fmax(self) -> float:
        return self.sample_rate / 2 if self.fmax is None else self.fmax


def hz_to_mel(hz):
    """HTK mel scale: m = 2595 log10(1 + f/700)."""
    return 2595.0 * np.log10(1.0 + np.asarray(hz, dtype=np.float64) / 700.0)


def mel_to_hz(mel):
    return 700.0 * (np.power(10.0, np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def frame_count(n_samples: int, n_fft: int, hop: int) -> int:
    """Frames that fit without padding: 1 + floor((n - n_fft)/hop)."""
    if n_samples < n_fft:
        return 0
    return 1 + (n_samples - n_fft) // hop


def periodic_hann(n: int) -> np.ndarray:
    # periodic variant (denominator n, not n-1), the DFT-analysis convention
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def stft_power(clip: AudioClip, params: MfccParams) -> np.ndarray:
    """Power spectrogram, shape (n_frames, n_fft//2 + 1).

    Frames are taken from the signal as-is (no center padding); a clip
    shorter than one window raises ClipTooShort.
    """
    x = clip.samples
    n_fft, hop = params.n_fft, params.hop
    if x.size < n_fft:
        raise ClipTooShort(
            f"clip has {x.size} samples; analysis window needs {n_fft}"
        )
    frames = np.lib.stride_tricks.sliding_window_view(x, n_fft)[::hop]
    spectrum = np.fft.rfft(frames * periodic_hann(n_fft), n=n_fft, axis=1)
    return (spectrum.real ** 2 + spectrum.imag ** 2)


def mel_edge_frequencies(params: MfccParams) -> np.ndarray:
    """n_mels + 2 filter edge frequencies in Hz, equally spaced in mel."""
    mel_lo = hz_to_mel(params.fmin)
    mel_hi = hz_to_mel(params.resolved_fmax)
    return mel_to_hz(np.linspace(mel_lo, mel_hi, params.n_mels + 2))


def mel_filterbank(params: MfccParams) -> np.ndarray:
    """Triangular mel filters on FFT bin frequencies, shape (n_mels, n_bins).

    Triangles are unit-peak (no area normalization) and evaluated at the
    bin centers k * sample_rate / n_fft.
    """
    edges = mel_edge_frequencies(params)
    n_bins = params.n_fft // 2 + 1
    bin_freqs = np.arange(n_bins) * (params.sample_rate / params.n_fft)

    lower = edges[:-2][:, None]
    center = edges[1:-1][:, None]
    upper = edges[2:][:, None]
    up_slope = (bin_freqs[None, :] - lower) / (center - lower)
    down_slope = (upper - bin_freqs[None, :]) / (upper - center)
    return np.maximum(0.0, np.minimum(up_slope, down_slope))


def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II analysis matrix (rows are basis vectors)."""
    k = np.arange(n)
    basis = np.cos(np.pi * np.arange(n)[:, None] * (2 * k[None, :] + 1) / (2 * n))
    basis *= np.sqrt(2.0 / n)
    basis[0, :] = np.sqrt(1.0 / n)
    return basis


def dct_ortho(x: np.ndarray) -> np.ndarray:
    """Full orthonormal DCT-II along the last axis."""
    return np.asarray(x, dtype=np.float64) @ dct_matrix(x.shape[-1]).T


def idct_ortho(coeffs: np.ndarray) -> np.ndarray:
    return np.asarray(coeffs, dtype=np.float64) @ dct_matrix(coeffs.shape[-1])


def _dct_truncated(x: np.ndarray, n_out: int) -> np.ndarray:
    """First n_out orthonormal DCT-II coefficients along the last axis.

    Coefficients past the first are evaluated on the mean-removed input.
    That is algebraically the same (those basis vectors are orthogonal to
    the constant) but makes a constant input come out exactly zero instead
    of carrying rounding residue.
    """
    n = x.shape[-1]
    full = dct_matrix(n)
    c0 = x.sum(axis=-1) * np.sqrt(1.0 / n)
    centered = x - x.mean(axis=-1, keepdims=True)
    rest = centered @ full[1:n_out].T
    return np.concatenate([c0[..., None], rest], axis=-1)


def mfcc(clip: AudioClip, params: MfccParams) -> np.ndarray:
    """MFCC frames, shape (n_frames, n_mfcc).

    The clip is expected to already be at params.sample_rate; rate
    normalization lives in the audio module.
    """
    power = stft_power(clip, params)
    mel_energy = power @ mel_filterbank(params).T
    log_mel = np.log(np.maximum(mel_energy, params.log_floor))
    return _dct_truncated(log_mel, params.n_mfcc)


def temporal_mean(frames: np.ndarray) -> np.ndarray:
    """Collapse (n_frames, n_mfcc) to one n_mfcc vector by mean over time."""
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2 or frames.shape[0] == 0:
        raise ValueError("need a non-empty 2-D frame matrix")
    return frames.mean(axis=0)

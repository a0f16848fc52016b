"""Regenerate tests/data/mfcc_golden.json.

The expected values come from an independent reference chain (scipy.signal
framing/FFT, a literal transcription of the triangular mel construction,
scipy.fft's orthonormal DCT-II) rather than from the package code, so the
golden file catches regressions in either path. Run from the repo root:

    python3 tools/gen_mfcc_golden.py
"""
import json
import sys
from pathlib import Path

import numpy as np
import scipy.fft
import scipy.signal

SAMPLE_RATE = 16000
N_FFT = 400
HOP = 160
N_MELS = 40
N_MFCC = 13
LOG_FLOOR = 1e-10

RECIPE = {
    "seed": 20240501,
    "sample_rate": SAMPLE_RATE,
    "n_samples": SAMPLE_RATE,
    "tone_a_hz": 220.0,
    "tone_a_amp": 0.3,
    "tone_b_hz": 1757.3,
    "tone_b_amp": 0.2,
    "noise_amp": 0.05,
}


def make_clip() -> np.ndarray:
    t = np.arange(RECIPE["n_samples"]) / RECIPE["sample_rate"]
    rng = np.random.default_rng(RECIPE["seed"])
    return (
        RECIPE["tone_a_amp"] * np.sin(2 * np.pi * RECIPE["tone_a_hz"] * t)
        + RECIPE["tone_b_amp"] * np.sin(2 * np.pi * RECIPE["tone_b_hz"] * t)
        + RECIPE["noise_amp"] * rng.standard_normal(RECIPE["n_samples"])
    )


def reference_mfcc(x: np.ndarray) -> np.ndarray:
    window = scipy.signal.get_window("hann", N_FFT, fftbins=True)
    _, _, zxx = scipy.signal.stft(
        x, fs=SAMPLE_RATE, window=window, nperseg=N_FFT, noverlap=N_FFT - HOP,
        boundary=None, padded=False, detrend=False, return_onesided=True,
    )
    # legacy stft scales by 1/sum(window); undo it to get the raw DFT
    power = np.abs(zxx * window.sum()) ** 2  # (n_bins, n_frames)
    power = power.T

    def mel(f):
        return 2595.0 * np.log10(1.0 + f / 700.0)

    def inv_mel(m):
        return 700.0 * (10.0 ** (m / 2595.0) - 1.0)

    edges = inv_mel(np.linspace(mel(0.0), mel(SAMPLE_RATE / 2), N_MELS + 2))
    n_bins = N_FFT // 2 + 1
    fft_freqs = np.arange(n_bins) * SAMPLE_RATE / N_FFT
    fb = np.zeros((N_MELS, n_bins))
    for m in range(N_MELS):
        left, center, right = edges[m], edges[m + 1], edges[m + 2]
        for k in range(n_bins):
            f = fft_freqs[k]
            if left < f <= center:
                fb[m, k] = (f - left) / (center - left)
            elif center < f < right:
                fb[m, k] = (right - f) / (right - center)

    log_mel = np.log(np.maximum(power @ fb.T, LOG_FLOOR))
    coeffs = scipy.fft.dct(log_mel, type=2, norm="ortho", axis=1)
    return coeffs[:, :N_MFCC]


def main():
    x = make_clip()
    coeffs = reference_mfcc(x)
    payload = {
        "format_version": 1,
        "recipe": RECIPE,
        "n_frames": coeffs.shape[0],
        "n_mfcc": coeffs.shape[1],
        "mfcc": [[repr(v) for v in row] for row in coeffs.tolist()],
        "temporal_mean": [repr(v) for v in coeffs.mean(axis=0).tolist()],
    }
    out = Path(__file__).resolve().parent.parent / "tests" / "data" / "mfcc_golden.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(payload, indent=1) + "\n")
    print(f"wrote {out} with shape {coeffs.shape}")


if __name__ == "__main__":
    sys.exit(main())

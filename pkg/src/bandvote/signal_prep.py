"""Turn raw multichannel recordings into a blocked power-spectral-density matrix.

The filter is a zero-phase FFT-domain band mask with short cosine
transitions, so it is exactly linear and shape-preserving. The PSD is a
full-length Hann periodogram aggregated onto a uniform frequency grid:
when the native FFT resolution is finer than the output grid, native bins
are averaged per output bin; otherwise values are linearly interpolated.
Bin averaging keeps adjacent output columns statistically independent,
which the downstream covariance features rely on.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.signal

from .errors import (
    BlockingError,
    InsufficientDataError,
    ParameterError,
    ShapeError,
)

BINARY_MAGIC = b"MCRD"
BINARY_VERSION = 1
_HEADER = struct.Struct("<4sIIId8x")  # magic, version, channels, samples, rate; 32 bytes


@dataclass(frozen=True)
class Recording:
    """Multichannel time-domain signal, one row per channel."""

    data: np.ndarray
    sample_rate: float
    channel_names: tuple[str, ...] | None = None
    class_label: str | None = None

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=float)
        if data.ndim != 2 or data.shape[0] < 1:
            raise ShapeError(f"recording data must be 2-D (channels x samples), got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("recording contains non-finite samples")
        if self.sample_rate <= 0:
            raise ParameterError("sample_rate must be positive")
        if self.channel_names is not None and len(self.channel_names) != data.shape[0]:
            raise ShapeError("channel_names length does not match channel count")
        object.__setattr__(self, "data", data)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def samples_per_channel(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class SpectrumMatrix:
    """Per-channel PSD on a uniform grid spanning [freq_start, freq_end]."""

    data: np.ndarray
    freq_start: float
    freq_end: float

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=float)
        if data.ndim != 2:
            raise ShapeError(f"PSD data must be 2-D, got {data.shape}")
        if data.min() < 0:
            raise ValueError("PSD entries must be nonnegative")
        if not self.freq_start < self.freq_end:
            raise ParameterError("freq_start must be below freq_end")
        object.__setattr__(self, "data", data)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def bin_centers(self) -> np.ndarray:
        width = (self.freq_end - self.freq_start) / self.cols
        return self.freq_start + (np.arange(self.cols) + 0.5) * width


@dataclass(frozen=True)
class BlockingScheme:
    block_width: int
    num_blocks: int
    delta_f: float


@dataclass(frozen=True)
class SpectralBlock:
    index: int
    freq_range: tuple[float, float]
    data: np.ndarray = field(repr=False)


def bandpass_filter(rec: Recording, low: float, high: float) -> Recording:
    """Zero-phase band-pass of every channel onto [low, high] Hz."""
    nyquist = rec.sample_rate / 2.0
    if not (0.0 < low < high < nyquist):
        raise ParameterError(f"band edges must satisfy 0 < low < high < {nyquist}, got [{low}, {high}]")
    n = rec.samples_per_channel
    freqs = np.fft.rfftfreq(n, d=1.0 / rec.sample_rate)
    gain = _band_gain(freqs, low, high)
    spectrum = np.fft.rfft(rec.data, axis=1)
    filtered = np.fft.irfft(spectrum * gain, n=n, axis=1)
    return Recording(filtered, rec.sample_rate, rec.channel_names, rec.class_label)


def _band_gain(freqs: np.ndarray, low: float, high: float) -> np.ndarray:
    """Unit passband with raised-cosine transitions below ``low`` and above ``high``."""
    lo_width = 0.5 * low
    hi_width = 0.05 * high
    gain = np.zeros_like(freqs)
    passband = (freqs >= low) & (freqs <= high)
    gain[passband] = 1.0
    rising = (freqs >= low - lo_width) & (freqs < low)
    gain[rising] = 0.5 * (1 - np.cos(np.pi * (freqs[rising] - (low - lo_width)) / lo_width))
    falling = (freqs > high) & (freqs <= high + hi_width)
    gain[falling] = 0.5 * (1 + np.cos(np.pi * (freqs[falling] - high) / hi_width))
    return gain


def compute_psd(rec: Recording, freq_start: float, freq_end: float, out_cols: int) -> SpectrumMatrix:
    """Per-channel PSD on ``out_cols`` uniform bins spanning [freq_start, freq_end]."""
    if out_cols < 1:
        raise ParameterError("out_cols must be >= 1")
    if not (0.0 <= freq_start < freq_end <= rec.sample_rate / 2.0):
        raise ParameterError("frequency range must lie within [0, Nyquist]")
    min_samples = int(2 * rec.sample_rate)
    if rec.samples_per_channel < min_samples:
        raise InsufficientDataError(
            f"recording has {rec.samples_per_channel} samples; need >= {min_samples} (2 s)"
        )
    native_f, native_psd = scipy.signal.periodogram(
        rec.data, fs=rec.sample_rate, window="hann", detrend="constant", axis=1
    )
    span = freq_end - freq_start
    centers = freq_start + (np.arange(out_cols) + 0.5) * span / out_cols
    in_band = (native_f >= freq_start) & (native_f <= freq_end)
    band_f = native_f[in_band]
    band_psd = native_psd[:, in_band]
    if band_f.size >= out_cols and band_f.size > 0:
        out = _bin_average(band_f, band_psd, freq_start, span, out_cols, centers)
    else:
        out = np.vstack([np.interp(centers, native_f, row) for row in native_psd])
    return SpectrumMatrix(np.clip(out, 0.0, None), freq_start, freq_end)


def _bin_average(band_f, band_psd, freq_start, span, out_cols, centers):
    idx = np.minimum((np.floor((band_f - freq_start) / span * out_cols)).astype(int), out_cols - 1)
    sums = np.zeros((band_psd.shape[0], out_cols))
    counts = np.zeros(out_cols)
    np.add.at(counts, idx, 1.0)
    for ch in range(band_psd.shape[0]):
        np.add.at(sums[ch], idx, band_psd[ch])
    filled = counts > 0
    out = np.empty_like(sums)
    out[:, filled] = sums[:, filled] / counts[filled]
    if not filled.all():
        for ch in range(out.shape[0]):
            out[ch, ~filled] = np.interp(centers[~filled], centers[filled], out[ch, filled])
    return out


def split_blocks(spec: SpectrumMatrix, block_width: int) -> tuple[list[SpectralBlock], BlockingScheme]:
    """Split the PSD matrix into contiguous fixed-width blocks, low to high frequency."""
    if block_width < 1:
        raise ParameterError("block_width must be >= 1")
    if spec.cols % block_width != 0:
        raise BlockingError(f"{spec.cols} columns are not divisible by block width {block_width}")
    num_blocks = spec.cols // block_width
    delta_f = (spec.freq_end - spec.freq_start) / num_blocks
    blocks = []
    for b in range(num_blocks):
        lo = spec.freq_start + b * delta_f
        data = spec.data[:, b * block_width : (b + 1) * block_width]
        blocks.append(SpectralBlock(index=b, freq_range=(lo, lo + delta_f), data=data))
    return blocks, BlockingScheme(block_width=block_width, num_blocks=num_blocks, delta_f=delta_f)


# ---------------------------------------------------------------------------
# File formats


def write_recording_csv(rec: Recording, path) -> None:
    names = rec.channel_names or tuple(f"ch{i}" for i in range(rec.channels))
    with open(path, "w", newline="") as fh:
        fh.write(f"# sample_rate_hz={rec.sample_rate!r}\n")
        if rec.class_label is not None:
            fh.write(f"# class_label={rec.class_label}\n")
        writer = csv.writer(fh)
        writer.writerow(["channel"] + [str(i) for i in range(rec.samples_per_channel)])
        for name, row in zip(names, rec.data):
            writer.writerow([name] + [repr(float(v)) for v in row])


def read_recording_csv(path) -> Recording:
    sample_rate = None
    class_label = None
    names, rows = [], []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                if key.strip() == "sample_rate_hz":
                    sample_rate = float(val)
                elif key.strip() == "class_label":
                    class_label = val
                continue
            reader = csv.reader([line])
            row = next(reader)
            if row and row[0] == "channel":
                continue
            if row:
                names.append(row[0])
                rows.append([float(v) for v in row[1:]])
    if sample_rate is None:
        raise ValueError(f"{path}: missing '# sample_rate_hz=' header")
    return Recording(np.array(rows), sample_rate, tuple(names), class_label)


def write_recording_binary(rec: Recording, path) -> None:
    """Little-endian float64 dump behind a fixed 32-byte header; bit-exact round trip."""
    header = _HEADER.pack(
        BINARY_MAGIC, BINARY_VERSION, rec.channels, rec.samples_per_channel, float(rec.sample_rate)
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(rec.data.astype("<f8", copy=False).tobytes())


def read_recording_binary(path, class_label: str | None = None) -> Recording:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        magic, version, channels, samples, rate = _HEADER.unpack(header)
        if magic != BINARY_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if version != BINARY_VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        data = np.frombuffer(fh.read(channels * samples * 8), dtype="<f8").reshape(channels, samples)
    return Recording(data.copy(), rate, class_label=class_label)


def write_spectrum_csv(spec: SpectrumMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["freq_hz"] + [repr(float(f)) for f in spec.bin_centers()])
        for i, row in enumerate(spec.data):
            writer.writerow([f"ch{i}"] + [repr(float(v)) for v in row])

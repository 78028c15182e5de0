"""WAV ingestion, preprocessing, and annotation handling.

Preprocessing follows the recording chain used for hydrophone data:
anti-aliased resampling to a common analysis rate, a zero-phase
high-pass that removes low-frequency mooring noise, and normalization
to unit average power.  Annotations are (start, end) second intervals;
overlapping intervals are merged, so an annotation set and a per-sample
presence mask are interchangeable.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
import scipy.io.wavfile
import scipy.signal

from .errors import AnnotationError, AudioIOError, InvalidInputError
from .timefreq import TimeSeries

_INT_SCALES = {np.int16: 32768.0, np.int32: 2147483648.0}


@dataclass(frozen=True)
class PreprocessSpec:
    """Resample / high-pass / normalize chain parameters."""

    target_rate_hz: float = 2000.0
    highpass_hz: float = 100.0
    normalize_power: bool = True
    highpass_order: int = 4

    def __post_init__(self):
        if not (self.target_rate_hz > 0):
            raise InvalidInputError("target_rate_hz must be positive")
        if not (0 <= self.highpass_hz < self.target_rate_hz / 2):
            raise InvalidInputError("highpass_hz must lie below the target Nyquist")


@dataclass(frozen=True)
class PresenceMask:
    """Sorted sample indices at which the signal of interest is present."""

    indices: np.ndarray
    total_len: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.total_len):
            raise InvalidInputError("mask indices out of range")
        object.__setattr__(self, "indices", np.unique(idx))

    @property
    def count(self) -> int:
        return self.indices.size

    def to_bool(self) -> np.ndarray:
        b = np.zeros(self.total_len, dtype=bool)
        b[self.indices] = True
        return b

    @classmethod
    def from_bool(cls, b: np.ndarray) -> "PresenceMask":
        b = np.asarray(b).astype(bool)
        return cls(indices=np.nonzero(b)[0], total_len=b.size)


@dataclass(frozen=True)
class AnnotationSet:
    """Sorted, non-overlapping (start_s, end_s) intervals."""

    intervals: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "intervals", tuple(tuple(iv) for iv in self.intervals))

    def __len__(self):
        return len(self.intervals)

    @property
    def end_s(self) -> float:
        return self.intervals[-1][1] if self.intervals else 0.0

    def to_mask(self, total_len: int, sample_rate_hz: float) -> PresenceMask:
        return intervals_to_mask(self.intervals, sample_rate_hz, total_len)


def merge_intervals(intervals: Sequence[Tuple[float, float]]) -> List[Tuple[float, float]]:
    """Sort intervals and merge any that overlap or touch."""
    merged: List[Tuple[float, float]] = []
    for start, end in sorted(intervals):
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return merged


def mask_to_intervals(mask: PresenceMask, sample_rate_hz: float) -> List[Tuple[float, float]]:
    """Contiguous index runs as (start_s, end_s) with the end exclusive."""
    idx = mask.indices
    if idx.size == 0:
        return []
    breaks = np.nonzero(np.diff(idx) > 1)[0]
    starts = np.concatenate([[idx[0]], idx[breaks + 1]])
    ends = np.concatenate([idx[breaks], [idx[-1]]]) + 1
    return [(s / sample_rate_hz, e / sample_rate_hz) for s, e in zip(starts, ends)]


def intervals_to_mask(
    intervals: Sequence[Tuple[float, float]],
    sample_rate_hz: float,
    total_len: int,
) -> PresenceMask:
    parts = []
    for start_s, end_s in merge_intervals(intervals):
        i0 = max(int(round(start_s * sample_rate_hz)), 0)
        i1 = min(int(round(end_s * sample_rate_hz)), total_len)
        if i1 > i0:
            parts.append(np.arange(i0, i1))
    idx = np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)
    return PresenceMask(indices=idx, total_len=total_len)


def load_wav(path: Union[str, Path]) -> TimeSeries:
    """Read a WAV file into a [-1, 1]-scaled TimeSeries.

    Accepts 16/32-bit integer PCM and 32/64-bit float encodings; for
    multichannel files only the first channel is kept.
    """
    path = Path(path)
    try:
        rate, data = scipy.io.wavfile.read(path)
    except FileNotFoundError as exc:
        raise AudioIOError(f"{path}: file not found") from exc
    except Exception as exc:
        raise AudioIOError(f"{path}: not a readable WAV file ({exc})") from exc
    if data.ndim > 1:
        data = data[:, 0]
    if data.dtype.type in _INT_SCALES:
        samples = data.astype(np.float64) / _INT_SCALES[data.dtype.type]
    elif data.dtype.kind == "f":
        samples = data.astype(np.float64)
    else:
        raise AudioIOError(
            f"{path}: unsupported sample encoding {data.dtype}; "
            "expected 16/32-bit PCM or 32-bit float"
        )
    return TimeSeries(samples=samples, sample_rate_hz=float(rate))


def write_wav(path: Union[str, Path], x: TimeSeries, encoding: str = "int16") -> None:
    """Write a TimeSeries as WAV (``int16`` or ``float32``)."""
    if encoding == "int16":
        data = np.clip(np.round(x.samples * 32768.0), -32768, 32767).astype(np.int16)
    elif encoding == "float32":
        data = x.samples.astype(np.float32)
    else:
        raise InvalidInputError(f"unsupported encoding {encoding!r}")
    scipy.io.wavfile.write(Path(path), int(round(x.sample_rate_hz)), data)


def highpass_zero_phase(
    samples: np.ndarray,
    sample_rate_hz: float,
    cutoff_hz: float,
    order: int = 4,
) -> np.ndarray:
    """Zero-phase Butterworth high-pass (forward-backward filtering)."""
    sos = scipy.signal.butter(order, cutoff_hz, btype="highpass", fs=sample_rate_hz, output="sos")
    return scipy.signal.sosfiltfilt(sos, samples)


def preprocess(x: TimeSeries, spec: PreprocessSpec = PreprocessSpec()) -> TimeSeries:
    """Resample, high-pass, and normalize a recording.

    The high-pass runs after resampling (its cutoff is defined relative
    to the target rate); normalization rescales to mean-square 1 and is
    skipped with a warning for silent input.
    """
    if spec.target_rate_hz > x.sample_rate_hz:
        raise InvalidInputError(
            f"cannot resample up from {x.sample_rate_hz} Hz to {spec.target_rate_hz} Hz"
        )
    samples = x.samples
    if spec.target_rate_hz != x.sample_rate_hz:
        ratio = Fraction(spec.target_rate_hz / x.sample_rate_hz).limit_denominator(10_000)
        samples = scipy.signal.resample_poly(samples, ratio.numerator, ratio.denominator)
    if spec.highpass_hz > 0:
        samples = highpass_zero_phase(
            samples, spec.target_rate_hz, spec.highpass_hz, spec.highpass_order
        )
    if spec.normalize_power:
        mean_square = float(np.mean(samples**2))
        if mean_square == 0.0:
            warnings.warn("input is silent; power normalization skipped")
        else:
            samples = samples / np.sqrt(mean_square)
    return TimeSeries(samples=samples, sample_rate_hz=spec.target_rate_hz)


def parse_annotations(path: Union[str, Path]) -> AnnotationSet:
    """Read a ``start_s,end_s`` CSV into a merged, sorted AnnotationSet."""
    path = Path(path)
    if not path.exists():
        raise AudioIOError(f"{path}: file not found")
    intervals: List[Tuple[float, float]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise AnnotationError(f"{path}: empty file, expected 'start_s,end_s' header")
        if [c.strip() for c in header] != ["start_s", "end_s"]:
            raise AnnotationError(f"{path}: line 1: expected header 'start_s,end_s'")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise AnnotationError(f"{path}: line {lineno}: expected two fields")
            try:
                start, end = float(row[0]), float(row[1])
            except ValueError:
                raise AnnotationError(f"{path}: line {lineno}: non-numeric interval")
            if not start < end:
                raise AnnotationError(
                    f"{path}: line {lineno}: interval start {start} is not before end {end}"
                )
            intervals.append((start, end))
    return AnnotationSet(intervals=tuple(merge_intervals(intervals)))


def write_annotations(path: Union[str, Path], intervals: Sequence[Tuple[float, float]]) -> None:
    """Write (start_s, end_s) intervals in the annotation CSV format."""
    with open(Path(path), "w", newline="") as fh:
        fh.write("start_s,end_s\n")
        for start, end in intervals:
            fh.write(f"{start!r},{end!r}\n")

"""Band-limited spectral entropy and median-filter stabilization.

Each power-spectrogram time slice is normalized to sum to one over the
selected band and treated as a discrete probability distribution; its
Shannon entropy (natural log) is low when power concentrates in few
bins (narrow-band content) and approaches ``ln(bin_count)`` when power
spreads evenly.  Because of the normalization, the entropy series is
invariant to any positive rescaling of the input audio.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.ndimage

from . import timefreq
from .errors import ContractError, InvalidBandError, InvalidInputError
from .timefreq import (
    CWT_L1,
    CWT_L2,
    STFT,
    MorseFilterbankSpec,
    MorseParams,
    PowerSpectrogram,
    TimeSeries,
    WindowSpec,
)


@dataclass(frozen=True)
class BandSelection:
    """Half-open row range ``[k1, k2)`` of a spectrogram's frequency axis."""

    f_low_hz: float
    f_high_hz: float
    k1: int
    k2: int

    @property
    def bin_count(self) -> int:
        return self.k2 - self.k1


@dataclass(frozen=True)
class EntropySeries:
    """Per-time-index spectral entropy, with the bin count that bounds it."""

    values: np.ndarray
    bin_count: int
    time_offset_samples: int = 0

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))

    def __len__(self):
        return self.values.size

    @property
    def max_entropy(self) -> float:
        return float(np.log(self.bin_count))


@dataclass(frozen=True)
class MedianFilterSpec:
    """Sliding-median window; must be odd. ``window_length=1`` is a no-op."""

    window_length: int
    edge_policy: str = "replicate"

    def __post_init__(self):
        if self.window_length < 1 or self.window_length % 2 == 0:
            raise InvalidInputError("median window length must be odd and positive")
        if self.edge_policy != "replicate":
            raise InvalidInputError("only the 'replicate' edge policy is supported")


@dataclass(frozen=True)
class SpectralDistribution:
    """Band-normalized power slices (``values`` indexed [bin, time]).

    ``uniform_fallback`` flags time slices whose in-band power was zero
    and were replaced by the uniform distribution (maximum entropy): an
    empty spectrum carries no narrow-band evidence.
    """

    values: np.ndarray
    band: BandSelection
    uniform_fallback: np.ndarray
    time_offset_samples: int = 0


def band_indices(
    f_low_hz: float,
    f_high_hz: float,
    freq_axis_hz: np.ndarray,
    kind: str = "stft",
) -> BandSelection:
    """Resolve a frequency band to spectrogram row indices.

    For ``kind="stft"`` (uniform axis starting at 0 with spacing
    ``fs / fft_size``) the indices are ``k1 = floor(f_low / df)`` and
    ``k2 = floor(f_high / df)`` with the upper index exclusive.  For
    ``kind="cwt"`` every filter whose center frequency lies inside
    ``[f_low, f_high]`` is selected.
    """
    if not (f_low_hz < f_high_hz):
        raise InvalidBandError("need f_low_hz < f_high_hz")
    axis = np.asarray(freq_axis_hz, dtype=np.float64)
    if kind == "stft":
        df = axis[1] - axis[0]
        k1 = int(np.floor(f_low_hz / df + 1e-9))
        k2 = int(np.floor(f_high_hz / df + 1e-9))
        if k1 < 0 or k2 > axis.size or k1 >= k2:
            raise InvalidBandError(
                f"band {f_low_hz}-{f_high_hz} Hz selects no bins on this axis"
            )
    elif kind == "cwt":
        inside = (axis >= f_low_hz) & (axis <= f_high_hz)
        idx = np.nonzero(inside)[0]
        if idx.size == 0:
            raise InvalidBandError(
                f"no filter center frequencies inside {f_low_hz}-{f_high_hz} Hz"
            )
        k1, k2 = int(idx[0]), int(idx[-1]) + 1
    else:
        raise InvalidInputError(f"unknown axis kind {kind!r}")
    return BandSelection(f_low_hz=f_low_hz, f_high_hz=f_high_hz, k1=k1, k2=k2)


def band_indices_for(spec: PowerSpectrogram, f_low_hz: float, f_high_hz: float) -> BandSelection:
    """Band selection using the convention implied by the spectrogram."""
    return band_indices(f_low_hz, f_high_hz, spec.freq_axis_hz, kind=spec.axis_kind)


def spectral_distribution(power: PowerSpectrogram, band: BandSelection) -> SpectralDistribution:
    """Normalize each in-band time slice of a power spectrogram to sum to 1.

    All-zero slices fall back to the uniform distribution over the band
    and are flagged in ``uniform_fallback``.
    """
    sub = np.asarray(power.values)[band.k1 : band.k2, :]
    if np.any(sub < 0):
        raise InvalidInputError("power values must be nonnegative")
    totals = sub.sum(axis=0)
    fallback = totals == 0
    safe_totals = np.where(fallback, 1.0, totals)
    values = sub / safe_totals
    if np.any(fallback):
        values[:, fallback] = 1.0 / band.bin_count
    return SpectralDistribution(
        values=values,
        band=band,
        uniform_fallback=fallback,
        time_offset_samples=power.time_offset_samples,
    )


def spectral_entropy(dist: Union[SpectralDistribution, np.ndarray]) -> EntropySeries:
    """Shannon entropy (natural log) of each probability slice.

    ``0 * ln(0)`` is taken to be 0.  Every slice must sum to 1 within
    1e-9, otherwise the input violates the distribution contract.
    """
    if isinstance(dist, SpectralDistribution):
        p = dist.values
        offset = dist.time_offset_samples
    else:
        p = np.asarray(dist, dtype=np.float64)
        offset = 0
    totals = p.sum(axis=0)
    if np.any(np.abs(totals - 1.0) > 1e-9):
        raise ContractError("probability slices must each sum to 1 within 1e-9")
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    h = np.maximum(-terms.sum(axis=0), 0.0)
    return EntropySeries(values=h, bin_count=p.shape[0], time_offset_samples=offset)


def median_filter(
    h: Union[EntropySeries, np.ndarray],
    mf: Union[MedianFilterSpec, int],
) -> Union[EntropySeries, np.ndarray]:
    """Sliding-window median with replicated edges.

    The output at index n is the median of the window ``[n-R, n+R]``
    with ``R = (M-1)/2``; a window of 1 returns the input unchanged.
    """
    if isinstance(mf, int):
        mf = MedianFilterSpec(mf)
    values = h.values if isinstance(h, EntropySeries) else np.asarray(h, dtype=np.float64)
    if mf.window_length == 1:
        out = values.copy()
    else:
        out = scipy.ndimage.median_filter(values, size=mf.window_length, mode="nearest")
    if isinstance(h, EntropySeries):
        return EntropySeries(out, h.bin_count, h.time_offset_samples)
    return out


def expand_per_sample(values: np.ndarray, hop: int, total_len: int) -> np.ndarray:
    """Expand per-column values to per-sample length.

    Column m covers samples ``[m*hop, (m+1)*hop)``; the tail beyond the
    last column is filled by edge replication.
    """
    out = np.repeat(np.asarray(values), hop)
    if out.size >= total_len:
        return out[:total_len]
    return np.concatenate([out, np.full(total_len - out.size, out[-1])])


def entropy_from_audio(
    x: TimeSeries,
    method: str,
    params: Union[WindowSpec, MorseParams, MorseFilterbankSpec, None] = None,
    band: tuple = (150.0, 1000.0),
) -> EntropySeries:
    """Full pipeline: decompose, band-limit, normalize, take entropy.

    ``method`` is one of ``"stft"``, ``"cwt_l1"``, ``"cwt_l2"``.
    ``params`` is a :class:`WindowSpec` for the STFT (default 256/255
    Hamming) or :class:`MorseParams` / :class:`MorseFilterbankSpec` for
    the CWT (a filterbank spec built over ``band`` by default).  The
    output always has one entropy value per input sample.
    """
    if method not in timefreq.METHODS:
        raise InvalidInputError(f"unknown method {method!r}")
    f_low, f_high = float(band[0]), float(band[1])
    n = len(x)
    if method == STFT:
        win = params if isinstance(params, WindowSpec) else WindowSpec()
        spec = timefreq.compute_stft(x, win)
        power = timefreq.stft_power(spec)
        sel = band_indices(f_low, f_high, power.freq_axis_hz, kind="stft")
        hop = win.hop
    else:
        if isinstance(params, MorseFilterbankSpec):
            fb_spec = params
        else:
            mp = params if isinstance(params, MorseParams) else MorseParams()
            fb_spec = MorseFilterbankSpec(
                gamma=mp.gamma,
                beta=mp.beta,
                voices_per_octave=mp.voices_per_octave,
                f_low_hz=f_low,
                f_high_hz=f_high,
                sample_rate_hz=x.sample_rate_hz,
            )
        fb = timefreq.design_morse_filterbank(fb_spec, n)
        coeffs = timefreq.compute_cwt(x, fb, norm="l1" if method == CWT_L1 else "l2")
        power = timefreq.cwt_equiv_power(coeffs)
        sel = band_indices(f_low, f_high, power.freq_axis_hz, kind="cwt")
        hop = 1
    h = spectral_entropy(spectral_distribution(power, sel))
    values = expand_per_sample(h.values, hop, n) if hop > 1 or h.values.size != n else h.values
    return EntropySeries(values=values, bin_count=sel.bin_count, time_offset_samples=0)

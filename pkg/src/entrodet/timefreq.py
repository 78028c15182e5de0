"""Time-frequency decompositions: windowed STFT and Morse-wavelet CWT.

Conventions used throughout:

* STFT columns advance by ``hop = length - overlap`` samples and column
  ``m`` is aligned to the *first* sample of its frame
  (``time_offset_samples = 0``).  Spectra are one-sided
  (bins ``0 .. fft_size/2``).
* The CWT is evaluated in the frequency domain: one FFT of the input,
  then one inverse FFT per band-pass filter.  The convolution is
  circular, so each coefficient row has exactly one value per input
  sample and circularly shift-covariant behaviour is exact.  The first
  and last ``~P * s`` samples of a row are edge-affected
  (see :meth:`MorseFilterbank.edge_samples`).
* Band-pass filters are analytic: their frequency responses are exactly
  zero at DC and at all negative-frequency FFT bins, and each response
  is normalized to a peak gain of 2 on its FFT grid, so a real sinusoid
  at a filter's center frequency comes through with its amplitude
  preserved under L1 normalization.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ContractError, InvalidInputError

STFT = "stft"
CWT_L1 = "cwt_l1"
CWT_L2 = "cwt_l2"
METHODS = (STFT, CWT_L1, CWT_L2)

WINDOW_KINDS = ("hamming", "rectangular")


@dataclass(frozen=True)
class TimeSeries:
    """Real-valued, uniformly sampled signal.

    Parameters
    ----------
    samples : array_like
        1-D real samples; must be finite.
    sample_rate_hz : float
        Sampling rate, > 0.
    """

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise InvalidInputError("samples must be one-dimensional")
        if not np.all(np.isfinite(samples)):
            raise InvalidInputError("samples contain NaN or Inf")
        if not (self.sample_rate_hz > 0):
            raise InvalidInputError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self):
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz


@dataclass(frozen=True)
class WindowSpec:
    """Analysis window for the STFT.

    ``fft_size`` may exceed ``length_samples`` to zero-pad each frame;
    it defaults to the window length (no padding).
    """

    kind: str = "hamming"
    length_samples: int = 256
    overlap_samples: int = 255
    fft_size: Optional[int] = None

    def __post_init__(self):
        if self.kind not in WINDOW_KINDS:
            raise InvalidInputError(f"unknown window kind {self.kind!r}")
        if self.length_samples < 1:
            raise InvalidInputError("window length must be positive")
        if not (0 <= self.overlap_samples < self.length_samples):
            raise InvalidInputError("overlap must lie in [0, length)")
        if self.fft_size is None:
            object.__setattr__(self, "fft_size", self.length_samples)
        if self.fft_size < self.length_samples:
            raise InvalidInputError("fft_size must be >= window length")

    @property
    def hop(self) -> int:
        return self.length_samples - self.overlap_samples

    def window(self) -> np.ndarray:
        if self.kind == "hamming":
            return np.hamming(self.length_samples)
        return np.ones(self.length_samples)


@dataclass(frozen=True)
class MorseParams:
    """Shape parameters of the analytic Morse wavelet family.

    ``gamma`` controls frequency-domain symmetry, ``beta`` the time
    support (equivalently filter bandwidth); the time-bandwidth product
    is ``beta * gamma``.  ``voices_per_octave`` sets how many filters
    are placed per frequency doubling.
    """

    gamma: float = 50.0
    beta: float = 2000.0
    voices_per_octave: int = 40

    def __post_init__(self):
        if not (self.gamma > 0 and self.beta > 0):
            raise InvalidInputError("gamma and beta must be positive")
        if int(self.voices_per_octave) != self.voices_per_octave or self.voices_per_octave < 1:
            raise InvalidInputError("voices_per_octave must be a positive integer")
        object.__setattr__(self, "voices_per_octave", int(self.voices_per_octave))

    @property
    def peak_frequency(self) -> float:
        """Radian frequency (per unit scale) at which the wavelet peaks."""
        return (self.beta / self.gamma) ** (1.0 / self.gamma)


@dataclass(frozen=True)
class MorseFilterbankSpec:
    """Full specification of a Morse filterbank over an analysis band."""

    gamma: float
    beta: float
    voices_per_octave: int
    f_low_hz: float
    f_high_hz: float
    sample_rate_hz: float

    def __post_init__(self):
        MorseParams(self.gamma, self.beta, self.voices_per_octave)  # validates
        if not (0 < self.f_low_hz < self.f_high_hz):
            raise InvalidInputError("need 0 < f_low_hz < f_high_hz")
        if self.f_high_hz > self.sample_rate_hz / 2:
            raise InvalidInputError("f_high_hz exceeds the Nyquist frequency")

    @property
    def params(self) -> MorseParams:
        return MorseParams(self.gamma, self.beta, self.voices_per_octave)


@dataclass(frozen=True)
class MorseFilterbank:
    """Bank of analytic Morse band-pass filters sampled on an FFT grid.

    ``center_freqs_hz`` descend from the top of the analysis band;
    ``scales`` ascend correspondingly (consecutive ratios are exactly
    ``2**(1/voices_per_octave)``).  ``freq_responses`` has one row per
    filter, sampled on the full length-``signal_len`` FFT grid, zero at
    DC and at negative-frequency bins, with a peak value of exactly 2.
    """

    spec: MorseFilterbankSpec
    center_freqs_hz: np.ndarray
    scales: np.ndarray
    freq_responses: np.ndarray
    signal_len: int

    def __len__(self):
        return self.center_freqs_hz.size

    def edge_samples(self, k: Optional[int] = None) -> int:
        """Number of edge-affected samples per side for filter ``k``
        (worst filter if ``k`` is None), proportional to the wavelet
        time support ``P * s`` with ``P = sqrt(beta * gamma)``."""
        p = np.sqrt(self.spec.beta * self.spec.gamma)
        s = self.scales.max() if k is None else self.scales[k]
        return int(np.ceil(p * s))


@dataclass(frozen=True)
class ComplexSpectrogram:
    """Complex time-frequency coefficients.

    ``normalization`` is one of ``"stft"``, ``"cwt_l1"``, ``"cwt_l2"``.
    ``values`` is indexed ``[frequency_bin, time_index]``; for the STFT
    the frequency axis ascends, for the CWT it descends (filterbank
    ladder order).  ``time_offset_samples`` maps column ``m`` to input
    sample ``time_offset_samples + m * hop``.
    """

    values: np.ndarray
    freq_axis_hz: np.ndarray
    time_offset_samples: int
    normalization: str
    source_meta: Union[WindowSpec, MorseFilterbank, None] = field(repr=False, default=None)

    def __post_init__(self):
        if self.normalization not in METHODS:
            raise InvalidInputError(f"unknown normalization {self.normalization!r}")
        axis = np.asarray(self.freq_axis_hz, dtype=np.float64)
        d = np.diff(axis)
        if axis.size > 1 and not (np.all(d > 0) or np.all(d < 0)):
            raise InvalidInputError("freq_axis_hz must be strictly monotone")
        if not np.all(np.isfinite(self.values)):
            raise InvalidInputError("spectrogram values contain NaN or Inf")
        object.__setattr__(self, "freq_axis_hz", axis)


STFT_PERIODOGRAM = "stft_periodogram"
CWT_EQUIV_SINUSOID = "cwt_equiv_sinusoid"


@dataclass(frozen=True)
class PowerSpectrogram:
    """Nonnegative power values on a time-frequency grid."""

    values: np.ndarray
    freq_axis_hz: np.ndarray
    time_offset_samples: int
    power_convention: str
    source_meta: Union[WindowSpec, MorseFilterbank, None] = field(repr=False, default=None)

    def __post_init__(self):
        if self.power_convention not in (STFT_PERIODOGRAM, CWT_EQUIV_SINUSOID):
            raise InvalidInputError(f"unknown power convention {self.power_convention!r}")

    @property
    def axis_kind(self) -> str:
        """Band-selection convention implied by the power convention."""
        return "stft" if self.power_convention == STFT_PERIODOGRAM else "cwt"


def compute_stft(x: TimeSeries, win: WindowSpec) -> ComplexSpectrogram:
    """Windowed short-time Fourier transform.

    Column ``m`` holds the one-sided DFT of the windowed frame starting
    at sample ``m * hop``.  With ``overlap = N - 1`` there is one column
    per sample position, ``len(x) - N + 1`` in total.
    """
    n = len(x)
    if n < win.length_samples:
        raise InvalidInputError(
            f"input of {n} samples is shorter than the window ({win.length_samples})"
        )
    frames = sliding_window_view(x.samples, win.length_samples)[:: win.hop]
    frames = frames * win.window()
    values = np.fft.rfft(frames, n=win.fft_size, axis=1).T
    freq_axis = np.arange(win.fft_size // 2 + 1) * (x.sample_rate_hz / win.fft_size)
    return ComplexSpectrogram(
        values=values,
        freq_axis_hz=freq_axis,
        time_offset_samples=0,
        normalization=STFT,
        source_meta=win,
    )


def stft_power(spec: ComplexSpectrogram) -> PowerSpectrogram:
    """Periodogram power ``|X|^2 / N`` with N the window length."""
    if spec.normalization != STFT:
        raise ContractError(
            f"stft_power requires an STFT spectrogram, got {spec.normalization!r}"
        )
    n = spec.source_meta.length_samples
    values = (spec.values.real**2 + spec.values.imag**2) / n
    return PowerSpectrogram(
        values=values,
        freq_axis_hz=spec.freq_axis_hz,
        time_offset_samples=spec.time_offset_samples,
        power_convention=STFT_PERIODOGRAM,
        source_meta=spec.source_meta,
    )


def morse_center_frequencies(spec: MorseFilterbankSpec) -> np.ndarray:
    """Geometric ladder of center frequencies, descending from
    ``f_high_hz`` by a ratio of ``2**(-1/voices_per_octave)`` until the
    ladder would drop below ``f_low_hz``."""
    vpo = spec.voices_per_octave
    n_steps = int(np.floor(vpo * np.log2(spec.f_high_hz / spec.f_low_hz) + 1e-9)) + 1
    j = np.arange(n_steps)
    centers = spec.f_high_hz * 2.0 ** (-j / vpo)
    # guard against float drop-out exactly at the lower edge
    return centers[centers >= spec.f_low_hz * (1.0 - 1e-12)]


def design_morse_filterbank(spec: MorseFilterbankSpec, signal_len: int) -> MorseFilterbank:
    """Build the Morse filterbank sampled on a length-``signal_len`` FFT grid.

    Each row evaluates the wavelet's frequency response at ``scale * w``
    over the grid and is then rescaled so its on-grid peak is exactly 2.
    The evaluation runs in log space, so very large ``beta`` (sharp,
    narrow filters) cannot overflow.
    """
    if signal_len < 1:
        raise InvalidInputError("signal_len must be positive")
    centers = morse_center_frequencies(spec)
    w_peak = spec.params.peak_frequency
    scales = w_peak * spec.sample_rate_hz / (2 * np.pi * centers)

    n_pos = signal_len // 2  # positive-frequency bins 1 .. n_pos
    omega = 2 * np.pi * np.arange(1, n_pos + 1) / signal_len
    gamma, beta = spec.gamma, spec.beta
    ln_alpha = np.log(2.0) + (beta / gamma) * (1.0 + np.log(gamma) - np.log(beta))
    with np.errstate(over="ignore", under="ignore"):
        log_arg = np.log(scales[:, None] * omega[None, :])
        ln_psi = ln_alpha + beta * log_arg - np.exp(gamma * log_arg)
        pos = np.exp(ln_psi)

    peaks = pos.max(axis=1)
    if np.any(peaks <= 0):
        raise InvalidInputError(
            "a filter response vanishes everywhere on this FFT grid; "
            "the signal is too short for the requested band"
        )
    pos *= 2.0 / peaks[:, None]

    responses = np.zeros((centers.size, signal_len))
    responses[:, 1 : n_pos + 1] = pos
    return MorseFilterbank(
        spec=spec,
        center_freqs_hz=centers,
        scales=scales,
        freq_responses=responses,
        signal_len=signal_len,
    )


def compute_cwt(x: TimeSeries, fb: MorseFilterbank, norm: str = "l1") -> ComplexSpectrogram:
    """Continuous wavelet transform via frequency-domain filtering.

    ``norm="l1"`` preserves sinusoid amplitude across frequency;
    ``norm="l2"`` multiplies each row by ``sqrt(scale)`` so that energy,
    not amplitude, is preserved.  One coefficient per input sample.
    """
    if norm not in ("l1", "l2"):
        raise InvalidInputError(f"norm must be 'l1' or 'l2', got {norm!r}")
    if fb.signal_len != len(x):
        raise ContractError(
            f"filterbank was designed for {fb.signal_len} samples, got {len(x)}"
        )
    xf = np.fft.fft(x.samples)
    values = np.fft.ifft(xf[None, :] * fb.freq_responses, axis=1)
    if norm == "l2":
        values = values * np.sqrt(fb.scales)[:, None]
    return ComplexSpectrogram(
        values=values,
        freq_axis_hz=fb.center_freqs_hz,
        time_offset_samples=0,
        normalization=CWT_L1 if norm == "l1" else CWT_L2,
        source_meta=fb,
    )


def cwt_equiv_power(spec: ComplexSpectrogram) -> PowerSpectrogram:
    """Equivalent sinusoidal power ``|X|^2 / 2``.

    For an L1-normalized coefficient of magnitude A this is the average
    power of the amplitude-A sinusoid that would produce it.  Accepted
    verbatim for L2 coefficients as well (used when comparing the two
    normalizations), but rejects STFT input.
    """
    if spec.normalization not in (CWT_L1, CWT_L2):
        raise ContractError(
            f"cwt_equiv_power requires CWT coefficients, got {spec.normalization!r}"
        )
    values = 0.5 * (spec.values.real**2 + spec.values.imag**2)
    return PowerSpectrogram(
        values=values,
        freq_axis_hz=spec.freq_axis_hz,
        time_offset_samples=spec.time_offset_samples,
        power_convention=CWT_EQUIV_SINUSOID,
        source_meta=spec.source_meta,
    )

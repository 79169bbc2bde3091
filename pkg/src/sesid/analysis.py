"""Validation instrumentation: spectra, calibrated noise, frequency response,
phase portraits, and small comparison helpers."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import signal as sps

from .lure import SignalRecord

DEFAULT_SEGMENT_LEN = 4096


@dataclass(frozen=True)
class PsdEstimate:
    """One-sided Welch power spectral density."""

    frequencies: np.ndarray  # Hz when sample_time is in seconds
    power: np.ndarray
    segment_len: int
    window: str = "hann"

    @property
    def bin_width(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])

    def save_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["freq", "power"])
            for f, p in zip(self.frequencies, self.power):
                writer.writerow([repr(float(f)), repr(float(p))])


def psd(
    signal,
    sample_time: float = 1.0,
    segment_len: int = DEFAULT_SEGMENT_LEN,
    overlap: float = 0.5,
) -> PsdEstimate:
    """Welch periodogram: Hann window, per-segment mean removal, one-sided."""
    signal = np.asarray(signal, dtype=float)
    if signal.size < 2:
        raise ValueError("signal too short for a spectrum")
    segment_len = int(min(segment_len, signal.size))
    if not 0 <= overlap < 1:
        raise ValueError("overlap must be in [0, 1)")
    freqs, power = sps.welch(
        signal,
        fs=1.0 / sample_time,
        window="hann",
        nperseg=segment_len,
        noverlap=int(overlap * segment_len),
        detrend="constant",
    )
    return PsdEstimate(frequencies=freqs, power=power, segment_len=segment_len)


def dominant_frequency(estimate: PsdEstimate) -> float:
    """Frequency of the largest non-DC peak (ties resolve to the lower bin)."""
    power = estimate.power[1:]
    if not np.any(power > 0):
        raise ValueError("spectrum has no nonzero-frequency content")
    return float(estimate.frequencies[1 + int(np.argmax(power))])


def add_noise(
    record: SignalRecord,
    target_snr_db: Optional[float] = None,
    std: Optional[float] = None,
    seed: int = 0,
) -> Tuple[SignalRecord, float]:
    """Add zero-mean Gaussian sensor noise to the output channel.

    Either ``std`` gives the noise standard deviation directly, or
    ``target_snr_db`` picks it so that 10 log10(P_signal / P_noise) hits the
    target, with the signal power taken after mean removal.  Returns the
    noisy record and the achieved empirical SNR in dB.
    """
    if (std is None) == (target_snr_db is None):
        raise ValueError("give exactly one of std or target_snr_db")
    y = record.y
    p_signal = float(np.var(y))
    if p_signal == 0.0:
        raise ValueError("record has zero signal power")
    if std is None:
        std = float(np.sqrt(p_signal / 10.0 ** (target_snr_db / 10.0)))
    elif std < 0:
        raise ValueError("std must be nonnegative")
    if std == 0.0:
        return record, float("inf")
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, std, size=y.size)
    achieved = 10.0 * np.log10(p_signal / np.var(noise))
    noisy = SignalRecord(v=record.v, y=y + noise, sample_time=record.sample_time)
    return noisy, float(achieved)


@dataclass(frozen=True)
class FrequencyResponse:
    omega: np.ndarray  # rad/sample, in (0, pi]
    magnitude_db: np.ndarray
    phase_rad: np.ndarray
    valid: np.ndarray  # False where the denominator vanished

    def save_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["omega", "mag_db", "phase_rad"])
            for w, m, p in zip(self.omega, self.magnitude_db, self.phase_rad):
                writer.writerow([repr(float(w)), repr(float(m)), repr(float(p))])


def frequency_response(a, b, sample_time: float = 1.0, n_points: int = 512) -> FrequencyResponse:
    """Evaluate B(e^{jw}) / A(e^{jw}) on a uniform grid over (0, pi].

    ``a`` and ``b`` are the recursion coefficient vectors (A is monic of
    degree n, B has degree n - 1).  Grid points where A vanishes are flagged
    in ``valid`` rather than raising.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("coefficients must be finite")
    omega = np.linspace(np.pi / n_points, np.pi, n_points)
    z = np.exp(1j * omega)
    num = np.polyval(b, z)
    den = np.polyval(np.concatenate(([1.0], a)), z)
    valid = den != 0
    resp = np.full_like(z, np.nan + 0j)
    resp[valid] = num[valid] / den[valid]
    with np.errstate(divide="ignore"):
        mag_db = 20.0 * np.log10(np.abs(resp))
    return FrequencyResponse(
        omega=omega, magnitude_db=mag_db, phase_rad=np.angle(resp), valid=valid
    )


def phase_portrait(record: SignalRecord) -> Tuple[np.ndarray, np.ndarray]:
    """Central-difference phase-plane pairs (y_k, (y_{k+1} - y_{k-1}) / 2 Ts).

    The two endpoint samples are dropped.
    """
    y = record.y
    if y.size < 3:
        raise ValueError("need at least three samples")
    ydot = (y[2:] - y[:-2]) / (2.0 * record.sample_time)
    return y[1:-1].copy(), ydot


def save_phase_portrait_csv(path, y, ydot) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y", "ydot"])
        for a, b in zip(y, ydot):
            writer.writerow([repr(float(a)), repr(float(b))])


def best_alignment_shift(reference, candidate, max_shift: int = 200) -> int:
    """Integer shift of ``candidate`` that best matches ``reference``.

    Maximises the cross-correlation of the mean-removed signals over shifts
    in [-max_shift, max_shift]; used when overlaying a model response on the
    truth, whose oscillation phase is arbitrary.
    """
    ref = np.asarray(reference, float)
    cand = np.asarray(candidate, float)
    ref = ref - ref.mean()
    cand = cand - cand.mean()
    n = min(ref.size, cand.size)
    best, best_val = 0, -np.inf
    # smallest-magnitude shift wins among (near-)periodic ties
    for shift in sorted(range(-max_shift, max_shift + 1), key=abs):
        if shift >= 0:
            a, b_ = ref[shift:n], cand[: n - shift]
        else:
            a, b_ = ref[: n + shift], cand[-shift:n]
        if a.size < 8:
            continue
        val = float(a @ b_) / a.size
        if val > best_val:
            best_val, best = val, shift
    return best


def range_overlap_fraction(reference, candidate) -> float:
    """Fraction of the reference's value range covered by the candidate's."""
    ref = np.asarray(reference, float)
    cand = np.asarray(candidate, float)
    lo = max(ref.min(), cand.min())
    hi = min(ref.max(), cand.max())
    width = ref.max() - ref.min()
    if width == 0:
        return 1.0 if hi >= lo else 0.0
    return max(0.0, hi - lo) / width

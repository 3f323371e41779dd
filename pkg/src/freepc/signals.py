"""Time-domain sequence tooling: Hankel matrices, persistence-of-excitation
checks, periodic multi-sine synthesis, and per-period DFT evaluation.

``SpectrumSamples`` lives here because the per-period DFT produces it; the
frequency-domain machinery built on top of it is in :mod:`freepc.freqdomain`.
"""

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import ParseError
from .numcore import DEFAULT_RANK_TOL, check_finite, numerical_rank

GRID_TOL = 1e-9  # |w*P/(2*pi) - round(.)| below this counts as on-grid


@dataclass(frozen=True)
class TimeSeries:
    """A length-N sequence of n_v-vectors, stored as an (N, n_v) array."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim == 1:
            s = s.reshape(-1, 1)
        if s.ndim != 2 or s.shape[0] < 1:
            raise ValueError("samples must be a nonempty (N, n_v) array")
        check_finite(s, "samples")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def n_v(self) -> int:
        return self.samples.shape[1]

    def channel(self, i: int) -> np.ndarray:
        return self.samples[:, i]

    def to_csv(self, path, names=None):
        names = names or [f"ch{i}" for i in range(self.n_v)]
        if len(names) != self.n_v:
            raise ValueError("one name per channel required")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(names)
            for row in self.samples:
                writer.writerow([f"{v:.17g}" for v in row])

    @staticmethod
    def from_csv(path) -> "TimeSeries":
        rows = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or not header:
                raise ParseError("empty file", line=1)
            width = len(header)
            for i, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != width:
                    raise ParseError(f"expected {width} columns, got {len(row)}", line=i)
                try:
                    rows.append([float(v) for v in row])
                except ValueError as exc:
                    raise ParseError(str(exc), line=i) from None
        if not rows:
            raise ParseError("no data rows", line=2)
        return TimeSeries(np.array(rows))


@dataclass(frozen=True)
class SpectrumSamples:
    """Spectrum values at M distinct frequencies in [0, pi).

    ``values`` has shape (M, n_v): one complex n_v-vector per frequency, i.e.
    a single input direction per frequency.
    """

    frequencies: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.frequencies, dtype=float).reshape(-1)
        v = np.asarray(self.values, dtype=complex)
        if v.ndim == 1:
            v = v.reshape(-1, 1)
        check_finite(w, "frequencies")
        check_finite(v, "values")
        if w.size == 0:
            raise ValueError("at least one frequency required")
        if np.any(w < 0) or np.any(w >= np.pi):
            raise ValueError("frequencies must lie in [0, pi)")
        if len(np.unique(w)) != w.size:
            raise ValueError("frequencies must be distinct")
        if v.shape[0] != w.size:
            raise ValueError("one value vector per frequency required")
        w = w.copy(); w.flags.writeable = False
        v = v.copy(); v.flags.writeable = False
        object.__setattr__(self, "frequencies", w)
        object.__setattr__(self, "values", v)

    @property
    def M(self) -> int:
        return self.frequencies.size

    @property
    def n_v(self) -> int:
        return self.values.shape[1]

    def to_csv(self, path):
        header = ["frequency"]
        for i in range(self.n_v):
            header += [f"re_v{i}", f"im_v{i}"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for m in range(self.M):
                row = [f"{self.frequencies[m]:.17g}"]
                for i in range(self.n_v):
                    row += [f"{self.values[m, i].real:.17g}",
                            f"{self.values[m, i].imag:.17g}"]
                writer.writerow(row)

    @staticmethod
    def from_csv(path) -> "SpectrumSamples":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or not rows[0]:
            raise ParseError("empty file", line=1)
        header = rows[0]
        if header[0] != "frequency" or (len(header) - 1) % 2:
            raise ParseError("bad spectrum header", line=1)
        n_v = (len(header) - 1) // 2
        w, vals = [], []
        for k, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"expected {len(header)} columns, got {len(row)}", line=k)
            try:
                nums = [float(c) for c in row]
            except ValueError as exc:
                raise ParseError(str(exc), line=k) from None
            w.append(nums[0])
            vals.append([complex(nums[1 + 2 * i], nums[2 + 2 * i])
                         for i in range(n_v)])
        if not w:
            raise ParseError("no data rows", line=2)
        return SpectrumSamples(np.array(w), np.array(vals))


@dataclass(frozen=True)
class MultisineSpec:
    """Sum-of-cosines excitation, exactly periodic with ``period_length``.

    Every frequency must sit on the period grid 2*pi*k/period_length; the
    synthesized signal is then bin-exact under the per-period DFT.
    """

    frequencies: np.ndarray
    amplitudes: np.ndarray
    phases: np.ndarray
    period_length: int
    periods: int

    def __post_init__(self):
        w = np.asarray(self.frequencies, dtype=float).reshape(-1)
        a = np.asarray(self.amplitudes, dtype=float).reshape(-1)
        p = np.asarray(self.phases, dtype=float).reshape(-1)
        if not (w.size == a.size == p.size):
            raise ValueError("frequencies, amplitudes, phases must have equal length")
        if np.any(np.diff(w) <= 0):
            raise ValueError("frequencies must be strictly increasing")
        if np.any(w < 0) or np.any(w >= np.pi):
            raise ValueError("frequencies must lie in [0, pi)")
        if np.any(a <= 0):
            raise ValueError("amplitudes must be positive")
        if self.period_length < 1 or self.periods < 1:
            raise ValueError("period_length and periods must be >= 1")
        k = w * self.period_length / (2 * np.pi)
        if np.any(np.abs(k - np.round(k)) > GRID_TOL):
            off = w[np.abs(k - np.round(k)) > GRID_TOL]
            raise ValueError(f"frequencies not on the 2*pi*k/{self.period_length} grid: {off}")
        for name, val in (("frequencies", w), ("amplitudes", a), ("phases", p)):
            val = val.copy(); val.flags.writeable = False
            object.__setattr__(self, name, val)

    @property
    def M(self) -> int:
        return self.frequencies.size

    @staticmethod
    def with_random_phases(frequencies, amplitudes, period_length, periods,
                           seed) -> "MultisineSpec":
        """Phases drawn uniform on [0, 2*pi) from a seeded generator."""
        frequencies = np.asarray(frequencies, dtype=float).reshape(-1)
        amplitudes = np.broadcast_to(np.asarray(amplitudes, dtype=float),
                                     frequencies.shape).copy()
        rng = np.random.default_rng(seed)
        phases = rng.uniform(0.0, 2 * np.pi, size=frequencies.size)
        return MultisineSpec(frequencies, amplitudes, phases, period_length, periods)


def grid_frequencies(period_length: int, ks) -> np.ndarray:
    """Exact grid frequencies 2*pi*k/period_length for integer bins ``ks``."""
    ks = np.asarray(ks, dtype=int)
    return 2 * np.pi * ks / period_length


def hankel(x: TimeSeries, L: int) -> np.ndarray:
    """Depth-L Hankel matrix of shape (n_v*L, N-L+1); column i stacks the
    samples x_i .. x_{i+L-1} (time-major, channels contiguous per sample)."""
    N = len(x)
    if not 1 <= L <= N:
        raise ValueError(f"L must satisfy 1 <= L <= {N}, got {L}")
    s = x.samples
    cols = N - L + 1
    H = np.empty((x.n_v * L, cols))
    for i in range(cols):
        H[:, i] = s[i:i + L].reshape(-1)
    return H


class PeCheck(NamedTuple):
    pe: bool
    rank: int
    required: int


def is_pe_time(x: TimeSeries, L: int, tol: float = DEFAULT_RANK_TOL) -> PeCheck:
    """Time-domain persistence of excitation of order L: the depth-L Hankel
    matrix must reach full row rank n_v*L."""
    rank = numerical_rank(hankel(x, L), tol)
    required = x.n_v * L
    return PeCheck(rank == required, rank, required)


def synth_multisine(spec: MultisineSpec) -> TimeSeries:
    """d_k = sum_m amp_m * cos(w_m k + phase_m) over periods*period_length steps."""
    k = np.arange(spec.periods * spec.period_length)
    d = np.zeros(k.size)
    for w, a, ph in zip(spec.frequencies, spec.amplitudes, spec.phases):
        d += a * np.cos(w * k + ph)
    return TimeSeries(d.reshape(-1, 1))


def per_period_dft(x: TimeSeries, period_length: int, frequencies) -> list[SpectrumSamples]:
    """Unnormalized DFT of each period at the given on-grid frequencies.

    For period p: V_p(w) = sum_k x[p*P+k] exp(-j w k), k local to the period.
    """
    N = len(x)
    if period_length < 1 or N % period_length != 0:
        raise ValueError(f"length {N} is not a multiple of period_length {period_length}")
    w = np.asarray(frequencies, dtype=float).reshape(-1)
    bins = w * period_length / (2 * np.pi)
    if np.any(np.abs(bins - np.round(bins)) > GRID_TOL):
        off = w[np.abs(bins - np.round(bins)) > GRID_TOL]
        raise ValueError(f"frequencies not on the DFT grid: {off}")
    k = np.arange(period_length)
    ematrix = np.exp(-1j * np.outer(w, k))  # (M, P_len)
    out = []
    for p in range(N // period_length):
        block = x.samples[p * period_length:(p + 1) * period_length]  # (P_len, n_v)
        out.append(SpectrumSamples(w, ematrix @ block))
    return out

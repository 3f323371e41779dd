"""Frequency-domain data equations and persistence of excitation.

A sampled input/output spectrum pair characterizes every finite trajectory of
the underlying system once the input samples are rich enough. The key objects
are the complex matrix ``F_L`` (one column ``W_L(w_m) (x) V_m`` per sampled
frequency), the rank test on ``[F_L, conj(F_L)]``, and the real stacked data
equations whose column space contains exactly the length-L trajectories:

    [u_past; u_future; y_past; y_future] = [Re F_L(U)  Im F_L(U);
                                            Re F_L(Y)  Im F_L(Y)] g,  g real.

The same ``DataEquations`` container also carries the stacked-Hankel form
built from time-domain records, so the predictive controller can consume
either interchangeably.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .exceptions import ParseError
from .numcore import DEFAULT_RANK_TOL, check_finite, least_squares, numerical_rank
from .signals import PeCheck, SpectrumSamples, TimeSeries, hankel


@dataclass(frozen=True)
class FreqData:
    """Paired input/output spectrum samples on one frequency list."""

    input: SpectrumSamples
    output: SpectrumSamples

    def __post_init__(self):
        if not np.array_equal(self.input.frequencies, self.output.frequencies):
            raise ValueError("input and output must share the same frequency list")

    @property
    def frequencies(self) -> np.ndarray:
        return self.input.frequencies

    @property
    def M(self) -> int:
        return self.input.M

    def to_csv(self, path):
        n_u, n_y = self.input.n_v, self.output.n_v
        header = (["frequency"]
                  + [f"{p}_u{i}" for i in range(n_u) for p in ("re", "im")]
                  + [f"{p}_y{i}" for i in range(n_y) for p in ("re", "im")])
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for m in range(self.M):
                row = [self.frequencies[m]]
                for v in self.input.values[m]:
                    row += [v.real, v.imag]
                for v in self.output.values[m]:
                    row += [v.real, v.imag]
                writer.writerow([f"{x:.17g}" for x in row])

    @staticmethod
    def from_csv(path) -> "FreqData":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header:
                raise ParseError("empty file", line=1)
            if header[0] != "frequency" or (len(header) - 1) % 2 != 0:
                raise ParseError("expected columns: frequency, re/im pairs", line=1)
            n_u = sum(1 for h in header if h.startswith("re_u"))
            n_y = sum(1 for h in header if h.startswith("re_y"))
            if n_u == 0 or n_y == 0 or len(header) != 1 + 2 * (n_u + n_y):
                raise ParseError("header must name re_u*/im_u* and re_y*/im_y* columns",
                                 line=1)
            freqs, uvals, yvals = [], [], []
            for i, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise ParseError(f"expected {len(header)} columns, got {len(row)}",
                                     line=i)
                try:
                    vals = [float(v) for v in row]
                except ValueError as exc:
                    raise ParseError(str(exc), line=i) from None
                freqs.append(vals[0])
                u = vals[1:1 + 2 * n_u]
                y = vals[1 + 2 * n_u:]
                uvals.append([complex(u[2 * j], u[2 * j + 1]) for j in range(n_u)])
                yvals.append([complex(y[2 * j], y[2 * j + 1]) for j in range(n_y)])
            if not freqs:
                raise ParseError("no data rows", line=2)
        w = np.array(freqs)
        return FreqData(SpectrumSamples(w, np.array(uvals)),
                        SpectrumSamples(w, np.array(yvals)))


@dataclass(frozen=True)
class DataEquations:
    """Stacked real data matrix whose columns span length-``depth``
    trajectories; rows are the u-block (n_u*depth) over the y-block
    (n_y*depth), each block time-major."""

    matrix: np.ndarray
    depth: int
    n_u: int
    n_y: int
    source: str  # "hankel" or "frequency"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        check_finite(m, "matrix")
        if m.shape[0] != (self.n_u + self.n_y) * self.depth:
            raise ValueError("row count must equal (n_u + n_y) * depth")
        if self.source not in ("hankel", "frequency"):
            raise ValueError("source must be 'hankel' or 'frequency'")
        m = m.copy(); m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def lhs_dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def width(self) -> int:
        return self.matrix.shape[1]

    def u_block(self) -> np.ndarray:
        return self.matrix[:self.n_u * self.depth]

    def y_block(self) -> np.ndarray:
        return self.matrix[self.n_u * self.depth:]


def w_vector(w: float, L: int) -> np.ndarray:
    """[1, e^{jw}, ..., e^{jw(L-1)}]."""
    if L < 1:
        raise ValueError("L must be >= 1")
    return np.exp(1j * float(w) * np.arange(L))


def f_matrix(v: SpectrumSamples, L: int) -> np.ndarray:
    """(n_v*L, M) complex matrix with column m = W_L(w_m) kron V_m."""
    if L < 1:
        raise ValueError("L must be >= 1")
    F = np.empty((v.n_v * L, v.M), dtype=complex)
    for m in range(v.M):
        F[:, m] = np.kron(w_vector(v.frequencies[m], L), v.values[m])
    return F


def is_pe_freq(v: SpectrumSamples, L: int, tol: float = DEFAULT_RANK_TOL) -> PeCheck:
    """Frequency-domain persistence of excitation of order L:
    rank [F_L, conj(F_L)] must equal n_v*L."""
    F = f_matrix(v, L)
    rank = numerical_rank(np.hstack([F, F.conj()]), tol)
    required = v.n_v * L
    return PeCheck(rank == required, rank, required)


def freq_data_equations(data: FreqData, L: int) -> DataEquations:
    """Real stacked data equations of depth L from spectrum samples; width
    2M regardless of how long the underlying experiment was."""
    Fu = f_matrix(data.input, L)
    Fy = f_matrix(data.output, L)
    matrix = np.block([[Fu.real, Fu.imag],
                       [Fy.real, Fy.imag]])
    return DataEquations(matrix, L, data.input.n_v, data.output.n_v, "frequency")


def hankel_data_equations(u: TimeSeries, y: TimeSeries, L: int) -> DataEquations:
    """Stacked Hankel data equations of depth L from a time-domain record;
    width N-L+1 grows with the record length."""
    if len(u) != len(y):
        raise ValueError("u and y must have the same length")
    matrix = np.vstack([hankel(u, L), hankel(y, L)])
    return DataEquations(matrix, L, u.n_v, y.n_v, "hankel")


def frf_to_freq_data(frequencies, frf_values, directions=None) -> FreqData:
    """Spectrum samples from response measurements in given input directions:
    U_m = r_m and Y_m = G(e^{j w_m}) r_m.

    ``frf_values`` is (M, n_y, n_u) (a 1-D complex array is taken as SISO);
    ``directions`` is (M, n_u) and defaults to all-ones for single-input data.
    """
    w = np.asarray(frequencies, dtype=float).reshape(-1)
    G = np.asarray(frf_values, dtype=complex)
    if G.ndim == 1:
        G = G.reshape(-1, 1, 1)
    if G.ndim != 3 or G.shape[0] != w.size:
        raise ValueError("frf_values must be (M, n_y, n_u)")
    M, n_y, n_u = G.shape
    if directions is None:
        if n_u != 1:
            raise ValueError("directions required for multi-input data")
        r = np.ones((M, 1), dtype=complex)
    else:
        r = np.asarray(directions, dtype=complex)
        if r.ndim == 1:
            r = r.reshape(-1, 1)
        if r.shape != (M, n_u):
            raise ValueError("one n_u-direction per frequency required")
    if np.any(np.all(r == 0, axis=1)):
        raise ValueError("zero direction vector")
    yvals = np.einsum("myu,mu->my", G, r)
    return FreqData(SpectrumSamples(w, r), SpectrumSamples(w, yvals))


def is_trajectory_consistent(eqs: DataEquations, u: TimeSeries, y: TimeSeries,
                             tol: float = 1e-8):
    """Least-squares membership test: is (u, y) in the column space of the
    data equations?

    Returns ``(consistent, residual)`` with the residual measured in 2-norm;
    consistency means residual <= tol * (1 + ||rhs||).
    """
    if len(u) != eqs.depth or len(y) != eqs.depth:
        raise ValueError(f"trajectory length must equal depth {eqs.depth}")
    if u.n_v != eqs.n_u or y.n_v != eqs.n_y:
        raise ValueError("channel counts do not match the data equations")
    rhs = np.concatenate([u.samples.reshape(-1), y.samples.reshape(-1)])
    g = least_squares(eqs.matrix, rhs)
    residual = float(np.linalg.norm(eqs.matrix @ g - rhs))
    return residual <= tol * (1.0 + float(np.linalg.norm(rhs))), residual

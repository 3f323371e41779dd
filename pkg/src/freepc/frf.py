"""Closed-loop frequency-response measurement.

A multi-sine reference d excites the plant inside a stabilizing feedback
loop; u, d and y are recorded for P periods, the per-period DFTs are formed,
and the FRF is estimated per period as

    G_p(w) = (Y_p(w) D_p(w)*) / (U_p(w) D_p(w)*)

then averaged over periods, with the sample variance of the per-period
estimates quantifying uncertainty.  Correlating against the reference d
removes the bias a naive Y/U ratio would pick up from feedback (the noise
enters u through the controller).
"""

import csv
import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ParseError, SingularityError
from .lti import StateSpace, closed_loop, du_sensitivity, simulate, spectral_radius
from .signals import MultisineSpec, SpectrumSamples, TimeSeries, per_period_dft, synth_multisine

# 99% coverage radius for a circular complex Gaussian: P(|e| > r) = exp(-r^2/var)
RADIUS_FACTOR_99 = math.sqrt(math.log(100.0))


@dataclass(frozen=True)
class ClosedLoopExperiment:
    """One data-collection campaign: plant + controller in feedback, driven by
    ``excitation`` with measurement noise of standard deviation ``noise_std``
    added to the plant output (inside the loop)."""

    plant: StateSpace
    controller: StateSpace
    excitation: MultisineSpec
    noise_std: float = 0.0
    rng_seed: object = 0
    discard_periods: int = 0

    def __post_init__(self):
        if self.noise_std < 0 or not np.isfinite(self.noise_std):
            raise ValueError("noise_std must be finite and nonnegative")
        if int(self.discard_periods) < 0:
            raise ValueError("discard_periods must be nonnegative")
        object.__setattr__(self, "discard_periods", int(self.discard_periods))
        rho = spectral_radius(closed_loop(self.plant, self.controller).A)
        if rho >= 1.0:
            raise ValueError(
                f"closed loop is not internally stable (spectral radius {rho:.6g})")


@dataclass(frozen=True)
class FrfEstimate:
    frequencies: np.ndarray
    g_hat: np.ndarray
    variance: np.ndarray
    confidence_radius_99: np.ndarray
    periods_used: int

    def __post_init__(self):
        w = np.asarray(self.frequencies, dtype=float).reshape(-1)
        g = np.asarray(self.g_hat, dtype=complex).reshape(w.size)
        v = np.asarray(self.variance, dtype=float).reshape(w.size)
        r = np.asarray(self.confidence_radius_99, dtype=float).reshape(w.size)
        if not np.all(np.isfinite(g)):
            raise ValueError("g_hat must be finite")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("variance must be finite and nonnegative")
        for name, val in (("frequencies", w), ("g_hat", g),
                          ("variance", v), ("confidence_radius_99", r)):
            val = val.copy(); val.flags.writeable = False
            object.__setattr__(self, name, val)

    @property
    def M(self) -> int:
        return self.frequencies.size

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["frequency", "re_g", "im_g", "variance", "radius_99"])
            for i in range(self.M):
                writer.writerow(["%.17g" % self.frequencies[i],
                                 "%.17g" % self.g_hat[i].real,
                                 "%.17g" % self.g_hat[i].imag,
                                 "%.17g" % self.variance[i],
                                 "%.17g" % self.confidence_radius_99[i]])

    @staticmethod
    def from_csv(path, periods_used: int = 0) -> "FrfEstimate":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise ParseError("empty FRF file", line=1)
        if rows[0][:1] != ["frequency"] or len(rows[0]) != 5:
            raise ParseError("bad FRF header", line=1)
        w, g, v, r = [], [], [], []
        for k, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            if len(row) != 5:
                raise ParseError(f"expected 5 columns, got {len(row)}", line=k)
            try:
                vals = [float(c) for c in row]
            except ValueError as exc:
                raise ParseError(str(exc), line=k) from None
            w.append(vals[0]); g.append(complex(vals[1], vals[2]))
            v.append(vals[3]); r.append(vals[4])
        if not w:
            raise ParseError("no data rows", line=2)
        return FrfEstimate(np.array(w), np.array(g), np.array(v), np.array(r),
                           periods_used)


def run_experiment(exp: ClosedLoopExperiment):
    """Simulate the loop from rest and return the last P periods of
    ``(d, u, y)`` as a TimeSeries triple (transient periods discarded)."""
    spec = exp.excitation
    total_periods = spec.periods + exp.discard_periods
    d_full = synth_multisine(
        dataclasses.replace(spec, periods=total_periods)).samples
    loop = closed_loop(exp.plant, exp.controller)
    n_steps = total_periods * spec.period_length
    rng = np.random.default_rng(exp.rng_seed)
    noise = rng.standard_normal((n_steps, exp.plant.n_y)) * exp.noise_std
    w_in = np.column_stack([d_full, noise])
    out, _ = simulate(loop, np.zeros(loop.n_x), w_in)
    keep = spec.periods * spec.period_length
    d = d_full[-keep:]
    u = out[-keep:, : exp.plant.n_u]
    y = out[-keep:, exp.plant.n_u:]
    return TimeSeries(d), TimeSeries(u), TimeSeries(y)


def estimate_frf(d: TimeSeries, u: TimeSeries, y: TimeSeries,
                 period_length: int, frequencies) -> FrfEstimate:
    """Average the per-period correlated FRF estimates; SISO only."""
    if not (d.n_v == u.n_v == y.n_v == 1):
        raise ValueError("estimate_frf handles single-channel records only")
    if not (len(d) == len(u) == len(y)):
        raise ValueError("d, u, y must have equal length")
    periods = len(d) // period_length
    if periods * period_length != len(d):
        raise ValueError("record length must be divisible by period_length")
    if periods < 2:
        raise ValueError("need at least 2 periods to estimate a variance")
    w = np.asarray(frequencies, dtype=float).reshape(-1)
    d_spec = per_period_dft(d, period_length, w)
    u_spec = per_period_dft(u, period_length, w)
    y_spec = per_period_dft(y, period_length, w)
    g_per = np.empty((periods, w.size), dtype=complex)
    for p in range(periods):
        dp = d_spec[p].values[:, 0]
        up = u_spec[p].values[:, 0]
        yp = y_spec[p].values[:, 0]
        denom = up * dp.conj()
        dead = np.abs(denom) == 0.0
        if np.any(dead):
            m = int(np.flatnonzero(dead)[0])
            raise SingularityError(
                f"zero input spectrum in period {p} at frequency {w[m]:.6g}")
        g_per[p] = (yp * dp.conj()) / denom
    g_hat = g_per.mean(axis=0)
    variance = (np.abs(g_per - g_hat) ** 2).sum(axis=0) / (periods * (periods - 1))
    radius = RADIUS_FACTOR_99 * np.sqrt(variance)
    return FrfEstimate(w, g_hat, variance, radius, periods)


def sensitivity_check(plant: StateSpace, controller: StateSpace,
                      d_spectra) -> list:
    """Steady-state prediction of the per-period input spectrum,
    U_p(w) = (I - C_loop(w) G(w))^-1 D_p(w), ignoring transients and noise.
    Used as an independent oracle against measured input DFTs."""
    out = []
    for spec in d_spectra:
        w = spec.frequencies
        pred = np.empty((w.size, plant.n_u), dtype=complex)
        for m, wm in enumerate(w):
            pred[m] = du_sensitivity(plant, controller, wm) @ spec.values[m]
        out.append(SpectrumSamples(w, pred))
    return out

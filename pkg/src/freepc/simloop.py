"""Receding-horizon closed-loop execution and Monte Carlo evaluation.

``run_rhc`` drives a plant with the data-driven controller: a warmup input
sequence populates the past window, then at every step the finite-horizon
problem is rebuilt from the sliding window, solved, and only the first input
is applied.  ``run_mpc_benchmark`` runs the identical loop with predictions
from the true model (state reconstructed from the past window by least
squares) — the similarly-tuned benchmark the data-driven schemes are measured
against.  ``monte_carlo`` repeats collect -> estimate -> control over many
noise realizations and tabulates mean and variance of the closed-loop cost.
"""

import csv
import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import InfeasibleError, SingularityError
from .freqdomain import DataEquations, freq_data_equations, frf_to_freq_data
from .frf import ClosedLoopExperiment, estimate_frf, run_experiment
from .lti import StateSpace
from .numcore import check_finite, least_squares
from .ocp import OcpConfig, _box_bounds, _weight_matrix, build_ocp, solve_ocp
from .qp import QpProblem, SolverStatus, solve_qp
from .signals import MultisineSpec, TimeSeries


@dataclass(frozen=True)
class RhcConfig:
    """Everything a receding-horizon run needs besides the plant.

    ``eqs`` may be None only for the model-based benchmark.  ``warmup`` is the
    open-loop input sequence applied before control starts; its last T_bar
    samples (with the measured outputs) seed the window.
    """

    ocp: OcpConfig
    eqs: DataEquations | None
    sim_length: int
    warmup: np.ndarray
    noise_std: float = 0.0
    rng_seed: object = 0

    def __post_init__(self):
        if int(self.sim_length) < 1:
            raise ValueError("sim_length must be at least 1")
        object.__setattr__(self, "sim_length", int(self.sim_length))
        w = np.asarray(self.warmup, dtype=float)
        if w.ndim == 1:
            w = w.reshape(-1, 1)
        check_finite(w, "warmup")
        if w.shape[0] < self.ocp.T_bar:
            raise ValueError("warmup must cover at least T_bar steps")
        w = w.copy(); w.flags.writeable = False
        object.__setattr__(self, "warmup", w)
        if self.noise_std < 0 or not np.isfinite(self.noise_std):
            raise ValueError("noise_std must be finite and nonnegative")


@dataclass(frozen=True)
class RhcResult:
    u: TimeSeries
    y: TimeSeries
    per_step_status: list
    cost_J: float

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            header = (["step"] + [f"u{i}" for i in range(self.u.n_v)]
                      + [f"y{i}" for i in range(self.y.n_v)] + ["status"])
            writer.writerow(header)
            for k in range(len(self.u)):
                row = [str(k)]
                row += [f"{v:.17g}" for v in self.u.samples[k]]
                row += [f"{v:.17g}" for v in self.y.samples[k]]
                row.append(self.per_step_status[k])
                writer.writerow(row)


def _measure(plant, x, u_k, noise_row):
    y = plant.C @ x + plant.D @ u_k + noise_row
    x_next = plant.A @ x + plant.B @ u_k
    return y, x_next


def _stage_cost(u, y, Q, R):
    return float(np.einsum("ij,jk,ik->", y, Q, y)
                 + np.einsum("ij,jk,ik->", u, R, u))


def warmup_window(plant, warmup, T_bar, noise_std, rng):
    """Apply ``warmup`` open-loop from rest; returns the last T_bar inputs and
    measured outputs (as lists of rows) plus the reached state."""
    n_u, n_y = plant.n_u, plant.n_y
    warmup = np.asarray(warmup, dtype=float).reshape(-1, n_u)
    if warmup.shape[0] < T_bar:
        raise ValueError("warmup must cover at least T_bar steps")
    x = np.zeros(plant.n_x)
    win_u, win_y = [], []
    for u_k in warmup:
        noise = rng.standard_normal(n_y) * noise_std
        y_k, x = _measure(plant, x, u_k, noise)
        win_u.append(np.asarray(u_k, dtype=float))
        win_y.append(y_k)
    return win_u[-T_bar:], win_y[-T_bar:], x


def _run_loop(plant, cfg, solve_step, on_step=None):
    """Common warmup + receding-horizon skeleton; ``solve_step`` maps the
    flattened past window to (first input, status string)."""
    Tb = cfg.ocp.T_bar
    n_u, n_y = plant.n_u, plant.n_y
    if cfg.warmup.shape[1] != n_u:
        raise ValueError("warmup channel count does not match the plant")
    rng = np.random.default_rng(cfg.rng_seed)
    win_u, win_y, x = warmup_window(plant, cfg.warmup, Tb, cfg.noise_std, rng)

    us, ys, statuses = [], [], []
    for k in range(cfg.sim_length):
        u_past = np.concatenate(win_u)
        y_past = np.concatenate(win_y)
        u_k, status = solve_step(k, u_past, y_past, on_step)
        noise = rng.standard_normal(n_y) * cfg.noise_std
        y_k, x = _measure(plant, x, u_k, noise)
        us.append(u_k); ys.append(y_k); statuses.append(status)
        win_u = win_u[1:] + [u_k]
        win_y = win_y[1:] + [y_k]

    u_arr, y_arr = np.array(us), np.array(ys)
    Q = _weight_matrix(cfg.ocp.Q, n_y, "Q")
    R = _weight_matrix(cfg.ocp.R, n_u, "R")
    J = _stage_cost(u_arr, y_arr, Q, R)
    return RhcResult(TimeSeries(u_arr), TimeSeries(y_arr), statuses, J)


def run_rhc(plant: StateSpace, cfg: RhcConfig, on_step=None) -> RhcResult:
    """Data-driven receding-horizon control; aborts with InfeasibleError
    (carrying the step index) if the solver fails at any step."""
    if cfg.eqs is None:
        raise ValueError("run_rhc needs data equations; "
                         "use run_mpc_benchmark for the model-based loop")
    if cfg.eqs.n_u != plant.n_u or cfg.eqs.n_y != plant.n_y:
        raise ValueError("data equations channel counts do not match the plant")

    def solve_step(k, u_past, y_past, hook):
        prob = build_ocp(cfg.eqs, u_past, y_past, cfg.ocp)
        sol = solve_ocp(prob)
        if sol.solver_status is not SolverStatus.OPTIMAL:
            raise InfeasibleError(k, sol.solver_status.value)
        if hook is not None:
            hook(k, u_past, y_past, sol)
        return sol.u_future[0], sol.solver_status.value

    return _run_loop(plant, cfg, solve_step, on_step)


def _prediction_matrices(plant, horizon):
    """Batch maps x0, u_[0,h-1] -> y_[0,h-1]: y = Phi x0 + Gam u."""
    n_u, n_y, n_x = plant.n_u, plant.n_y, plant.n_x
    powers = [np.eye(n_x)]
    for _ in range(horizon):
        powers.append(plant.A @ powers[-1])
    Phi = np.vstack([plant.C @ powers[t] for t in range(horizon)])
    Gam = np.zeros((horizon * n_y, horizon * n_u))
    for t in range(horizon):
        Gam[t * n_y:(t + 1) * n_y, t * n_u:(t + 1) * n_u] = plant.D
        for j in range(t):
            blk = plant.C @ powers[t - 1 - j] @ plant.B
            Gam[t * n_y:(t + 1) * n_y, j * n_u:(j + 1) * n_u] = blk
    return Phi, Gam, powers


def run_mpc_benchmark(plant: StateSpace, cfg: RhcConfig, on_step=None) -> RhcResult:
    """Model-based twin of run_rhc: the state is reconstructed from the past
    window by least squares, predictions come from the true matrices, cost
    accounting is identical.  ``cfg.eqs`` is ignored."""
    T, Tb = cfg.ocp.T, cfg.ocp.T_bar
    n_u, n_y = plant.n_u, plant.n_y
    O, Mpast, powers = _prediction_matrices(plant, Tb)
    A_Tb = powers[Tb]
    reach = np.hstack([powers[Tb - 1 - j] @ plant.B for j in range(Tb)]) \
        if Tb else np.zeros((plant.n_x, 0))
    Phi, Gam, _ = _prediction_matrices(plant, T)

    u_lo, u_hi = _box_bounds(cfg.ocp.u_box, n_u, "u_box")
    y_lo, y_hi = _box_bounds(cfg.ocp.y_box, n_y, "y_box")
    Q = _weight_matrix(cfg.ocp.Q, n_y, "Q")
    R = _weight_matrix(cfg.ocp.R, n_u, "R")
    nz = T * (n_u + n_y)
    H = np.zeros((nz, nz))
    H[:T * n_u, :T * n_u] = 2.0 * np.kron(np.eye(T), R)
    H[T * n_u:, T * n_u:] = 2.0 * np.kron(np.eye(T), Q)
    A_eq = np.hstack([-Gam, np.eye(T * n_y)])
    C_in = np.eye(nz)
    lo = np.concatenate([np.tile(u_lo, T), np.tile(y_lo, T)])
    hi = np.concatenate([np.tile(u_hi, T), np.tile(y_hi, T)])

    def solve_step(k, u_past, y_past, hook):
        x0 = least_squares(O, y_past - Mpast @ u_past)
        x_now = A_Tb @ x0 + reach @ u_past
        qp = QpProblem(H, np.zeros(nz), A_eq, Phi @ x_now, C_in, lo, hi)
        res = solve_qp(qp)
        if res.status is not SolverStatus.OPTIMAL:
            raise InfeasibleError(k, res.status.value)
        if hook is not None:
            hook(k, u_past, y_past, res)
        return res.z[:n_u], res.status.value

    return _run_loop(plant, cfg, solve_step, on_step)


@dataclass(frozen=True)
class CampaignConfig:
    """Collect-estimate-control recipe for one Monte Carlo cell; the
    excitation's period count is overridden by each table row's P."""

    controller: StateSpace
    excitation: MultisineSpec
    exp_noise_std: float
    discard_periods: int
    ocp: OcpConfig
    sim_length: int
    warmup: np.ndarray
    rhc_noise_std: float = 0.0


class McRow(NamedTuple):
    periods: int
    mean_J: float
    var_J: float
    failures: int


def _single_run(plant, cc: CampaignConfig, periods: int, seed) -> float:
    exp_seed, rhc_seed = seed.spawn(2)
    exc = dataclasses.replace(cc.excitation, periods=periods)
    exp = ClosedLoopExperiment(plant, cc.controller, exc, cc.exp_noise_std,
                               exp_seed, cc.discard_periods)
    d, u, y = run_experiment(exp)
    est = estimate_frf(d, u, y, exc.period_length, exc.frequencies)
    data = frf_to_freq_data(est.frequencies, est.g_hat)
    eqs = freq_data_equations(data, cc.ocp.depth)
    rhc = RhcConfig(cc.ocp, eqs, cc.sim_length, cc.warmup,
                    cc.rhc_noise_std, rhc_seed)
    return run_rhc(plant, rhc).cost_J


def _run_cell(args):
    plant, cc, periods, seed = args
    try:
        return periods, _single_run(plant, cc, periods, seed), None
    except (InfeasibleError, SingularityError) as exc:
        return periods, None, str(exc)


def monte_carlo(plant: StateSpace, base_cfg: CampaignConfig, periods_list,
                runs: int, seed, workers: int | None = None) -> list[McRow]:
    """For each P: ``runs`` independent collect -> FRF -> FreePC campaigns with
    fresh noise (fixed multi-sine phases); returns per-P cost statistics.
    Failed runs are excluded and counted.  Deterministic in ``seed``
    regardless of ``workers``."""
    if runs < 2:
        raise ValueError("need at least 2 runs for a variance")
    periods_list = [int(p) for p in periods_list]
    root = np.random.SeedSequence(seed)
    children = root.spawn(len(periods_list) * runs)
    tasks = [(plant, base_cfg, p, children[i * runs + j])
             for i, p in enumerate(periods_list) for j in range(runs)]
    if workers is not None and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_cell, tasks, chunksize=1))
    else:
        outcomes = [_run_cell(t) for t in tasks]

    rows = []
    for i, p in enumerate(periods_list):
        cell = outcomes[i * runs:(i + 1) * runs]
        costs = [c for (_, c, _) in cell if c is not None]
        failures = runs - len(costs)
        if len(costs) >= 2:
            mean = float(np.mean(costs))
            var = float(np.var(costs, ddof=1))
        else:
            mean = float(costs[0]) if costs else float("nan")
            var = float("nan")
        rows.append(McRow(p, mean, var, failures))
    return rows


def mc_table_to_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["P", "mean_J", "var_J", "failures"])
        for r in rows:
            writer.writerow([str(r.periods), f"{r.mean_J:.17g}",
                             f"{r.var_J:.17g}", str(r.failures)])


def mc_table_from_csv(path) -> list[McRow]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    out = []
    for row in rows[1:]:
        if row:
            out.append(McRow(int(row[0]), float(row[1]), float(row[2]),
                             int(row[3])))
    return out

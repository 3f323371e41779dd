"""Finite-horizon data-driven optimal control problems.

Builds the receding-horizon subproblem

    min  sum_i y_i'Q y_i + u_i'R u_i  +  lambda_g ||g||_1 + lambda_sigma ||sigma||_1
    s.t. [u_past; u; y_past + sigma; y] = (data matrix) g,   u in U-box, y in Y-box

over decision variables (u, y, g, sigma) and lowers it to a convex QP through
the usual epigraph variables t_g, t_sigma for the l1 terms.  The same builder
serves both data-equation flavours (Hankel or frequency-domain); only the
``DataEquations`` passed in differ.  In nominal mode (exact data) sigma and
the l1 terms are dropped entirely and g is free.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InfeasibleError
from .freqdomain import DataEquations
from .numcore import check_finite
from .qp import QpProblem, QpResult, SolverStatus, solve_qp

__all__ = [
    "OcpConfig", "OcpProblem", "OcpSolution", "OcpLayout",
    "build_ocp", "to_qp", "solve_ocp", "ocp_to_dict", "solution_to_dict",
    "QpProblem", "QpResult", "SolverStatus", "solve_qp",
]


def _weight_matrix(w, dim: int, name: str) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim == 0:
        w = float(w) * np.eye(dim)
    if w.shape != (dim, dim):
        raise ValueError(f"{name} must be a scalar or a {dim}x{dim} matrix")
    check_finite(w, name)
    if not np.allclose(w, w.T, atol=1e-12 * (1 + np.abs(w).max())):
        raise ValueError(f"{name} must be symmetric")
    if dim and np.linalg.eigvalsh(w)[0] < -1e-10 * (1 + np.abs(w).max()):
        raise ValueError(f"{name} must be positive semidefinite")
    return w


def _box_bounds(box, n_ch: int, name: str):
    """Normalize a per-channel (lo, hi) spec; a single pair broadcasts."""
    arr = np.asarray(box, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, 2)
    if arr.shape == (1, 2) and n_ch > 1:
        arr = np.repeat(arr, n_ch, axis=0)
    if arr.shape != (n_ch, 2):
        raise ValueError(f"{name} must give [lo, hi] per channel")
    if np.any(np.isnan(arr)):
        raise ValueError(f"{name} contains NaN")
    if np.any(arr[:, 0] > arr[:, 1]):
        raise ValueError(f"{name} has lo > hi")
    return arr[:, 0], arr[:, 1]


@dataclass(frozen=True)
class OcpConfig:
    """Weights, horizons, regularization and box constraints.

    ``u_box``/``y_box`` are (lo, hi) pairs, one per channel (a single pair is
    broadcast); use +-inf for an unconstrained side.  ``nominal_mode`` drops
    the slack sigma and both l1 terms — only valid with exact data.
    """

    T: int
    T_bar: int
    Q: object = 1.0
    R: object = 1.0
    lambda_g: float = 0.0
    lambda_sigma: float = 0.0
    u_box: tuple = ((-np.inf, np.inf),)
    y_box: tuple = ((-np.inf, np.inf),)
    nominal_mode: bool = False

    def __post_init__(self):
        if int(self.T) < 1 or int(self.T_bar) < 1:
            raise ValueError("T and T_bar must be at least 1")
        object.__setattr__(self, "T", int(self.T))
        object.__setattr__(self, "T_bar", int(self.T_bar))
        if self.lambda_g < 0 or self.lambda_sigma < 0:
            raise ValueError("regularization weights must be nonnegative")

    @property
    def depth(self) -> int:
        return self.T_bar + self.T


@dataclass(frozen=True)
class OcpProblem:
    eqs: DataEquations
    u_past: np.ndarray
    y_past: np.ndarray
    config: OcpConfig

    def __post_init__(self):
        cfg, eqs = self.config, self.eqs
        if eqs.depth != cfg.depth:
            raise ValueError(
                f"data equations have depth {eqs.depth}, config needs {cfg.depth}")
        up = np.asarray(self.u_past, dtype=float).reshape(-1)
        yp = np.asarray(self.y_past, dtype=float).reshape(-1)
        if up.size != cfg.T_bar * eqs.n_u:
            raise ValueError("u_past has wrong length")
        if yp.size != cfg.T_bar * eqs.n_y:
            raise ValueError("y_past has wrong length")
        check_finite(up, "u_past")
        check_finite(yp, "y_past")
        up.flags.writeable = False
        yp.flags.writeable = False
        object.__setattr__(self, "u_past", up)
        object.__setattr__(self, "y_past", yp)


@dataclass(frozen=True)
class OcpLayout:
    """Column slices of the stacked QP variable z = (u, y, g, sigma, t_g, t_sigma)."""

    u: slice
    y: slice
    g: slice
    sigma: slice | None
    t_g: slice | None
    t_sigma: slice | None
    total: int


@dataclass(frozen=True)
class OcpSolution:
    u_future: np.ndarray  # (T, n_u)
    y_future: np.ndarray  # (T, n_y)
    g: np.ndarray
    sigma: np.ndarray
    objective: float
    solver_status: SolverStatus
    qp_result: QpResult = field(repr=False, compare=False, default=None)


def build_ocp(eqs: DataEquations, u_past, y_past, config: OcpConfig) -> OcpProblem:
    return OcpProblem(eqs, u_past, y_past, config)


def to_qp(p: OcpProblem):
    """Lower the OCP to a canonical QP; returns ``(QpProblem, OcpLayout)``."""
    cfg = p.config
    eqs = p.eqs
    n_u, n_y, w = eqs.n_u, eqs.n_y, eqs.width
    T, Tb = cfg.T, cfg.T_bar
    nu_f, ny_f, ny_p = T * n_u, T * n_y, Tb * n_y
    Q = _weight_matrix(cfg.Q, n_y, "Q")
    R = _weight_matrix(cfg.R, n_u, "R")
    nominal = cfg.nominal_mode

    off = 0
    sl_u = slice(off, off + nu_f); off += nu_f
    sl_y = slice(off, off + ny_f); off += ny_f
    sl_g = slice(off, off + w); off += w
    if nominal:
        sl_s = sl_tg = sl_ts = None
    else:
        sl_s = slice(off, off + ny_p); off += ny_p
        sl_tg = slice(off, off + w); off += w
        sl_ts = slice(off, off + ny_p); off += ny_p
    n = off
    layout = OcpLayout(sl_u, sl_y, sl_g, sl_s, sl_tg, sl_ts, n)

    U = eqs.u_block()
    Y = eqs.y_block()
    Up, Uf = U[: Tb * n_u], U[Tb * n_u:]
    Yp, Yf = Y[: ny_p], Y[ny_p:]

    me = (n_u + n_y) * (Tb + T)
    A = np.zeros((me, n))
    b = np.zeros(me)
    r = 0
    A[r:r + Tb * n_u, sl_g] = Up
    b[r:r + Tb * n_u] = p.u_past
    r += Tb * n_u
    A[r:r + nu_f, sl_g] = Uf
    A[r:r + nu_f, sl_u] = -np.eye(nu_f)
    r += nu_f
    A[r:r + ny_p, sl_g] = Yp
    if not nominal:
        A[r:r + ny_p, sl_s] = -np.eye(ny_p)
    b[r:r + ny_p] = p.y_past
    r += ny_p
    A[r:r + ny_f, sl_g] = Yf
    A[r:r + ny_f, sl_y] = -np.eye(ny_f)

    # box constraints on u and y, plus epigraph rows |g| <= t_g, |sigma| <= t_sigma
    u_lo, u_hi = _box_bounds(cfg.u_box, n_u, "u_box")
    y_lo, y_hi = _box_bounds(cfg.y_box, n_y, "y_box")
    n_epi = 0 if nominal else 2 * (w + ny_p)
    C = np.zeros((nu_f + ny_f + n_epi, n))
    lo = np.empty(C.shape[0])
    hi = np.empty(C.shape[0])
    C[:nu_f, sl_u] = np.eye(nu_f)
    lo[:nu_f] = np.tile(u_lo, T)
    hi[:nu_f] = np.tile(u_hi, T)
    C[nu_f:nu_f + ny_f, sl_y] = np.eye(ny_f)
    lo[nu_f:nu_f + ny_f] = np.tile(y_lo, T)
    hi[nu_f:nu_f + ny_f] = np.tile(y_hi, T)
    if not nominal:
        r = nu_f + ny_f
        for var_sl, t_sl, count in ((sl_g, sl_tg, w), (sl_s, sl_ts, ny_p)):
            block = slice(r, r + count)
            C[block, var_sl] = np.eye(count)
            C[block, t_sl] = -np.eye(count)
            lo[block] = -np.inf
            hi[block] = 0.0
            r += count
            block = slice(r, r + count)
            C[block, var_sl] = np.eye(count)
            C[block, t_sl] = np.eye(count)
            lo[block] = 0.0
            hi[block] = np.inf
            r += count

    H = np.zeros((n, n))
    H[sl_u, sl_u] = 2.0 * np.kron(np.eye(T), R)
    H[sl_y, sl_y] = 2.0 * np.kron(np.eye(T), Q)
    q = np.zeros(n)
    if not nominal:
        q[sl_tg] = cfg.lambda_g
        q[sl_ts] = cfg.lambda_sigma

    return QpProblem(H, q, A, b, C, lo, hi), layout


def solve_ocp(p: OcpProblem, tol: float = 1e-9, max_iter: int = 200) -> OcpSolution:
    """Solve the OCP; the reported objective re-evaluates the original cost
    (quadratic stage cost plus the actual l1 norms) at the returned point."""
    qp, layout = to_qp(p)
    res = solve_qp(qp, tol=tol, max_iter=max_iter)
    cfg, eqs = p.config, p.eqs
    z = res.z
    u = z[layout.u].reshape(cfg.T, eqs.n_u)
    y = z[layout.y].reshape(cfg.T, eqs.n_y)
    g = z[layout.g].copy()
    sigma = (np.zeros(cfg.T_bar * eqs.n_y) if layout.sigma is None
             else z[layout.sigma].copy())
    Q = _weight_matrix(cfg.Q, eqs.n_y, "Q")
    R = _weight_matrix(cfg.R, eqs.n_u, "R")
    obj = float(np.einsum("ij,jk,ik->", y, Q, y) + np.einsum("ij,jk,ik->", u, R, u)
                + cfg.lambda_g * np.abs(g).sum()
                + (0.0 if layout.sigma is None
                   else cfg.lambda_sigma * np.abs(sigma).sum()))
    return OcpSolution(u, y, g, sigma, obj, res.status, res)


def solve_ocp_or_raise(p: OcpProblem, step: int, tol: float = 1e-9) -> OcpSolution:
    """solve_ocp, raising InfeasibleError tagged with ``step`` on non-optimal status."""
    sol = solve_ocp(p, tol=tol)
    if sol.solver_status is not SolverStatus.OPTIMAL:
        raise InfeasibleError(step, sol.solver_status.value)
    return sol


def ocp_to_dict(p: OcpProblem) -> dict:
    """Plain-dict form of the problem (JSON-ready) for the dump-ocp debug hook."""
    return {
        "config": {
            "T": p.config.T, "T_bar": p.config.T_bar,
            "Q": np.asarray(p.config.Q, dtype=float).tolist(),
            "R": np.asarray(p.config.R, dtype=float).tolist(),
            "lambda_g": p.config.lambda_g, "lambda_sigma": p.config.lambda_sigma,
            "u_box": np.asarray(p.config.u_box, dtype=float).tolist(),
            "y_box": np.asarray(p.config.y_box, dtype=float).tolist(),
            "nominal_mode": p.config.nominal_mode,
        },
        "source": p.eqs.source,
        "depth": p.eqs.depth,
        "n_u": p.eqs.n_u,
        "n_y": p.eqs.n_y,
        "g_dim": p.eqs.width,
        "u_past": p.u_past.tolist(),
        "y_past": p.y_past.tolist(),
        "data_matrix": p.eqs.matrix.tolist(),
    }


def solution_to_dict(s: OcpSolution) -> dict:
    return {
        "status": s.solver_status.value,
        "objective": s.objective,
        "u_future": s.u_future.tolist(),
        "y_future": s.y_future.tolist(),
        "g": s.g.tolist(),
        "sigma": s.sigma.tolist(),
    }

"""Dense convex QP solver: Mehrotra predictor-corrector primal-dual
interior-point method, with a direct regularized-KKT path when no
inequalities are present.

Canonical problem:

    minimize    0.5 z' H z + q' z
    subject to  A z  = b
                lo <= C z <= hi        (entries of lo/hi may be +-inf)

The KKT systems carry a small diagonal shift so rank-deficient equality
blocks and singular Hessians (both routine here: the data-equation rows are
redundant and the g-directions are free) stay factorizable; iterative
refinement against the unshifted matrix restores the accuracy the shift
costs, and the shift is escalated only when that refinement fails to
contract. Everything is deterministic: identical inputs produce identical
iterates.
"""

import enum
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .numcore import check_finite

KKT_SHIFT = 1e-12
STEP_SCALE = 0.995
DUAL_BLOWUP = 1e10


class SolverStatus(enum.Enum):
    OPTIMAL = "optimal"
    MAX_ITER = "max_iter"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class QpProblem:
    """Data of the canonical QP; use ``ineq_lo``/``ineq_hi`` of ``+-inf`` to
    drop a side."""

    hessian: np.ndarray
    linear: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    ineq_matrix: np.ndarray
    ineq_lo: np.ndarray
    ineq_hi: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.linear).size
        H = np.asarray(self.hessian, dtype=float).reshape(n, n)
        check_finite(H, "hessian")
        if not np.allclose(H, H.T, atol=1e-10 * (1 + np.abs(H).max())):
            raise ValueError("hessian must be symmetric")
        if n and scipy.linalg.eigvalsh(H)[0] < -1e-8 * (1 + np.abs(H).max()):
            raise ValueError("hessian must be positive semidefinite")
        q = np.asarray(self.linear, dtype=float).reshape(n)
        A = np.asarray(self.eq_matrix, dtype=float).reshape(-1, n)
        b = np.asarray(self.eq_rhs, dtype=float).reshape(A.shape[0])
        C = np.asarray(self.ineq_matrix, dtype=float).reshape(-1, n)
        lo = np.asarray(self.ineq_lo, dtype=float).reshape(C.shape[0])
        hi = np.asarray(self.ineq_hi, dtype=float).reshape(C.shape[0])
        check_finite(q, "linear"); check_finite(A, "eq_matrix")
        check_finite(b, "eq_rhs"); check_finite(C, "ineq_matrix")
        if np.any(lo > hi):
            raise ValueError("ineq_lo must not exceed ineq_hi")
        for name, val in (("hessian", H), ("linear", q), ("eq_matrix", A),
                          ("eq_rhs", b), ("ineq_matrix", C),
                          ("ineq_lo", lo), ("ineq_hi", hi)):
            val = val.copy(); val.flags.writeable = False
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.linear.size

    def objective(self, z: np.ndarray) -> float:
        z = np.asarray(z, dtype=float)
        return float(0.5 * z @ self.hessian @ z + self.linear @ z)


@dataclass(frozen=True)
class QpResult:
    z: np.ndarray
    status: SolverStatus
    iterations: int
    primal_residual: float  # inf-norm of eq/ineq violation
    dual_residual: float    # inf-norm of the stationarity residual
    gap: float              # mean complementarity (0 when no inequalities)


def _one_sided(qp: QpProblem):
    """Rewrite the two-sided inequalities as G z <= h, skipping infinite sides."""
    rows, rhs = [], []
    for c, lo, hi in zip(qp.ineq_matrix, qp.ineq_lo, qp.ineq_hi):
        if np.isfinite(hi):
            rows.append(c); rhs.append(hi)
        if np.isfinite(lo):
            rows.append(-c); rhs.append(-lo)
    if rows:
        return np.array(rows), np.array(rhs)
    return np.zeros((0, qp.n)), np.zeros(0)


def _kkt_solve(P, A, rhs, refine_target=5e-15):
    """Solve [[P, A'], [A, 0]] x = rhs through a shifted factorization,
    polishing with iterative refinement against the unshifted matrix.
    The shift is escalated when the factorization comes out singular or the
    refinement fails to contract."""
    n, me = P.shape[0], A.shape[0]
    K = np.zeros((n + me, n + me))
    K[:n, :n] = P
    if me:
        K[:n, n:] = A.T
        K[n:, :n] = A
    delta = KKT_SHIFT
    x = np.zeros(n + me)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        for _ in range(5):
            Kreg = K.copy()
            Kreg[:n, :n] += delta * np.eye(n)
            if me:
                Kreg[n:, n:] -= delta * np.eye(me)
            lu = scipy.linalg.lu_factor(Kreg)
            piv = np.abs(np.diag(lu[0]))
            if np.all(np.isfinite(piv)) and piv.min() > 0.0:
                x = scipy.linalg.lu_solve(lu, rhs)
                scale = (np.abs(rhs).max(initial=1.0)
                         + np.abs(K).max(initial=0.0) * np.abs(x).max(initial=0.0))
                for _ in range(40):
                    r = rhs - K @ x
                    if np.abs(r).max(initial=0.0) <= refine_target * scale:
                        break
                    x = x + scipy.linalg.lu_solve(lu, r)
                r = np.abs(rhs - K @ x).max(initial=0.0)
                if np.isfinite(r) and r <= 1e-6 * scale:
                    return x
            delta *= 1e4
    return x


def _residuals(qp: QpProblem, z: np.ndarray, G: np.ndarray, h: np.ndarray,
               y: np.ndarray, lam: np.ndarray):
    r_d = qp.hessian @ z + qp.linear
    if qp.eq_matrix.shape[0]:
        r_d = r_d + qp.eq_matrix.T @ y
    if G.shape[0]:
        r_d = r_d + G.T @ lam
    pres = 0.0
    if qp.eq_matrix.shape[0]:
        pres = np.abs(qp.eq_matrix @ z - qp.eq_rhs).max()
    if G.shape[0]:
        pres = max(pres, float(np.maximum(G @ z - h, 0.0).max()))
    return float(pres), float(np.abs(r_d).max(initial=0.0))


def solve_qp(qp: QpProblem, tol: float = 1e-9, max_iter: int = 200) -> QpResult:
    """Solve the QP to the requested KKT tolerance.

    Status ``OPTIMAL`` certifies primal feasibility, stationarity and
    complementarity at relative tolerance ``tol``; ``INFEASIBLE`` is reported
    when the duals diverge while primal feasibility stalls (or the equality
    system itself is inconsistent); otherwise ``MAX_ITER`` returns the best
    iterate found.
    """
    n = qp.n
    A, b = qp.eq_matrix, qp.eq_rhs
    me = A.shape[0]
    G, h = _one_sided(qp)
    mi = G.shape[0]
    bscale = 1.0 + max(np.abs(b).max(initial=0.0), np.abs(h).max(initial=0.0))
    qscale = 1.0 + np.abs(qp.linear).max(initial=0.0)

    if mi == 0:
        # pure equality-constrained QP: one refined KKT solve
        if me:
            z_feas, res, *_ = np.linalg.lstsq(A, b, rcond=None)
            if np.abs(A @ z_feas - b).max(initial=0.0) > tol * bscale:
                return QpResult(z_feas, SolverStatus.INFEASIBLE, 0,
                                float(np.abs(A @ z_feas - b).max()), np.inf, 0.0)
        rhs = np.concatenate([-qp.linear, b])
        sol = _kkt_solve(qp.hessian, A, rhs)
        z, y = sol[:n], sol[n:]
        pres, dres = _residuals(qp, z, G, h, y, np.zeros(0))
        if pres <= tol * bscale and dres <= tol * qscale:
            status = SolverStatus.OPTIMAL
        else:
            status = SolverStatus.MAX_ITER
        return QpResult(z, status, 1, pres, dres, 0.0)

    # interior-point initialization (one least-squares-like KKT solve)
    P0 = qp.hessian + G.T @ G
    rhs = np.concatenate([-qp.linear + G.T @ h, b])
    sol = _kkt_solve(P0, A, rhs)
    z, y = sol[:n], sol[n:]
    zhat = G @ z - h
    s = -zhat
    shift = -s.min()
    if shift >= 0:
        s = s + (1.0 + shift)
    lam = zhat.copy()
    shift = -lam.min()
    if shift >= 0:
        lam = lam + (1.0 + shift)

    status = SolverStatus.MAX_ITER
    iterations = 0
    best = (np.inf, z, y, s, lam)  # score-tagged best iterate seen
    since_best = 0
    for it in range(1, max_iter + 1):
        iterations = it
        r_d = qp.hessian @ z + qp.linear + G.T @ lam
        if me:
            r_d = r_d + A.T @ y
        r_p = (A @ z - b) if me else np.zeros(0)
        r_g = G @ z + s - h
        mu = float(s @ lam) / mi
        pres, dres = _residuals(qp, z, G, h, y, lam)
        obj_scale = 1.0 + abs(qp.objective(z))
        score = max(pres / (tol * bscale), dres / (tol * qscale),
                    mu / (tol * obj_scale))
        if score < best[0]:
            best = (score, z.copy(), y.copy(), s.copy(), lam.copy())
            since_best = 0
        else:
            since_best += 1
        if score <= 1.0:
            status = SolverStatus.OPTIMAL
            break
        if since_best >= 12:
            # numerical limit cycle: no progress in a dozen iterations
            break
        dual_norm = max(np.abs(lam).max(initial=0.0), np.abs(y).max(initial=0.0))
        if dual_norm > DUAL_BLOWUP * bscale and pres > 1e3 * tol * bscale:
            status = SolverStatus.INFEASIBLE
            break
        if mu <= 1e-2 * tol * obj_scale and pres > np.sqrt(tol) * bscale:
            status = SolverStatus.INFEASIBLE
            break

        D = lam / s
        Pbar = qp.hessian + (G.T * D) @ G
        K = np.zeros((n + me, n + me))
        K[:n, :n] = Pbar
        if me:
            K[:n, n:] = A.T
            K[n:, :n] = A
        lu = None

        def direction(r_c):
            """Newton direction for complementarity target r_c; the trailing
            value is the achieved relative residual of the inner solve."""
            w = (lam * r_g - r_c) / s
            top = -(r_d + G.T @ w)
            rhs_full = np.concatenate([top, -r_p]) if me else top
            sol = scipy.linalg.lu_solve(lu, rhs_full)
            scale = 1.0 + np.abs(rhs_full).max()
            rel = np.inf
            for _ in range(10):
                resid = rhs_full - K @ sol
                rel = float(np.abs(resid).max()) / scale
                if not np.isfinite(rel) or rel <= 1e-12:
                    break
                sol = sol + scipy.linalg.lu_solve(lu, resid)
            dz = sol[:n]
            dy = sol[n:] if me else np.zeros(0)
            ds = -r_g - G @ dz
            dlam = -(r_c + lam * ds) / s
            return dz, dy, ds, dlam, rel

        # factor with a small static shift, escalating it only when the
        # factorization is unusable: zero pivots, or the refined predictor
        # solve failing to contract against the unshifted matrix (the pivot
        # magnitudes themselves say nothing -- a legitimate shifted pivot on
        # a free direction is tiny by construction)
        delta = KKT_SHIFT
        best_dir = None  # (relative residual, factorization, direction)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            for _ in range(5):
                Kreg = K.copy()
                Kreg[:n, :n] += delta * np.eye(n)
                if me:
                    Kreg[n:, n:] -= delta * np.eye(me)
                lu = scipy.linalg.lu_factor(Kreg)
                piv = np.abs(np.diag(lu[0]))
                if np.all(np.isfinite(piv)) and piv.min() > 0.0:
                    aff = direction(lam * s)
                    rel = aff[-1] if np.isfinite(aff[-1]) else np.inf
                    if best_dir is None or rel < best_dir[0]:
                        best_dir = (rel, lu, aff)
                    if rel <= 1e-8:
                        break
                delta *= 1e4
        if best_dir is None:
            aff = direction(lam * s)  # every attempt singular; take the last
        else:
            _, lu, aff = best_dir
        dz_a, dy_a, ds_a, dlam_a, _ = aff
        ap = min(1.0, _max_step(s, ds_a))
        ad = min(1.0, _max_step(lam, dlam_a))
        mu_aff = float((s + ap * ds_a) @ (lam + ad * dlam_a)) / mi
        sigma = min(1.0, (max(mu_aff, 0.0) / mu) ** 3)

        # corrector
        r_c = lam * s + ds_a * dlam_a - sigma * mu * np.ones(mi)
        dz, dy, ds, dlam, _ = direction(r_c)
        ap = min(1.0, STEP_SCALE * _max_step(s, ds))
        ad = min(1.0, STEP_SCALE * _max_step(lam, dlam))
        z = z + ap * dz
        y = y + ad * dy
        s = s + ap * ds
        lam = lam + ad * dlam

    if status is not SolverStatus.INFEASIBLE and best[0] < np.inf:
        # report the best iterate; accept a stalled one as optimal when it is
        # feasible and stationary at tol and only complementarity lags (the
        # attainable floor scales with conditioning, not with correctness)
        _, z, y, s, lam = best
        pres, dres = _residuals(qp, z, G, h, y, lam)
        mu = float(s @ lam) / mi
        if status is not SolverStatus.OPTIMAL:
            if (pres <= tol * bscale and dres <= tol * qscale
                    and mu <= 100.0 * tol * (1.0 + abs(qp.objective(z)))):
                status = SolverStatus.OPTIMAL
        gap = mu
    else:
        pres, dres = _residuals(qp, z, G, h, y, lam)
        gap = float(s @ lam) / mi
    return QpResult(z, status, iterations, pres, dres, gap)


def _max_step(v: np.ndarray, dv: np.ndarray) -> float:
    """Largest alpha <= 1e10 with v + alpha*dv >= 0 (v > 0 assumed)."""
    neg = dv < 0
    if not np.any(neg):
        return 1e10
    return float(np.min(-v[neg] / dv[neg]))

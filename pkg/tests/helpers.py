"""Shared test utilities.

The oracles here are deliberately independent re-derivations (plain loops,
no calls into the package's own batch builders) so tests cross-check rather
than echo the implementation.
"""

import numpy as np

from freepc import StateSpace


def batch_maps(sys: StateSpace, length: int):
    """(O, M) with y_flat = O @ x0 + M @ u_flat over `length` steps,
    built sample by sample."""
    n_x, n_u, n_y = sys.n_x, sys.n_u, sys.n_y
    O = np.zeros((length * n_y, n_x))
    M = np.zeros((length * n_y, length * n_u))
    Apow = np.eye(n_x)
    for t in range(length):
        O[t * n_y:(t + 1) * n_y] = sys.C @ Apow
        Apow = sys.A @ Apow
    for t in range(length):
        for j in range(t + 1):
            if j == t:
                blk = sys.D
            else:
                blk = sys.C @ np.linalg.matrix_power(sys.A, t - 1 - j) @ sys.B
            M[t * n_y:(t + 1) * n_y, j * n_u:(j + 1) * n_u] = blk
    return O, M


def trajectory_fit_residual(sys: StateSpace, u: np.ndarray, y: np.ndarray) -> float:
    """How far (u, y) is from being a trajectory of sys: the residual of the
    best least-squares initial state explaining y from u."""
    u = np.atleast_2d(np.asarray(u, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if u.shape[1] != sys.n_u:
        u = u.reshape(-1, sys.n_u)
    if y.shape[1] != sys.n_y:
        y = y.reshape(-1, sys.n_y)
    O, M = batch_maps(sys, u.shape[0])
    rhs = y.reshape(-1) - M @ u.reshape(-1)
    x0, *_ = np.linalg.lstsq(O, rhs, rcond=None)
    return float(np.abs(O @ x0 - rhs).max())


def random_system(rng, n_x_max=4, n_u_max=2, n_y_max=2) -> StateSpace:
    """A random controllable + observable stable system (spectral radius
    around 0.75), rejection-sampled."""
    while True:
        n_x = int(rng.integers(1, n_x_max + 1))
        n_u = int(rng.integers(1, n_u_max + 1))
        n_y = int(rng.integers(1, n_y_max + 1))
        A = rng.standard_normal((n_x, n_x))
        radius = np.max(np.abs(np.linalg.eigvals(A)))
        if radius == 0:
            continue
        A = A * (0.75 / radius)
        B = rng.standard_normal((n_x, n_u))
        C = rng.standard_normal((n_y, n_x))
        D = rng.standard_normal((n_y, n_u)) * 0.1
        ctrb = np.hstack([np.linalg.matrix_power(A, k) @ B for k in range(n_x)])
        obsv = np.vstack([C @ np.linalg.matrix_power(A, k) for k in range(n_x)])
        sc = np.linalg.svd(ctrb, compute_uv=False)
        so = np.linalg.svd(obsv, compute_uv=False)
        if sc.min() > 1e-3 * sc.max() and so.min() > 1e-3 * so.max():
            return StateSpace(A, B, C, D)


def exact_frf(sys: StateSpace, frequencies) -> np.ndarray:
    """(M, n_y, n_u) frequency response computed directly from the matrices."""
    out = np.empty((len(frequencies), sys.n_y, sys.n_u), dtype=complex)
    for m, w in enumerate(frequencies):
        if sys.n_x:
            out[m] = sys.C @ np.linalg.solve(
                np.exp(1j * w) * np.eye(sys.n_x) - sys.A, sys.B) + sys.D
        else:
            out[m] = sys.D.astype(complex)
    return out

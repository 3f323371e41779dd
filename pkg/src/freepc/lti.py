"""Discrete-time LTI systems: state-space form, simulation, frequency
response, SISO transfer functions and their realization, and the closed
measurement loop used for data collection.

Feedback convention
-------------------
``closed_loop(plant, controller)`` wires ``u = d + controller(-y_meas)``:
the controller is driven by the negated (noisy) plant output and its output
is added to the injected signal ``d``. The resulting d-to-u transfer is
``1 / (1 - C_loop G)`` where ``C_loop = -C`` is the y-to-u transfer of the
wired loop. This is the only convention used in the package; see
:func:`du_sensitivity`.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import SingularityError
from .numcore import check_finite


def _frozen_2d(a, name: str) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    check_finite(a, name)
    a = a.copy()
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class StateSpace:
    """x_{k+1} = A x_k + B u_k ;  y_k = C x_k + D u_k (+ noise)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = _frozen_2d(self.A, "A")
        B = _frozen_2d(self.B, "B")
        C = _frozen_2d(self.C, "C")
        D = _frozen_2d(self.D, "D")
        if A.size == 0:
            A = np.zeros((0, 0))
        n_x = A.shape[0]
        if A.shape != (n_x, n_x):
            raise ValueError("A must be square")
        # Empty B/C get reshaped so a static system (n_x = 0) keeps
        # consistent input/output counts from D.
        if n_x == 0:
            B = B.reshape(0, D.shape[1])
            C = C.reshape(D.shape[0], 0)
        if B.shape[0] != n_x:
            raise ValueError(f"B has {B.shape[0]} rows, expected {n_x}")
        if C.shape[1] != n_x:
            raise ValueError(f"C has {C.shape[1]} cols, expected {n_x}")
        if D.shape != (C.shape[0], B.shape[1]):
            raise ValueError(
                f"D has shape {D.shape}, expected {(C.shape[0], B.shape[1])}")
        for name, val in (("A", A), ("B", B), ("C", C), ("D", D)):
            object.__setattr__(self, name, val)

    @property
    def n_x(self) -> int:
        return self.A.shape[0]

    @property
    def n_u(self) -> int:
        return self.B.shape[1]

    @property
    def n_y(self) -> int:
        return self.C.shape[0]

    def to_dict(self) -> dict:
        return {"A": self.A.tolist(), "B": self.B.tolist(),
                "C": self.C.tolist(), "D": self.D.tolist()}

    @staticmethod
    def from_dict(d: dict) -> "StateSpace":
        return StateSpace(d["A"], d["B"], d["C"], d["D"])


@dataclass(frozen=True)
class SisoTransferFunction:
    """Rational ``num(z) / den(z)`` with coefficients in descending powers.

    Must be proper (deg num <= deg den) so a state-space realization with a
    direct feedthrough term exists.
    """

    num: tuple
    den: tuple

    def __init__(self, num, den):
        num = tuple(float(c) for c in np.atleast_1d(num))
        den = tuple(float(c) for c in np.atleast_1d(den))
        check_finite(np.array(num), "num")
        check_finite(np.array(den), "den")
        if not den or den[0] == 0.0:
            raise ValueError("denominator leading coefficient must be nonzero")
        # strip leading zeros of the numerator before the properness check
        k = 0
        while k < len(num) - 1 and num[k] == 0.0:
            k += 1
        num = num[k:]
        if len(num) > len(den):
            raise ValueError("transfer function must be proper (deg num <= deg den)")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __call__(self, z: complex) -> complex:
        return complex(np.polyval(self.num, z) / np.polyval(self.den, z))

    def to_dict(self) -> dict:
        return {"num": list(self.num), "den": list(self.den)}

    @staticmethod
    def from_dict(d: dict) -> "SisoTransferFunction":
        return SisoTransferFunction(d["num"], d["den"])


@dataclass(frozen=True)
class Trajectory:
    """Paired input/output records of equal length."""

    u: np.ndarray  # (N, n_u)
    y: np.ndarray  # (N, n_y)

    def __post_init__(self):
        u = _frozen_2d(self.u, "u")
        y = _frozen_2d(self.y, "y")
        if u.shape[0] != y.shape[0]:
            raise ValueError("u and y must have the same length")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.u.shape[0]


def simulate(sys: StateSpace, x0, u, noise=None):
    """Run the state recursion from ``x0`` under input ``u``.

    Args:
        sys: system to simulate.
        x0: initial state, length ``n_x``.
        u: input sequence, shape ``(N, n_u)`` (a 1-D array is treated as a
            single-input sequence).
        noise: optional per-step additive output term, shape ``(N, n_y)``.

    Returns:
        ``(y, x_final)`` with ``y`` of shape ``(N, n_y)`` and ``x_final`` the
        state after the last step.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u.reshape(-1, 1)
    check_finite(u, "u")
    if u.shape[0] == 0:
        raise ValueError("input sequence must be nonempty")
    if u.shape[1] != sys.n_u:
        raise ValueError(f"u has {u.shape[1]} channels, expected {sys.n_u}")
    x = np.asarray(x0, dtype=float).reshape(sys.n_x)
    N = u.shape[0]
    if noise is not None:
        noise = np.asarray(noise, dtype=float).reshape(N, sys.n_y)
        check_finite(noise, "noise")
    y = np.empty((N, sys.n_y))
    for k in range(N):
        y[k] = sys.C @ x + sys.D @ u[k]
        x = sys.A @ x + sys.B @ u[k]
    if noise is not None:
        y = y + noise
    return y, x


def tf_to_ss(g: SisoTransferFunction) -> StateSpace:
    """Controllable-canonical realization of a proper SISO transfer function."""
    den = np.array(g.den) / g.den[0]
    num = np.array(g.num) / g.den[0]
    n = len(den) - 1
    b = np.concatenate([np.zeros(n + 1 - len(num)), num])  # b0..bn, monic den
    d = b[0]
    if n == 0:
        return StateSpace(np.zeros((0, 0)), np.zeros((0, 1)),
                          np.zeros((1, 0)), [[d]])
    a = den[1:]
    A = np.zeros((n, n))
    A[0, :] = -a
    A[1:, :-1] = np.eye(n - 1)
    B = np.zeros((n, 1))
    B[0, 0] = 1.0
    C = (b[1:] - a * d).reshape(1, n)
    return StateSpace(A, B, C, [[d]])


def freq_response(sys: StateSpace, w: float) -> np.ndarray:
    """``C (e^{jw} I - A)^{-1} B + D`` as an ``(n_y, n_u)`` complex matrix."""
    if sys.n_x == 0:
        return sys.D.astype(complex)
    z = np.exp(1j * float(w))
    try:
        resolvent = np.linalg.solve(z * np.eye(sys.n_x) - sys.A, sys.B)
    except np.linalg.LinAlgError as exc:
        raise SingularityError(
            f"resolvent is singular at frequency {w!r}") from exc
    return sys.C @ resolvent + sys.D


def spectral_radius(a: np.ndarray) -> float:
    a = np.atleast_2d(a)
    if a.shape[0] == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(a))))


def closed_loop(plant: StateSpace, controller: StateSpace) -> StateSpace:
    """Augmented system of the measurement loop, mapping (d, n) to (u, y).

    ``d`` is the signal injected at the plant input, ``n`` the output
    measurement noise; ``u`` is the realized plant input and ``y`` the
    measured (noisy) output. The controller acts on ``-y`` (measured), so the
    noise travels through the feedback path.
    """
    if plant.n_u != controller.n_y or plant.n_y != controller.n_u:
        raise ValueError("plant/controller input-output dimensions do not match")
    Ap, Bp, Cp, Dp = plant.A, plant.B, plant.C, plant.D
    Ac, Bc, Cc, Dc = controller.A, controller.B, controller.C, controller.D
    n_u, n_y = plant.n_u, plant.n_y
    loop = np.eye(n_u) + Dc @ Dp
    if abs(np.linalg.det(loop)) < 1e-12:
        raise ValueError("algebraic loop is ill-posed (I + Dc Dp singular)")
    phi = np.linalg.inv(loop)

    # u = phi (d - Dc Cp x_p + Cc x_c - Dc n)
    u_xp = -phi @ Dc @ Cp
    u_xc = phi @ Cc
    u_d = phi
    u_n = -phi @ Dc
    # y = Cp x_p + Dp u + n
    y_xp = Cp + Dp @ u_xp
    y_xc = Dp @ u_xc
    y_d = Dp @ u_d
    y_n = np.eye(n_y) + Dp @ u_n

    A = np.block([
        [Ap + Bp @ u_xp, Bp @ u_xc],
        [-Bc @ y_xp, Ac - Bc @ y_xc],
    ])
    B = np.block([
        [Bp @ u_d, Bp @ u_n],
        [-Bc @ y_d, -Bc @ y_n],
    ])
    C = np.block([
        [u_xp, u_xc],
        [y_xp, y_xc],
    ])
    D = np.block([
        [u_d, u_n],
        [y_d, y_n],
    ])
    return StateSpace(A, B, C, D)


def du_sensitivity(plant: StateSpace, controller: StateSpace, w: float) -> np.ndarray:
    """d-to-u frequency response of the wired loop, from the component
    responses: ``(I - C_loop(w) G(w))^{-1}`` with ``C_loop = -C``.

    Independent of :func:`closed_loop` (pure frequency-domain arithmetic), so
    it can serve as an oracle for the simulated loop.
    """
    G = freq_response(plant, w)
    C_loop = -freq_response(controller, w)
    n_u = plant.n_u
    try:
        return np.linalg.inv(np.eye(n_u) - C_loop @ G)
    except np.linalg.LinAlgError as exc:
        raise SingularityError(f"loop return difference singular at {w!r}") from exc

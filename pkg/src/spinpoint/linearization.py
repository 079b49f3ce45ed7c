"""Coordinate-free linearization of the closed loop.

The attitude is perturbed multiplicatively on the left, R -> exp(eps
hat(xi)) R with xi tangent to the sphere at q, and the angular velocity
additively, w -> w + eps dw. The error state x = (xi, dw) then satisfies
x_dot = A x with

    A = [[ q q^T hat(R w),  (I - q q^T) R ],
         [ tilt -> rate  ,  rate -> rate  ]]

where the lower blocks follow from differentiating the closed-loop
angular acceleration. The tangency constraint C x = [q^T, 0] x = 0 is
preserved by A, so admissible solutions stay admissible.

`fd_jacobian` rebuilds the lower blocks by central differences of the
closed-loop field under the same perturbations and is the independent
check on the long `rate_tilt` expression.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import BodyState, GainSet, ReferenceSample, closed_loop_wdot
from .geometry import E3, hat, so3_exp

__all__ = [
    "LinearizedSystem", "perturbed_errors", "assemble_A", "constraint_row",
    "nullspace_basis", "fd_jacobian",
]


@dataclass
class LinearizedSystem:
    """6x6 error-state matrix A and its four named 3x3 blocks."""

    A: np.ndarray
    tilt_tilt: np.ndarray   # xi_dot from xi
    tilt_rate: np.ndarray   # xi_dot from dw
    rate_tilt: np.ndarray   # dw_dot from xi
    rate_rate: np.ndarray   # dw_dot from dw
    state: BodyState = None
    ref: ReferenceSample = None


def perturbed_errors(state: BodyState, ref: ReferenceSample,
                     xi: np.ndarray, dw: np.ndarray):
    """First variations of (e_q, e_q_dot, e_w) under the perturbation (xi, dw).

    These are exact directional derivatives; the linearization tests
    check them against central finite differences of the error functions.
    """
    R, w = state.R, state.w
    q = R[:, 2]
    q_d, q_dot_d = ref.q_d, ref.q_dot_d
    xi = np.asarray(xi, dtype=float)
    dw = np.asarray(dw, dtype=float)

    q_dot = R @ np.cross(w, E3)
    e_q = R.T @ np.cross(q_d, q)
    K = hat(np.cross(q_d, q)) - hat(q_d) @ hat(q)

    e_q_eps = R.T @ K @ xi
    e_w_eps = dw - R.T @ hat(ref.Rd_wd) @ xi
    eq_dot_eps = (R.T @ hat(np.cross(q_dot_d, q) + np.cross(q_d, q_dot)) @ xi
                  - R.T @ hat(q_dot_d) @ hat(q) @ xi
                  - R.T @ hat(q_d) @ hat(R @ np.cross(w, E3)) @ xi
                  - hat(R.T @ q_d) @ hat(E3) @ dw
                  + hat(e_q) @ dw
                  - np.cross(w, e_q_eps))
    return e_q_eps, eq_dot_eps, e_w_eps


def assemble_A(state: BodyState, ref: ReferenceSample, gains: GainSet
               ) -> LinearizedSystem:
    """Evaluate the four blocks of the error-state matrix at `state`."""
    R, w = state.R, state.w
    lam, eta, gamma = gains.lam, gains.eta, gains.gamma
    q = R[:, 2]
    q_d, q_dot_d = ref.q_d, ref.q_dot_d

    psi = 1.0 - q @ q_d
    e_q = R.T @ np.cross(q_d, q)
    e_w = w - R.T @ ref.Rd_wd
    q_dot = R @ np.cross(w, E3)
    eq_dot = R.T @ (np.cross(q_dot_d, q) + np.cross(q_d, q_dot)) - np.cross(w, e_q)
    psi_dot = e_q @ e_w
    Re_q = R @ e_q
    Re_w = R @ e_w
    K = hat(np.cross(q_d, q)) - hat(q_d) @ hat(q)

    tilt_tilt = np.outer(q, q) @ hat(R @ w)
    tilt_rate = (np.eye(3) - np.outer(q, q)) @ R

    rate_tilt = (
        R.T @ hat(ref.Rd_wdotd)
        - hat(w) @ R.T @ hat(ref.Rd_wd)
        - (1.0 / eta) * (
            np.outer(e_q, Re_w) @ hat(Re_q)
            + np.outer(e_q, Re_q) @ hat(Re_w)
            + np.outer(eq_dot, q_d) @ hat(q)
            + (lam + psi) * (
                R.T @ hat(np.cross(q_dot_d, q) + np.cross(q_d, q_dot))
                - R.T @ hat(q_d) @ hat(R @ np.cross(w, E3))
                - R.T @ hat(q_dot_d) @ hat(q)
                - hat(w) @ R.T @ K)
            + (np.outer(e_q, Re_w) @ R
               + (psi_dot + gamma * (lam + psi)) * np.eye(3)) @ (R.T @ K)
            + gamma * np.outer(e_q, q_d) @ hat(q)
            - (np.outer(e_q, Re_q) @ R + eta * gamma * np.eye(3)) @ (R.T @ hat(ref.Rd_wd))
        )
    )
    rate_rate = (
        hat(R.T @ ref.Rd_wd)
        - (1.0 / eta) * (
            np.outer(e_q, Re_q) @ R + eta * gamma * np.eye(3)
            + (lam + psi) * (hat(e_q) - hat(R.T @ q_d) @ hat(E3))
        )
    )

    A = np.zeros((6, 6))
    A[:3, :3] = tilt_tilt
    A[:3, 3:] = tilt_rate
    A[3:, :3] = rate_tilt
    A[3:, 3:] = rate_rate
    return LinearizedSystem(A=A, tilt_tilt=tilt_tilt, tilt_rate=tilt_rate,
                            rate_tilt=rate_tilt, rate_rate=rate_rate,
                            state=state, ref=ref)


def constraint_row(q: np.ndarray) -> np.ndarray:
    """Tangency constraint row C = [q^T, 0, 0, 0] acting on x = (xi, dw)."""
    q = np.asarray(q, dtype=float)
    return np.concatenate([q, np.zeros(3)])


def nullspace_basis(C: np.ndarray) -> np.ndarray:
    """Five orthonormal rows spanning the null space of the constraint row.

    For q = +-e3 the basis is the coordinate one {e1, e2, e4, e5, e6}
    (up to sign), matching the structure the eigen-analysis relies on.
    """
    q = np.asarray(C, dtype=float)[:3]
    pick = int(np.argmin(np.abs(q)))  # coordinate axis least aligned with q
    u = np.zeros(3)
    u[pick] = 1.0
    u = u - (u @ q) * q
    u /= np.linalg.norm(u)
    v = np.cross(q, u)
    basis = np.zeros((5, 6))
    basis[0, :3] = u
    basis[1, :3] = v
    basis[2, 3] = 1.0
    basis[3, 4] = 1.0
    basis[4, 5] = 1.0
    return basis


def fd_jacobian(state: BodyState, ref: ReferenceSample, gains: GainSet,
                eps: float = 1e-6) -> np.ndarray:
    """Error-state matrix rebuilt with central differences.

    The tilt rows are the exact kinematic identities (they do not involve
    the controller); the rate rows are central differences of the
    closed-loop angular acceleration under R -> exp(+-eps hat(e_j)) R and
    w -> w +- eps e_j. The tilt direction parallel to q is perturbed too:
    it reproduces the structural zero eigenvalue that the constraint row
    later discards.
    """
    if not 1e-8 <= eps <= 1e-4:
        raise ValueError("eps outside the supported range [1e-8, 1e-4]")
    R, w = state.R, state.w
    q = R[:, 2]
    A = np.zeros((6, 6))
    A[:3, :3] = np.outer(q, q) @ hat(R @ w)
    A[:3, 3:] = (np.eye(3) - np.outer(q, q)) @ R
    for j in range(6):
        basis = np.zeros(3)
        basis[j % 3] = 1.0
        if j < 3:
            Rp = so3_exp(eps * basis) @ R
            Rm = so3_exp(-eps * basis) @ R
            wp = wm = w
        else:
            Rp = Rm = R
            wp = w + eps * basis
            wm = w - eps * basis
        fp = closed_loop_wdot(Rp, wp, ref, gains)
        fm = closed_loop_wdot(Rm, wm, ref, gains)
        A[3:, j] = (fp - fm) / (2.0 * eps)
    return A

"""Rigid-body plant, pointing/spin tracking controller, and closed loop.

The plant is a fully actuated rigid body on a frictionless pivot:

    J dw/dt + w x (J w) = u + M_p - hat(d e3) m g R^T E3
    dR/dt = R hat(w)

with w the body angular velocity, u the control moment, M_p a propeller
drag torque about the body spin axis, and the last term the gravity
moment from the rotor mass offset d along the body e3 axis.

The controller tracks a pointing direction q_d = R_d e3 together with a
spin rate about it. Its error variables are

    Psi  = 1 - q . q_d                 (pointing error, in [0, 2])
    e_q  = R^T (q_d x q)               (attitude error, body frame)
    e_w  = w - R^T R_d w_d             (angular velocity error)
    s    = (lam + Psi) e_q + eta e_w   (sliding vector)

and the torque cancels the plant terms exactly, so the closed loop is
independent of the plant parameters. Along closed-loop solutions with a
static reference, |s| decays exactly like exp(-gamma t).

Functions here broadcast over leading axes of R (..., 3, 3) and w (..., 3),
which is how the batch flow integration gets its speed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .geometry import E3, check_rotation, check_unit, hat, half_turn

__all__ = [
    "DEFAULT_INERTIA", "PlantParams", "GainSet", "BodyState", "ReferenceSample",
    "pointing_error", "attitude_error", "rate_error", "error_rates",
    "sliding_vector", "control_torque", "open_loop_field", "closed_loop_field",
    "closed_loop_wdot", "equilibria", "lyapunov_value", "sliding_vector_of_state",
]

# rotor-assembly inertia used as the package-wide default [kg m^2]
DEFAULT_INERTIA = 1e-5 * np.array([
    [3.612, 0.762, 0.0],
    [0.762, 8.709, 0.0],
    [0.0, 0.0, 6.076],
])


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("...i,...i->...", a, b)


def _tmv(R: np.ndarray, v: np.ndarray) -> np.ndarray:
    """R^T v, broadcasting."""
    return np.einsum("...ji,...j->...i", R, v)


def _mv(R: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...j->...i", R, v)


@dataclass
class PlantParams:
    """Physical parameters of the spinning-rotor plant.

    Attributes:
        J: 3x3 inertia matrix in the body frame [kg m^2], symmetric
           positive definite.
        m: rotor mass [kg].
        d: distance from the pivot to the center of mass along body e3 [m].
           Zero disables the gravity moment.
        g: gravitational acceleration [m/s^2].
        c_drag: propeller drag coefficient [N m s^2 / rad^2]; the drag
            torque is M_p = -c_drag * w3 |w3| e3.
        c_thrust: propeller thrust coefficient [N s^2 / rad^2]. Thrust acts
            along the spin axis through the pivot, so it produces no moment
            and does not enter the attitude dynamics; kept for completeness.
    """

    J: np.ndarray = field(default_factory=lambda: DEFAULT_INERTIA.copy())
    m: float = 0.1
    d: float = 0.0
    g: float = 9.81
    c_drag: float = 0.0
    c_thrust: float = 0.0

    def __post_init__(self) -> None:
        self.J = np.asarray(self.J, dtype=float)
        if self.J.shape != (3, 3):
            raise ValueError("J must be 3x3")
        if not np.allclose(self.J, self.J.T, atol=1e-12):
            raise ValueError("J must be symmetric")
        if np.linalg.eigvalsh(self.J).min() <= 0:
            raise ValueError("J must be positive definite")
        for name in ("m", "d", "g", "c_drag", "c_thrust"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        self.J_inv = np.linalg.inv(self.J)

    def drag_torque(self, w: np.ndarray) -> np.ndarray:
        """Propeller drag torque about body e3: -c_drag * w3 |w3| e3."""
        w3 = np.asarray(w, dtype=float)[..., 2]
        out = np.zeros(np.shape(w3) + (3,))
        out[..., 2] = -self.c_drag * w3 * np.abs(w3)
        return out


@dataclass
class GainSet:
    """Controller gains and the commanded spin rate about the pointing axis."""

    lam: float = 25e6
    eta: float = 12e3
    gamma: float = 500.0
    spin_rate: float = 1000.0  # rad/s

    def __post_init__(self) -> None:
        for name in ("lam", "eta", "gamma"):
            if getattr(self, name) <= 0:
                raise ValueError(f"gain {name} must be > 0")


@dataclass
class BodyState:
    """Attitude R (body-to-inertial) and body angular velocity w [rad/s]."""

    R: np.ndarray
    w: np.ndarray

    def __post_init__(self) -> None:
        self.R = np.asarray(self.R, dtype=float)
        self.w = np.asarray(self.w, dtype=float)
        check_rotation(self.R)

    @property
    def q(self) -> np.ndarray:
        """Pointing direction R e3."""
        return self.R[..., :, 2].copy()


@dataclass
class ReferenceSample:
    """Reference command at one instant.

    R_d is the desired pointing frame, q_d = R_d e3 the desired direction,
    q_dot_d its inertial rate, w_d the desired body angular velocity of the
    tracking body (pointing rate pulled back to the desired frame plus the
    spin about e3), and w_dot_d its time derivative.
    """

    R_d: np.ndarray
    q_d: np.ndarray
    q_dot_d: np.ndarray
    w_d: np.ndarray
    w_dot_d: np.ndarray

    def __post_init__(self) -> None:
        self.R_d = np.asarray(self.R_d, dtype=float)
        self.q_d = np.asarray(self.q_d, dtype=float)
        self.q_dot_d = np.asarray(self.q_dot_d, dtype=float)
        self.w_d = np.asarray(self.w_d, dtype=float)
        self.w_dot_d = np.asarray(self.w_dot_d, dtype=float)
        check_unit(self.q_d)
        if np.abs(self.q_d - self.R_d[:, 2]).max() > 1e-12:
            raise ValueError("q_d must equal R_d e3")
        if abs(float(self.q_d @ self.q_dot_d)) > 1e-10:
            raise ValueError("q_dot_d must be tangent to q_d")
        # products used in every field evaluation
        self.Rd_wd = self.R_d @ self.w_d
        self.Rd_wdotd = self.R_d @ self.w_dot_d

    @classmethod
    def static_pointing(cls, R_d: np.ndarray, spin_rate: float) -> "ReferenceSample":
        """Constant reference: hold the direction R_d e3 while spinning."""
        R_d = np.asarray(R_d, dtype=float)
        return cls(R_d=R_d, q_d=R_d[:, 2], q_dot_d=np.zeros(3),
                   w_d=spin_rate * E3, w_dot_d=np.zeros(3))

    @property
    def is_static(self) -> bool:
        return (np.all(self.q_dot_d == 0.0) and np.all(self.w_dot_d == 0.0)
                and np.all(self.w_d[:2] == 0.0))


# ---------------------------------------------------------------------------
# error variables
# ---------------------------------------------------------------------------

def pointing_error(q: np.ndarray, q_d: np.ndarray) -> np.ndarray:
    """Pointing error Psi = 1 - q . q_d, in [0, 2]."""
    return 1.0 - _dot(np.asarray(q, float), np.asarray(q_d, float))


def attitude_error(R: np.ndarray, q_d: np.ndarray) -> np.ndarray:
    """Attitude error e_q = R^T (q_d x q) with q = R e3."""
    R = np.asarray(R, dtype=float)
    q = R[..., :, 2]
    return _tmv(R, np.cross(q_d, q))


def rate_error(state: BodyState, ref: ReferenceSample) -> np.ndarray:
    """Angular velocity error e_w = w - R^T R_d w_d."""
    return state.w - _tmv(state.R, ref.Rd_wd)


def _errors(R, w, ref):
    """All error quantities at once (batched)."""
    q = R[..., :, 2]
    psi = 1.0 - _dot(q, ref.q_d)
    e_q = _tmv(R, np.cross(ref.q_d, q))
    e_w = w - _tmv(R, ref.Rd_wd)
    q_dot = _mv(R, np.cross(w, E3))
    eq_dot = _tmv(R, np.cross(ref.q_dot_d, q) + np.cross(ref.q_d, q_dot)) \
        - np.cross(w, e_q)
    # (R e_q).(R e_w) written in the body frame; R is orthogonal
    psi_dot = _dot(e_q, e_w)
    return q, psi, e_q, e_w, q_dot, eq_dot, psi_dot


def error_rates(state: BodyState, ref: ReferenceSample) -> Tuple[np.ndarray, np.ndarray]:
    """Time derivatives (Psi_dot, e_q_dot) of the pointing and attitude errors."""
    _, _, _, _, _, eq_dot, psi_dot = _errors(state.R, state.w, ref)
    return psi_dot, eq_dot


def sliding_vector(psi: np.ndarray, e_q: np.ndarray, e_w: np.ndarray,
                   gains: GainSet) -> np.ndarray:
    """s = (lam + Psi) e_q + eta e_w."""
    psi = np.asarray(psi, dtype=float)
    return (gains.lam + psi)[..., None] * np.asarray(e_q, float) \
        + gains.eta * np.asarray(e_w, float)


def sliding_vector_of_state(R: np.ndarray, w: np.ndarray, ref: ReferenceSample,
                            gains: GainSet) -> np.ndarray:
    """Sliding vector evaluated directly from (R, w)."""
    _, psi, e_q, e_w, _, _, _ = _errors(np.asarray(R, float), np.asarray(w, float), ref)
    return sliding_vector(psi, e_q, e_w, gains)


def lyapunov_value(psi, e_q, e_w, gains: GainSet) -> np.ndarray:
    """V = |s|^2 / 2."""
    s = sliding_vector(psi, e_q, e_w, gains)
    return 0.5 * _dot(s, s)


# ---------------------------------------------------------------------------
# control law and vector fields
# ---------------------------------------------------------------------------

def _alpha(R, w, ref):
    """Feedforward term w x (R^T R_d w_d) - R^T R_d w_dot_d."""
    return np.cross(w, _tmv(R, ref.Rd_wd)) - _tmv(R, ref.Rd_wdotd)


def control_torque(state: BodyState, ref: ReferenceSample, gains: GainSet,
                   plant: PlantParams) -> np.ndarray:
    """Tracking control moment [N m].

    u = J/eta (-eta alpha - (lam+Psi) e_q_dot - Psi_dot e_q - gamma s) - f,
    where f collects the plant terms (drag, gravity moment, gyroscopic
    torque) so they cancel exactly in the closed loop.
    """
    R, w = state.R, state.w
    q, psi, e_q, e_w, q_dot, eq_dot, psi_dot = _errors(R, w, ref)
    s = sliding_vector(psi, e_q, e_w, gains)
    alpha = _alpha(R, w, ref)
    core = (-gains.eta * alpha - (gains.lam + psi)[..., None] * eq_dot
            - psi_dot[..., None] * e_q - gains.gamma * s) / gains.eta
    f = plant.drag_torque(w) \
        - _mv(hat(plant.d * E3), plant.m * plant.g * _tmv(R, E3)) \
        - np.cross(w, np.einsum("ij,...j->...i", plant.J, w))
    return np.einsum("ij,...j->...i", plant.J, core) - f


def open_loop_field(state: BodyState, u: np.ndarray, plant: PlantParams
                    ) -> Tuple[np.ndarray, np.ndarray]:
    """Plant dynamics under an applied moment u.

    Returns (w_dot, R_dot) with
    w_dot = J^-1 (u + M_p - hat(d e3) m g R^T E3 - w x J w), R_dot = R hat(w).
    """
    R, w = state.R, state.w
    Jw = np.einsum("ij,...j->...i", plant.J, w)
    torque = (np.asarray(u, float) + plant.drag_torque(w)
              - _mv(hat(plant.d * E3), plant.m * plant.g * _tmv(R, E3))
              - np.cross(w, Jw))
    w_dot = np.einsum("ij,...j->...i", plant.J_inv, torque)
    R_dot = R @ hat(w)
    return w_dot, R_dot


def closed_loop_wdot(R: np.ndarray, w: np.ndarray, ref: ReferenceSample,
                     gains: GainSet) -> np.ndarray:
    """Angular acceleration of the closed loop (batched hot path).

    w_dot = (-(lam+Psi) e_q_dot - Psi_dot e_q - gamma s)/eta - alpha.
    Plant parameters do not appear: the control moment cancels them.
    """
    q, psi, e_q, e_w, q_dot, eq_dot, psi_dot = _errors(R, w, ref)
    s = (gains.lam + psi)[..., None] * e_q + gains.eta * e_w
    alpha = np.cross(w, _tmv(R, ref.Rd_wd)) - _tmv(R, ref.Rd_wdotd)
    return (-(gains.lam + psi)[..., None] * eq_dot
            - psi_dot[..., None] * e_q - gains.gamma * s) / gains.eta - alpha


def closed_loop_field(state: BodyState, ref: ReferenceSample, gains: GainSet
                      ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-loop derivatives (w_dot, R_dot, q_dot)."""
    R, w = state.R, state.w
    w_dot = closed_loop_wdot(R, w, ref, gains)
    R_dot = R @ hat(w)
    q_dot = _mv(R, np.cross(w, E3))
    return w_dot, R_dot, q_dot


def equilibria(ref: ReferenceSample) -> list[tuple[np.ndarray, np.ndarray]]:
    """The two closed-loop equilibria of a static reference.

    Returns [(q_d, w_d), (-q_d, -w_d)]; the first is the tracking target,
    the second the antipodal saddle. Raises for a moving reference.
    """
    if not ref.is_static:
        raise ValueError("equilibria are defined for a static reference only")
    return [(ref.q_d.copy(), ref.w_d.copy()),
            (-ref.q_d, -ref.w_d)]

"""Structure-preserving flow maps on SO(3) x R^3.

The stepper is a 4th-order Munthe-Kaas Runge-Kutta scheme: the angular
velocity takes classical RK4 stages while the attitude advances through
exponential coordinates, R -> R exp(hat(sigma)), with the inverse
differential of the exponential truncated at the quadratic commutator
term (sufficient for order four). The attitude therefore never leaves
SO(3) except for rounding, which a periodic polar re-projection removes.

States are stacked: R has shape (N, 3, 3) and w shape (N, 3); a batch of
seeds integrates in lockstep with no shared mutable state. Backward flow
integrates the negated field and records negative timestamps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .dynamics import BodyState, GainSet, ReferenceSample
from .geometry import reorthonormalize, so3_exp

__all__ = ["IntegratorConfig", "FlowTrace", "WdotFn", "mk4_step", "step", "flow_batch", "flow"]

# f(t, R, w) -> w_dot, broadcasting over the leading batch axis
WdotFn = Callable[[float, np.ndarray, np.ndarray], np.ndarray]


@dataclass
class IntegratorConfig:
    """Step size h [s], attitude re-projection cadence, and the recording
    decimation (one stored sample every `record_decimation` steps)."""

    h: float = 1e-5
    reorthonormalize_every: int = 100
    record_decimation: int = 1

    def __post_init__(self) -> None:
        if self.h <= 0:
            raise ValueError("h must be > 0")
        if self.record_decimation < 1:
            raise ValueError("record_decimation must be >= 1")
        if self.reorthonormalize_every < 1:
            raise ValueError("reorthonormalize_every must be >= 1")


@dataclass
class FlowTrace:
    """Recorded samples of one trajectory.

    t is strictly increasing for forward flow and strictly decreasing for
    backward flow. q is the pointing direction, spin its angular-velocity
    component w . e3, psi the pointing error to the reference target, V
    the sliding-vector Lyapunov value, and dist_desired / dist_antipodal
    the tangent-bundle distances to the two closed-loop equilibria.
    `truncated` marks a trace cut short by a non-finite state.
    """

    t: np.ndarray
    q: np.ndarray
    w: np.ndarray
    spin: np.ndarray
    psi: np.ndarray
    V: np.ndarray
    dist_desired: np.ndarray
    dist_antipodal: np.ndarray
    R: Optional[np.ndarray] = None
    truncated: bool = False
    extra: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.t)


def _dexpinv(sigma: np.ndarray, om: np.ndarray) -> np.ndarray:
    """Inverse right-trivialized differential of exp on so(3), to the
    commutator order needed for a 4th-order scheme."""
    c = np.cross(sigma, om)
    return om + 0.5 * c + np.cross(sigma, c) / 12.0


def mk4_step(R: np.ndarray, w: np.ndarray, t: float, h: float,
             wdot: WdotFn, direction: float = 1.0):
    """One Munthe-Kaas RK4 step of d/dtau (R, w) = direction * field.

    The exponential update is exact for constant w, so pure spins advance
    without attitude error at any step size.
    """
    d = direction
    k1s = d * w
    k1w = d * wdot(t, R, w)

    s2 = 0.5 * h * k1s
    R2 = R @ so3_exp(s2)
    w2 = w + 0.5 * h * k1w
    k2s = _dexpinv(s2, d * w2)
    k2w = d * wdot(t + d * 0.5 * h, R2, w2)

    s3 = 0.5 * h * k2s
    R3 = R @ so3_exp(s3)
    w3 = w + 0.5 * h * k2w
    k3s = _dexpinv(s3, d * w3)
    k3w = d * wdot(t + d * 0.5 * h, R3, w3)

    s4 = h * k3s
    R4 = R @ so3_exp(s4)
    w4 = w + h * k3w
    k4s = _dexpinv(s4, d * w4)
    k4w = d * wdot(t + d * h, R4, w4)

    sigma = (h / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
    return R @ so3_exp(sigma), w + (h / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)


def step(state: BodyState, wdot: WdotFn, h: float,
         direction: str = "forward", t: float = 0.0) -> BodyState:
    """Single-state convenience wrapper around :func:`mk4_step`."""
    d = {"forward": 1.0, "backward": -1.0}[direction]
    R, w = mk4_step(state.R, state.w, t, h, wdot, d)
    if not np.all(np.isfinite(R)) or not np.all(np.isfinite(w)):
        raise FloatingPointError("non-finite state after step")
    return BodyState(R=R, w=w)


def _annotate(t, Rs, ws, ref_of_t, gains: GainSet) -> list[FlowTrace]:
    """Build per-seed traces with error/energy/distance columns."""
    # Rs: (n, N, 3, 3); ws: (n, N, 3)
    from .dynamics import pointing_error, sliding_vector_of_state
    from .flows import distance_metric

    n, N = ws.shape[0], ws.shape[1]
    psi = np.empty((n, N))
    V = np.empty((n, N))
    dd = np.empty((n, N))
    da = np.empty((n, N))
    for i, ti in enumerate(t):
        ref = ref_of_t(float(ti))
        q = Rs[i, :, :, 2]
        psi[i] = pointing_error(q, ref.q_d)
        s = sliding_vector_of_state(Rs[i], ws[i], ref, gains)
        V[i] = 0.5 * np.einsum("...i,...i->...", s, s)
        dd[i] = distance_metric((q, ws[i]), (ref.q_d, ref.w_d))
        da[i] = distance_metric((q, ws[i]), (-ref.q_d, -ref.w_d))
    traces = []
    for k in range(N):
        traces.append(FlowTrace(
            t=t.copy(), q=Rs[:, k, :, 2].copy(), w=ws[:, k].copy(),
            spin=ws[:, k, 2].copy(), psi=psi[:, k], V=V[:, k],
            dist_desired=dd[:, k], dist_antipodal=da[:, k],
            R=Rs[:, k].copy()))
    return traces


def flow_batch(R0: np.ndarray, w0: np.ndarray, wdot: WdotFn, T: float,
               cfg: IntegratorConfig, ref_of_t, gains: GainSet,
               direction: str = "forward") -> list[FlowTrace]:
    """Integrate a batch of seeds over horizon T and record decimated traces.

    A seed whose state turns non-finite has its trace truncated at the
    last finite sample; the rest of the batch continues. Backward flow
    gets negative, strictly decreasing timestamps (the reference is always
    evaluated at |t|; backward exploration is defined for static
    references).
    """
    if T <= 0:
        raise ValueError("T must be > 0")
    d = {"forward": 1.0, "backward": -1.0}[direction]
    R = np.array(R0, dtype=float, copy=True)
    w = np.array(w0, dtype=float, copy=True)
    single = R.ndim == 2
    if single:
        R, w = R[None], w[None]
    N = R.shape[0]
    n_steps = int(np.ceil(T / cfg.h - 1e-12))
    n_rec = n_steps // cfg.record_decimation
    t_rec = np.empty(n_rec)
    R_rec = np.empty((n_rec, N, 3, 3))
    w_rec = np.empty((n_rec, N, 3))
    alive = np.ones(N, dtype=bool)
    cut = np.full(N, n_rec, dtype=int)  # first invalid record index per seed
    j = 0
    for i in range(n_steps):
        tau = i * cfg.h
        Rn, wn = mk4_step(R, w, tau, cfg.h, wdot, d)
        bad = ~(np.isfinite(wn).all(axis=-1) & np.isfinite(Rn).all(axis=(-2, -1)))
        if bad.any():
            newly = bad & alive
            cut[newly] = np.minimum(cut[newly], j)
            alive &= ~bad
            # freeze dead seeds so the batch math stays finite
            Rn[bad] = R[bad]
            wn[bad] = w[bad]
        R, w = Rn, wn
        if (i + 1) % cfg.reorthonormalize_every == 0:
            R = reorthonormalize(R)
        if (i + 1) % cfg.record_decimation == 0:
            t_rec[j] = d * (i + 1) * cfg.h
            R_rec[j] = R
            w_rec[j] = w
            j += 1
    traces = _annotate(t_rec, R_rec, w_rec, lambda ti: ref_of_t(abs(ti)), gains)
    for k, tr in enumerate(traces):
        if cut[k] < n_rec:
            m = cut[k]
            for name in ("t", "q", "w", "spin", "psi", "V",
                         "dist_desired", "dist_antipodal", "R"):
                setattr(tr, name, getattr(tr, name)[:m])
            tr.truncated = True
    return traces


def flow(state: BodyState, wdot: WdotFn, T: float, cfg: IntegratorConfig,
         ref: ReferenceSample | Callable[[float], ReferenceSample],
         gains: GainSet, direction: str = "forward") -> FlowTrace:
    """Single-seed flow over horizon T; see :func:`flow_batch`."""
    ref_of_t = ref if callable(ref) else (lambda t: ref)
    return flow_batch(state.R, state.w, wdot, T, cfg, ref_of_t, gains, direction)[0]

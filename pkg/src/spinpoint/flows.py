"""Flow exploration near the two closed-loop equilibria.

Seeds are placed on the local stable eigenspace of the antipodal saddle
(from the linearization's stable eigenvectors) or on a small ring around
the tracking equilibrium, then integrated backward or forward in batches.
The tangent-bundle distance

    d((q1, w1), (q2, w2)) = (1 - q1 . q2) + |w1 - w2|

measures proximity to an equilibrium and decides convergence verdicts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .dynamics import BodyState, GainSet, ReferenceSample, closed_loop_wdot
from .geometry import E1, E2, E3, half_turn, rodrigues_exp, so3_exp
from .integrator import FlowTrace, IntegratorConfig, flow_batch
from .spectral import EigenStructure

__all__ = [
    "SeedSpec", "ConvergenceVerdict", "antipodal_frame", "seeds_saddle",
    "seeds_desired", "distance_metric", "run_flow_batch", "convergence_check",
]

CONVERGENCE_THRESHOLD = 1e-6


@dataclass
class SeedSpec:
    """Seed-generation parameters.

    eps scales the complex-pair (in-plane) component, spin_eps the real
    spin-mode component, mix is the complex weight applied to the slow
    stable eigenvector, and angles are the ring parameters. For the saddle
    seeds, `spin_vector_mode` selects which real eigenvector carries the
    spin_eps term: "structural-zero" is the literal construction (whose
    angular-velocity block is empty, leaving that term inert) and
    "spin-mode" substitutes the spin eigenvector e6 instead.
    """

    equilibrium: str = "antipodal"          # "desired" | "antipodal"
    eps: float = 1e-6
    spin_eps: float = 1e-6
    mix: complex = 1.0 + 1.0j
    angles: np.ndarray = field(default_factory=lambda: 2.0 * np.pi * np.arange(10) / 10.0)
    spin_vector_mode: str = "structural-zero"

    def __post_init__(self) -> None:
        if self.equilibrium not in ("desired", "antipodal"):
            raise ValueError("equilibrium must be 'desired' or 'antipodal'")
        if self.eps <= 0 or self.spin_eps <= 0:
            raise ValueError("eps and spin_eps must be > 0")
        self.angles = np.asarray(self.angles, dtype=float)
        if len(np.unique(np.round(self.angles, 12))) != len(self.angles):
            raise ValueError("angles must be distinct")
        if self.spin_vector_mode not in ("structural-zero", "spin-mode"):
            raise ValueError("unknown spin_vector_mode")


@dataclass
class ConvergenceVerdict:
    """Outcome of a forward trace relative to a target equilibrium."""

    target: str
    final_distance: float
    time_to_threshold: float | None
    converged: bool


def antipodal_frame(R_d: np.ndarray, zeta: float = 0.0) -> np.ndarray:
    """Attitude whose pointing direction is -q_d.

    R_e = exp(pi hat(R_d e1)) exp(zeta hat(R_d e3)) R_d. The half turn is
    evaluated in its exact algebraic form, so with zeta = 0 the frame maps
    e3 to -q_d without trigonometric rounding.
    """
    R_d = np.asarray(R_d, dtype=float)
    return half_turn(R_d @ E1) @ rodrigues_exp(R_d @ E3, zeta) @ R_d


def seeds_saddle(spec: SeedSpec, es_antipodal: EigenStructure,
                 ref: ReferenceSample):
    """Seeds on the local stable eigenspace of the antipodal saddle.

    For each ring angle theta the 6-vector

        p = eps cos(theta) (mix v1 + conj(mix) v5) + spin_eps sin(theta) v3

    is split into its attitude and angular-velocity halves: the attitude
    half tilts the antipodal frame through the exponential map, the
    velocity half offsets -w_d. v1/v5 is the contracting complex pair of
    the saddle; v3 is the structural-zero eigenvector (or the spin mode,
    per `spec.spin_vector_mode`). With the structural-zero choice the
    sin(theta) term has an empty velocity block, so angles where
    cos(theta) = 0 produce the equilibrium itself; such seeds are flagged
    degenerate.

    Returns (states, degenerate_flags).
    """
    if es_antipodal.admissible is None:
        raise ValueError("classify the antipodal eigen-structure first")
    # contracting complex pair
    best = None
    for i in es_antipodal.pair_indices:
        lam = es_antipodal.eigenvalues[i]
        if lam.real < 0:
            if best is None or lam.real > es_antipodal.eigenvalues[best].real:
                best = i
    if best is None:
        raise ValueError("no contracting complex pair at the saddle")
    v1 = es_antipodal.eigenvectors[:, best]
    plane = 2.0 * np.real(spec.mix * v1)          # mix v1 + conj(mix v1)

    if spec.spin_vector_mode == "structural-zero":
        i3 = es_antipodal.real_indices[0]
        v_spin = es_antipodal.eigenvectors[:, i3].real
    else:
        i4 = es_antipodal.real_indices[1]
        v_spin = es_antipodal.eigenvectors[:, i4].real

    R_e = antipodal_frame(ref.R_d, 0.0)
    w_e = -ref.w_d
    states, degenerate = [], []
    for th in spec.angles:
        p = spec.eps * np.cos(th) * plane + spec.spin_eps * np.sin(th) * v_spin
        tilt, dw = p[:3], p[3:]
        R = so3_exp(tilt) @ R_e
        w = w_e + dw
        states.append(BodyState(R=R, w=w))
        degenerate.append(bool(np.linalg.norm(tilt) < 1e-15 and np.linalg.norm(dw) < 1e-15))
    return states, degenerate


def seeds_desired(ref: ReferenceSample, eps: float = 1e-6, spin_eps: float = 1e-7,
                  angles: Sequence[float] | None = None) -> list[BodyState]:
    """Ring of states close to the tracking equilibrium.

    R = exp(eps hat(cos(th) e1 + sin(th) e2)) R_d,
    w = w_d + eps (cos(th) e1 + sin(th) e2) + spin_eps e3.
    """
    if angles is None:
        angles = 2.0 * np.pi * np.arange(10) / 10.0
    out = []
    for th in np.asarray(angles, dtype=float):
        u = np.cos(th) * E1 + np.sin(th) * E2
        R = so3_exp(eps * u) @ ref.R_d
        w = ref.w_d + eps * u + spin_eps * E3
        out.append(BodyState(R=R, w=w))
    return out


def distance_metric(s1, s2) -> np.ndarray:
    """Tangent-bundle distance (1 - q1.q2) + |w1 - w2| (batched)."""
    q1, w1 = (np.asarray(a, dtype=float) for a in s1)
    q2, w2 = (np.asarray(a, dtype=float) for a in s2)
    return (1.0 - np.einsum("...i,...i->...", q1, q2)) \
        + np.linalg.norm(w1 - w2, axis=-1)


def run_flow_batch(seeds: Iterable[BodyState], direction: str, T: float,
                   cfg: IntegratorConfig, ref: ReferenceSample,
                   gains: GainSet) -> list[FlowTrace]:
    """Integrate every seed under the closed loop; one trace per seed.

    Traces are annotated with the distance to both equilibria at every
    recorded sample. A seed that blows up yields a truncated trace rather
    than failing the batch (backward flows grow exponentially by design).
    """
    states = list(seeds)
    R0 = np.stack([s.R for s in states])
    w0 = np.stack([s.w for s in states])
    wdot = lambda t, R, w: closed_loop_wdot(R, w, ref, gains)
    return flow_batch(R0, w0, wdot, T, cfg, lambda t: ref, gains, direction)


def convergence_check(trace: FlowTrace, target: str = "desired",
                      threshold: float = CONVERGENCE_THRESHOLD) -> ConvergenceVerdict:
    """Verdict on a forward trace: did it reach the target equilibrium?

    Convergence means the final recorded distance is below `threshold`;
    the crossing time is the first sample at which the distance dips
    under it.
    """
    if target not in ("desired", "antipodal"):
        raise ValueError("target must be 'desired' or 'antipodal'")
    d = trace.dist_desired if target == "desired" else trace.dist_antipodal
    if len(d) == 0:
        return ConvergenceVerdict(target, np.inf, None, False)
    final = float(d[-1])
    below = np.flatnonzero(d < threshold)
    t_cross = float(trace.t[below[0]]) if below.size else None
    return ConvergenceVerdict(target=target, final_distance=final,
                              time_to_threshold=t_cross,
                              converged=bool(final < threshold))

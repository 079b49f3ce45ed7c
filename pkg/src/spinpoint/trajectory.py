"""Smooth pointing-reference generation from rest-to-rest maneuver segments.

A maneuver is an ordered, non-overlapping list of rotations about fixed
inertial axes. Each segment sweeps its angle with the rest-to-rest
minimum-snap profile, so the commanded direction is C^3 in time and every
segment starts and ends with zero angular rate, acceleration, and jerk.
Later segments compose on the left (inertial-axis rotations):

    R_d(t) = exp(a_n(t) hat(axis_n)) ... exp(a_1(t) hat(axis_1))
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .dynamics import ReferenceSample
from .geometry import E1, E3, so3_exp

__all__ = [
    "MinSnapSample", "ManeuverSegment", "TrajectoryConfig",
    "min_snap_profile", "ReferenceTrajectory", "reference_at",
    "default_pointing_maneuver",
]


class MinSnapSample(NamedTuple):
    s: float        # normalized position in [0, 1]
    ds: float       # d s / d tau
    dds: float      # d^2 s / d tau^2
    clamped: bool   # tau fell outside [0, 1]


def min_snap_profile(tau: float) -> MinSnapSample:
    """Rest-to-rest minimum-snap scalar profile on [0, 1].

    s(tau) = 35 tau^4 - 84 tau^5 + 70 tau^6 - 20 tau^7, which has zero
    first, second, and third derivatives at both endpoints. Arguments
    outside [0, 1] are clamped and flagged.
    """
    clamped = bool(tau < 0.0 or tau > 1.0)
    t = min(max(float(tau), 0.0), 1.0)
    s = 35.0 * t**4 - 84.0 * t**5 + 70.0 * t**6 - 20.0 * t**7
    ds = 140.0 * t**3 - 420.0 * t**4 + 420.0 * t**5 - 140.0 * t**6
    dds = 420.0 * t**2 - 1680.0 * t**3 + 2100.0 * t**4 - 840.0 * t**5
    return MinSnapSample(s, ds, dds, clamped)


@dataclass
class ManeuverSegment:
    """One rotation: `angle` [rad] about the inertial unit vector `axis`,
    swept over the window [t_start, t_end] [s]."""

    axis: np.ndarray
    angle: float
    t_start: float
    t_end: float

    def __post_init__(self) -> None:
        self.axis = np.asarray(self.axis, dtype=float)
        n = np.linalg.norm(self.axis)
        if n == 0:
            raise ValueError("segment axis must be nonzero")
        self.axis = self.axis / n
        if not self.t_end > self.t_start:
            raise ValueError("segment must have t_end > t_start")


@dataclass
class TrajectoryConfig:
    """Maneuver segments plus the constant spin rate about the pointing axis."""

    segments: list[ManeuverSegment] = field(default_factory=list)
    spin: float = 1000.0       # rad/s
    duration: float = 1.7      # s

    def __post_init__(self) -> None:
        t_prev = -np.inf
        for seg in self.segments:
            if seg.t_start < t_prev:
                raise ValueError("segments must be time-ordered and non-overlapping")
            t_prev = seg.t_end
        if self.segments and self.segments[-1].t_end > self.duration:
            raise ValueError("segments extend past the configured duration")


class ReferenceTrajectory:
    """Evaluates ReferenceSample along a TrajectoryConfig.

    The rotation of all segments completed before each segment's start is
    precomputed, so a sample costs one profile evaluation and one
    exponential regardless of segment count.
    """

    def __init__(self, cfg: TrajectoryConfig):
        self.cfg = cfg
        pre = [np.eye(3)]
        for seg in cfg.segments:
            pre.append(so3_exp(seg.angle * seg.axis) @ pre[-1])
        self._prefix = pre  # prefix[k] = rotation of segments 0..k-1 completed

    def sample(self, t: float) -> ReferenceSample:
        cfg = self.cfg
        R_d = self._prefix[0]
        w_sp = np.zeros(3)   # spatial (inertial) rate of the pointing frame
        a_sp = np.zeros(3)   # spatial acceleration
        for k, seg in enumerate(cfg.segments):
            if t <= seg.t_start:
                R_d = self._prefix[k]
                break
            if t >= seg.t_end:
                R_d = self._prefix[k + 1]
                continue
            T = seg.t_end - seg.t_start
            s, ds, dds = min_snap_profile((t - seg.t_start) / T)[:3]
            R_d = so3_exp(seg.angle * s * seg.axis) @ self._prefix[k]
            w_sp = (seg.angle * ds / T) * seg.axis
            a_sp = (seg.angle * dds / T**2) * seg.axis
            break
        q_d = R_d[:, 2]
        # pull the pointing rate back to the desired frame and add the spin;
        # d/dt (R_d^T w_sp) reduces to R_d^T a_sp because w_sp x w_sp = 0
        w_d = R_d.T @ w_sp + cfg.spin * E3
        w_dot_d = R_d.T @ a_sp
        q_dot_d = np.cross(w_sp, q_d)
        return ReferenceSample(R_d=R_d, q_d=q_d, q_dot_d=q_dot_d,
                               w_d=w_d, w_dot_d=w_dot_d)


def reference_at(cfg: TrajectoryConfig, t: float) -> ReferenceSample:
    """Reference command of `cfg` at time t >= 0."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return ReferenceTrajectory(cfg).sample(t)


def default_pointing_maneuver(spin: float = 1000.0) -> TrajectoryConfig:
    """The package's stock test maneuver.

    Ninety degrees about the inertial x axis, then ninety degrees about
    the inertial z axis, 0.5 s each with 0.1 s holds before and between
    and a long tail hold, 1.7 s total. The tail leaves room for the
    tracking transients to ring down before the run ends.
    """
    segs = [
        ManeuverSegment(axis=E1, angle=np.pi / 2, t_start=0.1, t_end=0.6),
        ManeuverSegment(axis=E3, angle=np.pi / 2, t_start=0.7, t_end=1.2),
    ]
    return TrajectoryConfig(segments=segs, spin=spin, duration=1.7)

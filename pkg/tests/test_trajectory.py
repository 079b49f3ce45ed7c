import numpy as np
import pytest

from spinpoint.geometry import E1, E3, so3_exp, vee
from spinpoint.trajectory import (ManeuverSegment, ReferenceTrajectory,
                                  TrajectoryConfig, default_pointing_maneuver,
                                  min_snap_profile, reference_at)


class TestMinSnapProfile:
    def test_start_boundary(self):
        s, ds, dds, clamped = min_snap_profile(0.0)
        assert (s, ds, dds, clamped) == (0.0, 0.0, 0.0, False)

    def test_end_boundary(self):
        s, ds, dds, clamped = min_snap_profile(1.0)
        assert (s, ds, dds) == (1.0, 0.0, 0.0)

    def test_midpoint_symmetry(self):
        assert min_snap_profile(0.5).s == pytest.approx(0.5, abs=1e-15)

    def test_clamping_flags(self):
        lo = min_snap_profile(-0.2)
        hi = min_snap_profile(1.3)
        assert lo.clamped and hi.clamped
        assert (lo.s, hi.s) == (0.0, 1.0)

    def test_derivatives_match_finite_differences(self):
        h = 1e-6
        for tau in (0.2, 0.5, 0.83):
            s0, ds0, dds0, _ = min_snap_profile(tau)
            sp, dsp = min_snap_profile(tau + h)[:2]
            sm, dsm = min_snap_profile(tau - h)[:2]
            assert (sp - sm) / (2 * h) == pytest.approx(ds0, rel=1e-6)
            assert (dsp - dsm) / (2 * h) == pytest.approx(dds0, rel=1e-6)


class TestSegmentsConfig:
    def test_rejects_reversed_window(self):
        with pytest.raises(ValueError):
            ManeuverSegment(axis=E1, angle=1.0, t_start=0.5, t_end=0.2)

    def test_rejects_overlap(self):
        segs = [ManeuverSegment(E1, 1.0, 0.0, 0.5), ManeuverSegment(E3, 1.0, 0.4, 0.9)]
        with pytest.raises(ValueError):
            TrajectoryConfig(segments=segs, spin=0.0, duration=1.0)

    def test_axis_normalized(self):
        seg = ManeuverSegment(axis=np.array([0.0, 0.0, 5.0]), angle=1.0,
                              t_start=0.0, t_end=1.0)
        assert np.array_equal(seg.axis, E3)


class TestReferenceAt:
    def test_static_hold_before_first_segment(self):
        cfg = default_pointing_maneuver()
        ref = reference_at(cfg, 0.05)
        assert np.array_equal(ref.R_d, np.eye(3))
        assert np.array_equal(ref.w_d, 1000.0 * E3)
        assert np.array_equal(ref.w_dot_d, np.zeros(3))

    def test_final_direction_matches_composition_oracle(self):
        # matrix oracle: compose the two quarter turns, newest on the left
        cfg = default_pointing_maneuver()
        oracle = so3_exp(0.5 * np.pi * E3) @ so3_exp(0.5 * np.pi * E1)
        ref = reference_at(cfg, cfg.duration)
        assert np.abs(ref.R_d - oracle).max() < 1e-12
        assert np.allclose(ref.q_d, oracle @ E3, atol=1e-15)
        assert np.allclose(ref.q_d, E1, atol=1e-12)  # frozen oracle value
        assert np.array_equal(ref.q_d, ref.R_d[:, 2])

    def test_direction_rate_tangency_and_norm(self):
        cfg = default_pointing_maneuver()
        for t in np.linspace(0.0, cfg.duration, 1000):
            ref = reference_at(cfg, t)
            assert abs(np.linalg.norm(ref.q_d) - 1.0) < 1e-12
            assert abs(ref.q_d @ ref.q_dot_d) < 1e-10

    def test_rejects_negative_time(self):
        with pytest.raises(ValueError):
            reference_at(default_pointing_maneuver(), -0.1)

    def test_attitude_rate_consistency(self):
        # finite difference of R_d matches the pointing part of w_d
        cfg = default_pointing_maneuver()
        traj = ReferenceTrajectory(cfg)
        h = 1e-7
        for t in (0.3, 0.55, 0.9, 1.1):
            ref = traj.sample(t)
            Rp, Rm = traj.sample(t + h).R_d, traj.sample(t - h).R_d
            w_att = vee(ref.R_d.T @ ((Rp - Rm) / (2 * h)), tol=1e-4)
            target = ref.w_d - cfg.spin * E3
            assert np.abs(w_att - target).max() < 1e-5 * max(1.0, np.abs(target).max())

    def test_rate_feedforward_consistency(self):
        # finite difference of w_d matches w_dot_d inside a segment
        traj = ReferenceTrajectory(default_pointing_maneuver())
        h = 1e-7
        for t in (0.25, 0.45, 0.95):
            ref = traj.sample(t)
            fd = (traj.sample(t + h).w_d - traj.sample(t - h).w_d) / (2 * h)
            assert np.abs(fd - ref.w_dot_d).max() < 1e-4 * max(1.0, np.abs(ref.w_dot_d).max())

    def test_spin_component_during_hold(self):
        cfg = default_pointing_maneuver()
        for t in (0.0, 0.65, 1.5):
            ref = reference_at(cfg, t)
            assert ref.w_d[2] == cfg.spin

    def test_c3_continuity_across_boundaries(self):
        # third finite-difference derivative of q_d stays bounded across
        # the segment joins (the profile has vanishing jerk there)
        cfg = default_pointing_maneuver()
        traj = ReferenceTrajectory(cfg)
        h = 1e-4
        for t0 in (0.1, 0.6, 0.7, 1.2):
            ts = t0 + h * np.arange(-3, 4)
            qs = np.array([traj.sample(max(t, 0.0)).q_d for t in ts])
            jerk = (qs[4] - 3 * qs[3] + 3 * qs[2] - qs[1]) / h**3
            # peak in-segment jerk of the profile is ~ angle * 52.5 / T^3
            bound = (np.pi / 2) * 52.5 / 0.5**3 * 1.5
            assert np.abs(jerk).max() < bound

    def test_profile_peak_rate_inside_segment(self):
        cfg = default_pointing_maneuver()
        ref = reference_at(cfg, 0.35)  # midpoint of the first segment
        # |w_sp| = angle * max(ds) / T = (pi/2)(35/16)/0.5
        expect = (np.pi / 2) * (35.0 / 16.0) / 0.5
        assert np.linalg.norm(ref.w_d - cfg.spin * E3) == pytest.approx(expect, rel=1e-12)

"""Primitives for vectors in R^3, rotations, and points on the unit sphere.

All functions accept stacked inputs: a "vector" argument may have shape
(..., 3) and a "matrix" argument shape (..., 3, 3); operations broadcast
over the leading axes. Rotations map body coordinates to inertial
coordinates throughout the package.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "E1", "E2", "E3", "hat", "vee", "rodrigues_exp", "so3_exp", "half_turn",
    "project_tangent", "reorthonormalize", "check_rotation", "check_unit",
    "check_tangent", "random_rotation",
]

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])

# below this rotation angle the exponential map switches to its series form
_SMALL_ANGLE = 1e-8


def hat(r: np.ndarray) -> np.ndarray:
    """Skew-symmetric matrix of r, i.e. hat(r) @ v == cross(r, v)."""
    r = np.asarray(r, dtype=float)
    out = np.zeros(r.shape[:-1] + (3, 3))
    x, y, z = r[..., 0], r[..., 1], r[..., 2]
    out[..., 0, 1] = -z
    out[..., 0, 2] = y
    out[..., 1, 0] = z
    out[..., 1, 2] = -x
    out[..., 2, 0] = -y
    out[..., 2, 1] = x
    return out


def vee(M: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Inverse of :func:`hat`. Raises if M is not skew-symmetric within tol."""
    M = np.asarray(M, dtype=float)
    sym = np.abs(M + np.swapaxes(M, -1, -2)).max()
    if sym > tol:
        raise ValueError(f"matrix is not skew-symmetric: |M + M^T| = {sym:.3e} > {tol:.1e}")
    return np.stack([M[..., 2, 1], M[..., 0, 2], M[..., 1, 0]], axis=-1)


def so3_exp(v: np.ndarray) -> np.ndarray:
    """Rotation matrix exp(hat(v)) for a rotation vector v (angle = |v|).

    Uses the closed form I + sin|v|/|v| hat(v) + (1-cos|v|)/|v|^2 hat(v)^2,
    with the series fallback for |v| below 1e-8 so the map is smooth at 0.
    """
    v = np.asarray(v, dtype=float)
    th = np.linalg.norm(v, axis=-1)
    S = hat(v)
    S2 = S @ S
    th2 = th * th
    safe = np.where(th > _SMALL_ANGLE, th, 1.0)
    a = np.where(th > _SMALL_ANGLE, np.sin(safe) / safe, 1.0 - th2 / 6.0)
    b = np.where(th > _SMALL_ANGLE, (1.0 - np.cos(safe)) / (safe * safe), 0.5 - th2 / 24.0)
    return np.eye(3) + a[..., None, None] * S + b[..., None, None] * S2


def rodrigues_exp(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rotation by `angle` about `axis`.

    A non-unit axis is accepted: the effective rotation vector is
    axis * angle, so the angle is scaled by the axis norm. The zero
    vector maps to the identity.
    """
    return so3_exp(np.asarray(axis, dtype=float) * angle)


def half_turn(u: np.ndarray) -> np.ndarray:
    """Exact 180-degree rotation about the unit vector u: I + 2 hat(u)^2.

    Avoids the sin(pi) rounding of the generic exponential, so antipodal
    constructions built from it are exact.
    """
    S = hat(u)
    return np.eye(3) + 2.0 * (S @ S)


def project_tangent(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Component of v perpendicular to the unit vector q: (I - q q^T) v."""
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    return v - np.einsum("...i,...i->...", q, v)[..., None] * q


def reorthonormalize(R: np.ndarray) -> np.ndarray:
    """Closest rotation matrix to R (polar factor via SVD).

    Raises if R is farther than 0.1 from orthogonality in Frobenius norm,
    which signals a corrupted state rather than integrator drift.
    """
    R = np.asarray(R, dtype=float)
    drift = np.linalg.norm(
        np.swapaxes(R, -1, -2) @ R - np.eye(3), axis=(-2, -1))
    if np.max(drift) > 0.1:
        raise ValueError(f"matrix too far from SO(3): |R^T R - I|_F = {np.max(drift):.3e}")
    U, _, Vt = np.linalg.svd(R)
    out = U @ Vt
    # a negative-determinant polar factor cannot occur within the drift
    # bound above, but guard against it to keep the contract airtight
    det = np.linalg.det(out)
    if np.min(det) < 0:
        raise ValueError("polar factor has negative determinant")
    return out


def check_rotation(R: np.ndarray, tol: float = 1e-9) -> None:
    """Validate R^T R = I and det R = 1 within tol. Raises ValueError."""
    R = np.asarray(R, dtype=float)
    err = np.linalg.norm(np.swapaxes(R, -1, -2) @ R - np.eye(3), axis=(-2, -1))
    if np.max(err) > tol:
        raise ValueError(f"not orthogonal: |R^T R - I|_F = {np.max(err):.3e} > {tol:.1e}")
    derr = np.abs(np.linalg.det(R) - 1.0)
    if np.max(derr) > tol:
        raise ValueError(f"determinant differs from +1 by {np.max(derr):.3e}")


def check_unit(q: np.ndarray, tol: float = 1e-12) -> None:
    """Validate |q| = 1 within tol. Raises ValueError."""
    err = np.abs(np.linalg.norm(np.asarray(q, dtype=float), axis=-1) - 1.0)
    if np.max(err) > tol:
        raise ValueError(f"not unit norm: | |q| - 1 | = {np.max(err):.3e} > {tol:.1e}")


def check_tangent(q: np.ndarray, xi: np.ndarray, tol: float = 1e-10) -> None:
    """Validate q . xi = 0 within tol. Raises ValueError."""
    err = np.abs(np.einsum("...i,...i->...", np.asarray(q, float), np.asarray(xi, float)))
    if np.max(err) > tol:
        raise ValueError(f"not tangent: |q . xi| = {np.max(err):.3e} > {tol:.1e}")


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Rotation drawn uniformly from SO(3) (axis uniform on S^2, angle via
    the subgroup algorithm applied to a uniform quaternion)."""
    # uniform quaternion (Shoemake), converted through the exponential map
    u1, u2, u3 = rng.uniform(size=3)
    qw = np.sqrt(1 - u1) * np.sin(2 * np.pi * u2)
    qx = np.sqrt(1 - u1) * np.cos(2 * np.pi * u2)
    qy = np.sqrt(u1) * np.sin(2 * np.pi * u3)
    qz = np.sqrt(u1) * np.cos(2 * np.pi * u3)
    w, xyz = qw, np.array([qx, qy, qz])
    angle = 2.0 * np.arctan2(np.linalg.norm(xyz), w)
    n = np.linalg.norm(xyz)
    axis = xyz / n if n > 0 else E3
    return so3_exp(axis * angle)

"""Eigen-structure analysis, modal solutions, Euler kinematics, and FFT tools.

The 6x6 error-state matrix of the closed loop has, at both equilibria,
two complex-conjugate eigenpairs and two real eigenvalues. Labels follow
that pattern: lambda_1 is the complex pair of smaller |Re| ("slow"),
lambda_2 the other ("fast"), lambda_3 the real eigenvalue of smaller
magnitude (the structural zero along q), lambda_4 the remaining real one,
and lambda_5/lambda_6 the conjugates of lambda_1/lambda_2. The structural
zero's eigenvector violates the tangency constraint and is flagged
inadmissible, so it never participates in admissible solutions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

__all__ = [
    "EigenStructure", "ModalCoefficients", "Euler313", "eig6",
    "classify_equilibrium", "modal_coefficients", "linearized_solution",
    "euler313_extract", "euler313_rotation", "euler_rates",
    "nutation_freq_estimate", "nutation_rate_reconstruction", "fft_peak",
]

_SINGULAR_SIN = 1e-9


@dataclass
class EigenStructure:
    """Six eigenpairs of the error-state matrix.

    eigenvalues[k] pairs with eigenvectors[:, k]. `pair_indices` holds the
    positive-imaginary member of each complex pair, `real_indices` the real
    eigenvalues; `patterned` says whether the canonical labeling applied.
    `admissible` and `classification` are filled by
    :func:`classify_equilibrium`.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    pair_indices: list
    real_indices: list
    patterned: bool
    admissible: Optional[np.ndarray] = None
    classification: Optional[str] = None
    constraint: Optional[np.ndarray] = None


@dataclass
class ModalCoefficients:
    """Expansion x(0) = sum a_k v_k + 2 Re sum c_k v_k over an EigenStructure."""

    a: np.ndarray            # real coefficients, aligned with real_indices
    c: np.ndarray            # complex coefficients, aligned with pair_indices
    es: EigenStructure = field(repr=False, default=None)


@dataclass
class Euler313:
    """3-1-3 Euler angles: R = Rz(phi) Rx(theta) Rz(psi).

    phi is the precession angle, theta the nutation angle in (0, pi), psi
    the spin angle. `singular` marks alignment with the vertical, where
    only phi + psi (theta ~ 0) or phi - psi (theta ~ pi) is defined; the
    convention there is psi = 0.
    """

    phi: float
    theta: float
    psi: float
    singular: bool = False


def _phase_normalize(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    ph = v[k] / abs(v[k])
    return v / ph


def eig6(A: np.ndarray) -> EigenStructure:
    """Eigenvalues and eigenvectors of a real 6x6 matrix, canonically labeled.

    Complex pairs are conjugate-matched exactly (the negative-imaginary
    member is rebuilt as the conjugate of its partner) and every
    eigenvector is unit norm with its largest component real positive.
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (6, 6):
        raise ValueError("A must be 6x6")
    try:
        lam, V = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:  # QR iteration failed to converge
        raise RuntimeError(f"eigen-decomposition did not converge: {exc}") from exc

    scale = max(np.abs(lam).max(), 1.0)
    is_real = np.abs(lam.imag) <= 1e-9 * scale
    real_ids = [i for i in np.flatnonzero(is_real)]
    cplx_ids = [i for i in np.flatnonzero(~is_real)]

    # group complex eigenvalues into conjugate pairs, positive imag first
    pos = sorted([i for i in cplx_ids if lam[i].imag > 0], key=lambda i: -abs(lam[i].imag))
    neg = set(i for i in cplx_ids if lam[i].imag <= 0)
    pairs = []
    for i in pos:
        j = min(neg, key=lambda j: abs(lam[j] - np.conj(lam[i])), default=None)
        if j is None:
            raise RuntimeError("unpaired complex eigenvalue")
        neg.discard(j)
        pairs.append((i, j))

    patterned = len(pairs) == 2 and len(real_ids) == 2
    order: list[tuple[complex, np.ndarray]] = []
    pair_indices, real_indices = [], []
    if patterned:
        pairs.sort(key=lambda p: abs(lam[p[0]].real))        # slow pair first
        real_ids.sort(key=lambda i: abs(lam[i]))             # structural zero first
        v1 = _phase_normalize(V[:, pairs[0][0]] / np.linalg.norm(V[:, pairs[0][0]]))
        v2 = _phase_normalize(V[:, pairs[1][0]] / np.linalg.norm(V[:, pairs[1][0]]))
        v3 = _phase_normalize(V[:, real_ids[0]] / np.linalg.norm(V[:, real_ids[0]])).real
        v4 = _phase_normalize(V[:, real_ids[1]] / np.linalg.norm(V[:, real_ids[1]])).real
        order = [
            (lam[pairs[0][0]], v1),
            (lam[pairs[1][0]], v2),
            (lam[real_ids[0]].real + 0j, v3.astype(complex)),
            (lam[real_ids[1]].real + 0j, v4.astype(complex)),
            (np.conj(lam[pairs[0][0]]), np.conj(v1)),
            (np.conj(lam[pairs[1][0]]), np.conj(v2)),
        ]
        pair_indices = [0, 1]
        real_indices = [2, 3]
    else:
        # generic fallback: pairs first (conjugates adjacent), then reals,
        # each sorted by descending real part
        pairs.sort(key=lambda p: -lam[p[0]].real)
        real_ids.sort(key=lambda i: -lam[i].real)
        for i, _ in pairs:
            v = _phase_normalize(V[:, i] / np.linalg.norm(V[:, i]))
            pair_indices.append(len(order))
            order.append((lam[i], v))
            order.append((np.conj(lam[i]), np.conj(v)))
        for i in real_ids:
            v = _phase_normalize(V[:, i] / np.linalg.norm(V[:, i]))
            real_indices.append(len(order))
            order.append((lam[i].real + 0j, v.real.astype(complex)))

    values = np.array([p[0] for p in order])
    vectors = np.stack([p[1] for p in order], axis=1)
    return EigenStructure(eigenvalues=values, eigenvectors=vectors,
                          pair_indices=pair_indices, real_indices=real_indices,
                          patterned=patterned)


def classify_equilibrium(es: EigenStructure, C: np.ndarray,
                         tol: float = 1e-6) -> EigenStructure:
    """Flag constraint-violating eigenvectors and classify the spectrum.

    An eigenvector is admissible when it lies in the null space of the
    constraint row (|C v| <= tol for unit v). Classification looks at the
    admissible eigenvalues only: all strictly contracting -> stable-focus,
    mixed expansion/contraction -> saddle, anything else -> other.
    """
    C = np.asarray(C, dtype=float)
    adm = np.abs(es.eigenvectors.T @ C.astype(complex)) <= tol
    scale = max(np.abs(es.eigenvalues).max(), 1.0)
    re = es.eigenvalues.real[adm]
    z = 1e-9 * scale
    if re.size and np.all(re < -z):
        cls = "stable-focus"
    elif re.size and np.any(re > z) and np.any(re < -z):
        cls = "saddle"
    else:
        cls = "other"
    return EigenStructure(eigenvalues=es.eigenvalues, eigenvectors=es.eigenvectors,
                          pair_indices=es.pair_indices, real_indices=es.real_indices,
                          patterned=es.patterned, admissible=adm,
                          classification=cls, constraint=C)


def modal_coefficients(es: EigenStructure, x0: np.ndarray) -> ModalCoefficients:
    """Expand x0 in the eigenbasis: x0 = sum a_k v_k + 2 Re sum c_k v_k.

    x0 must satisfy the constraint row when one is attached. Raises for a
    near-defective eigenbasis (condition number above 1e12).
    """
    x0 = np.asarray(x0, dtype=float)
    if es.constraint is not None:
        viol = abs(float(es.constraint @ x0))
        if viol > 1e-9 * max(1.0, np.linalg.norm(x0)):
            raise ValueError(f"x0 violates the constraint row: |C x0| = {viol:.3e}")
    V = es.eigenvectors
    if np.linalg.cond(V) > 1e12:
        raise np.linalg.LinAlgError("eigenbasis is numerically defective")
    beta = np.linalg.solve(V, x0.astype(complex))
    a = np.array([beta[i].real for i in es.real_indices])
    c = np.array([beta[i] for i in es.pair_indices])
    coeffs = ModalCoefficients(a=a, c=c, es=es)
    recon = linearized_solution(es, coeffs, 0.0)
    err = np.abs(recon - x0).max()
    if err > 1e-9 * max(1.0, np.abs(x0).max()):
        raise ValueError(f"modal reconstruction error {err:.3e} exceeds 1e-9")
    return coeffs


def linearized_solution(es: EigenStructure, coeffs: ModalCoefficients, t):
    """Modal solution x(t) of the linearized dynamics.

    x(t) = sum_k a_k exp(lambda_k t) v_k
         + 2 sum_k exp(pi_k t) { Re[c_k](cos(mu_k t) Re v_k - sin(mu_k t) Im v_k)
                               - Im[c_k](cos(mu_k t) Im v_k + sin(mu_k t) Re v_k) }

    with lambda_k = pi_k + i mu_k over the complex pairs. Scalar t gives a
    6-vector; an array of times gives shape (len(t), 6).
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    x = np.zeros((t_arr.size, 6))
    for a_k, i in zip(coeffs.a, es.real_indices):
        lam = es.eigenvalues[i].real
        x += a_k * np.exp(lam * t_arr)[:, None] * es.eigenvectors[:, i].real[None, :]
    for c_k, i in zip(coeffs.c, es.pair_indices):
        lam = es.eigenvalues[i]
        pi_k, mu_k = lam.real, lam.imag
        v_re = es.eigenvectors[:, i].real
        v_im = es.eigenvectors[:, i].imag
        env = np.exp(pi_k * t_arr)[:, None]
        cos = np.cos(mu_k * t_arr)[:, None]
        sin = np.sin(mu_k * t_arr)[:, None]
        x += 2.0 * env * (c_k.real * (cos * v_re[None, :] - sin * v_im[None, :])
                          - c_k.imag * (cos * v_im[None, :] + sin * v_re[None, :]))
    return x[0] if np.isscalar(t) or np.ndim(t) == 0 else x


# ---------------------------------------------------------------------------
# "313" Euler kinematics
# ---------------------------------------------------------------------------

def euler313_rotation(phi: float, theta: float, psi: float) -> np.ndarray:
    """Compose R = Rz(phi) Rx(theta) Rz(psi)."""
    cf, sf = np.cos(phi), np.sin(phi)
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(psi), np.sin(psi)
    Rz_phi = np.array([[cf, -sf, 0.0], [sf, cf, 0.0], [0.0, 0.0, 1.0]])
    Rx_th = np.array([[1.0, 0.0, 0.0], [0.0, ct, -st], [0.0, st, ct]])
    Rz_psi = np.array([[cp, -sp, 0.0], [sp, cp, 0.0], [0.0, 0.0, 1.0]])
    return Rz_phi @ Rx_th @ Rz_psi


def euler313_extract(R: np.ndarray) -> Euler313:
    """Angles (phi, theta, psi) with R = Rz(phi) Rx(theta) Rz(psi).

    Near theta in {0, pi} the decomposition degenerates; the combined
    rotation about the vertical is returned in phi with psi = 0 and the
    sample flagged singular.
    """
    R = np.asarray(R, dtype=float)
    theta = float(np.arccos(np.clip(R[2, 2], -1.0, 1.0)))
    if abs(np.sin(theta)) <= _SINGULAR_SIN:
        if R[2, 2] > 0:      # theta ~ 0: R ~ Rz(phi + psi)
            phi = float(np.arctan2(R[1, 0], R[0, 0]))
        else:                # theta ~ pi: R ~ Rz(phi - psi) Rx(pi)
            phi = float(np.arctan2(-R[1, 0], R[0, 0]))
        return Euler313(phi=phi, theta=theta, psi=0.0, singular=True)
    phi = float(np.arctan2(R[0, 2], -R[1, 2]))
    psi = float(np.arctan2(R[2, 0], R[2, 1]))
    return Euler313(phi=phi, theta=theta, psi=psi, singular=False)


def euler_rates(angles: Euler313, w: np.ndarray) -> Tuple[float, float, float]:
    """Euler angle rates (phi_dot, theta_dot, psi_dot) from the body rate w.

    [phi_dot ]   [ sin(psi)/sin(th)          cos(psi)/sin(th)          0 ]
    [theta_dot] = [ cos(psi)                 -sin(psi)                 0 ] w
    [psi_dot ]   [-sin(psi)cos(th)/sin(th)  -cos(psi)cos(th)/sin(th)   1 ]

    Raises at the vertical-alignment singularity sin(theta) ~ 0 where the
    precession rate is undefined.
    """
    st = np.sin(angles.theta)
    if abs(st) <= _SINGULAR_SIN:
        raise ValueError("Euler rate matrix is singular at theta in {0, pi}")
    ct = np.cos(angles.theta)
    cp, sp = np.cos(angles.psi), np.sin(angles.psi)
    w = np.asarray(w, dtype=float)
    phi_dot = (sp * w[0] + cp * w[1]) / st
    theta_dot = cp * w[0] - sp * w[1]
    psi_dot = -(sp * ct * w[0] + cp * ct * w[1]) / st + w[2]
    return float(phi_dot), float(theta_dot), float(psi_dot)


# ---------------------------------------------------------------------------
# nutation frequency
# ---------------------------------------------------------------------------

def nutation_freq_estimate(spin_rate: float, es_desired: EigenStructure) -> float:
    """Predicted nutation-rate oscillation frequency [Hz].

    Uses mu_1, the imaginary part of the slow admissible contracting
    complex pair (largest real part strictly below zero among admissible
    pairs), and returns (spin_rate + mu_1) / (2 pi).
    """
    if es_desired.admissible is None:
        raise ValueError("run classify_equilibrium first (admissibility unknown)")
    best = None
    for i in es_desired.pair_indices:
        lam = es_desired.eigenvalues[i]
        if es_desired.admissible[i] and lam.real < 0:
            if best is None or lam.real > best.real:
                best = lam
    if best is None:
        raise ValueError("no admissible contracting complex pair")
    mu1 = best.imag
    return float((spin_rate + mu1) / (2.0 * np.pi))


def nutation_rate_reconstruction(es: EigenStructure, coeffs: ModalCoefficients,
                                 psi0: float, spin_rate: float, t):
    """Nutation rate from the modal solution: full and slow-pair forms.

    The full form projects the modal solution onto the transverse
    angular-velocity components and rotates them through the spin angle
    psi(t) ~ spin_rate * t + psi0:

        theta_dot(t) = cos(psi) x(t).e4 - sin(psi) x(t).e5

    The approximate form keeps only the slow complex pair, with the phase
    folded into the four constants (no contraction envelope):

        theta_dot ~ 2 cos(spin t) [C1 cos(mu1 t) + D1 sin(mu1 t)]
                  - 2 sin(spin t) [C2 cos(mu1 t) + D2 sin(mu1 t)]

    Returns (full, approx) evaluated at t (scalar or array).
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    x = linearized_solution(es, coeffs, t_arr)
    psi_t = spin_rate * t_arr + psi0
    full = np.cos(psi_t) * x[:, 3] - np.sin(psi_t) * x[:, 4]

    i1 = es.pair_indices[0]
    lam1 = es.eigenvalues[i1]
    v1 = es.eigenvectors[:, i1]
    c1 = coeffs.c[0] if len(coeffs.c) else 0.0 + 0.0j
    mu1 = lam1.imag
    C = [c1.real * v1[3 + i].real - c1.imag * v1[3 + i].imag for i in range(2)]
    D = [-c1.real * v1[3 + i].imag - c1.imag * v1[3 + i].real for i in range(2)]
    cp0, sp0 = np.cos(psi0), np.sin(psi0)
    C1b = cp0 * C[0] - sp0 * C[1]
    D1b = cp0 * D[0] - sp0 * D[1]
    C2b = cp0 * C[1] + sp0 * C[0]
    D2b = cp0 * D[1] + sp0 * D[0]
    approx = (2.0 * np.cos(spin_rate * t_arr) * (C1b * np.cos(mu1 * t_arr) + D1b * np.sin(mu1 * t_arr))
              - 2.0 * np.sin(spin_rate * t_arr) * (C2b * np.cos(mu1 * t_arr) + D2b * np.sin(mu1 * t_arr)))
    if np.isscalar(t) or np.ndim(t) == 0:
        return float(full[0]), float(approx[0])
    return full, approx


def fft_peak(signal: np.ndarray, fs: float) -> Tuple[float, float]:
    """Dominant spectral peak of a real signal.

    The signal is mean-removed and transformed with a rectangular window;
    the peak bin is refined by parabolic interpolation over its neighbors.
    Returns (frequency [Hz], interpolated magnitude). Requires at least
    1024 samples and a non-constant signal.
    """
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1:
        raise ValueError("signal must be one-dimensional")
    if x.size < 1024:
        raise ValueError(f"need >= 1024 samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("signal contains non-finite samples")
    x = x - x.mean()
    if np.max(np.abs(x)) == 0.0:
        raise ValueError("constant signal has no spectral peak")
    mag = np.abs(np.fft.rfft(x))
    k = 1 + int(np.argmax(mag[1:]))          # skip the (removed) DC bin
    df = fs / x.size
    if 1 <= k < mag.size - 1:
        a, b, c = mag[k - 1], mag[k], mag[k + 1]
        denom = a - 2.0 * b + c
        delta = 0.5 * (a - c) / denom if denom != 0 else 0.0
        peak_mag = b - 0.25 * (a - c) * delta
    else:
        delta, peak_mag = 0.0, mag[k]
    return float((k + delta) * df), float(peak_mag)

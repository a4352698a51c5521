"""Closed-form two-level solution and the convex-combination experiment.

For ``H = Tr(h rho)`` and ``S = S3``, a trace-one 2x2 state
``rho = 1/2 + r.sigma`` evolves by pure conjugation with the generator
``h / sqrt(1/4 + 3|r|^2)``; ``|r|`` is conserved, so the rotation rate
depends on the initial mixture.  For ``h = E sigma_x`` and
``r = (0, 0, eps/2)`` the eigenvectors rotate at
``omega = 2E / sqrt(1 + 3 eps^2)``.
"""

from __future__ import annotations

import numpy as np

from .dynamics import ModelSpec, integrate
from .errors import DomainError, UnsupportedModelError, ValidationError
from .functionals import EntropySpec, HamiltonianSpec
from .matrix import PAULI, as_hermitian, bloch_vector, hermitian_eig


def s3_model(h):
    h = as_hermitian(h, name="h")
    return ModelSpec(h.shape[0], HamiltonianSpec(matrix=h), EntropySpec.preset("S3"))


def s3_generator(h, r):
    """Effective generator ``h / sqrt(1/4 + 3|r|^2)`` for Bloch vector ``r``."""
    r = np.asarray(r, dtype=float)
    return np.asarray(h) / np.sqrt(0.25 + 3.0 * float(r @ r))


def analytic_rho_2x2(h, r, t):
    """Closed-form S3 solution at time(s) ``t`` from ``rho(0) = 1/2 + r.sigma``.

    ``t`` may be a scalar (returns a 2x2 matrix) or an array (returns a
    stack of matrices).
    """
    h = as_hermitian(h, name="h")
    r = np.asarray(r, dtype=float)
    if h.shape != (2, 2) or r.shape != (3,):
        raise ValidationError(f"need a 2x2 h and a Bloch 3-vector, got {h.shape} and {r.shape}")
    dec = hermitian_eig(s3_generator(h, r))
    V, w = dec.eigenvectors, dec.eigenvalues
    rs = sum(ri * s for ri, s in zip(r, PAULI[1:]))
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    phases = np.exp(-1j * np.outer(ts, w))
    U = np.einsum("ij,tj,kj->tik", V, phases, V.conj())
    out = 0.5 * np.eye(2) + U @ rs @ U.conj().transpose(0, 2, 1)
    out = 0.5 * (out + out.conj().transpose(0, 2, 1))
    return out[0] if np.ndim(t) == 0 else out


def omega(E, eps):
    return 2.0 * E / np.sqrt(1.0 + 3.0 * eps * eps)


def analytic_eigvecs(E, eps, t):
    """``(omega, phi1, phi2)`` for ``h = E sigma_x``, ``r = (0, 0, eps/2)``."""
    if eps == 0:
        raise DomainError("eps = 0 gives a degenerate spectrum; eigenvectors are not unique")
    w = omega(E, eps)
    c, s = np.cos(w * t), np.sin(w * t)
    return w, np.array([c, -1j * s]), np.array([-1j * s, c])


def two_level_scenario(E=1.0, eps=0.5):
    """``(model, rho0, r)`` for ``h = E sigma_x`` and ``rho0 = 1/2 + (eps/2) sigma_z``."""
    r = np.array([0.0, 0.0, eps / 2.0])
    rho0 = 0.5 * PAULI[0] + r[2] * PAULI[3]
    return s3_model(E * PAULI[1]), rho0, r


def frobenius_errors(traj, h, r):
    """Per-sample Frobenius distance between a trajectory and the closed form."""
    exact = analytic_rho_2x2(h, r, traj.times)
    return np.linalg.norm(traj.rhos - exact, axis=(1, 2))


def oscillation_omega(times, signal):
    """Eigenvector rotation rate from the zero crossings of ``signal``.

    Crossings are located by linear interpolation and fitted to an
    arithmetic progression.  For the two-level conjugation flow the
    off-diagonal element oscillates at twice the rotation rate, so crossings
    are spaced ``pi / (2 omega)``.
    """
    times = np.asarray(times)
    signal = np.asarray(signal)
    idx = np.nonzero(np.signbit(signal[:-1]) != np.signbit(signal[1:]))[0]
    idx = idx[signal[idx] != 0.0] if len(idx) else idx
    if len(idx) < 3:
        raise DomainError(f"need at least 3 zero crossings to fit a frequency, found {len(idx)}")
    t0, t1 = times[idx], times[idx + 1]
    s0, s1 = signal[idx], signal[idx + 1]
    crossings = t0 - s0 * (t1 - t0) / (s1 - s0)
    spacing = np.polyfit(np.arange(len(crossings)), crossings, 1)[0]
    return np.pi / (2.0 * spacing)


def _fix_global_phase(U):
    z = U[..., 0, 0]
    az = np.abs(z)
    ph = np.where(az > 0, np.conj(z) / np.where(az > 0, az, 1.0), 1.0)
    return U * ph[..., None, None]


def convex_scenario(rho1, rho2, p1, model, dt=1e-2, t_end=10.0, p1_alt=None, sample_every=1):
    """Evolve ``p1 rho1 + (1 - p1) rho2`` and test the common-unitary picture.

    Returns a dict with the trajectory, the phase-fixed propagators, the
    maximum decomposition residual
    ``|rho(t) - p1 U rho1 U^+ - p2 U rho2 U^+|_F`` and, if ``p1_alt`` is
    given, the maximum Frobenius distance between the propagators obtained
    for the two weights.
    """
    rho1 = as_hermitian(rho1, name="rho1")
    rho2 = as_hermitian(rho2, name="rho2")
    if model.dim != 2 or rho1.shape != (2, 2) or rho2.shape != (2, 2):
        raise UnsupportedModelError("convex scenario is defined for 2x2 models")
    if not model.hamiltonian.is_linear:
        raise UnsupportedModelError("convex scenario needs a linear Hamiltonian")
    if not 0.0 < p1 <= 1.0:
        raise ValidationError(f"weight p1 must lie in (0, 1], got {p1}")

    def run(p):
        traj = integrate(model, p * rho1 + (1.0 - p) * rho2, "isospectral", dt, t_end,
                         sample_every, track_unitary=True)
        return traj, _fix_global_phase(traj.unitaries)

    traj, U = run(p1)
    Ud = U.conj().transpose(0, 2, 1)
    mix = p1 * (U @ rho1 @ Ud) + (1.0 - p1) * (U @ rho2 @ Ud)
    residual = np.linalg.norm(traj.rhos - mix, axis=(1, 2))
    out = {
        "trajectory": traj,
        "unitaries": U,
        "bloch_length": float(np.linalg.norm(bloch_vector(traj.rhos[0]))),
        "decomposition_residual": float(residual.max()),
    }
    if p1_alt is not None:
        traj_alt, U_alt = run(p1_alt)
        out["trajectory_alt"] = traj_alt
        out["unitaries_alt"] = U_alt
        out["unitary_difference"] = float(np.linalg.norm(U - U_alt, axis=(1, 2)).max())
    return out

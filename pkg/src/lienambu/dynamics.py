"""Finite-dimensional Lie-Nambu dynamics and fixed-step integrators.

The triple-bracket equation ``i d(rho_a)/dt = {rho_a, H, S}`` reduces, for
matrix coordinates, to

    d(rho)/dt = -i [grad H, grad S]

The sign is pinned by two anchors: the ``linear`` entropy ``Tr(rho^2)/2``
gives the von Neumann equation, and ``S3`` gives
``i d(rho)/dt = sqrt(Tr rho / Tr rho^3) [h, rho^2]``.

Two steppers are provided.  ``step_rk4`` is classical RK4 on the right-hand
side.  ``step_isospectral`` writes the flow as ``-i [A(rho), rho]`` with the
effective Hamiltonian ``A`` and advances by exact unitary conjugations, so
the spectrum is kept to eigensolver precision for any step size.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, LieNambuError, UnsupportedModelError, ValidationError
from .functionals import (
    CASIMIR_FLOOR,
    EntropySpec,
    HamiltonianSpec,
    _casimirs,
    _check_domain,
    _evaluate,
    _polynomial,
    hamiltonian_gradient,
)
from .matrix import (
    SpectralDecomposition,
    as_hermitian,
    hermitian_eig_batch,
    hermitize,
    hermiticity_residue,
    unitary_from_generator,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelSpec:
    dim: int
    hamiltonian: HamiltonianSpec
    entropy: EntropySpec

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError(f"dimension must be positive, got {self.dim}")
        if self.hamiltonian.dim is not None and self.hamiltonian.dim != self.dim:
            raise ValidationError(
                f"hamiltonian is {self.hamiltonian.dim}x{self.hamiltonian.dim}, model dimension is {self.dim}")


def _entropy_gradient_and_coeffs(spec, rho):
    orders = {o for _, fs in spec.terms for o, _ in fs}
    C, P = _casimirs(rho, orders | {spec.max_order})
    _check_domain(spec, C)
    a = _polynomial(spec, C)
    G = a[0] * P[0]
    for m in range(1, len(a)):
        if a[m]:
            G = G + a[m] * P[m]
    return hermitize(G), a, P


def rhs(model, rho):
    """``-i [grad H, grad S]`` at ``rho``."""
    gS, _, _ = _entropy_gradient_and_coeffs(model.entropy, rho)
    gH = hamiltonian_gradient(model.hamiltonian, rho)
    return hermitize(-1j * (gH @ gS - gS @ gH))


def effective_hamiltonian(model, rho):
    """Hermitian ``A`` with ``[grad H, grad S] = [A, rho]``.

    Uses ``[G, rho^m] = [B_m, rho]`` with ``B_m = sum_k rho^k G rho^(m-1-k)``,
    built by the recursion ``B_(m+1) = rho B_m + G rho^m``.
    """
    if not model.hamiltonian.is_linear:
        raise UnsupportedModelError("effective Hamiltonian requires a linear Hamiltonian Tr(h rho)")
    _, a, P = _entropy_gradient_and_coeffs(model.entropy, rho)
    G = model.hamiltonian.matrix
    A = np.zeros_like(G)
    B = G
    for m in range(1, len(a)):
        if a[m]:
            A = A + a[m] * B
        if m + 1 < len(a):
            B = rho @ B + G @ P[m]
    return hermitize(A)


def _rk4(model, rho, dt):
    residue = 0.0

    def stage(M):
        nonlocal residue
        residue = max(residue, hermiticity_residue(M))
        return hermitize(M)

    k1 = rhs(model, rho)
    k2 = rhs(model, stage(rho + 0.5 * dt * k1))
    k3 = rhs(model, stage(rho + 0.5 * dt * k2))
    k4 = rhs(model, stage(rho + dt * k3))
    out = stage(rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
    if residue:
        log.debug("rk4 discarded anti-Hermitian residue %.3e", residue)
    return out, residue


def _conjugate(U, rho):
    M = U @ rho @ U.conj().T
    return hermitize(M), hermiticity_residue(M)


def _isospectral(model, rho, dt):
    """Midpoint conjugation step; returns (rho_new, step unitary, residue)."""
    U_half = unitary_from_generator(effective_hamiltonian(model, rho), 0.5 * dt)
    rho_mid, r1 = _conjugate(U_half, rho)
    U = unitary_from_generator(effective_hamiltonian(model, rho_mid), dt)
    out, r2 = _conjugate(U, rho)
    return out, U, max(r1, r2)


def step_rk4(model, rho, dt):
    if dt <= 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    return _rk4(model, as_hermitian(rho, name="rho"), dt)[0]


def step_isospectral(model, rho, dt):
    rho = as_hermitian(rho, name="rho")
    if dt == 0:
        return rho
    if dt < 0:
        raise ValidationError(f"dt must be nonnegative, got {dt}")
    return _isospectral(model, rho, dt)[0]


METHODS = ("rk4", "isospectral")


@dataclass
class Trajectory:
    """Sampled solution. ``rhos[k]`` is the state at ``times[k]``.

    ``channels`` maps names (``lambda_1``.., ``C_1``.., ``S_value``,
    ``H_value``, ``herm_residue``) to per-sample arrays.  Eigenvalue
    channels are continuity-matched, starting from descending order.
    ``unitaries`` holds the accumulated propagator for isospectral runs.
    """

    times: np.ndarray
    rhos: np.ndarray
    channels: dict = field(default_factory=dict)
    unitaries: np.ndarray | None = None

    def __len__(self):
        return len(self.times)

    @property
    def dim(self):
        return self.rhos.shape[1]

    def eigenvalues(self):
        d = self.dim
        return np.column_stack([self.channels[f"lambda_{k + 1}"] for k in range(d)])


def _step_schedule(dt, t_end):
    if dt <= 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    if t_end < 0:
        raise ValidationError(f"t_end must be nonnegative, got {t_end}")
    n = math.ceil(t_end / dt - 1e-9) if t_end > 0 else 0
    times = [k * dt for k in range(n)] + [t_end]
    return n, times


def integrate(model, rho0, method="rk4", dt=1e-3, t_end=1.0, sample_every=1, n_max=6,
              track_unitary=False):
    """Fixed-step integration from ``t = 0`` to ``t_end``.

    The last step is shortened so the final sample lands exactly on
    ``t_end``.  Samples are taken every ``sample_every`` steps plus the
    final one.
    """
    from .spectral import match_spectra

    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}; expected one of {METHODS}")
    if sample_every < 1 or int(sample_every) != sample_every:
        raise ValidationError(f"sample_every must be a positive integer, got {sample_every}")
    rho = as_hermitian(rho0, name="rho0")
    if rho.shape[0] != model.dim:
        raise ValidationError(f"initial state is {rho.shape[0]}x{rho.shape[0]}, model dimension is {model.dim}")
    if track_unitary and method != "isospectral":
        raise ValidationError("propagator tracking needs the isospectral method")

    n, times = _step_schedule(dt, t_end)
    d = model.dim
    U = np.eye(d, dtype=complex)
    samples_t, samples_rho, samples_U, residues = [0.0], [rho], [U], [0.0]
    pending_residue = 0.0
    for k in range(n):
        t = times[k]
        h = times[k + 1] - t
        try:
            if method == "rk4":
                rho, res = _rk4(model, rho, h)
            else:
                rho, U_step, res = _isospectral(model, rho, h)
                if track_unitary:
                    U = U_step @ U
        except LieNambuError as exc:
            exc.t = t
            raise
        pending_residue = max(pending_residue, res)
        if (k + 1) % sample_every == 0 or k + 1 == n:
            samples_t.append(times[k + 1])
            samples_rho.append(rho)
            samples_U.append(U)
            residues.append(pending_residue)
            pending_residue = 0.0

    rhos = np.array(samples_rho)
    traj = Trajectory(np.array(samples_t), rhos)
    if track_unitary:
        traj.unitaries = np.array(samples_U)

    ch = traj.channels
    w, V = hermitian_eig_batch(rhos)
    perm = np.arange(d)
    lam = np.empty_like(w)
    lam[0] = w[0]
    for i in range(1, len(rhos)):
        step_perm = match_spectra(SpectralDecomposition(w[i - 1], V[i - 1]), SpectralDecomposition(w[i], V[i]))
        perm = step_perm[perm]
        lam[i] = w[i][perm]
    for k in range(d):
        ch[f"lambda_{k + 1}"] = lam[:, k]
    casimirs = batch_casimirs(rhos, max(n_max, model.entropy.max_order))
    for m in range(1, n_max + 1):
        ch[f"C_{m}"] = casimirs[m]
    ch["S_value"] = batch_entropy(model.entropy, casimirs)
    if model.hamiltonian.is_linear:
        ch["H_value"] = np.einsum("ij,kji->k", model.hamiltonian.matrix, rhos).real
    else:
        ch["H_value"] = batch_entropy(model.hamiltonian.casimir, batch_casimirs(rhos, model.hamiltonian.casimir.max_order))
    ch["herm_residue"] = np.array(residues)
    return traj


def batch_casimirs(rhos, n_max):
    """``{n: Tr(rho_k^n) over the stack}`` for n = 1..n_max."""
    out = {}
    P = rhos
    for n in range(1, n_max + 1):
        if n > 1:
            P = P @ rhos
        out[n] = np.trace(P, axis1=1, axis2=2).real
    return out


def batch_entropy(spec, casimirs):
    for n in {o for _, fs in spec.terms for o, _ in fs}:
        c = casimirs[n]
        bad = np.nonzero(c <= CASIMIR_FLOOR)[0]
        if bad.size and any(e != int(e) for _, fs in spec.terms for o, e in fs if o == n):
            raise DomainError(f"C_{n} = {c[bad[0]]:.3e} must be positive under a fractional exponent")
    return _evaluate(spec, casimirs)

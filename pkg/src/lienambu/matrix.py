"""Dense complex matrix helpers and a cyclic Jacobi Hermitian eigensolver.

Matrices are plain ``numpy`` complex arrays.  Functions never mutate their
arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ValidationError

HERMITIAN_TOL = 1e-12
JACOBI_REL_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
DEGENERACY_TOL = 1e-10

PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def as_matrix(M, name="matrix"):
    """Return ``M`` as a finite square complex array (a copy)."""
    A = np.array(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ValidationError(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValidationError(f"{name} has non-finite entries")
    return A


def hermiticity_residue(M):
    """Max entrywise modulus of ``M - M^dagger``."""
    M = np.asarray(M)
    return float(np.max(np.abs(M - M.conj().T))) if M.size else 0.0


def as_hermitian(M, tol=HERMITIAN_TOL, name="matrix"):
    """Validate Hermiticity within ``tol`` and return the exact Hermitian part."""
    A = as_matrix(M, name)
    dev = hermiticity_residue(A)
    if dev > tol:
        raise ValidationError(f"{name} is not Hermitian: max |M - M^dagger| = {dev:.3e} > {tol:.1e}")
    return hermitize(A)


def hermitize(M):
    return 0.5 * (M + M.conj().T)


def pauli_matrix(coeffs):
    """c0*1 + c1*sigma_x + c2*sigma_y + c3*sigma_z."""
    if len(coeffs) != 4:
        raise ValidationError(f"expected 4 Pauli coefficients, got {len(coeffs)}")
    return sum(float(c) * s for c, s in zip(coeffs, PAULI))


def bloch_vector(rho):
    """Real 3-vector r with rho = rho0*1 + r.sigma for a 2x2 Hermitian rho."""
    rho = np.asarray(rho)
    if rho.shape != (2, 2):
        raise ValidationError(f"Bloch vector needs a 2x2 matrix, got shape {rho.shape}")
    return np.array([0.5 * np.trace(s @ rho).real for s in PAULI[1:]])


def _check_same_dim(*mats):
    shapes = {np.shape(m) for m in mats}
    if len(shapes) != 1:
        raise ValidationError(f"dimension mismatch: {sorted(shapes)}")


def commutator(A, B):
    _check_same_dim(A, B)
    return A @ B - B @ A


def anticommutator(A, B):
    _check_same_dim(A, B)
    return A @ B + B @ A


def matrix_power(M, n):
    """``M**n`` by repeated squaring; ``M**0`` is the identity."""
    M = as_matrix(M)
    if int(n) != n or n < 0:
        raise ValidationError(f"power must be a nonnegative integer, got {n}")
    n = int(n)
    result = np.eye(M.shape[0], dtype=complex)
    base = M
    while n:
        if n & 1:
            result = result @ base
        n >>= 1
        if n:
            base = base @ base
    return result


def trace_product(mats):
    """Trace of the ordered product of ``mats``."""
    if not mats:
        raise ValidationError("trace_product needs at least one matrix")
    _check_same_dim(*mats)
    P = mats[0]
    for M in mats[1:]:
        P = P @ M
    return complex(np.trace(P))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (descending) and unitary eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T

    @property
    def dim(self):
        return len(self.eigenvalues)


def _fix_phase(v):
    k = int(np.argmax(np.abs(v)))
    z = v[k]
    if abs(z) == 0:
        return v
    v = v * (np.conj(z) / abs(z))
    v[k] = abs(z)
    return v


def _jacobi_sweeps(A, V, rel_tol, max_sweeps):
    """Cyclic Jacobi on a stack ``A`` of shape (N, d, d), in place."""
    d = A.shape[-1]
    if d == 1:
        return
    upper = np.triu_indices(d, 1)
    thresh = rel_tol * np.max(np.abs(A), axis=(1, 2))
    for _ in range(max_sweeps):
        if np.all(np.max(np.abs(A[:, upper[0], upper[1]]), axis=1) <= thresh):
            return
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[:, p, q]
                b = np.abs(apq)
                live = b > 0
                if not live.any():
                    continue
                bb = np.where(live, b, 1.0)
                phase = np.where(live, apq / bb, 1.0)
                theta = (A[:, q, q].real - A[:, p, p].real) / (2.0 * bb)
                sign = np.where(theta >= 0, 1.0, -1.0)
                t = np.where(live, sign / (np.abs(theta) + np.hypot(theta, 1.0)), 0.0)
                cs = 1.0 / np.sqrt(t * t + 1.0)
                sn = t * cs
                G = np.empty((len(A), 2, 2), dtype=complex)
                G[:, 0, 0] = cs
                G[:, 0, 1] = sn * phase
                G[:, 1, 0] = -sn * np.conj(phase)
                G[:, 1, 1] = cs
                idx = [p, q]
                A[:, :, idx] = A[:, :, idx] @ G
                A[:, idx, :] = G.conj().transpose(0, 2, 1) @ A[:, idx, :]
                A[:, p, q] = A[:, q, p] = 0.0
                A[:, p, p] = A[:, p, p].real
                A[:, q, q] = A[:, q, q].real
                V[:, :, idx] = V[:, :, idx] @ G
    off = np.max(np.abs(A[:, upper[0], upper[1]]), axis=1)
    if np.any(off > thresh):
        raise ConvergenceError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")


def hermitian_eig_batch(stack, tol=HERMITIAN_TOL, rel_tol=JACOBI_REL_TOL, max_sweeps=JACOBI_MAX_SWEEPS,
                        degeneracy_tol=DEGENERACY_TOL):
    """Diagonalize a stack of Hermitian matrices; returns ``(w, V)``.

    ``w`` has shape (N, d) with rows descending and ``V[n]`` holds the
    eigenvector columns of ``stack[n]``.  Conventions as in
    ``hermitian_eig``.
    """
    A = np.array(stack, dtype=complex)
    if A.ndim != 3 or A.shape[1] != A.shape[2]:
        raise ValidationError(f"expected a stack of square matrices, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValidationError("matrix has non-finite entries")
    dev = np.max(np.abs(A - A.conj().transpose(0, 2, 1))) if A.size else 0.0
    if dev > tol:
        raise ValidationError(f"matrix is not Hermitian: max |M - M^dagger| = {dev:.3e} > {tol:.1e}")
    A = 0.5 * (A + A.conj().transpose(0, 2, 1))
    N, d, _ = A.shape
    V = np.broadcast_to(np.eye(d, dtype=complex), A.shape).copy()
    _jacobi_sweeps(A, V, rel_tol, max_sweeps)

    w = np.diagonal(A, axis1=1, axis2=2).real
    order = np.argsort(-w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    V = np.take_along_axis(V, order[:, None, :], axis=2)

    k = np.argmax(np.abs(V), axis=1)
    z = np.take_along_axis(V, k[:, None, :], axis=1)
    az = np.abs(z)
    V = V * np.where(az > 0, np.conj(z) / np.where(az > 0, az, 1.0), 1.0)
    np.put_along_axis(V, k[:, None, :], az.astype(complex), axis=1)

    if d > 1:
        for n in np.nonzero(np.any(w[:, :-1] - w[:, 1:] <= degeneracy_tol, axis=1))[0]:
            start = 0
            for j in range(1, d + 1):
                if j == d or w[n, j - 1] - w[n, j] > degeneracy_tol:
                    if j - start > 1:
                        V[n, :, start:j] = _canonical_cluster(V[n, :, start:j])
                    start = j
    return w, V


def hermitian_eig(M, tol=HERMITIAN_TOL, rel_tol=JACOBI_REL_TOL, max_sweeps=JACOBI_MAX_SWEEPS,
                  degeneracy_tol=DEGENERACY_TOL):
    """Diagonalize a Hermitian matrix with cyclic complex Jacobi rotations.

    Sweeps the strict upper triangle until the largest off-diagonal modulus
    drops below ``rel_tol * max|M|``.  Eigenvalues come back descending.
    Eigenvectors of clustered eigenvalues (within ``degeneracy_tol``) are
    re-orthonormalized in index order; each column is then rotated so its
    largest-modulus entry is real and nonnegative, and columns inside a
    cluster are ordered lexicographically on their entries.
    """
    A = as_matrix(M)
    w, V = hermitian_eig_batch(A[None], tol, rel_tol, max_sweeps, degeneracy_tol)
    return SpectralDecomposition(w[0], V[0])


def _canonical_cluster(block):
    cols = []
    for j in range(block.shape[1]):
        v = block[:, j].copy()
        for u in cols:
            v = v - (u.conj() @ v) * u
        cols.append(_fix_phase(v / np.linalg.norm(v)))

    def key(v):
        r = np.round(v, 10)
        return [x for z in r for x in (-z.real, -z.imag)]

    cols.sort(key=key)
    return np.column_stack(cols)


def unitary_from_generator(A, delta):
    """``exp(-i A delta)`` for Hermitian ``A`` via its spectral decomposition."""
    dec = hermitian_eig(A)
    V = dec.eigenvectors
    return (V * np.exp(-1j * dec.eigenvalues * delta)) @ V.conj().T


def unitary_conjugate(A, delta, rho):
    """``exp(-i A delta) rho exp(+i A delta)`` for Hermitian ``A`` and ``rho``."""
    rho = as_hermitian(rho, name="rho")
    _check_same_dim(A, rho)
    if delta == 0:
        return rho
    U = unitary_from_generator(A, delta)
    return hermitize(U @ rho @ U.conj().T)

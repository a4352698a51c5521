"""Explicit structure constants and higher metric tensors over composite indices.

A composite index ``a = (alpha, alpha')`` is flattened as ``alpha * d + alpha'``.
With the scalar product and Poisson tensor both set to Kronecker deltas::

    Omega_abc = d(alpha, beta') d(beta, gamma') d(gamma, alpha')
              - d(alpha, gamma') d(beta, alpha') d(gamma, beta')

    g^{a_1..a_n} = d(alpha_1, alpha'_n) d(alpha_2, alpha'_1) ... d(alpha_n, alpha'_(n-1))

State components ``rho_a`` are matrix entries ``rho[alpha, alpha']``.  A
gradient component ``dF/d rho_a`` is the partial derivative with respect to
that entry, i.e. ``gradF[alpha', alpha]`` for the matrix gradient defined by
``dF = Tr(gradF d rho)``.  With this placement the contraction reproduces
``Tr(F [G, H])`` and the coordinate field reproduces the matrix commutator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SizeGuardError, ValidationError
from .functionals import casimir_gradient
from .matrix import as_matrix

MAX_STRUCTURE_DIM = 4
MAX_METRIC_ENTRIES = 10**6


@dataclass(frozen=True)
class StructureConstants:
    dim: int
    omega: np.ndarray


@dataclass(frozen=True)
class HigherMetric:
    dim: int
    order: int
    g: np.ndarray


def composite_index(alpha, alpha_p, d):
    if not (0 <= alpha < d and 0 <= alpha_p < d):
        raise ValidationError(f"index pair ({alpha}, {alpha_p}) out of range for d = {d}")
    return alpha * d + alpha_p


def state_vector(rho):
    """Lower-index components ``rho_a``."""
    return np.asarray(rho).reshape(-1)


def gradient_vector(grad):
    """Upper-index components ``dF/d rho_a`` of a matrix gradient."""
    return np.asarray(grad).T.reshape(-1)


def build_structure_constants(d):
    if d < 1:
        raise ValidationError(f"dimension must be positive, got {d}")
    if d > MAX_STRUCTURE_DIM:
        raise SizeGuardError(f"d = {d} exceeds the structure-constant size guard (d <= {MAX_STRUCTURE_DIM})")
    delta = np.eye(d)
    # axes: alpha, alpha', beta, beta', gamma, gamma'
    first = np.einsum("ad,be,cf->afbdce", delta, delta, delta)
    second = np.einsum("af,bd,ce->adbecf", delta, delta, delta)
    omega = (first - second).reshape(d * d, d * d, d * d)
    return StructureConstants(d, omega)


def _check(omega, *mats):
    out = []
    for M in mats:
        M = as_matrix(M)
        if M.shape[0] != omega.dim:
            raise ValidationError(f"matrix is {M.shape[0]}x{M.shape[0]}, structure constants have d = {omega.dim}")
        out.append(M)
    return out


def triple_bracket(F_grad, G_grad, H_grad, omega):
    """``Omega_abc dF^a dG^b dH^c`` by raw contraction."""
    F, G, H = _check(omega, F_grad, G_grad, H_grad)
    f, g, h = (gradient_vector(M) for M in (F, G, H))
    # contracting F first keeps {C_1, G, H} exactly zero: the partial sum is integer-valued
    return complex(g @ np.tensordot(f, omega.omega, axes=(0, 0)) @ h)


def coordinate_bracket_field(H_grad, S_grad, omega):
    """Matrix of ``{rho_(alpha alpha'), H, S}`` over all coordinates."""
    H, S = _check(omega, H_grad, S_grad)
    field = np.einsum("abc,b,c->a", omega.omega, gradient_vector(H), gradient_vector(S))
    return field.reshape(omega.dim, omega.dim)


def build_higher_metric(d, n):
    if d < 1 or n < 1:
        raise ValidationError(f"need positive d and n, got d = {d}, n = {n}")
    if (d * d) ** n > MAX_METRIC_ENTRIES:
        raise SizeGuardError(f"(d^2)^n = {(d * d) ** n} exceeds the guard of {MAX_METRIC_ENTRIES} entries")
    idx = np.indices((d,) * (2 * n))
    # idx[2k] is alpha_(k+1), idx[2k+1] is alpha'_(k+1); couple alpha_(k+1) with alpha'_k cyclically
    g = np.ones((d,) * (2 * n))
    for k in range(n):
        g = g * (idx[2 * k] == idx[2 * ((k - 1) % n) + 1])
    return HigherMetric(d, n, g.reshape((d * d,) * n))


def casimir_via_contraction(rho, n, metric=None):
    """``g^{a_1..a_n} rho_a1 ... rho_an``."""
    rho = as_matrix(rho, "rho")
    d = rho.shape[0]
    if metric is None:
        metric = build_higher_metric(d, n)
    elif (metric.dim, metric.order) != (d, n):
        raise ValidationError("metric does not match rho's dimension and order")
    v = state_vector(rho)
    T = metric.g.astype(complex)
    for _ in range(n):
        T = T @ v
    z = complex(T)
    if abs(z.imag) > 1e-12 * max(1.0, abs(z.real)):
        raise DomainError(f"C_{n} contraction has imaginary part {z.imag:.3e}")
    return z.real


def casimir_invariance_check(rho, n, G_grad, omega, S_grad=None):
    """Residual of the Casimir property of ``C_n`` under the bracket.

    Returns ``max(|{C_n, G, C_n}|, |{C_n, G, S}|)`` with both brackets
    evaluated by raw contraction.  The second term is ``|dC_n/dt|`` (up to a
    factor ``i``) for the flow generated by ``(G, S)``; ``S_grad`` defaults to
    ``rho`` (the linear entropy) and must commute with ``rho``.
    """
    rho = as_matrix(rho, "rho")
    if S_grad is None:
        S_grad = rho
    gC = casimir_gradient(rho, n)
    r1 = abs(triple_bracket(gC, G_grad, gC, omega))
    r2 = abs(triple_bracket(gC, G_grad, S_grad, omega))
    return max(r1, r2)

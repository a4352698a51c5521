"""Moment bookkeeping and spectrum recovery.

Power sums ``C_n = sum_k eta_k**n lambda_k**n`` determine a finite real
spectrum up to permutation; ``spectrum_from_moments`` makes that concrete
via Newton's identities and Durand-Kerner root finding.  Recovery is
ill-conditioned for large dimensions or tight eigenvalue clusters, so it
reports a power-sum residual and refuses to return results that fail it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, DomainError, ValidationError

DK_MAX_ITER = 500
DK_TOL = 1e-12
RESIDUAL_TOL = 1e-6
TIE_TOL = 1e-10


def as_signature(signs, d=None):
    eta = np.asarray(signs, dtype=float)
    if eta.ndim != 1 or not np.all(np.isin(eta, (-1.0, 1.0))):
        raise ValidationError(f"metric signature entries must be +1 or -1, got {list(signs)}")
    if d is not None and len(eta) != d:
        raise ValidationError(f"metric signature has length {len(eta)}, expected {d}")
    return eta


def signed_power_sums(lam, eta, N):
    """``[sum_k (eta_k lambda_k)**n for n in 1..N]``."""
    lam = np.asarray(lam, dtype=float)
    eta = as_signature(eta)
    if lam.shape != eta.shape:
        raise ValidationError(f"spectrum has length {lam.size}, signature has length {eta.size}")
    x = eta * lam
    return np.array([np.sum(x ** n) for n in range(1, N + 1)])


def power_sums(lam, N):
    return signed_power_sums(lam, np.ones(len(lam)), N)


def top_eigenvalue_estimate(moments, m):
    """``C_m ** (1/m)`` from a 1-based moment vector ``moments[m - 1] = C_m``.

    For a nonnegative spectrum of length d the estimate overshoots the
    largest eigenvalue p1 by at most a factor ``d ** (1/m)``::

        p1 <= C_m ** (1/m) <= p1 * d ** (1/m)
    """
    if m < 1 or m > len(moments):
        raise ValidationError(f"moment order {m} outside 1..{len(moments)}")
    c = float(moments[m - 1])
    if c <= 0:
        raise DomainError(f"C_{m} = {c:.3e} must be positive")
    return c ** (1.0 / m)


def elementary_symmetric(p):
    """Newton's identities: power sums ``p[0..d-1]`` -> ``e_1..e_d``."""
    d = len(p)
    e = [1.0]
    for n in range(1, d + 1):
        s = sum((-1) ** (i - 1) * e[n - i] * p[i - 1] for i in range(1, n + 1))
        e.append(s / n)
    return np.array(e[1:])


@dataclass(frozen=True)
class RecoveredSpectrum:
    values: np.ndarray
    residual: float
    degenerate_zero: bool = False


def _durand_kerner(coeffs, radius):
    d = len(coeffs) - 1
    z = radius * np.exp(1j * (2 * np.pi * np.arange(d) / d + 0.4))
    for _ in range(DK_MAX_ITER):
        num = np.polyval(coeffs, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        step = num / np.prod(diff, axis=1)
        z = z - step
        if np.max(np.abs(step)) <= DK_TOL * max(1.0, np.max(np.abs(z))):
            return z, True
    return z, False


def _residual(values, p):
    return float(np.max(np.abs(power_sums(values, len(p)) - p)))


def spectrum_from_moments(moments, d):
    """Recover a real d-spectrum (descending) from its first d power sums."""
    p = np.asarray(moments, dtype=float)
    if p.ndim != 1 or len(p) < d or d < 1:
        raise ValidationError(f"need at least d = {d} moments, got {p.size}")
    p = p[:d]
    if not np.all(np.isfinite(p)):
        raise ValidationError("moments must be finite")
    if np.all(p == 0):
        warnings.warn("all moments vanish: returning the zero spectrum", RuntimeWarning, stacklevel=2)
        return RecoveredSpectrum(np.zeros(d), 0.0, degenerate_zero=True)

    e = elementary_symmetric(p)
    coeffs = np.concatenate([[1.0], [(-1) ** k * e[k - 1] for k in range(1, d + 1)]])
    radius = 1.0 + max(abs(p[n - 1]) ** (1.0 / n) for n in range(1, d + 1))
    z, converged = _durand_kerner(coeffs, radius)
    values = np.sort(z.real)[::-1]
    values = _refine_clusters(values, coeffs, p)
    res = _residual(values, p)
    if not converged and res > RESIDUAL_TOL:
        raise ConditioningError(f"Durand-Kerner did not converge (residual {res:.3e})", res)
    if res > RESIDUAL_TOL:
        raise ConditioningError(f"recovered spectrum misses the moments by {res:.3e}", res)
    return RecoveredSpectrum(values, res)


def _refine_clusters(values, coeffs, p):
    """Collapse near-coincident roots onto a repeated root when that fits better.

    Root finders resolve an m-fold root only to about eps**(1/m).  The
    (m-1)-th derivative of the characteristic polynomial has a simple root
    there, so a few Newton steps on it from the cluster mean pin the value.
    """
    scale = max(1.0, float(np.max(np.abs(values))))
    best, best_res = values, _residual(values, p)
    start = 0
    for k in range(1, len(values) + 1):
        if k == len(values) or values[k - 1] - values[k] > 1e-3 * scale:
            m = k - start
            if m > 1:
                q = np.polyder(coeffs, m - 1)
                dq = np.polyder(q)
                x = float(np.mean(values[start:k]))
                for _ in range(50):
                    step = np.polyval(q, x) / np.polyval(dq, x)
                    x -= step
                    if abs(step) <= 1e-15 * max(1.0, abs(x)):
                        break
                for candidate in (x, float(np.mean(values[start:k]))):
                    trial = best.copy()
                    trial[start:k] = candidate
                    r = _residual(trial, p)
                    if r < best_res:
                        best, best_res = trial, r
            start = k
    return best


def match_spectra(previous, current):
    """Greedy continuity matching between adjacent spectral decompositions.

    Returns ``perm`` with previous eigenvalue ``k`` matched to current
    eigenvalue ``perm[k]``.  Previous eigenvalues are processed from the
    largest down; ties within ``TIE_TOL`` go to the largest eigenvector
    overlap.
    """
    lp, lc = np.asarray(previous.eigenvalues), np.asarray(current.eigenvalues)
    d = len(lp)
    overlap = np.abs(previous.eigenvectors.conj().T @ current.eigenvectors)
    perm = np.full(d, -1)
    free = list(range(d))
    for k in np.argsort(-lp, kind="stable"):
        gaps = np.array([abs(lp[k] - lc[j]) for j in free])
        close = [j for j, g in zip(free, gaps) if g - gaps.min() < TIE_TOL]
        j = max(close, key=lambda j: overlap[k, j])
        perm[k] = j
        free.remove(j)
    return perm


def conservation_report(trajectory, n_max=6, signature=None):
    """Flat drift summary of a trajectory.

    Keys: ``casimir_drift_<n>``, ``eigenvalue_drift_<k>`` (after continuity
    matching), ``max_casimir_drift``, ``max_eigenvalue_drift``,
    ``max_herm_residue`` and, for a signature, ``signed_moment_drift_<n>``.
    """
    ch = trajectory.channels
    rhos = trajectory.rhos
    report = {"samples": len(trajectory)}
    drifts = []
    for n in range(1, n_max + 1):
        c = ch.get(f"C_{n}")
        if c is None:
            c = np.array([np.trace(np.linalg.matrix_power(r, n)).real for r in rhos])
        drift = float(np.max(np.abs(c - c[0])))
        report[f"casimir_drift_{n}"] = drift
        drifts.append(drift)
    report["max_casimir_drift"] = max(drifts, default=0.0)

    lam = trajectory.eigenvalues()
    ev = np.max(np.abs(lam - lam[0]), axis=0)
    for k, v in enumerate(ev):
        report[f"eigenvalue_drift_{k + 1}"] = float(v)
    report["max_eigenvalue_drift"] = float(np.max(ev))

    if signature is not None:
        eta = as_signature(signature, trajectory.dim)
        moments = np.array([signed_power_sums(row, eta, n_max) for row in lam])
        sd = np.max(np.abs(moments - moments[0]), axis=0)
        for n, v in enumerate(sd, start=1):
            report[f"signed_moment_drift_{n}"] = float(v)

    herm = [float(np.max(np.abs(r - r.conj().T))) for r in rhos]
    report["max_herm_residue"] = max(herm + list(ch.get("herm_residue", [0.0])))
    return report

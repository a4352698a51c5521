"""Casimir, entropy and Hamiltonian functionals with exact matrix gradients.

Gradients follow the convention ``dF = Tr(grad F . d rho)`` with a Hermitian
gradient, so ``C_n = Tr rho^n`` has gradient ``n rho^(n-1)`` and the linear
functional ``Tr(h rho)`` has gradient ``h``.

An entropy is a sum of products of real powers of Casimirs::

    S(rho) = sum_j kappa_j prod_i C_{n_i}(rho) ** e_i

Its gradient is always a real polynomial in ``rho``; ``gradient_polynomial``
returns the coefficients, which the effective-Hamiltonian construction needs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .matrix import as_hermitian, as_matrix, hermitize, matrix_power

IMAG_TOL = 1e-12
CASIMIR_FLOOR = 1e-14


def _powers(rho, nmax):
    """[rho^0, rho^1, ..., rho^nmax]."""
    out = [np.eye(rho.shape[0], dtype=complex)]
    for _ in range(nmax):
        out.append(out[-1] @ rho)
    return out


def _real_trace(M, what):
    z = complex(np.trace(M))
    if abs(z.imag) > IMAG_TOL * max(1.0, abs(z.real)):
        raise DomainError(f"{what} has imaginary part {z.imag:.3e}; input is not Hermitian")
    return z.real


def casimir_value(rho, n):
    """``Tr(rho**n)``."""
    if int(n) != n or n < 1:
        raise ValidationError(f"Casimir order must be a positive integer, got {n}")
    return _real_trace(matrix_power(rho, int(n)), f"C_{n}")


def casimir_gradient(rho, n):
    if int(n) != n or n < 1:
        raise ValidationError(f"Casimir order must be a positive integer, got {n}")
    return hermitize(n * matrix_power(rho, int(n) - 1))


@dataclass(frozen=True)
class EntropySpec:
    """``terms`` is a tuple of ``(kappa, ((order, exponent), ...))``."""

    terms: tuple
    name: str | None = None

    def __post_init__(self):
        if not self.terms:
            raise ValidationError("entropy needs at least one term")
        norm = []
        for kappa, factors in self.terms:
            fs = []
            for order, exponent in factors:
                if int(order) != order or order < 1:
                    raise ValidationError(f"Casimir order must be a positive integer, got {order}")
                fs.append((int(order), float(exponent)))
            norm.append((float(kappa), tuple(fs)))
        object.__setattr__(self, "terms", tuple(norm))

    @property
    def max_order(self):
        return max((o for _, fs in self.terms for o, _ in fs), default=1)

    @classmethod
    def preset(cls, name):
        if name == "S3":
            return cls(((2.0 / 3.0, ((1, 0.5), (3, 0.5))),), name="S3")
        if name == "linear":
            return cls(((0.5, ((2, 1.0),)),), name="linear")
        raise ValidationError(f"unknown entropy preset {name!r} (known: 'S3', 'linear')")

    def to_json(self):
        if self.name is not None:
            return {"preset": self.name}
        return {"terms": [{"coefficient": k, "factors": [[o, e] for o, e in fs]}
                          for k, fs in self.terms]}

    @classmethod
    def from_json(cls, obj, field="entropy"):
        if not isinstance(obj, dict):
            raise ValidationError("expected an object", field)
        keys = set(obj)
        if keys == {"preset"}:
            try:
                return cls.preset(obj["preset"])
            except ValidationError as exc:
                raise ValidationError(str(exc), f"{field}.preset") from None
        if keys == {"terms"}:
            terms = []
            for j, term in enumerate(obj["terms"]):
                path = f"{field}.terms[{j}]"
                if not isinstance(term, dict) or set(term) != {"coefficient", "factors"}:
                    raise ValidationError("term needs exactly 'coefficient' and 'factors'", path)
                try:
                    factors = tuple((o, e) for o, e in term["factors"])
                except (TypeError, ValueError):
                    raise ValidationError("factors must be [order, exponent] pairs", path) from None
                terms.append((term["coefficient"], factors))
            try:
                return cls(tuple(terms))
            except ValidationError as exc:
                raise ValidationError(str(exc), f"{field}.terms") from None
        raise ValidationError("expected exactly one of 'preset' or 'terms'", field)


def _casimirs(rho, orders):
    P = _powers(rho, max(orders))
    return {n: _real_trace(P[n], f"C_{n}") for n in orders}, P


def _check_domain(spec, C):
    for j, (_, factors) in enumerate(spec.terms):
        for order, exponent in factors:
            c = C[order]
            if exponent != int(exponent) and c <= CASIMIR_FLOOR:
                raise DomainError(
                    f"entropy term {j}: C_{order} = {c:.3e} must be > {CASIMIR_FLOOR:g} "
                    f"under fractional exponent {exponent}")
            if exponent < 1 and c == 0.0:
                raise DomainError(f"entropy term {j}: C_{order} = 0 under exponent {exponent}")


def _evaluate(spec, C):
    total = 0.0
    for kappa, factors in spec.terms:
        prod = kappa
        for order, exponent in factors:
            prod *= C[order] ** exponent
        total += prod
    return total


def entropy_value(spec, rho):
    rho = as_matrix(rho, "rho")
    C, _ = _casimirs(rho, {o for _, fs in spec.terms for o, _ in fs})
    _check_domain(spec, C)
    return float(_evaluate(spec, C))


def gradient_polynomial(spec, rho):
    """Coefficients ``a`` with ``grad S = sum_m a[m] rho**m``."""
    rho = as_matrix(rho, "rho")
    C, _ = _casimirs(rho, {o for _, fs in spec.terms for o, _ in fs})
    _check_domain(spec, C)
    return _polynomial(spec, C)


def _polynomial(spec, C):
    a = np.zeros(spec.max_order)
    for kappa, factors in spec.terms:
        for i, (order, exponent) in enumerate(factors):
            coef = kappa * exponent * C[order] ** (exponent - 1) * order
            for k, (o2, e2) in enumerate(factors):
                if k != i:
                    coef *= C[o2] ** e2
            a[order - 1] += coef
    return a


def entropy_gradient(spec, rho):
    rho = as_matrix(rho, "rho")
    orders = {o for _, fs in spec.terms for o, _ in fs}
    C, P = _casimirs(rho, orders | {spec.max_order})
    _check_domain(spec, C)
    a = _polynomial(spec, C)
    G = sum(a[m] * P[m] for m in range(len(a)))
    return hermitize(G)


@dataclass(frozen=True)
class HamiltonianSpec:
    """Either ``H = Tr(h rho)`` (``matrix`` set) or a Casimir-built ``H``."""

    matrix: np.ndarray | None = None
    casimir: EntropySpec | None = None

    def __post_init__(self):
        if (self.matrix is None) == (self.casimir is None):
            raise ValidationError("hamiltonian needs exactly one of a matrix or a Casimir form")
        if self.matrix is not None:
            object.__setattr__(self, "matrix", as_hermitian(self.matrix, name="h"))

    @property
    def is_linear(self):
        return self.matrix is not None

    @property
    def dim(self):
        return None if self.matrix is None else self.matrix.shape[0]


def hamiltonian_value(spec, rho):
    if spec.is_linear:
        return float(np.trace(spec.matrix @ rho).real)
    return entropy_value(spec.casimir, rho)


def hamiltonian_gradient(spec, rho):
    if spec.is_linear:
        return spec.matrix
    return entropy_gradient(spec.casimir, rho)


def hermitian_basis(d):
    """Basis of d x d Hermitian matrices, orthonormal under ``Tr(X Y)``."""
    basis = []
    s = 1.0 / np.sqrt(2.0)
    for k in range(d):
        E = np.zeros((d, d), dtype=complex)
        E[k, k] = 1.0
        basis.append(E)
    for k in range(d):
        for l in range(k + 1, d):
            E = np.zeros((d, d), dtype=complex)
            E[k, l] = E[l, k] = s
            basis.append(E)
            E = np.zeros((d, d), dtype=complex)
            E[k, l] = 1j * s
            E[l, k] = -1j * s
            basis.append(E)
    return basis


def fd_gradient_oracle(functional, rho, h=1e-5):
    """Central-difference gradient of a scalar ``functional`` at ``rho``.

    Independent of every closed-form gradient above: it only calls
    ``functional`` on perturbed matrices.
    """
    if h <= 0:
        raise ValidationError(f"finite-difference step must be positive, got {h}")
    rho = as_hermitian(rho, name="rho")
    G = np.zeros_like(rho)
    for B in hermitian_basis(rho.shape[0]):
        dF = (functional(rho + h * B) - functional(rho - h * B)) / (2.0 * h)
        G = G + dF * B
    return G

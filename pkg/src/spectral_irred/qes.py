"""Exact algebra of the elementary (quasi-exactly solvable) eigenfunctions.

Sextic: y = Q(z) exp(-z^4/4 - a z^2/2) with Q = sum c_k z^(2k+p).  Substituting
into -y'' + V y = lam y gives, for Q = z^j,

    L z^j = a(2j+1) z^j - j(j-1) z^(j-2) + (2j+3-n) z^(j+2),

and 2j+3-n = 4(k-m) vanishes at the top power, so L preserves the span.

Quartic: y = P(z) exp(-i z^3/3 - i a z) with deg P = m-1 and

    L z^j = a^2 z^j + 2 i a j z^(j-1) - j(j-1) z^(j-2) + 2 i (j+1-m) z^(j+1).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy as sp

from .problems import Kind, ProblemFamily, UnsupportedError, qes_spec

ALPHA = sp.Symbol("alpha")
LAM = sp.Symbol("lam")


@dataclass(frozen=True)
class QesPolynomial:
    family: ProblemFamily
    alpha: complex
    coefficients: tuple[complex, ...]  # descending powers of lambda, monic

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, lam: complex) -> complex:
        return complex(np.polyval(self.coefficients, lam))

    def roots(self) -> np.ndarray:
        return np.roots(self.coefficients)


def _require_qes(family: ProblemFamily) -> None:
    if not family.is_qes:
        raise UnsupportedError(f"{family.kind.value} has no elementary eigenfunctions")


@lru_cache(maxsize=None)
def qes_matrix(family: ProblemFamily) -> sp.Matrix:
    """Matrix of the operator on the polynomial factor, entries polynomial in alpha."""
    _require_qes(family)
    a = ALPHA
    if family.kind is Kind.QES_SEXTIC:
        m, p = family.m, family.p
        size = m + 1
        M = sp.zeros(size, size)
        for k in range(size):
            j = 2 * k + p
            M[k, k] = a * (2 * j + 1)
            if k >= 1:
                M[k - 1, k] = -j * (j - 1)
            if k + 1 < size:
                M[k + 1, k] = 4 * (k - m)
        return M
    m = family.m
    M = sp.zeros(m, m)
    for j in range(m):
        M[j, j] = a**2
        if j >= 1:
            M[j - 1, j] = 2 * sp.I * a * j
        if j >= 2:
            M[j - 2, j] = -j * (j - 1)
        if j + 1 < m:
            M[j + 1, j] = 2 * sp.I * (j + 1 - m)
    return M


@lru_cache(maxsize=None)
def charpoly(family: ProblemFamily) -> sp.Poly:
    """Monic characteristic polynomial in lam with coefficients in Z[i][alpha]."""
    M = qes_matrix(family)
    return sp.Poly(M.charpoly(LAM).as_expr(), LAM)


@lru_cache(maxsize=None)
def _coeff_funcs(family: ProblemFamily):
    P = charpoly(family)
    return [sp.lambdify(ALPHA, c, "numpy") for c in P.all_coeffs()]


def qes_polynomial(family: ProblemFamily, alpha: complex) -> QesPolynomial:
    coeffs = tuple(complex(f(complex(alpha))) for f in _coeff_funcs(family))
    return QesPolynomial(family, complex(alpha), coeffs)


@lru_cache(maxsize=None)
def _matrix_func(family: ProblemFamily):
    return sp.lambdify(ALPHA, qes_matrix(family), "numpy")


def qes_matrix_numeric(family: ProblemFamily, alpha: complex) -> np.ndarray:
    return np.array(_matrix_func(family)(complex(alpha)), dtype=complex)


def elementary_eigenvalues(family: ProblemFamily, alpha: complex) -> list[complex]:
    """Roots of the QES polynomial with multiplicity, sorted by (re, im)."""
    count = qes_spec(family).count
    M = qes_matrix_numeric(family, alpha)
    vals = np.linalg.eigvals(M) if M.size else np.array([])
    out = sorted((complex(v) for v in vals), key=lambda z: (round(z.real, 12), z.imag))
    assert len(out) == count
    return out


@lru_cache(maxsize=None)
def discriminant(family: ProblemFamily) -> sp.Poly:
    """Discriminant of the QES polynomial as a polynomial in alpha."""
    P = charpoly(family)
    if P.degree() < 2:
        return sp.Poly(1, ALPHA)
    return sp.Poly(sp.discriminant(P, LAM), ALPHA)


def branch_alphas(family: ProblemFamily, digits: int = 30) -> list[complex]:
    """Roots of the discriminant (distinct values), high-precision via sympy."""
    D = discriminant(family)
    if D.degree() < 1:
        return []
    roots = sp.Poly(D, ALPHA).nroots(n=digits, maxsteps=200)
    out: list[complex] = []
    for r in roots:
        z = complex(r)
        if all(abs(z - w) > 1e-9 * max(1.0, abs(z)) for w in out):
            out.append(z)
    return sorted(out, key=lambda z: (round(z.real, 9), z.imag))


def double_root(family: ProblemFamily, alpha: complex) -> complex:
    """The colliding eigenvalue at a branch point: common root of P and dP/dlam."""
    poly = qes_polynomial(family, alpha)
    r = poly.roots()
    best = min(((abs(r[i] - r[j]), (r[i] + r[j]) / 2) for i in range(len(r)) for j in range(i + 1, len(r))),
               key=lambda t: t[0])
    return complex(best[1])

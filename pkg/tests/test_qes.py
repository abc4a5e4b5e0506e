import cmath

import numpy as np
import pytest
import sympy as sp

from spectral_irred.problems import UnsupportedError, parse_family
from spectral_irred.qes import (
    ALPHA,
    LAM,
    branch_alphas,
    charpoly,
    discriminant,
    double_root,
    elementary_eigenvalues,
    qes_matrix,
    qes_polynomial,
)
from spectral_irred.shooting import determinant

S10 = parse_family("qes-sextic:m=1,p=0")
Q2 = parse_family("qes-quartic:m=2")


def test_closed_form_polynomials():
    # lam = 3 alpha -+ 2 sqrt(alpha^2 + 2) and (lam - alpha^2)^2 = 4 alpha
    assert sp.expand(charpoly(S10).as_expr() - (LAM**2 - 6 * ALPHA * LAM + 5 * ALPHA**2 - 8)) == 0
    assert sp.expand(charpoly(Q2).as_expr() - ((LAM - ALPHA**2) ** 2 - 4 * ALPHA)) == 0


def test_low_order_identities():
    assert sp.expand(charpoly(parse_family("qes-sextic:m=0,p=0")).as_expr() - (LAM - ALPHA)) == 0
    assert sp.expand(charpoly(parse_family("qes-sextic:m=0,p=1")).as_expr() - (LAM - 3 * ALPHA)) == 0
    assert sp.expand(charpoly(parse_family("qes-quartic:m=1")).as_expr() - (LAM - ALPHA**2)) == 0


@pytest.mark.parametrize("spec,size", [("qes-sextic:m=3,p=1", 4), ("qes-quartic:m=4", 4), ("qes-sextic:m=0,p=0", 1)])
def test_matrix_dimension(spec, size):
    assert qes_matrix(parse_family(spec)).shape == (size, size)


def test_numeric_roots_match_closed_form():
    a = 0.4 - 1.1j
    got = elementary_eigenvalues(S10, a)
    r = 2 * cmath.sqrt(a * a + 2)
    want = sorted([3 * a - r, 3 * a + r], key=lambda z: (z.real, z.imag))
    assert np.allclose(got, want, atol=1e-12)
    poly = qes_polynomial(Q2, a)
    assert poly.degree == 2
    for lam in poly.roots():
        assert abs((lam - a * a) ** 2 - 4 * a) < 1e-12


def test_discriminants_and_branch_points():
    assert sp.expand(discriminant(S10).as_expr() - 16 * (ALPHA**2 + 2)) == 0
    assert sp.expand(discriminant(Q2).as_expr() - 16 * ALPHA) == 0
    bs = branch_alphas(S10)
    assert np.allclose(sorted(bs, key=lambda z: z.imag), [-1j * 2**0.5, 1j * 2**0.5], atol=1e-14)
    assert abs(double_root(S10, 1j * 2**0.5) - 3j * 2**0.5) < 1e-6


@pytest.mark.parametrize("spec", ["qes-sextic:m=2,p=0", "qes-sextic:m=2,p=1", "qes-quartic:m=3"])
def test_elementary_values_are_eigenvalues(spec):
    fam = parse_family(spec)
    for a in (0.0, 0.5 + 0.5j, -1.2 + 0.3j):
        for lam in elementary_eigenvalues(fam, a):
            assert abs(determinant(fam, a, lam).F) < 1e-7


def test_non_qes_family():
    with pytest.raises(UnsupportedError):
        elementary_eigenvalues(parse_family("pt-cubic"), 0.0)

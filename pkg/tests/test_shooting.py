import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))
from oracles import cubic_eigenvalue, hermite_quartic  # noqa: E402

from spectral_irred.problems import parse_family  # noqa: E402
from spectral_irred.shooting import (  # noqa: E402
    det_scan,
    determinant,
    eigenvalues_in_disk,
    newton_eigenvalue,
    parity_factors,
    winding_count,
)

EVEN = parse_family("even-quartic")
CUBIC = parse_family("pt-cubic")


@pytest.mark.parametrize("alpha", [0.0, -1.5, 2.0])
def test_even_quartic_against_basis_oracle(alpha):
    got = eigenvalues_in_disk(EVEN, alpha, 6.0, 6.0)
    ref = [e for e in hermite_quartic(alpha) if abs(e - 6.0) < 6.0]
    assert len(got) == len(ref)
    assert np.allclose([g.real for g in got], ref, atol=1e-8)
    assert max(abs(g.imag) for g in got) < 1e-8


def test_pt_cubic_real_spectrum():
    got = eigenvalues_in_disk(CUBIC, 0.0, 0j, 6.0)
    assert len(got) == 2
    for g in got:
        assert abs(g.imag) < 1e-9
        assert abs(g - cubic_eigenvalue(g.real)) < 1e-8
    assert abs(got[0] - 1.1562670719881) < 1e-9


def test_parity_factors_split_the_spectrum():
    lams = eigenvalues_in_disk(EVEN, 0.0, 0j, 9.0)
    for k, lam in enumerate(lams):
        f_even, f_odd = parity_factors(EVEN, 0.0, lam)
        # the ground state is even, then parities alternate
        small, big = (f_even, f_odd) if k % 2 == 0 else (f_odd, f_even)
        assert abs(small) < 1e-8 * abs(big)


def test_matching_point_and_seed_radius():
    lam = eigenvalues_in_disk(EVEN, 0.5j, 0j, 2.5)[0]
    for kw in ({"match": 0.3 + 0.2j}, {"r_start": 20.0}, {"match": -0.4j, "r_start": 30.0}):
        def func(l, kw=kw):
            d = determinant(EVEN, 0.5j, l, **kw)
            return d.F, d.log_scale

        z, _ = newton_eigenvalue(EVEN, 0.5j, lam + 1e-4, func=func, tol=1e-14)
        assert abs(z - lam) < 1e-9


def test_newton_and_winding():
    z, res = newton_eigenvalue(EVEN, 0.0, 1.05)
    assert abs(z - 1.0603620904841) < 1e-10 and res < 1e-8
    assert winding_count(EVEN, 0.0, 0j, 5.0) == 2
    assert winding_count(CUBIC, 0.0, 10.0, 1.0) == 0


def test_det_scan_rows():
    rows = det_scan(EVEN, [0j], [1 + 0j, 2 + 0j])
    assert len(rows) == 2 and len(rows[0]) == 7
    assert rows[1][2:4] == (2.0, 0.0)


def test_sextic_and_quartic_spectra_contain_elementary_values():
    from spectral_irred.qes import elementary_eigenvalues

    for spec, a in (("qes-sextic:m=1,p=0", 0.2 + 0.1j), ("qes-quartic:m=2", 0.5)):
        fam = parse_family(spec)
        ev = elementary_eigenvalues(fam, a)
        spec_vals = eigenvalues_in_disk(fam, a, 0j, max(abs(e) for e in ev) + 1.0)
        for e in ev:
            assert min(abs(e - s) for s in spec_vals) < 1e-8

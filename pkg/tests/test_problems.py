import math

import pytest

from spectral_irred.cells import LINE_CELL, SYMMETRIC_CELL, base_cell, label_patterns
from spectral_irred.problems import (
    Kind,
    ParameterError,
    ProblemFamily,
    UnsupportedError,
    asymptotic_pattern,
    bisector_angles,
    negate_label,
    parse_family,
    potential,
    qes_spec,
    sector_geometry,
)


@pytest.mark.parametrize("text", ["even-quartic", "pt-cubic", "qes-sextic:m=2,p=1", "qes-quartic:m=3"])
def test_parse_round_trip(text):
    assert parse_family(text).spec_string() == text


@pytest.mark.parametrize("text", ["octic", "qes-sextic:m=1", "qes-sextic:m=1,p=2", "qes-quartic:m=0",
                                  "even-quartic:m=1", "qes-quartic:m=x", "qes-quartic:k=1"])
def test_parse_rejects(text):
    with pytest.raises(ParameterError):
        parse_family(text)


def test_end_counts():
    assert [parse_family(s).q for s in ("even-quartic", "pt-cubic", "qes-sextic:m=0,p=0", "qes-quartic:m=1")] == [6, 5, 8, 6]


def test_sextic_n_and_unsupported():
    assert parse_family("qes-sextic:m=10,p=0").n == 43
    with pytest.raises(UnsupportedError):
        parse_family("pt-cubic").n
    with pytest.raises(UnsupportedError):
        qes_spec(parse_family("even-quartic"))


def test_potential_coefficients():
    a = 0.5 + 0.25j
    assert potential(parse_family("even-quartic"), a).coefficients == (0, 0, a, 0, 1)
    sx = potential(parse_family("qes-sextic:m=1,p=0"), a).coefficients
    assert sx == (0, 0, a * a - 7, 0, 2 * a, 0, 1)
    assert potential(parse_family("pt-cubic"), a).coefficients == (0, 1j * a, 0, 1j)
    assert potential(parse_family("qes-quartic:m=2"), a).coefficients == (0, -4j, -2 * a, 0, -1)


def test_potential_evaluates_like_horner():
    pot = potential(parse_family("qes-sextic:m=0,p=1"), 1.0)
    z = 0.3 - 0.7j
    direct = sum(c * z ** k for k, c in enumerate(pot.coefficients))
    assert abs(pot(z) - direct) < 1e-14


def test_bisectors_decay_directions():
    # z^4: sqrt(z^6) real and positive on the bisectors
    for th in bisector_angles(1.0, 4):
        w = (math.cos(3 * th) + 1j * math.sin(3 * th))
        assert abs(w.imag) < 1e-12


def test_sector_geometry_shapes():
    for s in ("even-quartic", "pt-cubic", "qes-sextic:m=0,p=0", "qes-quartic:m=1"):
        fam = parse_family(s)
        geo = sector_geometry(fam)
        assert len(geo.ray_angles) == fam.q
        assert len(asymptotic_pattern(fam)) == fam.q


def test_cells_and_patterns():
    assert base_cell(parse_family("even-quartic")) is SYMMETRIC_CELL
    assert base_cell(parse_family("pt-cubic")) is LINE_CELL
    assert SYMMETRIC_CELL.dependent == "0" and LINE_CELL.dependent == "inf"
    assert len(label_patterns(parse_family("qes-sextic:m=0,p=0"))) == 2
    assert len(label_patterns(parse_family("qes-quartic:m=1"))) == 1


def test_negate_label_involution():
    for lab in ("0", "1", "-1", "i", "-i", "inf"):
        assert negate_label(negate_label(lab)) == lab


def test_qes_spec_counts():
    s = qes_spec(ProblemFamily(Kind.QES_SEXTIC, 3, 1))
    assert (s.poly_degree, s.count) == (7, 4)
    q = qes_spec(ProblemFamily(Kind.QES_QUARTIC, 3))
    assert (q.poly_degree, q.count) == (2, 3)

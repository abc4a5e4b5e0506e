import math

import pytest

from spectral_irred.cellmap import (
    C_LOOPS,
    CellMapError,
    anchor_pairing,
    apply_word,
    cell_map,
    configuration,
    lift_loop,
    loop_word,
    tree_code,
)
from spectral_irred.continuation import AlphaPath
from spectral_irred.problems import parse_family
from spectral_irred.trees import enumerate_trees

S00 = parse_family("qes-sextic:m=0,p=0")
S01 = parse_family("qes-sextic:m=0,p=1")
S10 = parse_family("qes-sextic:m=1,p=0")
Q1 = parse_family("qes-quartic:m=1")
Q2 = parse_family("qes-quartic:m=2")
R2 = math.sqrt(2)

# eigenpairs already at the standard configuration c = -1
Q2_STANDARD = (0.25217891191555303, -0.9407541660567931)
S10_STANDARD = (-1.18943381279085, 0.12750851075101366)


def _ring(word: str, n: int = 200) -> list[complex]:
    f = C_LOOPS[word.lower()]
    ts = [k / n for k in range(n + 1)]
    return [f(1 - t if word.isupper() else t) for t in ts]


def test_loop_words():
    assert loop_word(_ring("a")) == "a"
    assert loop_word(_ring("A")) == "A"
    assert loop_word(_ring("ab")) == "ab"
    assert loop_word(_ring("a") + _ring("A")[1:]) == ""
    small = [-1 + 0.2 * complex(math.cos(t), math.sin(t)) for t in (2 * math.pi * k / 50 for k in range(51))]
    assert loop_word(small) == ""


@pytest.mark.parametrize("fam,alpha,lam,bound", [(S00, 0.7, 0.7, 11), (S01, -0.4 + 0.2j, -1.2 + 0.6j, 13),
                                                 (Q1, 0.6, 0.36, 9)])
def test_one_tree_families(fam, alpha, lam, bound):
    code = tree_code(fam, alpha, lam)
    assert code in enumerate_trees(fam, bound)


def test_sextic_elementary_trees_at_zero():
    a, b = tree_code(S10, 0.0, -2 * R2), tree_code(S10, 0.0, 2 * R2)
    codes = enumerate_trees(S10, 15)
    assert a != b and a in codes and b in codes


def test_window_independence():
    assert tree_code(Q2, 0.3, 0.09 - 2 * math.sqrt(0.3), windows=(None, 3.5)) in enumerate_trees(Q2, 11)


def test_configuration_at_standard_point():
    cfg = configuration(Q2, *Q2_STANDARD)
    assert abs(cfg.param + 1) < 1e-12
    assert cfg.labels_at_standard() == ("0", "-1", "0", "1", "0", "inf")


@pytest.mark.parametrize("word,applied", [("a", "a"), ("A", "A"), ("ab", "ab"), ("AB", "BA")])
def test_quartic_lifts_follow_the_moves(word, applied):
    start = cell_map(Q2, *Q2_STANDARD).code
    a, l = lift_loop(Q2, *Q2_STANDARD, word).end
    assert cell_map(Q2, a, l).code == apply_word(start, applied, Q2)


def test_sextic_lift_follows_the_moves():
    start = cell_map(S10, *S10_STANDARD).code
    a, l = lift_loop(S10, *S10_STANDARD, "a").end
    assert cell_map(S10, a, l).code == apply_word(start, "a", S10)


def test_apply_word_inverse_letters():
    code = cell_map(Q2, *Q2_STANDARD).code
    assert apply_word(apply_word(code, "ab", Q2), "BA", Q2) == code
    assert apply_word(code, "", Q2) == code


def test_anchor_pairing_sextic():
    rows = anchor_pairing(S10, AlphaPath.keyhole(0j, 1j * R2, 0.3))
    assert [r.end_index for r in rows] == [1, 0]
    assert all(r.ok for r in rows)
    assert {r.word for r in rows} == {"abab", "BABA"}


def test_no_cell_map_for_cubic():
    with pytest.raises(CellMapError):
        configuration(parse_family("pt-cubic"), 0.0, 1.156)

import random

import pytest

from spectral_irred.cells import base_cell
from spectral_irred.complexes import half_turn
from spectral_irred.problems import parse_family, qes_spec
from spectral_irred.trees import (
    LabeledTree,
    StructuralError,
    canonical_code,
    check_constraints,
    code_at,
    code_edges,
    end_item,
    enumerate_trees,
    from_code,
    read_tree_set,
    validate,
    write_tree_set,
    zero_count,
)

CUBIC = parse_family("pt-cubic")
SEXTIC0 = parse_family("qes-sextic:m=0,p=0")
QUARTIC1 = parse_family("qes-quartic:m=1")
EVEN = parse_family("even-quartic")

SEXTIC0_TREE = "8;-1,0,i,0,1,0,-i,0;((()()(()())(()()))())"


def test_small_sets():
    assert enumerate_trees(CUBIC, 7) == ["5;-1,0,inf,0,1;(((()())())())", "5;-1,0,inf,0,1;((()())(()()))",
                                         "5;-1,0,inf,0,1;(()(()(()())))"]
    assert enumerate_trees(QUARTIC1, 8) == ["6;-1,0,1,0,inf,0;((()()(()()))())"]
    assert enumerate_trees(SEXTIC0, 11) == [SEXTIC0_TREE]
    assert enumerate_trees(EVEN, 8) == ["6;-1,0,-i,1,0,i;((()())()(()()))", "6;-1,0,i,1,0,-i;(()()()(()()))"]


def test_bound_below_q():
    with pytest.raises(ValueError):
        enumerate_trees(CUBIC, 4)


def test_monotone_in_bound():
    small, big = set(enumerate_trees(EVEN, 9)), set(enumerate_trees(EVEN, 11))
    assert small <= big
    assert all(code_edges(c) <= 9 for c in small)


@pytest.mark.parametrize("fam,bound", [(EVEN, 11), (CUBIC, 9), (SEXTIC0, 12), (QUARTIC1, 10)])
def test_codes_round_trip_and_validate(fam, bound):
    for c in enumerate_trees(fam, bound):
        t = from_code(c)
        assert canonical_code(t) == c
        assert check_constraints(t, fam) == (True, [])


def test_canonical_code_ignores_vertex_names():
    t = from_code(SEXTIC0_TREE)
    rng = random.Random(3)
    for _ in range(5):
        perm = list(range(t.n_vertices))
        rng.shuffle(perm)
        assert canonical_code(t.permuted(perm)) == SEXTIC0_TREE


def test_rooting_at_other_ends():
    t = from_code(SEXTIC0_TREE)
    for s in range(t.q):
        assert canonical_code(from_code(code_at(t, s))) == SEXTIC0_TREE


def test_mirror_is_an_involution():
    for c in enumerate_trees(EVEN, 11):
        t = from_code(c)
        assert canonical_code(t.mirrored().mirrored()) == c


@pytest.mark.parametrize("fam,bound", [(EVEN, 12), (SEXTIC0, 13)])
def test_half_turn_closure(fam, bound):
    for c in enumerate_trees(fam, bound):
        assert canonical_code(half_turn(from_code(c), fam)) == c


def test_zero_count_matches_degree():
    for spec, bound in (("qes-sextic:m=0,p=1", 13), ("qes-quartic:m=2", 10)):
        fam = parse_family(spec)
        for c in enumerate_trees(fam, bound):
            assert zero_count(from_code(c), base_cell(fam)) == qes_spec(fam).poly_degree


def test_structural_errors():
    with pytest.raises(StructuralError):
        from_code("5;0,1;(()")
    with pytest.raises(StructuralError):
        validate(LabeledTree(("0", "1"), ((end_item(0), 1), (0,))))  # end 1 missing
    with pytest.raises(StructuralError):
        validate(LabeledTree(("0",), ((end_item(0), 1), (end_item(0),))))  # edge not symmetric


def test_constraint_violations_are_reported():
    t = from_code("5;-1,0,inf,0,1;((()())(()()))")
    ok, bad = check_constraints(t.relabeled(("-1", "0", "0", "inf", "1")), CUBIC)
    assert not ok and any(b.startswith("labels") for b in bad) and any(b.startswith("zero-adjacency") for b in bad)
    ok, bad = check_constraints(t, QUARTIC1)
    assert not ok and bad[0].startswith("ends")
    # a path vertex that only continues an end
    labels = ("0", "1", "-1", "0", "inf")
    rot = ((end_item(0), 1), (0, end_item(1), end_item(2), end_item(3), end_item(4)))
    ok, bad = check_constraints(LabeledTree(labels, rot), CUBIC)
    assert not ok and any(b.startswith("reduced") for b in bad)


def test_tree_set_io(tmp_path):
    codes = enumerate_trees(EVEN, 10)
    p = write_tree_set(tmp_path / "even.txt", codes, EVEN, 10)
    assert read_tree_set(p) == sorted(codes)
    assert (tmp_path / "even.txt.json").exists()

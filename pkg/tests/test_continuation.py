import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))
from oracles import hermite_quartic  # noqa: E402

from spectral_irred.continuation import (  # noqa: E402
    AlphaPath,
    ProximityError,
    SpectralFunction,
    compose_perms,
    cycles,
    find_branch_points,
    monodromy_group,
    monodromy_permutation,
    track,
)
from spectral_irred.problems import parse_family  # noqa: E402
from spectral_irred.qes import elementary_eigenvalues  # noqa: E402
from spectral_irred.shooting import eigenvalues_in_disk  # noqa: E402

S10 = parse_family("qes-sextic:m=1,p=0")
Q2 = parse_family("qes-quartic:m=2")
EVEN = parse_family("even-quartic")
R2 = math.sqrt(2)


def test_paths():
    c = AlphaPath.circle(1j, 0.5, n=8)
    assert c.closed and abs(c.point(0.0) - (1j + 0.5)) < 1e-15
    assert abs(c.point(1.0) - c.point(0.0)) < 1e-12
    k = AlphaPath.keyhole(0j, 2j, 0.5)
    assert k.closed and k.waypoints[0] == 0 and abs(k.waypoints[1] - 1.5j) < 1e-15
    line = AlphaPath.from_json("[[0, 0], [1, 0]]")
    back = AlphaPath.from_json('{"waypoints": [1, 0], "closed": false}')
    loop = line.then(back)
    assert loop.closed and loop.length == 2.0
    with pytest.raises(ValueError):
        line.then(line)


def test_track_around_sextic_branch_point():
    # lam = 3 alpha -+ 2 sqrt(alpha^2 + 2): the loop exchanges the two roots
    pts = track(S10, AlphaPath.keyhole(0j, 1j * R2, 0.3), 2 * R2)
    assert abs(pts[-1][0]) < 1e-14
    assert abs(pts[-1][1] + 2 * R2) < 1e-10


def test_contractible_loop_is_identity():
    lam0 = elementary_eigenvalues(S10, 0.9)[1]
    pts = track(S10, AlphaPath.circle(0.5, 0.4), lam0)
    assert abs(pts[-1][1] - lam0) < 1e-10
    ev = elementary_eigenvalues(S10, 0.9)
    assert monodromy_permutation(S10, AlphaPath.circle(0.5, 0.4, 0.0), ev) == [0, 1]


def test_quartic_exchange():
    ev = elementary_eigenvalues(Q2, 1.0)
    assert np.allclose(ev, [-1, 3])
    perm = monodromy_permutation(Q2, AlphaPath.circle(0j, 1.0), ev, func=SpectralFunction(Q2, "qes"))
    assert perm == [1, 0]


def test_composition_and_homotopy():
    ev = elementary_eigenvalues(S10, 0.0)
    qes = SpectralFunction(S10, "qes")
    up = AlphaPath.keyhole(0j, 1j * R2, 0.3)
    down = AlphaPath.keyhole(0j, -1j * R2, 0.3)
    pu = monodromy_permutation(S10, up, ev, func=qes)
    pd = monodromy_permutation(S10, down, ev, func=qes)
    both = AlphaPath(up.vertices[:-1] + down.vertices[:-1], closed=True)
    assert monodromy_permutation(S10, both, ev, func=qes) == compose_perms(pu, pd)
    # a wider, bent loop around the same point
    bent = AlphaPath((0j, 0.5 + 0.5j, 0.6 + 1.4j, 1.6j + 0.2, 2.0j, -0.5 + 1.4j, -0.3 + 0.4j), closed=True)
    assert monodromy_permutation(S10, bent, ev, func=qes) == pu == [1, 0]


def test_proximity_error_on_a_branch_point():
    with pytest.raises(ProximityError) as err:
        track(S10, AlphaPath((0j, 1j * R2, 2j)), 2 * R2)
    assert abs(err.value.last_alpha - 1j * R2) < 0.5


def test_qes_branch_points_exact_and_numeric_agree():
    exact = find_branch_points(S10, ((-0.5, 0.5), (1.0, 1.8)))
    numeric = find_branch_points(S10, ((-0.3, 0.3), (1.2, 1.6)), grid=4, kind="full", lam_disk=(3j * R2, 2.0))
    assert len(exact) == len(numeric) == 1
    assert abs(exact[0].alpha_star - numeric[0].alpha_star) < 1e-8
    assert abs(exact[0].lambda_star - numeric[0].lambda_star) < 1e-7
    assert cycles(numeric[0].permutation) == "(0 1)"


def test_even_quartic_branch_point_against_basis_oracle():
    bps = find_branch_points(EVEN, ((-5, -3), (1.5, 3)), grid=4, kind="even", lam_disk=(2 + 3j, 7.0))
    assert len(bps) == 1
    bp = bps[0]
    assert abs(bp.alpha_star - (-4.19368415 + 2.16973979j)) < 1e-6
    assert cycles(bp.permutation) == "(0 1)"
    # the basis oracle shows the same two even levels merging there
    v = sorted(hermite_quartic(bp.alpha_star, 160, parity=0), key=lambda z: abs(z - bp.lambda_star))
    assert abs(v[0] - bp.lambda_star) < 1e-4 and abs(v[1] - bp.lambda_star) < 1e-4
    far = sorted(hermite_quartic(bp.alpha_star + 0.3, 160, parity=0), key=lambda z: abs(z - bp.lambda_star))
    assert abs(far[0] - far[1]) > 0.1


def test_even_quartic_loops_keep_parity():
    ev = sorted(eigenvalues_in_disk(EVEN, 0j, 0j, 12.0), key=lambda z: z.real)[:4]
    perm = monodromy_permutation(EVEN, AlphaPath.keyhole(0j, -4.193684151358681 + 2.1697397923531665j, 0.3), ev)
    assert perm == [2, 1, 0, 3]
    assert all(i % 2 == j % 2 for i, j in enumerate(perm))


@pytest.mark.parametrize("spec,n_bp", [("qes-sextic:m=2,p=1", 6), ("qes-quartic:m=3", 3), ("qes-sextic:m=0,p=0", 0)])
def test_monodromy_group(spec, n_bp):
    g = monodromy_group(parse_family(spec))
    assert len(g.branch_points) == len(g.generators) == n_bp
    assert g.transitive and g.anchor.imag == 0
    assert all(sorted(p) == list(range(len(g.eigenvalues))) for p in g.generators)


def test_monodromy_group_rejects_non_qes():
    with pytest.raises(ValueError):
        monodromy_group(EVEN)

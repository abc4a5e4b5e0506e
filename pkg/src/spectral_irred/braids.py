"""Braid moves on asymptotic-value configurations and their tree orbits.

A move is stored as ``images``: for every free generator position ``w`` the
word, in the old loops, of the new loop around the face now labelled ``w``,
plus the permutation of face labels.  Moving the value in face ``i`` to the
place of ``-i`` and back (the s_0 path of the symmetric families) gives

    images[i]  = g[-1]^-1 g[-i] g[-1],   images[-i] = g[1]^-1 g[i] g[1],

i.e. the new loop at position ``w`` is the substituted loop of ``perm(w)``.
"""
from __future__ import annotations

import json
import logging
from collections import deque
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from .cells import BaseCell, base_cell
from .complexes import ConsistencyError, check_relation, transform
from .problems import ProblemFamily, negate_label
from .trees import LabeledTree, canonical_code, check_constraints, code_edges, from_code
from .words import Word, conj, format_word, gen, inverse, mul, substitute

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BraidMove:
    name: str
    images: tuple[tuple[str, Word], ...]
    value_permutation: tuple[tuple[str, str], ...] = ()
    inverse_images: tuple[tuple[str, Word], ...] = ()

    @property
    def table(self) -> dict[str, Word]:
        return dict(self.images)

    @property
    def perm(self) -> dict[str, str]:
        return dict(self.value_permutation)

    def substitution(self) -> dict[str, Word]:
        """Paper-style substitution gamma_w -> word, undoing the position swap."""
        p = self.perm
        return {p.get(w, w): word for w, word in self.images}

    def apply_word(self, word: Word) -> Word:
        return substitute(word, self.table)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "images": {w: format_word(x) for w, x in self.images},
            "value_permutation": dict(self.value_permutation),
        }


def _move(
    name: str,
    images: Mapping[str, Word],
    perm: Mapping[str, str] | None = None,
    inv: Mapping[str, Word] | None = None,
) -> BraidMove:
    perm = {a: b for a, b in (perm or {}).items() if a != b}
    inv_t = tuple(sorted(inv.items())) if inv else ()
    return BraidMove(name, tuple(sorted(images.items())), tuple(sorted(perm.items())), inv_t)


def compose(first: BraidMove, second: BraidMove, name: str | None = None) -> BraidMove:
    """Move ``first`` followed by ``second``."""
    t1 = first.table
    images = {w: substitute(x, t1) for w, x in second.images}
    p1, p2 = first.perm, second.perm
    perm = {w: p2.get(p1.get(w, w), p1.get(w, w)) for w in set(p1) | set(p2)}
    return _move(name or f"{first.name}*{second.name}", images, perm)


def inverse_move(move: BraidMove, free: Sequence[str]) -> BraidMove:
    """Inverse automorphism, found by Nielsen-style peeling of conjugations.

    Every image is ``u^-1 g[v] u`` for a single generator ``v``; the inverse
    is rebuilt one generator at a time, starting with the images whose
    conjugator only involves generators already inverted.
    """
    table = move.table
    perm = move.perm
    back = {b: a for a, b in perm.items()}
    if move.inverse_images:
        out = _move(move.name + "^-1", dict(move.inverse_images), back, table)
        _check_inverse(out, table, free)
        return out
    inv: dict[str, Word] = {}
    pending = dict(table)
    # inverse[v] is a word W in the new loops with substitute(W, table) == g[v]
    for _ in range(len(free) + 1):
        for w, word in list(pending.items()):
            core = _conjugate_core(word)
            if core is None:
                raise ValueError(f"image of {w} is not a conjugate of a generator")
            u, v = core
            if all(g in inv for g, _ in u):
                u_new = substitute(u, inv)
                inv[v] = mul(u_new, gen(w), inverse(u_new))
                del pending[w]
        if not pending:
            break
    else:
        raise ValueError("could not invert move")
    if pending:
        raise ValueError("could not invert move")
    out = _move(move.name + "^-1", inv, back, table)
    _check_inverse(out, table, free)
    return out


def _check_inverse(out: BraidMove, table: Mapping[str, Word], free: Sequence[str]) -> None:
    for w in free:
        if substitute(out.table[w], table) != gen(w):
            raise ValueError("inverse check failed")


def _conjugate_core(word: Word) -> tuple[Word, str] | None:
    n = len(word)
    if n % 2 == 0:
        return None
    h = n // 2
    mid = word[h]
    if mid[1] != 1 or inverse(word[:h]) != word[h + 1:]:
        return None
    return word[h + 1:], mid[0]


def _artin(i: int, free: Sequence[str], power: int) -> dict[str, Word]:
    """Artin generator sigma_i (1-based) or its inverse on the free loops."""
    a, b = free[i - 1], free[i]
    t = {w: gen(w) for w in free}
    if power == 1:
        t[a] = mul(gen(a), gen(b), inverse(gen(a)))
        t[b] = gen(a)
    else:
        t[a] = gen(b)
        t[b] = mul(inverse(gen(b)), gen(a), gen(b))
    return t


def _braid(word: Sequence[int], free: Sequence[str]) -> dict[str, Word]:
    # right action: the images of a product are obtained by substituting the
    # earlier factor into the images of the later one
    t = {w: gen(w) for w in free}
    for s in word:
        step = _artin(abs(s), free, 1 if s > 0 else -1)
        t = {w: substitute(step[w], t) for w in free}
    return t


def generators(family: ProblemFamily) -> list[BraidMove]:
    cell = base_cell(family)
    if family.centrally_symmetric:
        g = gen
        s0 = _move(
            "s_0",
            {"i": conj(g("-i"), g("-1")), "-i": conj(g("i"), g("1")), "1": g("1"), "-1": g("-1")},
            {"i": "-i", "-i": "i"},
        )
        sinf = _move(
            "s_inf",
            {"1": conj(g("-1"), g("i")), "-1": conj(g("1"), g("-i")), "i": g("i"), "-i": g("-i")},
            {"1": "-1", "-1": "1"},
        )
        return [s0, sinf]
    free = cell.free
    # free loops in relation order: g[-1] g[0] g[1] g[inf] == 1
    out = []
    for name, word in (("s_0", [1, 1]), ("s_1", [2, 2]), ("s_inf", [1, 2, 2, 1])):
        back = [-s for s in reversed(word)]
        out.append(_move(name, _braid(word, free), None, _braid(back, free)))
    return out


def half_turn_move(family: ProblemFamily) -> BraidMove:
    cell = base_cell(family)
    return _move("half_turn", {w: gen(negate_label(w)) for w in cell.free},
                 {w: negate_label(w) for w in cell.order})


def validate_move(move: BraidMove, family: ProblemFamily) -> None:
    cell = base_cell(family)
    if not check_relation(cell, move.table):
        raise ConsistencyError(f"{move.name} does not preserve the loop relation")
    perm = move.perm
    for w, word in move.images:
        core = _conjugate_core(word)
        if core is None or core[1] != perm.get(w, w):
            raise ConsistencyError(f"{move.name}: new loop at {w} is not a conjugate of g[{perm.get(w, w)}]")


def apply_move(tree: LabeledTree, move: BraidMove, family: ProblemFamily, depth: int = 14) -> LabeledTree:
    """Tree of the deformed function after moving the values along ``move``."""
    cell = base_cell(family)
    new, _ = transform(tree, cell, move.table, move.perm, depth)
    ok, bad = check_constraints(new, family)
    if not ok:
        raise ConsistencyError(f"{move.name} produced an invalid tree: {bad}")
    return new


def apply_move_code(code: str, move: BraidMove, family: ProblemFamily) -> str:
    return canonical_code(apply_move(from_code(code), move, family))


def parity(tree: LabeledTree, family: ProblemFamily) -> str:
    """``even`` if the half-turn fixes a pole (o vertex) of the complex, else ``odd``.

    The half-turn is the complex isomorphism between ``tree`` and the tree of
    -f; an o vertex fixed by it is a pole at the symmetry centre.
    """
    if not family.centrally_symmetric:
        raise ValueError("parity is defined for the symmetric families only")
    cell = base_cell(family)
    mv = half_turn_move(family)
    turned, origin = transform(tree, cell, mv.table, mv.perm)
    iso = _isomorphism(turned, tree)
    if iso is None:
        raise ConsistencyError("tree is not centrally symmetric")
    for v, u in iso.items():
        src = origin[v]
        if isinstance(src, int) and src == u and not _is_x(turned, v, cell):
            return "even"
    return "odd"


def _is_x(tree: LabeledTree, v: int, cell: BaseCell) -> bool:
    from .trees import vertex_colors

    return vertex_colors(tree, cell)[v] == "x"


def _isomorphism(a: LabeledTree, b: LabeledTree) -> dict[int, int] | None:
    """Label-preserving rotation-system isomorphism a -> b, if any."""
    from .trees import code_at

    ca = code_at(a, 0)
    for s in range(b.q):
        if code_at(b, s) == ca:
            return _match(a, 0, b, s)
    return None


def _match(a: LabeledTree, sa: int, b: LabeledTree, sb: int) -> dict[int, int]:
    q = a.q
    va, vb = a.end_vertex(sa), b.end_vertex(sb)
    out = {va: vb}
    stack = [(va, -(sa + 1), vb, -(sb + 1))]
    while stack:
        x, px, y, py = stack.pop()
        ix, iy = a.rotation[x], b.rotation[y]
        ox, oy = ix.index(px), iy.index(py)
        for t in range(1, len(ix)):
            u, w = ix[(ox + t) % len(ix)], iy[(oy + t) % len(iy)]
            if u >= 0 and w >= 0 and u not in out:
                out[u] = w
                stack.append((u, x, w, y))
    del q
    return out


# -- orbits -----------------------------------------------------------------


@dataclass
class OrbitReport:
    family: str
    bound: int
    cap: int
    generators: list[str]
    orbits: list[list[str]]
    transitions: list[dict] = field(default_factory=list)
    open_at_bound: bool = False
    escapes: int = 0

    @property
    def orbit_count(self) -> int:
        return len(self.orbits)

    def to_json(self) -> str:
        data = {
            "family": self.family,
            "bound": self.bound,
            "cap": self.cap,
            "generators": self.generators,
            "orbit_count": self.orbit_count,
            "orbits": self.orbits,
            "transitions": self.transitions,
            "open_at_bound": self.open_at_bound,
            "escapes": self.escapes,
        }
        return json.dumps(data, indent=1, sort_keys=True)


def orbits(
    codes: Iterable[str],
    moves: Sequence[BraidMove],
    family: ProblemFamily,
    bound: int,
    cap: int | None = None,
) -> OrbitReport:
    """Partition ``codes`` into orbits under the moves and their inverses.

    The search may pass through trees with up to ``cap`` edges (default
    ``bound``); images above the cap are counted as escapes and make the
    report open.  Only trees with at most ``bound`` edges are reported.
    """
    cap = bound if cap is None else cap
    cell = base_cell(family)
    all_moves: list[BraidMove] = []
    for mv in moves:
        all_moves += [mv, inverse_move(mv, cell.free)]
    start = sorted(set(codes))
    parent: dict[str, str] = {}

    def find(c: str) -> str:
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    transitions: list[dict] = []
    escapes = 0
    queue = deque(start)
    for c in start:
        parent[c] = c
    cache: dict[tuple[str, str], str] = {}
    while queue:
        c = queue.popleft()
        tree = from_code(c)
        for mv in all_moves:
            d = canonical_code(apply_move(tree, mv, family))
            cache[(c, mv.name)] = d
            if code_edges(d) > cap:
                escapes += 1
                continue
            if d not in parent:
                parent[d] = d
                queue.append(d)
            ra, rb = find(c), find(d)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
            if code_edges(c) <= bound and code_edges(d) <= bound:
                transitions.append({"from": c, "move": mv.name, "to": d})
    groups: dict[str, list[str]] = {}
    for c in parent:
        if code_edges(c) <= bound:
            groups.setdefault(find(c), []).append(c)
    parts = sorted(sorted(g) for g in groups.values())
    transitions.sort(key=lambda t: (t["from"], t["move"], t["to"]))
    log.info("%s: %d orbits among %d trees (cap %d, %d escapes)", family.spec_string(), len(parts),
             sum(map(len, parts)), cap, escapes)
    return OrbitReport(
        family=family.spec_string(),
        bound=bound,
        cap=cap,
        generators=[m.name for m in moves],
        orbits=parts,
        transitions=transitions,
        open_at_bound=escapes > 0,
        escapes=escapes,
    )

"""Line complexes attached to labeled trees.

A valid tree determines its line complex: each unbounded edge continues as
an infinite ray of alternating x/o vertices, and every x vertex ``x`` gets
one permutation ``g_w`` per face value ``w`` (walk once around the face of
value ``w`` that touches ``x``).  The permutations are evaluated lazily on the
infinite vertex set, so braid moves can be applied by evaluating substituted
words and rebuilding the o vertices from the new permutations.

Vertex ids: core vertices are ints, ray vertices are ``(j, n)`` with ``n >= 1``
counting outward along the ray of end ``j``.

The face walks that define ``g_w`` turn clockwise in the plane of the tree.
``transform`` and the explicit complexes therefore work on the mirror image
and mirror the result back, so trees always stay in plane orientation.
"""
from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from functools import lru_cache

from .cells import BaseCell, base_cell
from .problems import ProblemFamily, negate_label
from .trees import (
    LabeledTree,
    StructuralError,
    corner_faces,
    end_item,
    item_end,
    validate,
    vertex_colors,
)
from .words import Word, inverse, is_conjugate, mul

Vertex = int | tuple[int, int]


class InvalidComplexError(ValueError):
    """A complex fails to collapse to a tree with the expected ends."""


class ConsistencyError(RuntimeError):
    """A substitution does not produce a valid complex."""


def _key(v: Vertex) -> tuple[int, int, int]:
    return (0, v, 0) if isinstance(v, int) else (1, v[0], v[1])


class Constellation:
    """Lazy face permutations of the line complex of ``tree``."""

    def __init__(self, tree: LabeledTree, cell: BaseCell):
        validate(tree)
        cols = vertex_colors(tree, cell)
        if cols is None:
            raise StructuralError("tree does not realize the base cell")
        self.tree, self.cell, self.colors = tree, cell, cols
        faces = corner_faces(tree)
        self._corner: list[dict[str, Vertex]] = []
        for v, items in enumerate(tree.rotation):
            d = {}
            for i in range(len(items)):
                d[tree.labels[faces[(v, i)]]] = self._lift(items[i])
            self._corner.append(d)
        self._attach = [tree.end_vertex(j) for j in range(tree.q)]

    def _lift(self, item: int) -> Vertex:
        return item if item >= 0 else (item_end(item), 1)

    def rot(self, v: Vertex) -> tuple[Vertex, ...]:
        if isinstance(v, int):
            return tuple(self._lift(u) for u in self.tree.rotation[v])
        j, n = v
        inner = self._attach[j] if n == 1 else (j, n - 1)
        return (inner, (j, n + 1))

    def color(self, v: Vertex) -> str:
        if isinstance(v, int):
            return self.colors[v]
        j, n = v
        c = self.colors[self._attach[j]]
        return c if n % 2 == 0 else ("o" if c == "x" else "x")

    def succ(self, v: Vertex, a: Vertex) -> Vertex:
        r = self.rot(v)
        return r[(r.index(a) + 1) % len(r)]

    def pred(self, v: Vertex, a: Vertex) -> Vertex:
        r = self.rot(v)
        return r[(r.index(a) - 1) % len(r)]

    def corner_item(self, v: Vertex, w: str) -> Vertex | None:
        """Item just before the corner of value ``w`` at ``v``, if any."""
        if isinstance(v, int):
            return self._corner[v].get(w)
        j, n = v
        labels = self.tree.labels
        if labels[j] == w:
            return (j, n + 1)
        if labels[(j - 1) % len(labels)] == w:
            return self._attach[j] if n == 1 else (j, n - 1)
        return None

    def g(self, w: str, x: Vertex) -> Vertex:
        a = self.corner_item(x, w)
        if a is None:
            return x
        b = self.succ(x, a)
        return self.succ(b, x)

    def ginv(self, w: str, x: Vertex) -> Vertex:
        a = self.corner_item(x, w)
        if a is None:
            return x
        return self.pred(a, x)

    def act(self, word: Word, x: Vertex) -> Vertex:
        """Right action: letters are applied left to right."""
        for w, e in word:
            x = self.g(w, x) if e == 1 else self.ginv(w, x)
        return x

    def x_vertices(self, depth: int) -> list[Vertex]:
        out: list[Vertex] = [v for v, c in enumerate(self.colors) if c == "x"]
        for j in range(self.tree.q):
            out.extend((j, n) for n in range(1, depth + 1) if self.color((j, n)) == "x")
        return out


def relation_words(cell: BaseCell, new: Mapping[str, Word]) -> dict[str, Word]:
    """Complete the free-generator words with the dependent one from the relation."""
    dep = cell.dependent
    rel = cell.relation
    i = rel.index(dep)
    before = mul(*[new[w] for w in rel[:i]])
    after = mul(*[new[w] for w in rel[i + 1:]])
    out = dict(new)
    out[dep] = mul(inverse(before), inverse(after))
    return out


def check_relation(cell: BaseCell, new: Mapping[str, Word]) -> bool:
    """The product of the new free loops is conjugate to that of the old ones."""
    dep = cell.dependent
    rel = cell.relation
    i = rel.index(dep)
    order = rel[i + 1:] + rel[:i]
    old = mul(*[((w, 1),) for w in order])
    now = mul(*[new[w] for w in order])
    return is_conjugate(old, now)


@dataclass
class LineComplex:
    """Finite piece of a line complex.

    ``x_darts[x]`` lists the o vertices at the ends of the k edges of x vertex
    ``x`` counterclockwise, edge ``j`` followed by the face of value
    ``order[j]``.  ``o_darts[o]`` lists the x vertices around ``o``
    counterclockwise; an entry ``("end", j)`` stands for the cut-off rest of
    ray ``j``.  ``faces[(x, w)]`` is "2-gon" or "unbounded".  Ids of x and o
    vertices are opaque sortable keys.
    """

    cell: BaseCell
    labels: tuple[str, ...]
    x_darts: dict
    o_darts: dict
    faces: dict = field(default_factory=dict)
    origin: dict = field(default_factory=dict)

    def vertex_degrees(self) -> dict:
        deg = {x: len(v) for x, v in self.x_darts.items()}
        deg.update({o: len(v) for o, v in self.o_darts.items()})
        return deg

    def is_bipartite_regular(self) -> bool:
        k = self.cell.k
        return all(len(v) == k for v in self.x_darts.values()) and all(
            len(v) == k for v in self.o_darts.values()
        )


def _build(con: Constellation, words: Mapping[str, Word], labels: tuple[str, ...], depth: int) -> LineComplex:
    cell = con.cell
    k = cell.k
    full = relation_words(cell, words)
    new_g = [full[w] for w in cell.order]

    @lru_cache(maxsize=None)
    def gnew(j: int, x: Vertex) -> Vertex:
        return con.act(new_g[j], x)

    region = con.x_vertices(depth)
    in_region = set(region)
    dart_class: dict[tuple[Vertex, int], tuple] = {}
    class_darts: dict[tuple, list[tuple[Vertex, int]]] = {}
    for x in region:
        for j in range(k):
            if (x, j) in dart_class:
                continue
            darts = [(x, j)]
            y, i = x, j
            for _ in range(k - 1):
                y, i = gnew((i - 1) % k, y), (i - 1) % k
                darts.append((y, i))
            if gnew((i - 1) % k, y) != x:
                raise ConsistencyError("o vertex does not close after k darts")
            rep = ("o",) + min((_key(d[0]), d[1]) for d in darts)
            for d in darts:
                dart_class[d] = rep
            class_darts[rep] = darts

    x_darts = {("x", _key(x)): [dart_class[(x, j)] for j in range(k)] for x in region}
    o_darts = {}
    origin = {("x", _key(x)): x for x in region}
    for rep, darts in class_darts.items():
        seq: list = []
        for y, _ in darts:
            if y in in_region:
                seq.append(("x", _key(y)))
            elif isinstance(y, int):
                raise ConsistencyError("core vertex escaped the region")
            else:
                seq.append(("end", y[0]))
        o_darts[rep] = seq
        origin[rep] = min((d[0] for d in darts), key=_key)
    faces = {}
    for x in region:
        xd = x_darts[("x", _key(x))]
        for j, w in enumerate(cell.order):
            faces[(("x", _key(x)), w)] = "2-gon" if xd[j] == xd[(j + 1) % k] else "unbounded"
    return LineComplex(cell, labels, x_darts, o_darts, faces, origin)


def reduce_to_tree(cx: LineComplex) -> LabeledTree:
    """Merge multiple edges and collapse the ray tails back to ends."""
    return _reduce(cx)[0].mirrored()


def _reduce(cx: LineComplex) -> tuple[LabeledTree, dict]:
    nodes: dict = {x: _dedupe(list(seq)) for x, seq in cx.x_darts.items()}
    nodes.update({o: _dedupe(list(seq)) for o, seq in cx.o_darts.items()})
    for n, items in nodes.items():
        for it in items:
            if it[0] != "end" and it not in nodes:
                raise InvalidComplexError(f"edge to unknown vertex {it}")
    _prune_rays(nodes, len(cx.labels))
    try:
        return _to_tree(nodes, len(cx.labels), cx.labels)
    except ConsistencyError as exc:
        raise InvalidComplexError(str(exc)) from exc


def transform(
    tree: LabeledTree,
    cell: BaseCell,
    words: Mapping[str, Word],
    perm: Mapping[str, str],
    depth: int = 14,
) -> tuple[LabeledTree, dict[int, Vertex]]:
    """Tree of the complex whose face permutations are given by ``words``.

    ``words[w]`` is the word (in the old loops) of the new loop around the
    face that is now labelled ``w``; face labels change by ``perm``.  Returns
    the new tree and, for each of its vertices, an x vertex of the old
    complex it came from (for o vertices the smallest x around them).
    """
    mirror = tree.mirrored()
    con = Constellation(mirror, cell)
    labels = tuple(perm.get(w, w) for w in mirror.labels)
    cx = _build(con, words, labels, depth)
    try:
        new_tree, ids = _reduce(cx)
    except InvalidComplexError as exc:
        raise ConsistencyError(str(exc)) from exc
    return new_tree.mirrored(), {i: cx.origin[n] for n, i in ids.items()}


def _dedupe(seq: list) -> list:
    out = [s for i, s in enumerate(seq) if s != seq[i - 1]] if len(seq) > 1 else list(seq)
    if not out:
        out = [seq[0]]
    return out


def _prune_rays(nodes: dict, q: int) -> None:
    changed = True
    while changed:
        changed = False
        for n in list(nodes):
            items = nodes.get(n)
            if items is None or len(items) != 2:
                continue
            ends = [it for it in items if it[0] == "end"]
            if len(ends) != 1:
                continue
            other = items[0] if items[1] == ends[0] else items[1]
            if other[0] == "end":
                continue
            nb = nodes[other]
            nodes[other] = [ends[0] if it == n else it for it in nb]
            del nodes[n]
            changed = True


def _to_tree(nodes: dict, q: int, labels: tuple[str, ...]) -> tuple[LabeledTree, dict]:
    names = sorted(nodes)
    ids = {n: i for i, n in enumerate(names)}
    rot = []
    for n in names:
        items = []
        for it in nodes[n]:
            if it[0] == "end":
                items.append(end_item(it[1]))
            else:
                if it not in ids:
                    raise ConsistencyError(f"dangling neighbour {it}")
                items.append(ids[it])
        rot.append(tuple(items))
    tree = LabeledTree(labels, tuple(rot))
    try:
        validate(tree)
    except StructuralError as exc:
        raise ConsistencyError(f"rebuilt complex is not a tree: {exc}") from exc
    return tree, ids


def half_turn(tree: LabeledTree, family: ProblemFamily) -> LabeledTree:
    """Tree of -f for the tree of f: loops gamma_w become gamma_{-w}."""
    cell = base_cell(family)
    words = {w: ((negate_label(w), 1),) for w in cell.free}
    perm = {w: negate_label(w) for w in cell.order}
    return transform(tree, cell, words, perm)[0]


# -- explicit finite complexes ----------------------------------------------


def expand_to_complex(tree: LabeledTree, family: ProblemFamily, depth: int = 4) -> LineComplex:
    """Explicit complex: the core plus ``depth`` ray vertices per end."""
    cell = base_cell(family)
    mirror = tree.mirrored()
    con = Constellation(mirror, cell)
    words = {w: ((w, 1),) for w in cell.free}
    return _build(con, words, mirror.labels, depth)

"""Labeled planar trees with q ends, canonical codes and enumeration.

A tree is stored as a rotation system.  ``rotation[v]`` lists the items
around vertex ``v`` counterclockwise; an item ``u >= 0`` is a neighbouring
vertex and an item ``-(j + 1)`` is the unbounded edge to end ``j``.  Face ``j``
lies counterclockwise between end ``j`` and end ``j + 1`` and carries
``labels[j]``.

A corner ``(v, i)`` is the wedge at ``v`` just after ``rotation[v][i]``.
Vertices are coloured ``x`` or ``o`` (the two preimage classes of the base
cell); around an ``x`` vertex the corner values must appear as a cyclic
subsequence of the base order, around an ``o`` vertex of the reversed order.
"""
from __future__ import annotations

import json
import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from pathlib import Path

from .cells import BaseCell, base_cell, label_patterns
from .problems import Kind, ProblemFamily, qes_spec

log = logging.getLogger(__name__)

GENERATOR_VERSION = "1"


class StructuralError(ValueError):
    """Rotation system does not describe a planar tree with numbered ends."""


def end_item(j: int) -> int:
    return -(j + 1)


def item_end(item: int) -> int:
    return -item - 1


@dataclass(frozen=True)
class LabeledTree:
    labels: tuple[str, ...]
    rotation: tuple[tuple[int, ...], ...]

    @property
    def q(self) -> int:
        return len(self.labels)

    @property
    def n_vertices(self) -> int:
        return len(self.rotation)

    @property
    def n_edges(self) -> int:
        """Finite edges plus the q unbounded ones."""
        return self.n_vertices - 1 + self.q

    def end_vertex(self, j: int) -> int:
        it = end_item(j)
        for v, items in enumerate(self.rotation):
            if it in items:
                return v
        raise StructuralError(f"end {j} is not attached")

    def edges(self) -> list[tuple[int, int]]:
        return sorted({(min(u, v), max(u, v)) for u, items in enumerate(self.rotation) for v in items if v >= 0})

    def relabeled(self, labels: Sequence[str]) -> "LabeledTree":
        return LabeledTree(tuple(labels), self.rotation)

    def permuted(self, perm: Sequence[int]) -> "LabeledTree":
        """Same tree with vertex ``v`` renamed ``perm[v]``."""
        rot: list[tuple[int, ...]] = [()] * self.n_vertices
        for v, items in enumerate(self.rotation):
            rot[perm[v]] = tuple(perm[u] if u >= 0 else u for u in items)
        return LabeledTree(self.labels, tuple(rot))

    def mirrored(self) -> "LabeledTree":
        """Mirror image: reverse all rotations and renumber ends accordingly."""
        q = self.q
        remap = {end_item(j): end_item((-j) % q) for j in range(q)}
        rot = tuple(tuple(remap.get(u, u) for u in reversed(items)) for items in self.rotation)
        labels = tuple(self.labels[(-j - 1) % q] for j in range(q))
        return LabeledTree(labels, rot)


def validate(tree: LabeledTree) -> None:
    """Raise StructuralError unless the rotation system is a tree with ends 0..q-1."""
    q, rot = tree.q, tree.rotation
    if q < 1 or not rot:
        raise StructuralError("empty tree")
    seen_ends: list[int] = []
    n_half = 0
    for v, items in enumerate(rot):
        if len(set(items)) != len(items):
            raise StructuralError(f"vertex {v} repeats an item")
        for u in items:
            if u >= 0:
                if u >= len(rot) or u == v or v not in rot[u]:
                    raise StructuralError(f"edge {v}-{u} is not symmetric")
                n_half += 1
            else:
                seen_ends.append(item_end(u))
    if sorted(seen_ends) != list(range(q)):
        raise StructuralError("ends must be numbered 0..q-1, each once")
    if n_half != 2 * (len(rot) - 1):
        raise StructuralError("edge count does not match a tree")
    stack, reached = [0], {0}
    while stack:
        v = stack.pop()
        for u in rot[v]:
            if u >= 0 and u not in reached:
                reached.add(u)
                stack.append(u)
    if len(reached) != len(rot):
        raise StructuralError("graph is disconnected")
    corner_faces(tree)


def corner_faces(tree: LabeledTree) -> dict[tuple[int, int], int]:
    """Face index of every corner, found by walking each face boundary."""
    q, rot = tree.q, tree.rotation
    index = {(v, u): i for v, items in enumerate(rot) for i, u in enumerate(items)}
    faces: dict[tuple[int, int], int] = {}
    for j in range(q):
        cur = (tree.end_vertex(j), index[(tree.end_vertex(j), end_item(j))])
        while True:
            if cur in faces:
                raise StructuralError("face walk revisits a corner")
            faces[cur] = j
            v, i = cur
            nxt = rot[v][(i + 1) % len(rot[v])]
            if nxt < 0:
                if item_end(nxt) != (j + 1) % q:
                    raise StructuralError("ends are not in counterclockwise order")
                break
            cur = (nxt, index[(nxt, v)])
    if len(faces) != sum(len(items) for items in rot):
        raise StructuralError("some corners lie on no face")
    return faces


def corner_values(tree: LabeledTree) -> list[list[str]]:
    faces = corner_faces(tree)
    return [[tree.labels[faces[(v, i)]] for i in range(len(items))] for v, items in enumerate(tree.rotation)]


def _cyclic_ok(values: Sequence[str], order: Sequence[str]) -> bool:
    k = len(order)
    if len(values) < 2 or len(set(values)) != len(values):
        return False
    pos = [order.index(w) for w in values]
    return sum((pos[(t + 1) % len(pos)] - pos[t]) % k for t in range(len(pos))) == k


def vertex_colors(tree: LabeledTree, cell: BaseCell) -> tuple[str, ...] | None:
    """Proper two-colouring under which every vertex obeys the cell order, or None."""
    vals = corner_values(tree)
    rev = tuple(reversed(cell.order))
    parity = _bfs_parity(tree)
    for first in ("x", "o"):
        cols = tuple(first if par == 0 else ("o" if first == "x" else "x") for par in parity)
        if all(_cyclic_ok(vals[v], cell.order if c == "x" else rev) for v, c in enumerate(cols)):
            return cols
    return None


def _bfs_parity(tree: LabeledTree) -> list[int]:
    par = [-1] * tree.n_vertices
    par[0] = 0
    stack = [0]
    while stack:
        v = stack.pop()
        for u in tree.rotation[v]:
            if u >= 0 and par[u] < 0:
                par[u] = 1 - par[v]
                stack.append(u)
    return par


def zero_count(tree: LabeledTree, cell: BaseCell | None = None) -> int:
    """Number of x vertices whose 0-face is bounded (not one of the q faces).

    For an eigenfunction y and the ratio f = y/y1 these are the zeros of y.
    """
    if cell is None:
        raise ValueError("zero_count needs the base cell")
    cols = vertex_colors(tree, cell)
    if cols is None:
        raise StructuralError("tree admits no valid colouring")
    vals = corner_values(tree)
    return sum(1 for v, c in enumerate(cols) if c == "x" and "0" not in vals[v])


def walk(tree: LabeledTree, start: int) -> str:
    """Parenthesis word of the counterclockwise traversal from end ``start``."""
    rot = tree.rotation
    root = tree.end_vertex(start)
    out: list[str] = ["("]
    # iterative DFS: (vertex, parent item, next offset)
    stack = [(root, end_item(start), 1)]
    while stack:
        v, par, off = stack.pop()
        items = rot[v]
        base = items.index(par)
        if off == len(items):
            out.append(")")
            continue
        stack.append((v, par, off + 1))
        u = items[(base + off) % len(items)]
        if u < 0:
            out.append("()")
        else:
            out.append("(")
            stack.append((u, v, 1))
    return "".join(out)


def code_at(tree: LabeledTree, start: int) -> str:
    lab = tree.labels[start:] + tree.labels[:start]
    return f"{tree.q};{','.join(lab)};{walk(tree, start)}"


def canonical_code(tree: LabeledTree) -> str:
    return min(code_at(tree, s) for s in range(tree.q))


def from_code(code: str) -> LabeledTree:
    """Rebuild a tree from a code; the starting end becomes end 0."""
    try:
        qs, labs, word = code.split(";")
        q = int(qs)
    except ValueError as exc:
        raise StructuralError(f"bad code {code!r}") from exc
    labels = tuple(labs.split(","))
    if len(labels) != q or not word.startswith("(") or not word.endswith(")"):
        raise StructuralError(f"bad code {code!r}")
    rot: list[list[int]] = [[end_item(0)]]
    stack = [0]
    nxt_end = 1
    i = 1
    while i < len(word) - 1:
        if word[i:i + 2] == "()":
            if not stack:
                raise StructuralError("unbalanced code")
            rot[stack[-1]].append(end_item(nxt_end))
            nxt_end += 1
            i += 2
        elif word[i] == "(":
            v = len(rot)
            rot.append([stack[-1]])
            rot[stack[-1]].append(v)
            stack.append(v)
            i += 1
        elif word[i] == ")":
            stack.pop()
            if not stack:
                raise StructuralError("unbalanced code")
            i += 1
        else:
            raise StructuralError(f"bad character {word[i]!r}")
    if len(stack) != 1 or nxt_end != q:
        raise StructuralError(f"code {code!r} does not close")
    tree = LabeledTree(labels, tuple(tuple(r) for r in rot))
    validate(tree)
    return tree


def _pattern_rotation_ok(labels: Sequence[str], family: ProblemFamily) -> bool:
    labels = tuple(labels)
    for pat in label_patterns(family):
        if any(labels == pat[s:] + pat[:s] for s in range(len(pat))):
            return True
    return False


def check_constraints(tree: LabeledTree, family: ProblemFamily) -> tuple[bool, list[str]]:
    """Validate a tree for ``family``; returns (ok, list of violations).

    Checks the end count, the label pattern, zero-face non-adjacency, the
    local cyclic-order rule that makes the tree expand to a line complex,
    the zero count for QES families and central symmetry where required.
    """
    validate(tree)
    cell = base_cell(family)
    bad: list[str] = []
    if tree.q != family.q:
        bad.append(f"ends: {tree.q} != {family.q}")
        return False, bad
    if not _pattern_rotation_ok(tree.labels, family):
        bad.append("labels: not a rotation of an admissible pattern")
    q = tree.q
    for j in range(q):
        if tree.labels[j] == "0" and tree.labels[(j - 1) % q] == "0":
            bad.append(f"zero-adjacency: end {j}")
    faces = corner_faces(tree)
    index = {(v, u): i for v, items in enumerate(tree.rotation) for i, u in enumerate(items)}
    for u, v in tree.edges():
        a = tree.labels[faces[(u, index[(u, v)])]]
        b = tree.labels[faces[(v, index[(v, u)])]]
        if a == "0" and b == "0":
            bad.append(f"zero-adjacency: edge {u}-{v}")
    for v, items in enumerate(tree.rotation):
        if len(items) == 2 and min(items) < 0:
            bad.append(f"reduced: vertex {v} only continues an end")
    cols = vertex_colors(tree, cell)
    if cols is None:
        bad.append("vertex-order: no colouring realizes the base cell order")
    if bad:
        return False, bad
    if family.is_qes:
        want = qes_spec(family).poly_degree
        got = zero_count(tree, cell)
        if got != want:
            bad.append(f"zero-count: {got} != {want}")
    if family.centrally_symmetric:
        from .complexes import half_turn

        if canonical_code(half_turn(tree, family)) != canonical_code(tree):
            bad.append("symmetry: not invariant under the half-turn")
    return not bad, bad


# -- enumeration ------------------------------------------------------------


def _plane_trees(q: int, labels: Sequence[str], cell: BaseCell, max_vertices: int) -> Iterator[LabeledTree]:
    """All trees rooted at end 0 whose vertices obey the cyclic-order rule.

    Children are generated in counterclockwise order; the corner values at a
    vertex become known one by one and partial sequences are pruned as soon
    as they cannot close up.
    """
    k = cell.k
    pos = {w: cell.order.index(w) for w in cell.order}
    for w in labels:
        if w not in pos:
            raise ValueError(f"label {w} not in base cell")
    lab_pos = [pos[w] for w in labels]

    def step(a: int, b: int, color: str) -> int:
        return (b - a) % k if color == "x" else (a - b) % k

    # each frame: (vertex id, colour, corner positions so far, step sum)
    rot: list[list[int]] = []

    def grow(v: int, color: str, first: int, nxt_end: int, budget: int) -> Iterator[tuple[int, int]]:
        # yields (next end index, vertices used) after the subtree of v is complete;
        # rot[v] already holds the parent item
        yield from _children(v, color, [first], 0, nxt_end, budget)

    def _children(v, color, corners, total, nxt_end, budget):
        deg = len(corners)
        # option: close the vertex
        if deg >= 2:
            close = step(corners[-1], corners[0], color)
            if close >= 1 and total + close == k and not (deg == 2 and min(rot[v]) < 0):
                yield nxt_end, budget
        if deg >= k:
            return
        child_col = "o" if color == "x" else "x"
        # option: an end as next child
        if nxt_end < q:
            c = lab_pos[nxt_end]
            s = step(corners[-1], c, color)
            if s >= 1 and total + s < k and c not in corners:
                rot[v].append(end_item(nxt_end))
                yield from _children(v, color, corners + [c], total + s, nxt_end + 1, budget)
                rot[v].pop()
        # option: a new vertex as next child
        if budget > 0:
            u = len(rot)
            rot.append([v])
            rot[v].append(u)
            for e2, b2 in grow(u, child_col, lab_pos[nxt_end - 1], nxt_end, budget - 1):
                c = lab_pos[e2 - 1]
                s = step(corners[-1], c, color)
                if s >= 1 and total + s < k and c not in corners:
                    yield from _children(v, color, corners + [c], total + s, e2, b2)
            rot[v].pop()
            rot.pop()

    for color in ("x", "o"):
        rot.clear()
        rot.append([end_item(0)])
        for e, _ in grow(0, color, lab_pos[0], 1, max_vertices - 1):
            if e == q:
                yield LabeledTree(tuple(labels), tuple(tuple(r) for r in rot))


def enumerate_trees(family: ProblemFamily, max_edges: int) -> list[str]:
    """Sorted canonical codes of every valid tree with at most ``max_edges`` edges.

    Edges count the finite ones plus the q unbounded ones.
    """
    q = family.q
    if max_edges < q:
        raise ValueError(f"max_edges must be at least q={q}")
    cell = base_cell(family)
    max_vertices = max_edges - q + 1
    codes: set[str] = set()
    for pat in label_patterns(family):
        for tree in _plane_trees(q, pat, cell, max_vertices):
            code = canonical_code(tree)
            if code in codes:
                continue
            ok, _ = check_constraints(tree, family)
            if ok:
                codes.add(code)
    log.info("enumerated %d trees for %s up to %d edges", len(codes), family.spec_string(), max_edges)
    return sorted(codes)


def code_edges(code: str) -> int:
    """Edge count (finite plus unbounded) read off a canonical code."""
    word = code.rsplit(";", 1)[1]
    return word.count("(")


def write_tree_set(path: str | Path, codes: Sequence[str], family: ProblemFamily, max_edges: int) -> Path:
    """Write sorted codes, one per line, with a JSON sidecar ``<path>.json``."""
    path = Path(path)
    body = "".join(c + "\n" for c in sorted(codes))
    path.write_text(body, encoding="utf-8")
    side = path.with_name(path.name + ".json")
    meta = {
        "family": family.spec_string(),
        "max_edges": max_edges,
        "count": len(codes),
        "generator_version": GENERATOR_VERSION,
    }
    side.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_tree_set(path: str | Path) -> list[str]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [ln.strip() for ln in lines if ln.strip() and not ln.startswith("#")]

"""Base cell decompositions of the sphere.

A base decomposition has two vertices (x and o) joined by k edges; each of
the k faces holds one distinct asymptotic value.  ``order`` lists the face
values counterclockwise around x.  Loops around the faces, based at x and
composed left to right as paths, satisfy

    gamma[order[k-1]] * ... * gamma[order[0]] == 1.

The even quartic and the sextic use the relation
``gamma_i gamma_1 gamma_{-i} gamma_{-1} gamma_0 == 1``, which is the one the
published substitutions for s_0 and s_inf preserve.  The cubic and the QES
quartic use ``gamma_{-1} gamma_0 gamma_1 gamma_inf == 1`` (three finite
points on the real line, loops taken from above).
"""
from __future__ import annotations

from dataclasses import dataclass

from .problems import Kind, ProblemFamily, asymptotic_pattern


@dataclass(frozen=True)
class BaseCell:
    order: tuple[str, ...]
    free: tuple[str, ...]

    @property
    def k(self) -> int:
        return len(self.order)

    def position(self, label: str) -> int:
        return self.order.index(label)

    @property
    def relation(self) -> tuple[str, ...]:
        """Path-ordered product of all face loops that equals the identity."""
        return tuple(reversed(self.order))

    @property
    def dependent(self) -> str:
        (dep,) = [v for v in self.order if v not in self.free]
        return dep


SYMMETRIC_CELL = BaseCell(order=("0", "-1", "-i", "1", "i"), free=("i", "1", "-i", "-1"))
LINE_CELL = BaseCell(order=("inf", "1", "0", "-1"), free=("-1", "0", "1"))


def base_cell(family: ProblemFamily) -> BaseCell:
    if family.centrally_symmetric:
        return SYMMETRIC_CELL
    return LINE_CELL


def swap_i(labels):
    sw = {"i": "-i", "-i": "i"}
    return tuple(sw.get(x, x) for x in labels)


def label_patterns(family: ProblemFamily) -> tuple[tuple[str, ...], ...]:
    """Face-label sequences a classifying tree may carry.

    For the symmetric families the braid moves interchange the values i and
    -i, so trees with the opposite cyclic order of i, -i occur as well.
    """
    pat = asymptotic_pattern(family)
    if family.kind in (Kind.EVEN_QUARTIC, Kind.QES_SEXTIC):
        return (pat, swap_i(pat))
    return (pat,)

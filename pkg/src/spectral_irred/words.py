"""Reduced words in a free group on face loops gamma_w."""
from __future__ import annotations

from collections.abc import Iterable, Mapping

Letter = tuple[str, int]
Word = tuple[Letter, ...]


def reduce_word(letters: Iterable[Letter]) -> Word:
    out: list[Letter] = []
    for g, e in letters:
        if out and out[-1][0] == g and out[-1][1] == -e:
            out.pop()
        else:
            out.append((g, e))
    return tuple(out)


def gen(w: str) -> Word:
    return ((w, 1),)


def inverse(word: Word) -> Word:
    return tuple((g, -e) for g, e in reversed(word))


def mul(*words: Word) -> Word:
    return reduce_word(letter for w in words for letter in w)


def conj(word: Word, by: Word) -> Word:
    """by^-1 * word * by."""
    return mul(inverse(by), word, by)


def substitute(word: Word, table: Mapping[str, Word]) -> Word:
    parts = [table[g] if e == 1 else inverse(table[g]) for g, e in word]
    return mul(*parts)


def cyclic_reduce(word: Word) -> Word:
    w = reduce_word(word)
    while len(w) >= 2 and w[0][0] == w[-1][0] and w[0][1] == -w[-1][1]:
        w = w[1:-1]
    return w


def is_conjugate(a: Word, b: Word) -> bool:
    ca, cb = cyclic_reduce(a), cyclic_reduce(b)
    if len(ca) != len(cb):
        return False
    if not ca:
        return True
    return any(ca == cb[s:] + cb[:s] for s in range(len(cb)))


def format_word(word: Word) -> str:
    if not word:
        return "1"
    return " ".join(f"g[{g}]" if e == 1 else f"g[{g}]^-1" for g, e in word)

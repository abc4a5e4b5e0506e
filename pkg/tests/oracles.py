"""Independent reference computations used by the tests.

None of these share code paths with the library beyond the tree data type,
the canonical code and the constraint predicate (which is the definition of
a valid tree; only generation is re-done here).
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.integrate import solve_ivp

from spectral_irred.cells import base_cell, label_patterns
from spectral_irred.trees import (
    LabeledTree,
    StructuralError,
    canonical_code,
    check_constraints,
    end_item,
    validate,
)

# -- trees by brute force -----------------------------------------------------

END = None  # placeholder for an unnumbered end slot


def labeled_trees(n: int):
    """Edge lists of all labeled trees on n vertices (Pruefer decoding)."""
    if n == 1:
        yield []
        return
    if n == 2:
        yield [(0, 1)]
        return
    for seq in itertools.product(range(n), repeat=n - 2):
        degree = [1] * n
        for v in seq:
            degree[v] += 1
        edges = []
        for v in seq:
            leaf = min(u for u in range(n) if degree[u] == 1)
            edges.append((leaf, v))
            degree[leaf] -= 1
            degree[v] -= 1
        u, w = [x for x in range(n) if degree[x] == 1]
        edges.append((u, w))
        yield edges


def compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for k in range(total + 1):
        for rest in compositions(total - k, parts - 1):
            yield (k,) + rest


def cyclic_orders(items: list):
    """Distinct cyclic orders of a multiset, each starting with items[0]."""
    if len(items) <= 1:
        yield tuple(items)
        return
    first, rest = items[0], items[1:]
    seen = set()
    for perm in itertools.permutations(rest):
        if perm not in seen:
            seen.add(perm)
            yield (first,) + perm


def _number_ends(rot: list[tuple]) -> tuple[tuple[int, ...], ...] | None:
    """Replace end slots by end items, numbered along the boundary walk."""
    slots = [(v, i) for v, items in enumerate(rot) for i, u in enumerate(items) if u is END]
    if not slots:
        return None
    pos = {(v, u): i for v, items in enumerate(rot) for i, u in enumerate(items) if u is not END}
    number = {}
    v, i = slots[0]
    for k in range(len(slots)):
        number[(v, i)] = k
        # walk to the next end slot: step ccw, cross edges until an end appears
        i = (i + 1) % len(rot[v])
        while rot[v][i] is not END:
            u = rot[v][i]
            i = (pos[(u, v)] + 1) % len(rot[u])
            v = u
    if len(number) != len(slots) or (v, i) != slots[0]:
        return None
    return tuple(tuple(end_item(number[(v, i)]) if u is END else u for i, u in enumerate(items))
                 for v, items in enumerate(rot))


def brute_force_trees(family, max_edges: int) -> list[str]:
    q = family.q
    k = len(base_cell(family).order)
    rotations = {tuple(p[s:] + p[:s]) for p in label_patterns(family) for s in range(q)}
    codes: set[str] = set()
    seen: set[str] = set()
    for n in range(1, max_edges - q + 2):
        for edges in labeled_trees(n):
            nbrs = [[] for _ in range(n)]
            for a, b in edges:
                nbrs[a].append(b)
                nbrs[b].append(a)
            for ends in compositions(q, n):
                # a vertex needs two distinct corner values and at most one corner per value
                if any(not 2 <= len(nbrs[v]) + ends[v] <= k for v in range(n)):
                    continue
                choices = [list(cyclic_orders(nbrs[v] + [END] * ends[v])) for v in range(n)]
                for rot in itertools.product(*choices):
                    numbered = _number_ends(list(rot))
                    if numbered is None:
                        continue
                    try:
                        validate(LabeledTree(next(iter(rotations)), numbered))
                    except StructuralError:
                        continue
                    for labels in rotations:
                        tree = LabeledTree(labels, numbered)
                        code = canonical_code(tree)
                        if code in seen:
                            continue
                        seen.add(code)
                        if check_constraints(tree, family)[0]:
                            codes.add(code)
    return sorted(codes)


# -- even quartic in a harmonic-oscillator basis ------------------------------


def hermite_quartic(alpha: complex = 0.0, size: int = 120, omega: float = 2.0, parity: int | None = None) -> np.ndarray:
    """Eigenvalues of -y'' + (x^4 + alpha x^2) y on the line.

    Real alpha gives a symmetric matrix; complex alpha a complex-symmetric
    one, sorted by real part.  ``parity`` 0 or 1 keeps even or odd states.
    """
    # x = (a + a^dagger) / sqrt(2 omega) with [a, a^dagger] = 1
    n = np.arange(size + 4)
    a = np.diag(np.sqrt(n[1:]), 1)
    x = (a + a.T) / math.sqrt(2 * omega)
    p2 = -(a - a.T) @ (a - a.T) * omega / 2
    x2 = x @ x
    h = (p2 + x2 @ x2 + alpha * x2)[:size, :size]
    if parity is not None:
        keep = np.arange(parity, size, 2)
        h = h[np.ix_(keep, keep)]
    if np.isrealobj(alpha) or complex(alpha).imag == 0:
        return np.linalg.eigvalsh(h.real)
    vals = np.linalg.eigvals(h)
    return vals[np.argsort(vals.real)]


# -- PT cubic by real-line shooting -------------------------------------------


def _cubic_side(lam: complex, alpha: float, sign: int, length: float) -> tuple[complex, complex]:
    v = lambda x: 1j * x ** 3 + 1j * alpha * x - lam
    x0 = sign * length
    # WKB start: y' = -sign * sqrt(V) y with the decaying branch
    k = np.sqrt(complex(v(x0)))
    if (sign * k).real < 0:
        k = -k
    y0 = np.array([1.0 + 0j, -sign * k])

    def rhs(x, y):
        return [y[1], v(x) * y[0]]

    sol = solve_ivp(rhs, (x0, 0.0), y0, method="DOP853", rtol=1e-12, atol=1e-14)
    y, dy = sol.y[0, -1], sol.y[1, -1]
    s = max(abs(y), abs(dy))
    return y / s, dy / s


def cubic_wronskian(lam: complex, alpha: float = 0.0, length: float = 7.0) -> complex:
    yl, dyl = _cubic_side(lam, alpha, -1, length)
    yr, dyr = _cubic_side(lam, alpha, 1, length)
    return yl * dyr - dyl * yr


def cubic_eigenvalue(guess: complex, alpha: float = 0.0, tol: float = 1e-11) -> complex:
    """Secant iteration on the matching Wronskian."""
    z0, z1 = complex(guess), complex(guess) + 1e-3
    f0, f1 = cubic_wronskian(z0, alpha), cubic_wronskian(z1, alpha)
    for _ in range(60):
        z2 = z1 - f1 * (z1 - z0) / (f1 - f0)
        if abs(z2 - z1) < tol:
            return z2
        z0, f0, z1, f1 = z1, f1, z2, cubic_wronskian(z2, alpha)
    raise RuntimeError("secant did not converge")

"""Numerical cell decomposition of an eigenfunction ratio.

For an eigenpair (alpha, lam) let y be the eigenfunction and y1 a second
solution (opposite parity for the symmetric families, subdominant in the
last sector otherwise), f = y / y1.  The asymptotic values of f in the
Stokes sectors are normalized; one of them, c, is free.  The eigenpair is
moved along the eigenvalue surface until c reaches the standard value -1
(c runs along a straight segment), and the preimage under f of a cell
decomposition of the sphere is computed:

* x vertices are the zeros of A = y - p*Y1 (f = p),
* o vertices are the zeros of B = y - o*Y1 (f = o; for o = inf, of Y1),
* edges are the preimages of the rays arg g = theta_k, g = A / B.

Vertices far out lie on the rays of the line complex; they are cut off at
a window radius and the rest is reduced to a labeled tree.

The c-plane is punctured at 0, 1 and inf.  Loops based at -1 are read as
words in a (crossing the cut below 0 left to right) and b (the cut below
1); lifting the loops a and ab fixes which braid move each letter is, and
that lets an alpha-loop around a branch point be compared with the tree
moves.  Cell maps need the recessive eigenfunction to carry digits across
the window, so they are reliable for moderate |alpha| and |lam| only.
"""
from __future__ import annotations

import cmath
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numba import njit

from .cells import base_cell
from .complexes import _dedupe, _prune_rays, _to_tree
from .continuation import AlphaPath
from .problems import Kind, ProblemFamily, asymptotic_pattern, potential, sector_geometry
from .shooting import TAYLOR_ORDER, _integrate, integrate_ray, r_start_for
from .trees import LabeledTree, canonical_code


class CellMapError(RuntimeError):
    """The numerical cell decomposition could not be resolved."""


STANDARD_TOL = 1e-7


# -- solution basis -------------------------------------------------------


@njit(cache=True)
def _basis_at(c, lam, z, order, eps):
    # u: (1, 0) at 0, v: (0, 1) at 0; returned on a common scale
    u, du, lu, s1 = _integrate(c, lam, 0j, z, 1.0 + 0j, 0j, order, eps, 100000)
    v, dv, lv, s2 = _integrate(c, lam, 0j, z, 0j, 1.0 + 0j, order, eps, 100000)
    m = max(lu, lv)
    fu = math.exp(lu - m)
    fv = math.exp(lv - m)
    return u * fu, du * fu, v * fv, dv * fv, m, min(s1, s2)


@njit(cache=True)
def _basis_from(c, lam, z0, u0, du0, v0, dv0, z, order, eps):
    u, du, lu, s1 = _integrate(c, lam, z0, z, u0, du0, order, eps, 100000)
    v, dv, lv, s2 = _integrate(c, lam, z0, z, v0, dv0, order, eps, 100000)
    m = max(lu, lv)
    fu = math.exp(lu - m)
    fv = math.exp(lv - m)
    return u * fu, du * fu, v * fv, dv * fv, m, min(s1, s2)


@njit(cache=True)
def _basis_grid(c, lam, pts, order, eps):
    n = pts.shape[0]
    out = np.zeros((n, 4), dtype=np.complex128)
    for i in range(n):
        u, du, v, dv, m, s = _basis_at(c, lam, pts[i], order, eps)
        out[i, 0] = u
        out[i, 1] = du
        out[i, 2] = v
        out[i, 3] = dv
    return out


@njit(cache=True)
def _step_node(c, lam, z0, w, z1, order, eps):
    u, du, v, dv, m, st = _basis_from(c, lam, z0, w[0], w[1], w[2], w[3], z1, order, eps)
    out = np.empty(4, dtype=np.complex128)
    out[0], out[1], out[2], out[3] = u, du, v, dv
    return out, st


@njit(cache=True)
def _basis_lattice(c, lam, x0, h, n, order, eps):
    # march along the row nearest the real axis, then up and down the columns
    out = np.zeros((n, n, 4), dtype=np.complex128)
    j0 = min(max(int(round(-x0 / h)), 0), n - 1)
    i0 = j0
    z = complex(x0 + h * i0, x0 + h * j0)
    u, du, v, dv, m, st = _basis_at(c, lam, z, order, eps)
    bad = st < 0
    out[i0, j0, 0], out[i0, j0, 1], out[i0, j0, 2], out[i0, j0, 3] = u, du, v, dv
    for i in range(i0 + 1, n):
        out[i, j0], st = _step_node(c, lam, complex(x0 + h * (i - 1), x0 + h * j0), out[i - 1, j0],
                                    complex(x0 + h * i, x0 + h * j0), order, eps)
        bad |= st < 0
    for i in range(i0 - 1, -1, -1):
        out[i, j0], st = _step_node(c, lam, complex(x0 + h * (i + 1), x0 + h * j0), out[i + 1, j0],
                                    complex(x0 + h * i, x0 + h * j0), order, eps)
        bad |= st < 0
    for i in range(n):
        xr = x0 + h * i
        for j in range(j0 + 1, n):
            out[i, j], st = _step_node(c, lam, complex(xr, x0 + h * (j - 1)), out[i, j - 1],
                                       complex(xr, x0 + h * j), order, eps)
            bad |= st < 0
        for j in range(j0 - 1, -1, -1):
            out[i, j], st = _step_node(c, lam, complex(xr, x0 + h * (j + 1)), out[i, j + 1],
                                       complex(xr, x0 + h * j), order, eps)
            bad |= st < 0
    return out, bad


class Solutions:
    """Solutions of -y'' + (P - lam) y = 0 given by initial data at 0."""

    def __init__(self, family: ProblemFamily, alpha: complex, lam: complex):
        self.c = np.array(potential(family, alpha).coefficients, dtype=np.complex128)
        self.lam = complex(lam)

    def basis(self, z: complex):
        z = complex(z)
        u, du, v, dv, _, status = _basis_at(self.c, self.lam, z, TAYLOR_ORDER, 1e-16)
        if status < 0:
            raise CellMapError(f"integration failed at z={z}")
        return u, du, v, dv

    def pair(self, z: complex, a: tuple[complex, complex], b: tuple[complex, complex]):
        """(A, A', B, B') at z for initial data a, b, on a common scale."""
        u, du, v, dv = self.basis(z)
        return (a[0] * u + a[1] * v, a[0] * du + a[1] * dv, b[0] * u + b[1] * v, b[0] * du + b[1] * dv)

    def grid(self, pts: np.ndarray) -> np.ndarray:
        return _basis_grid(self.c, self.lam, pts.astype(np.complex128), TAYLOR_ORDER, 1e-16)

    def lattice(self, x0: float, h: float, n: int) -> np.ndarray:
        """Basis on the nodes x0 + h*(i + 1j*j), shape (n*n, 4), node scales independent."""
        vals, bad = _basis_lattice(self.c, self.lam, float(x0), float(h), n, TAYLOR_ORDER, 1e-16)
        if bad:
            raise CellMapError("integration failed on the lattice")
        return vals.reshape(n * n, 4)


# -- asymptotic values and configuration ----------------------------------------


def _wr(a, b) -> complex:
    return a[0] * b[1] - a[1] * b[0]


@dataclass
class Configuration:
    """Normalized asymptotic values of f for one eigenpair."""

    family: ProblemFamily
    alpha: complex
    lam: complex
    y: tuple[complex, complex]       # initial data at 0
    y1: tuple[complex, complex]      # second solution, scaled so that f -> 1 on the "1" sector
    values: tuple[complex, ...]      # per sector; math.inf for an infinite value
    moving: int                      # sector of the free value
    param: complex                   # configuration coordinate, -1 at the standard position

    def labels_at_standard(self) -> tuple[str, ...]:
        """Per-sector labels; only meaningful at the standard position."""
        pat = list(asymptotic_pattern(self.family))
        if self.family.centrally_symmetric:
            v = self.values[self.moving]
            v_lab = "i" if v.imag > 0 else "-i"
            q = len(pat)
            opp = (self.moving + q // 2) % q
            pat[self.moving], pat[opp] = v_lab, ("-i" if v_lab == "i" else "i")
        return tuple(pat)

    @property
    def exponent(self) -> int:
        return 2 if self.family.centrally_symmetric else 1


def configuration(family: ProblemFamily, alpha: complex, lam: complex) -> Configuration:
    if family.kind not in (Kind.QES_SEXTIC, Kind.EVEN_QUARTIC, Kind.QES_QUARTIC):
        raise CellMapError(f"no cell map for {family.kind.value}")
    pot = potential(family, alpha)
    geo = sector_geometry(family)
    r = r_start_for(family, alpha, abs(lam) + 2)
    sub = [integrate_ray(pot, lam, j, r, 1e-16, 0j, geo.ray_angles) for j in range(geo.q)]
    y = (sub[0].y, sub[0].dy)
    if family.centrally_symmetric:
        # parity of y decides the opposite-parity partner
        y1 = (0j, 1 + 0j) if abs(y[0]) > abs(y[1]) else (1 + 0j, 0j)
    else:
        y1 = (sub[-1].y, sub[-1].dy)
    pat = asymptotic_pattern(family)
    vals = []
    for j in range(geo.q):
        vj = (sub[j].y, sub[j].dy)
        den = _wr(y1, vj)
        vals.append(math.inf if abs(den) < 1e-13 * abs(_wr(y, vj)) else _wr(y, vj) / den)
    one = pat.index("1")
    scale = vals[one]
    y1 = (y1[0] * scale, y1[1] * scale)
    vals = [v if v == math.inf else v / scale for v in vals]
    for j, lab in enumerate(pat):
        if lab == "0":
            vals[j] = 0j
    moving = pat.index("i") if family.centrally_symmetric else pat.index("-1")
    e = 2 if family.centrally_symmetric else 1
    return Configuration(family, complex(alpha), complex(lam), y, y1, tuple(vals), moving, vals[moving] ** e)


# -- lifting configuration paths to the eigenvalue surface ---------------------------


@dataclass
class Lift:
    """Points (alpha, lam, c) of a lifted configuration path."""

    points: list[tuple[complex, complex, complex]]

    @property
    def end(self) -> tuple[complex, complex]:
        return self.points[-1][0], self.points[-1][1]


class _Follower:
    """lam as a function of alpha along one eigenvalue branch."""

    def __init__(self, family: ProblemFamily):
        self.family = family
        self.qes = family.is_qes
        if not self.qes:
            from .continuation import SpectralFunction

            self.func = SpectralFunction(family, "full", alpha_bound=8.0, lam_bound=40.0)

    def __call__(self, alpha: complex, lam: complex) -> complex | None:
        if self.qes:
            from .qes import elementary_eigenvalues

            roots = sorted(elementary_eigenvalues(self.family, alpha), key=lambda r: abs(r - lam))
            if len(roots) > 1 and abs(roots[0] - lam) > 0.3 * abs(roots[1] - lam):
                return None
            return roots[0]
        new, ok, _ = self.func.newton(alpha, lam)
        return new if ok else None


def lift_path(family: ProblemFamily, alpha: complex, lam: complex, path, tol: float = 1e-10,
              min_dt: float = 1e-6) -> Lift:
    """Follow (alpha, lam) on the eigenvalue surface so that c runs along ``path(t)``, t in [0, 1].

    The eigenvalue moves with alpha along its branch; alpha is corrected by
    Newton on c(alpha) = path(t) with a finite-difference slope.
    """
    follow = _Follower(family)

    def c_at(a, l):
        return configuration(family, a, l).param

    pts = [(complex(alpha), complex(lam), c_at(alpha, lam))]
    if abs(pts[0][2] - path(0.0)) > 1e-6:
        raise CellMapError("path does not start at the configuration of the eigenpair")
    t, dt = 0.0, 0.05
    while t < 1.0:
        dt = min(dt, 1.0 - t)
        target = path(t + dt)
        a, l, c = pts[-1]
        ok = False
        for _ in range(10):
            h = 1e-6 * max(1.0, abs(a))
            lp, lm = follow(a + h, l), follow(a - h, l)
            if lp is None or lm is None:
                break
            slope = (c_at(a + h, lp) - c_at(a - h, lm)) / (2 * h)
            step = (c - target) / slope
            if abs(step) > 0.25:
                break
            a_new = a - step
            l_new = follow(a_new, l)
            if l_new is None:
                break
            a, l, c = a_new, l_new, c_at(a_new, l_new)
            if abs(c - target) < tol * max(1.0, abs(target)):
                ok = True
                break
        if ok:
            pts.append((a, l, c))
            t += dt
            dt = min(dt * 1.5, 0.2)
        else:
            dt /= 2
            if dt < min_dt:
                raise CellMapError(f"lift stalled at t={t:.6g}, alpha={pts[-1][0]}")
    return Lift(pts)


def segment(c0: complex, c1: complex = -1 + 0j):
    return lambda t: c0 + (c1 - c0) * t


def lift_to_standard(family: ProblemFamily, alpha: complex, lam: complex) -> Lift:
    """Lift the straight segment from the current configuration to the standard one."""
    c0 = configuration(family, alpha, lam).param
    if abs(c0.imag) < 1e-9 and c0.real >= 0:
        raise CellMapError("the straight path to the standard configuration meets a puncture")
    return lift_path(family, alpha, lam, segment(c0))


# -- cell decomposition of the sphere -----------------------------------------------


def _standard_values(cfg: Configuration) -> dict[str, complex]:
    if cfg.exponent == 2:
        vi = 1j
        return {"0": 0j, "1": 1 + 0j, "-1": -1 + 0j, "i": vi, "-i": -vi}
    return {"0": 0j, "1": 1 + 0j, "-1": -1 + 0j, "inf": math.inf}


def _base_points(vals: dict[str, complex]) -> tuple[complex, complex]:
    """x point p and o point o (possibly inf) of the standard decomposition."""
    if "inf" in vals:
        return -1j, 1j
    return 0.3 * cmath.exp(-0.25j * math.pi), math.inf


def _g_value(w: complex, p: complex, o: complex) -> complex:
    if w == math.inf:
        return 1 + 0j
    if o == math.inf:
        return w - p
    return (w - p) / (w - o)


def ray_angles(cell_order, vals: dict[str, complex], p: complex, o: complex) -> list[float]:
    """Angles of the k edge rays in the g-plane, edge j just before face order[j].

    Raises CellMapError unless the faces appear counterclockwise in ``cell_order``.
    """
    args = [cmath.phase(_g_value(vals[w], p, o)) for w in cell_order]
    k = len(args)
    gaps = [(args[(j + 1) % k] - args[j]) % (2 * math.pi) for j in range(k)]
    if abs(sum(gaps) - 2 * math.pi) > 1e-9 or min(gaps) < 1e-3:
        raise CellMapError("asymptotic values are not in base-cell order")
    return [args[j - 1] + gaps[j - 1] / 2 for j in range(k)]


# -- preimages --------------------------------------------------------------------


@dataclass
class CellMap:
    family: ProblemFamily
    alpha: complex
    lam: complex
    labels: tuple[str, ...]
    x_points: list[complex]
    o_points: list[complex]
    tree: LabeledTree
    window: float


    @property
    def code(self) -> str:
        return canonical_code(self.tree)


@njit(cache=True)
def _pair_nb(c, lam, gx0, gh, gvals, a0, a1, b0, b1, z):
    # (A, A', B, B'), integrating from the nearest grid node when there is one
    n = gvals.shape[0]
    i = int(round((z.real - gx0) / gh))
    j = int(round((z.imag - gx0) / gh))
    if 0 <= i < n and 0 <= j < n:
        z0 = complex(gx0 + gh * i, gx0 + gh * j)
        u, du, v, dv, m, st = _basis_from(c, lam, z0, gvals[i, j, 0], gvals[i, j, 1],
                                          gvals[i, j, 2], gvals[i, j, 3], z, TAYLOR_ORDER, 1e-16)
    else:
        u, du, v, dv, m, st = _basis_at(c, lam, z, TAYLOR_ORDER, 1e-16)
    return a0 * u + a1 * v, a0 * du + a1 * dv, b0 * u + b1 * v, b0 * du + b1 * dv, st


@njit(cache=True)
def _zero_nb(c, lam, gx0, gh, gvals, a0, a1, z, tol, it):
    z_start = z
    for _ in range(it):
        if abs(z - z_start) > 1.0:
            return z, False
        A, dA, B, dB, st = _pair_nb(c, lam, gx0, gh, gvals, a0, a1, a0, a1, z)
        if st < 0 or dA == 0:
            return z, False
        step = A / dA
        z -= step
        if abs(step) < tol * max(1.0, abs(z)):
            return z, True
    return z, False


@njit(cache=True)
def _solve_nb(c, lam, gx0, gh, gvals, a0, a1, b0, b1, z, target, inverse):
    # Newton on g = target, or on 1/g = 1/target when inverse
    z_start = z
    for _ in range(12):
        if abs(z - z_start) > 0.5:
            return z, False
        A, dA, B, dB, st = _pair_nb(c, lam, gx0, gh, gvals, a0, a1, b0, b1, z)
        if st < 0:
            return z, False
        if inverse:
            h = B / A
            dh = (dB * A - B * dA) / A ** 2
            tgt = 1 / target
        else:
            h = A / B
            dh = (dA * B - A * dB) / B ** 2
            tgt = target
        if dh == 0 or not np.isfinite(dh.real) or not np.isfinite(dh.imag):
            return z, False
        step = (h - tgt) / dh
        z -= step
        if abs(step) < 1e-13 * max(1.0, abs(z)):
            return z, True
    return z, False


@njit(cache=True)
def _trace_nb(c, lam, gx0, gh, gvals, a0, a1, b0, b1, z0, theta, forward, residue):
    e = complex(math.cos(theta), math.sin(theta))
    u_lo = math.log(1e-3)
    u_hi = math.log(1e3)
    if forward:
        A, dA, B, dB, st = _pair_nb(c, lam, gx0, gh, gvals, a0, a1, b0, b1, z0)
        u = u_lo
        z = z0 + math.exp(u) * e / (dA / B)
    else:
        u = u_hi
        z = z0 + residue / (math.exp(u) * e)
    du = 0.1
    while (u < u_hi) if forward else (u > u_lo):
        un = min(u + du, u_hi) if forward else max(u - du, u_lo)
        target = math.exp(un) * e
        # predictor from the local derivative
        A, dA, B, dB, st = _pair_nb(c, lam, gx0, gh, gvals, a0, a1, b0, b1, z)
        g = A / B
        gp = (dA * B - A * dB) / B ** 2
        zp = z + (target - g) / gp if gp != 0 else z
        zn, ok = _solve_nb(c, lam, gx0, gh, gvals, a0, a1, b0, b1, zp, target, un > 0)
        if ok and abs(zn - zp) <= 0.2 * abs(zp - z) + 1e-10 and abs(zn - z) < 0.1:
            z, u = zn, un
            du = min(du * 1.3, 0.4)
        else:
            du /= 2
            if du < 1e-6:
                return z, False
    return z, True


class _Preimage:
    def __init__(self, sols: Solutions, a, b):
        self.sols, self.a, self.b = sols, a, b
        self._grid = (0.0, 1.0, np.zeros((0, 0, 4), dtype=np.complex128))

    def attach_grid(self, x0: float, h: float, n: int, values: np.ndarray) -> None:
        """Start integrations from the nearest node of the grid x0 + h*(i + 1j*j)."""
        self._grid = (float(x0), float(h), np.ascontiguousarray(values.reshape(n, n, 4)))

    def _args(self):
        return (self.sols.c, self.sols.lam) + self._grid

    def g(self, z):
        A, dA, B, dB, st = _pair_nb(*self._args(), *self.a, *self.b, complex(z))
        if st < 0:
            raise CellMapError(f"integration failed at z={z}")
        return A, dA, B, dB

    def zero(self, z, which: str, tol: float = 1e-12, it: int = 40) -> complex | None:
        coef = self.a if which == "A" else self.b
        z, ok = _zero_nb(*self._args(), *coef, complex(z), tol, it)
        return z if ok else None

    def trace(self, z0, theta: float, forward: bool, residue: complex = 0j) -> complex:
        """Follow g = r e^{i theta} from the x point z0 (forward) or from the pole z0."""
        z, ok = _trace_nb(*self._args(), *self.a, *self.b, complex(z0), float(theta), forward,
                          complex(residue))
        if not ok:
            raise CellMapError("edge tracing stalled")
        return z


def _find_zeros(pre: _Preimage, grid_pts: np.ndarray, grid_vals: np.ndarray, shape, which: str, radius: float):
    coef = pre.a if which == "A" else pre.b
    vals = coef[0] * grid_vals[:, 0] + coef[1] * grid_vals[:, 2]
    norm = np.abs(grid_vals[:, 0]) + np.abs(grid_vals[:, 2])
    mag = (np.abs(vals) / norm).reshape(shape)
    pts = grid_pts.reshape(shape)
    seeds = []
    n0, n1 = shape
    for i in range(n0):
        for j in range(n1):
            m = mag[i, j]
            nb = mag[max(0, i - 1):i + 2, max(0, j - 1):j + 2]
            if m <= nb.min() + 1e-300:
                seeds.append(pts[i, j])
    found: list[complex] = []
    for s in seeds:
        z = pre.zero(complex(s), which)
        if z is None or abs(z) > radius:
            continue
        if all(abs(z - w) > 1e-7 for w in found):
            found.append(z)
    return found


def _winding(pre: _Preimage, which: str, radius: float, n: int = 720) -> int:
    coef = pre.a if which == "A" else pre.b
    while True:
        th = 2 * np.pi * np.arange(n) / n
        pts = radius * np.exp(1j * th)
        g = pre.sols.grid(pts)
        vals = coef[0] * g[:, 0] + coef[1] * g[:, 2]
        ph = np.angle(vals)
        d = np.angle(np.exp(1j * np.diff(np.append(ph, ph[0]))))
        if np.max(np.abs(d)) < 0.8 or n > 20000:
            return int(round(d.sum() / (2 * np.pi)))
        n *= 2


def cell_map(family: ProblemFamily, alpha: complex, lam: complex, window: float | None = None,
             spacing: float = 0.08) -> CellMap:
    """Tree of the eigenpair; (alpha, lam) must sit at the standard position."""
    cfg = configuration(family, alpha, lam)
    if abs(cfg.param + 1) > STANDARD_TOL:
        raise CellMapError(f"configuration {cfg.param} is not standard; lift it first")
    labels_s = cfg.labels_at_standard()
    order = base_cell(family).order
    vals = _standard_values(cfg)
    p, o = _base_points(vals)
    angles = ray_angles(order, vals, p, o)
    y, Y1 = cfg.y, cfg.y1
    a = (y[0] - p * Y1[0], y[1] - p * Y1[1])
    b = Y1 if o == math.inf else (y[0] - o * Y1[0], y[1] - o * Y1[1])
    sols = Solutions(family, alpha, lam)
    pre = _Preimage(sols, a, b)
    geo = sector_geometry(family)
    q = geo.q
    R = window or _default_window(family, alpha, lam)
    outer = 1.35 * R
    wind = {w: _winding(pre, w, R) for w in ("A", "B")}
    for attempt in range(3):
        xs = np.arange(-outer, outer + spacing / 2, spacing)
        X, Yg = np.meshgrid(xs, xs, indexing="ij")
        pts = (X + 1j * Yg).ravel()
        gv = sols.lattice(xs[0], spacing, len(xs))
        pre.attach_grid(xs[0], spacing, len(xs), gv)
        xpts = _find_zeros(pre, pts, gv, X.shape, "A", outer)
        opts = _find_zeros(pre, pts, gv, X.shape, "B", outer)
        counts = {"A": sum(1 for z in xpts if abs(z) < R), "B": sum(1 for z in opts if abs(z) < R)}
        if counts == wind:
            break
        spacing /= 2
    else:
        raise CellMapError(f"zeros found inside the window {counts}, winding numbers {wind}")
    k = len(order)
    # end directions lie between consecutive sector bisectors
    ends = [geo.ray_angles[j] + ((geo.ray_angles[(j + 1) % q] - geo.ray_angles[j]) % (2 * math.pi)) / 2
            for j in range(q)]
    labels = tuple(labels_s[(j + 1) % q] for j in range(q))

    def end_of(z: complex):
        th = cmath.phase(z)
        d = [abs(cmath.phase(cmath.exp(1j * (th - e)))) for e in ends]
        j = int(np.argmin(d))
        if d[j] > 0.45:
            raise CellMapError(f"vertex at {z} outside the window is not on a ray")
        return ("end", j)

    def snap(z: complex, pts_: list[complex], which: str):
        zz = pre.zero(z, which)
        if zz is None:
            raise CellMapError("edge end point does not converge")
        for i, w in enumerate(pts_):
            if abs(zz - w) < 1e-6:
                return i, zz
        return None, zz

    nodes: dict = {}
    edges = set()
    for i, z in enumerate(xpts):
        if abs(z) >= R:
            continue
        items = []
        for j in range(k):
            zend = pre.trace(z, angles[j], True)
            oi, zz = snap(zend, opts, "B")
            if oi is not None and abs(opts[oi]) < R:
                items.append(("o", oi))
                edges.add((i, oi, j))
            else:
                items.append(end_of(zz))
        nodes[("x", i)] = items
    for i, z in enumerate(opts):
        if abs(z) >= R:
            continue
        A, dA, B, dB = pre.g(z)
        res = A / dB
        items = []
        for j in reversed(range(k)):
            zend = pre.trace(z, angles[j], False, res)
            xi, zz = snap(zend, xpts, "A")
            if xi is not None and abs(xpts[xi]) < R:
                items.append(("x", xi))
                if (xi, i, j) not in edges:
                    raise CellMapError(f"forward and backward edge traces disagree: x{xi}@{xpts[xi]} o{i}@{z} edge {j}; fwd {sorted(e for e in edges if e[1] == i)}")
            else:
                items.append(end_of(zz))
        nodes[("o", i)] = items
    for n, items in nodes.items():
        nodes[n] = _dedupe(items)
    _prune_rays(nodes, q)
    tree, _ = _to_tree(nodes, q, labels)
    return CellMap(family, complex(alpha), complex(lam), labels, xpts, opts, tree, R)


def _default_window(family: ProblemFamily, alpha: complex, lam: complex) -> float:
    d = potential(family, alpha).degree
    return 1.6 + 1.2 * max(abs(lam), abs(alpha) ** 2, 1.0) ** (1 / d)


def tree_code(family: ProblemFamily, alpha: complex, lam: complex, windows=(None,)) -> str:
    """Canonical code of the tree attached to an eigenpair.

    The eigenpair is first carried to the standard configuration along the
    lifted straight path; the code must not depend on the window radius.
    """
    a, l = lift_to_standard(family, alpha, lam).end
    codes = {cell_map(family, a, l, w).code for w in windows}
    if len(codes) != 1:
        raise CellMapError(f"tree depends on the window: {sorted(codes)}")
    return codes.pop()


# -- loops in the configuration plane ------------------------------------------

# loops based at -1: a encircles 0 once ccw, ab encircles 0 and 1 once ccw
C_LOOPS = {
    "a": lambda t: -0.25 + 0.75 * cmath.exp(1j * math.pi * (1 + 2 * t)),
    "ab": lambda t: 0.5 + 1.5 * cmath.exp(1j * math.pi * (1 + 2 * t)),
}

# letter -> braid moves (applied left to right); read off from lifted loops
LETTER_MOVES = {
    "symmetric": {"a": ("s_0^-1",), "b": ("s_0", "s_inf")},
    "line": {"a": ("s_0^-1",), "b": ("s_0", "s_1")},
}


def c_path(family: ProblemFamily, path: AlphaPath, lam0: complex, max_dc: float = 0.2
           ) -> tuple[list[complex], list[complex]]:
    """c and lam along an alpha path, lam following its elementary branch.

    Each chord stays within ``max_dc`` times the distance to the punctures 0
    and 1, so the polyline has the homotopy class of the true path.
    """
    if not family.is_qes:
        raise CellMapError("configuration paths are followed on the elementary branch only")
    follow = _Follower(family)
    a, lam = path.point(0.0), complex(lam0)
    cs, lams = [configuration(family, a, lam).param], [lam]
    t, dt = 0.0, 1 / 400
    while t < 1.0:
        dt = min(dt, 1.0 - t)
        a1 = path.point(t + dt)
        l1 = follow(a1, lam)
        c1 = configuration(family, a1, l1).param if l1 is not None else None
        room = max_dc * min(abs(cs[-1]), abs(cs[-1] - 1))
        if c1 is None or abs(l1 - lam) > 0.05 * max(1.0, abs(lam)) or abs(c1 - cs[-1]) > room:
            dt /= 2
            if dt < 1e-10:
                raise CellMapError(f"configuration path stalled at alpha={a1}")
            continue
        t += dt
        lam = l1
        cs.append(c1)
        lams.append(l1)
        dt = min(dt * 1.5, 0.02)
    return cs, lams


def loop_word(points: Sequence[complex]) -> str:
    """Freely reduced word of a closed polyline in the c-plane; capitals are inverses."""
    out: list[str] = []
    for c0, c1 in zip(points, points[1:]):
        for letter, x in (("a", 0.0), ("b", 1.0)):
            if (c0.real - x) * (c1.real - x) < 0:
                s = (x - c0.real) / (c1.real - c0.real)
                if c0.imag + s * (c1.imag - c0.imag) < 0:
                    ch = letter if c1.real > c0.real else letter.upper()
                    if out and out[-1] == ch.swapcase():
                        out.pop()
                    else:
                        out.append(ch)
    return "".join(out)


def closed_word(family: ProblemFamily, path: AlphaPath, lam0: complex) -> tuple[str, complex]:
    """Word of the alpha path's c-image, closed by straight segments to -1."""
    cs, lams = c_path(family, path, lam0)
    seg = [complex(s) for s in np.linspace(0.0, 1.0, 400)]
    pts = [-1 + (cs[0] + 1) * s for s in seg] + cs + [cs[-1] + (-1 - cs[-1]) * s for s in seg]
    return loop_word(pts), lams[-1]


def _moves(family: ProblemFamily) -> dict:
    from .braids import generators, inverse_move

    free = base_cell(family).free
    out = {}
    for mv in generators(family):
        out[mv.name] = mv
        out[mv.name + "^-1"] = inverse_move(mv, free)
    return out


def apply_word(code: str, word: str, family: ProblemFamily) -> str:
    """Tree code after moving the values along the c-loop ``word``."""
    from .braids import apply_move
    from .trees import from_code

    table = LETTER_MOVES["symmetric" if family.centrally_symmetric else "line"]
    moves = _moves(family)
    tree = from_code(code)
    for ch in word:
        names = table[ch.lower()]
        if ch.isupper():
            names = tuple(n[:-3] if n.endswith("^-1") else n + "^-1" for n in reversed(names))
        for n in names:
            tree = apply_move(tree, moves[n], family)
    return canonical_code(tree)


def lift_loop(family: ProblemFamily, alpha: complex, lam: complex, word: str) -> Lift:
    """Lift the basic loop ``word`` ("a" or "ab", capitals reversed) from a standard eigenpair."""
    loop = C_LOOPS[word.lower()]
    path = loop if word.islower() else (lambda t: loop(1.0 - t))
    return lift_path(family, alpha, lam, path)


@dataclass
class PairingRow:
    index: int
    lam: complex
    tree: str
    word: str
    end_index: int
    predicted: str
    observed: str

    @property
    def ok(self) -> bool:
        return self.predicted == self.observed


def anchor_pairing(family: ProblemFamily, loop: AlphaPath) -> list[PairingRow]:
    """Elementary eigenvalues at the loop's base point, their trees, and the tree
    predicted by the loop's word against the tree of the eigenvalue it reaches."""
    from .qes import elementary_eigenvalues

    base = loop.point(0.0)
    lams = elementary_eigenvalues(family, base)
    trees = [tree_code(family, base, l) for l in lams]
    rows = []
    for i, lam in enumerate(lams):
        word, end = closed_word(family, loop, lam)
        j = min(range(len(lams)), key=lambda k: abs(lams[k] - end))
        rows.append(PairingRow(i, lam, trees[i], word, j, apply_word(trees[i], word, family), trees[j]))
    return rows

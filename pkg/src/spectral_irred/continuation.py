"""Analytic continuation of eigenvalues in alpha, branch points, monodromy."""
from __future__ import annotations

import cmath
import json
import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import mpmath
import numpy as np

from . import qes as qes_mod
from .problems import Kind, ProblemFamily, potential
from .shooting import (
    ContourError,
    contour_log,
    default_r_start,
    determinant,
    eigenvalues_in_disk,
    parity_factors,
    power_sums,
)

log = logging.getLogger(__name__)


class ProximityError(RuntimeError):
    """Step size underflow, usually close to a branch point."""

    def __init__(self, msg: str, last_alpha: complex, last_lambda: complex):
        super().__init__(msg)
        self.last_alpha = last_alpha
        self.last_lambda = last_lambda


class ResolutionError(RuntimeError):
    """Tracked eigenvalues collide or cannot be matched back."""


# -- paths ------------------------------------------------------------------


@dataclass(frozen=True)
class AlphaPath:
    """Piecewise-linear path through ``waypoints``; closed paths end at the start."""

    waypoints: tuple[complex, ...]
    closed: bool = False

    @staticmethod
    def circle(center: complex, radius: float, start_angle: float = 0.0, n: int = 64,
               clockwise: bool = False) -> "AlphaPath":
        sgn = -1 if clockwise else 1
        pts = tuple(center + radius * cmath.exp(1j * (start_angle + sgn * 2 * math.pi * k / n)) for k in range(n))
        return AlphaPath(pts, closed=True)

    @staticmethod
    def keyhole(base: complex, center: complex, radius: float, n: int = 64) -> "AlphaPath":
        """Out to the circle around ``center``, once around it ccw, and back to ``base``."""
        d = center - base
        start = center - radius * d / abs(d)
        th = cmath.phase(start - center)
        ring = [center + radius * cmath.exp(1j * (th + 2 * math.pi * k / n)) for k in range(n + 1)]
        return AlphaPath((complex(base), *ring), closed=True)

    @staticmethod
    def from_json(text: str) -> "AlphaPath":
        data = json.loads(text)
        if isinstance(data, dict):
            pts, closed = data["waypoints"], bool(data.get("closed", False))
        else:
            pts, closed = data, False
        return AlphaPath(tuple(complex(p[0], p[1]) if isinstance(p, list) else complex(p) for p in pts), closed)

    @property
    def vertices(self) -> tuple[complex, ...]:
        return self.waypoints + (self.waypoints[0],) if self.closed else self.waypoints

    @property
    def length(self) -> float:
        v = self.vertices
        return sum(abs(v[i + 1] - v[i]) for i in range(len(v) - 1))

    def point(self, s: float) -> complex:
        """Point at arclength fraction ``s`` in [0, 1]."""
        v = self.vertices
        target = s * self.length
        for i in range(len(v) - 1):
            seg = abs(v[i + 1] - v[i])
            if target <= seg or i == len(v) - 2:
                t = 0.0 if seg == 0 else min(target / seg, 1.0)
                return v[i] + t * (v[i + 1] - v[i])
            target -= seg
        return v[-1]

    def then(self, other: "AlphaPath") -> "AlphaPath":
        a = list(self.vertices)
        b = list(other.vertices)
        if abs(a[-1] - b[0]) > 1e-12:
            raise ValueError("paths do not connect")
        pts = a + b[1:]
        closed = abs(pts[-1] - pts[0]) < 1e-12
        if closed:
            pts = pts[:-1]
        return AlphaPath(tuple(pts), closed)


# -- eigenvalue functions with a frozen normalization --------------------------


class SpectralFunction:
    """F(alpha, lam) with a fixed seed radius, so it is analytic in both.

    ``kind`` is "full" (Wronskian), "even"/"odd" (parity factors of the
    even potentials) or "qes" (the exact QES polynomial).
    """

    def __init__(self, family: ProblemFamily, kind: str = "full", alpha_bound: float = 4.0,
                 lam_bound: float = 20.0):
        self.family, self.kind = family, kind
        if kind == "qes":
            self.r_start = 0.0
            return
        if kind in ("even", "odd") and family.kind not in (Kind.EVEN_QUARTIC, Kind.QES_SEXTIC):
            raise ValueError("parity factors need an even potential")
        # largest potential over the alpha range fixes the radius
        pot = potential(family, complex(alpha_bound, alpha_bound) / math.sqrt(2))
        pot2 = potential(family, alpha_bound)
        self.r_start = max(default_r_start(pot, lam_bound), default_r_start(pot2, lam_bound))

    def __call__(self, alpha: complex, lam: complex) -> tuple[complex, float]:
        if self.kind == "qes":
            return qes_mod.qes_polynomial(self.family, alpha)(lam), 0.0
        if self.kind == "full":
            d = determinant(self.family, alpha, lam, r_start=self.r_start)
            return d.F, d.log_scale
        # parity factors: the S_0 solution at z = 0
        from .shooting import integrate_ray, sector_geometry

        geo = sector_geometry(self.family)
        s = integrate_ray(potential(self.family, alpha), lam, geo.boundary_sectors[0], self.r_start, 1e-16, 0j,
                          geo.ray_angles)
        v = s.dy if self.kind == "even" else s.y
        return v, s.log_scale

    def newton(self, alpha: complex, lam0: complex, tol: float = 1e-12, max_iter: int = 8) -> tuple[complex, bool, int]:
        lam = complex(lam0)
        for it in range(1, max_iter + 1):
            F0, s0 = self(alpha, lam)
            h = 1e-6 * max(1.0, abs(lam))
            Fp, sp_ = self(alpha, lam + h)
            Fm, sm = self(alpha, lam - h)
            slope = (Fp * math.exp(sp_ - s0) - Fm * math.exp(sm - s0)) / (2 * h)
            if slope == 0 or not np.isfinite(slope):
                return lam, False, it
            step = F0 / slope
            lam -= step
            if abs(step) < tol * max(1.0, abs(lam)):
                return lam, True, it
        return lam, False, max_iter

    def roots_near(self, alpha: complex, center: complex, radius: float) -> list[complex]:
        if self.kind == "qes":
            r = qes_mod.elementary_eigenvalues(self.family, alpha)
            return [z for z in r if abs(z - center) < radius]
        if self.kind == "full":
            return eigenvalues_in_disk(self.family, alpha, center, radius)
        out = []
        for z in eigenvalues_in_disk(self.family, alpha, center, radius):
            w, ok, _ = self.newton(alpha, z)
            # a zero of the other parity factor is pulled to a neighbour, so keep fixed points only
            if ok and abs(w - z) < 1e-7 * max(1.0, abs(z)):
                out.append(z)
        return out


# -- tracking -----------------------------------------------------------------


@dataclass
class StepControl:
    initial: float = 0.02
    min_step: float = 1e-7
    max_step: float = 0.1
    max_newton: int = 8
    tol: float = 1e-12
    max_jump: float = 0.25  # corrector may move at most this fraction of the local spacing guess


def track(
    family: ProblemFamily,
    path: AlphaPath,
    lam0: complex,
    step_ctl: StepControl | None = None,
    func: SpectralFunction | None = None,
) -> list[tuple[complex, complex]]:
    """Follow the zero of F(alpha, .) starting at lam0 along ``path``.

    Secant predictor, Newton corrector (capped), step halving on failure.
    """
    ctl = step_ctl or StepControl()
    if func is None:
        func = SpectralFunction(family, "qes" if family.is_qes and _is_elementary(family, path.point(0), lam0)
                                else "full",
                                alpha_bound=max(abs(v) for v in path.vertices) + 1,
                                lam_bound=2 * abs(lam0) + 4)
    a0 = path.point(0.0)
    lam, ok, _ = func.newton(a0, lam0, ctl.tol, 20)
    if not ok or abs(lam - lam0) > 1e-4 * max(1, abs(lam0)):
        raise ResolutionError(f"lam0={lam0} is not an eigenvalue at alpha={a0}")
    out = [(a0, lam)]
    s, ds = 0.0, ctl.initial
    total = path.length
    prev_slope = 0j
    while s < 1.0 - 1e-15:
        ds = min(ds, 1.0 - s, ctl.max_step / max(total, 1e-300) if total > 0 else 1.0)
        a_new = path.point(s + ds)
        a_cur = out[-1][0]
        pred = out[-1][1] + prev_slope * (a_new - a_cur)
        lam_new, ok, its = func.newton(a_new, pred, ctl.tol, ctl.max_newton)
        jump = abs(lam_new - pred)
        scale = abs(prev_slope * (a_new - a_cur)) + 1e-3 * abs(a_new - a_cur) + 1e-12
        if ok and (jump <= max(10 * scale, 1e-9) or len(out) < 2):
            if a_new != a_cur:
                prev_slope = (lam_new - out[-1][1]) / (a_new - a_cur)
            out.append((a_new, lam_new))
            s += ds
            if its <= 3:
                ds *= 1.5
        else:
            ds /= 2
            if ds * max(total, 1.0) < ctl.min_step:
                raise ProximityError("step size underflow", out[-1][0], out[-1][1])
    return out


def _is_elementary(family: ProblemFamily, alpha: complex, lam: complex) -> bool:
    vals = qes_mod.elementary_eigenvalues(family, alpha)
    return any(abs(v - lam) < 1e-8 * max(1.0, abs(lam)) for v in vals)


def monodromy_permutation(
    family: ProblemFamily,
    loop: AlphaPath,
    eigen_set: Sequence[complex],
    step_ctl: StepControl | None = None,
    func: SpectralFunction | None = None,
    match_tol: float = 1e-6,
) -> list[int]:
    """perm[i] = j when eigen_set[i] arrives at eigen_set[j] after the loop."""
    if not loop.closed:
        raise ValueError("monodromy needs a closed loop")
    ends = []
    for lam in eigen_set:
        ends.append(track(family, loop, lam, step_ctl, func)[-1][1])
    perm = []
    for e in ends:
        d = [abs(e - l) for l in eigen_set]
        j = int(np.argmin(d))
        if d[j] > match_tol * max(1.0, abs(e)):
            raise ResolutionError(f"tracked value {e} matches no start value")
        perm.append(j)
    if sorted(perm) != list(range(len(eigen_set))):
        raise ResolutionError("tracked values collide")
    return perm


def cycles(perm: Sequence[int]) -> str:
    """One-line cycle notation, fixed points omitted; '()' for the identity."""
    seen, parts = set(), []
    for i in range(len(perm)):
        if i in seen or perm[i] == i:
            seen.add(i)
            continue
        c, j = [], i
        while j not in seen:
            seen.add(j)
            c.append(j)
            j = perm[j]
        parts.append("(" + " ".join(map(str, c)) + ")")
    return "".join(parts) or "()"


def compose_perms(first: Sequence[int], second: Sequence[int]) -> list[int]:
    """Apply ``first`` then ``second``."""
    return [second[first[i]] for i in range(len(first))]


# -- branch points ----------------------------------------------------------


@dataclass
class BranchPoint:
    alpha_star: complex
    lambda_star: complex
    permutation: list[int] = field(default_factory=list)
    residual_F: float = 0.0
    residual_dF: float = 0.0
    base_alpha: complex = 0j
    base_eigenvalues: list[complex] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "alpha": [self.alpha_star.real, self.alpha_star.imag],
            "lambda": [self.lambda_star.real, self.lambda_star.imag],
            "permutation": cycles(self.permutation),
            "residual_F": self.residual_F,
            "residual_dF": self.residual_dF,
        }


def _qes_branch_points(family: ProblemFamily, region) -> list[BranchPoint]:
    mpmath.mp.dps = 40
    P = qes_mod.charpoly(family)
    out = []
    for a in qes_mod.branch_alphas(family, digits=40):
        if region is not None and not _in_region(a, region):
            continue
        coeffs_sym = [c.subs(qes_mod.ALPHA, mpmath.mpc(a.real, a.imag)) for c in P.all_coeffs()]
        # refine alpha and lam with mpmath on (P, dP/dlam) = 0
        coeffs = [mpmath.mpc(complex(c)) for c in coeffs_sym]
        roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=200)
        i, j = min(((i, j) for i in range(len(roots)) for j in range(i + 1, len(roots))),
                   key=lambda t: abs(roots[t[0]] - roots[t[1]]))
        lam = (roots[i] + roots[j]) / 2
        al, lam = _refine_double(P, mpmath.mpc(a.real, a.imag), lam)
        res_F, res_dF = _poly_residuals(P, al, lam)
        out.append(BranchPoint(complex(al), complex(lam), residual_F=res_F, residual_dF=res_dF))
    return out


def _refine_double(P, a, lam):
    import sympy as sp

    A, L = qes_mod.ALPHA, qes_mod.LAM
    expr = P.as_expr()
    f = sp.lambdify((A, L), expr, "mpmath")
    fl = sp.lambdify((A, L), sp.diff(expr, L), "mpmath")
    try:
        sol = mpmath.findroot(lambda x, y: [f(x, y), fl(x, y)], (a, lam), tol=mpmath.mpf(10) ** -35, maxsteps=50)
        return sol[0], sol[1]
    except (ValueError, ZeroDivisionError):
        return a, lam


def _poly_residuals(P, a, lam) -> tuple[float, float]:
    import sympy as sp

    A, L = qes_mod.ALPHA, qes_mod.LAM
    expr = P.as_expr()
    f = sp.lambdify((A, L), expr, "mpmath")
    fl = sp.lambdify((A, L), sp.diff(expr, L), "mpmath")
    return float(abs(f(a, lam))), float(abs(fl(a, lam)))


def _in_region(a: complex, region) -> bool:
    (x0, x1), (y0, y1) = region
    return x0 <= a.real <= x1 and y0 <= a.imag <= y1


def loop_permutation_at(
    family: ProblemFamily,
    bp: BranchPoint,
    radius: float,
    func: SpectralFunction,
    lam_window: float | None = None,
) -> tuple[list[int], complex, list[complex]]:
    """Permutation of the eigenvalues near lambda* around a small circle."""
    base = bp.alpha_star + radius
    if func.kind == "qes":
        eig = qes_mod.elementary_eigenvalues(family, base)
    else:
        w = lam_window or 0.5
        eig = func.roots_near(base, bp.lambda_star, w)
        # the pair opens like a square root, so widen until both members show up
        while len(eig) < 2 and lam_window is None and w < 4.0:
            w *= 2
            eig = func.roots_near(base, bp.lambda_star, w)
    eig = sorted(eig, key=lambda z: (z.real, z.imag))
    loop = AlphaPath.circle(bp.alpha_star, radius, 0.0, 48)
    perm = monodromy_permutation(family, loop, eig, StepControl(initial=0.01, max_step=radius / 3), func)
    return perm, base, eig


def find_branch_points(
    family: ProblemFamily,
    region=None,
    grid: int = 12,
    tol: float = 1e-10,
    kind: str | None = None,
    lam_disk: tuple[complex, float] = (0j, 8.0),
    verify: bool = True,
) -> list[BranchPoint]:
    """Branch points of the eigenvalue curve in ``region`` ((x0, x1), (y0, y1)).

    QES families: exact discriminant roots of the QES polynomial, polished
    with mpmath.  Other families: seeds from close eigenvalue pairs on an
    alpha grid, refined by Newton on (F, dF/dlam) = 0.
    """
    if family.is_qes and kind in (None, "qes"):
        pts = _qes_branch_points(family, region)
        func = SpectralFunction(family, "qes")
    else:
        k = kind or "full"
        func = SpectralFunction(family, k, alpha_bound=_region_bound(region) + 1,
                                lam_bound=abs(lam_disk[0]) + lam_disk[1] + 2)
        pts = _general_branch_points(family, func, region, grid, tol, lam_disk)
    if verify:
        for bp in pts:
            others = [abs(bp.alpha_star - o.alpha_star) for o in pts if o is not bp]
            rad = min([0.3 * d for d in others] + [0.05])
            perm, base, eig = loop_permutation_at(family, bp, rad, func)
            bp.permutation, bp.base_alpha, bp.base_eigenvalues = perm, base, eig
    return pts


def _region_bound(region) -> float:
    if region is None:
        return 4.0
    (x0, x1), (y0, y1) = region
    return max(abs(x0), abs(x1)) + max(abs(y0), abs(y1))


def _pair_data(func: SpectralFunction, a: complex, center: complex, radius: float) -> tuple[complex, complex]:
    """(sum, squared difference) of the two zeros of F(a, .) inside the circle."""
    def fn(l):
        F, s = func(a, l)
        return cmath.log(F) + s if F != 0 else complex(-745.0, 0.0)

    th, pts, vals, dph, N = contour_log(fn, center, radius)
    if N != 2:
        raise ResolutionError(f"{N} zeros in the pair circle at alpha={a}")
    s = power_sums(th, pts, vals, dph, N, center, radius, 2)
    return 2 * center + s[1], 2 * s[2] - s[1] ** 2


def _pair_secant(func: SpectralFunction, a: complex, lam: complex, radius: float, tol: float,
                 max_iter: int = 40) -> tuple[complex, complex, bool]:
    """Zero of (lam1 - lam2)^2 in alpha by secant steps.

    The squared difference of a colliding pair is analytic with a simple
    zero at the branch point; sum and difference come from contour power
    sums, so no derivative of F is needed.
    """
    try:
        s0, d0 = _pair_data(func, a, lam, radius)
        a1 = a + 1e-3 * max(1.0, abs(a))
        s1, d1 = _pair_data(func, a1, s0 / 2, radius)
        for _ in range(max_iter):
            if d1 == d0:
                break
            a2 = a1 - d1 * (a1 - a) / (d1 - d0)
            if abs(a2 - a1) > 2 * radius + abs(a1 - a):
                return a2, s1 / 2, False
            a, s0, d0 = a1, s1, d1
            a1 = a2
            s1, d1 = _pair_data(func, a1, s0 / 2, radius)
            if abs(a1 - a) < tol * max(1.0, abs(a1)):
                return a1, s1 / 2, True
    except (ResolutionError, ContourError, ArithmeticError, ValueError):
        return a, lam, False
    return a1, s1 / 2, False


def _residuals(func: SpectralFunction, a: complex, lam: complex) -> tuple[float, float]:
    F0, s0 = func(a, lam)
    h = 1e-5 * max(1.0, abs(lam))
    Fp, sp_ = func(a, lam + h)
    Fm, sm = func(a, lam - h)
    # scale-free: compare to the size of F one step away
    ref = max(abs(Fp * math.exp(sp_ - s0)), abs(Fm * math.exp(sm - s0)), 1e-300)
    dF = abs(Fp * math.exp(sp_ - s0) - Fm * math.exp(sm - s0)) / (2 * h)
    return abs(F0) / ref * h * h, dF * h / ref * h


def _general_branch_points(family, func, region, grid, tol, lam_disk) -> list[BranchPoint]:
    (x0, x1), (y0, y1) = region
    xs = np.linspace(x0, x1, grid)
    ys = np.linspace(y0, y1, grid)
    c, r = lam_disk
    seeds = []
    for x in xs:
        for y in ys:
            a = complex(x, y)
            try:
                eig = func.roots_near(a, c, r)
            except RuntimeError as exc:
                log.info("seed scan skipped alpha=%s: %s", a, exc)
                continue
            eig = sorted(eig, key=lambda z: (z.real, z.imag))
            for i in range(len(eig)):
                for j in range(i + 1, len(eig)):
                    d = abs(eig[i] - eig[j])
                    mid = (eig[i] + eig[j]) / 2
                    gap = min([abs(e - mid) for k, e in enumerate(eig) if k not in (i, j)] + [r])
                    seeds.append((d, a, mid, gap))
    seeds.sort(key=lambda t: t[0])
    found: list[BranchPoint] = []
    for d, a, lam, gap in seeds[: max(4 * grid, 20)]:
        if gap < 0.6 * d:  # no circle holds the pair alone
            continue
        al, lm, ok = _pair_secant(func, a, lam, 0.5 * (d / 2 + gap), tol)
        if not ok or not _in_region(al, region):
            log.info("seed alpha=%s did not converge", a)
            continue
        if any(abs(al - b.alpha_star) < 1e-6 and abs(lm - b.lambda_star) < 1e-6 for b in found):
            continue
        rf, rd = _residuals(func, al, lm)
        found.append(BranchPoint(complex(al), complex(lm), residual_F=float(rf), residual_dF=float(rd)))
    return sorted(found, key=lambda b: (round(b.alpha_star.real, 8), b.alpha_star.imag))


# -- monodromy group on the elementary eigenvalues --------------------------------


@dataclass
class MonodromyGroup:
    """Keyhole-loop permutations around every branch point, at one base point.

    ``anchor`` is the real alpha where the eigenvalues are indexed; the loops
    start at ``base`` on the circle |alpha| = |anchor|, reached along that circle.
    """

    family: str
    anchor: complex
    base: complex
    eigenvalues: list[complex]
    branch_points: list[BranchPoint]
    generators: list[list[int]]

    def orbits(self) -> list[list[int]]:
        n = len(self.eigenvalues)
        parent = list(range(n))

        def find(i):
            while parent[i] != i:
                i = parent[i]
            return i

        for perm in self.generators:
            for i, j in enumerate(perm):
                parent[find(i)] = find(j)
        groups: dict[int, list[int]] = {}
        for i in range(n):
            groups.setdefault(find(i), []).append(i)
        return sorted(groups.values())

    @property
    def transitive(self) -> bool:
        return len(self.orbits()) <= 1

    @property
    def max_residual(self) -> float:
        return max([max(b.residual_F, b.residual_dF) for b in self.branch_points], default=0.0)


def _segment_clear(a: complex, b: complex, pts: Sequence[complex], margin: float) -> bool:
    d = b - a
    for p in pts:
        t = min(max(((p - a) * d.conjugate()).real / abs(d) ** 2, 0.0), 1.0)
        if abs(a + t * d - p) < margin:
            return False
    return True


def monodromy_group(family: ProblemFamily, anchor: complex | None = None) -> MonodromyGroup:
    """Monodromy of the elementary eigenvalues of a QES family.

    Every branch point of the exact discriminant gets a keyhole loop from a
    common base; the straight tails are chosen so that no tail passes near
    another branch point, which makes the loops generate the fundamental
    group of the punctured alpha plane.
    """
    if not family.is_qes:
        raise ValueError("monodromy_group needs a QES family")
    func = SpectralFunction(family, "qes")
    bps = _qes_branch_points(family, None)
    big = max([abs(b.alpha_star) for b in bps], default=0.0)
    if anchor is None:
        anchor = complex(math.floor(1.5 * big) + 2.0)
    R = abs(anchor)
    eig = sorted(qes_mod.elementary_eigenvalues(family, anchor), key=lambda z: (z.real, z.imag))
    if not bps:
        return MonodromyGroup(family.spec_string(), anchor, anchor, eig, [], [])
    star = [b.alpha_star for b in bps]
    sep = min([abs(x - y) for i, x in enumerate(star) for y in star[i + 1:]] + [1.0])
    radius = min(0.3 * sep, 0.05)
    # a base on the big circle from which every tail clears the other branch points
    for k in range(1, 400):
        base = R * cmath.exp(1j * 0.0123 * k)
        if all(_segment_clear(base, s, [o for o in star if o != s], 2 * radius) for s in star):
            break
    else:
        raise ResolutionError("no base point with clear tails")
    ctl = StepControl(initial=0.01, max_step=radius / 3)
    arc = AlphaPath(tuple(R * cmath.exp(1j * cmath.phase(base) * t / 32) for t in range(33)))
    at_base = [track(family, arc, lam, ctl, func)[-1][1] for lam in eig]
    gens = []
    for s in star:
        gens.append(monodromy_permutation(family, AlphaPath.keyhole(base, s, radius), at_base, ctl, func))
    log.info("%s: %d branch points, base %s", family.spec_string(), len(bps), base)
    return MonodromyGroup(family.spec_string(), anchor, base, eig, bps, gens)

"""Sextic to quartic rescaling.

With n = 4m + 2p + 3 the QES sextic

    -y''(z) + (z^6 + 2 alpha z^4 + (alpha^2 - n) z^2) y = lam y

becomes, under z = a^(1/4) x and b = a^(1/2) alpha,

    -y''(x) + (a^2 x^6 + 2ab x^4 + (b^2 - an) x^2) y = mu y,   mu = a^(1/2) lam.

(Substituting gives the eigenvalue factor directly: the m = 0 ground state
exp(-a x^4/4 - b x^2/2) has mu = b = a^(1/2) alpha while lam = alpha.)

Writing b = n^(1/3)(1 + s n^(-2/3)), a = n^(-1/3)(1 + t n^(-2/3)) turns the
potential into 2x^4 + (2s - t) x^2 plus terms that vanish as m grows, so
branch points are compared in the frame beta = 2(n^(-1/2) alpha - 1) n^(2/3).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .continuation import BranchPoint, find_branch_points
from .problems import Kind, ProblemFamily, PotentialPoly, bisector_angles
from .shooting import (
    ContourError,
    _roots_from_sums,
    contour_log,
    default_r_start,
    eigenvalues_in_disk,
    integrate_ray,
    power_sums,
)


class DegenerateScaleError(ValueError):
    """The scale parameter a vanishes."""


@dataclass(frozen=True)
class RescaleParams:
    m: int
    p: int
    a: complex
    alpha: complex | None = None
    lam: complex | None = None
    b: complex | None = None
    mu: complex | None = None
    s: complex | None = None
    t: complex | None = None

    @property
    def n(self) -> int:
        return 4 * self.m + 2 * self.p + 3

    @property
    def beta(self) -> complex | None:
        return None if self.s is None or self.t is None else 2 * self.s - self.t

    @staticmethod
    def from_expansion(m: int, p: int, s: complex, t: complex) -> "RescaleParams":
        """a and b from the expansion parameters; alpha = b / a^(1/2)."""
        n = 4 * m + 2 * p + 3
        a = n ** (-1 / 3) * (1 + t * n ** (-2 / 3))
        b = n ** (1 / 3) * (1 + s * n ** (-2 / 3))
        return RescaleParams(m, p, complex(a), alpha=complex(b / cmath.sqrt(a)), b=complex(b),
                             s=complex(s), t=complex(t))


def rescale_map(params: RescaleParams, direction: str = "forward") -> RescaleParams:
    """(alpha, lam) -> (b, mu) for ``forward``, (b, mu) -> (alpha, lam) for ``inverse``."""
    if params.a == 0:
        raise DegenerateScaleError("scale parameter a must be nonzero")
    r = cmath.sqrt(params.a)
    if direction == "forward":
        b = None if params.alpha is None else params.alpha * r
        mu = None if params.lam is None else params.lam * r
        return replace(params, b=b, mu=mu)
    if direction == "inverse":
        alpha = None if params.b is None else params.b / r
        lam = None if params.mu is None else params.mu / r
        return replace(params, alpha=alpha, lam=lam)
    raise ValueError(f"direction must be forward or inverse, got {direction!r}")


def beta_frame(m: int, p: int, alpha: complex) -> complex:
    """Leading term of beta; alpha = sqrt(n) gives exactly 0."""
    n = 4 * m + 2 * p + 3
    root = math.sqrt(n)
    return 2 * (complex(alpha) - root) / root * n ** (2 / 3)


def alpha_from_beta(m: int, p: int, beta: complex) -> complex:
    n = 4 * m + 2 * p + 3
    return math.sqrt(n) * (1 + complex(beta) * n ** (-2 / 3) / 2)


# -- eigenvalues of the rescaled potential ----------------------------------------------


def rescaled_potential(m: int, p: int, a: complex, b: complex) -> PotentialPoly:
    n = 4 * m + 2 * p + 3
    a, b = complex(a), complex(b)
    return PotentialPoly((0j, 0j, b * b - a * n, 0j, 2 * a * b, 0j, a * a), b)


def _boundary(pot: PotentialPoly) -> tuple[tuple[float, ...], int, int]:
    # the decaying sectors that contain the positive and negative real axis
    angles = bisector_angles(pot.coefficients[-1], pot.degree)
    dist = lambda th, target: abs(cmath.phase(cmath.exp(1j * (th - target))))
    right = min(range(len(angles)), key=lambda j: dist(angles[j], 0.0))
    left = min(range(len(angles)), key=lambda j: dist(angles[j], math.pi))
    spread = math.pi / len(angles)
    if dist(angles[right], 0.0) > spread / 2 or dist(angles[left], math.pi) > spread / 2:
        raise ValueError("the real axis is too close to a Stokes line for this scale")
    return angles, right, left


def rescaled_log_det(pot: PotentialPoly, mu: complex, r_start: float) -> complex:
    """log of the Wronskian of the two real-axis subdominant solutions at 0."""
    angles, right, left = _boundary(pot)
    ra = integrate_ray(pot, mu, right, r_start, 1e-16, 0j, angles)
    rb = integrate_ray(pot, mu, left, r_start, 1e-16, 0j, angles)
    F = rb.y * ra.dy - rb.dy * ra.y
    if F == 0:
        return complex(-745.0, 0.0)
    return cmath.log(F) + ra.log_scale + rb.log_scale


def rescaled_eigenvalues(m: int, p: int, a: complex, b: complex, radius: float,
                         tol: float = 1e-12) -> list[complex]:
    """Zeros of the rescaled determinant in |mu| < radius (argument principle + Newton)."""
    pot = rescaled_potential(m, p, a, b)
    r0 = default_r_start(pot, radius + 1.0)
    fn = lambda mu: rescaled_log_det(pot, mu, r0)
    for attempt in range(4):
        try:
            th, pts, vals, dph, N = contour_log(fn, 0j, radius)
            break
        except ContourError:
            radius *= 1.0 + 0.013 * (attempt + 1)
    else:
        raise ContourError("could not find a clean contour")
    if N == 0:
        return []
    s = power_sums(th, pts, vals, dph, N, 0j, radius, N)
    out = []
    for g in _roots_from_sums(s, N):
        mu = complex(g)
        for _ in range(40):
            h = 1e-7 * max(1.0, abs(mu))
            # Newton on F through ratios F(mu +- h) / F(mu), which stay finite
            # at any distance from the zero (log F differences do not)
            f0 = fn(mu)
            up, down = cmath.exp(fn(mu + h) - f0), cmath.exp(fn(mu - h) - f0)
            step = 2 * h / (up - down)
            mu -= step
            if abs(step) < tol * max(1.0, abs(mu)):
                break
        out.append(mu)
    return sorted(out, key=lambda z: (z.real, z.imag))


@dataclass
class TransportCheck:
    a: complex
    alpha: complex
    lam: list[complex]
    mu: list[complex]
    error: float          # max distance between a^(1/2) lam and the nearest mu
    inverse_error: float  # the same for lam / a^(1/2)

    def ok(self, tol: float) -> bool:
        return len(self.lam) == len(self.mu) and self.error < tol


def _set_distance(x: list[complex], y: list[complex]) -> float:
    if len(x) != len(y):
        return math.inf
    if not x:
        return 0.0
    return max(max(min(abs(u - v) for v in y) for u in x), max(min(abs(u - v) for u in x) for v in y))


def transport_check(m: int, p: int, a: complex, alpha: complex, radius: float = 6.0) -> TransportCheck:
    """Compare the sextic spectrum in |lam| < radius with the rescaled one in |mu| < |a|^(1/2) radius."""
    fam = ProblemFamily(Kind.QES_SEXTIC, m, p)
    lam = eigenvalues_in_disk(fam, alpha, 0j, radius)
    prm = rescale_map(RescaleParams(m, p, complex(a), alpha=complex(alpha)))
    mu = rescaled_eigenvalues(m, p, prm.a, prm.b, abs(prm.a) ** 0.5 * radius)
    r = cmath.sqrt(a)
    return TransportCheck(complex(a), complex(alpha), lam, mu,
                          _set_distance([r * l for l in lam], mu), _set_distance([l / r for l in lam], mu))


# -- branch points in the beta frame -------------------------------------------------------


@dataclass(frozen=True)
class FramePoint:
    m: int
    p: int
    alpha: complex
    lam: complex
    beta: complex

    def row(self) -> tuple:
        return (self.alpha.real, self.alpha.imag, self.lam.real, self.lam.imag,
                self.beta.real, self.beta.imag, self.m, self.p)


CSV_HEADER = ("alpha_re", "alpha_im", "lambda_re", "lambda_im", "beta_re", "beta_im", "m", "p")


def frame_points(m: int, p: int = 0, window: float = 16.0, verify: bool = False) -> list[FramePoint]:
    """Branch points of the QES sextic with |beta| <= window."""
    n = 4 * m + 2 * p + 3
    half = math.sqrt(n) * window * n ** (-2 / 3) / 2
    region = ((math.sqrt(n) - half, math.sqrt(n) + half), (-half, half))
    pts: list[BranchPoint] = find_branch_points(ProblemFamily(Kind.QES_SEXTIC, m, p), region, verify=verify)
    out = []
    for bp in pts:
        beta = beta_frame(m, p, bp.alpha_star)
        if abs(beta) <= window:
            out.append(FramePoint(m, p, bp.alpha_star, bp.lambda_star, beta))
    return sorted(out, key=lambda f: (f.beta.real, f.beta.imag))


def dispersion(sets: dict[int, list[complex]], window: float = math.inf) -> dict[int, float]:
    """Mean step of the branch points between consecutive levels.

    The points of the lowest level with |beta| <= window are followed level
    by level to their nearest neighbours, so the tracked set is fixed and
    points entering the window at higher m do not change the average.
    """
    levels = sorted(sets)
    chain = [z for z in sets[levels[0]] if abs(z) <= window]
    out = {}
    for lo, hi in zip(levels, levels[1:]):
        if not chain or not sets[hi]:
            out[lo] = math.inf
            continue
        nxt = np.array(sets[hi])
        idx = [int(np.argmin(np.abs(nxt - z))) for z in chain]
        out[lo] = float(np.mean([abs(nxt[k] - z) for k, z in zip(idx, chain)]))
        chain = [complex(nxt[k]) for k in idx]
    return out

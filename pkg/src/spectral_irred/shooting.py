"""Spectral determinants by shooting along complex rays.

The subdominant solution of ``y'' = (P(z) - lam) y`` in a Stokes sector is
seeded on the sector bisector at ``r_start`` with the first-order WKB
logarithmic derivative and integrated inward to the matching point with a
Taylor-series method.  Integrating inward is the stable direction: the
dominant admixture left by an imperfect seed decays relative to the wanted
solution.  The state vector ``(y, y')`` is rescaled to unit length after
every step and the logarithm of the accumulated factor is kept separately,
so nothing overflows; the scale factors are real and positive and do not
change arguments or zero sets.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .problems import Kind, PotentialPoly, ProblemFamily, potential, sector_geometry

TAYLOR_ORDER = 30


class AsymptoticSeedError(RuntimeError):
    """Result changes too much when the starting radius is doubled."""


class ScalingError(RuntimeError):
    """Integration produced non-finite numbers despite rescaling."""


class ContourError(RuntimeError):
    """Winding number on a contour could not be resolved."""


@dataclass(frozen=True)
class SolutionSample:
    z: complex
    y: complex
    dy: complex
    log_scale: float = 0.0


@dataclass(frozen=True)
class DeterminantValue:
    alpha: complex
    lam: complex
    F: complex
    log_scale: float

    @property
    def log_abs(self) -> float:
        """log |F| including the scale factor."""
        return math.log(abs(self.F)) + self.log_scale if self.F != 0 else -math.inf


@njit(cache=True)
def _shifted(c, z):
    # coefficients of P(z + u) in ascending powers of u (repeated synthetic division)
    n = c.shape[0]
    out = c.copy()
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            out[j] += z * out[j + 1]
    return out


@njit(cache=True)
def _integrate(c, lam, z0, z1, y, dy, order, eps, max_steps):
    """Taylor integration of y'' = (P - lam) y on the segment z0 -> z1."""
    deg = c.shape[0] - 1
    length = abs(z1 - z0)
    if length == 0.0:
        return y, dy, 0.0, 0
    d = (z1 - z0) / length
    log_scale = 0.0
    nrm = math.sqrt(abs(y) ** 2 + abs(dy) ** 2)
    y = y / nrm
    dy = dy / nrm
    log_scale += math.log(nrm)
    a = np.zeros(order + 1, dtype=np.complex128)
    t = 0.0
    steps = 0
    while t < length:
        if steps >= max_steps:
            return y, dy, log_scale, -1
        zc = z0 + t * d
        q = _shifted(c, zc)
        q[0] -= lam
        a[0] = y
        a[1] = dy
        for k in range(order - 1):
            s = 0.0 + 0.0j
            top = min(k, deg)
            for i in range(top + 1):
                s += q[i] * a[k - i]
            a[k + 2] = s / ((k + 1) * (k + 2))
        rho = 1e300
        for k in (order - 1, order):
            ak = abs(a[k])
            if ak > 0.0:
                r = (eps / ak) ** (1.0 / k)
                if r < rho:
                    rho = r
        h = min(rho, length - t)
        u = h * d
        yn = 0.0 + 0.0j
        dyn = 0.0 + 0.0j
        for k in range(order, 0, -1):
            yn = yn * u + a[k]
            dyn = dyn * u + k * a[k]
        yn = yn * u + a[0]
        # dyn currently holds sum k a_k u^(k-1) evaluated by Horner on k a_k
        nrm = math.sqrt(abs(yn) ** 2 + abs(dyn) ** 2)
        if not (nrm > 0.0 and nrm < 1e300):
            return yn, dyn, log_scale, -2
        y = yn / nrm
        dy = dyn / nrm
        log_scale += math.log(nrm)
        t += h
        steps += 1
    return y, dy, log_scale, steps


def default_r_start(pot: PotentialPoly, lam: complex, target: float = 40.0) -> float:
    """Radius where the WKB exponent of the leading term reaches ``target``.

    The lower-order coefficients and lam shift the turning points; the seed
    is placed that far beyond the largest of their natural radii.
    """
    c = pot.coefficients
    d = pot.degree
    lead = abs(c[d])
    e = (d + 2) / 2
    r_lead = (target * e / math.sqrt(lead)) ** (1 / e)
    radii = [abs(lam / lead) ** (1 / d)]
    for k in range(d):
        if c[k] != 0:
            radii.append(abs(c[k] / lead) ** (1 / (d - k)))
    return r_lead + 1.5 * max(radii)


def r_start_for(family: ProblemFamily, alpha: complex, lam_bound: float) -> float:
    """A starting radius valid for every |lam| <= lam_bound.

    Analytic work in lam (Newton, contour integrals, continuation) must keep
    the seed point fixed, otherwise the normalization is not analytic.
    """
    return default_r_start(potential(family, alpha), abs(lam_bound))


def _bucket(lam: complex) -> float:
    return 2.0 ** math.ceil(math.log2(max(abs(lam), 1.0)))


def _wkb_seed(pot: PotentialPoly, lam: complex, z0: complex, theta: float) -> tuple[complex, complex]:
    c = np.array(pot.coefficients, dtype=complex)
    Q = complex(np.polyval(c[::-1], z0)) - lam
    dQ = complex(np.polyval(np.polyder(c[::-1]), z0))
    s = cmath.sqrt(Q)
    if (s * cmath.exp(1j * theta)).real < 0:
        s = -s
    return 1.0 + 0j, -s - dQ / (4 * Q)


def integrate_ray(
    pot: PotentialPoly,
    lam: complex,
    sector: int,
    r_start: float | None = None,
    tol: float = 1e-16,
    match: complex = 0j,
    q_angles: tuple[float, ...] | None = None,
    max_steps: int = 200000,
) -> SolutionSample:
    """Subdominant solution of sector ``sector`` carried to ``match``.

    ``q_angles`` are the sector bisectors (from ``sector_geometry``); if not
    given they are computed from the leading coefficient.
    """
    from .problems import bisector_angles

    if q_angles is None:
        q_angles = bisector_angles(pot.coefficients[-1], pot.degree)
    theta = q_angles[sector]
    if r_start is None:
        r_start = default_r_start(pot, lam)
    z0 = r_start * cmath.exp(1j * theta)
    y, dy = _wkb_seed(pot, lam, z0, theta)
    c = np.array(pot.coefficients, dtype=np.complex128)
    y1, dy1, ls, status = _integrate(c, complex(lam), complex(z0), complex(match), complex(y), complex(dy),
                                     TAYLOR_ORDER, tol, max_steps)
    if status < 0 or not (np.isfinite(y1) and np.isfinite(dy1) and math.isfinite(ls)):
        raise ScalingError(f"integration failed (status {status}) at lam={lam}")
    return SolutionSample(complex(match), complex(y1), complex(dy1), float(ls))


def _sectors(family: ProblemFamily) -> tuple[tuple[float, ...], tuple[int, int]]:
    geo = sector_geometry(family)
    return geo.ray_angles, geo.boundary_sectors


def determinant(
    family: ProblemFamily,
    alpha: complex,
    lam: complex,
    tol: float = 1e-16,
    match: complex = 0j,
    r_start: float | None = None,
) -> DeterminantValue:
    """Wronskian of the two boundary-sector solutions at ``match``.

    Without an explicit ``r_start`` the seed radius depends on |lam| only
    through a power-of-two bucket.
    """
    pot = potential(family, alpha)
    if r_start is None:
        r_start = default_r_start(pot, _bucket(lam))
    angles, (s_right, s_left) = _sectors(family)
    a = integrate_ray(pot, lam, s_right, r_start, tol, match, angles)
    b = integrate_ray(pot, lam, s_left, r_start, tol, match, angles)
    F = b.y * a.dy - b.dy * a.y
    return DeterminantValue(complex(alpha), complex(lam), complex(F), a.log_scale + b.log_scale)


def parity_factors(family: ProblemFamily, alpha: complex, lam: complex, tol: float = 1e-16,
                   r_start: float | None = None) -> tuple[complex, complex]:
    """(F_even, F_odd) for even potentials: y'(0) and y(0) of the S_0 solution.

    With y_left(z) = y_right(-z) the Wronskian at 0 is 2 y(0) y'(0).
    """
    if family.kind not in (Kind.EVEN_QUARTIC, Kind.QES_SEXTIC):
        raise ValueError("parity factors need an even potential")
    pot = potential(family, alpha)
    angles, (s_right, _) = _sectors(family)
    a = integrate_ray(pot, lam, s_right, r_start, tol, 0j, angles)
    return a.dy, a.y


def newton_eigenvalue(
    family: ProblemFamily,
    alpha: complex,
    lam0: complex,
    tol: float = 1e-12,
    max_iter: int = 30,
    func=None,
    r_start: float | None = None,
) -> tuple[complex, float]:
    """Polish a zero of F(alpha, .) by Newton with a central-difference slope.

    Returns (lam, |F| normalized).  ``func(lam) -> (F, log_scale)`` may replace
    the full determinant (e.g. a parity factor).
    """
    if func is None:
        r = r_start if r_start is not None else r_start_for(family, alpha, 2 * abs(lam0) + 2)

        def func(l):
            d = determinant(family, alpha, l, r_start=r)
            return d.F, d.log_scale
    lam = complex(lam0)
    for _ in range(max_iter):
        F0, s0 = func(lam)
        h = 1e-6 * max(1.0, abs(lam))
        Fp, sp_ = func(lam + h)
        Fm, sm = func(lam - h)
        slope = (Fp * math.exp(sp_ - s0) - Fm * math.exp(sm - s0)) / (2 * h)
        if slope == 0:
            break
        step = F0 / slope
        lam -= step
        if abs(step) < tol * max(1.0, abs(lam)):
            break
    F0, _ = func(lam)
    return lam, abs(F0)


def _log_det(family, alpha, lam, r_start):
    d = determinant(family, alpha, lam, r_start=r_start)
    if d.F == 0:
        return complex(-745.0, 0.0)
    return cmath.log(d.F) + d.log_scale


def _sample_circle(fn, center, radius, n):
    th = 2 * np.pi * np.arange(n) / n
    pts = center + radius * np.exp(1j * th)
    vals = np.array([fn(p) for p in pts])
    return th, pts, vals


def contour_log(fn, center: complex, radius: float, n0: int = 128, n_max: int = 4096):
    """Samples of log F on the circle, doubled until phase steps are small."""
    n = n0
    while True:
        th, pts, vals = _sample_circle(fn, center, radius, n)
        dph = np.angle(np.exp(1j * np.diff(np.append(vals.imag, vals.imag[0]))))
        if np.max(np.abs(dph)) < 0.5 or n >= n_max:
            break
        n *= 2
    if np.max(np.abs(dph)) >= 0.5:
        raise ContourError("phase of F varies too fast on the contour")
    winding = int(round(np.sum(dph) / (2 * np.pi)))
    if abs(np.sum(dph) / (2 * np.pi) - winding) > 1e-3:
        raise ContourError("winding number is not an integer")
    return th, pts, vals, dph, winding


def power_sums(th, pts, vals, dph, winding, center, radius, pmax):
    """s_p = sum of (lam - center)^p over the zeros inside, p = 0..pmax.

    log F - i N theta is periodic; its derivative is taken spectrally.
    """
    n = len(th)
    phase = np.concatenate([[0.0], np.cumsum(dph[:-1])]) + vals.imag[0]
    g = vals.real + 1j * (phase - winding * th)
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    dg = np.fft.ifft(1j * k * np.fft.fft(g))
    w = radius * np.exp(1j * th)
    dlog = dg + 1j * winding  # d log F / d theta
    out = []
    for p in range(pmax + 1):
        out.append(np.mean(w**p * dlog) / 1j)
    return np.array(out)


def _roots_from_sums(s: np.ndarray, n: int) -> np.ndarray:
    # Newton identities: e_k from power sums
    e = [1.0 + 0j]
    for k in range(1, n + 1):
        acc = 0j
        for i in range(1, k + 1):
            acc += (-1) ** (i - 1) * e[k - i] * s[i]
        e.append(acc / k)
    coeffs = [(-1) ** k * e[k] for k in range(n + 1)]
    return np.roots(coeffs)


def eigenvalues_in_disk(
    family: ProblemFamily,
    alpha: complex,
    center: complex,
    radius: float,
    tol: float = 1e-10,
    max_cluster: int = 5,
) -> list[complex]:
    """All zeros of F(alpha, .) in the disk, polished by Newton.

    The count comes from the argument principle; approximate locations come
    from contour power sums.  Disks with too many zeros are split.
    """
    r = r_start_for(family, alpha, abs(center) + 2 * radius + 1)
    fn = lambda l: _log_det(family, alpha, l, r)
    for attempt in range(4):
        try:
            th, pts, vals, dph, N = contour_log(fn, center, radius)
            if np.min(vals.real) < -30:
                raise ContourError("F nearly vanishes on the contour")
            break
        except ContourError:
            radius *= 1.0 + 0.013 * (attempt + 1)
    else:
        raise ContourError("could not find a clean contour")
    if N < 0:
        raise ContourError("negative winding number")
    if N == 0:
        return []
    if N > max_cluster:
        return _split(family, alpha, center, radius, N, tol, max_cluster)
    s = power_sums(th, pts, vals, dph, N, center, radius, N)
    guesses = _roots_from_sums(s, N) + center
    roots: list[complex] = []
    for g in guesses:
        lam, _ = newton_eigenvalue(family, alpha, g, tol=tol, r_start=r)
        roots.append(lam)
    roots = _dedupe(roots, 1e-7)
    if len(roots) != N or any(abs(r - center) > radius * (1 + 1e-9) for r in roots):
        # fall back to splitting (e.g. two guesses converged to one zero)
        if radius > 1e-3:
            return _split(family, alpha, center, radius, N, tol, max_cluster)
        raise ContourError("argument-principle count and polished roots disagree")
    return sorted(roots, key=lambda z: (z.real, z.imag))


def _dedupe(vals, eps):
    out: list[complex] = []
    for v in vals:
        if all(abs(v - w) > eps * max(1.0, abs(v)) for w in out):
            out.append(v)
    return out


def _split(family, alpha, center, radius, N, tol, max_cluster):
    found: list[complex] = []
    r2 = radius * 0.6
    for c in [center] + [center + 0.55 * radius * cmath.exp(2j * math.pi * k / 6) for k in range(6)]:
        for lam in eigenvalues_in_disk(family, alpha, c, r2, tol, max_cluster):
            if abs(lam - center) < radius:
                found.append(lam)
    found = _dedupe(found, 1e-7)
    if len(found) != N:
        raise ContourError(f"split search found {len(found)} zeros, expected {N}")
    return sorted(found, key=lambda z: (z.real, z.imag))


def winding_count(family: ProblemFamily, alpha: complex, center: complex, radius: float) -> int:
    r = r_start_for(family, alpha, abs(center) + 2 * radius + 1)
    fn = lambda l: _log_det(family, alpha, l, r)
    return contour_log(fn, center, radius)[4]


def det_scan(family: ProblemFamily, alphas, lams, tol: float = 1e-16) -> list[tuple]:
    """Rows (alpha_re, alpha_im, lambda_re, lambda_im, F_re, F_im, log_scale)."""
    rows = []
    for a in alphas:
        for l in lams:
            d = determinant(family, a, l, tol)
            rows.append((a.real, a.imag, l.real, l.imag, d.F.real, d.F.imag, d.log_scale))
    return rows

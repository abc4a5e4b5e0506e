"""The four one-parameter eigenvalue families.

Each family is the boundary problem ``-y'' + P(alpha, z) y = lambda y`` with
decay imposed in two Stokes sectors.  Everything downstream (trees, braid
moves, shooting) reads its geometry from here.
"""
from __future__ import annotations

import cmath
import enum
import math
import re
from dataclasses import dataclass, field

__all__ = [
    "Kind",
    "ProblemFamily",
    "PotentialPoly",
    "SectorGeometry",
    "QesSpec",
    "ParameterError",
    "UnsupportedError",
    "parse_family",
    "potential",
    "sector_geometry",
    "asymptotic_pattern",
    "qes_spec",
    "LABELS",
    "label_value",
    "negate_label",
]


class ParameterError(ValueError):
    """Invalid (m, p) for a family kind, or an unparseable family string."""


class UnsupportedError(ValueError):
    """Operation not defined for this family kind."""


class Kind(enum.Enum):
    EVEN_QUARTIC = "even-quartic"
    QES_SEXTIC = "qes-sextic"
    PT_CUBIC = "pt-cubic"
    QES_QUARTIC = "qes-quartic"


# Asymptotic-value alphabet.  "inf" is the point at infinity.
LABELS = ("0", "1", "-1", "i", "-i", "inf")

_LABEL_VALUES = {"0": 0j, "1": 1 + 0j, "-1": -1 + 0j, "i": 1j, "-i": -1j}
_NEG = {"0": "0", "1": "-1", "-1": "1", "i": "-i", "-i": "i", "inf": "inf"}


def label_value(label: str) -> complex:
    if label == "inf":
        return complex("inf")
    return _LABEL_VALUES[label]


def negate_label(label: str) -> str:
    return _NEG[label]


@dataclass(frozen=True)
class ProblemFamily:
    kind: Kind
    m: int | None = None
    p: int | None = None

    def __post_init__(self):
        k = self.kind
        if k is Kind.QES_SEXTIC:
            if self.m is None or self.p is None:
                raise ParameterError("qes-sextic needs m and p")
            if self.m < 0 or self.p not in (0, 1):
                raise ParameterError(f"qes-sextic needs m >= 0 and p in {{0,1}}, got m={self.m}, p={self.p}")
        elif k is Kind.QES_QUARTIC:
            if self.m is None or self.p is not None:
                raise ParameterError("qes-quartic takes m only")
            if self.m < 1:
                raise ParameterError(f"qes-quartic needs m >= 1, got m={self.m}")
        elif self.m is not None or self.p is not None:
            raise ParameterError(f"{k.value} takes no (m, p)")

    @property
    def n(self) -> int:
        """4m + 2p + 3, the sextic's integer parameter."""
        if self.kind is not Kind.QES_SEXTIC:
            raise UnsupportedError("n is defined for qes-sextic only")
        return 4 * self.m + 2 * self.p + 3

    @property
    def is_qes(self) -> bool:
        return self.kind in (Kind.QES_SEXTIC, Kind.QES_QUARTIC)

    @property
    def centrally_symmetric(self) -> bool:
        return self.kind in (Kind.EVEN_QUARTIC, Kind.QES_SEXTIC)

    @property
    def degree(self) -> int:
        return {Kind.EVEN_QUARTIC: 4, Kind.QES_SEXTIC: 6, Kind.PT_CUBIC: 3, Kind.QES_QUARTIC: 4}[self.kind]

    @property
    def q(self) -> int:
        return self.degree + 2

    def spec_string(self) -> str:
        if self.kind is Kind.QES_SEXTIC:
            return f"qes-sextic:m={self.m},p={self.p}"
        if self.kind is Kind.QES_QUARTIC:
            return f"qes-quartic:m={self.m}"
        return self.kind.value

    def __str__(self) -> str:
        return self.spec_string()


_SPEC_RE = re.compile(r"^(even-quartic|pt-cubic|qes-sextic|qes-quartic)(?::(.*))?$")


def parse_family(text: str) -> ProblemFamily:
    """Parse ``even-quartic | pt-cubic | qes-sextic:m=M,p=P | qes-quartic:m=M``."""
    mt = _SPEC_RE.match(text.strip())
    if not mt:
        raise ParameterError(f"unknown family spec {text!r}")
    kind = Kind(mt.group(1))
    params: dict[str, int] = {}
    if mt.group(2):
        for part in mt.group(2).split(","):
            key, sep, val = part.partition("=")
            if not sep or key.strip() not in ("m", "p"):
                raise ParameterError(f"bad parameter {part!r} in {text!r}")
            try:
                params[key.strip()] = int(val)
            except ValueError as exc:
                raise ParameterError(f"bad integer in {part!r}") from exc
    return ProblemFamily(kind, params.get("m"), params.get("p"))


@dataclass(frozen=True)
class PotentialPoly:
    """P(alpha, z) as dense ascending coefficients."""

    coefficients: tuple[complex, ...]
    alpha: complex

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, z):
        acc = 0j
        for c in reversed(self.coefficients):
            acc = acc * z + c
        return acc


def potential(family: ProblemFamily, alpha: complex) -> PotentialPoly:
    a = complex(alpha)
    k = family.kind
    if k is Kind.EVEN_QUARTIC:
        c = (0, 0, a, 0, 1)
    elif k is Kind.QES_SEXTIC:
        c = (0, 0, a * a - family.n, 0, 2 * a, 0, 1)
    elif k is Kind.PT_CUBIC:
        c = (0, 1j * a, 0, 1j)
    else:
        c = (0, -2j * family.m, -2 * a, 0, -1)
    return PotentialPoly(tuple(complex(x) for x in c), a)


@dataclass(frozen=True)
class SectorGeometry:
    q: int
    ray_angles: tuple[float, ...]
    boundary_sectors: tuple[int, int]

    def angle(self, j: int) -> float:
        return self.ray_angles[j % self.q]


def bisector_angles(leading: complex, degree: int) -> tuple[float, ...]:
    # directions where sqrt(leading) * z^((d+2)/2) is real: fastest decay/growth
    q = degree + 2
    phi = cmath.phase(leading)
    return tuple((2 * math.pi * j - phi) / q for j in range(q))


_BOUNDARY = {
    Kind.EVEN_QUARTIC: (0, 3),
    Kind.QES_SEXTIC: (0, 4),
    Kind.PT_CUBIC: (0, 3),
    Kind.QES_QUARTIC: (0, 4),
}


def sector_geometry(family: ProblemFamily) -> SectorGeometry:
    pot = potential(family, 0)
    angles = bisector_angles(pot.coefficients[-1], pot.degree)
    return SectorGeometry(len(angles), angles, _BOUNDARY[family.kind])


_PATTERNS = {
    Kind.EVEN_QUARTIC: ("0", "i", "1", "0", "-i", "-1"),
    Kind.QES_SEXTIC: ("0", "i", "0", "1", "0", "-i", "0", "-1"),
    Kind.PT_CUBIC: ("0", "1", "-1", "0", "inf"),
    Kind.QES_QUARTIC: ("0", "-1", "0", "1", "0", "inf"),
}


def asymptotic_pattern(family: ProblemFamily) -> tuple[str, ...]:
    """Normalized asymptotic values, one per Stokes sector S_0..S_{q-1} (ccw)."""
    return _PATTERNS[family.kind]


@dataclass(frozen=True)
class QesSpec:
    family: ProblemFamily
    weight_exponent: str
    poly_degree: int
    count: int


def qes_spec(family: ProblemFamily) -> QesSpec:
    if family.kind is Kind.QES_SEXTIC:
        return QesSpec(family, "-z**4/4 - alpha*z**2/2", 2 * family.m + family.p, family.m + 1)
    if family.kind is Kind.QES_QUARTIC:
        return QesSpec(family, "-I*z**3/3 - I*alpha*z", family.m - 1, family.m)
    raise UnsupportedError(f"{family} is not quasi-exactly solvable")

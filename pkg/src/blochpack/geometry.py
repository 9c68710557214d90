"""Hyperbolic geometry on the unit disk and the upper half-plane.

The disk carries the metric with density 2/(1-|z|^2), the half-plane the
metric with density 1/Im(zeta).  This module owns the radius family
r_k = tanh(L*k/2), the annuli of hyperbolic width exactly L, the box grids
that tile them, shrunken boxes, Mobius automorphisms, and the logarithmic
coordinates z = exp(i*pi*zeta) that straighten boxes into rectangles.

Radial positions are often tracked through tau = log(1/(1-r^2)), the
weighted area of the centered disk of radius r; all tau values here are
computed from exponentially small quantities so that no precision is lost
for radii within double-precision distance of the unit circle.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DiskPoint",
    "MobiusMap",
    "Annulus",
    "AnnulusFamily",
    "DiskBox",
    "HalfPlaneBox",
    "HypGrid",
    "EmptyBoxError",
    "hyperbolic_distance",
    "hyperbolic_distance_halfplane",
    "annulus_radius",
    "annulus_radius_info",
    "annulus_weighted_area",
    "annulus_tau",
    "box_count",
    "box_at",
    "box_grid",
    "prototype_box",
    "shrink_box",
    "log_coordinates",
    "from_log_coordinates",
    "boundary_gap_from_log",
    "tau_of_radius",
    "radius_of_tau",
    "hyperbolic_grid",
    "random_mobius",
]

# exp(x) overflows double precision near x ~ 709; stay clear of it
OVERFLOW_EXPONENT = 700.0

_LOG4 = math.log(4.0)


class EmptyBoxError(ValueError):
    """Raised when a shrink factor would leave no box at all."""


# ---------------------------------------------------------------------------
# points and Mobius maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiskPoint:
    """A point of the open unit disk; construction enforces |value| < 1."""

    value: complex

    def __post_init__(self):
        if not abs(self.value) < 1.0:
            raise ValueError(f"point {self.value!r} is not inside the unit disk")

    def __complex__(self) -> complex:
        return complex(self.value)


def _as_complex(z):
    if isinstance(z, DiskPoint):
        return z.value
    return z


@dataclass(frozen=True)
class MobiusMap:
    """Disk automorphism xi -> phase * (xi - a) / (1 - conj(a) xi).

    ``a`` is the point sent to 0 (equivalently the image of 0 under the
    inverse map), ``phase`` a unimodular factor.  The special member with
    a = z, phase = -1 is the involution (z - xi)/(1 - conj(z) xi).
    """

    a: complex
    phase: complex = 1.0 + 0.0j

    def __post_init__(self):
        if not abs(self.a) < 1.0:
            raise ValueError("Mobius parameter a must lie in the open disk")
        p = complex(self.phase)
        if abs(abs(p) - 1.0) > 1e-12:
            raise ValueError("phase must be unimodular")
        # renormalize so that |phase| == 1 to machine precision
        object.__setattr__(self, "phase", p / abs(p))
        object.__setattr__(self, "a", complex(self.a))

    def __call__(self, xi):
        xi = _as_complex(xi)
        return self.phase * (xi - self.a) / (1.0 - np.conj(self.a) * xi)

    def deriv(self, xi):
        xi = _as_complex(xi)
        return self.phase * (1.0 - abs(self.a) ** 2) / (1.0 - np.conj(self.a) * xi) ** 2

    def inverse(self) -> "MobiusMap":
        # gamma^{-1}(0) = a requires a' = gamma(0) = -phase*a and the
        # conjugate phase; verified by the roundtrip property test.
        return MobiusMap(a=-self.phase * self.a, phase=np.conj(self.phase))

    @staticmethod
    def swap_with_zero(z) -> "MobiusMap":
        """The involution xi -> (z - xi)/(1 - conj(z) xi)."""
        return MobiusMap(a=_as_complex(z), phase=-1.0 + 0.0j)


def random_mobius(rng: np.random.Generator, max_a: float = 0.9) -> MobiusMap:
    rho = max_a * math.sqrt(rng.uniform())
    alpha = rng.uniform(0.0, 2.0 * math.pi)
    beta = rng.uniform(0.0, 2.0 * math.pi)
    return MobiusMap(a=rho * cmath.exp(1j * alpha), phase=cmath.exp(1j * beta))


# ---------------------------------------------------------------------------
# hyperbolic distances
# ---------------------------------------------------------------------------


def hyperbolic_distance(z, w):
    """Distance in the disk metric 2|dz|/(1-|z|^2).

    Accepts scalars or arrays.  Equals log((1+rho)/(1-rho)) with the
    pseudo-hyperbolic rho = |z-w|/|1 - conj(z) w|.
    """
    z = np.asarray(_as_complex(z), dtype=complex)
    w = np.asarray(_as_complex(w), dtype=complex)
    rho = np.abs(z - w) / np.abs(1.0 - np.conj(z) * w)
    out = np.log1p(rho) - np.log1p(-rho)
    if out.ndim == 0:
        return float(out)
    return out


def hyperbolic_distance_halfplane(z1, z2):
    """Distance in the half-plane metric |dz|/Im(z)."""
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    y1 = z1.imag
    y2 = z2.imag
    if np.any(y1 <= 0) or np.any(y2 <= 0):
        raise ValueError("half-plane points need positive imaginary part")
    c = 1.0 + (np.abs(z1 - z2) ** 2) / (2.0 * y1 * y2)
    out = np.arccosh(c)
    if out.ndim == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# radii, taus and annuli
# ---------------------------------------------------------------------------


def annulus_radius_info(L: float, k: int) -> tuple[float, bool]:
    """Radius r_k = (1 - e^{-Lk})/(1 + e^{-Lk}) and a clamped flag.

    The value is computed as 1 - 2/(e^{Lk} + 1), which stays fully
    accurate for large L*k; beyond the overflow range of exp the result
    is clamped to the largest double below 1 and flagged.
    """
    if L <= 0:
        raise ValueError("L must be positive")
    if k < 0:
        raise ValueError("k must be nonnegative")
    x = L * k
    if x > OVERFLOW_EXPONENT:
        return math.nextafter(1.0, 0.0), True
    r = 1.0 - 2.0 / (math.exp(x) + 1.0)
    if r >= 1.0:  # pragma: no cover - exp(700) still leaves headroom
        return math.nextafter(1.0, 0.0), True
    return r, False


def annulus_radius(L: float, k: int) -> float:
    return annulus_radius_info(L, k)[0]


def annulus_tau(L: float, k: int) -> float:
    """tau_k = log(1/(1 - r_k^2)), exact also when r_k rounds to 1.

    Uses 1 - r_k^2 = 4 q/(1+q)^2 with q = e^{-Lk}, so tau_k
    = L k - log 4 + 2 log(1+q).
    """
    if L <= 0:
        raise ValueError("L must be positive")
    if k < 0:
        raise ValueError("k must be nonnegative")
    x = L * k
    q = math.exp(-x)
    return x - _LOG4 + 2.0 * math.log1p(q)


def annulus_weighted_area(L: float, k: int) -> float:
    """Weighted area log((1 - r_{k-1}^2)/(1 - r_k^2)) of the k-th annulus."""
    if k < 1:
        raise ValueError("annuli are indexed from k = 1")
    return annulus_tau(L, k) - annulus_tau(L, k - 1)


def tau_of_radius(r: float) -> float:
    """tau = log(1/(1-r^2)) for a plain radius in [0, 1)."""
    if not 0.0 <= r < 1.0:
        raise ValueError("radius must lie in [0, 1)")
    return -math.log((1.0 - r) * (1.0 + r))


def radius_of_tau(tau: float) -> float:
    """Inverse of :func:`tau_of_radius`: r = sqrt(1 - e^{-tau})."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    return math.sqrt(-math.expm1(-tau))


@dataclass(frozen=True)
class Annulus:
    """The annulus r_lo < |z| <= r_hi together with its tau-range."""

    k: int
    r_lo: float
    r_hi: float
    tau_lo: float
    tau_hi: float

    model = "disk"
    theta_lo = 0.0
    theta_hi = 2.0 * math.pi

    @property
    def weighted_area(self) -> float:
        return self.tau_hi - self.tau_lo


@dataclass(frozen=True)
class AnnulusFamily:
    """Radii r_k = tanh(L k / 2) and the annuli between them."""

    L: float
    k_max: int

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError("L must be positive")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")

    def radius(self, k: int) -> float:
        return annulus_radius(self.L, k)

    def weighted_area(self, k: int) -> float:
        return annulus_weighted_area(self.L, k)

    def annulus(self, k: int) -> Annulus:
        if not 1 <= k <= self.k_max:
            raise ValueError(f"annulus index {k} outside 1..{self.k_max}")
        return Annulus(
            k=k,
            r_lo=self.radius(k - 1),
            r_hi=self.radius(k),
            tau_lo=annulus_tau(self.L, k - 1),
            tau_hi=annulus_tau(self.L, k),
        )

    def annuli(self) -> list[Annulus]:
        return [self.annulus(k) for k in range(1, self.k_max + 1)]


# ---------------------------------------------------------------------------
# boxes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiskBox:
    """Annular sector r_lo <= |z| <= r_hi, theta_lo <= arg z <= theta_hi."""

    k: int
    l: int
    r_lo: float
    r_hi: float
    theta_lo: float
    theta_hi: float
    tau_lo: float
    tau_hi: float

    model = "disk"

    @property
    def weighted_area(self) -> float:
        return (self.tau_hi - self.tau_lo) * (self.theta_hi - self.theta_lo) / (2.0 * math.pi)

    def to_halfplane_rect(self) -> "HalfPlaneBox":
        """Image under the log coordinates z = exp(i*pi*zeta).

        The sector becomes {theta_lo/pi < Re < theta_hi/pi,
        -log(r_hi)/pi < Im < -log(r_lo)/pi}.
        """
        if self.r_lo <= 0.0:
            raise ValueError("a sector touching the origin has no log-coordinate rectangle")
        return HalfPlaneBox(
            x_lo=self.theta_lo / math.pi,
            x_hi=self.theta_hi / math.pi,
            y_lo=-math.log(self.r_hi) / math.pi,
            y_hi=-math.log(self.r_lo) / math.pi,
        )


@dataclass(frozen=True)
class HalfPlaneBox:
    """Rectangle x_lo < Re zeta < x_hi, y_lo < Im zeta < y_hi in the half-plane."""

    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    model = "half-plane"

    def __post_init__(self):
        if self.y_lo <= 0 or self.y_hi < self.y_lo:
            raise ValueError("need 0 < y_lo <= y_hi")
        if self.x_hi < self.x_lo:
            raise ValueError("need x_lo <= x_hi")

    @property
    def size(self) -> float:
        return self.x_hi - self.x_lo

    @property
    def weighted_area(self) -> float:
        """Area with respect to dA(zeta)/Im(zeta), dA normalized by pi."""
        return (self.x_hi - self.x_lo) * math.log(self.y_hi / self.y_lo) / math.pi

    def center(self) -> complex:
        """Mass center in the hyperbolic sense: arithmetic in x, geometric in y."""
        return complex(0.5 * (self.x_lo + self.x_hi), math.sqrt(self.y_lo * self.y_hi))

    def to_disk_box(self, k: int = -1, l: int = -1) -> DiskBox:
        """Pull back through zeta -> exp(i*pi*zeta) to an annular sector."""
        r_lo = math.exp(-math.pi * self.y_hi)
        r_hi = math.exp(-math.pi * self.y_lo)
        # 1 - r^2 = -expm1(-2 pi y) keeps tau accurate next to the circle
        tau_lo = -math.log(-math.expm1(-2.0 * math.pi * self.y_hi))
        tau_hi = -math.log(-math.expm1(-2.0 * math.pi * self.y_lo))
        return DiskBox(
            k=k,
            l=l,
            r_lo=r_lo,
            r_hi=r_hi,
            theta_lo=self.x_lo * math.pi,
            theta_hi=self.x_hi * math.pi,
            tau_lo=tau_lo,
            tau_hi=tau_hi,
        )


def prototype_box(L: float) -> HalfPlaneBox:
    """The reference box {0 < Re < L, e^{-L} < Im < 1} of weighted area L^2/pi."""
    if L <= 0:
        raise ValueError("L must be positive")
    return HalfPlaneBox(x_lo=0.0, x_hi=L, y_lo=math.exp(-L), y_hi=1.0)


def box_count(L: float, k: int) -> int:
    """Number of boxes tiling the k-th annulus: ceil(2 pi e^{Lk} / L)."""
    if L < 1.0:
        raise ValueError("box grids need L >= 1")
    x = L * k
    if x > OVERFLOW_EXPONENT:
        raise OverflowError(
            "box count overflows at this depth; work with half-plane boxes instead"
        )
    return int(math.ceil(2.0 * math.pi * math.exp(x) / L))


def box_at(L: float, k: int, l: int, n_boxes: int | None = None) -> DiskBox:
    """The l-th box of the k-th annulus (angular slots counted from theta = 0)."""
    n = box_count(L, k) if n_boxes is None else int(n_boxes)
    if not 0 <= l < n:
        raise ValueError(f"slot {l} outside 0..{n - 1}")
    width = 2.0 * math.pi / n
    return DiskBox(
        k=k,
        l=l,
        r_lo=annulus_radius(L, k - 1),
        r_hi=annulus_radius(L, k),
        theta_lo=l * width,
        theta_hi=(l + 1) * width,
        tau_lo=annulus_tau(L, k - 1),
        tau_hi=annulus_tau(L, k),
    )


def box_grid(L: float, k: int, n_boxes: int | None = None, max_boxes: int = 1 << 20) -> list[DiskBox]:
    """All boxes tiling the k-th annulus.

    Refuses to materialize more than ``max_boxes`` boxes; at such depths
    use :func:`box_at` for individual slots or half-plane rectangles.
    """
    n = box_count(L, k) if n_boxes is None else int(n_boxes)
    if n > max_boxes:
        raise OverflowError(
            f"{n} boxes in annulus {k}; materializing them is pointless -- "
            "use box_at for single slots or the half-plane model"
        )
    return [box_at(L, k, l, n_boxes=n) for l in range(n)]


def shrink_box(box, eps: float):
    """Concentric trim leaving hyperbolic margin eps*L on every side.

    For the half-plane rectangle of size L the result is
    {eps L < Re < (1-eps) L, e^{-(1-eps)L} < Im < e^{-eps L}}; the x-range
    is trimmed linearly and the y-range geometrically, which is what keeps
    the hyperbolic distance to the complement at least eps*L.  eps = 1/2
    degenerates to the center point, anything beyond is rejected.
    """
    if eps < 0.0:
        raise ValueError("eps must be nonnegative")
    if eps > 0.5:
        raise EmptyBoxError(f"eps = {eps} leaves an empty box")
    if eps == 0.0:
        return box
    if isinstance(box, DiskBox):
        rect = box.to_halfplane_rect()
        shrunk = shrink_box(rect, eps)
        out = shrunk.to_disk_box(k=box.k, l=box.l)
        return out
    if not isinstance(box, HalfPlaneBox):
        raise TypeError(f"cannot shrink {type(box).__name__}")
    w = box.x_hi - box.x_lo
    ly1 = math.log(box.y_lo)
    ly2 = math.log(box.y_hi)
    return HalfPlaneBox(
        x_lo=box.x_lo + eps * w,
        x_hi=box.x_hi - eps * w,
        y_lo=math.exp((1.0 - eps) * ly1 + eps * ly2),
        y_hi=math.exp(eps * ly1 + (1.0 - eps) * ly2),
    )


# ---------------------------------------------------------------------------
# logarithmic coordinates
# ---------------------------------------------------------------------------


def log_coordinates(z):
    """zeta with z = exp(i*pi*zeta), Im zeta > 0 and Re zeta in (-1, 1]."""
    z = np.asarray(_as_complex(z), dtype=complex)
    if np.any(z == 0):
        raise ValueError("z = 0 has infinite imaginary part in log coordinates")
    zeta = np.angle(z) / math.pi + 1j * (-np.log(np.abs(z)) / math.pi)
    if zeta.ndim == 0:
        return complex(zeta)
    return zeta


def from_log_coordinates(zeta):
    zeta = np.asarray(zeta, dtype=complex)
    out = np.exp(1j * math.pi * zeta)
    if out.ndim == 0:
        return complex(out)
    return out


def boundary_gap_from_log(zeta):
    """1 - |z|^2 for z = exp(i*pi*zeta), computed without cancellation."""
    zeta = np.asarray(zeta, dtype=complex)
    out = -np.expm1(-2.0 * math.pi * zeta.imag)
    if out.ndim == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# sample grids
# ---------------------------------------------------------------------------


def hyperbolic_grid(n_points: int = 2000, max_radius: float = 6.0) -> np.ndarray:
    """Roughly equidistributed points of the disk in the hyperbolic metric.

    Concentric rings at hyperbolic radii j*h carry about
    2 pi sinh(j h)/h points each, with h chosen so that the total comes
    out near ``n_points``.  Ring angles start at 0, so the positive real
    axis is always sampled.  Returns a complex array (origin included).
    """
    if n_points < 8:
        raise ValueError("need at least 8 points")
    h = math.sqrt(2.0 * math.pi * (math.cosh(max_radius) - 1.0) / n_points)
    pts = [0.0 + 0.0j]
    j = 1
    while j * h <= max_radius:
        rho = j * h
        m = max(6, int(round(2.0 * math.pi * math.sinh(rho) / h)))
        r = math.tanh(rho / 2.0)
        ang = 2.0 * math.pi * np.arange(m) / m
        pts.append(r * np.exp(1j * ang))
        j += 1
    return np.concatenate([np.atleast_1d(np.asarray(p, dtype=complex)) for p in pts])


# ---------------------------------------------------------------------------
# grid description + JSON round trip
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HypGrid:
    """A whole grid family: step L, depth k_max, shrink factor eps."""

    L: float
    k_max: int
    eps: float

    def __post_init__(self):
        if not 0.0 <= self.eps <= 0.5:
            raise ValueError("eps must lie in [0, 1/2]")
        if self.L <= 0 or self.k_max < 1:
            raise ValueError("need L > 0 and k_max >= 1")

    @property
    def family(self) -> AnnulusFamily:
        return AnnulusFamily(self.L, self.k_max)

    def n_boxes(self, k: int) -> int:
        return box_count(self.L, k)

    def to_json(self) -> str:
        annuli = []
        for k in range(1, self.k_max + 1):
            annuli.append(
                {
                    "k": k,
                    "r_lo": annulus_radius(self.L, k - 1),
                    "r_hi": annulus_radius(self.L, k),
                    "n_boxes": self.n_boxes(k),
                }
            )
        return json.dumps(
            {"L": self.L, "k_max": self.k_max, "eps": self.eps, "annuli": annuli},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "HypGrid":
        data = json.loads(text)
        return cls(L=float(data["L"]), k_max=int(data["k_max"]), eps=float(data["eps"]))

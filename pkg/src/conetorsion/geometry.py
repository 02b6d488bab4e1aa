"""Planar convex cones, star-shaped sector domains and their boundary data.

A domain is the intersection of a cone (vertex at the origin, opening angle
``beta``) with a region bounded by the radial graph ``t -> r(t)``.  The curved
part of the boundary (the graph) is GAMMA0; the two straight legs on the cone
boundary are GAMMA1 (empty when ``beta = 2*pi``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

TWO_PI = 2.0 * math.pi
_FULL_PLANE_TOL = 1e-12


class DomainError(ValueError):
    """Invalid domain description (angle range, radius sign, loops...)."""


# ---------------------------------------------------------------------------
# radius functions
# ---------------------------------------------------------------------------

class RadiusFunction:
    """Positive radius profile r(t) of the radial graph, with derivatives."""

    def __call__(self, t):
        raise NotImplementedError

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        h = 1e-6
        return (self(t + h) - self(t - h)) / (2 * h)

    def deriv2(self, t):
        t = np.asarray(t, dtype=float)
        h = 1e-5
        return (self(t + h) - 2 * self(t) + self(t - h)) / h**2

    def describe(self) -> str:
        return self.__class__.__name__


class ConstantRadius(RadiusFunction):
    def __init__(self, value: float):
        self.value = float(value)

    def __call__(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.value)

    def deriv(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def deriv2(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def describe(self):
        return f"constant {self.value:g}"


class FourierRadius(RadiusFunction):
    """r(t) = a0 + sum_m a_m cos(m t)."""

    def __init__(self, a0: float, terms=()):
        self.a0 = float(a0)
        self.terms = [(int(m), float(a)) for m, a in terms]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        r = np.full_like(t, self.a0)
        for m, a in self.terms:
            r = r + a * np.cos(m * t)
        return r

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        d = np.zeros_like(t)
        for m, a in self.terms:
            d = d - a * m * np.sin(m * t)
        return d

    def deriv2(self, t):
        t = np.asarray(t, dtype=float)
        d = np.zeros_like(t)
        for m, a in self.terms:
            d = d - a * m * m * np.cos(m * t)
        return d

    def describe(self):
        parts = " ".join(f"{m},{a:g}" for m, a in self.terms)
        return f"fourier {self.a0:g} {parts}".strip()


class TableRadius(RadiusFunction):
    """Cubic-spline interpolation of (t, r) samples."""

    def __init__(self, ts, rs, periodic: bool = False):
        ts = np.asarray(ts, dtype=float)
        rs = np.asarray(rs, dtype=float)
        if ts.ndim != 1 or ts.size < 2 or ts.shape != rs.shape:
            raise DomainError("radius table needs matching 1-d t and r arrays")
        if np.any(np.diff(ts) <= 0):
            raise DomainError("radius table angles must be strictly increasing (no loops)")
        if periodic and abs(rs[0] - rs[-1]) > 1e-9 * max(1.0, abs(rs[0])):
            raise DomainError("periodic radius table must close: r(first) == r(last)")
        bc = "periodic" if periodic else "not-a-knot"
        if periodic:
            rs = rs.copy()
            rs[-1] = rs[0]
        self._spline = CubicSpline(ts, rs, bc_type=bc)
        self.ts, self.rs = ts, rs

    def __call__(self, t):
        return self._spline(np.asarray(t, dtype=float))

    def deriv(self, t):
        return self._spline(np.asarray(t, dtype=float), 1)

    def deriv2(self, t):
        return self._spline(np.asarray(t, dtype=float), 2)

    def describe(self):
        return f"table[{self.ts.size}]"


class ScaledRadius(RadiusFunction):
    """r(t) = base(t) * (1 + eps * cos(mode * t)); perturbation families."""

    def __init__(self, base: RadiusFunction, mode: int, eps: float):
        self.base, self.mode, self.eps = base, int(mode), float(eps)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.base(t) * (1.0 + self.eps * np.cos(self.mode * t))

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        f = 1.0 + self.eps * np.cos(self.mode * t)
        df = -self.eps * self.mode * np.sin(self.mode * t)
        return self.base.deriv(t) * f + self.base(t) * df

    def deriv2(self, t):
        t = np.asarray(t, dtype=float)
        f = 1.0 + self.eps * np.cos(self.mode * t)
        df = -self.eps * self.mode * np.sin(self.mode * t)
        d2f = -self.eps * self.mode**2 * np.cos(self.mode * t)
        return (self.base.deriv2(t) * f + 2 * self.base.deriv(t) * df
                + self.base(t) * d2f)

    def describe(self):
        return f"{self.base.describe()} *(1+{self.eps:g} cos {self.mode}t)"


class CallableRadius(RadiusFunction):
    def __init__(self, fn, dfn=None, d2fn=None, label="callable"):
        self._fn, self._dfn, self._d2fn = fn, dfn, d2fn
        self._label = label

    def __call__(self, t):
        return np.asarray(self._fn(np.asarray(t, dtype=float)), dtype=float)

    def deriv(self, t):
        if self._dfn is None:
            return super().deriv(t)
        return np.asarray(self._dfn(np.asarray(t, dtype=float)), dtype=float)

    def deriv2(self, t):
        if self._d2fn is None:
            return super().deriv2(t)
        return np.asarray(self._d2fn(np.asarray(t, dtype=float)), dtype=float)

    def describe(self):
        return self._label


def offset_disk_radius(a: float) -> RadiusFunction:
    """Radial graph of the unit circle centered at (a, 0), |a| < 1.

    The upper half (``beta = pi``) is the shifted half-disk
    B_1((a,0)) intersected with {y > 0}.
    """
    a = float(a)
    if not abs(a) < 1.0:
        raise DomainError("offset disk requires |a| < 1 so the origin is interior")

    def r(t):
        s = np.sqrt(1.0 - (a * np.sin(t)) ** 2)
        return a * np.cos(t) + s

    def dr(t):
        s = np.sqrt(1.0 - (a * np.sin(t)) ** 2)
        return -a * np.sin(t) - a * a * np.sin(t) * np.cos(t) / s

    return CallableRadius(r, dr, label=f"offset disk a={a:g}")


def parse_radius_spec(text: str, points=None) -> RadiusFunction:
    """Parse the radius-function config syntax.

    ``constant c`` | ``fourier a0 m,a_m [m,a_m ...]`` | ``table`` (with
    ``points`` = iterable of (t, r) pairs, cubic-spline interpolated).
    """
    words = text.strip().split()
    if not words:
        raise DomainError("empty radius spec")
    kind = words[0].lower()
    if kind == "constant":
        if len(words) != 2:
            raise DomainError("constant radius spec needs exactly one value")
        return ConstantRadius(float(words[1]))
    if kind == "fourier":
        if len(words) < 2:
            raise DomainError("fourier radius spec needs a0")
        a0 = float(words[1])
        terms = []
        for w in words[2:]:
            try:
                m_s, a_s = w.split(",")
                terms.append((int(m_s), float(a_s)))
            except ValueError as exc:
                raise DomainError(f"bad fourier term {w!r}, expected m,a_m") from exc
        return FourierRadius(a0, terms)
    if kind == "table":
        if points is None:
            raise DomainError("table radius spec needs (t, r) points")
        pts = np.asarray(list(points), dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise DomainError("table points must be (t, r) pairs")
        return TableRadius(pts[:, 0], pts[:, 1])
    raise DomainError(f"unknown radius spec kind {kind!r}")


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cone2D:
    """Sector {(r cos t, r sin t) : 0 < t < beta, r > 0}; beta = 2*pi is all of R^2."""

    opening_angle: float

    def __post_init__(self):
        beta = self.opening_angle
        if not (0.0 < beta <= TWO_PI + _FULL_PLANE_TOL):
            raise DomainError(f"opening angle must lie in (0, 2*pi], got {beta}")

    @property
    def is_full_plane(self) -> bool:
        return abs(self.opening_angle - TWO_PI) <= _FULL_PLANE_TOL

    @property
    def is_convex(self) -> bool:
        return self.opening_angle <= math.pi + _FULL_PLANE_TOL or self.is_full_plane


@dataclass(frozen=True)
class DomainSpec:
    """A cone plus the radial graph bounding GAMMA0, with sampling resolution."""

    cone: Cone2D
    radius_fn: RadiusFunction
    sample_count: int

    @property
    def beta(self) -> float:
        return self.cone.opening_angle

    def gamma0_angles(self, n=None) -> np.ndarray:
        """Sample angles of the GAMMA0 polyline (n segments)."""
        n = self.sample_count if n is None else int(n)
        if self.cone.is_full_plane:
            return np.linspace(0.0, TWO_PI, n + 1)[:-1]
        return np.linspace(0.0, self.beta, n + 1)

    def gamma0_point(self, t):
        t = np.asarray(t, dtype=float)
        r = self.radius_fn(t)
        return np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)

    def clamp_angle(self, t):
        """Map an atan2 angle into the parameter range of the graph."""
        t = np.asarray(np.mod(t, TWO_PI), dtype=float)
        if self.cone.is_full_plane:
            return t
        return np.clip(t, 0.0, self.beta)

    def project_to_gamma0(self, points):
        """Radially project points onto the analytic graph."""
        points = np.asarray(points, dtype=float)
        t = self.clamp_angle(np.arctan2(points[..., 1], points[..., 0]))
        return self.gamma0_point(t)

    def rotated(self, phi: float) -> "DomainSpec":
        """Rotate the whole configuration; only meaningful without legs."""
        if not self.cone.is_full_plane:
            raise DomainError("rigid rotation is only representable for beta = 2*pi")
        base = self.radius_fn

        def r(t):
            return base(np.mod(t - phi, TWO_PI))

        def dr(t):
            return base.deriv(np.mod(t - phi, TWO_PI))

        def d2r(t):
            return base.deriv2(np.mod(t - phi, TWO_PI))

        fn = CallableRadius(r, dr, d2r, label=f"{base.describe()} rot {phi:g}")
        return DomainSpec(self.cone, fn, self.sample_count)


@dataclass(frozen=True)
class Polyline:
    """Directed segment chain with per-segment outward unit normals."""

    points: np.ndarray      # (n+1, 2), or (n, 2) closed when wrap=True
    normals: np.ndarray     # (n, 2)
    wrap: bool = False

    @property
    def n_segments(self) -> int:
        return len(self.points) if self.wrap else len(self.points) - 1

    def segments(self):
        a = self.points
        b = np.roll(self.points, -1, axis=0) if self.wrap else self.points[1:]
        return (a if self.wrap else a[:-1]), b

    @property
    def lengths(self) -> np.ndarray:
        a, b = self.segments()
        return np.linalg.norm(b - a, axis=1)

    @property
    def total_length(self) -> float:
        return float(np.sum(self.lengths))


@dataclass(frozen=True)
class BoundaryPartition:
    """GAMMA0 polyline plus straight GAMMA1 segments, with corner points."""

    gamma0: Polyline
    gamma1_segments: np.ndarray   # (k, 2, 2): [start, end] per leg, CCW order
    gamma1_normals: np.ndarray    # (k, 2)
    corners: np.ndarray           # (k0, 2) endpoints of GAMMA0

    @property
    def has_gamma1(self) -> bool:
        return len(self.gamma1_segments) > 0

    def all_segments(self):
        """(start, end, normal) arrays over GAMMA0 then GAMMA1; for distances."""
        a0, b0 = self.gamma0.segments()
        if not self.has_gamma1:
            return a0, b0, self.gamma0.normals
        a = np.vstack([a0, self.gamma1_segments[:, 0]])
        b = np.vstack([b0, self.gamma1_segments[:, 1]])
        nrm = np.vstack([self.gamma0.normals, self.gamma1_normals])
        return a, b, nrm

    def rotated(self, phi: float) -> "BoundaryPartition":
        c, s = math.cos(phi), math.sin(phi)
        R = np.array([[c, -s], [s, c]])
        rot = lambda arr: arr @ R.T
        return BoundaryPartition(
            Polyline(rot(self.gamma0.points), rot(self.gamma0.normals), self.gamma0.wrap),
            self.gamma1_segments @ R.T,
            rot(self.gamma1_normals) if len(self.gamma1_normals) else self.gamma1_normals,
            rot(self.corners) if len(self.corners) else self.corners,
        )


@dataclass(frozen=True)
class SpanInfo:
    """Span of the GAMMA1 normals and a frame sending it to the leading axes."""

    k: int
    basis: np.ndarray     # (k, 2) orthonormal rows spanning the normal space
    rotation: np.ndarray  # (2, 2) orthogonal, rows: basis then its complement


@dataclass(frozen=True)
class GeometryReport:
    area: float
    gamma0_length: float
    diameter: float
    rho_e: float
    rho_i: float
    r_i_estimate: float
    theta: float
    a_tilde: float


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def make_sector_domain(beta: float, radius_fn, samples: int = 256) -> DomainSpec:
    """Validated sector domain: positive star-shaped radial graph over the cone.

    ``radius_fn`` may be a RadiusFunction or any callable of the angle.
    Raises DomainError for beta outside (0, 2*pi], non-positive radius, or a
    full-plane graph that does not close up.
    """
    cone = Cone2D(float(beta))
    if not isinstance(radius_fn, RadiusFunction):
        radius_fn = CallableRadius(radius_fn)
    samples = int(samples)
    if samples < 8:
        raise DomainError("need at least 8 boundary samples")
    spec = DomainSpec(cone, radius_fn, samples)
    ts = np.linspace(0.0, spec.beta, 4 * samples + 1)
    r = np.asarray(radius_fn(ts), dtype=float)
    if not np.all(np.isfinite(r)):
        raise DomainError("radius function must be finite on [0, beta]")
    if np.min(r) <= 0.0:
        raise DomainError(f"radius function must be positive (min {np.min(r):g})")
    if cone.is_full_plane:
        scale = max(1.0, float(np.max(np.abs(r))))
        if abs(r[0] - r[-1]) > 1e-9 * scale:
            raise DomainError("full-plane radial graph must close: r(0) == r(2*pi)")
    return spec


def boundary_partition(spec: DomainSpec) -> BoundaryPartition:
    """GAMMA0 as a sampled polyline and GAMMA1 as the straight legs."""
    ts = spec.gamma0_angles()
    pts = spec.gamma0_point(ts)
    wrap = spec.cone.is_full_plane
    a = pts
    b = np.roll(pts, -1, axis=0) if wrap else pts[1:]
    if not wrap:
        a = pts[:-1]
    d = b - a
    lengths = np.linalg.norm(d, axis=1)
    # interior is to the left of the CCW-directed segments
    normals = np.stack([d[:, 1], -d[:, 0]], axis=1) / lengths[:, None]
    gamma0 = Polyline(pts, normals, wrap=wrap)

    if wrap:
        g1_segs = np.zeros((0, 2, 2))
        g1_norms = np.zeros((0, 2))
        corners = np.zeros((0, 2))
    else:
        beta = spec.beta
        p_start = spec.gamma0_point(0.0)
        p_end = spec.gamma0_point(beta)
        origin = np.zeros(2)
        # CCW boundary: origin -> p_start, arc, p_end -> origin
        g1_segs = np.array([[origin, p_start], [p_end, origin]])
        g1_norms = np.array([
            [0.0, -1.0],
            [-math.sin(beta), math.cos(beta)],
        ])
        corners = np.array([p_start, p_end])
    return BoundaryPartition(gamma0, g1_segs, g1_norms, corners)


def normal_span(partition: BoundaryPartition, tol: float = 1e-10) -> SpanInfo:
    """Rank and orthonormal basis of span{nu(x) : x in GAMMA1}."""
    normals = partition.gamma1_normals
    if len(normals) == 0:
        return SpanInfo(0, np.zeros((0, 2)), np.eye(2))
    _, s, vt = np.linalg.svd(np.asarray(normals, dtype=float))
    k = int(np.sum(s > tol * s[0]))
    rotation = vt.copy()
    if np.linalg.det(rotation) < 0:
        rotation[-1] = -rotation[-1]
    return SpanInfo(k, rotation[:k], rotation)


def serrin_radius(area: float, gamma0_length: float, N: int = 2) -> float:
    """Candidate ball radius N*|domain| / |GAMMA0|."""
    if area <= 0 or gamma0_length <= 0:
        raise DomainError("area and GAMMA0 length must be positive")
    return N * area / gamma0_length


def segment_extremes(a, b, z):
    """(min, max) of |x - z| over segments [a_i, b_i]; closed forms per segment."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    z = np.asarray(z, dtype=float)
    d = b - a
    dd = np.einsum("ij,ij->i", d, d)
    w = z - a
    s = np.clip(np.einsum("ij,ij->i", w, d) / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
    closest = a + s[:, None] * d
    dmin = np.linalg.norm(closest - z, axis=1)
    dend = np.maximum(np.linalg.norm(a - z, axis=1), np.linalg.norm(b - z, axis=1))
    return dmin, dend


def rho_extremes(partition: BoundaryPartition, z=(0.0, 0.0)):
    """(rho_e, rho_i): max/min distance from z to the GAMMA0 polyline."""
    a, b = partition.gamma0.segments()
    dmin, dmax = segment_extremes(a, b, z)
    return float(np.max(dmax)), float(np.min(dmin))


def polyline_distance(points, seg_a, seg_b, chunk: int = 4096) -> np.ndarray:
    """Distance from each point to the nearest of the segments [a_i, b_i]."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    seg_a = np.asarray(seg_a, dtype=float)
    seg_b = np.asarray(seg_b, dtype=float)
    d = seg_b - seg_a
    dd = np.einsum("ij,ij->i", d, d)
    dd_safe = np.where(dd > 0, dd, 1.0)
    out = np.empty(len(points))
    for lo in range(0, len(points), chunk):
        p = points[lo:lo + chunk]
        w = p[:, None, :] - seg_a[None, :, :]
        s = np.clip(np.einsum("pij,ij->pi", w, d) / dd_safe[None, :], 0.0, 1.0)
        diff = w - s[:, :, None] * d[None, :, :]
        out[lo:lo + chunk] = np.sqrt(np.einsum("pij,pij->pi", diff, diff).min(axis=1))
    return out


def polar_curvature(spec: DomainSpec, t) -> np.ndarray:
    """Signed curvature of the radial graph (positive: convex toward origin)."""
    r = np.asarray(spec.radius_fn(t), dtype=float)
    dr = np.asarray(spec.radius_fn.deriv(t), dtype=float)
    d2r = np.asarray(spec.radius_fn.deriv2(t), dtype=float)
    return (r**2 + 2 * dr**2 - r * d2r) / (r**2 + dr**2) ** 1.5


def exterior_sphere_radius(spec: DomainSpec) -> float:
    """Admissible exterior tangent-ball radius for a convex radial graph.

    For convex graphs every tangent ball avoids the domain, so the curvature
    bound 1/max kappa is admissible (and conservative).  Returns NaN when the
    graph is not convex.
    """
    ts = spec.gamma0_angles(max(spec.sample_count, 720))
    kappa = polar_curvature(spec, ts)
    if np.min(kappa) < 0:
        return float("nan")
    return float(1.0 / np.max(kappa))


class InteriorSphere:
    """Sampled lower bound for the interior touching-ball radius."""

    def __init__(self, value: float, ok: bool):
        self.value = float(value)
        self.ok = bool(ok)

    def __float__(self):
        return self.value

    def __repr__(self):
        return f"InteriorSphere({self.value:.6g}, ok={self.ok})"


def _inside_closure(spec: DomainSpec, pts, tol: float) -> np.ndarray:
    pts = np.atleast_2d(pts)
    rad = np.linalg.norm(pts, axis=1)
    ang = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), TWO_PI)
    ok_r = rad <= np.asarray(spec.radius_fn(spec.clamp_angle(ang))) + tol
    if spec.cone.is_full_plane:
        return ok_r
    in_cone = (ang <= spec.beta + tol) | (ang >= TWO_PI - tol) | (rad <= tol)
    return ok_r & in_cone


def interior_sphere_radius(spec: DomainSpec, samples: int = 256) -> InteriorSphere:
    """Largest rho such that balls tangent at GAMMA0 from inside stay legal.

    Per sampled boundary point the ball center must lie in the closed domain
    and the closed ball may meet GAMMA0 only at the tangency point (the cone
    legs do not constrain the ball).  Bisection per sample; the reported value
    is the minimum over samples, a lower bound up to sampling resolution.
    """
    part = boundary_partition(spec)
    a0, b0 = part.gamma0.segments()
    ts = spec.gamma0_angles(samples)
    pts = spec.gamma0_point(ts)
    # outward normal of the graph at the sample angles
    dr = np.asarray(spec.radius_fn.deriv(ts), dtype=float)
    r = np.asarray(spec.radius_fn(ts), dtype=float)
    tang = np.stack([dr * np.cos(ts) - r * np.sin(ts),
                     dr * np.sin(ts) + r * np.cos(ts)], axis=1)
    tang /= np.linalg.norm(tang, axis=1)[:, None]
    nrm = np.stack([tang[:, 1], -tang[:, 0]], axis=1)

    rho_hi = float(np.max(r))
    geom_tol = 2.0 * rho_hi * (spec.beta / part.gamma0.n_segments) ** 2 + 1e-12

    def admissible(rho: float) -> np.ndarray:
        centers = pts - rho * nrm
        inside = _inside_closure(spec, centers, geom_tol)
        dist = polyline_distance(centers, a0, b0)
        return inside & (dist >= rho - geom_tol)

    lo = np.full(len(pts), 0.0)
    hi = np.full(len(pts), rho_hi)
    ok0 = admissible(1e-3 * rho_hi)
    if not np.all(ok0):
        return InteriorSphere(0.0, False)
    # per-sample bisection (vectorized over samples)
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        centers = pts - mid[:, None] * nrm
        inside = _inside_closure(spec, centers, geom_tol)
        dist = polyline_distance(centers, a0, b0)
        good = inside & (dist >= mid - geom_tol)
        lo = np.where(good, mid, lo)
        hi = np.where(good, hi, mid)
    return InteriorSphere(float(np.min(lo)), True)


def domain_area(spec: DomainSpec) -> float:
    """|Sigma ∩ Omega| by adaptive quadrature of the sector formula."""
    val, _ = quad(lambda t: 0.5 * float(spec.radius_fn(t)) ** 2, 0.0, spec.beta,
                  limit=200)
    return val


def gamma0_length(spec: DomainSpec) -> float:
    """|GAMMA0| by adaptive quadrature of the polar arc-length element."""
    fn = spec.radius_fn
    val, _ = quad(lambda t: math.hypot(float(fn(t)), float(fn.deriv(t))),
                  0.0, spec.beta, limit=200)
    return val


def domain_diameter(spec: DomainSpec) -> float:
    ts = spec.gamma0_angles(max(spec.sample_count, 512))
    pts = spec.gamma0_point(ts)
    if not spec.cone.is_full_plane:
        pts = np.vstack([pts, [[0.0, 0.0]]])
    # boundary extremes suffice; O(n^2) on <= ~1k points
    diff = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((diff**2).sum(axis=2)).max())


def geometry_report(spec: DomainSpec, z=(0.0, 0.0), theta=None, a_tilde=None) -> GeometryReport:
    """All purely geometric quantities entering the theorem constants.

    theta / a_tilde are taken from the caller when supplied; otherwise a crude
    estimate is recorded (half the minimum corner angle, half the minimum
    feature size).  They are bookkeeping only.
    """
    part = boundary_partition(spec)
    area = domain_area(spec)
    glen = gamma0_length(spec)
    rho_e, rho_i = rho_extremes(part, z)
    ri = interior_sphere_radius(spec)
    if theta is None:
        if spec.cone.is_full_plane:
            corner = math.pi
        else:
            corner = min(spec.beta, math.pi / 2)
        theta = min(corner / 2, math.pi / 2)
    if a_tilde is None:
        a_tilde = 0.5 * float(np.min(spec.radius_fn(spec.gamma0_angles())))
    return GeometryReport(
        area=area, gamma0_length=glen, diameter=domain_diameter(spec),
        rho_e=rho_e, rho_i=rho_i, r_i_estimate=ri.value,
        theta=float(theta), a_tilde=float(a_tilde),
    )

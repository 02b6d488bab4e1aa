"""Scalar functionals of a solved torsion field.

Everything the rigidity/stability checks consume is computed here from the
discrete field: the candidate radius R, the boundary flux u_nu and its
deficits, the center z, the auxiliary field h = |x-z|^2/2 - u, the volume
identity connecting them, and the pointwise flux-vs-distance bounds.

All reductions are plain ``np.sum`` over arrays in fixed element/edge order
(pairwise summation), so results are independent of worker-thread count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fem import FemField, _boundary_edge_elements, interpolate
from .geometry import DomainSpec, SpanInfo, boundary_partition, polyline_distance, segment_extremes
from .mesher import GAMMA0, GAMMA1, TaggedMesh
from .quadrature import TRI_POINTS, TRI_WEIGHTS, edge_gauss

CSV_COLUMNS = (
    "domain_id,h_max,degree,R,m,z_x,z_y,deficit_1,deficit_2,pseudodistance,"
    "rho_gap,identity_lhs,identity_rhs,gamma1_term,identity_residual,"
    "C_bound,C_bound_satisfied"
)


class CenterError(ValueError):
    """Center violates the cone-boundary constraint required by the identity."""


# ---------------------------------------------------------------------------
# boundary-edge quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EdgeTrace:
    """Quadrature data on the boundary edges of one tag class."""

    edge_rows: np.ndarray   # (ne,) row indices into mesh.boundary_edges
    elements: np.ndarray    # (ne,) owning element per edge
    normals: np.ndarray     # (ne, 2)
    lengths: np.ndarray     # (ne,)
    points: np.ndarray      # (ne, ng, 2)
    lam: np.ndarray         # (ne, ng, 3) barycentric in the owning element
    weights: np.ndarray     # (ne, ng) arc-length weights

    @property
    def total_length(self) -> float:
        return float(np.sum(self.lengths))

    def integrate(self, values: np.ndarray) -> float:
        return float(np.sum(self.weights * values))


def edge_trace(mesh: TaggedMesh, tag: int, n_gauss: int = 3) -> EdgeTrace:
    rows = np.flatnonzero(mesh.boundary_tags == tag)
    edges = mesh.boundary_edges[rows]
    owner_of = _boundary_edge_elements(mesh)
    elements = np.array([owner_of[tuple(sorted(e))] for e in edges.tolist()],
                        dtype=np.int64)
    a = mesh.vertices[edges[:, 0]]
    b = mesh.vertices[edges[:, 1]]
    d = b - a
    lengths = np.linalg.norm(d, axis=1)
    normals = np.stack([d[:, 1], -d[:, 0]], axis=1) / lengths[:, None]
    s, w = edge_gauss(n_gauss)
    points = a[:, None, :] + s[None, :, None] * d[:, None, :]
    weights = lengths[:, None] * w[None, :]
    # barycentric coordinates of the quadrature points in the owning element
    T = mesh.triangles[elements]
    V = mesh.vertices
    p0 = V[T[:, 0]]
    d1, d2 = V[T[:, 1]] - p0, V[T[:, 2]] - p0
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    rel = points - p0[:, None, :]
    l1 = (rel[:, :, 0] * d2[:, 1][:, None] - rel[:, :, 1] * d2[:, 0][:, None]) / det[:, None]
    l2 = (-rel[:, :, 0] * d1[:, 1][:, None] + rel[:, :, 1] * d1[:, 0][:, None]) / det[:, None]
    lam = np.stack([1.0 - l1 - l2, l1, l2], axis=2)
    return EdgeTrace(rows, elements, normals, lengths, points, lam, weights)


def collar_edge_mask(mesh: TaggedMesh, trace: EdgeTrace) -> np.ndarray:
    """GAMMA0 edges touching a GAMMA0/GAMMA1 corner (one-edge collar)."""
    g1 = mesh.boundary_edges[mesh.boundary_tags == GAMMA1]
    if len(g1) == 0:
        return np.zeros(len(trace.edge_rows), dtype=bool)
    corner_vertices = set(np.unique(g1).tolist())
    edges = mesh.boundary_edges[trace.edge_rows]
    return np.array([(int(a) in corner_vertices) or (int(b) in corner_vertices)
                     for a, b in edges])


# ---------------------------------------------------------------------------
# boundary flux
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryField:
    """u_nu at GAMMA0 quadrature points with arc-length weights."""

    points: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    normals: np.ndarray   # per point
    collar: np.ndarray    # per point: True on corner-adjacent edges
    n_gauss: int

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weights))

    def min_value(self, exclude_collar: bool = True) -> float:
        vals = self.values[~self.collar] if exclude_collar and np.any(~self.collar) \
            else self.values
        return float(np.min(vals))


def normal_derivative(u: FemField, n_gauss: int = 2) -> BoundaryField:
    """<grad u, nu> on GAMMA0 edges, gradient taken from the owning element."""
    if u.degree < 2:
        raise ValueError("boundary flux wants a degree-2 field")
    tr = edge_trace(u.mesh, GAMMA0, n_gauss)
    ne, ng = tr.weights.shape
    elems = np.repeat(tr.elements, ng)
    grads = u.gradients(elems, tr.lam.reshape(-1, 3)).reshape(ne, ng, 2)
    unu = np.einsum("egx,ex->eg", grads, tr.normals)
    collar = np.repeat(collar_edge_mask(u.mesh, tr), ng)
    return BoundaryField(tr.points.reshape(-1, 2), unu.ravel(),
                         tr.weights.ravel(), np.repeat(tr.normals, ng, axis=0),
                         collar, n_gauss)


# ---------------------------------------------------------------------------
# centers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Center:
    z: np.ndarray
    k: int
    span_constrained: bool    # True: components along span{nu(Gamma1)} zeroed


def _free_center(u: FemField) -> np.ndarray:
    """(1/|G|) int (x - grad u) dx; the gradient is linear per element."""
    mesh = u.mesh
    V, T = mesh.vertices, mesh.triangles
    areas = u._areas
    centroids = (V[T[:, 0]] + V[T[:, 1]] + V[T[:, 2]]) / 3.0
    lam = np.full(3, 1.0 / 3.0)
    grads = u.gradients(np.arange(mesh.n_triangles), lam)
    integrand = centroids - grads
    total = np.sum(areas[:, None] * integrand, axis=0)
    return total / np.sum(areas)


def compute_center(u: FemField, span: SpanInfo) -> Center:
    """Center with the k components along span{nu(Gamma1)} forced to zero."""
    zf = _free_center(u)
    rot = span.rotation
    zr = rot @ zf
    zr[:span.k] = 0.0
    return Center(rot.T @ zr, span.k, True)


def alternative_center(u: FemField) -> Center:
    """Unconstrained center (all components free)."""
    return Center(_free_center(u), 0, False)


def center_constraint_violation(mesh: TaggedMesh, z) -> float:
    """max |<z, nu>| over the GAMMA1 normals (0 when GAMMA1 is empty)."""
    g1_rows = np.flatnonzero(mesh.boundary_tags == GAMMA1)
    if len(g1_rows) == 0:
        return 0.0
    normals = mesh.boundary_normals()[g1_rows]
    return float(np.max(np.abs(normals @ np.asarray(z, dtype=float))))


def check_center_constraint(mesh: TaggedMesh, z: np.ndarray, tol: float = 1e-10) -> None:
    """The identity needs <z, nu> = 0 for every GAMMA1 normal."""
    viol = center_constraint_violation(mesh, z)
    scale = 1.0 + float(np.linalg.norm(z))
    if viol > tol * scale:
        raise CenterError(
            f"center violates the cone-boundary constraint: |<z,nu>| = {viol:g}")


# ---------------------------------------------------------------------------
# auxiliary field and deficit of the Cauchy-Schwarz inequality
# ---------------------------------------------------------------------------

def h_field(u: FemField, center: Center | np.ndarray) -> FemField:
    """h = |x-z|^2/2 - u, interpolated into the same space (exact for q)."""
    z = center.z if isinstance(center, Center) else np.asarray(center, dtype=float)
    q = interpolate(u.mesh, u.degree,
                    lambda x, y: 0.5 * ((x - z[0]) ** 2 + (y - z[1]) ** 2))
    return FemField(u.mesh, u.degree, q.coeffs - u.coeffs, u.dofmap)


def cs_deficit(u: FemField) -> np.ndarray:
    """Per element |D^2 u|^2 - (tr D^2 u)^2 / N, clamped at tiny negatives."""
    H = u.element_hessians()
    frob = np.einsum("exy,exy->e", H, H)
    tr = H[:, 0, 0] + H[:, 1, 1]
    out = frob - tr**2 / 2.0
    out[(out < 0) & (out > -1e-12)] = 0.0
    return out


# ---------------------------------------------------------------------------
# the volume identity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityParts:
    lhs: float
    rhs: float
    gamma1_term: float
    residual: float
    lhs_exact_trace: float   # variant with Delta u frozen to N
    volume_term: float

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.gamma1_term, self.residual))


def _element_integral_of_field(u: FemField) -> np.ndarray:
    """int_T u per element (exact for the element polynomial)."""
    vals = np.zeros(u.mesh.n_triangles)
    elems = np.arange(u.mesh.n_triangles)
    for lam, w in zip(TRI_POINTS, TRI_WEIGHTS):
        vals += w * u.values(elems, lam)
    return vals * u._areas


def identity_residual(u: FemField, center: Center | np.ndarray,
                      R: float | None = None) -> IdentityParts:
    """Both sides of the volume identity and their scaled gap.

    lhs = int (-u) (|D^2 u|^2 - (tr D^2 u)^2/N) + int_G1 u <D^2u Du, nu>;
    rhs = 1/2 int_G0 (u_nu^2 - R^2)(u_nu - <x-z, nu>).  The trace of the
    discrete Hessian (not the constant N) enters the default lhs so both
    sides are functionals of the same discrete object; the frozen-N variant
    is recorded alongside.  The residual is |lhs-rhs| scaled by
    max(|lhs|, |rhs|, R^2 |G0| h^2).
    """
    z = center.z if isinstance(center, Center) else np.asarray(center, dtype=float)
    mesh = u.mesh
    check_center_constraint(mesh, z)

    minus_int_u = -_element_integral_of_field(u)      # int_T (-u)
    H = u.element_hessians()
    frob = np.einsum("exy,exy->e", H, H)
    tr = H[:, 0, 0] + H[:, 1, 1]
    volume = float(np.sum(minus_int_u * (frob - tr**2 / 2.0)))
    volume_exact = float(np.sum(minus_int_u * (frob - 2.0)))  # (Delta u)^2/N = N

    gamma1 = 0.0
    if np.any(mesh.boundary_tags == GAMMA1):
        tr1 = edge_trace(mesh, GAMMA1, 3)
        ne, ng = tr1.weights.shape
        elems = np.repeat(tr1.elements, ng)
        lam = tr1.lam.reshape(-1, 3)
        uvals = u.values(elems, lam).reshape(ne, ng)
        grads = u.gradients(elems, lam).reshape(ne, ng, 2)
        # <D^2u Du, nu> = (Du)^T (H nu) since H is symmetric
        Hn = np.einsum("exy,ey->ex", H[tr1.elements], tr1.normals)
        hdotnu = np.einsum("egx,ex->eg", grads, Hn)
        gamma1 = float(np.sum(tr1.weights * uvals * hdotnu))

    tr0 = edge_trace(mesh, GAMMA0, 3)
    ne, ng = tr0.weights.shape
    elems = np.repeat(tr0.elements, ng)
    lam = tr0.lam.reshape(-1, 3)
    grads = u.gradients(elems, lam).reshape(ne, ng, 2)
    unu = np.einsum("egx,ex->eg", grads, tr0.normals)
    if R is None:
        R = 2.0 * float(np.sum(u._areas)) / tr0.total_length
    xnu = np.einsum("egx,ex->eg", tr0.points - z[None, None, :], tr0.normals)
    rhs = 0.5 * float(np.sum(tr0.weights * (unu**2 - R**2) * (unu - xnu)))

    lhs = volume + gamma1
    scale = max(abs(lhs), abs(rhs), R**2 * tr0.total_length * mesh.h_max**2)
    return IdentityParts(lhs, rhs, gamma1, abs(lhs - rhs) / scale,
                         volume_exact + gamma1, volume)


# ---------------------------------------------------------------------------
# deficits report
# ---------------------------------------------------------------------------

@dataclass
class DeficitReport:
    domain_id: str
    h_max: float
    degree: int
    R: float
    m: float
    z: np.ndarray
    deficit_1: float
    deficit_2: float
    pseudodistance: float
    rho_gap: float
    identity_lhs: float
    identity_rhs: float
    gamma1_term: float
    identity_residual: float
    C_bound: float | None
    C_bound_satisfied: bool | None
    k: int = 0
    collar_excluded: int = 0
    m_all_points: float = 0.0
    degenerate: bool = False
    extras: dict = field(default_factory=dict)

    @staticmethod
    def csv_header() -> str:
        return CSV_COLUMNS

    def csv_row(self) -> str:
        def num(x):
            return f"{x:.12g}"

        cb = "" if self.C_bound is None else num(self.C_bound)
        cbs = "" if self.C_bound_satisfied is None else str(self.C_bound_satisfied).lower()
        vals = [self.domain_id, num(self.h_max), str(self.degree), num(self.R),
                num(self.m), num(self.z[0]), num(self.z[1]), num(self.deficit_1),
                num(self.deficit_2), num(self.pseudodistance), num(self.rho_gap),
                num(self.identity_lhs), num(self.identity_rhs),
                num(self.gamma1_term), num(self.identity_residual), cb, cbs]
        return ",".join(vals)

    def column(self, name: str) -> float:
        mapping = {
            "h_max": self.h_max, "R": self.R, "m": self.m,
            "z_x": self.z[0], "z_y": self.z[1],
            "deficit_1": self.deficit_1, "deficit_2": self.deficit_2,
            "pseudodistance": self.pseudodistance, "rho_gap": self.rho_gap,
            "identity_lhs": self.identity_lhs, "identity_rhs": self.identity_rhs,
            "gamma1_term": self.gamma1_term,
            "identity_residual": self.identity_residual,
        }
        if name in mapping:
            return float(mapping[name])
        if name == "C_bound":
            return float("nan") if self.C_bound is None else float(self.C_bound)
        if name in self.extras:
            return float(self.extras[name])
        raise KeyError(name)


def deficits(u: FemField, center: Center | np.ndarray, *,
             lambda_21: float | None = None, domain_id: str = "",
             span_k: int | None = None) -> DeficitReport:
    """Fill every deficit functional of one solve by GAMMA0 quadrature.

    ``lambda_21`` is the Poincare combination Lambda_{2,1}(k); when given and
    the flux lower bound m is positive, the stability constant
    (2 N Lambda^2 + 3) / (2 m) and its row check are recorded.
    """
    z = center.z if isinstance(center, Center) else np.asarray(center, dtype=float)
    k = center.k if isinstance(center, Center) else (span_k or 0)
    mesh = u.mesh
    tr0 = edge_trace(mesh, GAMMA0, 3)
    ne, ng = tr0.weights.shape
    elems = np.repeat(tr0.elements, ng)
    lam = tr0.lam.reshape(-1, 3)
    grads = u.gradients(elems, lam).reshape(ne, ng, 2)
    unu = np.einsum("egx,ex->eg", grads, tr0.normals)
    w = tr0.weights

    area = float(np.sum(u._areas))
    R = 2.0 * area / tr0.total_length

    collar = collar_edge_mask(mesh, tr0)
    interior_vals = unu[~collar] if np.any(~collar) else unu
    m = float(np.min(interior_vals))
    m_all = float(np.min(unu))

    deficit_1 = float(np.sqrt(np.sum(w * (unu - R) ** 2)))
    deficit_2 = float(np.sqrt(np.sum(w * (unu**2 - R**2) ** 2)))
    dist = np.linalg.norm(tr0.points - z[None, None, :], axis=2)
    pseudo = float(np.sqrt(np.sum(w * (dist - R) ** 2)))

    edges = mesh.boundary_edges[tr0.edge_rows]
    seg_min, seg_max = segment_extremes(mesh.vertices[edges[:, 0]],
                                        mesh.vertices[edges[:, 1]], z)
    rho_gap = float(np.max(seg_max) - np.min(seg_min))

    # the identity is only meaningful for constraint-respecting centers
    scale = 1.0 + float(np.linalg.norm(z))
    if center_constraint_violation(mesh, z) <= 1e-10 * scale:
        ident = identity_residual(u, z, R=R)
    else:
        nan = float("nan")
        ident = IdentityParts(nan, nan, nan, nan, nan, nan)

    degenerate = m <= 0.0
    if lambda_21 is not None and not degenerate:
        c_bound = (2.0 * 2.0 * lambda_21**2 + 3.0) / (2.0 * m)
        satisfied = pseudo <= c_bound * deficit_2
    else:
        c_bound, satisfied = None, None

    return DeficitReport(
        domain_id=domain_id, h_max=mesh.h_max, degree=u.degree, R=R, m=m,
        z=np.asarray(z, dtype=float), deficit_1=deficit_1, deficit_2=deficit_2,
        pseudodistance=pseudo, rho_gap=rho_gap,
        identity_lhs=ident.lhs, identity_rhs=ident.rhs,
        gamma1_term=ident.gamma1_term, identity_residual=ident.residual,
        C_bound=c_bound, C_bound_satisfied=satisfied, k=k,
        collar_excluded=int(np.sum(collar)), m_all_points=m_all,
        degenerate=degenerate,
        extras={"identity_lhs_exact_trace": ident.lhs_exact_trace},
    )


# ---------------------------------------------------------------------------
# trace norms and pointwise bounds
# ---------------------------------------------------------------------------

def gamma0_grad_norm(field: FemField) -> float:
    """L2(GAMMA0) norm of the gradient trace."""
    tr0 = edge_trace(field.mesh, GAMMA0, 3)
    ne, ng = tr0.weights.shape
    elems = np.repeat(tr0.elements, ng)
    grads = field.gradients(elems, tr0.lam.reshape(-1, 3)).reshape(ne, ng, 2)
    return float(np.sqrt(np.sum(tr0.weights * np.einsum("egx,egx->eg", grads, grads))))


def max_gradient(u: FemField) -> float:
    """max |grad u| over element quadrature points and vertices."""
    best = 0.0
    elems = np.arange(u.mesh.n_triangles)
    pts = list(TRI_POINTS) + [np.array([1.0, 0, 0]), np.array([0, 1.0, 0]),
                              np.array([0, 0, 1.0])]
    for lam in pts:
        g = u.gradients(elems, lam)
        best = max(best, float(np.sqrt(np.einsum("ex,ex->e", g, g).max())))
    return best


def max_depth(u: FemField) -> float:
    """max (-u) over nodes and quadrature points."""
    best = float(np.max(-u.coeffs))
    elems = np.arange(u.mesh.n_triangles)
    for lam in TRI_POINTS:
        best = max(best, float(np.max(-u.values(elems, lam))))
    return best


@dataclass(frozen=True)
class DistanceBoundReport:
    margin_boundary_sq: float   # min of (-u) - d(x, boundary)^2/2
    margin_gamma0_sq: float     # min of (-u) - d(x, GAMMA0)^2/2
    margin_gamma0_linear: float  # min of (-u) - (r_i/2) d(x, GAMMA0)
    tolerance: float

    @property
    def ok(self) -> bool:
        return (self.margin_boundary_sq >= -self.tolerance
                and self.margin_gamma0_sq >= -self.tolerance
                and self.margin_gamma0_linear >= -self.tolerance)


def u_distance_bounds(u: FemField, spec: DomainSpec, r_i: float,
                      tolerance: float = 5e-3) -> DistanceBoundReport:
    """Check -u against the squared/linear distance lower bounds pointwise.

    Evaluated at every interior quadrature point; distances are exact
    point-to-polyline distances against the analytic boundary partition.
    """
    part = boundary_partition(spec)
    a_all, b_all, _ = part.all_segments()
    a0, b0 = part.gamma0.segments()
    mesh = u.mesh
    V, T = mesh.vertices, mesh.triangles
    p0, p1, p2 = V[T[:, 0]], V[T[:, 1]], V[T[:, 2]]
    elems = np.arange(mesh.n_triangles)
    m_b = m_g = m_lin = np.inf
    for lam in TRI_POINTS:
        xy = lam[0] * p0 + lam[1] * p1 + lam[2] * p2
        mu = -u.values(elems, lam)
        d_b = polyline_distance(xy, a_all, b_all)
        d_g = polyline_distance(xy, a0, b0)
        m_b = min(m_b, float(np.min(mu - 0.5 * d_b**2)))
        m_g = min(m_g, float(np.min(mu - 0.5 * d_g**2)))
        m_lin = min(m_lin, float(np.min(mu - 0.5 * r_i * d_g)))
    return DistanceBoundReport(m_b, m_g, m_lin, tolerance)

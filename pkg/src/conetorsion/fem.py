"""Lagrange P1/P2 solver for the mixed torsion problem.

Weak form: int grad(u).grad(phi) = -int N phi, with essential u = 0 on GAMMA0
node sets and natural (zero-flux) treatment of GAMMA1.  Elements are affine,
so degree-2 fields have an exact constant Hessian per element.

On curved GAMMA0 the midpoint Dirichlet values are corrected by one
gradient-only Taylor step toward the analytic boundary, which restores the
cubic L2 accuracy of P2 that the polygonal O(h^2) boundary gap would
otherwise cap at quadratic order (see tests for the measured rates).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .mesher import GAMMA0, TaggedMesh
from .quadrature import TRI_POINTS, TRI_WEIGHTS


class FemError(RuntimeError):
    """Assembly or solver failure."""


# ---------------------------------------------------------------------------
# reference shape functions
# ---------------------------------------------------------------------------

def shape_values(degree: int, lam: np.ndarray) -> np.ndarray:
    """Shape function values at barycentric points lam (..., 3)."""
    lam = np.asarray(lam, dtype=float)
    l0, l1, l2 = lam[..., 0], lam[..., 1], lam[..., 2]
    if degree == 1:
        return np.stack([l0, l1, l2], axis=-1)
    return np.stack([
        l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1),
        4 * l0 * l1, 4 * l1 * l2, 4 * l2 * l0,
    ], axis=-1)


def shape_bary_grads(degree: int, lam: np.ndarray) -> np.ndarray:
    """d(shape)/d(lambda_a) at barycentric points, shape (..., ndof, 3)."""
    lam = np.asarray(lam, dtype=float)
    l0, l1, l2 = lam[..., 0], lam[..., 1], lam[..., 2]
    zero = np.zeros_like(l0)
    if degree == 1:
        one = np.ones_like(l0)
        rows = [
            [one, zero, zero],
            [zero, one, zero],
            [zero, zero, one],
        ]
    else:
        rows = [
            [4 * l0 - 1, zero, zero],
            [zero, 4 * l1 - 1, zero],
            [zero, zero, 4 * l2 - 1],
            [4 * l1, 4 * l0, zero],
            [zero, 4 * l2, 4 * l1],
            [4 * l2, zero, 4 * l0],
        ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


# local P2 edge ordering: dof 3 = mid(0,1), 4 = mid(1,2), 5 = mid(2,0)
_LOCAL_EDGES = ((0, 1), (1, 2), (2, 0))


# ---------------------------------------------------------------------------
# dof layout and geometry factors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DofMap:
    degree: int
    node_xy: np.ndarray        # (ndof, 2)
    elem_dofs: np.ndarray      # (nt, 3) or (nt, 6)
    edge_nodes: dict           # sorted vertex pair -> global edge-node id (degree 2)
    n_vertices: int

    @property
    def n_dofs(self) -> int:
        return len(self.node_xy)


def build_dofmap(mesh: TaggedMesh, degree: int) -> DofMap:
    if degree not in (1, 2):
        raise FemError("only degree 1 and 2 elements are supported")
    V, T = mesh.vertices, mesh.triangles
    nv = len(V)
    if degree == 1:
        return DofMap(1, V.copy(), T.copy(), {}, nv)
    pairs = np.concatenate([T[:, [0, 1]], T[:, [1, 2]], T[:, [2, 0]]])
    keys = np.sort(pairs, axis=1)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    mids = 0.5 * (V[uniq[:, 0]] + V[uniq[:, 1]])
    node_xy = np.vstack([V, mids])
    elem_dofs = np.hstack([T, nv + inverse.reshape(3, -1).T])
    edge_nodes = {tuple(k): nv + i for i, k in enumerate(uniq.tolist())}
    return DofMap(2, node_xy, elem_dofs, edge_nodes, nv)


def bary_gradients(mesh: TaggedMesh) -> tuple[np.ndarray, np.ndarray]:
    """Per-element gradients of (lambda_0, lambda_1, lambda_2) and areas."""
    V, T = mesh.vertices, mesh.triangles
    p0, p1, p2 = V[T[:, 0]], V[T[:, 1]], V[T[:, 2]]
    d1, d2 = p1 - p0, p2 - p0
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    inv = np.empty((len(T), 2, 2))
    inv[:, 0, 0] = d2[:, 1] / det
    inv[:, 0, 1] = -d2[:, 0] / det
    inv[:, 1, 0] = -d1[:, 1] / det
    inv[:, 1, 1] = d1[:, 0] / det
    G = np.empty((len(T), 3, 2))
    G[:, 1] = inv[:, 0, :]
    G[:, 2] = inv[:, 1, :]
    G[:, 0] = -G[:, 1] - G[:, 2]
    return G, 0.5 * det


# ---------------------------------------------------------------------------
# linear system
# ---------------------------------------------------------------------------

@dataclass
class LinearSystem:
    matrix: sp.csr_matrix
    load: np.ndarray
    dirichlet: np.ndarray      # sorted dof indices on GAMMA0
    dofmap: DofMap
    mesh: TaggedMesh
    rhs_constant: float        # N in Delta u = N


def assemble(mesh: TaggedMesh, degree: int = 2, N: int = 2) -> LinearSystem:
    """Stiffness/load of the torsion problem with GAMMA0 Dirichlet set.

    Quadrature is exact for polynomials of degree 2*degree; a mesh without
    GAMMA0 edges is rejected (the problem always carries a Dirichlet part).
    """
    if N != 2:
        raise FemError("the planar solver assembles Delta u = N with N = 2")
    if not np.any(mesh.boundary_tags == GAMMA0):
        raise FemError("mesh has no GAMMA0 edges; pure Neumann problem rejected")
    dofmap = build_dofmap(mesh, degree)
    G, areas = bary_gradients(mesh)
    nloc = 3 if degree == 1 else 6
    nt = mesh.n_triangles
    Ke = np.zeros((nt, nloc, nloc))
    be = np.zeros((nt, nloc))
    for lam, w in zip(TRI_POINTS, TRI_WEIGHTS):
        Nsh = shape_values(degree, lam)                      # (nloc,)
        dN = shape_bary_grads(degree, lam)                   # (nloc, 3)
        gradN = np.einsum("la,eax->elx", dN, G)              # (nt, nloc, 2)
        Ke += w * areas[:, None, None] * np.einsum("eix,ejx->eij", gradN, gradN)
        be += -N * w * areas[:, None] * Nsh[None, :]
    dofs = dofmap.elem_dofs
    rows = np.repeat(dofs, nloc, axis=1).ravel()
    cols = np.tile(dofs, (1, nloc)).ravel()
    A = sp.coo_matrix((Ke.ravel(), (rows, cols)),
                      shape=(dofmap.n_dofs, dofmap.n_dofs)).tocsr()
    b = np.zeros(dofmap.n_dofs)
    np.add.at(b, dofs.ravel(), be.ravel())

    fixed = set()
    for (a, c), tag in zip(mesh.boundary_edges, mesh.boundary_tags):
        if tag != GAMMA0:
            continue
        fixed.add(int(a))
        fixed.add(int(c))
        if degree == 2:
            fixed.add(dofmap.edge_nodes[tuple(sorted((int(a), int(c))))])
    dirichlet = np.array(sorted(fixed), dtype=np.int64)
    return LinearSystem(A, b, dirichlet, dofmap, mesh, float(N))


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------

class FemField:
    """Scalar finite-element field on a tagged mesh."""

    def __init__(self, mesh: TaggedMesh, degree: int, coeffs: np.ndarray,
                 dofmap: DofMap | None = None, diagnostics: dict | None = None):
        self.mesh = mesh
        self.degree = degree
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.dofmap = dofmap if dofmap is not None else build_dofmap(mesh, degree)
        self.diagnostics = diagnostics or {}
        self._G, self._areas = bary_gradients(mesh)
        self._hessians = None

    @property
    def node_xy(self) -> np.ndarray:
        return self.dofmap.node_xy

    def values(self, elements, lam) -> np.ndarray:
        """Field values on the given elements at barycentric points."""
        elements = np.asarray(elements, dtype=np.int64)
        Nsh = shape_values(self.degree, lam)
        c = self.coeffs[self.dofmap.elem_dofs[elements]]
        return np.einsum("...i,...i->...", np.broadcast_to(Nsh, c.shape), c)

    def gradients(self, elements, lam) -> np.ndarray:
        """Gradients on the given elements at barycentric points, (..., 2)."""
        elements = np.asarray(elements, dtype=np.int64)
        dN = shape_bary_grads(self.degree, lam)              # (..., nloc, 3)
        G = self._G[elements]                                # (..., 3, 2)
        gradN = np.einsum("...la,...ax->...lx", dN, G)
        c = self.coeffs[self.dofmap.elem_dofs[elements]]
        return np.einsum("...l,...lx->...x", c, gradN)

    def element_hessians(self) -> np.ndarray:
        """Constant Hessian per element, shape (nt, 2, 2); degree 2 only."""
        if self.degree != 2:
            raise FemError("element Hessians require a degree-2 field")
        if self._hessians is None:
            G = self._G
            c = self.coeffs[self.dofmap.elem_dofs]
            H = 4 * np.einsum("el,elx,ely->exy", c[:, :3], G, G)
            for i, (a, b) in enumerate(_LOCAL_EDGES):
                cc = c[:, 3 + i]
                H += 4 * cc[:, None, None] * (
                    np.einsum("ex,ey->exy", G[:, a], G[:, b])
                    + np.einsum("ex,ey->exy", G[:, b], G[:, a]))
            self._hessians = H
        return self._hessians

    def locate(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Element index and barycentric coordinates of physical points."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        V, T = self.mesh.vertices, self.mesh.triangles
        p0 = V[T[:, 0]]
        inv = _inverse_jacobians(V, T)
        elems = np.empty(len(points), dtype=np.int64)
        lams = np.empty((len(points), 3))
        for i, p in enumerate(points):
            lam12 = np.einsum("exy,ey->ex", inv, p - p0)
            lam0 = 1.0 - lam12.sum(axis=1)
            lam = np.column_stack([lam0, lam12])
            e = int(np.argmax(lam.min(axis=1)))
            elems[i] = e
            lams[i] = lam[e]
        return elems, lams

    def eval_points(self, points) -> np.ndarray:
        elems, lams = self.locate(points)
        return self.values(elems, lams)

    def energy(self) -> float:
        """Dirichlet energy int |grad u|^2."""
        total = 0.0
        for lam, w in zip(TRI_POINTS, TRI_WEIGHTS):
            g = self.gradients(np.arange(self.mesh.n_triangles), lam)
            total += w * float(np.sum(self._areas * np.einsum("ex,ex->e", g, g)))
        return total


def _inverse_jacobians(V, T):
    p0, p1, p2 = V[T[:, 0]], V[T[:, 1]], V[T[:, 2]]
    d1, d2 = p1 - p0, p2 - p0
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    inv = np.empty((len(T), 2, 2))
    inv[:, 0, 0] = d2[:, 1] / det
    inv[:, 0, 1] = -d2[:, 0] / det
    inv[:, 1, 0] = -d1[:, 1] / det
    inv[:, 1, 1] = d1[:, 0] / det
    return inv


def gradient_at(field: FemField, element: int, lam) -> np.ndarray:
    """Exact gradient of the element polynomial at a barycentric point."""
    return field.gradients(np.asarray([element]), np.asarray(lam))[0]


def hessian_on(field: FemField, element: int) -> np.ndarray:
    """The constant 2x2 Hessian of the quadratic on one element."""
    return field.element_hessians()[element]


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

def _boundary_edge_elements(mesh: TaggedMesh) -> dict:
    """sorted boundary vertex pair -> owning element index."""
    T = mesh.triangles
    out = {}
    edges = np.concatenate([T[:, [0, 1]], T[:, [1, 2]], T[:, [2, 0]]])
    owner = np.tile(np.arange(len(T)), 3)
    keys = np.sort(edges, axis=1)
    boundary = set(map(tuple, np.sort(mesh.boundary_edges, axis=1).tolist()))
    for key, el in zip(map(tuple, keys.tolist()), owner):
        if key in boundary:
            out[key] = int(el)
    return out


def solve(system: LinearSystem, curved_correction: bool = True) -> FemField:
    """Direct sparse solve; optional curved-boundary midpoint correction.

    The correction applies to degree-2 systems on meshes that carry an
    analytic boundary: the Dirichlet value at each GAMMA0 edge midpoint m is
    set to -<grad u, p - m> with p the radial projection of m onto the graph,
    using the gradient of the uncorrected solve (one extra back-substitution).
    """
    A, b = system.matrix, system.load
    n = A.shape[0]
    asym = abs(A - A.T).max()
    if asym > 1e-12 * abs(A).max():
        raise FemError(f"assembled matrix is not symmetric: {asym:g}")
    fixed = system.dirichlet
    free = np.setdiff1d(np.arange(n), fixed, assume_unique=True)
    A_ff = A[free][:, free].tocsc()
    A_fc = A[free][:, fixed]
    try:
        lu = spla.splu(A_ff)
    except RuntimeError as exc:
        raise FemError(f"sparse factorization failed: {exc}") from exc

    def solve_with(gvals: np.ndarray) -> np.ndarray:
        u = np.zeros(n)
        u[fixed] = gvals
        u[free] = lu.solve(b[free] - A_fc @ gvals)
        return u

    u = solve_with(np.zeros(len(fixed)))
    field = FemField(system.mesh, system.dofmap.degree, u, system.dofmap)

    mesh = system.mesh
    if (curved_correction and system.dofmap.degree == 2 and mesh.spec is not None):
        edge_owner = _boundary_edge_elements(mesh)
        gvals = np.zeros(len(fixed))
        pos = {int(d): i for i, d in enumerate(fixed)}
        centroid = np.full(3, 1.0 / 3.0)
        for (a, c), tag in zip(mesh.boundary_edges, mesh.boundary_tags):
            if tag != GAMMA0:
                continue
            key = tuple(sorted((int(a), int(c))))
            dof = system.dofmap.edge_nodes[key]
            m = system.dofmap.node_xy[dof]
            p = mesh.spec.project_to_gamma0(m[None, :])[0]
            el = edge_owner[key]
            # the centroid gradient keeps the correction uniformly first order
            grad = field.gradients(np.asarray([el]), centroid[None, :])[0]
            gvals[pos[dof]] = -float(grad @ (p - m))
        u = solve_with(gvals)
        field = FemField(system.mesh, system.dofmap.degree, u, system.dofmap)

    resid = A[free][:, free] @ u[free] - (b[free] - A_fc @ u[fixed])
    scale = max(float(np.linalg.norm(b[free])), 1e-30)
    rel = float(np.linalg.norm(resid)) / scale
    if rel > 1e-10:
        raise FemError(f"solver did not converge: relative residual {rel:g}")
    field.diagnostics.update({"relative_residual": rel,
                              "n_dofs": n, "n_fixed": len(fixed)})
    return field


def _bary_of_point(mesh: TaggedMesh, element: int, p: np.ndarray) -> np.ndarray:
    V, T = mesh.vertices, mesh.triangles
    inv = _inverse_jacobians(V, T[element:element + 1])[0]
    lam12 = inv @ (p - V[T[element, 0]])
    return np.array([1.0 - lam12.sum(), lam12[0], lam12[1]])


def galerkin_residual(system: LinearSystem, field: FemField) -> float:
    """Max weak-form residual against the free basis functions (scaled)."""
    fixed = system.dirichlet
    free = np.setdiff1d(np.arange(system.matrix.shape[0]), fixed,
                        assume_unique=True)
    r = system.matrix @ field.coeffs - system.load
    scale = max(float(np.abs(system.load).max()), 1e-30)
    return float(np.abs(r[free]).max()) / scale


# ---------------------------------------------------------------------------
# error norms against analytic functions
# ---------------------------------------------------------------------------

def l2_error(field: FemField, exact) -> float:
    """L2 distance to a callable exact(x, y) -> value."""
    mesh = field.mesh
    V, T = mesh.vertices, mesh.triangles
    p0, p1, p2 = V[T[:, 0]], V[T[:, 1]], V[T[:, 2]]
    total = 0.0
    elems = np.arange(mesh.n_triangles)
    for lam, w in zip(TRI_POINTS, TRI_WEIGHTS):
        xy = lam[0] * p0 + lam[1] * p1 + lam[2] * p2
        diff = field.values(elems, lam) - exact(xy[:, 0], xy[:, 1])
        total += w * float(np.sum(field._areas * diff**2))
    return float(np.sqrt(total))


def h1_seminorm_error(field: FemField, exact_grad) -> float:
    """H1 seminorm distance to a callable exact_grad(x, y) -> (gx, gy)."""
    mesh = field.mesh
    V, T = mesh.vertices, mesh.triangles
    p0, p1, p2 = V[T[:, 0]], V[T[:, 1]], V[T[:, 2]]
    total = 0.0
    elems = np.arange(mesh.n_triangles)
    for lam, w in zip(TRI_POINTS, TRI_WEIGHTS):
        xy = lam[0] * p0 + lam[1] * p1 + lam[2] * p2
        gx, gy = exact_grad(xy[:, 0], xy[:, 1])
        g = field.gradients(elems, lam)
        diff2 = (g[:, 0] - gx) ** 2 + (g[:, 1] - gy) ** 2
        total += w * float(np.sum(field._areas * diff2))
    return float(np.sqrt(total))


def interpolate(mesh: TaggedMesh, degree: int, fn) -> FemField:
    """Nodal interpolant of fn(x, y); exact for quadratics when degree = 2."""
    dofmap = build_dofmap(mesh, degree)
    xy = dofmap.node_xy
    return FemField(mesh, degree, np.asarray(fn(xy[:, 0], xy[:, 1]), dtype=float),
                    dofmap)


def write_solution(field: FemField, path) -> None:
    """Nodal values aligned with the mesh export (vertices first, then edges)."""
    with open(path, "w", encoding="ascii") as f:
        f.write(f"NODAL_VALUES {len(field.coeffs)} degree {field.degree}\n")
        for (x, y), c in zip(field.node_xy, field.coeffs):
            f.write(f"{x:.17g} {y:.17g} {c:.17g}\n")

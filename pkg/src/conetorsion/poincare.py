"""Weighted Poincare constants by discrete Rayleigh quotients (p = 2).

mu: best constant in  ||v - mean v||_2 <= mu^-1 ||d(.,boundary)^alpha grad v||_2
    over scalar fields, computed as the square root of the smallest positive
    eigenvalue of (weighted stiffness, mass) on P1.
eta: vector-field analogue with values in span{nu(GAMMA1)}, the constraint
    <v, nu> = 0 at GAMMA1 nodes, and the weight measuring distance to GAMMA0
    only.

Discrete values over-estimate the continuum infimum (conforming subspaces)
and decrease under refinement; ``levels`` records that history.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fem import FemField, bary_gradients
from .geometry import BoundaryPartition, SpanInfo, polyline_distance
from .mesher import GAMMA0, GAMMA1, TaggedMesh, refine
from .quadrature import TRI_POINTS, TRI_WEIGHTS


class EigenError(RuntimeError):
    """Eigenvalue solve failed or returned an inconsistent spectrum."""


@dataclass
class PoincareEstimate:
    kind: str                 # "mu" or "eta"
    alpha: float
    value: float              # the constant; the inequality uses value**-1
    level: int
    history: list
    converged: bool

    def csv_row(self, level: int | None = None) -> str:
        lv = self.level if level is None else level
        val = self.history[lv] if level is not None else self.value
        return f"{self.kind},{self.alpha:g},{lv},{val:.12g},{str(self.converged).lower()}"


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

def _boundary_segments(mesh: TaggedMesh, tag: int | None = None):
    """Mesh boundary edges (optionally one tag) as segment arrays."""
    if tag is None:
        edges = mesh.boundary_edges
    else:
        edges = mesh.boundary_edges[mesh.boundary_tags == tag]
    return mesh.vertices[edges[:, 0]], mesh.vertices[edges[:, 1]]


def _p1_matrices(mesh: TaggedMesh, alpha: float, seg_a, seg_b, degree: int = 1):
    """Weighted Lagrange stiffness (weight d^(2 alpha)) and mass matrix."""
    from .fem import build_dofmap, shape_bary_grads, shape_values

    dofmap = build_dofmap(mesh, degree)
    G, areas = bary_gradients(mesh)
    V, T = mesh.vertices, mesh.triangles
    p0, p1, p2 = V[T[:, 0]], V[T[:, 1]], V[T[:, 2]]
    nt = mesh.n_triangles
    nloc = 3 if degree == 1 else 6
    Ke = np.zeros((nt, nloc, nloc))
    Me = np.zeros((nt, nloc, nloc))
    for lam, w in zip(TRI_POINTS, TRI_WEIGHTS):
        xy = lam[0] * p0 + lam[1] * p1 + lam[2] * p2
        if alpha == 0.0:
            wt = np.ones(nt)
        else:
            wt = polyline_distance(xy, seg_a, seg_b) ** (2.0 * alpha)
        Nsh = shape_values(degree, lam)
        dN = shape_bary_grads(degree, lam)
        gradN = np.einsum("la,eax->elx", dN, G)
        Ke += (w * areas * wt)[:, None, None] * np.einsum(
            "eix,ejx->eij", gradN, gradN)
        Me += (w * areas)[:, None, None] * np.outer(Nsh, Nsh)[None, :, :]
    dofs = dofmap.elem_dofs
    rows = np.repeat(dofs, nloc, axis=1).ravel()
    cols = np.tile(dofs, (1, nloc)).ravel()
    n = dofmap.n_dofs
    A = sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    M = sp.coo_matrix((Me.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    return A, M


def _smallest_eigs(A, M, k: int = 4, sigma: float = -1.0) -> np.ndarray:
    n = A.shape[0]
    k = min(k, n - 1)
    v0 = 1.0 + 0.25 * np.cos(0.7 * np.arange(n))   # deterministic start
    try:
        vals = spla.eigsh(A.tocsc(), k=k, M=M.tocsc(), sigma=sigma,
                          v0=v0, return_eigenvectors=False)
    except Exception as exc:   # ARPACK failures surface as various types
        raise EigenError(f"eigenvalue solve failed: {exc}") from exc
    return np.sort(np.real(vals))


def _first_positive(vals: np.ndarray) -> float:
    tol = max(1e-10, 1e-8 * float(np.max(np.abs(vals))))
    pos = vals[vals > tol]
    if len(pos) == 0:
        raise EigenError(f"no positive eigenvalue found in {vals}")
    return float(pos[0])


# ---------------------------------------------------------------------------
# mu
# ---------------------------------------------------------------------------

def mu_estimate(mesh: TaggedMesh, alpha: float, levels: int = 1,
                boundary=None, degree: int = 1) -> PoincareEstimate:
    """Zero-mean scalar constant on the given mesh (optionally refined).

    The zero-mean subspace is reached spectrally: constants are the exact
    kernel of the weighted stiffness, so the smallest positive eigenvalue of
    (A, M) is the constrained minimum.  ``boundary`` overrides the distance
    polyline (defaults to the mesh boundary); ``degree`` selects the field
    space (1 by default, 2 optional).
    """
    _check_alpha(alpha)
    history = []
    current = mesh
    for lv in range(levels):
        if boundary is None:
            seg_a, seg_b = _boundary_segments(current)
        else:
            seg_a, seg_b = boundary
        A, M = _p1_matrices(current, alpha, seg_a, seg_b, degree)
        vals = _smallest_eigs(A, M)
        if abs(vals[0]) > 1e-6 * max(1.0, vals[-1]):
            raise EigenError(f"constant mode missing from spectrum: {vals}")
        history.append(math.sqrt(_first_positive(vals)))
        if lv + 1 < levels:
            current = refine(current)
    return PoincareEstimate("mu", alpha, history[-1], levels - 1, history,
                            _converged(history))


def _converged(history) -> bool:
    if len(history) < 2:
        return False
    return abs(history[-1] - history[-2]) <= 0.02 * abs(history[-1])


def _check_alpha(alpha: float) -> None:
    if alpha not in (0.0, 0.5, 1.0):
        raise ValueError("alpha must be one of 0, 1/2, 1")


# ---------------------------------------------------------------------------
# eta
# ---------------------------------------------------------------------------

def _gamma1_node_normals(mesh: TaggedMesh, dofmap) -> dict:
    """node id -> list of incident GAMMA1 unit normals (midpoints included)."""
    rows = np.flatnonzero(mesh.boundary_tags == GAMMA1)
    normals = mesh.boundary_normals()[rows]
    edges = mesh.boundary_edges[rows]
    out: dict[int, list] = {}
    for (a, b), nu in zip(edges.tolist(), normals):
        nodes = [int(a), int(b)]
        if dofmap.degree == 2:
            nodes.append(dofmap.edge_nodes[tuple(sorted((int(a), int(b))))])
        for v in nodes:
            lst = out.setdefault(v, [])
            if not any(abs(nu @ e) > 1 - 1e-12 for e in lst):
                lst.append(nu)
    return out


def _constraint_basis(mesh: TaggedMesh, span: SpanInfo, drop_constraint: bool,
                      dofmap) -> sp.csr_matrix:
    """Sparse basis Z of the admissible vector subspace (dof = 2*node+comp)."""
    n = dofmap.n_dofs
    if span.k == 0:
        raise ValueError("eta needs a nonempty GAMMA1 (k >= 1); use mu_estimate")
    S = span.basis.T                      # (2, k) columns span the value space
    node_normals = {} if drop_constraint else _gamma1_node_normals(mesh, dofmap)
    cols, rows, vals = [], [], []
    ncol = 0
    for v in range(n):
        C = np.array([S.T @ nu for nu in node_normals.get(v, [])])
        if len(C) == 0:
            D = np.eye(span.k)
        else:
            _, s, vt = np.linalg.svd(C, full_matrices=True)
            rank = int(np.sum(s > 1e-12))
            D = vt[rank:].T               # (k, k-rank) null-space basis
        B = S @ D                         # (2, nfree) directions at this node
        for j in range(B.shape[1]):
            rows.extend((2 * v, 2 * v + 1))
            cols.extend((ncol, ncol))
            vals.extend((B[0, j], B[1, j]))
            ncol += 1
    return sp.coo_matrix((vals, (rows, cols)), shape=(2 * n, ncol)).tocsr()


def eta_estimate(mesh: TaggedMesh, partition: BoundaryPartition, span: SpanInfo,
                 alpha: float, levels: int = 1, drop_constraint: bool = False,
                 degree: int = 1) -> PoincareEstimate:
    """Constrained vector-field constant; weight measures distance to GAMMA0.

    ``drop_constraint`` removes the <v, nu> = 0 nodal conditions (ablation:
    constants become admissible and the smallest eigenvalue collapses to 0);
    ``degree`` selects the field space (1 by default, 2 optional).
    """
    from .fem import build_dofmap

    _check_alpha(alpha)
    history = []
    current = mesh
    seg_a0, seg_b0 = partition.gamma0.segments()
    for lv in range(levels):
        A, M = _p1_matrices(current, alpha, seg_a0, seg_b0, degree)
        A2 = sp.kron(A, sp.identity(2), format="csr")
        M2 = sp.kron(M, sp.identity(2), format="csr")
        Z = _constraint_basis(current, span, drop_constraint,
                              build_dofmap(current, degree))
        Ar = (Z.T @ A2 @ Z).tocsc()
        Mr = (Z.T @ M2 @ Z).tocsc()
        vals = _smallest_eigs(Ar, Mr)
        if drop_constraint:
            history.append(math.sqrt(max(vals[0], 0.0)))
        else:
            lam0 = vals[0]
            if lam0 <= 0:
                if lam0 < -1e-10 * max(1.0, vals[-1]):
                    raise EigenError(f"negative leading eigenvalue: {vals}")
                lam0 = _first_positive(vals)
            history.append(math.sqrt(lam0))
        if lv + 1 < levels:
            current = refine(current)
    return PoincareEstimate("eta", alpha, history[-1], levels - 1, history,
                            _converged(history))


def eta_ablation_eigenvalue(mesh: TaggedMesh, partition: BoundaryPartition,
                            span: SpanInfo, alpha: float = 0.0) -> float:
    """Smallest raw eigenvalue with the GAMMA1 constraint removed (~0)."""
    from .fem import build_dofmap

    seg_a0, seg_b0 = partition.gamma0.segments()
    A, M = _p1_matrices(mesh, alpha, seg_a0, seg_b0)
    A2 = sp.kron(A, sp.identity(2), format="csr")
    M2 = sp.kron(M, sp.identity(2), format="csr")
    Z = _constraint_basis(mesh, span, True, build_dofmap(mesh, 1))
    vals = _smallest_eigs((Z.T @ A2 @ Z).tocsc(), (Z.T @ M2 @ Z).tocsc())
    return float(vals[0])


# ---------------------------------------------------------------------------
# constants assembly
# ---------------------------------------------------------------------------

def _value(est) -> float:
    return est.value if isinstance(est, PoincareEstimate) else float(est)


def lambda_constant(k: int, mu=None, eta=None, N: int = 2) -> float:
    """Combine mu/eta into the k-dependent constant of the stability bound."""
    if k == 0:
        if mu is None:
            raise ValueError("k = 0 needs mu")
        return 1.0 / _value(mu)
    if k == N:
        if eta is None:
            raise ValueError(f"k = N = {N} needs eta")
        return 1.0 / _value(eta)
    if mu is None or eta is None:
        raise ValueError("1 <= k <= N-1 needs both mu and eta")
    return max(1.0 / _value(mu), 1.0 / _value(eta))


def theorem_constant(m: float, lam: float, N: int = 2) -> float:
    """(2 N Lambda^2 + 3) / (2 m), the explicit stability constant."""
    if m <= 0:
        raise ValueError("flux lower bound m must be positive")
    return (2.0 * N * lam**2 + 3.0) / (2.0 * m)


def admissible_exponents(r: float, p: float, alpha: float, N: int = 2) -> bool:
    """Bookkeeping check 1 <= p <= r <= Np/(N - p(1-alpha)), p(1-alpha) < N."""
    if not (1 <= p <= r) or not (0 <= alpha <= 1):
        return False
    if p * (1 - alpha) >= N:
        return False
    return r <= N * p / (N - p * (1 - alpha))


# ---------------------------------------------------------------------------
# the mixed gradient inequality check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GradientPoincareCheck:
    lhs: float        # ||grad h||_L2
    rhs: float        # ||d^alpha D2 h||_L2
    lam: float        # Lambda_{2,alpha}(k)
    margin: float     # lam*rhs - lhs (>= 0 when the inequality holds)


def grad_l2(field: FemField) -> float:
    return math.sqrt(field.energy())


def weighted_hessian_l2(field: FemField, alpha: float,
                        partition: BoundaryPartition) -> float:
    """|| d(., GAMMA0)^alpha D^2 field ||_L2 with element-wise Hessians."""
    H = field.element_hessians()
    frob2 = np.einsum("exy,exy->e", H, H)
    mesh = field.mesh
    V, T = mesh.vertices, mesh.triangles
    p0, p1, p2 = V[T[:, 0]], V[T[:, 1]], V[T[:, 2]]
    seg_a, seg_b = partition.gamma0.segments()
    areas = field._areas
    total = 0.0
    for lam, w in zip(TRI_POINTS, TRI_WEIGHTS):
        if alpha == 0.0:
            wt = 1.0
        else:
            xy = lam[0] * p0 + lam[1] * p1 + lam[2] * p2
            wt = polyline_distance(xy, seg_a, seg_b) ** (2.0 * alpha)
        total += w * float(np.sum(areas * wt * frob2))
    return math.sqrt(total)


def mixed_gradient_poincare_check(h: FemField, span: SpanInfo, mu, eta,
                                  alpha: float,
                                  partition: BoundaryPartition) -> GradientPoincareCheck:
    """Verify ||grad h|| <= Lambda_{2,alpha}(k) ||d^alpha D^2 h|| numerically."""
    lam = lambda_constant(span.k, mu, eta)
    lhs = grad_l2(h)
    rhs = weighted_hessian_l2(h, alpha, partition)
    return GradientPoincareCheck(lhs, rhs, lam, lam * rhs - lhs)

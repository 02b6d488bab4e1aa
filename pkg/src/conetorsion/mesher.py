"""Conforming boundary-tagged triangulations of sector domains.

Meshes are built deterministically from polar rings: ring j carries j*q
angular intervals (q wedges meet at the cone vertex), consecutive rings are
joined by zigzag strips, and every node is mapped by
(rho, t) -> rho * r(t) * (cos t, sin t).  Boundary vertices therefore lie on
the analytic boundary exactly; uniform refinement re-projects new GAMMA0
vertices onto the graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import DomainSpec

GAMMA0 = 0
GAMMA1 = 1
TAG_NAMES = {GAMMA0: "GAMMA0", GAMMA1: "GAMMA1"}


class MeshError(RuntimeError):
    """Mesh generation failed (degenerate spec or unattainable target)."""


@dataclass(frozen=True)
class TaggedMesh:
    """Triangulation with oriented, tagged boundary edges.

    Triangles are positively oriented; boundary edges are directed so the
    interior lies on their left (outward normal = rotate(-90) of the edge).
    ``spec`` carries the analytic boundary for re-projection, when known.
    """

    vertices: np.ndarray        # (nv, 2)
    triangles: np.ndarray       # (nt, 3) int
    boundary_edges: np.ndarray  # (nb, 2) int, directed
    boundary_tags: np.ndarray   # (nb,) int
    spec: DomainSpec | None = None

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def edge_vectors(self):
        v, t = self.vertices, self.triangles
        return v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 1]], v[t[:, 0]] - v[t[:, 2]]

    @property
    def areas(self) -> np.ndarray:
        e01, _, e20 = self.edge_vectors()
        return 0.5 * (e01[:, 0] * (-e20[:, 1]) - e01[:, 1] * (-e20[:, 0]))

    @property
    def h_max(self) -> float:
        return float(max(np.linalg.norm(e, axis=1).max() for e in self.edge_vectors()))

    @property
    def min_angle(self) -> float:
        """Smallest interior angle over all triangles, degrees."""
        v, t = self.vertices, self.triangles
        best = 180.0
        for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            u = v[t[:, j]] - v[t[:, i]]
            w = v[t[:, k]] - v[t[:, i]]
            c = np.einsum("ij,ij->i", u, w) / (
                np.linalg.norm(u, axis=1) * np.linalg.norm(w, axis=1))
            best = min(best, float(np.degrees(np.arccos(np.clip(c, -1, 1))).min()))
        return best

    def boundary_normals(self) -> np.ndarray:
        d = self.vertices[self.boundary_edges[:, 1]] - self.vertices[self.boundary_edges[:, 0]]
        n = np.stack([d[:, 1], -d[:, 0]], axis=1)
        return n / np.linalg.norm(n, axis=1)[:, None]

    def boundary_lengths(self) -> np.ndarray:
        d = self.vertices[self.boundary_edges[:, 1]] - self.vertices[self.boundary_edges[:, 0]]
        return np.linalg.norm(d, axis=1)

    def gamma0_edges(self) -> np.ndarray:
        return self.boundary_edges[self.boundary_tags == GAMMA0]

    def gamma1_edges(self) -> np.ndarray:
        return self.boundary_edges[self.boundary_tags == GAMMA1]

    def rotated(self, phi: float) -> "TaggedMesh":
        c, s = math.cos(phi), math.sin(phi)
        R = np.array([[c, -s], [s, c]])
        spec = self.spec.rotated(phi) if self.spec is not None else None
        return replace(self, vertices=self.vertices @ R.T, spec=spec)


def _ring_mesh(spec: DomainSpec, n: int):
    """Vertices/triangles of the polar ring construction with n rings."""
    beta = spec.beta
    full = spec.cone.is_full_plane
    q = max(1, int(round(beta / (math.pi / 3))))
    verts = [(0.0, 0.0)]
    rings = [[0]]
    for j in range(1, n + 1):
        m = j * q
        npts = m if full else m + 1
        ts = np.arange(npts) * (beta / m)
        rho = j / n
        r = rho * np.asarray(spec.radius_fn(ts), dtype=float)
        start = len(verts)
        verts.extend(zip(r * np.cos(ts), r * np.sin(ts)))
        rings.append(list(range(start, start + npts)))
    tris = []
    ring1 = rings[1]
    for i in range(q):
        b = ring1[(i + 1) % len(ring1)] if full else ring1[i + 1]
        tris.append((0, ring1[i], b))
    for j in range(1, n):
        inner, outer = rings[j], rings[j + 1]

        def at(ring, i):
            return ring[i % len(ring)] if full else ring[i]

        for w in range(q):
            i0, o0 = w * j, w * (j + 1)
            ic = oc = 0
            while ic < j or oc < j + 1:
                ti = (ic + 1) / j if j > 0 else 1.0
                to = (oc + 1) / (j + 1)
                if oc < j + 1 and (ic >= j or to <= ti):
                    tris.append((at(inner, i0 + ic), at(outer, o0 + oc),
                                 at(outer, o0 + oc + 1)))
                    oc += 1
                else:
                    tris.append((at(inner, i0 + ic), at(outer, o0 + oc),
                                 at(inner, i0 + ic + 1)))
                    ic += 1
    V = np.asarray(verts, dtype=float)
    T = np.asarray(tris, dtype=np.int64)
    e1 = V[T[:, 1]] - V[T[:, 0]]
    e2 = V[T[:, 2]] - V[T[:, 0]]
    flip = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0] < 0
    T[flip] = T[flip][:, [0, 2, 1]]
    return V, T


def boundary_edges_of(triangles: np.ndarray) -> np.ndarray:
    """Directed edges owned by exactly one triangle, in triangle orientation."""
    t = triangles
    edges = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    keys = np.sort(edges, axis=1)
    order = np.lexsort((keys[:, 1], keys[:, 0]))
    sk = keys[order]
    same_next = np.zeros(len(sk), dtype=bool)
    same_next[:-1] = np.all(sk[:-1] == sk[1:], axis=1)
    same_prev = np.zeros(len(sk), dtype=bool)
    same_prev[1:] = same_next[:-1]
    single = ~(same_next | same_prev)
    return edges[order[single]]


def _tag_edges(spec: DomainSpec, vertices: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """GAMMA1 iff both endpoints sit on the same cone leg (origin on both)."""
    if spec.cone.is_full_plane:
        return np.full(len(edges), GAMMA0, dtype=np.int64)
    beta = spec.beta
    pts = vertices
    scale = float(np.max(np.linalg.norm(pts, axis=1)))
    tol = 1e-9 * scale

    def on_leg0(p):
        return abs(p[1]) <= tol and p[0] >= -tol

    leg1_dir = np.array([math.cos(beta), math.sin(beta)])

    def on_leg1(p):
        return abs(p[0] * leg1_dir[1] - p[1] * leg1_dir[0]) <= tol and p @ leg1_dir >= -tol

    tags = np.full(len(edges), GAMMA0, dtype=np.int64)
    for i, (a, b) in enumerate(edges):
        pa, pb = pts[a], pts[b]
        if (on_leg0(pa) and on_leg0(pb)) or (on_leg1(pa) and on_leg1(pb)):
            tags[i] = GAMMA1
    return tags


def triangulate(spec: DomainSpec, h_target: float) -> TaggedMesh:
    """Conforming tagged mesh with h_max <= 1.5 * h_target.

    The ring count is increased deterministically until the target is met;
    boundary vertices land on the analytic boundary by construction.
    """
    from .geometry import domain_diameter

    if h_target <= 0:
        raise MeshError("h_target must be positive")
    if h_target >= domain_diameter(spec):
        raise MeshError("h_target must be smaller than the domain diameter")
    r_max = float(np.max(spec.radius_fn(spec.gamma0_angles())))
    n = max(2, math.ceil(r_max / h_target))
    for _ in range(8):
        V, T = _ring_mesh(spec, n)
        mesh = _finalize(spec, V, T)
        if mesh.h_max <= 1.5 * h_target:
            return mesh
        n = math.ceil(n * mesh.h_max / (1.4 * h_target))
    raise MeshError("could not reach the mesh-size target")


def _finalize(spec: DomainSpec | None, V: np.ndarray, T: np.ndarray) -> TaggedMesh:
    edges = boundary_edges_of(T)
    if spec is not None:
        tags = _tag_edges(spec, V, edges)
    else:
        tags = np.full(len(edges), GAMMA0, dtype=np.int64)
    areas_ok = np.all(_areas(V, T) > 0)
    if not areas_ok:
        raise MeshError("degenerate (inverted) triangles produced")
    return TaggedMesh(V, T, edges, tags, spec)


def _areas(V, T):
    e1 = V[T[:, 1]] - V[T[:, 0]]
    e2 = V[T[:, 2]] - V[T[:, 0]]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def refine(mesh: TaggedMesh) -> TaggedMesh:
    """Regular 1->4 refinement; new GAMMA0 vertices projected onto the graph."""
    V, T = mesh.vertices, mesh.triangles
    nv = len(V)
    pairs = np.concatenate([T[:, [0, 1]], T[:, [1, 2]], T[:, [2, 0]]])
    keys = np.sort(pairs, axis=1)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    mid = 0.5 * (V[uniq[:, 0]] + V[uniq[:, 1]])

    if mesh.spec is not None and np.any(mesh.boundary_tags == GAMMA0):
        g0 = set(map(tuple, np.sort(mesh.gamma0_edges(), axis=1).tolist()))
        idx = [i for i, row in enumerate(map(tuple, uniq.tolist())) if row in g0]
        mid[idx] = mesh.spec.project_to_gamma0(mid[idx])

    newV = np.vstack([V, mid])
    m = nv + inverse.reshape(3, -1).T        # midpoints of (01, 12, 20) per tri
    t0, t1, t2 = T[:, 0], T[:, 1], T[:, 2]
    m01, m12, m20 = m[:, 0], m[:, 1], m[:, 2]
    newT = np.concatenate([
        np.stack([t0, m01, m20], axis=1),
        np.stack([t1, m12, m01], axis=1),
        np.stack([t2, m20, m12], axis=1),
        np.stack([m01, m12, m20], axis=1),
    ])
    new_mesh = _finalize(mesh.spec, newV, newT)
    if mesh.spec is None:
        # inherit the parent's tags: the midpoint endpoint identifies the parent
        parent_tag = {tuple(k): int(tag) for k, tag in
                      zip(np.sort(mesh.boundary_edges, axis=1).tolist(),
                          mesh.boundary_tags)}
        tags = new_mesh.boundary_tags.copy()
        for i, (a, b) in enumerate(new_mesh.boundary_edges):
            mid_id = a if a >= nv else b
            key = tuple(sorted(uniq[mid_id - nv].tolist()))
            tags[i] = parent_tag[key]
        new_mesh = replace(new_mesh, boundary_tags=tags)
    return new_mesh


def rectangle_mesh(nx: int, ny: int, width: float = 1.0, height: float = 1.0) -> TaggedMesh:
    """Structured right-triangle mesh of [0,width]x[0,height]; all edges GAMMA0."""
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    V = np.stack([X.ravel(), Y.ravel()], axis=1)

    def vid(i, j):
        return i * (ny + 1) + j

    tris = []
    for i in range(nx):
        for j in range(ny):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            tris.append((a, b, c))
            tris.append((a, c, d))
    return _finalize(None, V, np.asarray(tris, dtype=np.int64))


# ---------------------------------------------------------------------------
# plain-text export
# ---------------------------------------------------------------------------

def write_mesh(mesh: TaggedMesh, path) -> None:
    """Sections VERTICES / TRIANGLES / BOUNDARY_EDGES, one record per line."""
    with open(path, "w", encoding="ascii") as f:
        f.write(f"VERTICES {mesh.n_vertices}\n")
        for x, y in mesh.vertices:
            f.write(f"{x:.17g} {y:.17g}\n")
        f.write(f"TRIANGLES {mesh.n_triangles}\n")
        for a, b, c in mesh.triangles:
            f.write(f"{a} {b} {c}\n")
        f.write(f"BOUNDARY_EDGES {len(mesh.boundary_edges)}\n")
        for (a, b), tag in zip(mesh.boundary_edges, mesh.boundary_tags):
            f.write(f"{a} {b} {TAG_NAMES[int(tag)]}\n")


def read_mesh(path) -> TaggedMesh:
    with open(path, "r", encoding="ascii") as f:
        lines = [ln.strip() for ln in f if ln.strip()]
    i = 0

    def section(name):
        nonlocal i
        head = lines[i].split()
        if head[0] != name:
            raise MeshError(f"expected section {name}, got {lines[i]!r}")
        count = int(head[1])
        rows = lines[i + 1:i + 1 + count]
        i += 1 + count
        return rows

    verts = np.array([[float(w) for w in ln.split()] for ln in section("VERTICES")])
    tris = np.array([[int(w) for w in ln.split()] for ln in section("TRIANGLES")],
                    dtype=np.int64)
    name_to_tag = {v: k for k, v in TAG_NAMES.items()}
    rows = section("BOUNDARY_EDGES")
    edges = np.array([[int(ln.split()[0]), int(ln.split()[1])] for ln in rows],
                     dtype=np.int64)
    tags = np.array([name_to_tag[ln.split()[2]] for ln in rows], dtype=np.int64)
    return TaggedMesh(verts, tris, edges, tags, None)

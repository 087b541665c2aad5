"""Conforming tetrahedral meshes with region and face tagging.

A mesh partitions the computational box D into elastic, acoustic, and
absorbing-layer (PML) cells.  Faces are tagged by what they separate:

* ``FaceTag.INTERFACE``  solid surface, elastic cell on one side only
* ``FaceTag.PML_INNER``  boundary between acoustic and PML cells
* ``FaceTag.OUTER``      boundary of D
* ``FaceTag.NONE``       any other interior face

Refinement is newest-vertex bisection in Maubach's tagged form: every
tetrahedron stores an ordered vertex tuple and a tag d in {1,2,3}; its
refinement edge joins slots 0 and d.  Structured box meshes are built from
translated Kuhn cubes (six tetrahedra sharing the main diagonal), whose
canonical tagging keeps uniform bisection conforming without closure.
Imported meshes get longest-edge initial tags.

Stored face normals follow fixed orientation conventions: interface normals
point from the elastic into the non-elastic side, PML inner-boundary normals
point from the acoustic into the layer side, boundary normals point outward,
and every interior normal points from the second adjacent cell into the
first.
"""

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np


class Region(IntEnum):
    ELASTIC = 0
    ACOUSTIC = 1
    PML = 2


class FaceTag(IntEnum):
    NONE = 0
    INTERFACE = 1   # solid surface (elastic | non-elastic)
    PML_INNER = 2   # acoustic | PML
    OUTER = 3       # boundary of D


class MeshError(ValueError):
    """Invalid mesh topology, geometry, or tagging."""


@dataclass(frozen=True)
class Box:
    """Open axis-aligned box used to compose region predicates."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        if len(self.lo) != 3 or len(self.hi) != 3:
            raise ValueError("Box bounds must have three entries")
        if any(a >= b for a, b in zip(self.lo, self.hi)):
            raise ValueError(f"degenerate box: lo={self.lo} hi={self.hi}")

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        lo = np.array(self.lo)
        hi = np.array(self.hi)
        return np.all((pts > lo) & (pts < hi), axis=-1)


@dataclass(frozen=True)
class RegionClassifier:
    """Closed-form region membership from axis-aligned box set operations.

    A point is elastic when it lies in one of ``elastic_boxes`` but in none
    of ``elastic_holes``; otherwise it is PML when ``pml_inner`` is given and
    the point lies outside it; otherwise acoustic.  The predicates partition
    the computational box.
    """

    elastic_boxes: tuple = ()
    elastic_holes: tuple = ()
    pml_inner: Box | None = None

    def classify(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        shape = pts.shape[:-1]
        out = np.full(shape, int(Region.ACOUSTIC), dtype=np.int8)
        if self.pml_inner is not None:
            out[~self.pml_inner.contains(pts)] = int(Region.PML)
        if self.elastic_boxes:
            inside = np.zeros(shape, dtype=bool)
            for box in self.elastic_boxes:
                inside |= box.contains(pts)
            for hole in self.elastic_holes:
                inside &= ~hole.contains(pts)
            out[inside] = int(Region.ELASTIC)
        return out


_MAUBACH_INIT_TAG = 3  # fresh tetrahedra bisect the slot-0/slot-3 edge first


class TetMesh:
    """Immutable conforming tetrahedral mesh with regions and tagged faces.

    Parameters
    ----------
    vertices : (nv, 3) float array
    tagged : (nt, 4) int array
        Vertex indices in bisection order (slot 0 and slot ``tag_d`` span the
        refinement edge).
    region : (nt,) array of :class:`Region` values
    tag_d : (nt,) int array or None
        Maubach tags; None assigns longest-edge initial tags (reordering
        ``tagged`` so the longest edge occupies slots 0 and 3).

    The publicly visible ``tets`` array is reordered per element so signed
    volumes are positive; ``tagged`` keeps the bisection ordering.
    """

    def __init__(self, vertices, tagged, region, tag_d=None, _validate=True):
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        tagged = np.ascontiguousarray(tagged, dtype=np.int64)
        self.region = np.ascontiguousarray(region, dtype=np.int8)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise MeshError("vertices must be (nv, 3)")
        if tagged.ndim != 2 or tagged.shape[1] != 4:
            raise MeshError("tets must be (nt, 4)")
        if self.region.shape != (tagged.shape[0],):
            raise MeshError("region must have one entry per tet")
        if tagged.size and (tagged.min() < 0 or tagged.max() >= len(self.vertices)):
            raise MeshError("tet vertex index out of range")
        if not np.isin(self.region, [int(r) for r in Region]).all():
            raise MeshError("unknown region tag")

        if tag_d is None:
            tagged = self._longest_edge_order(tagged)
            tag_d = np.full(len(tagged), _MAUBACH_INIT_TAG, dtype=np.int8)
        self.tagged = tagged
        self.tag_d = np.ascontiguousarray(tag_d, dtype=np.int8)

        self.tets = self._oriented(tagged)
        if _validate:
            self._check_volumes()
        self._build_faces()

    # -- construction helpers -------------------------------------------------

    def _longest_edge_order(self, tagged):
        if not len(tagged):
            return tagged
        v = self.vertices[tagged]  # (nt, 4, 3)
        pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        d2 = np.stack([((v[:, a] - v[:, b]) ** 2).sum(axis=1) for a, b in pairs], axis=1)
        # ties broken toward the lexicographically first pair for determinism
        longest = d2.argmax(axis=1)
        out = np.empty_like(tagged)
        for k, (a, b) in enumerate(pairs):
            rows = longest == k
            rest = [i for i in range(4) if i not in (a, b)]
            out[rows, 0] = tagged[rows, a]
            out[rows, 3] = tagged[rows, b]
            out[rows, 1] = tagged[rows, rest[0]]
            out[rows, 2] = tagged[rows, rest[1]]
        return out

    def _oriented(self, tagged):
        tets = tagged.copy()
        if len(tets):
            neg = self._signed_volumes(tets) < 0.0
            tets[neg, 1], tets[neg, 2] = tagged[neg, 2], tagged[neg, 1]
        return tets

    def _signed_volumes(self, tets):
        v = self.vertices[tets]
        e = v[:, 1:, :] - v[:, :1, :]
        return np.linalg.det(e) / 6.0

    def _check_volumes(self):
        if len(self.tets):
            vols = self._signed_volumes(self.tets)
            if not (vols > 0.0).all():
                bad = int(np.argmin(vols))
                raise MeshError(f"degenerate tet {bad}: volume {vols[bad]:.3e}")

    def _build_faces(self):
        nt = len(self.tets)
        # local faces opposite each vertex
        local = np.array([[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]])
        all_faces = self.tets[:, local].reshape(-1, 3)
        all_faces.sort(axis=1)
        owner = np.repeat(np.arange(nt), 4)
        faces, inverse, counts = np.unique(
            all_faces, axis=0, return_inverse=True, return_counts=True
        )
        if counts.size and counts.max() > 2:
            raise MeshError("non-conforming mesh: a face is shared by more than two tets")
        nf = len(faces)
        face_tets = np.full((nf, 2), -1, dtype=np.int64)
        order = np.argsort(inverse, kind="stable")
        sorted_owner = owner[order]
        sorted_face = inverse[order]
        first = np.searchsorted(sorted_face, np.arange(nf), side="left")
        face_tets[:, 0] = sorted_owner[first]
        second = counts == 2
        face_tets[second, 1] = sorted_owner[first[second] + 1]

        tag = np.full(nf, int(FaceTag.NONE), dtype=np.int8)
        boundary = face_tets[:, 1] < 0
        tag[boundary] = int(FaceTag.OUTER)
        r1 = self.region[face_tets[:, 0]]
        r2 = np.where(boundary, r1, self.region[np.where(boundary, 0, face_tets[:, 1])])
        interior = ~boundary
        elastic_side = (r1 == Region.ELASTIC).astype(np.int8) + (r2 == Region.ELASTIC)
        if np.any(
            interior
            & (elastic_side == 1)
            & ((r1 == Region.PML) | (r2 == Region.PML))
        ):
            raise MeshError("elastic tet adjacent to a PML tet: solid must stay inside B")
        tag[interior & (elastic_side == 1)] = int(FaceTag.INTERFACE)
        is_b = interior & (
            ((r1 == Region.ACOUSTIC) & (r2 == Region.PML))
            | ((r1 == Region.PML) & (r2 == Region.ACOUSTIC))
        )
        tag[is_b] = int(FaceTag.PML_INNER)

        # adjacency order fixes the stored normal: nu points from slot 1 into
        # slot 0 (interface: elastic in slot 1; PML inner: acoustic in slot 1)
        swap = np.zeros(nf, dtype=bool)
        swap |= (tag == FaceTag.INTERFACE) & (self.region[face_tets[:, 0]] == Region.ELASTIC)
        swap |= (tag == FaceTag.PML_INNER) & (self.region[face_tets[:, 0]] == Region.PML)
        none_rows = (tag == FaceTag.NONE) & interior
        swap |= none_rows & (face_tets[:, 0] > np.where(boundary, -1, face_tets[:, 1]))
        face_tets[swap] = face_tets[swap][:, ::-1]

        corners = self.vertices[faces]
        e1 = corners[:, 1] - corners[:, 0]
        e2 = corners[:, 2] - corners[:, 0]
        normal = np.cross(e1, e2)
        area2 = np.linalg.norm(normal, axis=1)
        if np.any(area2 <= 0.0):
            raise MeshError("degenerate face")
        normal /= area2[:, None]
        centroid = corners.mean(axis=1)
        k1_bary = self.vertices[self.tets[face_tets[:, 0]]].mean(axis=1)
        toward_k1 = np.einsum("fx,fx->f", normal, k1_bary - centroid)
        flip = np.where(boundary, toward_k1 > 0.0, toward_k1 < 0.0)
        normal[flip] *= -1.0

        edges = np.stack(
            [
                np.linalg.norm(e1, axis=1),
                np.linalg.norm(e2, axis=1),
                np.linalg.norm(corners[:, 2] - corners[:, 1], axis=1),
            ],
            axis=1,
        )

        self.faces = faces
        self.face_tets = face_tets
        self.face_tag = tag
        self.face_normal = normal
        self.face_area = 0.5 * area2
        self.face_diameter = edges.max(axis=1)

    # -- queries ---------------------------------------------------------------

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_tets(self) -> int:
        return len(self.tets)

    @property
    def refinement_edges(self) -> np.ndarray:
        """(nt, 2) vertex pairs bisected next, per Maubach tags."""
        rows = np.arange(len(self.tagged))
        return np.stack([self.tagged[:, 0], self.tagged[rows, self.tag_d]], axis=1)

    def volumes(self) -> np.ndarray:
        return self._signed_volumes(self.tets)

    def barycenters(self) -> np.ndarray:
        return self.vertices[self.tets].mean(axis=1)

    def diameters(self) -> np.ndarray:
        """Per-tet diameter (longest edge length)."""
        v = self.vertices[self.tets]
        pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        d2 = np.stack([((v[:, a] - v[:, b]) ** 2).sum(axis=1) for a, b in pairs], axis=1)
        return np.sqrt(d2.max(axis=1))

    def min_dihedral_angle(self) -> float:
        """Smallest dihedral angle over all tets, in radians."""
        v = self.vertices[self.tets]
        local = np.array([[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]])
        normals = np.empty((len(self.tets), 4, 3))
        for k in range(4):
            a, b, c = (v[:, i] for i in local[k])
            n = np.cross(b - a, c - a)
            n /= np.linalg.norm(n, axis=1)[:, None]
            # orient outward (away from the opposite vertex)
            inward = np.einsum("tx,tx->t", n, v[:, k] - a) > 0.0
            n[inward] *= -1.0
            normals[:, k] = n
        worst = 1.0
        for i in range(4):
            for j in range(i + 1, 4):
                cosang = -np.einsum("tx,tx->t", normals[:, i], normals[:, j])
                worst = min(worst, cosang.min())
        # worst tracks the smallest cosine? dihedral angle theta has
        # cos(theta) = -n_i . n_j; the smallest angle maximizes the cosine
        cmax = -1.0
        for i in range(4):
            for j in range(i + 1, 4):
                cosang = -np.einsum("tx,tx->t", normals[:, i], normals[:, j])
                cmax = max(cmax, float(cosang.max()))
        return float(np.arccos(np.clip(cmax, -1.0, 1.0)))

    def region_volumes(self) -> dict:
        vols = self.volumes()
        return {r.name: float(vols[self.region == r].sum()) for r in Region}

    def faces_with_tag(self, tag: FaceTag) -> np.ndarray:
        return np.flatnonzero(self.face_tag == int(tag))

    def validate(self):
        """Run the full invariant suite; raises MeshError on violation."""
        self._check_volumes()
        recomputed = classify_faces(self)
        if not np.array_equal(recomputed, self.face_tag):
            raise MeshError("stored face tags disagree with region adjacency")
        gs = self.face_tag == FaceTag.INTERFACE
        if gs.any():
            r1 = self.region[self.face_tets[gs, 0]]
            r2 = self.region[self.face_tets[gs, 1]]
            if np.any(r1 == Region.ELASTIC) or np.any(r2 != Region.ELASTIC):
                raise MeshError("interface face adjacency order violated")
        return self


def classify_faces(mesh: TetMesh) -> np.ndarray:
    """Recompute face tags of ``mesh`` from region adjacency and boundary.

    Returns the per-face tag array in the mesh's face ordering; raises on a
    forbidden elastic/PML adjacency.  Construction already stores this
    information; the function re-derives it for verification.
    """
    boundary = mesh.face_tets[:, 1] < 0
    tag = np.full(len(mesh.faces), int(FaceTag.NONE), dtype=np.int8)
    tag[boundary] = int(FaceTag.OUTER)
    r1 = mesh.region[mesh.face_tets[:, 0]]
    r2 = np.where(boundary, r1, mesh.region[np.where(boundary, 0, mesh.face_tets[:, 1])])
    interior = ~boundary
    n_elastic = (r1 == Region.ELASTIC).astype(np.int8) + (r2 == Region.ELASTIC)
    if np.any(interior & (n_elastic == 1) & ((r1 == Region.PML) | (r2 == Region.PML))):
        raise MeshError("elastic tet adjacent to a PML tet")
    tag[interior & (n_elastic == 1)] = int(FaceTag.INTERFACE)
    b = interior & (n_elastic == 0) & (r1 != r2)
    tag[b] = int(FaceTag.PML_INNER)
    return tag


# -- structured generation ------------------------------------------------------

# vertex paths of the six Kuhn tetrahedra of a unit cube: each walks from the
# origin corner to the far corner adding one unit vector at a time
_KUHN_PATHS = [
    (0, 1, 2),
    (0, 2, 1),
    (1, 0, 2),
    (1, 2, 0),
    (2, 0, 1),
    (2, 1, 0),
]


def generate_box_mesh(outer_box, h: float, classifier: RegionClassifier) -> TetMesh:
    """Structured mesh of an axis-aligned box: cubes of edge h, six tets each.

    Every cube carries the same translated Kuhn split, so all six tetrahedra
    share the cube diagonal as their initial refinement edge and uniform
    bisection stays conforming.  Region interfaces of ``classifier`` must
    align with the grid; each tet is checked by classifying its barycenter
    and its four vertices (nudged toward the barycenter so points lying on an
    interface plane resolve to the cell's side).
    """
    if not h > 0.0:
        raise MeshError(f"grid spacing must be positive, got {h}")
    lo = np.array([float(b[0]) for b in outer_box])
    hi = np.array([float(b[1]) for b in outer_box])
    if np.any(hi - lo <= 0.0):
        raise MeshError(f"degenerate outer box: lo={lo.tolist()} hi={hi.tolist()}")
    counts = (hi - lo) / h
    n = np.rint(counts).astype(int)
    if np.any(n < 1) or np.any(np.abs(counts - n) > 1e-9 * np.maximum(1, n)):
        raise MeshError(f"box extents {(hi - lo).tolist()} are not multiples of h={h}")

    axes = [np.linspace(lo[j], hi[j], n[j] + 1) for j in range(3)]
    X, Y, Z = np.meshgrid(*axes, indexing="ij")
    vertices = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])

    def vid(i, j, k):
        return (i * (n[1] + 1) + j) * (n[2] + 1) + k

    I, J, K = np.meshgrid(*(np.arange(m) for m in n), indexing="ij")
    base = np.stack([I.ravel(), J.ravel(), K.ravel()], axis=1)  # (ncubes, 3)
    ncubes = len(base)
    tagged = np.empty((ncubes * 6, 4), dtype=np.int64)
    for p, path in enumerate(_KUHN_PATHS):
        corner = base.copy()
        ids = [vid(corner[:, 0], corner[:, 1], corner[:, 2])]
        for axis in path:
            corner = corner.copy()
            corner[:, axis] += 1
            ids.append(vid(corner[:, 0], corner[:, 1], corner[:, 2]))
        tagged[p::6] = np.stack(ids, axis=1)

    region = _classify_tets(vertices, tagged, classifier)
    return TetMesh(vertices, tagged, region, tag_d=np.full(len(tagged), 3, dtype=np.int8))


def _classify_tets(vertices, tagged, classifier: RegionClassifier) -> np.ndarray:
    corners = vertices[tagged]  # (nt, 4, 3)
    bary = corners.mean(axis=1)
    region = classifier.classify(bary)
    nudged = corners + (bary[:, None, :] - corners) / 16.0
    for k in range(4):
        rk = classifier.classify(nudged[:, k])
        bad = rk != region
        if np.any(bad):
            t = int(np.flatnonzero(bad)[0])
            raise MeshError(
                f"classifier interface cuts through tet {t} "
                f"(barycenter {bary[t].tolist()}): region boundaries must align with the grid"
            )
    return region


# -- refinement -------------------------------------------------------------------


def refine(mesh: TetMesh, marked) -> TetMesh:
    """Bisect all marked tets plus the conforming closure; returns a new mesh.

    Newest-vertex bisection: a tet's refinement edge joins tagged slots 0 and
    ``tag_d``.  Before an edge is bisected, every tet sharing it must have it
    as its own refinement edge; others are recursively bisected first.  All
    tets sharing the edge are then split together, which keeps the mesh
    conforming at every step.
    """
    marked = np.unique(np.asarray(list(marked), dtype=np.int64)) if len(list(marked)) else np.empty(0, dtype=np.int64)
    if marked.size == 0:
        return mesh
    if marked.min() < 0 or marked.max() >= mesh.num_tets:
        raise MeshError(f"marked tet index out of range (mesh has {mesh.num_tets} tets)")

    verts = [tuple(p) for p in mesh.vertices]
    tags = [tuple(t) for t in mesh.tagged]
    tag_d = list(mesh.tag_d)
    region = list(mesh.region)
    alive = [True] * len(tags)
    v2t = [[] for _ in range(len(verts))]
    for t, tet in enumerate(tags):
        for v in tet:
            v2t[v].append(t)
    midpoints: dict = {}

    budget = 64 * len(tags) + 4 * len(marked) + 1024

    def edge_of(t):
        tet = tags[t]
        a, b = tet[0], tet[tag_d[t]]
        return (a, b) if a < b else (b, a)

    def patch_of(edge):
        a, b = edge
        return [t for t in v2t[a] if alive[t] and b in tags[t]]

    def bisect_patch(edge):
        nonlocal budget
        a, b = edge
        z = midpoints.get(edge)
        if z is None:
            pa, pb = verts[a], verts[b]
            verts.append(((pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0, (pa[2] + pb[2]) / 2.0))
            v2t.append([])
            z = len(verts) - 1
            midpoints[edge] = z
        for t in patch_of(edge):
            budget -= 1
            if budget < 0:
                raise MeshError("bisection closure did not terminate; initial tags incompatible")
            x = tags[t]
            d = tag_d[t]
            child_d = d - 1 if d > 1 else 3
            if d == 3:
                c1 = (x[0], x[1], x[2], z)
                c2 = (x[1], x[2], x[3], z)
            elif d == 2:
                c1 = (x[0], x[1], z, x[3])
                c2 = (x[1], x[2], z, x[3])
            else:
                c1 = (x[0], z, x[2], x[3])
                c2 = (x[1], z, x[2], x[3])
            alive[t] = False
            for child in (c1, c2):
                tid = len(tags)
                tags.append(child)
                tag_d.append(child_d)
                region.append(region[t])
                alive.append(True)
                for v in child:
                    v2t[v].append(tid)

    for t0 in marked:
        if not alive[t0]:
            continue  # already bisected during closure of an earlier mark
        stack = [int(t0)]
        while stack:
            t = stack[-1]
            if not alive[t]:
                stack.pop()
                continue
            edge = edge_of(t)
            incompatible = [s for s in patch_of(edge) if edge_of(s) != edge]
            if incompatible:
                if len(stack) > 10_000:
                    raise MeshError("bisection recursion too deep; initial tags incompatible")
                stack.extend(incompatible)
            else:
                bisect_patch(edge)
                stack.pop()

    keep = [i for i, a in enumerate(alive) if a]
    new_tags = np.array([tags[i] for i in keep], dtype=np.int64)
    new_d = np.array([tag_d[i] for i in keep], dtype=np.int8)
    new_region = np.array([region[i] for i in keep], dtype=np.int8)
    return TetMesh(np.array(verts), new_tags, new_region, tag_d=new_d)


# -- Gmsh MSH 2.2 ASCII import ------------------------------------------------------

_MSH_TET = 4
_MSH_TRIANGLE = 2
_MSH_IGNORED = {15, 1}  # points and lines carry no region/face information

DEFAULT_REGION_TAGS = {1: Region.ELASTIC, 2: Region.ACOUSTIC, 3: Region.PML}
DEFAULT_FACE_TAGS = {
    1: FaceTag.INTERFACE,
    2: FaceTag.PML_INNER,
    3: FaceTag.OUTER,
}


class MshFormatError(MeshError):
    """Malformed or unsupported MSH content."""


def import_msh(stream, region_tags: dict | None = None, face_tags: dict | None = None) -> TetMesh:
    """Read a Gmsh MSH 2.2 ASCII mesh.

    Tetrahedra (element type 4) become cells whose physical-group tag maps to
    a region through ``region_tags``; triangles (type 2) may declare face
    tags through ``face_tags`` and are checked against the tags derived from
    region adjacency.  Untagged boundary or interface faces are inferred.
    Point and line elements are ignored; any other element type is rejected.
    """
    region_tags = DEFAULT_REGION_TAGS if region_tags is None else {
        int(k): Region(v) for k, v in region_tags.items()
    }
    face_tags = DEFAULT_FACE_TAGS if face_tags is None else {
        int(k): FaceTag(v) for k, v in face_tags.items()
    }
    if isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = stream.read().splitlines()
    pos = 0

    def next_line():
        nonlocal pos
        while pos < len(lines):
            text = lines[pos].strip()
            pos += 1
            if text:
                return text
        raise MshFormatError(f"unexpected end of file at line {pos}")

    if next_line() != "$MeshFormat":
        raise MshFormatError("missing $MeshFormat section")
    fmt = next_line().split()
    if fmt[0] not in ("2.2", "2.1", "2"):
        raise MshFormatError(f"unsupported MSH version {fmt[0]} (need 2.2)")
    if len(fmt) > 1 and fmt[1] != "0":
        raise MshFormatError("binary MSH files are not supported")
    if next_line() != "$EndMeshFormat":
        raise MshFormatError("unterminated $MeshFormat section")

    if next_line() != "$Nodes":
        raise MshFormatError("missing $Nodes section")
    n_nodes = int(next_line())
    ids = np.empty(n_nodes, dtype=np.int64)
    coords = np.empty((n_nodes, 3))
    for i in range(n_nodes):
        parts = next_line().split()
        ids[i] = int(parts[0])
        coords[i] = [float(parts[1]), float(parts[2]), float(parts[3])]
    if next_line() != "$EndNodes":
        raise MshFormatError("unterminated $Nodes section")
    id_to_index = {int(node): i for i, node in enumerate(ids)}

    if next_line() != "$Elements":
        raise MshFormatError("missing $Elements section")
    n_elems = int(next_line())
    tets = []
    tet_regions = []
    tris = []
    tri_tags = []
    for _ in range(n_elems):
        line_no = pos + 1
        parts = next_line().split()
        etype = int(parts[1])
        ntags = int(parts[2])
        tag = int(parts[3]) if ntags >= 1 else 0
        nodes = [int(p) for p in parts[3 + ntags:]]
        if etype == _MSH_TET:
            if len(nodes) != 4:
                raise MshFormatError(f"line {line_no}: tetrahedron needs 4 nodes")
            if tag not in region_tags:
                raise MshFormatError(f"line {line_no}: unknown region physical tag {tag}")
            tets.append([id_to_index[v] for v in nodes])
            tet_regions.append(int(region_tags[tag]))
        elif etype == _MSH_TRIANGLE:
            if len(nodes) != 3:
                raise MshFormatError(f"line {line_no}: triangle needs 3 nodes")
            tris.append(sorted(id_to_index[v] for v in nodes))
            tri_tags.append(face_tags.get(tag, FaceTag.NONE))
        elif etype in _MSH_IGNORED:
            continue
        else:
            raise MshFormatError(f"line {line_no}: unsupported element type {etype}")
    if next_line() != "$EndElements":
        raise MshFormatError("unterminated $Elements section")
    if not tets:
        raise MshFormatError("no tetrahedral elements found")

    mesh = TetMesh(coords, np.array(tets, dtype=np.int64), np.array(tet_regions, dtype=np.int8))

    if tris:
        lookup = {tuple(f): i for i, f in enumerate(mesh.faces.tolist())}
        for tri, declared in zip(tris, tri_tags):
            idx = lookup.get(tuple(tri))
            if idx is None:
                raise MshFormatError(f"triangle {tri} is not a face of any tetrahedron")
            derived = FaceTag(int(mesh.face_tag[idx]))
            if declared != FaceTag.NONE and declared != derived:
                raise MshFormatError(
                    f"triangle {tri}: declared tag {declared.name} conflicts with "
                    f"derived tag {derived.name}"
                )
    return mesh

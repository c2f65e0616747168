"""Triangle meshes, per-vertex part charts and chart coordinates."""
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import ChartError, MeshError

DEFAULT_NUM_PARTS = 32
DEFAULT_NUM_CHARTS = 24


def _frozen(arr):
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Immutable triangle surface.

    ``vertices`` is an (N, 3) float64 array, ``faces`` an (F, 3) array of
    0-based vertex indices. Non-manifold and multi-component meshes are
    accepted; geodesic routines reject the latter.
    """

    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64)
        f = np.array(self.faces)
        if v.ndim != 2 or v.shape[1] != 3:
            raise MeshError(f"vertices must have shape (N, 3), got {v.shape}")
        if f.size == 0:
            raise MeshError("mesh has no faces")
        if f.ndim != 2 or f.shape[1] != 3:
            raise MeshError(f"faces must have shape (F, 3), got {f.shape}")
        if not np.issubdtype(f.dtype, np.integer):
            raise MeshError("face indices must be integers")
        f = f.astype(np.int64)
        if len(v) < 3:
            raise MeshError(f"need at least 3 vertices, got {len(v)}")
        if not np.all(np.isfinite(v)):
            raise MeshError("vertex coordinates must be finite")
        if f.min() < 0 or f.max() >= len(v):
            bad = int(np.flatnonzero((f < 0).any(1) | (f >= len(v)).any(1))[0])
            raise MeshError(f"face {bad} has vertex index out of range for {len(v)} vertices")
        degenerate = (f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])
        if degenerate.any():
            raise MeshError(f"face {int(np.flatnonzero(degenerate)[0])} repeats a vertex")
        object.__setattr__(self, "vertices", _frozen(v))
        object.__setattr__(self, "faces", _frozen(f))
        lengths = self.edge_lengths
        if not np.all(np.isfinite(lengths)) or not np.all(lengths > 0):
            i = int(np.flatnonzero(~(np.isfinite(lengths) & (lengths > 0)))[0])
            a, b = self.edges[i]
            raise MeshError(f"edge ({a}, {b}) has non-positive or non-finite length")

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_faces(self):
        return len(self.faces)

    @cached_property
    def edges(self):
        """Unique undirected edges as an (E, 2) array with ``a < b``, sorted."""
        f = self.faces
        e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        e.sort(axis=1)
        return _frozen(np.unique(e, axis=0))

    @cached_property
    def edge_lengths(self):
        e = self.edges
        d = self.vertices[e[:, 0]] - self.vertices[e[:, 1]]
        return _frozen(np.sqrt(np.einsum("ij,ij->i", d, d)))

    @cached_property
    def edge_graph(self):
        """Symmetric sparse CSR matrix of Euclidean edge lengths."""
        e = self.edges
        n = self.n_vertices
        w = np.concatenate([self.edge_lengths, self.edge_lengths])
        i = np.concatenate([e[:, 0], e[:, 1]])
        j = np.concatenate([e[:, 1], e[:, 0]])
        return sparse.csr_matrix((w, (i, j)), shape=(n, n))

    def scaled(self, factor):
        return TriMesh(self.vertices * factor, self.faces)

    def permuted(self, perm):
        """Relabel vertices so that old vertex ``i`` becomes new vertex ``perm[i]``."""
        perm = np.asarray(perm)
        inv = np.argsort(perm)
        return TriMesh(self.vertices[inv], perm[self.faces])


def connected_components(mesh):
    """Label vertices by face-connected component.

    Returns ``(labels, count)``; component ids are numbered in order of
    their smallest vertex index. Vertices referenced by no face form
    singleton components.
    """
    count, raw = csgraph.connected_components(mesh.edge_graph, directed=False)
    _, first = np.unique(raw, return_index=True)
    order = np.argsort(first)
    remap = np.empty(count, dtype=np.int64)
    remap[order] = np.arange(count)
    return remap[raw], int(count)


def _parse_index(token, n_vertices, lineno):
    head = token.split("/", 1)[0]
    try:
        idx = int(head)
    except ValueError:
        raise MeshError(f"bad face index {token!r}", lineno) from None
    if idx > 0:
        return idx - 1
    if idx < 0:
        # relative index, counted back from the last vertex seen so far
        return n_vertices + idx
    raise MeshError("face index 0 is not valid in OBJ", lineno)


def parse_obj(lines):
    """Parse Wavefront OBJ ``v`` and ``f`` records into a :class:`TriMesh`."""
    vertices, faces, face_lines = [], [], []
    for lineno, line in enumerate(lines, start=1):
        tokens = line.split("#", 1)[0].split()
        if not tokens:
            continue
        tag = tokens[0]
        if tag == "v":
            if len(tokens) not in (4, 5, 7):
                raise MeshError(f"vertex record needs 3 coordinates, got {len(tokens) - 1}", lineno)
            try:
                xyz = [float(t) for t in tokens[1:4]]
            except ValueError:
                raise MeshError(f"non-numeric vertex coordinate in {line.strip()!r}", lineno) from None
            vertices.append(xyz)
        elif tag == "f":
            if len(tokens) != 4:
                raise MeshError(f"only triangular faces are supported, got {len(tokens) - 1} indices", lineno)
            face = [_parse_index(t, len(vertices), lineno) for t in tokens[1:]]
            faces.append(face)
            face_lines.append(lineno)

    n = len(vertices)
    for face, lineno in zip(faces, face_lines):
        if any(i < 0 or i >= n for i in face):
            raise MeshError(f"face index out of range for {n} vertices", lineno)
        if len(set(face)) != 3:
            raise MeshError("degenerate face repeats a vertex", lineno)
    if not faces:
        raise MeshError("no faces found")
    return TriMesh(np.array(vertices, dtype=np.float64).reshape(-1, 3),
                   np.array(faces, dtype=np.int64))


def load_mesh(path):
    with open(path) as f:
        return parse_obj(f)


def format_obj(mesh):
    out = [f"v {x!r} {y!r} {z!r}\n" for x, y, z in mesh.vertices.tolist()]
    out += [f"f {a + 1} {b + 1} {c + 1}\n" for a, b, c in mesh.faces.tolist()]
    return "".join(out)


def save_mesh(mesh, path):
    """Write ``mesh`` as OBJ; coordinates use ``repr`` so they reload bit-exactly."""
    with open(path, "w") as f:
        f.write(format_obj(mesh))


@dataclass(frozen=True, eq=False)
class PartChart:
    """Per-vertex semantic part labels in ``1..n_parts``; every part non-empty."""

    labels: np.ndarray
    n_parts: int = DEFAULT_NUM_PARTS

    def __post_init__(self):
        labels = np.array(self.labels)
        if labels.ndim != 1 or not np.issubdtype(labels.dtype, np.integer):
            raise ChartError("labels must be a 1-D integer array")
        n_parts = int(self.n_parts)
        if n_parts < 1:
            raise ChartError(f"part count must be >= 1, got {n_parts}")
        labels = labels.astype(np.int64)
        bad = (labels < 1) | (labels > n_parts)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise ChartError(f"label {labels[i]} at vertex {i} outside 1..{n_parts}")
        sizes = np.bincount(labels, minlength=n_parts + 1)[1:]
        if (sizes == 0).any():
            raise ChartError(f"part {int(np.flatnonzero(sizes == 0)[0]) + 1} has no vertices")
        object.__setattr__(self, "labels", _frozen(labels))
        object.__setattr__(self, "n_parts", n_parts)

    def members(self, part):
        """Sorted vertex ids of ``part`` (1-based part id)."""
        if not 1 <= part <= self.n_parts:
            raise ChartError(f"part {part} outside 1..{self.n_parts}")
        return np.flatnonzero(self.labels == part)

    def check_mesh(self, mesh):
        if len(self.labels) != mesh.n_vertices:
            raise ChartError(
                f"chart has {len(self.labels)} labels but mesh has {mesh.n_vertices} vertices")
        return self


def chart_from_json(obj, mesh=None):
    if not isinstance(obj, dict) or "L" not in obj or "labels" not in obj:
        raise ChartError('chart JSON must be an object with "L" and "labels"')
    n_parts, labels = obj["L"], obj["labels"]
    if not isinstance(n_parts, int) or isinstance(n_parts, bool):
        raise ChartError('"L" must be an integer')
    if not isinstance(labels, list) or not all(
            isinstance(x, int) and not isinstance(x, bool) for x in labels):
        raise ChartError('"labels" must be a list of integers')
    if mesh is not None and len(labels) != mesh.n_vertices:
        raise ChartError(f"chart has {len(labels)} labels but mesh has {mesh.n_vertices} vertices")
    return PartChart(np.array(labels, dtype=np.int64), n_parts)


def chart_to_json(chart):
    return {"L": chart.n_parts, "labels": chart.labels.tolist()}


def load_chart(path, mesh):
    with open(path) as f:
        return chart_from_json(json.load(f), mesh)


def save_chart(chart, path):
    with open(path, "w") as f:
        json.dump(chart_to_json(chart), f)


@dataclass(frozen=True)
class ChartCoords:
    """Surface point address: chart index ``c`` in ``1..n_charts`` and ``(u, v)`` in the unit square."""

    c: int
    u: float
    v: float
    n_charts: int = DEFAULT_NUM_CHARTS

    def __post_init__(self):
        if not 1 <= self.c <= self.n_charts:
            raise ChartError(f"chart index {self.c} outside 1..{self.n_charts}")
        if not (0.0 <= self.u <= 1.0 and 0.0 <= self.v <= 1.0):
            raise ChartError(f"uv ({self.u}, {self.v}) outside [0, 1]^2")


def coords_from_json(obj, n_charts=DEFAULT_NUM_CHARTS):
    """Parse a ChartCoords set ``[{"vertex", "c", "u", "v"}, ...]`` into a dict."""
    if not isinstance(obj, list):
        raise ChartError("chart coordinate set must be a JSON array")
    table = {}
    for entry in obj:
        try:
            vertex, c, u, v = entry["vertex"], entry["c"], entry["u"], entry["v"]
        except (KeyError, TypeError):
            raise ChartError(f"malformed chart coordinate entry {entry!r}") from None
        if not isinstance(vertex, int) or not isinstance(c, int) or vertex < 0:
            raise ChartError(f"vertex and c must be integers in {entry!r}")
        if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in (u, v)):
            raise ChartError(f"u and v must be numbers in {entry!r}")
        if vertex in table:
            raise ChartError(f"duplicate entry for vertex {vertex}")
        table[vertex] = ChartCoords(c, float(u), float(v), n_charts)
    return table


def coords_to_json(table):
    return [{"vertex": int(k), "c": int(cc.c), "u": float(cc.u), "v": float(cc.v)}
            for k, cc in sorted(table.items())]


def load_chart_coords(path, n_charts=DEFAULT_NUM_CHARTS):
    with open(path) as f:
        return coords_from_json(json.load(f), n_charts)


def save_chart_coords(table, path):
    with open(path, "w") as f:
        json.dump(coords_to_json(table), f)

"""Graph geodesic distance fields on triangle meshes.

Distances are shortest paths over the vertex-edge graph with Euclidean edge
weights, computed with Dijkstra's algorithm. They overestimate true surface
geodesics by a bounded factor, which the part-averaged, part-normalized
descriptors absorb.
"""
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csgraph

from .errors import DisconnectedMeshError, ValidationError
from .mesh import connected_components

# rows of the (sources x vertices) block solved per Dijkstra call
_CHUNK = 256


@dataclass(frozen=True, eq=False)
class DistanceField:
    """Per-vertex distances from a source vertex (``kind="vertex"``) or
    averaged over a part (``kind="part"``)."""

    source: int
    kind: str
    distances: np.ndarray


def require_connected(mesh):
    _, count = connected_components(mesh)
    if count != 1:
        raise DisconnectedMeshError(
            f"mesh has {count} connected components; geodesics need exactly one")


def _check_sources(mesh, sources):
    sources = np.asarray(sources, dtype=np.int64)
    if sources.size and (sources.min() < 0 or sources.max() >= mesh.n_vertices):
        raise ValidationError(f"source vertex out of range for {mesh.n_vertices} vertices")
    return sources


def _solve(mesh, sources, limit=np.inf):
    return csgraph.dijkstra(mesh.edge_graph, directed=False, indices=sources, limit=limit)


def distance_rows(mesh, sources, check=True, limit=np.inf):
    """Yield ``(source, distances)`` for each source, in the given order.

    Sources are solved in blocks to bound memory on large meshes. With a
    finite ``limit`` the search stops early and vertices farther than
    ``limit`` report ``inf``.
    """
    if check:
        require_connected(mesh)
    sources = _check_sources(mesh, sources)
    for start in range(0, len(sources), _CHUNK):
        block = sources[start:start + _CHUNK]
        rows = _solve(mesh, block, limit)
        for s, row in zip(block.tolist(), rows):
            yield s, row


def single_source_distance(mesh, source):
    require_connected(mesh)
    if not isinstance(source, (int, np.integer)) or not 0 <= source < mesh.n_vertices:
        raise ValidationError(f"invalid source vertex {source!r}")
    d = _solve(mesh, [int(source)])[0]
    return DistanceField(int(source), "vertex", d)


def distance_matrix(mesh, sources=None):
    """Dense (len(sources), N) block of single-source fields."""
    require_connected(mesh)
    if sources is None:
        sources = np.arange(mesh.n_vertices)
    sources = _check_sources(mesh, sources)
    return _solve(mesh, sources).reshape(len(sources), mesh.n_vertices)


def part_sources(chart, part, stride=1):
    """Source vertices used for a part average: every ``stride``-th member in
    ascending vertex order. ``stride > 1`` is an approximation."""
    if stride < 1:
        raise ValidationError(f"stride must be >= 1, got {stride}")
    return chart.members(part)[::stride]


def mean_distance_to_part(mesh, chart, part, stride=1):
    """Mean geodesic distance from every vertex to the vertices of ``part``.

    Paths are unconstrained on the whole surface. Fields are accumulated in
    ascending source order, so the result does not depend on how sources are
    blocked.
    """
    chart.check_mesh(mesh)
    sources = part_sources(chart, part, stride)
    acc = np.zeros(mesh.n_vertices)
    for _, row in distance_rows(mesh, sources):
        acc += row
    return DistanceField(int(part), "part", acc / len(sources))

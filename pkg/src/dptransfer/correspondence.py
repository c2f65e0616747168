"""Nearest-descriptor vertex correspondence, annotation transfer and map diagnostics."""
import json
from dataclasses import dataclass

import numpy as np

from .errors import ChartError, ValidationError
from .geodesics import distance_rows, require_connected

# bound on the (source block x target) cost matrix, in elements
_BLOCK_ELEMENTS = 1 << 22


@dataclass(frozen=True, eq=False)
class VertexMap:
    """``target[p]`` is the matched target vertex of source vertex ``p``;
    ``cost[p]`` the squared descriptor distance of that match."""

    target: np.ndarray
    cost: np.ndarray

    def __post_init__(self):
        t = np.array(self.target)
        c = np.array(self.cost, dtype=np.float64)
        if t.ndim != 1 or c.shape != t.shape or len(t) == 0:
            raise ValidationError("target and cost must be 1-D arrays of equal, non-zero length")
        if not np.issubdtype(t.dtype, np.integer) or (t < 0).any():
            raise ValidationError("target indices must be non-negative integers")
        if not np.all(np.isfinite(c)) or (c < 0).any():
            raise ValidationError("costs must be finite and non-negative")
        t = t.astype(np.int64)
        t.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "target", t)
        object.__setattr__(self, "cost", c)

    def __len__(self):
        return len(self.target)

    def check_target(self, n_target):
        if self.target.max() >= n_target:
            raise ValidationError(
                f"map references target vertex {int(self.target.max())} "
                f"but target has {n_target} vertices")


def squared_distances(src_rows, tgt):
    """Squared Euclidean distances between every row of ``src_rows`` and ``tgt``.

    Terms are accumulated column by column in ascending order, so each entry
    is ``(...((0 + t_1) + t_2) + ...) + t_L`` regardless of array shapes.
    """
    acc = np.zeros((len(src_rows), len(tgt)))
    for col in range(tgt.shape[1]):
        diff = src_rows[:, col, None] - tgt[None, :, col]
        acc += diff * diff
    return acc


def match(source, target):
    """Map each source vertex to the target vertex with the nearest descriptor.

    Exact brute force; ties go to the smallest target index.
    """
    if not (source.normalized and target.normalized):
        raise ValidationError("match requires normalized descriptor fields")
    if source.n_parts != target.n_parts:
        raise ValidationError(
            f"descriptor length mismatch: {source.n_parts} vs {target.n_parts}")
    src, tgt = source.values, target.values
    block = max(1, _BLOCK_ELEMENTS // len(tgt))
    idx = np.empty(len(src), dtype=np.int64)
    cost = np.empty(len(src))
    for start in range(0, len(src), block):
        d = squared_distances(src[start:start + block], tgt)
        # argmin returns the first minimum, i.e. the lowest target index
        j = np.argmin(d, axis=1)
        idx[start:start + block] = j
        cost[start:start + block] = d[np.arange(len(j)), j]
    return VertexMap(idx, cost)


def transfer_chart_coords(vmap, target_coords):
    """Give every source vertex the ChartCoords of its matched target vertex.

    ``target_coords`` maps target vertex id to :class:`ChartCoords`; the
    result maps source vertex id to :class:`ChartCoords`.
    """
    out = {}
    for p, q in enumerate(vmap.target.tolist()):
        try:
            out[p] = target_coords[q]
        except KeyError:
            raise ChartError(
                f"no chart coordinates for target vertex {q} (matched by source vertex {p})") from None
    return out


def _pair_distances(mesh, u, v, limit=np.inf):
    """Geodesic distance between ``u[i]`` and ``v[i]`` for every i, one
    Dijkstra solve per distinct ``u``; pairs must lie within ``limit``."""
    out = np.empty(len(u))
    uniq, inverse = np.unique(u, return_inverse=True)
    order = np.argsort(inverse, kind="stable")
    groups = np.split(order, np.searchsorted(inverse[order], np.arange(1, len(uniq))))
    for (_, row), group in zip(distance_rows(mesh, uniq, check=False, limit=limit), groups):
        out[group] = row[v[group]]
    return out


def map_distortion(source_mesh, target_mesh, vmap):
    """Relative geodesic edge distortion of a vertex map.

    For each source edge ``(a, b)`` this is
    ``|g_T(map[a], map[b]) - g_S(a, b)| / g_S(a, b)``. Returns a dict with
    ``mean``, ``max`` and ``n_edges``.
    """
    if len(vmap) != source_mesh.n_vertices:
        raise ValidationError(
            f"map has {len(vmap)} entries but source mesh has {source_mesh.n_vertices} vertices")
    vmap.check_target(target_mesh.n_vertices)
    require_connected(source_mesh)
    require_connected(target_mesh)
    edges = source_mesh.edges
    a, b = edges[:, 0], edges[:, 1]
    # adjacent vertices are never farther apart than the longest edge
    src_geo = _pair_distances(source_mesh, a, b, limit=source_mesh.edge_lengths.max() * (1 + 1e-12))
    if not (src_geo > 0).all():
        raise ValidationError("source mesh has a zero-length edge")
    tgt_geo = _pair_distances(target_mesh, vmap.target[a], vmap.target[b])
    rel = np.abs(tgt_geo - src_geo) / src_geo
    return {"mean": float(rel.mean()), "max": float(rel.max()), "n_edges": int(len(edges))}


def map_to_json(vmap):
    return {"target": vmap.target.tolist(), "cost": vmap.cost.tolist()}


def map_from_json(obj):
    if not isinstance(obj, dict) or set(obj) != {"target", "cost"}:
        raise ValidationError('vertex map JSON must be {"target": [...], "cost": [...]}')
    target, cost = obj["target"], obj["cost"]
    if not isinstance(target, list) or not all(
            isinstance(x, int) and not isinstance(x, bool) for x in target):
        raise ValidationError('"target" must be a list of integers')
    if not isinstance(cost, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in cost):
        raise ValidationError('"cost" must be a list of numbers')
    return VertexMap(np.array(target, dtype=np.int64), np.array(cost, dtype=np.float64))


def save_map(vmap, path):
    with open(path, "w") as f:
        json.dump(map_to_json(vmap), f)


def load_map(path):
    with open(path) as f:
        return map_from_json(json.load(f))

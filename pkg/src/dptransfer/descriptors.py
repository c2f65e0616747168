"""Continuous semantic descriptors: per-vertex mean geodesic distance to each part."""
import json
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePartError, ValidationError
from .geodesics import mean_distance_to_part, require_connected
from .tensorio import read_tensor, write_tensor


@dataclass(frozen=True, eq=False)
class DescriptorField:
    """(N, L) array; column ``l - 1`` holds the descriptor entry for part ``l``."""

    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValidationError(f"descriptor values must be a non-empty 2-D array, got shape {v.shape}")
        if not np.all(np.isfinite(v)) or (v < 0).any():
            raise ValidationError("descriptor entries must be finite and non-negative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "normalized", bool(self.normalized))

    @property
    def n_parts(self):
        return self.values.shape[1]

    @property
    def n_vertices(self):
        return self.values.shape[0]


def compute_descriptors(mesh, chart, stride=1):
    chart.check_mesh(mesh)
    require_connected(mesh)
    out = np.empty((mesh.n_vertices, chart.n_parts))
    for part in range(1, chart.n_parts + 1):
        out[:, part - 1] = mean_distance_to_part(mesh, chart, part, stride).distances
    return DescriptorField(out, normalized=False)


def part_averages(field, chart):
    """Mean of each part's own column over that part's vertices."""
    if field.n_vertices != len(chart.labels) or field.n_parts != chart.n_parts:
        raise ValidationError(
            f"field shape {field.values.shape} does not fit chart with "
            f"{len(chart.labels)} vertices and {chart.n_parts} parts")
    return np.array([field.values[chart.members(part), part - 1].mean()
                     for part in range(1, chart.n_parts + 1)])


def normalize_descriptors(field, chart):
    """Divide every column by its part average so that each part's own-column mean is 1."""
    if field.normalized:
        raise ValidationError("descriptor field is already normalized")
    avg = part_averages(field, chart)
    if (avg <= 0).any():
        part = int(np.flatnonzero(avg <= 0)[0]) + 1
        raise DegeneratePartError(
            f"part {part} has zero average self-distance; cannot normalize")
    return DescriptorField(field.values / avg, normalized=True)


def sidecar_path(path):
    return f"{path}.json"


def save_descriptors(field, path):
    """Write values as a float64 tensor plus a JSON sidecar ``<path>.json``."""
    write_tensor(field.values, path, dtype=np.float64)
    meta = {"L": field.n_parts, "vertex_count": field.n_vertices,
            "normalized": field.normalized}
    with open(sidecar_path(path), "w") as f:
        json.dump(meta, f)


def load_descriptors(path):
    values = read_tensor(path)
    with open(sidecar_path(path)) as f:
        meta = json.load(f)
    if values.ndim != 2:
        raise ValidationError(f"descriptor tensor must be 2-D, got {values.ndim}-D")
    if meta.get("L") != values.shape[1] or meta.get("vertex_count") != values.shape[0]:
        raise ValidationError(f"sidecar {meta} disagrees with tensor shape {values.shape}")
    if not isinstance(meta.get("normalized"), bool):
        raise ValidationError('sidecar "normalized" must be a boolean')
    return DescriptorField(values.astype(np.float64), meta["normalized"])

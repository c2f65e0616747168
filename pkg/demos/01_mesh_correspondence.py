"""
Semantic correspondence between two body meshes
================================================

Two surfaces of the same topology but different proportions are charted
into matching parts. Each vertex gets a descriptor holding its mean
geodesic distance to every part; vertices are then matched across meshes
by nearest descriptor, and chart coordinates travel along the match.
"""
import numpy as np

from dptransfer import (ChartCoords, PartChart, TriMesh, compute_descriptors, map_distortion, match,
                        normalize_descriptors, transfer_chart_coords)
from dptransfer.descriptors import DescriptorField

rng = np.random.default_rng(0)

###############################################################################
# A tube-like "body": rings of vertices around a bent axis. Parts split the
# length in two and the circumference into three unequal sectors; equal
# sectors would be mirror-symmetric and leave mirrored vertices with
# identical descriptors.


def tube(rings=24, around=12, length=6.0, radius=1.0, bulge=0.0):
    t = np.linspace(0, 1, rings)
    theta = np.linspace(0, 2 * np.pi, around, endpoint=False)
    r = radius * (1 + bulge * np.sin(np.pi * t))[:, None]
    x = (length * t)[:, None] + 0 * theta
    y = r * np.cos(theta)
    z = r * np.sin(theta) + 0.5 * np.sin(2 * t)[:, None]
    verts = np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)
    faces = []
    for i in range(rings - 1):
        for j in range(around):
            a, b = i * around + j, i * around + (j + 1) % around
            c, d = a + around, b + around
            faces += [[a, b, d], [a, d, c]]
    front = (t >= 0.3).astype(int)
    sector = np.searchsorted([np.pi / 2, 1.1 * np.pi], theta, side="right")
    labels = 1 + 3 * front[:, None] + sector[None, :]
    return TriMesh(verts, np.array(faces)), PartChart(labels.ravel(), 6)


human, human_chart = tube()
print("vertices:", human.n_vertices)

###############################################################################
# Both meshes share connectivity, so vertex i on one corresponds to vertex i
# on the other; that gives a ground truth to score matches against.


def score(vmap):
    same = np.mean(vmap.target == np.arange(len(vmap.target)))
    ring_offset = np.mean(np.abs(vmap.target // 12 - np.arange(len(vmap.target)) // 12))
    return f"exact {same:.0%}, mean ring offset {ring_offset:.2f}"


def compare(other, other_chart):
    raw_o, raw_h = compute_descriptors(other, other_chart), compute_descriptors(human, human_chart)
    # matching raw distances directly, for comparison only
    raw_map = match(DescriptorField(raw_o.values, True), DescriptorField(raw_h.values, True))
    vmap = match(normalize_descriptors(raw_o, other_chart), normalize_descriptors(raw_h, human_chart))
    print("  raw descriptors:       ", score(raw_map))
    print("  normalized descriptors:", score(vmap))
    return vmap


###############################################################################
# A uniformly smaller copy: dividing by the part average removes the scale
# exactly, so the normalized match is the identity.

print("scaled copy")
compare(human.scaled(0.7), human_chart)

###############################################################################
# A differently proportioned body (shorter, thicker, bulging) is harder;
# neither variant is exact, and the map is only as good as the charting.

animal, animal_chart = tube(length=4.0, radius=1.4, bulge=0.4)
print("differently proportioned")
vmap = compare(animal, animal_chart)
print("  edge distortion:", map_distortion(animal, human, vmap))

###############################################################################
# Chart coordinates defined on the human mesh now label every animal vertex.

human_coords = {v: ChartCoords(1 + v % 24, rng.uniform(), rng.uniform()) for v in range(human.n_vertices)}
animal_coords = transfer_chart_coords(vmap, human_coords)
print("animal vertex 0 ->", animal_coords[0])

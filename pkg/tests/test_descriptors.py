import json

import numpy as np
import pytest

from dptransfer.descriptors import (DescriptorField, compute_descriptors, load_descriptors,
                                    normalize_descriptors, part_averages, save_descriptors)
from dptransfer.errors import DegeneratePartError, ValidationError
from dptransfer.mesh import PartChart

from conftest import floyd_warshall, random_chart, random_mesh


def test_tetrahedron_single_part(tet):
    chart = PartChart(np.ones(4, dtype=int), 1)
    field = compute_descriptors(tet, chart)
    assert field.values.shape == (4, 1) and not field.normalized
    np.testing.assert_allclose(field.values, 0.75, rtol=1e-12)
    norm = normalize_descriptors(field, chart)
    assert norm.normalized
    np.testing.assert_allclose(norm.values, 1.0, rtol=1e-12)


def test_tetrahedron_singleton_parts(tet):
    chart = PartChart(np.arange(1, 5), 4)
    field = compute_descriptors(tet, chart)
    np.testing.assert_allclose(field.values, 1.0 - np.eye(4), atol=1e-15)
    with pytest.raises(DegeneratePartError):
        normalize_descriptors(field, chart)


def test_matches_floyd_warshall_oracle(rng):
    m = random_mesh(rng, 70)
    chart = random_chart(rng, 70, 6)
    fw = floyd_warshall(m)
    expected = np.stack([fw[:, chart.members(p)].mean(axis=1) for p in range(1, 7)], axis=1)
    np.testing.assert_allclose(compute_descriptors(m, chart).values, expected, rtol=1e-9)


def test_own_part_column_within_diameter(rng):
    m = random_mesh(rng, 60)
    chart = random_chart(rng, 60, 4)
    fw = floyd_warshall(m)
    vals = compute_descriptors(m, chart).values
    for p in range(1, 5):
        members = chart.members(p)
        assert (vals[members, p - 1] <= fw[np.ix_(members, members)].max() + 1e-12).all()


def test_normalized_part_means_are_one(rng):
    for _ in range(5):
        n = int(rng.integers(20, 80))
        m = random_mesh(rng, n)
        chart = random_chart(rng, n, int(rng.integers(1, 6)))
        norm = normalize_descriptors(compute_descriptors(m, chart), chart)
        np.testing.assert_allclose(part_averages(DescriptorField(norm.values), chart), 1.0, atol=1e-9)


@pytest.mark.parametrize("scale", [0.1, 3.0, 100.0])
def test_scale_invariance(rng, scale):
    m = random_mesh(rng, 50)
    chart = random_chart(rng, 50, 4)
    a = normalize_descriptors(compute_descriptors(m, chart), chart).values
    b = normalize_descriptors(compute_descriptors(m.scaled(scale), chart), chart).values
    np.testing.assert_allclose(b, a, rtol=1e-9)


def test_permutation_equivariance(rng):
    m = random_mesh(rng, 40)
    chart = random_chart(rng, 40, 3)
    perm = rng.permutation(40)
    pm = m.permuted(perm)
    pchart = PartChart(chart.labels[np.argsort(perm)], 3)
    a = compute_descriptors(m, chart).values
    b = compute_descriptors(pm, pchart).values
    np.testing.assert_allclose(b[perm], a, rtol=1e-12)


def test_validation():
    with pytest.raises(ValidationError):
        DescriptorField(np.array([[1.0, -1.0]]))
    with pytest.raises(ValidationError):
        DescriptorField(np.array([1.0, 2.0]))
    with pytest.raises(ValidationError):
        DescriptorField(np.array([[np.nan]]))
    field = DescriptorField(np.ones((2, 1)), normalized=True)
    with pytest.raises(ValidationError):
        normalize_descriptors(field, PartChart(np.array([1, 1]), 1))


def test_chart_mismatch(tet, rng):
    with pytest.raises(ValidationError):
        compute_descriptors(tet, PartChart(np.ones(5, dtype=int), 1))


def test_save_load(tmp_path, rng):
    field = DescriptorField(rng.uniform(size=(10, 4)), normalized=True)
    save_descriptors(field, tmp_path / "d.dpt")
    back = load_descriptors(tmp_path / "d.dpt")
    assert back.normalized and back.values.tobytes() == field.values.tobytes()
    assert json.loads((tmp_path / "d.dpt.json").read_text()) == {"L": 4, "vertex_count": 10, "normalized": True}
    (tmp_path / "d.dpt.json").write_text('{"L": 5, "vertex_count": 10, "normalized": true}')
    with pytest.raises(ValidationError):
        load_descriptors(tmp_path / "d.dpt")

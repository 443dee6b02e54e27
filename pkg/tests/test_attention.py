import numpy as np
import pytest

from bytheway.attention import (AttnMapBatch, disparity, energy, identity_map, random_map,
                                site_energies, uniform_map, validate)
from bytheway.errors import InvalidShapeError

from oracles import disparity_loops, energy_loops


def test_validate_uniform():
    res = validate(uniform_map(5, 16))
    assert res.stochastic
    assert res.max_row_sum_deviation == 0.0


def test_validate_identity():
    assert validate(identity_map(3, 8)).stochastic


def test_validate_nan_entry():
    data = uniform_map(2, 4).data.copy()
    data[1, 2, 3] = np.nan
    res = validate(AttnMapBatch(data))
    assert res.nonfinite_entries == 1
    assert not res.stochastic
    assert res.bad_rows == 1


def test_validate_negative_entries():
    data = np.array([[[1.2, -0.2], [0.5, 0.5]]])
    res = validate(AttnMapBatch(data))
    assert res.negative_entries == 1
    assert res.bad_rows == 0
    assert not res.stochastic


def test_checked_sets_flag(rng):
    amap = random_map(4, 8, rng)
    assert AttnMapBatch.checked(amap.data).stochastic
    assert not AttnMapBatch.checked(amap.data * 2).stochastic


@pytest.mark.parametrize("shape", [(4, 4), (2, 3, 4), (0, 4, 4), (3, 1, 1)])
def test_bad_shapes(shape):
    with pytest.raises(InvalidShapeError):
        AttnMapBatch(np.zeros(shape))


def test_spatial_dims_must_match():
    with pytest.raises(InvalidShapeError):
        AttnMapBatch(np.zeros((6, 4, 4)), (1, 2, 2))
    assert AttnMapBatch(np.zeros((6, 4, 4)), (1, 2, 3)).spatial_dims == (1, 2, 3)


def test_data_is_read_only():
    amap = uniform_map(2, 4)
    with pytest.raises(ValueError):
        amap.data[0, 0, 0] = 1.0


@pytest.mark.parametrize("S", [1, 7])
def test_energy_identity(S):
    assert energy(identity_map(S, 16)) == 1.0


def test_energy_uniform():
    assert energy(uniform_map(3, 16)) == pytest.approx(0.0625, abs=1e-15)


def test_energy_matches_loops(rng):
    amap = random_map(4, 8, rng)
    assert energy(amap) == pytest.approx(energy_loops(amap.data), rel=1e-7)


def test_energy_empty_is_shape_error():
    with pytest.raises(InvalidShapeError):
        energy(np.zeros((0, 8, 8)))


def test_energy_accepts_float32(rng):
    a = random_map(3, 8, rng).data
    assert energy(a.astype(np.float32)) == pytest.approx(energy(a), rel=1e-6)


def test_energy_permutation_invariant(rng):
    amap = random_map(32, 8, rng)
    perm = rng.permutation(32)
    assert energy(amap.data[perm]) == pytest.approx(energy(amap), rel=1e-12)


@pytest.mark.parametrize("lam", [0.5, 2.0, 3.7])
def test_energy_quadratic_scaling(rng, lam):
    a = random_map(6, 8, rng).data
    assert energy(lam * a) == pytest.approx(lam ** 2 * energy(a), rel=1e-12)


def test_site_energies_shape(rng):
    assert site_energies(random_map(5, 4, rng)).shape == (5,)


def test_disparity_self_is_zero(rng):
    amap = random_map(5, 8, rng)
    assert disparity(amap, amap) == 0.0


def test_disparity_swap_f2():
    a = np.array([[[1.0, 0.0], [0.0, 1.0]]])
    b = np.array([[[0.0, 1.0], [1.0, 0.0]]])
    assert disparity(a, b) == pytest.approx(2.0, abs=1e-15)


def test_disparity_matches_loops(rng):
    a, b = random_map(6, 8, rng), random_map(6, 8, rng)
    assert disparity(a, b) == pytest.approx(disparity_loops(a.data, b.data), rel=1e-7)
    assert disparity(a, b) == disparity(b, a)


def test_disparity_shape_mismatch(rng):
    with pytest.raises(InvalidShapeError):
        disparity(random_map(2, 8, rng), random_map(3, 8, rng))


def test_disparity_triangle_inequality(rng):
    for _ in range(200):
        a, b, c = (random_map(4, 8, rng, concentration=3) for _ in range(3))
        assert disparity(a, c) <= disparity(a, b) + disparity(b, c) + 1e-7

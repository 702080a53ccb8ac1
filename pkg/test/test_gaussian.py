import math
from test.scenes import gaussian, random_quaternion

import numpy as np
import pytest

from streamsplat.core.errors import InvariantError
from streamsplat.core.gaussian import (
    UNASSIGNED,
    Gaussian,
    GaussianArrays,
    covariance_of,
    quaternion_from_matrix,
    rotation_matrix,
    unvech,
    vech,
)


def test__when_creating_from_unnormalized_quaternion__should_normalize_it() -> None:
    sut = Gaussian.create((0, 0, 0), (1, 1, 1), rotation=(2.0, 0.0, 0.0, 0.0))

    assert sut.rotation == (1.0, 0.0, 0.0, 0.0)
    assert sut.id == UNASSIGNED


@pytest.mark.parametrize(
    "kwargs",
    [
        {"scale": (0.0, 1.0, 1.0)},
        {"alpha": 1.5},
        {"alpha": -0.1},
        {"color": (1.2, 0.0, 0.0)},
        {"mu": (math.nan, 0.0, 0.0)},
        {"rotation": (0.5, 0.0, 0.0, 0.0)},
    ],
)
def test__given_invalid_field__when_constructing__should_raise_invariant_error(kwargs: dict) -> None:
    fields = dict(
        mu=(0.0, 0.0, 0.0), scale=(1.0, 1.0, 1.0), rotation=(1.0, 0.0, 0.0, 0.0), color=(0.5, 0.5, 0.5), alpha=0.5
    )
    fields.update(kwargs)

    with pytest.raises(InvariantError):
        Gaussian(**fields)  # type: ignore[arg-type]


def test__given_zero_quaternion__when_creating__should_raise_invariant_error() -> None:
    with pytest.raises(InvariantError):
        Gaussian.create((0, 0, 0), (1, 1, 1), rotation=(0, 0, 0, 0))


def test__given_axis_aligned_gaussian__when_computing_covariance__should_be_diagonal_of_squared_scales() -> None:
    sut = Gaussian.create((0, 0, 0), (1.0, 2.0, 3.0))

    assert np.allclose(covariance_of(sut), np.diag([1.0, 4.0, 9.0]))


def test__given_random_rotation__when_computing_covariance__should_be_symmetric_positive_definite() -> None:
    rng = np.random.default_rng(3)
    sut = Gaussian.create((0, 0, 0), (0.1, 0.5, 2.0), rotation=random_quaternion(rng))

    cov = covariance_of(sut)

    assert np.allclose(cov, cov.T)
    assert np.all(np.linalg.eigvalsh(cov) > 0)
    assert np.isclose(np.linalg.det(cov), (0.1 * 0.5 * 2.0) ** 2)


def test__given_rotation_matrix__when_converting_back_to_quaternion__should_give_same_rotation() -> None:
    rng = np.random.default_rng(11)
    for _ in range(20):
        q = np.asarray(random_quaternion(rng))

        recovered = quaternion_from_matrix(rotation_matrix(q))

        assert np.allclose(rotation_matrix(recovered), rotation_matrix(q))


def test__when_taking_vech__should_unvech_to_same_symmetric_matrix() -> None:
    m = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 5.0], [3.0, 5.0, 6.0]])

    assert list(vech(m)) == [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
    assert np.array_equal(unvech(vech(m)), m)


def test__given_arrays__when_looking_up_ids__should_return_positions_or_minus_one() -> None:
    gaussians = [gaussian().with_id(id, 0) for id in (7, 2, 5)]
    sut = GaussianArrays.from_gaussians(gaussians)

    assert list(sut.index_of(np.array([5, 7, 3, 2]))) == [2, 0, -1, 1]


def test__given_empty_arrays__when_looking_up_ids__should_return_minus_one() -> None:
    sut = GaussianArrays.empty()

    assert list(sut.index_of(np.array([0, 1]))) == [-1, -1]


def test__given_arrays__when_reading_single_gaussian__should_return_equal_gaussian() -> None:
    original = gaussian(x=0.3, color=(0.1, 0.2, 0.3), alpha=0.4, origin=9).with_id(4, 0)
    sut = GaussianArrays.from_gaussians([original])

    assert sut.gaussian(0) == original

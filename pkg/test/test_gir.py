from test.oracles import brute_most_contributive, brute_nearest
from test.scenes import DEPTH, camera, grid_pixels, random_gaussians, separated_candidates, store_with
from typing import List

import numpy as np
import pytest

from streamsplat.core.camera import CameraModel
from streamsplat.core.errors import ConfigurationError, GirFormatError
from streamsplat.core.gaussian import covariance_of, unvech
from streamsplat.core.gir import (
    SENTINEL,
    Strategy,
    build_gir,
    build_gir_most_contributive,
    build_gir_nearest,
    resolve_ids,
    select_most_contributive,
    select_nearest,
)
from streamsplat.core.girformat import (
    HEADER,
    deserialize_gir,
    deserialize_redundancy,
    serialize_gir,
    serialize_redundancy,
)
from streamsplat.core.rasterizer import Contributor, Rasterizer, per_pixel_contributors
from streamsplat.core.splatting import project_arrays


def separated_store():
    pixels = grid_pixels()
    candidates = separated_candidates(pixels)
    return pixels, store_with(candidates.gaussians())


def test__given_random_alpha_rows__when_selecting_nearest__should_match_brute_force() -> None:
    rng = np.random.default_rng(7)
    alphas = rng.uniform(0, 1, size=(200, 12)) * (rng.uniform(size=(200, 12)) > 0.3)

    selected = select_nearest(alphas, 0.6)

    assert list(selected) == [brute_nearest(row, 0.6) for row in alphas]


def test__given_random_alpha_rows__when_selecting_most_contributive__should_match_brute_force() -> None:
    rng = np.random.default_rng(8)
    alphas = rng.uniform(0, 1, size=(200, 12)) * (rng.uniform(size=(200, 12)) > 0.3)

    selected = select_most_contributive(alphas)

    assert list(selected) == [brute_most_contributive(row) for row in alphas]


def test__given_equal_weights__when_selecting_most_contributive__should_prefer_front_most() -> None:
    # 0.5 and then 1.0 behind it both carry weight 0.5
    assert select_most_contributive(np.array([[0.5, 1.0]]))[0] == 0


def test__given_no_entries__when_selecting__should_return_sentinel() -> None:
    empty = np.zeros((3, 0))

    assert list(select_nearest(empty, 0.5)) == [-1, -1, -1]
    assert list(select_most_contributive(empty)) == [-1, -1, -1]


def test__given_separated_gaussians__when_building_gir__should_map_each_center_to_its_id() -> None:
    pixels, store = separated_store()

    gir = build_gir_most_contributive(store, camera())

    for id, (u, v) in enumerate(pixels):
        assert gir.id_map[v, u] == id
        assert gir.alpha[v, u] == pytest.approx(0.95, abs=1e-6)
        assert gir.mu2d[v, u] == pytest.approx([u, v], abs=1e-4)
    assert list(gir.unique_ids()) == list(range(len(pixels)))


def test__given_empty_store__when_building_gir__should_be_all_background() -> None:
    gir = build_gir(store_with([]), camera())

    assert np.all(gir.id_map == SENTINEL)
    assert np.all(gir.channels == 0.0)


def test__given_nearest_strategy__when_building_gir__should_skip_pixels_below_tau() -> None:
    pixels, store = separated_store()

    gir = build_gir_nearest(store, camera(), tau=0.9)

    assert set(gir.unique_ids().tolist()) == set(range(len(pixels)))
    assert all(len(gir.pixels_of(id)) == 1 for id in range(len(pixels)))


@pytest.mark.parametrize("tau", [0.0, 1.0, 1.5])
def test__given_tau_outside_open_interval__when_building_nearest_gir__should_raise(tau: float) -> None:
    with pytest.raises(ConfigurationError):
        build_gir(store_with([]), camera(), Strategy.nearest, tau)


def test__given_unknown_strategy_name__when_parsing__should_raise_configuration_error() -> None:
    with pytest.raises(ConfigurationError):
        Strategy.parse("median")


def test__given_several_workers__when_building_gir__should_give_identical_image() -> None:
    _, store = separated_store()

    serial = build_gir(store, camera(), rasterizer=Rasterizer(tile_size=8))
    parallel = build_gir(store, camera(), rasterizer=Rasterizer(tile_size=8, workers=3))

    assert serial.identical(parallel)


def selected_contributor(contributors: List[Contributor], strategy: Strategy) -> int:
    if strategy is Strategy.nearest:
        return brute_nearest([c.alpha for c in contributors], 0.5)

    return brute_most_contributive([c.alpha for c in contributors])


@pytest.mark.parametrize("strategy", [Strategy.nearest, Strategy.most_contributive])
def test__given_random_scene__when_building_gir__channels_should_describe_selected_contributor(
    strategy: Strategy,
) -> None:
    rng = np.random.default_rng(17)
    cam = CameraModel.look_at((1.0, -0.5, 0.0), (0.0, 0.0, DEPTH), focal=40.0, width=32, height=32)
    store = store_with(random_gaussians(rng, 40, spread=0.8))
    splats = project_arrays(cam, store.snapshot())

    gir = build_gir(store, cam, strategy, tau=0.5)

    checked = 0
    for v in range(cam.height):
        for u in range(cam.width):
            contributors = per_pixel_contributors(cam, splats, (u, v))
            k = selected_contributor(contributors, strategy)
            if k < 0:
                assert gir.id_map[v, u] == SENTINEL
                continue

            selected = contributors[k]
            camera_cov = cam.rotation @ covariance_of(store.gaussians[selected.source_id]) @ cam.rotation.T
            assert gir.id_map[v, u] == selected.source_id
            assert gir.alpha[v, u] == pytest.approx(selected.alpha, rel=1e-6)
            assert np.allclose(unvech(gir.vech[v, u].astype(np.float64)), camera_cov, rtol=1e-5, atol=1e-9)
            checked += 1

    assert checked > 50


def test__given_removed_gaussian__when_resolving_ids__should_report_its_pixels_as_stale() -> None:
    pixels, store = separated_store()
    gir = build_gir(store, camera())
    store.remove([3])

    resolution = resolve_ids(gir, store)

    assert resolution.stale_ids == {3}
    assert pixels[3] in resolution.stale_pixels
    assert all(g.id != 3 for g in resolution.resolved.values())
    assert resolution.resolved[pixels[0]].id == 0


def test__given_gir__when_serializing_and_deserializing__should_be_identical() -> None:
    _, store = separated_store()
    gir = build_gir_nearest(store, camera(), tau=0.3)

    restored = deserialize_gir(serialize_gir(gir))

    assert restored.identical(gir)
    assert restored.strategy is Strategy.nearest


def corrupt(data: bytes, offset: int, value: bytes) -> bytes:
    buffer = bytearray(data)
    buffer[offset : offset + len(value)] = value
    return bytes(buffer)


def gir_bytes() -> bytes:
    _, store = separated_store()
    return serialize_gir(build_gir(store, camera()))


def test__given_bad_magic__when_deserializing__should_raise_at_offset_zero() -> None:
    with pytest.raises(GirFormatError) as info:
        deserialize_gir(corrupt(gir_bytes(), 0, b"XXXX"))

    assert info.value.offset == 0


def test__given_truncated_data__when_deserializing__should_raise() -> None:
    data = gir_bytes()

    with pytest.raises(GirFormatError):
        deserialize_gir(data[:-1])

    with pytest.raises(GirFormatError):
        deserialize_gir(data[: HEADER.size - 2])


def test__given_trailing_bytes__when_deserializing__should_raise_at_end_of_payload() -> None:
    data = gir_bytes()

    with pytest.raises(GirFormatError) as info:
        deserialize_gir(data + b"\x00")

    assert info.value.offset == len(data)


def test__given_unknown_strategy_tag__when_deserializing__should_raise_at_tag_offset() -> None:
    with pytest.raises(GirFormatError) as info:
        deserialize_gir(corrupt(gir_bytes(), 16, b"\x07"))

    assert info.value.offset == 16


def test__given_invalid_id__when_deserializing__should_raise() -> None:
    data = gir_bytes()
    bad_id = np.array([-5], dtype="<i8").tobytes()

    with pytest.raises(GirFormatError):
        deserialize_gir(corrupt(data, len(data) - 8, bad_id))


def test__given_redundancy_report__when_reading_as_gir__should_raise_channel_count_error() -> None:
    iou = np.zeros((2, 3))
    report = serialize_redundancy(iou, np.ones((2, 3)), np.full((2, 3), -1), 0.4)

    with pytest.raises(GirFormatError):
        deserialize_gir(report)


def test__given_redundancy_report__when_round_tripping__should_keep_values() -> None:
    iou = np.array([[0.0, 0.25], [0.5, 1.0]])
    gt_mask = np.array([[0, 1], [1, 0]])
    id_map = np.array([[-1, 2], [3, 4]])

    report = deserialize_redundancy(serialize_redundancy(iou, gt_mask, id_map, 0.5))

    assert np.array_equal(report.iou, iou.astype(np.float32))
    assert np.array_equal(report.gt_mask, gt_mask)
    assert np.array_equal(report.id_map, id_map)
    assert report.theta_red == 0.5

import math

import numpy as np
import pytest

from streamsplat.core.errors import InvariantError
from streamsplat.core.metrics import c_ratio, format_db, format_ratio, gaussian_window, psnr, ssim
from streamsplat.core.tables import MetricsRow, MetricsTable, comparison_table, threshold_table


def test__given_identical_images__when_computing_psnr__should_be_infinite() -> None:
    image = np.full((4, 4, 3), 0.3)

    assert psnr(image, image) == math.inf


def test__given_constant_error__when_computing_psnr__should_follow_mse() -> None:
    a = np.zeros((4, 4, 3))
    b = np.full((4, 4, 3), 0.1)

    assert psnr(a, b) == pytest.approx(20.0)


def test__given_images_of_different_shape__when_computing_psnr__should_raise() -> None:
    with pytest.raises(InvariantError):
        psnr(np.zeros((2, 2)), np.zeros((3, 3)))


def test__given_identical_images__when_computing_ssim__should_be_one() -> None:
    rng = np.random.default_rng(41)
    image = rng.uniform(size=(16, 16, 3))

    assert ssim(image, image) == pytest.approx(1.0)


def test__given_noisier_image__when_computing_ssim__should_score_lower() -> None:
    rng = np.random.default_rng(42)
    image = rng.uniform(size=(24, 24, 3))
    slightly = np.clip(image + rng.normal(scale=0.02, size=image.shape), 0, 1)
    heavily = np.clip(image + rng.normal(scale=0.3, size=image.shape), 0, 1)

    assert 1.0 > ssim(image, slightly) > ssim(image, heavily)


def test__given_grayscale_images__when_computing_ssim__should_accept_two_dimensions() -> None:
    image = np.linspace(0, 1, 64).reshape(8, 8)

    assert ssim(image, image) == pytest.approx(1.0)


def test__when_building_window__should_sum_to_one_and_be_symmetric() -> None:
    window = gaussian_window()

    assert window.shape == (11, 11)
    assert window.sum() == pytest.approx(1.0)
    assert np.allclose(window, window.T)


def test__when_computing_c_ratio__should_divide_removed_by_total() -> None:
    assert c_ratio(1, 4) == 0.25
    assert c_ratio(0, 0) == 0.0


@pytest.mark.parametrize("removed, total", [(-1, 3), (4, 3)])
def test__given_inconsistent_counts__when_computing_c_ratio__should_raise(removed: int, total: int) -> None:
    with pytest.raises(InvariantError):
        c_ratio(removed, total)


def test__when_formatting__should_use_percent_and_decibel_notation() -> None:
    assert format_ratio(0.12345) == "12.35%"
    assert format_db(31.456) == "31.46"
    assert format_db(math.inf) == "inf"


def test__when_building_comparison_table__should_fill_unsupported_and_missing_cells() -> None:
    rows = [MetricsRow("iou_heuristic", 30.0, 0.9123, c_ratio=0.25, views=4), MetricsRow("baseline", math.inf, 1.0)]

    table = comparison_table(rows)

    assert table.rows == [
        ["4", "iou_heuristic", "30.00", "0.912", "n/a", "25.00%"],
        ["-", "baseline", "inf", "1.000", "n/a", "-"],
    ]


def test__when_building_threshold_table__should_put_tau_in_first_column() -> None:
    table = threshold_table([MetricsRow("No Mask", 28.0, 0.8, c_ratio=0.0), MetricsRow("gt", 27.5, 0.79, 0.4, tau=0.3)])

    assert [row[0] for row in table.rows] == ["-", "0.3"]


def test__when_rendering_table_as_text__should_align_columns() -> None:
    table = MetricsTable("Title", ("A", "Long header"))
    table.add_row("wide cell", "x")

    assert table.to_text() == "Title\nA          Long header\n---------  -----------\nwide cell  x\n"


def test__given_wrong_cell_count__when_adding_row__should_raise() -> None:
    table = MetricsTable("Title", ("A", "B"))

    with pytest.raises(ValueError):
        table.add_row("only one")

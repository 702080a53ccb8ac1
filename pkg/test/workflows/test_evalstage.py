import dataclasses
import math
from test.testdoubles.filesystem import memory_filesystem
from test.testdoubles.ui import RecordingUI
from test.workflows.sequences import sequence_on

import pytest

from streamsplat.core.errors import FormatError
from streamsplat.core.options import PipelineOverrides
from streamsplat.core.workflows.stages import EvalStage, LoadSequenceStage, SweepStage
from streamsplat.formats.documents import write_document
from streamsplat.formats.manifest import save_manifest
from streamsplat.formats.ply import load_scene, save_scene


def loaded(fs) -> LoadSequenceStage:  # type: ignore[no-untyped-def]
    stage = LoadSequenceStage(fs, "/seq/manifest.yaml", PipelineOverrides())
    stage(RecordingUI())
    return stage


def test__given_ground_truth_scene__when_evaluating__should_score_near_perfect() -> None:
    fs = memory_filesystem()
    sequence_on(fs)
    ui = RecordingUI()

    result = EvalStage(fs, loaded(fs), ["/seq/scene.ply"], "/metrics")(ui)

    [table] = ui.tables
    [row] = table.rows
    assert result is True
    assert row[0] == "2"
    assert row[1] == "seq"
    assert float(row[2]) > 40.0 or row[2] == "inf"
    assert float(row[3]) > 0.99
    assert row[4] == "n/a"
    assert row[5] == "-"
    assert fs.readtext("/metrics/metrics.txt") == table.to_text()


def test__given_scene_with_report_next_to_it__when_evaluating__should_show_its_c_ratio() -> None:
    fs = memory_filesystem()
    sequence_on(fs)
    save_scene(fs, "/runs/masked/scene.ply", load_scene(fs, "/seq/scene.ply")[:10])
    write_document(fs, "/runs/masked/report.yaml", {"total_c_ratio": 0.25})
    ui = RecordingUI()

    EvalStage(fs, loaded(fs), ["/seq/scene.ply", "/runs/masked/scene.ply"], "/metrics")(ui)

    rows = ui.tables[0].rows
    assert [row[1] for row in rows] == ["seq", "masked"]
    assert rows[1][5] == "25.00%"
    assert float(rows[1][2]) < (math.inf if rows[0][2] == "inf" else float(rows[0][2]))


def test__given_eval_views_without_images__when_evaluating__should_raise_format_error() -> None:
    fs = memory_filesystem()
    _, manifest = sequence_on(fs)
    views = [dataclasses.replace(view, image=None) for view in manifest.eval_views]
    save_manifest(fs, dataclasses.replace(manifest, eval_views=views))

    with pytest.raises(FormatError):
        EvalStage(fs, loaded(fs), ["/seq/scene.ply"], "/metrics")(RecordingUI())


def test__when_sweeping__should_write_one_row_per_threshold_after_baseline() -> None:
    fs = memory_filesystem()
    sequence_on(fs)
    ui = RecordingUI()

    result = SweepStage(fs, loaded(fs), [0.2, 0.6], "/sweep")(ui)

    [table] = ui.tables
    assert result is True
    assert [row[0] for row in table.rows] == ["-", "0.2", "0.6"]
    assert table.rows[0][1] == "No Mask"
    assert table.rows[0][5] == "0.00%"
    assert fs.readtext("/sweep/sweep.txt") == table.to_text()
    assert [text.split(":")[0] for text in ui.texts("info")] == ["No Mask", "tau=0.2", "tau=0.6"]

from test.testdoubles.filesystem import memory_filesystem
from test.testdoubles.ui import RecordingUI
from test.workflows.sequences import SMALL_SPEC, sequence_on
from typing import Any
from unittest.mock import patch

import pytest

from streamsplat.core.application import Application
from streamsplat.core.errors import (
    EXIT_CANCELED,
    EXIT_DATA,
    EXIT_SUCCESS,
    EXIT_USAGE,
    ConfigurationError,
    FormatError,
    InvariantError,
)
from streamsplat.core.options import PipelineOverrides, StreamOptions, SynthOptions
from streamsplat.core.workflows.workflow import Workflow
from streamsplat.ui import UI


class RaisingStage:
    def __init__(self, error: Exception) -> None:
        self._error = error

    def allowed_to_fail(self) -> bool:
        return False

    def __call__(self, ui: UI) -> bool:
        raise self._error

    def cancel(self, ui: UI) -> None:
        pass


class FailingStage(RaisingStage):
    def __init__(self) -> None:
        super().__init__(RuntimeError())

    def __call__(self, ui: UI) -> bool:
        return False


def workflow_of(stage: Any) -> Any:
    return lambda filesystem, options: Workflow([stage])


def test__given_synth_options__when_running__should_write_sequence_and_return_success() -> None:
    fs = memory_filesystem()
    ui = RecordingUI()

    exit_code = Application(fs, ui).run(SynthOptions("/out", SMALL_SPEC))

    assert exit_code == EXIT_SUCCESS
    assert fs.exists("/out/manifest.yaml")
    assert ui.texts("error") == []


def test__given_stream_options__when_running__should_write_report() -> None:
    fs = memory_filesystem()
    sequence_on(fs)

    exit_code = Application(fs, RecordingUI()).run(StreamOptions("/seq/manifest.yaml", "/res"))

    assert exit_code == EXIT_SUCCESS
    assert fs.exists("/res/report.yaml")


def test__given_missing_manifest__when_running__should_report_file_and_return_data_error() -> None:
    ui = RecordingUI()

    exit_code = Application(memory_filesystem(), ui).run(StreamOptions("/nowhere/manifest.yaml", "/res"))

    assert exit_code == EXIT_DATA
    assert "/nowhere/manifest.yaml" in ui.texts("error")[0]


def test__given_invalid_manifest_config__when_running__should_return_usage_error() -> None:
    fs = memory_filesystem()
    sequence_on(fs)
    ui = RecordingUI()
    overrides = PipelineOverrides(flags={"predictor": "unknown_predictor"})

    exit_code = Application(fs, ui).run(StreamOptions("/seq/manifest.yaml", "/res", overrides))

    assert exit_code == EXIT_USAGE
    assert ui.texts("error")[0].startswith("ConfigurationError")


@pytest.mark.parametrize(
    "error, expected",
    [
        (ConfigurationError("bad value"), EXIT_USAGE),
        (FormatError("truncated"), EXIT_DATA),
        (InvariantError("negative scale"), EXIT_DATA),
        (FileNotFoundError("scene.ply"), EXIT_DATA),
        (RuntimeError("unexpected"), EXIT_USAGE),
    ],
)
def test__given_stage_raising__when_running__should_map_error_to_exit_code(error: Exception, expected: int) -> None:
    ui = RecordingUI()

    with patch.dict("streamsplat.core.workflowfactory._Workflows", {SynthOptions: workflow_of(RaisingStage(error))}):
        exit_code = Application(memory_filesystem(), ui).run(SynthOptions("/out", SMALL_SPEC))

    assert exit_code == expected
    assert ui.texts("error") == [f"{type(error).__name__}: {error}"]


def test__given_failing_stage__when_running__should_return_usage_error() -> None:
    with patch.dict("streamsplat.core.workflowfactory._Workflows", {SynthOptions: workflow_of(FailingStage())}):
        exit_code = Application(memory_filesystem(), RecordingUI()).run(SynthOptions("/out", SMALL_SPEC))

    assert exit_code == EXIT_USAGE


def test__when_canceling_before_running__should_return_canceled_exit_code() -> None:
    sut = Application(memory_filesystem(), RecordingUI())

    assert sut.cancel() == EXIT_CANCELED


def test__given_running_stream__when_canceling__should_stop_and_return_canceled_exit_code() -> None:
    fs = memory_filesystem()
    sequence_on(fs)
    ui = RecordingUI()
    sut = Application(fs, ui)

    with patch.object(RecordingUI, "update", lambda self, stats: sut.cancel()):
        exit_code = sut.run(StreamOptions("/seq/manifest.yaml", "/res"))

    assert exit_code == EXIT_CANCELED
    assert not fs.exists("/res/report.yaml")
    assert "Stream canceled after 1 frames" in ui.texts("error")

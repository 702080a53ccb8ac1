import os
from test.testdoubles.filesystem import memory_filesystem
from typing import List
from unittest.mock import patch

import pytest
import yaml

from streamsplat import main
from streamsplat.core.errors import EXIT_DATA, EXIT_SUCCESS, EXIT_USAGE
from streamsplat.core.filesystem import Filesystem
from streamsplat.pyfilesystem.pyfilesystembased import PyFilesystemBased

WORKDIR = "/home/myuser/work"
SCENE_CONFIG_PATH = "test/testconfig/small_scene.yml"
PIPELINE_CONFIG_PATH = "test/testconfig/pipeline.yml"


class _TestServiceRegistry:
    def __init__(self, filesystem: PyFilesystemBased) -> None:
        self.filesystem = filesystem

    def local_filesystem(self) -> Filesystem:
        return self.filesystem


def prepare_environment_variables() -> dict:
    return {"STREAMSPLAT_PREDICTOR": "gt_oracle"}


def create_service_registry() -> _TestServiceRegistry:
    fs = memory_filesystem(WORKDIR)
    for path in (SCENE_CONFIG_PATH, PIPELINE_CONFIG_PATH):
        with open(path, "r") as file:
            fs.writetext(os.path.basename(path), file.read())

    return _TestServiceRegistry(fs)


def run_with_args(registry: _TestServiceRegistry, args: List[str]) -> int:
    return main(["streamsplat", *args], registry)


def synthesize(registry: _TestServiceRegistry, out: str = "seq") -> int:
    return run_with_args(registry, ["synth", "--config", "small_scene.yml", "--out", out])


@pytest.fixture
def registry() -> _TestServiceRegistry:
    return create_service_registry()


@pytest.mark.integration
def test__when_running_synth__should_write_sequence_into_working_directory(registry: _TestServiceRegistry) -> None:
    exit_code = synthesize(registry)

    fs = registry.filesystem
    assert exit_code == EXIT_SUCCESS
    assert fs.exists(f"{WORKDIR}/seq/manifest.yaml")
    assert fs.exists("seq/frames/frame_002.png")
    assert fs.exists("seq/eval/view_001.yaml")


@pytest.mark.integration
def test__when_running_synth_twice_with_same_seed__should_write_identical_files(
    registry: _TestServiceRegistry,
) -> None:
    synthesize(registry, "first")
    synthesize(registry, "second")

    fs = registry.filesystem
    for name in ("scene.ply", "spec.yaml", "frames/frame_000.ply", "frames/frame_001.png", "eval/view_000.png"):
        assert fs.readbytes(f"first/{name}") == fs.readbytes(f"second/{name}")


@pytest.mark.integration
@patch.dict(os.environ, prepare_environment_variables())
def test__when_streaming_with_config__should_write_report_with_resolved_config(
    registry: _TestServiceRegistry,
) -> None:
    synthesize(registry)

    args = ["stream", "seq/manifest.yaml", "--config", "pipeline.yml", "--tau-mask", "0.4", "--save-girs"]
    args += ["--out", "res"]
    exit_code = run_with_args(registry, args)

    fs = registry.filesystem
    report = yaml.safe_load(fs.readbytes("res/report.yaml"))
    assert exit_code == EXIT_SUCCESS
    assert report["config"]["predictor"] == "gt_oracle"
    assert report["config"]["neighbors"] == "both"
    assert report["config"]["tau_mask"] == 0.4
    assert len(report["frames"]) == 3
    assert fs.exists("res/scene.ply")
    assert fs.exists("res/eval/view_000.png")
    assert fs.exists("res/gir/frame_002.gir")


@pytest.mark.integration
def test__when_evaluating_streamed_and_ground_truth_scenes__should_write_comparison_table(
    registry: _TestServiceRegistry,
) -> None:
    synthesize(registry)
    run_with_args(registry, ["stream", "seq/manifest.yaml", "--out", "res"])

    exit_code = run_with_args(
        registry, ["eval", "seq/manifest.yaml", "--scene", "res/scene.ply", "--scene", "seq/scene.ply", "--out", "ev"]
    )

    rows = registry.filesystem.readbytes("ev/metrics.txt").decode().splitlines()[3:]
    assert exit_code == EXIT_SUCCESS
    assert [row.split()[:2] for row in rows] == [["2", "res"], ["2", "seq"]]
    assert rows[1].endswith("-")


@pytest.mark.integration
def test__when_sweeping__should_write_one_row_per_threshold_after_unmasked_row(
    registry: _TestServiceRegistry,
) -> None:
    synthesize(registry)

    exit_code = run_with_args(registry, ["sweep", "seq/manifest.yaml", "--taus", "0.1", "0.5", "--out", "sw"])

    rows = registry.filesystem.readbytes("sw/sweep.txt").decode().splitlines()[3:]
    assert exit_code == EXIT_SUCCESS
    assert [row.split()[0] for row in rows] == ["-", "0.1", "0.5"]
    assert rows[0].split()[1:3] == ["No", "Mask"]


@pytest.mark.integration
def test__when_rendering_and_building_gir__should_write_images(registry: _TestServiceRegistry) -> None:
    synthesize(registry)
    camera_args = ["seq/scene.ply", "--camera", "seq/eval/view_000.yaml"]

    render_exit = run_with_args(registry, ["render", *camera_args, "--out", "render"])
    gir_exit = run_with_args(registry, ["gir", *camera_args, "--strategy", "nearest", "--out", "gir"])

    fs = registry.filesystem
    assert (render_exit, gir_exit) == (EXIT_SUCCESS, EXIT_SUCCESS)
    assert fs.exists("render/render.png")
    assert fs.exists("render/render.npy")
    assert fs.exists("gir/view.gir")
    assert fs.exists("gir/ids.png")


@pytest.mark.integration
def test__given_manifest_with_missing_file__when_streaming__should_exit_with_data_error(
    registry: _TestServiceRegistry,
) -> None:
    synthesize(registry)
    registry.filesystem.internal_fs.remove(f"{WORKDIR}/seq/frames/frame_001.png")

    exit_code = run_with_args(registry, ["stream", "seq/manifest.yaml", "--out", "res"])

    assert exit_code == EXIT_DATA
    assert not registry.filesystem.exists("res/report.yaml")


@pytest.mark.integration
def test__given_unknown_flag__when_running__should_exit_with_usage_error(registry: _TestServiceRegistry) -> None:
    with pytest.raises(SystemExit) as exit_info:
        run_with_args(registry, ["stream", "seq/manifest.yaml", "--out", "res", "--no-such-flag"])

    assert exit_info.value.code == EXIT_USAGE

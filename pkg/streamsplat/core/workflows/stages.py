import math
import posixpath
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from streamsplat.core.config import PipelineConfig
from streamsplat.core.errors import FormatError
from streamsplat.core.filesystem import Filesystem
from streamsplat.core.gir import GaussianImage, build_gir
from streamsplat.core.girformat import serialize_gir
from streamsplat.core.metrics import format_ratio, psnr, ssim
from streamsplat.core.options import GirOptions, PipelineOverrides, RenderOptions, SynthOptions
from streamsplat.core.pipeline import (
    EvalView,
    FrameInput,
    SequenceReport,
    StepReport,
    StreamState,
    run_sequence,
    sweep_thresholds,
)
from streamsplat.core.rasterizer import Rasterizer
from streamsplat.core.splatting import project_arrays
from streamsplat.core.tables import MetricsRow, comparison_table, threshold_table
from streamsplat.formats.cameras import load_camera
from streamsplat.formats.documents import read_document, write_document
from streamsplat.formats.images import id_image, save_array, save_png
from streamsplat.formats.manifest import SequenceManifest, load_manifest, load_sequence
from streamsplat.formats.ply import load_scene_arrays, save_scene
from streamsplat.synthetic.generator import generate_synthetic
from streamsplat.synthetic.sequencefiles import write_sequence
from streamsplat.ui import UI

try:
    from typing import Protocol
except ImportError:  # pragma: no cover
    from typing_extensions import Protocol  # type: ignore


@dataclass(frozen=True, eq=False)
class LoadedSequence:
    manifest: SequenceManifest
    config: PipelineConfig
    frames: List[FrameInput]
    eval_views: List[EvalView]


class SequenceProvider(Protocol):
    def get_sequence(self) -> LoadedSequence:
        """
        Provides the loaded image sequence to the stages that consume it

        Returns:
            LoadedSequence
        """
        ...


class StreamResultProvider(Protocol):
    def get_result(self) -> Tuple[StreamState, SequenceReport, List[GaussianImage]]:
        """
        Provides the final stream state, its report and the recorded Gaussian images

        Returns:
            Tuple[StreamState, SequenceReport, List[GaussianImage]]
        """
        ...


class NoSequenceLoadedError(Exception):
    pass


class NotStreamedError(Exception):
    pass


class SynthStage:
    """
    Generates a synthetic scene and writes it as a sequence directory.
    """

    def __init__(self, filesystem: Filesystem, options: SynthOptions) -> None:
        self._filesystem = filesystem
        self._options = options

    def allowed_to_fail(self) -> bool:
        return False

    def __call__(self, ui: UI) -> bool:
        spec = self._options.spec
        ui.launch(f"Generating {spec.gaussian_count} Gaussians and {spec.frame_count} frames")
        scene = generate_synthetic(spec)
        manifest = write_sequence(scene, self._filesystem, self._options.out)
        ui.success(f"Wrote {manifest.path}")

        return True

    def cancel(self, ui: UI) -> None:
        pass


class LoadSequenceStage:
    """
    Loads a manifest and its frames.
    Implements the SequenceProvider protocol to work with the stream, eval and sweep stages.
    """

    def __init__(self, filesystem: Filesystem, manifest: str, overrides: PipelineOverrides) -> None:
        self._filesystem = filesystem
        self._manifest = manifest
        self._overrides = overrides
        self._sequence: Optional[LoadedSequence] = None

    def allowed_to_fail(self) -> bool:
        return False

    def __call__(self, ui: UI) -> bool:
        manifest = load_manifest(self._filesystem, self._manifest)
        config = self._overrides.resolve(manifest.config)
        rasterizer = Rasterizer(tile_size=config.tile_size, workers=config.workers)
        frames, views = load_sequence(self._filesystem, manifest, rasterizer)
        self._sequence = LoadedSequence(manifest, config, frames, views)
        ui.info(f"Loaded {len(frames)} frames and {len(views)} eval views from {self._manifest}")

        return True

    def get_sequence(self) -> LoadedSequence:
        if self._sequence is None:
            raise NoSequenceLoadedError()

        return self._sequence

    def cancel(self, ui: UI) -> None:
        pass


class StreamStage:
    """
    Streams the sequence into a Gaussian store.
    Canceling stops the stream after the frame in progress.
    Implements the StreamResultProvider protocol to work with WriteStreamResultsStage.
    """

    def __init__(self, sequence_provider: SequenceProvider, keep_girs: bool = False) -> None:
        self._sequence_provider = sequence_provider
        self._keep_girs = keep_girs
        self._canceled = False
        self._state: Optional[StreamState] = None
        self._report: Optional[SequenceReport] = None
        self._girs: List[GaussianImage] = []

    def allowed_to_fail(self) -> bool:
        return False

    def __call__(self, ui: UI) -> bool:
        sequence = self._sequence_provider.get_sequence()
        self._state = StreamState.create(sequence.config)
        ui.launch(f"Streaming {len(sequence.frames)} frames with predictor {self._state.predictor.name}")

        def on_frame(report: StepReport) -> None:
            if self._keep_girs:
                self._girs.append(report.gir)
            ui.update(report.stats)

        self._report = run_sequence(
            sequence.frames,
            sequence.config,
            sequence.eval_views,
            cancel=lambda: self._canceled,
            on_frame=on_frame,
            state=self._state,
        )

        if self._report.canceled:
            ui.error(f"Stream canceled after {len(self._report.stats)} frames")
            return False

        ui.success(
            f"Streamed {len(self._report.stats)} frames: {self._report.live_count} Gaussians live, "
            f"c-ratio {format_ratio(self._report.total_c_ratio)}"
        )
        return True

    def get_result(self) -> Tuple[StreamState, SequenceReport, List[GaussianImage]]:
        if self._state is None or self._report is None:
            raise NotStreamedError()

        return self._state, self._report, self._girs

    def cancel(self, ui: UI) -> None:
        ui.info("Canceling the stream after the current frame")
        self._canceled = True


class WriteStreamResultsStage:
    """
    Writes report.yaml, scene.ply, the eval renders and optionally the recorded Gaussian images.
    """

    def __init__(self, filesystem: Filesystem, result_provider: StreamResultProvider, out: str) -> None:
        self._filesystem = filesystem
        self._result_provider = result_provider
        self._out = out

    def allowed_to_fail(self) -> bool:
        return False

    def __call__(self, ui: UI) -> bool:
        state, report, girs = self._result_provider.get_result()
        fs = self._filesystem
        fs.makedirs(self._out)

        write_document(fs, self._path("report.yaml"), report.to_dict())
        save_scene(fs, self._path("scene.ply"), state.store.gaussians.values())

        if report.evaluations:
            fs.makedirs(self._path("eval"))
        for evaluation in report.evaluations:
            save_png(fs, self._path("eval", f"{evaluation.name}.png"), evaluation.rendered.rgb)

        if girs:
            fs.makedirs(self._path("gir"))
        for stats, gir in zip(report.stats, girs):
            fs.writebytes(self._path("gir", f"frame_{stats.frame_index:03d}.gir"), serialize_gir(gir))

        ui.success(f"Wrote results to {self._out}")
        return True

    def _path(self, *parts: str) -> str:
        return posixpath.join(self._out, *parts)

    def cancel(self, ui: UI) -> None:
        pass


class RenderStage:
    """
    Renders a scene from a single camera to render.png and the lossless render.npy.
    """

    def __init__(self, filesystem: Filesystem, options: RenderOptions) -> None:
        self._filesystem = filesystem
        self._options = options

    def allowed_to_fail(self) -> bool:
        return False

    def __call__(self, ui: UI) -> bool:
        fs, options = self._filesystem, self._options
        gaussians = load_scene_arrays(fs, options.scene)
        camera = load_camera(fs, options.camera)
        rendered = Rasterizer().render(camera, project_arrays(camera, gaussians), options.background)

        fs.makedirs(options.out)
        save_png(fs, posixpath.join(options.out, "render.png"), rendered.rgb)
        save_array(fs, posixpath.join(options.out, "render.npy"), rendered.rgb)
        ui.success(f"Rendered {len(gaussians)} Gaussians at {camera.width}x{camera.height}")

        return True

    def cancel(self, ui: UI) -> None:
        pass


class GirStage:
    """
    Writes the Gaussian image of a scene and a false colour picture of its id map.
    """

    def __init__(self, filesystem: Filesystem, options: GirOptions) -> None:
        self._filesystem = filesystem
        self._options = options

    def allowed_to_fail(self) -> bool:
        return False

    def __call__(self, ui: UI) -> bool:
        fs, options = self._filesystem, self._options
        gaussians = load_scene_arrays(fs, options.scene)
        camera = load_camera(fs, options.camera)
        gir = build_gir(gaussians, camera, options.strategy, options.gir_tau)

        fs.makedirs(options.out)
        fs.writebytes(posixpath.join(options.out, "view.gir"), serialize_gir(gir))
        save_png(fs, posixpath.join(options.out, "ids.png"), id_image(gir.id_map))
        ui.success(f"Gaussian image references {len(gir.unique_ids())} Gaussians")

        return True

    def cancel(self, ui: UI) -> None:
        pass


def _method_name(scene: str) -> str:
    parent = posixpath.basename(posixpath.dirname(scene))
    return parent or posixpath.splitext(posixpath.basename(scene))[0]


def _sibling_c_ratio(filesystem: Filesystem, scene: str) -> Optional[float]:
    report = posixpath.join(posixpath.dirname(scene), "report.yaml")
    if not filesystem.exists(report):
        return None

    value = read_document(filesystem, report).get("total_c_ratio")
    return None if value is None else float(value)


class EvalStage:
    """
    Scores scenes on the held out views of a sequence and writes the comparison table to metrics.txt.
    A scene's c-ratio is read from the report.yaml next to it.
    """

    def __init__(
        self, filesystem: Filesystem, sequence_provider: SequenceProvider, scenes: Sequence[str], out: str
    ) -> None:
        self._filesystem = filesystem
        self._sequence_provider = sequence_provider
        self._scenes = scenes
        self._out = out

    def allowed_to_fail(self) -> bool:
        return False

    def __call__(self, ui: UI) -> bool:
        sequence = self._sequence_provider.get_sequence()
        views = [view for view in sequence.eval_views if view.image is not None]
        if not views:
            raise FormatError(f"{sequence.manifest.path}: no eval view has a ground truth image")

        config = sequence.config
        rasterizer = Rasterizer(tile_size=config.tile_size, workers=config.workers)
        rows = [self._score(scene, views, rasterizer, config) for scene in self._scenes]

        table = comparison_table(rows)
        self._filesystem.makedirs(self._out)
        self._filesystem.writetext(posixpath.join(self._out, "metrics.txt"), table.to_text())
        ui.table(table)

        return True

    def _score(
        self, scene: str, views: Sequence[EvalView], rasterizer: Rasterizer, config: PipelineConfig
    ) -> MetricsRow:
        gaussians = load_scene_arrays(self._filesystem, scene)
        psnrs, ssims = [], []
        for view in views:
            rgb = rasterizer.render(view.camera, project_arrays(view.camera, gaussians), config.background).rgb
            psnrs.append(psnr(rgb, view.image))
            ssims.append(ssim(rgb, view.image))

        mean_psnr = math.inf if any(math.isinf(p) for p in psnrs) else float(np.mean(psnrs))
        return MetricsRow(
            method=_method_name(scene),
            psnr=mean_psnr,
            ssim=float(np.mean(ssims)),
            c_ratio=_sibling_c_ratio(self._filesystem, scene),
            views=len(views),
        )

    def cancel(self, ui: UI) -> None:
        pass


class SweepStage:
    """
    Streams the sequence once without masking and once per threshold, then writes sweep.txt.
    """

    def __init__(
        self, filesystem: Filesystem, sequence_provider: SequenceProvider, taus: Sequence[float], out: str
    ) -> None:
        self._filesystem = filesystem
        self._sequence_provider = sequence_provider
        self._taus = taus
        self._out = out

    def allowed_to_fail(self) -> bool:
        return False

    def __call__(self, ui: UI) -> bool:
        sequence = self._sequence_provider.get_sequence()

        def on_run(label: str, report: SequenceReport) -> None:
            ui.info(f"{label}: c-ratio {format_ratio(report.total_c_ratio)}, {report.live_count} Gaussians live")

        ui.launch(f"Sweeping {len(self._taus)} thresholds over {len(sequence.frames)} frames")
        rows = sweep_thresholds(sequence.frames, sequence.config, sequence.eval_views, self._taus, on_run)

        table = threshold_table(rows)
        self._filesystem.makedirs(self._out)
        self._filesystem.writetext(posixpath.join(self._out, "sweep.txt"), table.to_text())
        ui.table(table)

        return True

    def cancel(self, ui: UI) -> None:
        pass

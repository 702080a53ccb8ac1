"""
Frame by frame update of the global Gaussian store.

Per frame the history is projected into a Gaussian image, its redundancy against the current
frame's candidates is measured, a predictor turns that into a soft keep-mask, the ids behind
pixels that are not kept are removed and the current candidates are inserted.
"""
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np

from streamsplat.core.camera import CameraModel
from streamsplat.core.config import PipelineConfig, to_mapping
from streamsplat.core.errors import (
    ConfigurationError,
    FrameProcessingError,
    InvariantError,
)
from streamsplat.core.gir import SENTINEL, GaussianImage, build_gir
from streamsplat.core.losses import l_rgb
from streamsplat.core.metrics import c_ratio, format_ratio, psnr, ssim
from streamsplat.core.pixelmap import PixelGaussians
from streamsplat.core.predictors import ConstantPredictor, MaskPredictor, checked_mask, make_predictor
from streamsplat.core.rasterizer import Rasterizer, RenderedImage
from streamsplat.core.redundancy import RedundancyReport, compute_redundancy
from streamsplat.core.splatting import project_arrays
from streamsplat.core.store import GlobalGaussianStore
from streamsplat.core.tables import MetricsRow

NO_MASK = "No Mask"


@dataclass(frozen=True, eq=False)
class FrameInput:
    camera: CameraModel
    current: PixelGaussians
    image: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class EvalView:
    camera: CameraModel
    image: Optional[np.ndarray] = None
    name: str = ""


@dataclass(frozen=True)
class FrameStats:
    frame_index: int
    inserted: int
    removed: int
    live_before: int
    live_count: int
    c_ratio: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "frame": self.frame_index,
            "inserted": self.inserted,
            "removed": self.removed,
            "live_before": self.live_before,
            "live_count": self.live_count,
            "c_ratio": self.c_ratio,
        }


@dataclass(frozen=True, eq=False)
class StepReport:
    gir: GaussianImage
    soft_mask: np.ndarray
    binary_mask: np.ndarray
    removed_ids: List[int]
    inserted_ids: List[int]
    redundancy: RedundancyReport
    id_weights: Dict[int, float]
    stats: FrameStats


@dataclass
class StreamState:
    store: GlobalGaussianStore
    config: PipelineConfig
    predictor: MaskPredictor
    rasterizer: Rasterizer
    frame_index: int = 0
    stats: List[FrameStats] = field(default_factory=lambda: [])
    total_inserted: int = 0
    total_removed: int = 0

    @staticmethod
    def create(config: PipelineConfig = PipelineConfig(), predictor: Optional[MaskPredictor] = None) -> "StreamState":
        return StreamState(
            store=GlobalGaussianStore(),
            config=config,
            predictor=predictor or make_predictor(config.predictor),
            rasterizer=Rasterizer(tile_size=config.tile_size, workers=config.workers),
        )

    @property
    def live_count(self) -> int:
        return len(self.store)


def threshold_mask(soft: np.ndarray, tau_mask: float) -> np.ndarray:
    """
    Keep-mask: 1 where the soft mask reaches tau_mask, 0 elsewhere.
    """
    if not 0.0 <= tau_mask <= 1.0:
        raise ConfigurationError(f"tau_mask must lie in [0, 1], got {tau_mask}")

    return (np.asarray(soft) >= tau_mask).astype(np.uint8)


def aggregate_id_weights(id_map: np.ndarray, soft: np.ndarray) -> Dict[int, float]:
    """
    Soft weight of every id referenced by the map: the minimum over its pixels.
    """
    valid = id_map != SENTINEL
    ids, inverse = np.unique(id_map[valid], return_inverse=True)
    weights = np.full(ids.shape, np.inf)
    np.minimum.at(weights, inverse, np.asarray(soft, dtype=np.float64)[valid])
    return {int(i): float(w) for i, w in zip(ids, weights)}


def _check_frame(config: PipelineConfig, frame: FrameInput) -> None:
    camera, current = frame.camera, frame.current
    if (current.width, current.height) != (camera.width, camera.height):
        raise ConfigurationError(
            f"candidate map is {current.width}x{current.height}, camera is {camera.width}x{camera.height}"
        )

    if config.resolution is not None and tuple(config.resolution) != (camera.width, camera.height):
        width, height = config.resolution
        raise ConfigurationError(f"frame is {camera.width}x{camera.height}, configured resolution is {width}x{height}")

    if frame.image is not None and frame.image.shape[:2] != (camera.height, camera.width):
        raise ConfigurationError(f"frame image has shape {frame.image.shape}, camera is {camera.width}x{camera.height}")


def step(state: StreamState, frame: FrameInput) -> StepReport:
    config = state.config
    _check_frame(config, frame)

    gir = build_gir(state.store, frame.camera, config.strategy, config.gir_tau, state.rasterizer)
    redundancy = compute_redundancy(gir, frame.current, state.store, config.redundancy_config())
    soft = checked_mask(state.predictor, state.predictor(gir, frame.current, redundancy), gir.id_map.shape)
    binary = threshold_mask(soft, config.tau_mask)
    id_weights = aggregate_id_weights(gir.id_map, soft)

    removed_ids = sorted(id for id, weight in id_weights.items() if weight < config.tau_mask)
    live_before = len(state.store)
    removed = state.store.remove(removed_ids)
    inserted_ids = state.store.insert(frame.current.gaussians(), frame=state.frame_index)
    state.store.frame_index = state.frame_index

    live_after = len(state.store)
    if live_after != live_before - removed + len(inserted_ids):
        raise InvariantError(f"store holds {live_after} Gaussians after the update, accounting expects otherwise")

    stats = FrameStats(
        frame_index=state.frame_index,
        inserted=len(inserted_ids),
        removed=removed,
        live_before=live_before,
        live_count=live_after,
        c_ratio=c_ratio(removed, removed + live_after),
    )
    state.stats.append(stats)
    state.total_inserted += len(inserted_ids)
    state.total_removed += removed
    state.frame_index += 1

    return StepReport(gir, soft, binary, removed_ids, inserted_ids, redundancy, id_weights, stats)


def opacity_modulation_render(
    state: StreamState,
    camera: CameraModel,
    soft_mask_by_id: Optional[Mapping[int, float]] = None,
    background: Optional[Sequence[float]] = None,
) -> RenderedImage:
    """
    Renders the store with every Gaussian's opacity scaled by its weight (1 when absent).
    """
    weights = soft_mask_by_id or {}
    gaussians = state.store.snapshot()
    scale = np.array([weights.get(int(id), 1.0) for id in gaussians.ids], dtype=np.float64)
    if scale.size and not (np.all(np.isfinite(scale)) and scale.min() >= 0.0 and scale.max() <= 1.0):
        raise InvariantError("opacity weights must lie in [0, 1]")

    bg = state.config.background if background is None else background
    return state.rasterizer.render(camera, project_arrays(camera, gaussians, scale), bg)


@dataclass(frozen=True, eq=False)
class ViewEvaluation:
    name: str
    rendered: RenderedImage
    psnr: Optional[float] = None
    ssim: Optional[float] = None
    l1: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "psnr": self.psnr, "ssim": self.ssim, "l1": self.l1}


def evaluate_views(state: StreamState, eval_views: Sequence[EvalView]) -> List[ViewEvaluation]:
    evaluations: List[ViewEvaluation] = []
    for index, view in enumerate(eval_views):
        rendered = opacity_modulation_render(state, view.camera)
        name = view.name or f"view_{index:03d}"
        if view.image is None:
            evaluations.append(ViewEvaluation(name, rendered))
            continue

        scores = psnr(rendered.rgb, view.image), ssim(rendered.rgb, view.image)
        l1 = l_rgb(rendered.rgb, view.image, state.config.loss_reduction)
        evaluations.append(ViewEvaluation(name, rendered, *scores, l1=l1))

    return evaluations


def _mean(values: Sequence[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None]
    if not present:
        return None

    if any(math.isinf(v) for v in present):
        return math.inf

    return float(np.mean(present))


@dataclass(frozen=True, eq=False)
class SequenceReport:
    predictor: str
    config: PipelineConfig
    stats: List[FrameStats]
    evaluations: List[ViewEvaluation]
    total_inserted: int
    total_removed: int
    live_count: int
    canceled: bool = False

    @property
    def total_c_ratio(self) -> float:
        return c_ratio(self.total_removed, self.total_inserted)

    @property
    def mean_psnr(self) -> Optional[float]:
        return _mean([e.psnr for e in self.evaluations])

    @property
    def mean_ssim(self) -> Optional[float]:
        return _mean([e.ssim for e in self.evaluations])

    @property
    def photometric_loss(self) -> Optional[float]:
        """
        L1 photometric loss over the scored eval views, reduced as `config.loss_reduction` says.
        """
        losses = [e.l1 for e in self.evaluations if e.l1 is not None]
        return float(sum(losses)) if losses else None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "predictor": self.predictor,
            "config": to_mapping(self.config),
            "frames": [s.to_dict() for s in self.stats],
            "evaluations": [e.to_dict() for e in self.evaluations],
            "total_inserted": self.total_inserted,
            "total_removed": self.total_removed,
            "total_c_ratio": self.total_c_ratio,
            "c_ratio": format_ratio(self.total_c_ratio),
            "live_count": self.live_count,
            "mean_psnr": self.mean_psnr,
            "mean_ssim": self.mean_ssim,
            "photometric_loss": self.photometric_loss,
            "canceled": self.canceled,
        }


def run_sequence(
    frames: Sequence[FrameInput],
    config: PipelineConfig = PipelineConfig(),
    eval_views: Sequence[EvalView] = (),
    predictor: Optional[MaskPredictor] = None,
    cancel: Optional[Callable[[], bool]] = None,
    on_frame: Optional[Callable[[StepReport], None]] = None,
    state: Optional[StreamState] = None,
) -> SequenceReport:
    """
    Streams every `frame_stride`-th frame in order, then renders the eval views from the final store.
    A canceled run skips the eval views.

    Raises:
        ConfigurationError: The sequence has no frames.
        FrameProcessingError: A frame failed; carries the frame index and the cause.
    """
    if not frames:
        raise ConfigurationError("sequence has no frames")

    state = state or StreamState.create(config, predictor)
    canceled = False
    for index in range(0, len(frames), config.frame_stride):
        if cancel is not None and cancel():
            canceled = True
            break

        state.frame_index = index
        try:
            report = step(state, frames[index])
        except Exception as err:
            raise FrameProcessingError(index, err) from err

        if on_frame is not None:
            on_frame(report)

    return SequenceReport(
        predictor=state.predictor.name,
        config=config,
        stats=list(state.stats),
        evaluations=[] if canceled else evaluate_views(state, eval_views),
        total_inserted=state.total_inserted,
        total_removed=state.total_removed,
        live_count=state.live_count,
        canceled=canceled,
    )


def sweep_thresholds(
    frames: Sequence[FrameInput],
    config: PipelineConfig,
    eval_views: Sequence[EvalView],
    taus: Sequence[float],
    on_run: Optional[Callable[[str, SequenceReport], None]] = None,
) -> List[MetricsRow]:
    """
    Streams the sequence once without masking and once per masking threshold.
    """

    def run(label: str, run_config: PipelineConfig, predictor: Optional[MaskPredictor]) -> SequenceReport:
        report = run_sequence(frames, run_config, eval_views, predictor)
        if on_run is not None:
            on_run(label, report)
        return report

    def row(method: str, tau: Optional[float], report: SequenceReport) -> MetricsRow:
        return MetricsRow(
            method=method,
            psnr=math.nan if report.mean_psnr is None else report.mean_psnr,
            ssim=math.nan if report.mean_ssim is None else report.mean_ssim,
            c_ratio=report.total_c_ratio,
            views=len(eval_views),
            tau=tau,
        )

    rows = [row(NO_MASK, None, run(NO_MASK, config, ConstantPredictor(1.0)))]
    for tau in taus:
        run_config = config.replace(tau_mask=tau)
        report = run(f"tau={tau:g}", run_config, None)
        rows.append(row(report.predictor, tau, report))

    return rows

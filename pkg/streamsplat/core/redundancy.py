from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple, Union

import numpy as np

from streamsplat.core.errors import ConfigurationError
from streamsplat.core.gir import SENTINEL, GaussianImage
from streamsplat.core.girformat import serialize_redundancy
from streamsplat.core.obb import BoxArrays, boxes_from_arrays, may_intersect, obb_intersection_volume
from streamsplat.core.pixelmap import PixelGaussians
from streamsplat.core.store import GlobalGaussianStore


class NeighborSource(Enum):
    current = "current"
    history = "history"
    both = "both"

    @staticmethod
    def parse(name: Union[str, "NeighborSource"]) -> "NeighborSource":
        if isinstance(name, NeighborSource):
            return name

        try:
            return NeighborSource(name)
        except ValueError:
            raise ConfigurationError(f"unknown neighbor source '{name}'") from None


@dataclass(frozen=True)
class RedundancyConfig:
    k_sigma: float = 3.0
    window_radius: int = 2
    theta_red: float = 0.7
    neighbors: NeighborSource = NeighborSource.current

    def __post_init__(self) -> None:
        if not self.k_sigma > 0:
            raise ConfigurationError(f"k_sigma must be positive, got {self.k_sigma}")

        if self.window_radius < 0:
            raise ConfigurationError(f"window_radius must be non-negative, got {self.window_radius}")

        if not 0.0 <= self.theta_red <= 1.0:
            raise ConfigurationError(f"theta_red must lie in [0, 1], got {self.theta_red}")


@dataclass(frozen=True, eq=False)
class RedundancyReport:
    """
    Per history pixel: the largest fraction of the history Gaussian's box covered by one
    neighbor box inside the window, and the redundancy label derived from it.
    """

    iou: np.ndarray
    gt_mask: np.ndarray
    history_ids: np.ndarray
    window_radius: int
    k_sigma: float
    theta_red: float

    def redundant_ids(self) -> List[int]:
        return sorted(set(self.history_ids[self.gt_mask.astype(bool)].tolist()))

    def to_bytes(self) -> bytes:
        return serialize_redundancy(self.iou, self.gt_mask, self.history_ids, self.theta_red)


def _window_offsets(radius: int) -> List[Tuple[int, int]]:
    return [(dy, dx) for dy in range(-radius, radius + 1) for dx in range(-radius, radius + 1)]


def _shifted(index_map: np.ndarray, dy: int, dx: int, radius: int) -> np.ndarray:
    """
    index_map[y + dy, x + dx] for every (y, x), -1 outside the image.
    """
    height, width = index_map.shape
    padded = np.pad(index_map, radius, constant_values=-1)
    return padded[radius + dy : radius + dy + height, radius + dx : radius + dx + width]


def _concat(boxes: List[BoxArrays]) -> BoxArrays:
    return BoxArrays(
        np.concatenate([b.centers for b in boxes]),
        np.concatenate([b.axes for b in boxes]),
        np.concatenate([b.half_extents for b in boxes]),
    )


def compute_redundancy(
    history_gir: GaussianImage,
    current: PixelGaussians,
    store: GlobalGaussianStore,
    config: RedundancyConfig = RedundancyConfig(),
) -> RedundancyReport:
    """
    Compares every history Gaussian referenced by the GIR with the neighbor boxes found within
    a square window of Chebyshev radius `window_radius` around its pixel.
    Each distinct (history Gaussian, neighbor) pair is intersected once.
    """
    if history_gir.id_map.shape != current.valid.shape:
        raise ConfigurationError(
            f"history GIR is {history_gir.width}x{history_gir.height}, "
            f"current frame is {current.width}x{current.height}"
        )

    height, width = current.valid.shape
    radius = config.window_radius
    snapshot = store.snapshot()

    history_ids, history_index = np.unique(history_gir.id_map, return_inverse=True)
    history_index = history_index.reshape(height, width)
    positions = snapshot.index_of(history_ids)
    live = (history_ids != SENTINEL) & (positions >= 0)
    if not np.any(live):
        return _empty_report(history_gir, config)

    history_index = np.where(live[history_index], history_index, -1)
    history_boxes = boxes_from_arrays(snapshot.take(np.maximum(positions, 0)), config.k_sigma)

    current_boxes = boxes_from_arrays(current.to_arrays(), config.k_sigma)
    current_index = np.full(height * width, -1, dtype=np.int64)
    current_index[np.flatnonzero(current.valid)] = np.arange(current.count)
    current_index = current_index.reshape(height, width)

    neighbor_maps: List[np.ndarray] = []
    if config.neighbors in (NeighborSource.current, NeighborSource.both):
        neighbor_maps.append(current_index)
    if config.neighbors in (NeighborSource.history, NeighborSource.both):
        neighbor_maps.append(np.where(history_index >= 0, history_index + len(current_boxes), -1))

    pool = _concat([current_boxes, history_boxes])
    pixel_parts, history_parts, neighbor_parts = [], [], []
    flat_history = history_index.reshape(-1)
    has_history = flat_history >= 0
    for neighbor_map in neighbor_maps:
        for dy, dx in _window_offsets(radius):
            neighbor = _shifted(neighbor_map, dy, dx, radius).reshape(-1)
            pair = has_history & (neighbor >= 0) & (neighbor != flat_history + len(current_boxes))
            pixel_parts.append(np.flatnonzero(pair))
            history_parts.append(flat_history[pair])
            neighbor_parts.append(neighbor[pair])

    iou = np.zeros(height * width, dtype=np.float64)
    if pixel_parts:
        pixels = np.concatenate(pixel_parts)
        keys = np.concatenate(history_parts) * len(pool) + np.concatenate(neighbor_parts)
        unique_keys, inverse = np.unique(keys, return_inverse=True)
        coverage = _pair_coverage(history_boxes, pool, unique_keys // len(pool), unique_keys % len(pool))
        np.maximum.at(iou, pixels, coverage[inverse])

    iou = iou.reshape(height, width)
    gt_mask = ((iou >= config.theta_red) & (history_index >= 0)).astype(np.uint8)
    return RedundancyReport(
        iou=iou,
        gt_mask=gt_mask,
        history_ids=history_gir.id_map.copy(),
        window_radius=radius,
        k_sigma=config.k_sigma,
        theta_red=config.theta_red,
    )


def _pair_coverage(
    history: BoxArrays, pool: BoxArrays, history_index: np.ndarray, pool_index: np.ndarray
) -> np.ndarray:
    coverage = np.zeros(history_index.shape[0], dtype=np.float64)
    if coverage.size == 0:
        return coverage

    left = BoxArrays(history.centers[history_index], history.axes[history_index], history.half_extents[history_index])
    right = BoxArrays(pool.centers[pool_index], pool.axes[pool_index], pool.half_extents[pool_index])
    volumes = left.volumes()
    identical = (
        np.all(left.centers == right.centers, axis=1)
        & np.all(left.axes == right.axes, axis=(1, 2))
        & np.all(left.half_extents == right.half_extents, axis=1)
    )
    coverage[identical] = 1.0
    for k in np.flatnonzero(may_intersect(left, right) & ~identical):
        coverage[k] = min(obb_intersection_volume(left.box(k), right.box(k)) / volumes[k], 1.0)

    return coverage


def _empty_report(history_gir: GaussianImage, config: RedundancyConfig) -> RedundancyReport:
    shape = history_gir.id_map.shape
    return RedundancyReport(
        iou=np.zeros(shape, dtype=np.float64),
        gt_mask=np.zeros(shape, dtype=np.uint8),
        history_ids=history_gir.id_map.copy(),
        window_radius=config.window_radius,
        k_sigma=config.k_sigma,
        theta_red=config.theta_red,
    )

from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Set, Tuple, Union

import numpy as np

from streamsplat.core.camera import CameraModel
from streamsplat.core.errors import ConfigurationError
from streamsplat.core.gaussian import Gaussian, GaussianArrays, vech
from streamsplat.core.rasterizer import Rasterizer, TileFragments, transmittance_weights
from streamsplat.core.splatting import project_arrays
from streamsplat.core.store import GlobalGaussianStore

GIR_CHANNELS = 10
SENTINEL = -1

Pixel = Tuple[int, int]
GaussianSource = Union[GlobalGaussianStore, GaussianArrays]


class Strategy(Enum):
    nearest = "nearest"
    most_contributive = "most_contributive"

    @staticmethod
    def parse(name: Union[str, "Strategy"]) -> "Strategy":
        if isinstance(name, Strategy):
            return name

        try:
            return Strategy(name)
        except ValueError:
            choices = ", ".join(s.value for s in Strategy)
            raise ConfigurationError(f"unknown GIR strategy '{name}', expected one of {choices}") from None


@dataclass(frozen=True, eq=False)
class GaussianImage:
    """
    View-aligned encoding of the Gaussian that dominates each pixel.

    Channels per pixel: projected position (u, v), the upper triangle of the Gaussian's
    covariance in the camera frame (6), its effective opacity at the pixel and its id.
    `id_map` holds the ids in exact integer form; background pixels carry SENTINEL and zeros.
    """

    channels: np.ndarray
    id_map: np.ndarray
    strategy: Strategy
    tau: float = 0.0

    @property
    def width(self) -> int:
        return int(self.id_map.shape[1])

    @property
    def height(self) -> int:
        return int(self.id_map.shape[0])

    @property
    def mu2d(self) -> np.ndarray:
        return self.channels[..., 0:2]

    @property
    def vech(self) -> np.ndarray:
        return self.channels[..., 2:8]

    @property
    def alpha(self) -> np.ndarray:
        return self.channels[..., 8]

    @property
    def valid(self) -> np.ndarray:
        return self.id_map != SENTINEL

    def unique_ids(self) -> np.ndarray:
        return np.unique(self.id_map[self.valid])

    def pixels_of(self, id: int) -> List[Pixel]:
        rows, cols = np.nonzero(self.id_map == id)
        return [(int(u), int(v)) for v, u in zip(rows, cols)]

    def identical(self, other: "GaussianImage") -> bool:
        return (
            self.strategy == other.strategy
            and np.float32(self.tau) == np.float32(other.tau)
            and self.channels.dtype == other.channels.dtype
            and np.array_equal(self.channels, other.channels)
            and np.array_equal(self.id_map, other.id_map)
        )


def select_nearest(alphas: np.ndarray, tau: float) -> np.ndarray:
    """
    Index of the first depth-ordered entry along the last axis whose alpha exceeds tau, -1 if none.
    """
    above = alphas > tau
    if alphas.shape[-1] == 0:
        return np.full(alphas.shape[:-1], -1, dtype=np.int64)

    first = np.argmax(above, axis=-1)
    return np.where(np.any(above, axis=-1), first, -1).astype(np.int64)


def select_most_contributive(alphas: np.ndarray) -> np.ndarray:
    """
    Index of the entry with the largest transmittance-weighted opacity along the last axis,
    the front-most one on ties, -1 if no entry contributes.
    """
    if alphas.shape[-1] == 0:
        return np.full(alphas.shape[:-1], -1, dtype=np.int64)

    _, weights, _ = transmittance_weights(alphas)
    best = np.argmax(weights, axis=-1)
    best_weight = np.take_along_axis(weights, best[..., None], axis=-1)[..., 0]
    return np.where(best_weight > 0.0, best, -1).astype(np.int64)


def as_arrays(source: GaussianSource) -> GaussianArrays:
    if isinstance(source, GlobalGaussianStore):
        return source.snapshot()

    return source


@dataclass
class _GirCanvas:
    channels: np.ndarray
    id_map: np.ndarray
    camera_vech: np.ndarray
    positions: GaussianArrays
    strategy: Strategy
    tau: float

    def fill(self, fragments: TileFragments) -> None:
        if self.strategy is Strategy.nearest:
            selected = select_nearest(fragments.alpha, self.tau)
        else:
            selected = select_most_contributive(fragments.alpha)

        shape = fragments.shape
        tile_channels = np.zeros((shape[0] * shape[1], GIR_CHANNELS), dtype=np.float32)
        tile_ids = np.full(shape[0] * shape[1], SENTINEL, dtype=np.int64)

        pixels = np.flatnonzero(selected >= 0)
        columns = selected[pixels]
        splat = fragments.splat_index[columns]
        source_ids = fragments.splats.source_id[splat]
        gaussian_pos = self.positions.index_of(source_ids)

        tile_channels[pixels, 0:2] = fragments.splats.mean2d[splat]
        tile_channels[pixels, 2:8] = self.camera_vech[gaussian_pos]
        tile_channels[pixels, 8] = fragments.alpha[pixels, columns]
        tile_channels[pixels, 9] = source_ids
        tile_ids[pixels] = source_ids

        self.channels[fragments.rows, fragments.cols] = tile_channels.reshape(shape + (GIR_CHANNELS,))
        self.id_map[fragments.rows, fragments.cols] = tile_ids.reshape(shape)


def build_gir(
    source: GaussianSource,
    camera: CameraModel,
    strategy: Union[str, Strategy] = Strategy.most_contributive,
    tau: float = 0.5,
    rasterizer: Optional[Rasterizer] = None,
) -> GaussianImage:
    """
    Renders the Gaussian image of `source` seen from `camera`, selecting one Gaussian per pixel.
    """
    strategy = Strategy.parse(strategy)
    if strategy is Strategy.nearest and not 0.0 < tau < 1.0:
        raise ConfigurationError(f"nearest rendering needs tau in (0, 1), got {tau}")

    gaussians = as_arrays(source)
    rotation = camera.rotation
    camera_covariances = np.einsum("ij,njk,lk->nil", rotation, gaussians.covariances(), rotation)

    canvas = _GirCanvas(
        channels=np.zeros((camera.height, camera.width, GIR_CHANNELS), dtype=np.float32),
        id_map=np.full((camera.height, camera.width), SENTINEL, dtype=np.int64),
        camera_vech=vech(camera_covariances),
        positions=gaussians,
        strategy=strategy,
        tau=float(np.float32(tau)) if strategy is Strategy.nearest else 0.0,
    )

    rasterizer = rasterizer or Rasterizer()
    rasterizer.map_tiles(camera, project_arrays(camera, gaussians), canvas.fill)
    return GaussianImage(canvas.channels, canvas.id_map, strategy, canvas.tau)


def build_gir_nearest(
    source: GaussianSource, camera: CameraModel, tau: float, rasterizer: Optional[Rasterizer] = None
) -> GaussianImage:
    return build_gir(source, camera, Strategy.nearest, tau, rasterizer)


def build_gir_most_contributive(
    source: GaussianSource, camera: CameraModel, rasterizer: Optional[Rasterizer] = None
) -> GaussianImage:
    return build_gir(source, camera, Strategy.most_contributive, rasterizer=rasterizer)


@dataclass(frozen=True)
class IdResolution:
    resolved: Dict[Pixel, Gaussian]
    stale_pixels: List[Pixel]
    stale_ids: Set[int]


def resolve_ids(gir: GaussianImage, store: GlobalGaussianStore) -> IdResolution:
    """
    Maps every non-background pixel (u, v) to its live Gaussian. Pixels whose id has been
    removed from the store since the image was built are reported as stale.
    """
    resolved: Dict[Pixel, Gaussian] = {}
    stale_pixels: List[Pixel] = []
    stale_ids: Set[int] = set()

    rows, cols = np.nonzero(gir.valid)
    for v, u, id in zip(rows.tolist(), cols.tolist(), gir.id_map[rows, cols].tolist()):
        gaussian = store.get(id)
        if gaussian is None:
            stale_pixels.append((u, v))
            stale_ids.add(id)
        else:
            resolved[(u, v)] = gaussian

    return IdResolution(resolved, stale_pixels, stale_ids)

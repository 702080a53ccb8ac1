from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Sequence, Tuple, TypeVar

import numpy as np

from streamsplat.core.camera import CameraModel
from streamsplat.core.errors import InvariantError
from streamsplat.core.splatting import ALPHA_MIN, SplatBatch, SplatInput, as_batch

MIN_TRANSMITTANCE = 1e-4
TILE_SIZE = 16

T = TypeVar("T")


class Contributor(NamedTuple):
    source_id: int
    alpha: float
    weight: float


@dataclass(frozen=True, eq=False)
class RenderedImage:
    rgb: np.ndarray
    accumulated_alpha: np.ndarray

    @property
    def width(self) -> int:
        return int(self.rgb.shape[1])

    @property
    def height(self) -> int:
        return int(self.rgb.shape[0])


@dataclass(frozen=True, eq=False)
class TileFragments:
    """
    Per-pixel compositing terms of one tile. Rows are the tile's pixels in row-major order,
    columns the splats binned to the tile in depth order. Non-contributing entries are zero.
    """

    rows: slice
    cols: slice
    splats: SplatBatch
    splat_index: np.ndarray
    alpha: np.ndarray
    weight: np.ndarray
    transmittance: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows.stop - self.rows.start, self.cols.stop - self.cols.start)


def transmittance_weights(
    alpha: np.ndarray, min_transmittance: float = 0.0
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Front-to-back compositing along the last axis.

    Returns the alphas that take part in compositing, their weights alpha_i * prod_{j<i}(1 - alpha_j)
    and the transmittance left for the background. A term is dropped once the transmittance in
    front of it has fallen below `min_transmittance`.
    """
    one_minus = 1.0 - alpha
    after = np.cumprod(one_minus, axis=-1)
    before = np.concatenate([np.ones(alpha.shape[:-1] + (1,)), after[..., :-1]], axis=-1)
    active = (alpha > 0.0) & (before >= min_transmittance)
    kept = np.where(active, alpha, 0.0)
    remaining = np.prod(np.where(active, one_minus, 1.0), axis=-1)
    return kept, kept * before, remaining


class Rasterizer:
    """
    Tile based forward renderer. Splats are depth sorted once (ties broken by source id),
    binned to square tiles by their footprint and composited per tile. Tiles are independent,
    so they can be processed on a thread pool; the output does not depend on the worker count.
    """

    def __init__(
        self,
        tile_size: int = TILE_SIZE,
        workers: int = 1,
        alpha_min: float = ALPHA_MIN,
        min_transmittance: float = MIN_TRANSMITTANCE,
    ) -> None:
        if tile_size <= 0 or workers <= 0:
            raise InvariantError("tile size and worker count must be positive")

        self.tile_size = tile_size
        self.workers = workers
        self.alpha_min = alpha_min
        self.min_transmittance = min_transmittance

    def tiles(self, camera: CameraModel) -> List[Tuple[slice, slice]]:
        size = self.tile_size
        return [
            (slice(y, min(y + size, camera.height)), slice(x, min(x + size, camera.width)))
            for y in range(0, camera.height, size)
            for x in range(0, camera.width, size)
        ]

    def map_tiles(self, camera: CameraModel, splats: SplatInput, fn: Callable[[TileFragments], T]) -> List[T]:
        batch = depth_sorted(as_batch(splats))
        conics = batch.conics()
        tiles = self.tiles(camera)

        def process(tile: Tuple[slice, slice]) -> T:
            return fn(self._fragments(batch, conics, *tile))

        if self.workers == 1:
            return [process(tile) for tile in tiles]

        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(process, tiles))

    def render(self, camera: CameraModel, splats: SplatInput, background: Sequence[float] = (0, 0, 0)) -> RenderedImage:
        """
        Composites in float64 and stores the result as float32.
        """
        rgb = np.zeros((camera.height, camera.width, 3), dtype=np.float32)
        accumulated = np.zeros((camera.height, camera.width), dtype=np.float32)
        bg = np.asarray(background, dtype=np.float64).reshape(3)

        def composite(fragments: TileFragments) -> None:
            colors = fragments.splats.color[fragments.splat_index]
            tile_rgb = fragments.weight @ colors + fragments.transmittance[:, None] * bg
            shape = fragments.shape
            rgb[fragments.rows, fragments.cols] = np.clip(tile_rgb, 0.0, 1.0).reshape(shape + (3,))
            accumulated[fragments.rows, fragments.cols] = (1.0 - fragments.transmittance).reshape(shape)

        self.map_tiles(camera, splats, composite)
        return RenderedImage(rgb=rgb, accumulated_alpha=accumulated)

    def contributors(self, camera: CameraModel, splats: SplatInput, pixel: Tuple[int, int]) -> List[Contributor]:
        """
        Depth sorted compositing terms at pixel (u, v), exactly as `render` sums them.
        """
        u, v = pixel
        if not (0 <= u < camera.width and 0 <= v < camera.height):
            return []

        batch = depth_sorted(as_batch(splats))
        size = self.tile_size
        rows = slice(v - v % size, min(v - v % size + size, camera.height))
        cols = slice(u - u % size, min(u - u % size + size, camera.width))
        fragments = self._fragments(batch, batch.conics(), rows, cols)
        row = (v - rows.start) * (cols.stop - cols.start) + (u - cols.start)
        return [
            Contributor(int(batch.source_id[s]), float(fragments.alpha[row, k]), float(fragments.weight[row, k]))
            for k, s in enumerate(fragments.splat_index)
            if fragments.alpha[row, k] > 0.0
        ]

    def _fragments(self, batch: SplatBatch, conics: np.ndarray, rows: slice, cols: slice) -> TileFragments:
        mean, radius = batch.mean2d, batch.radius
        binned = (
            (batch.alpha > self.alpha_min)
            & (mean[:, 0] + radius >= cols.start)
            & (mean[:, 0] - radius <= cols.stop - 1)
            & (mean[:, 1] + radius >= rows.start)
            & (mean[:, 1] - radius <= rows.stop - 1)
        )
        index = np.flatnonzero(binned)

        ys, xs = np.mgrid[rows, cols]
        dx = xs.reshape(-1, 1) - mean[index, 0][None, :]
        dy = ys.reshape(-1, 1) - mean[index, 1][None, :]
        a, b, c = conics[index, 0], conics[index, 1], conics[index, 2]
        power = -0.5 * (a * dx * dx + 2.0 * b * dx * dy + c * dy * dy)
        alpha = batch.alpha[index][None, :] * np.exp(np.minimum(power, 0.0))
        alpha = np.where(alpha > self.alpha_min, alpha, 0.0)

        kept, weight, remaining = transmittance_weights(alpha, self.min_transmittance)
        return TileFragments(rows, cols, batch, index, kept, weight, remaining)


def depth_order(batch: SplatBatch) -> np.ndarray:
    return np.lexsort((batch.source_id, batch.depth))


def depth_sorted(batch: SplatBatch) -> SplatBatch:
    return batch.take(depth_order(batch))


_default = Rasterizer()


def render(camera: CameraModel, splats: SplatInput, background: Sequence[float] = (0, 0, 0)) -> RenderedImage:
    return _default.render(camera, splats, background)


def per_pixel_contributors(camera: CameraModel, splats: SplatInput, pixel: Tuple[int, int]) -> List[Contributor]:
    return _default.contributors(camera, splats, pixel)

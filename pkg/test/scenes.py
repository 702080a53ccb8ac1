"""
Builders for small scenes, cameras and splat lists used across the test suite.
"""
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from streamsplat.core.camera import CameraModel
from streamsplat.core.gaussian import Gaussian, GaussianArrays
from streamsplat.core.pipeline import FrameInput
from streamsplat.core.pixelmap import PixelGaussians
from streamsplat.core.splatting import Splat2D
from streamsplat.core.store import GlobalGaussianStore

WIDTH = 32
HEIGHT = 32
FOCAL = 40.0
DEPTH = 5.0


def camera(width: int = WIDTH, height: int = HEIGHT, focal: float = FOCAL) -> CameraModel:
    """
    Camera at the origin looking down +z, principal point in the image center.
    """
    return CameraModel(focal, focal, width / 2.0, height / 2.0, width=width, height=height)


def gaussian(
    x: float = 0.0,
    y: float = 0.0,
    z: float = DEPTH,
    scale: float = 0.1,
    color: Sequence[float] = (1.0, 1.0, 1.0),
    alpha: float = 0.9,
    rotation: Sequence[float] = (1.0, 0.0, 0.0, 0.0),
    origin: int = -1,
) -> Gaussian:
    return Gaussian.create((x, y, z), (scale, scale, scale), rotation, color, alpha, origin)


def at_pixel(u: float, v: float, depth: float = DEPTH, cam: Optional[CameraModel] = None, **kwargs: float) -> Gaussian:
    """
    A Gaussian whose center projects onto image coordinates (u, v).
    """
    cam = cam or camera()
    x, y, z = cam.unproject(u, v, depth)
    return gaussian(float(x), float(y), float(z), **kwargs)  # type: ignore[arg-type]


def splat(
    u: float,
    v: float,
    depth: float,
    color: Tuple[float, float, float],
    alpha: float,
    variance: float = 0.5,
    source_id: int = 0,
) -> Splat2D:
    return Splat2D(source_id, (u, v), np.eye(2) * variance, depth, color, alpha)


def random_splats(rng: np.random.Generator, count: int, width: int, height: int) -> List[Splat2D]:
    splats = []
    for i in range(count):
        a = rng.normal(size=(2, 2)) * rng.uniform(0.5, 3.0)
        cov = a @ a.T + np.eye(2) * 0.2
        splats.append(
            Splat2D(
                source_id=i,
                mean2d=(float(rng.uniform(-4, width + 4)), float(rng.uniform(-4, height + 4))),
                cov2d=cov,
                depth=float(rng.uniform(0.5, 20.0)),
                color=tuple(float(c) for c in rng.uniform(0, 1, size=3)),  # type: ignore[arg-type]
                alpha=float(rng.uniform(0.02, 0.99)),
            )
        )
    return splats


def random_quaternion(rng: np.random.Generator) -> Tuple[float, float, float, float]:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    return tuple(float(x) for x in q)  # type: ignore[return-value]


def random_gaussians(rng: np.random.Generator, count: int, spread: float = 1.0) -> List[Gaussian]:
    return [
        Gaussian.create(
            (rng.uniform(-spread, spread), rng.uniform(-spread, spread), DEPTH + rng.uniform(-spread, spread)),
            rng.uniform(0.02, 0.2, size=3),
            random_quaternion(rng),
            rng.uniform(0, 1, size=3),
            float(rng.uniform(0.1, 1.0)),
        )
        for _ in range(count)
    ]


def arrays_of(gaussians: Sequence[Gaussian]) -> GaussianArrays:
    return GaussianArrays.from_gaussians(list(gaussians)).with_sequential_ids()


def grid_pixels(spacing: int = 8, width: int = WIDTH, height: int = HEIGHT) -> List[Tuple[int, int]]:
    """
    Pixel centers on a regular grid, far enough apart that splats of scale 0.02 at DEPTH do not overlap.
    """
    offset = spacing // 2
    return [(u, v) for v in range(offset, height, spacing) for u in range(offset, width, spacing)]


def separated_candidates(
    pixels: Sequence[Tuple[int, int]], cam: Optional[CameraModel] = None, scale: float = 0.02, alpha: float = 0.95
) -> PixelGaussians:
    """
    One small opaque Gaussian per pixel, centered on it.
    """
    cam = cam or camera()
    candidates = [
        ((u, v), at_pixel(u, v, cam=cam, scale=scale, alpha=alpha, origin=k)) for k, (u, v) in enumerate(pixels)
    ]
    return PixelGaussians.from_candidates(cam.width, cam.height, candidates)


def repeated_frames(count: int, candidates: PixelGaussians, cam: Optional[CameraModel] = None) -> List[FrameInput]:
    cam = cam or camera()
    return [FrameInput(cam, candidates) for _ in range(count)]


def store_with(gaussians: Sequence[Gaussian]) -> GlobalGaussianStore:
    store = GlobalGaussianStore()
    store.insert(gaussians)
    return store


def rotation_about_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

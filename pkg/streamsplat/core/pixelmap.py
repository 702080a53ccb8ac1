from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np

from streamsplat.core.errors import InvariantError
from streamsplat.core.gaussian import UNIT_NORM_TOLERANCE, Gaussian, GaussianArrays

Pixel = Tuple[int, int]


@dataclass(frozen=True, eq=False)
class PixelGaussians:
    """
    Per-pixel Gaussian candidates of one frame, at most one per pixel.
    All arrays are indexed [row, column]; `valid` marks the pixels that carry a candidate.
    """

    valid: np.ndarray
    mu: np.ndarray
    scale: np.ndarray
    rotation: np.ndarray
    color: np.ndarray
    alpha: np.ndarray
    origin: np.ndarray

    def __post_init__(self) -> None:
        shape = self.valid.shape
        expected = {
            "mu": shape + (3,),
            "scale": shape + (3,),
            "rotation": shape + (4,),
            "color": shape + (3,),
            "alpha": shape,
            "origin": shape,
        }
        for name, wanted in expected.items():
            if getattr(self, name).shape != wanted:
                raise InvariantError(f"{name} has shape {getattr(self, name).shape}, expected {wanted}")

        self._check_candidates()

    def _check_candidates(self) -> None:
        v = self.valid
        checks = [
            ("non-finite values", ~np.all(np.isfinite(self.mu[v]), axis=-1)),
            ("non-positive scale", ~np.all(self.scale[v] > 0, axis=-1)),
            ("rotation not normalized", np.abs(np.linalg.norm(self.rotation[v], axis=-1) - 1.0) > UNIT_NORM_TOLERANCE),
            ("alpha outside [0, 1]", ~((self.alpha[v] >= 0) & (self.alpha[v] <= 1))),
            ("color outside [0, 1]", ~np.all((self.color[v] >= 0) & (self.color[v] <= 1), axis=-1)),
        ]
        rows, cols = np.nonzero(v)
        for message, failing in checks:
            if np.any(failing):
                first = int(np.flatnonzero(failing)[0])
                raise InvariantError(f"candidate at pixel ({cols[first]}, {rows[first]}): {message}")

    @property
    def width(self) -> int:
        return int(self.valid.shape[1])

    @property
    def height(self) -> int:
        return int(self.valid.shape[0])

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.valid))

    @staticmethod
    def empty(width: int, height: int) -> "PixelGaussians":
        rotation = np.zeros((height, width, 4))
        rotation[..., 0] = 1.0
        return PixelGaussians(
            valid=np.zeros((height, width), dtype=bool),
            mu=np.zeros((height, width, 3)),
            scale=np.ones((height, width, 3)),
            rotation=rotation,
            color=np.zeros((height, width, 3)),
            alpha=np.zeros((height, width)),
            origin=np.full((height, width), -1, dtype=np.int64),
        )

    @staticmethod
    def from_candidates(width: int, height: int, candidates: Iterable[Tuple[Pixel, Gaussian]]) -> "PixelGaussians":
        empty = PixelGaussians.empty(width, height)
        valid, mu, scale = empty.valid.copy(), empty.mu.copy(), empty.scale.copy()
        rotation, color = empty.rotation.copy(), empty.color.copy()
        alpha, origin = empty.alpha.copy(), empty.origin.copy()

        for (u, v), g in candidates:
            if not (0 <= u < width and 0 <= v < height):
                raise InvariantError(f"candidate pixel ({u}, {v}) lies outside the {width}x{height} image")

            if valid[v, u]:
                raise InvariantError(f"more than one candidate at pixel ({u}, {v})")

            valid[v, u] = True
            mu[v, u], scale[v, u], rotation[v, u] = g.mu, g.scale, g.rotation
            color[v, u], alpha[v, u], origin[v, u] = g.color, g.alpha, g.origin

        return PixelGaussians(valid, mu, scale, rotation, color, alpha, origin)

    def pixels(self) -> np.ndarray:
        """
        (u, v) coordinates of all candidates in row-major order.
        """
        rows, cols = np.nonzero(self.valid)
        return np.stack([cols, rows], axis=1)

    def to_arrays(self) -> GaussianArrays:
        """
        Candidates in row-major pixel order; ids hold the flat pixel index.
        """
        v = self.valid
        return GaussianArrays(
            ids=np.flatnonzero(v).astype(np.int64),
            mu=self.mu[v],
            scale=self.scale[v],
            rotation=self.rotation[v],
            color=self.color[v],
            alpha=self.alpha[v],
            origin=self.origin[v],
        )

    def gaussian_at(self, u: int, v: int) -> Optional[Gaussian]:
        if not self.valid[v, u]:
            return None

        return Gaussian(
            mu=tuple(float(x) for x in self.mu[v, u]),  # type: ignore[arg-type]
            scale=tuple(float(x) for x in self.scale[v, u]),  # type: ignore[arg-type]
            rotation=tuple(float(x) for x in self.rotation[v, u]),  # type: ignore[arg-type]
            color=tuple(float(x) for x in self.color[v, u]),  # type: ignore[arg-type]
            alpha=float(self.alpha[v, u]),
            origin=int(self.origin[v, u]),
        )

    def candidates(self) -> List[Tuple[Pixel, Gaussian]]:
        result: List[Tuple[Pixel, Gaussian]] = []
        for u, v in self.pixels().tolist():
            g = self.gaussian_at(u, v)
            assert g is not None
            result.append(((u, v), g))

        return result

    def gaussians(self) -> List[Gaussian]:
        return [g for _, g in self.candidates()]

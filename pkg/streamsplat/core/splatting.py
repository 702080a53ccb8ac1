import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from streamsplat.core.camera import CameraModel
from streamsplat.core.errors import InvariantError
from streamsplat.core.gaussian import Gaussian, GaussianArrays

ALPHA_MIN = 1.0 / 255.0
COVARIANCE_BLUR = 0.3
FOOTPRINT_SIGMAS = 3.0


@dataclass(frozen=True, eq=False)
class Splat2D:
    source_id: int
    mean2d: Tuple[float, float]
    cov2d: np.ndarray
    depth: float
    color: Tuple[float, float, float]
    alpha: float


@dataclass(frozen=True, eq=False)
class SplatBatch:
    """
    Struct-of-arrays form of a list of splats. `cov2d` holds the projected covariance
    without the anti-aliasing blur, `radius` the pixel footprint used for culling and binning.
    """

    source_id: np.ndarray
    mean2d: np.ndarray
    cov2d: np.ndarray
    depth: np.ndarray
    color: np.ndarray
    alpha: np.ndarray
    radius: np.ndarray

    def __len__(self) -> int:
        return int(self.source_id.shape[0])

    @staticmethod
    def from_splats(splats: Sequence[Splat2D]) -> "SplatBatch":
        cov2d = np.array([s.cov2d for s in splats], dtype=np.float64).reshape(-1, 2, 2)
        alpha = np.array([s.alpha for s in splats], dtype=np.float64)
        return SplatBatch(
            source_id=np.array([s.source_id for s in splats], dtype=np.int64),
            mean2d=np.array([s.mean2d for s in splats], dtype=np.float64).reshape(-1, 2),
            cov2d=cov2d,
            depth=np.array([s.depth for s in splats], dtype=np.float64),
            color=np.array([s.color for s in splats], dtype=np.float64).reshape(-1, 3),
            alpha=alpha,
            radius=footprint_radius(cov2d, alpha),
        )

    def splats(self) -> Iterator[Splat2D]:
        for i in range(len(self)):
            yield Splat2D(
                source_id=int(self.source_id[i]),
                mean2d=(float(self.mean2d[i, 0]), float(self.mean2d[i, 1])),
                cov2d=self.cov2d[i].copy(),
                depth=float(self.depth[i]),
                color=(float(self.color[i, 0]), float(self.color[i, 1]), float(self.color[i, 2])),
                alpha=float(self.alpha[i]),
            )

    def take(self, index: np.ndarray) -> "SplatBatch":
        return SplatBatch(
            self.source_id[index],
            self.mean2d[index],
            self.cov2d[index],
            self.depth[index],
            self.color[index],
            self.alpha[index],
            self.radius[index],
        )

    def conics(self) -> np.ndarray:
        """
        Inverse of the blurred 2D covariances as (a, b, c) of the quadratic form a dx^2 + 2b dx dy + c dy^2.
        """
        xx = self.cov2d[:, 0, 0] + COVARIANCE_BLUR
        xy = self.cov2d[:, 0, 1]
        yy = self.cov2d[:, 1, 1] + COVARIANCE_BLUR
        det = xx * yy - xy * xy
        return np.stack([yy / det, -xy / det, xx / det], axis=1)


SplatInput = Union[SplatBatch, Sequence[Splat2D]]


def as_batch(splats: SplatInput) -> SplatBatch:
    if isinstance(splats, SplatBatch):
        return splats

    return SplatBatch.from_splats(list(splats))


def footprint_radius(cov2d: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """
    Pixel radius outside which a splat can no longer contribute: at least three standard
    deviations along the major axis, widened until the splat's opacity has fallen below ALPHA_MIN.
    """
    xx = cov2d[:, 0, 0] + COVARIANCE_BLUR
    xy = cov2d[:, 0, 1]
    yy = cov2d[:, 1, 1] + COVARIANCE_BLUR
    mid = 0.5 * (xx + yy)
    lambda_max = mid + np.sqrt(np.maximum(mid * mid - (xx * yy - xy * xy), 0.0))
    with np.errstate(divide="ignore"):
        falloff = 2.0 * np.log(np.maximum(alpha, ALPHA_MIN) / ALPHA_MIN)

    return np.sqrt(lambda_max * np.maximum(FOOTPRINT_SIGMAS**2, falloff))


def project_arrays(
    camera: CameraModel, gaussians: GaussianArrays, opacity_scale: Union[float, np.ndarray] = 1.0
) -> SplatBatch:
    """
    Perspective projection of Gaussians into splats with the local affine approximation
    cov2d = J W Sigma W^T J^T. Gaussians at or behind the near plane, beyond the far plane
    or with a footprint outside the image are culled.
    """
    scale = np.broadcast_to(np.asarray(opacity_scale, dtype=np.float64), (len(gaussians),))
    t = camera.to_camera(gaussians.mu).reshape(-1, 3)
    visible = (t[:, 2] > camera.near) & (t[:, 2] < camera.far)

    t = t[visible]
    tx, ty, tz = t[:, 0], t[:, 1], t[:, 2]
    jacobian = np.zeros((t.shape[0], 2, 3), dtype=np.float64)
    jacobian[:, 0, 0] = camera.fx / tz
    jacobian[:, 0, 2] = -camera.fx * tx / (tz * tz)
    jacobian[:, 1, 1] = camera.fy / tz
    jacobian[:, 1, 2] = -camera.fy * ty / (tz * tz)

    w = camera.rotation
    sigma_cam = np.einsum("ij,njk,lk->nil", w, gaussians.covariances()[visible], w)
    cov2d = np.einsum("nij,njk,nlk->nil", jacobian, sigma_cam, jacobian)
    mean2d = np.stack([camera.fx * tx / tz + camera.cx, camera.fy * ty / tz + camera.cy], axis=1)
    alpha = scale[visible] * gaussians.alpha[visible]
    radius = footprint_radius(cov2d, alpha)

    on_image = (
        (mean2d[:, 0] + radius >= 0)
        & (mean2d[:, 0] - radius <= camera.width - 1)
        & (mean2d[:, 1] + radius >= 0)
        & (mean2d[:, 1] - radius <= camera.height - 1)
    )

    return SplatBatch(
        source_id=gaussians.ids[visible][on_image],
        mean2d=mean2d[on_image],
        cov2d=cov2d[on_image],
        depth=tz[on_image],
        color=gaussians.color[visible][on_image],
        alpha=alpha[on_image],
        radius=radius[on_image],
    )


def project_gaussian(camera: CameraModel, g: Gaussian, opacity_scale: float = 1.0) -> Optional[Splat2D]:
    """
    Projects a single Gaussian. Returns None if it is culled.
    """
    if not 0.0 <= opacity_scale <= 1.0 or math.isnan(opacity_scale):
        raise InvariantError(f"opacity_scale must lie in [0, 1], got {opacity_scale}")

    batch = project_arrays(camera, GaussianArrays.from_gaussians([g]), opacity_scale)
    splats: List[Splat2D] = list(batch.splats())
    return splats[0] if splats else None

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from streamsplat.core.errors import InvariantError
from streamsplat.core.gaussian import quaternion_from_matrix, rotation_matrix

ORTHONORMAL_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class CameraModel:
    """
    Pinhole camera with zero skew. `rotation` and `translation` map world points into
    camera space (x right, y down, z forward). Pixel column x, row y is sampled at
    image coordinates (u, v) = (x, y).
    """

    fx: float
    fy: float
    cx: float
    cy: float
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    width: int = 64
    height: int = 64
    near: float = 0.01
    far: float = 1000.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=np.float64).reshape(3, 3))
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=np.float64).reshape(3))

        if not (self.fx > 0 and self.fy > 0):
            raise InvariantError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")

        if not 0 < self.near < self.far:
            raise InvariantError(f"clip bounds must satisfy 0 < near < far, got {self.near}, {self.far}")

        if self.width <= 0 or self.height <= 0:
            raise InvariantError(f"image size must be positive, got {self.width}x{self.height}")

        r = self.rotation
        if not np.allclose(r @ r.T, np.eye(3), atol=ORTHONORMAL_TOLERANCE, rtol=0.0):
            raise InvariantError("camera rotation is not orthonormal")

        if abs(np.linalg.det(r) - 1.0) > ORTHONORMAL_TOLERANCE:
            raise InvariantError("camera rotation must have determinant +1")

    @staticmethod
    def from_quaternion(
        quaternion: Sequence[float],
        translation: Sequence[float],
        fx: float,
        fy: float,
        cx: float,
        cy: float,
        width: int,
        height: int,
        near: float = 0.01,
        far: float = 1000.0,
    ) -> "CameraModel":
        q = np.asarray(quaternion, dtype=np.float64)
        norm = np.linalg.norm(q)
        if not norm > 0:
            raise InvariantError("camera quaternion has zero length")

        return CameraModel(fx, fy, cx, cy, rotation_matrix(q / norm), np.asarray(translation), width, height, near, far)

    @staticmethod
    def look_at(
        eye: Sequence[float],
        target: Sequence[float],
        up: Sequence[float] = (0.0, -1.0, 0.0),
        focal: float = 80.0,
        width: int = 64,
        height: int = 64,
        near: float = 0.01,
        far: float = 1000.0,
    ) -> "CameraModel":
        """
        Camera at `eye` looking at `target`. `up` is the world direction that appears
        at the top of the image.
        """
        eye_v = np.asarray(eye, dtype=np.float64)
        forward = np.asarray(target, dtype=np.float64) - eye_v
        forward /= np.linalg.norm(forward)
        right = np.cross(-np.asarray(up, dtype=np.float64), forward)
        right /= np.linalg.norm(right)
        down = np.cross(forward, right)
        rotation = np.stack([right, down, forward])
        return CameraModel(
            fx=focal,
            fy=focal,
            cx=width / 2.0,
            cy=height / 2.0,
            rotation=rotation,
            translation=-rotation @ eye_v,
            width=width,
            height=height,
            near=near,
            far=far,
        )

    @property
    def K(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    @property
    def quaternion(self) -> np.ndarray:
        return quaternion_from_matrix(self.rotation)

    @property
    def center(self) -> np.ndarray:
        return -self.rotation.T @ self.translation

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.height, self.width)

    def to_camera(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=np.float64) @ self.rotation.T + self.translation

    def project_point(self, p: Sequence[float]) -> Optional[Tuple[float, float, float]]:
        """
        Returns (u, v, depth), or None when the point lies on or behind the near plane.
        """
        q = self.to_camera(np.asarray(p, dtype=np.float64))
        if q[2] <= self.near:
            return None

        return (
            float(self.fx * q[0] / q[2] + self.cx),
            float(self.fy * q[1] / q[2] + self.cy),
            float(q[2]),
        )

    def unproject(self, u: float, v: float, depth: float) -> np.ndarray:
        q = np.array([(u - self.cx) / self.fx * depth, (v - self.cy) / self.fy * depth, depth])
        return self.rotation.T @ (q - self.translation)

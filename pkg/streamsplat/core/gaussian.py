import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

from streamsplat.core.errors import InvariantError

Vector3 = Tuple[float, float, float]
Quaternion = Tuple[float, float, float, float]

UNASSIGNED = -1
UNIT_NORM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Gaussian:
    """
    One anisotropic splat. Opacity is stored post-activation, the covariance
    is stored factored as per-axis standard deviations and a unit quaternion (w, x, y, z).

    `origin` tags the ground-truth Gaussian a candidate was copied from (-1 if unknown).
    """

    mu: Vector3
    scale: Vector3
    rotation: Quaternion
    color: Vector3
    alpha: float
    id: int = UNASSIGNED
    birth_frame: int = 0
    origin: int = -1

    def __post_init__(self) -> None:
        _check_finite("mu", self.mu)
        _check_finite("scale", self.scale)
        _check_finite("rotation", self.rotation)
        _check_finite("color", self.color)
        _check_finite("alpha", (self.alpha,))

        if len(self.mu) != 3 or len(self.scale) != 3 or len(self.color) != 3 or len(self.rotation) != 4:
            raise InvariantError("mu, scale and color need 3 components, rotation needs 4")

        norm = math.sqrt(sum(q * q for q in self.rotation))
        if abs(norm - 1.0) > UNIT_NORM_TOLERANCE:
            raise InvariantError(f"rotation quaternion is not normalized (|q| = {norm})")

        if min(self.scale) <= 0.0:
            raise InvariantError(f"scale must be strictly positive, got {self.scale}")

        if not 0.0 <= self.alpha <= 1.0:
            raise InvariantError(f"alpha must lie in [0, 1], got {self.alpha}")

        if min(self.color) < 0.0 or max(self.color) > 1.0:
            raise InvariantError(f"color channels must lie in [0, 1], got {self.color}")

        if self.birth_frame < 0:
            raise InvariantError(f"birth_frame must be non-negative, got {self.birth_frame}")

    @staticmethod
    def create(
        mu: Iterable[float],
        scale: Iterable[float],
        rotation: Iterable[float] = (1.0, 0.0, 0.0, 0.0),
        color: Iterable[float] = (1.0, 1.0, 1.0),
        alpha: float = 1.0,
        origin: int = -1,
    ) -> "Gaussian":
        """
        Builds an unassigned Gaussian from arbitrary iterables, normalizing the quaternion.
        """
        q = np.asarray(list(rotation), dtype=np.float64)
        norm = float(np.linalg.norm(q))
        if not norm > 0.0:
            raise InvariantError("rotation quaternion has zero length")

        return Gaussian(
            mu=_triple(mu),
            scale=_triple(scale),
            rotation=tuple(float(x) for x in q / norm),  # type: ignore[arg-type]
            color=_triple(color),
            alpha=float(alpha),
            origin=origin,
        )

    def with_id(self, id: int, birth_frame: int) -> "Gaussian":
        return Gaussian(self.mu, self.scale, self.rotation, self.color, self.alpha, id, birth_frame, self.origin)

    def unassigned(self) -> "Gaussian":
        return Gaussian(self.mu, self.scale, self.rotation, self.color, self.alpha, origin=self.origin)


def _triple(values: Iterable[float]) -> Vector3:
    x, y, z = (float(v) for v in values)
    return (x, y, z)


def _check_finite(name: str, values: Sequence[float]) -> None:
    if not all(math.isfinite(v) for v in values):
        raise InvariantError(f"{name} contains non-finite values: {tuple(values)}")


def rotation_matrix(q: Sequence[float]) -> np.ndarray:
    return rotation_matrices(np.asarray(q, dtype=np.float64)[None, :])[0]


def rotation_matrices(qs: np.ndarray) -> np.ndarray:
    """
    Converts an (N, 4) array of unit quaternions (w, x, y, z) into (N, 3, 3) rotation matrices.
    """
    w, x, y, z = qs[:, 0], qs[:, 1], qs[:, 2], qs[:, 3]
    matrices = np.empty((qs.shape[0], 3, 3), dtype=np.float64)
    matrices[:, 0, 0] = 1 - 2 * (y * y + z * z)
    matrices[:, 0, 1] = 2 * (x * y - w * z)
    matrices[:, 0, 2] = 2 * (x * z + w * y)
    matrices[:, 1, 0] = 2 * (x * y + w * z)
    matrices[:, 1, 1] = 1 - 2 * (x * x + z * z)
    matrices[:, 1, 2] = 2 * (y * z - w * x)
    matrices[:, 2, 0] = 2 * (x * z - w * y)
    matrices[:, 2, 1] = 2 * (y * z + w * x)
    matrices[:, 2, 2] = 1 - 2 * (x * x + y * y)
    return matrices


def quaternion_from_matrix(m: np.ndarray) -> np.ndarray:
    trace = m[0, 0] + m[1, 1] + m[2, 2]
    if trace > 0:
        s = 2.0 * math.sqrt(trace + 1.0)
        q = [0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s]
    elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
        s = 2.0 * math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2])
        q = [(m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s]
    elif m[1, 1] > m[2, 2]:
        s = 2.0 * math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2])
        q = [(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s]
    else:
        s = 2.0 * math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1])
        q = [(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s]

    quat = np.asarray(q, dtype=np.float64)
    quat /= np.linalg.norm(quat)
    return quat if quat[0] >= 0 else -quat


def covariances(scales: np.ndarray, rotations: np.ndarray) -> np.ndarray:
    """
    Vectorized R diag(s^2) R^T for (N, 3) scales and (N, 4) quaternions.
    """
    m = rotation_matrices(rotations) * scales[:, None, :]
    return np.einsum("nij,nkj->nik", m, m)


def covariance_of(g: Gaussian) -> np.ndarray:
    return covariances(np.asarray([g.scale]), np.asarray([g.rotation]))[0]


VECH_ROWS = np.array([0, 0, 0, 1, 1, 2])
VECH_COLS = np.array([0, 1, 2, 1, 2, 2])


def vech(m: np.ndarray) -> np.ndarray:
    """
    Upper triangle (xx, xy, xz, yy, yz, zz) of one or many symmetric 3x3 matrices.
    """
    return m[..., VECH_ROWS, VECH_COLS]


def unvech(v: np.ndarray) -> np.ndarray:
    m = np.empty(v.shape[:-1] + (3, 3), dtype=v.dtype)
    m[..., VECH_ROWS, VECH_COLS] = v
    m[..., VECH_COLS, VECH_ROWS] = v
    return m


@dataclass(frozen=True, eq=False)
class GaussianArrays:
    """
    Struct-of-arrays snapshot of a set of Gaussians, the form all vectorized code consumes.
    """

    ids: np.ndarray
    mu: np.ndarray
    scale: np.ndarray
    rotation: np.ndarray
    color: np.ndarray
    alpha: np.ndarray
    origin: np.ndarray

    def __len__(self) -> int:
        return int(self.ids.shape[0])

    @staticmethod
    def empty() -> "GaussianArrays":
        return GaussianArrays.from_gaussians([])

    @staticmethod
    def from_gaussians(gaussians: Sequence[Gaussian]) -> "GaussianArrays":
        return GaussianArrays(
            ids=np.array([g.id for g in gaussians], dtype=np.int64),
            mu=np.array([g.mu for g in gaussians], dtype=np.float64).reshape(-1, 3),
            scale=np.array([g.scale for g in gaussians], dtype=np.float64).reshape(-1, 3),
            rotation=np.array([g.rotation for g in gaussians], dtype=np.float64).reshape(-1, 4),
            color=np.array([g.color for g in gaussians], dtype=np.float64).reshape(-1, 3),
            alpha=np.array([g.alpha for g in gaussians], dtype=np.float64),
            origin=np.array([g.origin for g in gaussians], dtype=np.int64),
        )

    def gaussian(self, index: int) -> Gaussian:
        return Gaussian(
            mu=_triple(self.mu[index]),
            scale=_triple(self.scale[index]),
            rotation=tuple(float(q) for q in self.rotation[index]),  # type: ignore[arg-type]
            color=_triple(self.color[index]),
            alpha=float(self.alpha[index]),
            id=int(self.ids[index]),
            origin=int(self.origin[index]),
        )

    def gaussians(self) -> Iterable[Gaussian]:
        return (self.gaussian(i) for i in range(len(self)))

    def take(self, index: np.ndarray) -> "GaussianArrays":
        return GaussianArrays(
            ids=self.ids[index],
            mu=self.mu[index],
            scale=self.scale[index],
            rotation=self.rotation[index],
            color=self.color[index],
            alpha=self.alpha[index],
            origin=self.origin[index],
        )

    def with_sequential_ids(self) -> "GaussianArrays":
        return GaussianArrays(
            np.arange(len(self), dtype=np.int64),
            self.mu,
            self.scale,
            self.rotation,
            self.color,
            self.alpha,
            self.origin,
        )

    def index_of(self, ids: np.ndarray) -> np.ndarray:
        """
        Positions of `ids` in this snapshot, -1 where an id is absent.
        """
        ids = np.asarray(ids, dtype=np.int64)
        if len(self) == 0:
            return np.full(ids.shape, -1, dtype=np.int64)

        order = np.argsort(self.ids, kind="stable")
        sorted_ids = self.ids[order]
        pos = np.clip(np.searchsorted(sorted_ids, ids), 0, len(self) - 1)
        found = sorted_ids[pos] == ids
        return np.where(found, order[pos], -1)

    def covariances(self) -> np.ndarray:
        return covariances(self.scale, self.rotation)

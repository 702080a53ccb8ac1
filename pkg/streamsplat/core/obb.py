import math
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from streamsplat.core.errors import ConfigurationError, InvariantError
from streamsplat.core.gaussian import Gaussian, GaussianArrays, rotation_matrices, rotation_matrix

Polygon = List[np.ndarray]

_CORNER_SIGNS = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)], dtype=np.float64)
_FACE_CYCLE = ((1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0))


@dataclass(frozen=True, eq=False)
class OrientedBoundingBox:
    """
    Box with center, orthonormal axes (columns) and positive half extents along those axes.
    """

    center: np.ndarray
    axes: np.ndarray
    half_extents: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", np.asarray(self.center, dtype=np.float64).reshape(3))
        object.__setattr__(self, "axes", np.asarray(self.axes, dtype=np.float64).reshape(3, 3))
        object.__setattr__(self, "half_extents", np.asarray(self.half_extents, dtype=np.float64).reshape(3))

        if not np.all(self.half_extents > 0):
            raise InvariantError(f"half extents must be positive, got {self.half_extents}")

        if not np.allclose(self.axes.T @ self.axes, np.eye(3), atol=1e-6, rtol=0.0):
            raise InvariantError("box axes are not orthonormal")

    @property
    def volume(self) -> float:
        return 8.0 * float(np.prod(self.half_extents))

    @property
    def bounding_radius(self) -> float:
        return float(np.linalg.norm(self.half_extents))

    def vertices(self) -> np.ndarray:
        return self.center + (_CORNER_SIGNS * self.half_extents) @ self.axes.T

    def halfspaces(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Outward normals (6, 3) and offsets (6,) such that the box is {x : n . x <= d}.
        """
        normals = np.concatenate([self.axes.T, -self.axes.T])
        offsets = normals @ self.center + np.concatenate([self.half_extents, self.half_extents])
        return normals, offsets

    def faces(self) -> List[Polygon]:
        faces: List[Polygon] = []
        for k in range(3):
            i, j = (k + 1) % 3, (k + 2) % 3
            for side in (1.0, -1.0):
                face_center = self.center + side * self.half_extents[k] * self.axes[:, k]
                faces.append(
                    [
                        face_center
                        + si * self.half_extents[i] * self.axes[:, i]
                        + sj * self.half_extents[j] * self.axes[:, j]
                        for si, sj in _FACE_CYCLE
                    ]
                )
        return faces

    def contains(self, points: np.ndarray, tolerance: float = 0.0) -> np.ndarray:
        local = (np.asarray(points, dtype=np.float64) - self.center) @ self.axes
        return np.all(np.abs(local) <= self.half_extents + tolerance, axis=-1)

    def transformed(self, rotation: np.ndarray, translation: np.ndarray) -> "OrientedBoundingBox":
        return OrientedBoundingBox(rotation @ self.center + translation, rotation @ self.axes, self.half_extents)


class BoxArrays(NamedTuple):
    """
    Struct-of-arrays form of many boxes for vectorized rejection tests.
    """

    centers: np.ndarray
    axes: np.ndarray
    half_extents: np.ndarray

    def __len__(self) -> int:
        return int(self.centers.shape[0])

    def box(self, index: int) -> OrientedBoundingBox:
        return OrientedBoundingBox(self.centers[index], self.axes[index], self.half_extents[index])

    def world_extents(self) -> np.ndarray:
        return np.einsum("nij,nj->ni", np.abs(self.axes), self.half_extents)

    def volumes(self) -> np.ndarray:
        return 8.0 * np.prod(self.half_extents, axis=1)


def _check_k_sigma(k_sigma: float) -> None:
    if not k_sigma > 0:
        raise ConfigurationError(f"k_sigma must be positive, got {k_sigma}")


def obb_from_gaussian(g: Gaussian, k_sigma: float = 3.0) -> OrientedBoundingBox:
    """
    Minimal box enclosing the k_sigma level ellipsoid of `g`.
    """
    _check_k_sigma(k_sigma)
    return OrientedBoundingBox(np.asarray(g.mu), rotation_matrix(g.rotation), k_sigma * np.asarray(g.scale))


def boxes_from_arrays(gaussians: GaussianArrays, k_sigma: float = 3.0) -> BoxArrays:
    _check_k_sigma(k_sigma)
    return BoxArrays(gaussians.mu, rotation_matrices(gaussians.rotation), k_sigma * gaussians.scale)


def may_intersect(a: BoxArrays, b: BoxArrays) -> np.ndarray:
    """
    Conservative pairwise test of a[i] against b[i]; False only for provably disjoint pairs.
    """
    offset = np.abs(a.centers - b.centers)
    apart = np.linalg.norm(a.centers - b.centers, axis=1)
    spheres = apart <= np.linalg.norm(a.half_extents, axis=1) + np.linalg.norm(b.half_extents, axis=1)
    aabbs = np.all(offset <= a.world_extents() + b.world_extents(), axis=1)
    return spheres & aabbs


def _clip(faces: List[Polygon], normal: np.ndarray, offset: float, eps: float) -> List[Polygon]:
    """
    Sutherland-Hodgman clipping of every face of a convex polytope against n . x <= d.
    The cut surface is closed with a cap polygon.
    """
    face_distances = [[float(p @ normal) - offset for p in face] for face in faces]
    if max(max(d) for d in face_distances) <= eps:
        return faces

    if min(min(d) for d in face_distances) > -eps:
        return []

    clipped: List[Polygon] = []
    cut: List[np.ndarray] = []

    for face, distances in zip(faces, face_distances):
        if max(distances) <= eps:
            clipped.append(face)
            cut.extend(p for p, d in zip(face, distances) if d >= -eps)
            continue

        kept: Polygon = []
        for i, current in enumerate(face):
            following = face[(i + 1) % len(face)]
            d_current, d_following = distances[i], distances[(i + 1) % len(face)]
            if d_current <= eps:
                kept.append(current)
                if d_current >= -eps:
                    cut.append(current)

            if (d_current < -eps and d_following > eps) or (d_current > eps and d_following < -eps):
                crossing = current + (d_current / (d_current - d_following)) * (following - current)
                kept.append(crossing)
                cut.append(crossing)

        if len(kept) >= 3:
            clipped.append(kept)

    cap = _cap_polygon(cut, normal, eps)
    if cap:
        clipped.append(cap)

    return clipped


def _cap_polygon(points: Sequence[np.ndarray], normal: np.ndarray, eps: float) -> Polygon:
    unique: Polygon = []
    for p in points:
        if all(np.max(np.abs(p - q)) > eps for q in unique):
            unique.append(p)

    if len(unique) < 3:
        return []

    center = np.mean(unique, axis=0)
    helper = np.array([1.0, 0.0, 0.0]) if abs(normal[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(normal, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    angles = [math.atan2(float((p - center) @ e2), float((p - center) @ e1)) for p in unique]
    return [unique[i] for i in np.argsort(angles, kind="stable")]


def polytope_volume(faces: List[Polygon]) -> float:
    if len(faces) < 4:
        return 0.0

    interior = np.mean([p for face in faces for p in face], axis=0)
    volume = 0.0
    for face in faces:
        area_vector = np.zeros(3)
        for i, p in enumerate(face):
            area_vector += np.cross(p, face[(i + 1) % len(face)])

        volume += abs(float(0.5 * area_vector @ (face[0] - interior))) / 3.0

    return volume


def obb_intersection_volume(a: OrientedBoundingBox, b: OrientedBoundingBox) -> float:
    """
    Exact volume of the intersection of two oriented boxes: the faces of `a` are clipped by the
    six half-spaces of `b` and the remaining convex polytope is measured.
    """
    if np.linalg.norm(a.center - b.center) > a.bounding_radius + b.bounding_radius:
        return 0.0

    if (
        np.array_equal(a.center, b.center)
        and np.array_equal(a.axes, b.axes)
        and np.array_equal(a.half_extents, b.half_extents)
    ):
        return a.volume

    scale = max(a.bounding_radius, b.bounding_radius, float(np.max(np.abs(a.center))), 1.0)
    eps = 1e-12 * scale
    if np.all(b.contains(a.vertices(), eps)):
        return a.volume

    if np.all(a.contains(b.vertices(), eps)):
        return b.volume

    faces = a.faces()
    normals, offsets = b.halfspaces()
    for normal, offset in zip(normals, offsets):
        faces = _clip(faces, normal, float(offset), eps)
        if not faces:
            return 0.0

    return min(polytope_volume(faces), a.volume, b.volume)


def asymmetric_iou(p: OrientedBoundingBox, neighbors: Sequence[OrientedBoundingBox]) -> float:
    """
    Largest fraction of `p` covered by a single neighbor box.
    """
    best = 0.0
    for q in neighbors:
        best = max(best, obb_intersection_volume(p, q))
        if best >= p.volume:
            break

    return min(best / p.volume, 1.0)

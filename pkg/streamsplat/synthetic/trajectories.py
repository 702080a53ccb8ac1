import math
from typing import List, Sequence

import numpy as np

from streamsplat.core.camera import CameraModel
from streamsplat.synthetic.spec import SyntheticSceneSpec


def orbit_cameras(spec: SyntheticSceneSpec, positions: Sequence[float]) -> List[CameraModel]:
    """
    Cameras on a circle of `spec.radius` around the scene center, raised by `spec.elevation`
    radians. A position p in [0, frame_count) maps to the angle 2 pi p / frame_count.
    """
    cameras = []
    for p in positions:
        angle = 2.0 * math.pi * p / spec.frame_count
        eye = spec.radius * np.array(
            [
                math.cos(spec.elevation) * math.cos(angle),
                -math.sin(spec.elevation),
                math.cos(spec.elevation) * math.sin(angle),
            ]
        )
        cameras.append(_camera(spec, eye, np.zeros(3)))
    return cameras


def linear_cameras(spec: SyntheticSceneSpec, positions: Sequence[float]) -> List[CameraModel]:
    """
    Cameras sliding along x in front of the scene, each looking at the point of the
    x axis straight ahead of it.
    Position p maps to x = extent * (2 (p + 0.5) / frame_count - 1).
    """
    cameras = []
    for p in positions:
        x = spec.extent * (2.0 * (p + 0.5) / spec.frame_count - 1.0)
        eye = np.array([x, -spec.radius * math.sin(spec.elevation), -spec.radius])
        cameras.append(_camera(spec, eye, np.array([x, 0.0, 0.0])))
    return cameras


def _camera(spec: SyntheticSceneSpec, eye: np.ndarray, target: np.ndarray) -> CameraModel:
    return CameraModel.look_at(eye, target, focal=spec.focal, width=spec.width, height=spec.height)


def frame_positions(spec: SyntheticSceneSpec) -> List[float]:
    return [float(i) for i in range(spec.frame_count)]


def eval_positions(spec: SyntheticSceneSpec) -> List[float]:
    """
    Held out positions, spread evenly over the trajectory and always halfway between two
    streamed frames.
    """
    step = spec.frame_count / spec.eval_count if spec.eval_count else 0.0
    return [math.floor(j * step) + 0.5 for j in range(spec.eval_count)]


def orbit_trajectory(spec: SyntheticSceneSpec) -> List[CameraModel]:
    return orbit_cameras(spec, frame_positions(spec))


def linear_trajectory(spec: SyntheticSceneSpec) -> List[CameraModel]:
    return linear_cameras(spec, frame_positions(spec))


def trajectory_cameras(spec: SyntheticSceneSpec, positions: Sequence[float]) -> List[CameraModel]:
    if spec.trajectory == "linear":
        return linear_cameras(spec, positions)

    return orbit_cameras(spec, positions)

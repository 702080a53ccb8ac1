from typing import Any, Dict, Mapping

from streamsplat.core.camera import CameraModel
from streamsplat.core.errors import FormatError, InvariantError
from streamsplat.core.filesystem import Filesystem
from streamsplat.formats.documents import read_document, require, write_document


def camera_to_dict(camera: CameraModel) -> Dict[str, Any]:
    return {
        "intrinsics": {"fx": camera.fx, "fy": camera.fy, "cx": camera.cx, "cy": camera.cy},
        "rotation": [float(q) for q in camera.quaternion],
        "translation": [float(t) for t in camera.translation],
        "width": camera.width,
        "height": camera.height,
        "near": camera.near,
        "far": camera.far,
    }


def camera_from_dict(document: Mapping[str, Any], path: str = "<camera>") -> CameraModel:
    """
    Raises:
        FormatError: A key is missing or a value has the wrong type or violates
            the camera invariants.
    """
    intrinsics = require(document, "intrinsics", path)
    try:
        return CameraModel.from_quaternion(
            quaternion=[float(q) for q in require(document, "rotation", path)],
            translation=[float(t) for t in require(document, "translation", path)],
            fx=float(require(intrinsics, "fx", path)),
            fy=float(require(intrinsics, "fy", path)),
            cx=float(require(intrinsics, "cx", path)),
            cy=float(require(intrinsics, "cy", path)),
            width=int(require(document, "width", path)),
            height=int(require(document, "height", path)),
            near=float(document.get("near", 0.01)),
            far=float(document.get("far", 1000.0)),
        )
    except (TypeError, ValueError, InvariantError) as err:
        raise FormatError(f"{path}: invalid camera ({err})") from None


def load_camera(fs: Filesystem, path: str) -> CameraModel:
    return camera_from_dict(read_document(fs, path), path)


def save_camera(fs: Filesystem, path: str, camera: CameraModel) -> None:
    write_document(fs, path, camera_to_dict(camera))

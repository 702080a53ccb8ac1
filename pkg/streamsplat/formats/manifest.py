import posixpath
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple

from streamsplat.core.errors import FormatError, MissingFileError
from streamsplat.core.filesystem import Filesystem
from streamsplat.core.gaussian import GaussianArrays
from streamsplat.core.pipeline import EvalView, FrameInput
from streamsplat.core.pixelmap import PixelGaussians
from streamsplat.core.rasterizer import Rasterizer
from streamsplat.formats.cameras import load_camera
from streamsplat.formats.documents import read_document, require, write_document
from streamsplat.formats.images import load_image
from streamsplat.formats.ply import load_frame_gaussians, load_scene_arrays
from streamsplat.synthetic.generator import candidates_from_scene


@dataclass(frozen=True)
class FrameEntry:
    camera: str
    image: Optional[str] = None
    gaussians: Optional[str] = None


@dataclass(frozen=True)
class ViewEntry:
    camera: str
    image: Optional[str] = None
    name: str = ""


@dataclass(frozen=True)
class SequenceManifest:
    """
    An ordered image sequence on disk. All paths are resolved against the manifest's directory.
    """

    path: str
    frames: List[FrameEntry]
    eval_views: List[ViewEntry] = field(default_factory=lambda: [])
    config: Dict[str, Any] = field(default_factory=lambda: {})
    scene: Optional[str] = None

    @property
    def directory(self) -> str:
        return posixpath.dirname(self.path)

    def files(self) -> List[str]:
        referenced = [self.scene] if self.scene else []
        for frame in self.frames:
            referenced.extend(p for p in (frame.camera, frame.image, frame.gaussians) if p)
        for view in self.eval_views:
            referenced.extend(p for p in (view.camera, view.image) if p)
        return referenced


def _resolve(directory: str, path: Optional[Any]) -> Optional[str]:
    if path is None:
        return None

    path = str(path)
    return path if posixpath.isabs(path) or not directory else posixpath.join(directory, path)


def _entries(document: Mapping[str, Any], key: str, path: str) -> List[Mapping[str, Any]]:
    entries = document.get(key) or []
    if not isinstance(entries, list) or not all(isinstance(e, dict) for e in entries):
        raise FormatError(f"{path}: '{key}' must be a list of mappings")
    return entries


def load_manifest(fs: Filesystem, path: str) -> SequenceManifest:
    """
    Raises:
        MissingFileError: The manifest or a file it references does not exist.
        FormatError: Malformed manifest or no frames.
    """
    document = read_document(fs, path)
    directory = posixpath.dirname(path)

    frames = [
        FrameEntry(
            camera=str(_resolve(directory, require(entry, "camera", path))),
            image=_resolve(directory, entry.get("image")),
            gaussians=_resolve(directory, entry.get("gaussians")),
        )
        for entry in _entries(document, "frames", path)
    ]
    if not frames:
        raise FormatError(f"{path}: manifest has no frames")

    views = [
        ViewEntry(
            camera=str(_resolve(directory, require(entry, "camera", path))),
            image=_resolve(directory, entry.get("image")),
            name=str(entry.get("name", f"view_{index:03d}")),
        )
        for index, entry in enumerate(_entries(document, "eval_views", path))
    ]

    config = document.get("config") or {}
    if not isinstance(config, dict):
        raise FormatError(f"{path}: 'config' must be a mapping")

    manifest = SequenceManifest(path, frames, views, config, _resolve(directory, document.get("scene")))
    for referenced in manifest.files():
        if not fs.exists(referenced):
            raise MissingFileError(referenced)

    return manifest


def load_sequence(
    fs: Filesystem, manifest: SequenceManifest, rasterizer: Optional[Rasterizer] = None
) -> Tuple[List[FrameInput], List[EvalView]]:
    """
    Loads cameras, images and candidates of every frame. Frames without a candidate file take
    their candidates from the ground truth scene if the manifest names one, else they are empty.

    Raises:
        FormatError: Frames or images of inconsistent size.
    """
    scene: Optional[GaussianArrays] = load_scene_arrays(fs, manifest.scene) if manifest.scene else None

    frames: List[FrameInput] = []
    for entry in manifest.frames:
        camera = load_camera(fs, entry.camera)
        if frames and camera.shape != frames[0].camera.shape:
            first = frames[0].camera
            raise FormatError(
                f"{entry.camera}: frame is {camera.width}x{camera.height}, first frame is {first.width}x{first.height}"
            )

        image = _checked_image(fs, entry.image, camera.shape)
        if entry.gaussians:
            current = load_frame_gaussians(fs, entry.gaussians, camera.width, camera.height)
        elif scene is not None:
            current = candidates_from_scene(scene, camera, rasterizer)
        else:
            current = PixelGaussians.empty(camera.width, camera.height)

        frames.append(FrameInput(camera, current, image))

    views = []
    for entry in manifest.eval_views:
        camera = load_camera(fs, entry.camera)
        views.append(EvalView(camera, _checked_image(fs, entry.image, camera.shape), entry.name))

    return frames, views


def _checked_image(fs: Filesystem, path: Optional[str], shape: Tuple[int, int]) -> Any:
    if path is None:
        return None

    image = load_image(fs, path)
    if image.shape[:2] != shape:
        raise FormatError(f"{path}: image is {image.shape[1]}x{image.shape[0]}, camera is {shape[1]}x{shape[0]}")

    return image


def _relative(directory: str, path: Optional[str]) -> Optional[str]:
    if path is None:
        return None

    return posixpath.relpath(path, directory) if directory else path


def save_manifest(fs: Filesystem, manifest: SequenceManifest) -> None:
    directory = manifest.directory
    document: Dict[str, Any] = {}
    if manifest.scene:
        document["scene"] = _relative(directory, manifest.scene)

    if manifest.config:
        document["config"] = dict(manifest.config)

    document["frames"] = [
        {
            key: _relative(directory, value)
            for key, value in (("camera", f.camera), ("image", f.image), ("gaussians", f.gaussians))
            if value
        }
        for f in manifest.frames
    ]
    document["eval_views"] = [
        dict(
            {key: _relative(directory, value) for key, value in (("camera", v.camera), ("image", v.image)) if value},
            name=v.name,
        )
        for v in manifest.eval_views
    ]
    write_document(fs, manifest.path, document)

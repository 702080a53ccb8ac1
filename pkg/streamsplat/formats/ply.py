"""
Gaussian scenes in the usual splatting PLY layout: position, normals (unused), DC colour
coefficients, opacity as logit, per-axis log scale and a (w, x, y, z) rotation quaternion.
Higher order colour coefficients (f_rest_*) are ignored on load.
"""
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from plyfile import PlyData, PlyElement, PlyParseError

from streamsplat.core.errors import InvariantError, MissingFileError, SceneFormatError
from streamsplat.core.filesystem import Filesystem
from streamsplat.core.gaussian import Gaussian, GaussianArrays
from streamsplat.core.pixelmap import Pixel, PixelGaussians

SH_C0 = 0.28209479177387814
OPACITY_EPSILON = 1e-7

POSITION = ("x", "y", "z")
NORMALS = ("nx", "ny", "nz")
COLOR_DC = ("f_dc_0", "f_dc_1", "f_dc_2")
SCALE = ("scale_0", "scale_1", "scale_2")
ROTATION = ("rot_0", "rot_1", "rot_2", "rot_3")
OPACITY = "opacity"
PIXEL = ("u", "v")
ORIGIN = "origin"

REQUIRED = POSITION + COLOR_DC + (OPACITY,) + SCALE + ROTATION


def logit(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, OPACITY_EPSILON, 1.0 - OPACITY_EPSILON)
    return np.log(p / (1.0 - p))


def sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def _vertex_dtype(extra: Sequence[Tuple[str, str]]) -> List[Tuple[str, str]]:
    floats = POSITION + NORMALS + COLOR_DC + (OPACITY,) + SCALE + ROTATION
    return [(name, "f4") for name in floats] + list(extra)


def _vertices(gaussians: GaussianArrays, extra: Sequence[Tuple[str, str]]) -> np.ndarray:
    vertices = np.zeros(len(gaussians), dtype=_vertex_dtype(extra))
    for k, name in enumerate(POSITION):
        vertices[name] = gaussians.mu[:, k]
    for k, name in enumerate(COLOR_DC):
        vertices[name] = (gaussians.color[:, k] - 0.5) / SH_C0
    for k, name in enumerate(SCALE):
        vertices[name] = np.log(gaussians.scale[:, k])
    for k, name in enumerate(ROTATION):
        vertices[name] = gaussians.rotation[:, k]
    vertices[OPACITY] = logit(gaussians.alpha)
    return vertices


def _write(fs: Filesystem, path: str, vertices: np.ndarray) -> None:
    with fs.openbin(path, "w") as file:
        PlyData([PlyElement.describe(vertices, "vertex")]).write(file)


def _read(fs: Filesystem, path: str) -> np.ndarray:
    if not fs.exists(path):
        raise MissingFileError(path)

    try:
        with fs.openbin(path, "r") as file:
            ply = PlyData.read(file)
    except (PlyParseError, ValueError, EOFError) as err:
        raise SceneFormatError(f"{path}: malformed PLY ({err})") from None

    if "vertex" not in ply:
        raise SceneFormatError(f"{path}: no vertex element")

    data = ply["vertex"].data
    missing = [name for name in REQUIRED if name not in data.dtype.names]
    if missing:
        raise SceneFormatError(f"{path}: missing attribute '{missing[0]}'")

    return data


def _columns(data: np.ndarray, names: Sequence[str]) -> np.ndarray:
    return np.stack([np.asarray(data[name], dtype=np.float64) for name in names], axis=1)


def _decode(path: str, data: np.ndarray) -> GaussianArrays:
    mu = _columns(data, POSITION)
    dc = _columns(data, COLOR_DC)
    log_scale = _columns(data, SCALE)
    rotation = _columns(data, ROTATION)
    opacity = np.asarray(data[OPACITY], dtype=np.float64)

    raw = np.concatenate([mu, dc, log_scale, rotation, opacity[:, None]], axis=1)
    bad = np.flatnonzero(~np.all(np.isfinite(raw), axis=1))
    if bad.size:
        raise SceneFormatError(f"{path}: non-finite value", record=int(bad[0]))

    norms = np.linalg.norm(rotation, axis=1)
    bad = np.flatnonzero(norms == 0.0)
    if bad.size:
        raise SceneFormatError(f"{path}: zero rotation quaternion", record=int(bad[0]))

    origin = np.full(len(mu), -1, dtype=np.int64)
    if ORIGIN in data.dtype.names:
        origin = np.asarray(data[ORIGIN], dtype=np.int64)

    return GaussianArrays(
        ids=np.arange(len(mu), dtype=np.int64),
        mu=mu,
        scale=np.exp(log_scale),
        rotation=rotation / norms[:, None],
        color=np.clip(0.5 + SH_C0 * dc, 0.0, 1.0),
        alpha=sigmoid(opacity),
        origin=origin,
    )


def _validated(path: str, arrays: GaussianArrays) -> List[Gaussian]:
    gaussians: List[Gaussian] = []
    for record in range(len(arrays)):
        try:
            gaussians.append(arrays.gaussian(record).unassigned())
        except InvariantError as err:
            raise SceneFormatError(f"{path}: {err}", record=record) from None

    return gaussians


def load_scene(fs: Filesystem, path: str) -> List[Gaussian]:
    """
    Reads the Gaussians of a PLY scene as unassigned Gaussians, in file order.

    Raises:
        MissingFileError: The file does not exist.
        SceneFormatError: Malformed file, missing attribute or invalid record.
    """
    data = _read(fs, path)
    return _validated(path, _decode(path, data))


def load_scene_arrays(fs: Filesystem, path: str) -> GaussianArrays:
    """
    Like load_scene, ids are the record indices.
    """
    return GaussianArrays.from_gaussians(load_scene(fs, path)).with_sequential_ids()


def save_scene(fs: Filesystem, path: str, gaussians: Iterable[Gaussian]) -> None:
    """
    Writes a scene. The origin tags are kept as an extra integer property if any Gaussian has one.
    """
    arrays = GaussianArrays.from_gaussians(list(gaussians))
    tagged = bool(np.any(arrays.origin >= 0))
    vertices = _vertices(arrays, [(ORIGIN, "i4")] if tagged else [])
    if tagged:
        vertices[ORIGIN] = arrays.origin

    _write(fs, path, vertices)


def save_frame_gaussians(fs: Filesystem, path: str, candidates: PixelGaussians) -> None:
    """
    Writes the candidates of a frame with their integer pixel coordinates.
    """
    arrays = candidates.to_arrays()
    vertices = _vertices(arrays, [(PIXEL[0], "i4"), (PIXEL[1], "i4"), (ORIGIN, "i4")])
    pixels = candidates.pixels()
    vertices[PIXEL[0]] = pixels[:, 0]
    vertices[PIXEL[1]] = pixels[:, 1]
    vertices[ORIGIN] = arrays.origin
    _write(fs, path, vertices)


def load_frame_gaussians(fs: Filesystem, path: str, width: int, height: int) -> PixelGaussians:
    """
    Reads per-pixel candidates written by save_frame_gaussians.

    Raises:
        SceneFormatError: Missing pixel properties, a pixel outside the image or two
            candidates at the same pixel.
    """
    data = _read(fs, path)
    missing = [name for name in PIXEL if name not in data.dtype.names]
    if missing:
        raise SceneFormatError(f"{path}: missing attribute '{missing[0]}'")

    gaussians = _validated(path, _decode(path, data))
    us = np.asarray(data[PIXEL[0]], dtype=np.int64)
    vs = np.asarray(data[PIXEL[1]], dtype=np.int64)

    seen = set()
    candidates: List[Tuple[Pixel, Gaussian]] = []
    for record, (u, v, g) in enumerate(zip(us.tolist(), vs.tolist(), gaussians)):
        if not (0 <= u < width and 0 <= v < height):
            raise SceneFormatError(f"{path}: pixel ({u}, {v}) outside the {width}x{height} image", record=record)

        if (u, v) in seen:
            raise SceneFormatError(f"{path}: second candidate at pixel ({u}, {v})", record=record)

        seen.add((u, v))
        candidates.append(((u, v), g))

    return PixelGaussians.from_candidates(width, height, candidates)

import io

import numpy as np
from PIL import Image

from streamsplat.core.errors import FormatError, MissingFileError
from streamsplat.core.filesystem import Filesystem


def to_uint8(rgb: np.ndarray) -> np.ndarray:
    return np.round(np.clip(np.asarray(rgb, dtype=np.float64), 0.0, 1.0) * 255.0).astype(np.uint8)


def save_png(fs: Filesystem, path: str, rgb: np.ndarray) -> None:
    """
    Writes an H x W x 3 (or H x W) image with values in [0, 1] as an 8-bit PNG.
    """
    buffer = io.BytesIO()
    Image.fromarray(to_uint8(rgb)).save(buffer, format="PNG")
    fs.writebytes(path, buffer.getvalue())


def save_array(fs: Filesystem, path: str, array: np.ndarray) -> None:
    """
    Lossless float image in numpy's .npy format.
    """
    buffer = io.BytesIO()
    np.save(buffer, np.asarray(array), allow_pickle=False)
    fs.writebytes(path, buffer.getvalue())


def load_image(fs: Filesystem, path: str) -> np.ndarray:
    """
    Reads a PNG (scaled to [0, 1]) or a .npy float image as an H x W x 3 float array.

    Raises:
        MissingFileError: The file does not exist.
        FormatError: The file cannot be decoded or is not an RGB image.
    """
    if not fs.exists(path):
        raise MissingFileError(path)

    data = fs.readbytes(path)
    try:
        if path.endswith(".npy"):
            image = np.load(io.BytesIO(data), allow_pickle=False).astype(np.float64)
        else:
            with Image.open(io.BytesIO(data)) as decoded:
                image = np.asarray(decoded.convert("RGB"), dtype=np.float64) / 255.0
    except (OSError, ValueError) as err:
        raise FormatError(f"{path}: cannot decode image ({err})") from None

    if image.ndim != 3 or image.shape[2] != 3:
        raise FormatError(f"{path}: expected an RGB image, got shape {image.shape}")

    return image


def id_image(id_map: np.ndarray) -> np.ndarray:
    """
    False colour visualization of an id map: a stable colour per id, black for background.
    """
    ids = np.asarray(id_map, dtype=np.int64)
    hashed = (ids * np.int64(2654435761)) & np.int64(0xFFFFFF)
    rgb = np.stack([(hashed >> 16) & 0xFF, (hashed >> 8) & 0xFF, hashed & 0xFF], axis=-1) / 255.0
    return np.where((ids < 0)[..., None], 0.0, rgb)

"""
Binary container for Gaussian images and redundancy reports.

Layout (little-endian): magic b"GIR1", u32 width, u32 height, u32 channel count,
u8 tag, f32 tau, then the float32 channels in row-major order, then the int64 id map.
"""
import struct
from typing import NamedTuple, Tuple

import numpy as np

from streamsplat.core.errors import GirFormatError
from streamsplat.core.gir import GIR_CHANNELS, SENTINEL, GaussianImage, Strategy

MAGIC = b"GIR1"
HEADER = struct.Struct("<4sIIIBf")
REDUNDANCY_CHANNELS = 2

_CHANNEL_COUNT_OFFSET = 12
_TAG_OFFSET = 16

_TAGS = {Strategy.nearest: 0, Strategy.most_contributive: 1}
_STRATEGIES = {tag: strategy for strategy, tag in _TAGS.items()}
REDUNDANCY_TAG = 2


class RedundancyImage(NamedTuple):
    iou: np.ndarray
    gt_mask: np.ndarray
    id_map: np.ndarray
    theta_red: float


def _encode(channels: np.ndarray, id_map: np.ndarray, tag: int, tau: float) -> bytes:
    height, width, count = channels.shape
    header = HEADER.pack(MAGIC, width, height, count, tag, tau)
    return b"".join(
        [
            header,
            np.ascontiguousarray(channels, dtype="<f4").tobytes(),
            np.ascontiguousarray(id_map, dtype="<i8").tobytes(),
        ]
    )


def _decode(data: bytes, expected_channels: int) -> Tuple[np.ndarray, np.ndarray, int, float]:
    if len(data) < HEADER.size:
        raise GirFormatError(f"truncated header, need {HEADER.size} bytes, got {len(data)}", len(data))

    magic, width, height, count, tag, tau = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise GirFormatError(f"bad magic bytes {magic!r}", 0)

    if width == 0 or height == 0:
        raise GirFormatError(f"empty image {width}x{height}", 4)

    if count != expected_channels:
        raise GirFormatError(f"channel count {count}, expected {expected_channels}", _CHANNEL_COUNT_OFFSET)

    pixels = width * height
    channels_end = HEADER.size + pixels * count * 4
    expected = channels_end + pixels * 8
    if len(data) < expected:
        raise GirFormatError(f"truncated payload, expected {expected} bytes, got {len(data)}", len(data))

    if len(data) > expected:
        raise GirFormatError(f"{len(data) - expected} trailing bytes", expected)

    channels = np.frombuffer(data, dtype="<f4", count=pixels * count, offset=HEADER.size)
    id_map = np.frombuffer(data, dtype="<i8", count=pixels, offset=channels_end)

    invalid = np.flatnonzero(id_map < SENTINEL)
    if invalid.size:
        raise GirFormatError(f"invalid id {id_map[invalid[0]]}", channels_end + 8 * int(invalid[0]))

    return (
        channels.astype(np.float32).reshape(height, width, count),
        id_map.astype(np.int64).reshape(height, width),
        tag,
        tau,
    )


def serialize_gir(gir: GaussianImage) -> bytes:
    return _encode(gir.channels, gir.id_map, _TAGS[gir.strategy], gir.tau)


def deserialize_gir(data: bytes) -> GaussianImage:
    channels, id_map, tag, tau = _decode(data, GIR_CHANNELS)
    strategy = _STRATEGIES.get(tag)
    if strategy is None:
        raise GirFormatError(f"unknown strategy tag {tag}", _TAG_OFFSET)

    return GaussianImage(channels, id_map, strategy, float(tau))


def serialize_redundancy(iou: np.ndarray, gt_mask: np.ndarray, id_map: np.ndarray, theta_red: float) -> bytes:
    channels = np.stack([iou, gt_mask], axis=-1).astype(np.float32)
    return _encode(channels, id_map, REDUNDANCY_TAG, theta_red)


def deserialize_redundancy(data: bytes) -> RedundancyImage:
    channels, id_map, tag, theta_red = _decode(data, REDUNDANCY_CHANNELS)
    if tag != REDUNDANCY_TAG:
        raise GirFormatError(f"tag {tag} is not a redundancy report", _TAG_OFFSET)

    return RedundancyImage(channels[..., 0], channels[..., 1].astype(np.uint8), id_map, float(theta_red))

"""
Raw thermal (TVF) and feature (FVF) video containers.

Both formats share one 40-byte little-endian header::

    magic       4s   b"TVF1" or b"FVF1"
    width       u32
    height      u32
    num_frames  u32
    fps         f64
    bits        u16  16 (TVF) or 32 (FVF)
    reserved    14 zero bytes

followed by the frames in row-major order, unsigned 16-bit integers (TVF)
or 32-bit IEEE-754 floats (FVF), little-endian.
"""
import logging
import os
import struct
import typing as tp

import attr
import numpy as np

from stressnet import errors
from stressnet.emission import FeatureClip, ThermalClip
from stressnet.formats.tables import PathT

LOG = logging.getLogger(__name__)

HEADER = struct.Struct('<4sIIIdH14x')
TVF_MAGIC = b'TVF1'
FVF_MAGIC = b'FVF1'
U32_MAX = 2**32 - 1

_PIXEL_TYPES = {TVF_MAGIC: ('<u2', 16), FVF_MAGIC: ('<f4', 32)}


@attr.s(frozen=True)
class VideoHeader:
    """
    Decoded container header.

    Examples:
        >>> HEADER.size
        40
    """
    magic: bytes = attr.ib()
    width: int = attr.ib()
    height: int = attr.ib()
    num_frames: int = attr.ib()
    fps: float = attr.ib()
    bits_per_pixel: int = attr.ib()

    @property
    def payload_bytes(self) -> int:
        return self.num_frames * self.width * self.height * \
            (self.bits_per_pixel // 8)

    def pack(self) -> bytes:
        for name in ('width', 'height', 'num_frames'):
            if getattr(self, name) > U32_MAX:
                raise errors.DimensionOverflow(
                    f'{name}={getattr(self, name)} does not fit 32 bits'
                )
        if self.payload_bytes > np.iinfo(np.int64).max:
            raise errors.DimensionOverflow('payload size overflows')
        return HEADER.pack(
            self.magic, self.width, self.height, self.num_frames, self.fps,
            self.bits_per_pixel
        )


def read_header(blob: bytes, expected: bytes) -> VideoHeader:
    if len(blob) < HEADER.size:
        raise errors.TruncatedFile(
            f'{len(blob)} bytes is shorter than the {HEADER.size} byte header'
        )
    magic, width, height, frames, fps, bits = HEADER.unpack_from(blob)
    if magic != expected:
        raise errors.BadMagic(f'expected {expected!r}, found {magic!r}')
    _, expected_bits = _PIXEL_TYPES[expected]
    if bits != expected_bits:
        raise errors.FormatError(
            f'{magic.decode()} needs {expected_bits} bits per pixel, '
            f'header says {bits}'
        )
    return VideoHeader(magic, width, height, frames, fps, bits)


def _read(path: PathT, magic: bytes) -> tp.Tuple[VideoHeader, np.ndarray]:
    with open(path, 'rb') as handle:
        blob = handle.read()
    header = read_header(blob, magic)
    available = len(blob) - HEADER.size
    if available < header.payload_bytes:
        raise errors.TruncatedFile(
            f'{path}: header declares {header.payload_bytes} payload bytes, '
            f'file holds {available}'
        )
    if available > header.payload_bytes:
        LOG.warning('%s: ignoring %d trailing bytes', path,
                    available - header.payload_bytes)
    dtype, _ = _PIXEL_TYPES[magic]
    data = np.frombuffer(
        blob, dtype=dtype, count=header.num_frames * header.width *
        header.height, offset=HEADER.size
    )
    frames = data.reshape(header.num_frames, header.height, header.width)
    return header, frames


def _write(path: PathT, magic: bytes, frames: np.ndarray, fps: float) -> None:
    dtype, bits = _PIXEL_TYPES[magic]
    num_frames, height, width = frames.shape
    header = VideoHeader(magic, width, height, num_frames, float(fps), bits)
    packed = header.pack()
    tmp_path = f'{os.fspath(path)}.tmp'
    with open(tmp_path, 'wb') as handle:
        handle.write(packed)
        handle.write(np.ascontiguousarray(frames, dtype=dtype).tobytes())
    os.replace(tmp_path, path)


def read_tvf(path: PathT) -> ThermalClip:
    """Load a raw thermal clip."""
    header, frames = _read(path, TVF_MAGIC)
    return ThermalClip(frames.astype(np.uint16), header.fps)


def write_tvf(path: PathT, clip: ThermalClip) -> None:
    """Store a raw thermal clip; reading it back gives identical counts."""
    _write(path, TVF_MAGIC, clip.frames, clip.fps)


def read_fvf(path: PathT) -> FeatureClip:
    """Load a feature clip (values widen from 32 to 64 bits)."""
    header, frames = _read(path, FVF_MAGIC)
    return FeatureClip(frames.astype(np.float64), header.fps)


def write_fvf(path: PathT, fc: FeatureClip) -> None:
    """Store a feature clip, rounding values to 32-bit floats."""
    _write(path, FVF_MAGIC, fc.frames, fc.fps)

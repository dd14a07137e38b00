"""
SNW1 model files.

Layout, all integers little-endian::

    b"SNW1"
    u32 tensor count
    per tensor:
        u16 name length, ASCII name
        u8  rank, rank x u32 dims
        row-major float32 data
    u32 descriptor length, ASCII ``key=value`` lines

Parameters are computed in 64-bit precision and rounded to the nearest
32-bit float on write.
"""
import logging
import os
import struct
import typing as tp

import numpy as np

from stressnet import errors
from stressnet.formats.tables import PathT
from stressnet.neural.model import Architecture, Model
from stressnet.stress import StressArchitecture, StressModel

LOG = logging.getLogger(__name__)

MAGIC = b'SNW1'

Tensors = tp.Dict[str, np.ndarray]
Descriptor = tp.Dict[str, str]
AnyModel = tp.Union[Model, StressModel]


def encode(tensors: tp.Sequence[tp.Tuple[str, np.ndarray]],
           descriptor: tp.Mapping[str, str]) -> bytes:
    """Serialise named tensors plus a descriptor block."""
    names = [name for name, _ in tensors]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise errors.DuplicateTensorName(f'duplicate tensor names {dupes}')

    parts = [MAGIC, struct.pack('<I', len(tensors))]
    for name, value in tensors:
        raw_name = name.encode('ascii')
        parts.append(struct.pack('<H', len(raw_name)))
        parts.append(raw_name)
        parts.append(struct.pack('<B', value.ndim))
        parts.append(struct.pack(f'<{value.ndim}I', *value.shape))
        parts.append(np.ascontiguousarray(value, dtype='<f4').tobytes())
    desc = ''.join(f'{k}={v}\n' for k, v in descriptor.items())
    raw_desc = desc.encode('ascii')
    parts.append(struct.pack('<I', len(raw_desc)))
    parts.append(raw_desc)
    return b''.join(parts)


class _Reader:

    def __init__(self, blob: bytes, path: PathT):
        self.blob = blob
        self.pos = 0
        self.path = path

    def take(self, count: int) -> bytes:
        if self.pos + count > len(self.blob):
            raise errors.TruncatedFile(
                f'{self.path}: needs {self.pos + count} bytes, file has '
                f'{len(self.blob)}'
            )
        chunk = self.blob[self.pos:self.pos + count]
        self.pos += count
        return chunk

    def unpack(self, fmt: str) -> tp.Tuple[tp.Any, ...]:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def decode(blob: bytes, path: PathT = '<memory>'
          ) -> tp.Tuple[tp.List[tp.Tuple[str, np.ndarray]], Descriptor]:
    """Inverse of `encode`; tensors come back as float64."""
    reader = _Reader(blob, path)
    magic = reader.take(4)
    if magic != MAGIC:
        raise errors.BadMagic(f'{path}: expected {MAGIC!r}, found {magic!r}')
    (count,) = reader.unpack('<I')
    tensors: tp.List[tp.Tuple[str, np.ndarray]] = []
    seen: tp.Set[str] = set()
    for _ in range(count):
        (name_len,) = reader.unpack('<H')
        name = reader.take(name_len).decode('ascii')
        if name in seen:
            raise errors.DuplicateTensorName(f'{path}: {name} appears twice')
        seen.add(name)
        (rank,) = reader.unpack('<B')
        shape = reader.unpack(f'<{rank}I')
        size = int(np.prod(shape, dtype=np.int64))
        data = np.frombuffer(reader.take(4 * size), dtype='<f4')
        tensors.append((name, data.astype(np.float64).reshape(shape)))
    (desc_len,) = reader.unpack('<I')
    text = reader.take(desc_len).decode('ascii')
    if reader.pos != len(blob):
        raise errors.FormatError(
            f'{path}: {len(blob) - reader.pos} unexpected trailing bytes'
        )
    descriptor: Descriptor = {}
    for line in text.splitlines():
        if not line:
            continue
        key, sep, value = line.partition('=')
        if not sep:
            raise errors.FormatError(f'{path}: bad descriptor line {line!r}')
        descriptor[key] = value
    return tensors, descriptor


def write_snw(path: PathT, model: AnyModel) -> None:
    """Store an ISTI network or a stress classifier."""
    blob = encode(list(model.params.items()), model.arch.to_descriptor())
    tmp_path = f'{os.fspath(path)}.tmp'
    with open(tmp_path, 'wb') as handle:
        handle.write(blob)
    os.replace(tmp_path, path)
    LOG.debug('wrote %d tensors to %s', len(model.params), path)


def _build(tensors: tp.List[tp.Tuple[str, np.ndarray]],
           descriptor: Descriptor, path: PathT) -> AnyModel:
    kind = descriptor.get('kind', 'isti')
    try:
        arch: tp.Union[Architecture, StressArchitecture]
        if kind == 'isti':
            arch = Architecture.from_descriptor(descriptor)
        elif kind == 'stress':
            arch = StressArchitecture.from_descriptor(descriptor)
        else:
            raise errors.ShapeMismatchWithDescriptor(
                f'{path}: unknown model kind {kind!r}'
            )
    except (TypeError, ValueError) as err:
        if isinstance(err, errors.ShapeMismatchWithDescriptor):
            raise
        raise errors.ShapeMismatchWithDescriptor(
            f'{path}: invalid descriptor: {err}'
        ) from err

    expected = arch.param_shapes()
    params = dict(tensors)
    if set(params) != set(expected):
        raise errors.ShapeMismatchWithDescriptor(
            f'{path}: tensors {sorted(params)} do not match the descriptor'
        )
    for name, shape in expected.items():
        if params[name].shape != shape:
            raise errors.ShapeMismatchWithDescriptor(
                f'{path}: {name} has shape {params[name].shape}, descriptor '
                f'implies {shape}'
            )
    ordered = {name: params[name] for name in expected}
    if isinstance(arch, StressArchitecture):
        return StressModel(arch, ordered)
    return Model(arch, ordered)


def read_snw(path: PathT) -> AnyModel:
    """Load whichever model kind the descriptor names."""
    with open(path, 'rb') as handle:
        blob = handle.read()
    tensors, descriptor = decode(blob, path)
    return _build(tensors, descriptor, path)


def read_isti_model(path: PathT) -> Model:
    model = read_snw(path)
    if not isinstance(model, Model):
        raise errors.ShapeMismatchWithDescriptor(
            f'{path} holds a stress classifier, not an ISTI network'
        )
    return model


def read_stress_model(path: PathT) -> StressModel:
    model = read_snw(path)
    if not isinstance(model, StressModel):
        raise errors.ShapeMismatchWithDescriptor(
            f'{path} holds an ISTI network, not a stress classifier'
        )
    return model

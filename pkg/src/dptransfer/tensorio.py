"""Minimal self-describing binary tensor container (``.dpt``).

Layout, all little-endian::

    magic   4 bytes   b"DPT1"
    dtype   u8        1 = f32, 2 = f64, 3 = i32
    ndim    u8        1..8
    dims    ndim * u64
    payload row-major values, exactly itemsize * prod(dims) bytes

A 2x2 float32 array therefore occupies 4 + 1 + 1 + 16 + 16 = 38 bytes.
"""
import struct

import numpy as np

from .errors import TensorFormatError

MAGIC = b"DPT1"
MAX_NDIM = 8

_CODE_TO_DTYPE = {1: np.dtype("<f4"), 2: np.dtype("<f8"), 3: np.dtype("<i4")}
_KIND_TO_CODE = {"float32": 1, "float64": 2, "int32": 3}


def dtype_code(dtype):
    try:
        return _KIND_TO_CODE[np.dtype(dtype).name]
    except KeyError:
        raise TensorFormatError(f"unsupported dtype {np.dtype(dtype).name!r}") from None


def encode_tensor(values, shape=None, dtype=None):
    """Serialize ``values`` to bytes.

    ``shape`` and ``dtype`` default to those of ``values``; when given they
    must agree with the element count of ``values``.
    """
    arr = np.asarray(values)
    if dtype is None:
        dtype = arr.dtype
    code = dtype_code(dtype)
    if shape is None:
        shape = arr.shape
    shape = tuple(int(s) for s in shape)
    if not 1 <= len(shape) <= MAX_NDIM:
        raise TensorFormatError(f"ndim must be in 1..{MAX_NDIM}, got {len(shape)}")
    if any(s < 1 for s in shape):
        raise TensorFormatError(f"all dims must be >= 1, got {shape}")
    if arr.size != int(np.prod(shape, dtype=np.int64)):
        raise TensorFormatError(
            f"shape {shape} does not match {arr.size} values")
    payload = np.ascontiguousarray(arr.reshape(shape), dtype=_CODE_TO_DTYPE[code])
    header = MAGIC + struct.pack("<BB", code, len(shape)) + struct.pack(f"<{len(shape)}Q", *shape)
    return header + payload.tobytes(order="C")


def decode_tensor(buf):
    """Inverse of :func:`encode_tensor`; returns a numpy array."""
    buf = bytes(buf)
    if len(buf) < 6:
        raise TensorFormatError("truncated header")
    if buf[:4] != MAGIC:
        raise TensorFormatError(f"bad magic {buf[:4]!r}")
    code, ndim = struct.unpack_from("<BB", buf, 4)
    if code not in _CODE_TO_DTYPE:
        raise TensorFormatError(f"unknown dtype code {code}")
    if not 1 <= ndim <= MAX_NDIM:
        raise TensorFormatError(f"bad ndim {ndim}")
    offset = 6 + 8 * ndim
    if len(buf) < offset:
        raise TensorFormatError("truncated header")
    dims = struct.unpack_from(f"<{ndim}Q", buf, 6)
    if any(d < 1 for d in dims):
        raise TensorFormatError(f"bad dims {dims}")
    dtype = _CODE_TO_DTYPE[code]
    expected = dtype.itemsize * int(np.prod(dims, dtype=np.int64))
    got = len(buf) - offset
    if got < expected:
        raise TensorFormatError(f"truncated payload: expected {expected} bytes, got {got}")
    if got > expected:
        raise TensorFormatError(f"trailing data: expected {expected} bytes, got {got}")
    arr = np.frombuffer(buf, dtype=dtype, offset=offset).reshape(dims)
    # native byte order, writable copy
    return arr.astype(dtype.newbyteorder("="))


def write_tensor(values, path, shape=None, dtype=None):
    data = encode_tensor(values, shape=shape, dtype=dtype)
    with open(path, "wb") as f:
        f.write(data)


def read_tensor(path):
    with open(path, "rb") as f:
        return decode_tensor(f.read())

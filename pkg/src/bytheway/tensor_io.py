"""Reading and writing tensors as BTWT or NPY files.

BTWT layout (all integers little-endian)::

    magic      4 bytes  b"BTWT"
    version    uint16   1
    dtype      uint8    1 = float32, 2 = float64
    ndim       uint8    >= 1
    dims       ndim x uint64
    payload    prod(dims) values, row-major, little-endian
    metadata   optional: uint32 length + UTF-8 JSON object

NPY support covers format version 1.0 with little-endian float32/float64
C-order arrays, which is what ``numpy.save`` writes for such arrays.
"""

from __future__ import annotations

import ast
import json
import math
import struct
from pathlib import Path

import numpy as np

from .attention import AttnMapBatch
from .errors import FormatError, NumericContractError

BTWT_MAGIC = b"BTWT"
BTWT_VERSION = 1
NPY_MAGIC = b"\x93NUMPY"

_DTYPE_CODES = {1: np.dtype("<f4"), 2: np.dtype("<f8")}
_CODE_FOR = {np.dtype("<f4"): 1, np.dtype("<f8"): 2}


def _dtype_code(arr):
    try:
        return _CODE_FOR[arr.dtype.newbyteorder("<")]
    except KeyError:
        raise FormatError("dtype", f"only float32 and float64 are supported, got {arr.dtype}") from None


def encode_btwt(tensor, metadata: dict | None = None) -> bytes:
    arr = np.asarray(tensor)
    if arr.ndim < 1:
        raise FormatError("ndim", "tensor must have at least one dimension")
    if arr.ndim > 255:
        raise FormatError("ndim", f"at most 255 dimensions, got {arr.ndim}")
    code = _dtype_code(arr)
    if not np.all(np.isfinite(arr)):
        raise NumericContractError("tensor contains non-finite values")
    parts = [
        BTWT_MAGIC,
        struct.pack("<HBB", BTWT_VERSION, code, arr.ndim),
        struct.pack(f"<{arr.ndim}Q", *arr.shape),
        np.ascontiguousarray(arr, dtype=_DTYPE_CODES[code]).tobytes(),
    ]
    if metadata is not None:
        blob = json.dumps(metadata, sort_keys=True).encode("utf-8")
        parts += [struct.pack("<I", len(blob)), blob]
    return b"".join(parts)


def decode_btwt(buf: bytes):
    """Parse BTWT bytes into ``(array, metadata)``."""
    if len(buf) < 8:
        raise FormatError("header", f"file is {len(buf)} bytes, shorter than the 8-byte header")
    if buf[:4] != BTWT_MAGIC:
        raise FormatError("magic", f"expected {BTWT_MAGIC!r}, got {bytes(buf[:4])!r}")
    version, code, ndim = struct.unpack_from("<HBB", buf, 4)
    if version != BTWT_VERSION:
        raise FormatError("version", f"unsupported BTWT version {version}")
    if code not in _DTYPE_CODES:
        raise FormatError("dtype", f"unknown dtype code {code}")
    if ndim < 1:
        raise FormatError("ndim", "ndim must be >= 1")
    pos = 8
    if len(buf) < pos + 8 * ndim:
        raise FormatError("dims", "file ends inside the dimension list")
    dims = struct.unpack_from(f"<{ndim}Q", buf, pos)
    pos += 8 * ndim
    dtype = _DTYPE_CODES[code]
    nbytes = math.prod(dims) * dtype.itemsize
    if len(buf) < pos + nbytes:
        raise FormatError("payload", f"expected {nbytes} payload bytes, found {len(buf) - pos}")
    arr = np.frombuffer(buf, dtype=dtype, count=math.prod(dims), offset=pos).reshape(dims)
    pos += nbytes

    metadata = {}
    rest = len(buf) - pos
    if rest:
        if rest < 4:
            raise FormatError("metadata", "truncated metadata length")
        (length,) = struct.unpack_from("<I", buf, pos)
        if rest - 4 != length:
            raise FormatError("metadata", f"declared {length} bytes, found {rest - 4}")
        try:
            metadata = json.loads(bytes(buf[pos + 4:]).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FormatError("metadata", f"invalid JSON: {exc}") from None
        if not isinstance(metadata, dict):
            raise FormatError("metadata", "metadata must be a JSON object")
    return arr.copy(), metadata


def encode_npy(tensor) -> bytes:
    """NPY version 1.0 bytes for a float32/float64 array."""
    arr = np.asarray(tensor)
    if arr.ndim < 1:
        raise FormatError("ndim", "tensor must have at least one dimension")
    dtype = _DTYPE_CODES[_dtype_code(arr)]
    if not np.all(np.isfinite(arr)):
        raise NumericContractError("tensor contains non-finite values")
    shape = repr(tuple(int(d) for d in arr.shape))
    header = f"{{'descr': '{dtype.str}', 'fortran_order': False, 'shape': {shape}, }}"
    # magic + version + length field + header + newline is padded to 64 bytes
    pad = -(len(NPY_MAGIC) + 2 + 2 + len(header) + 1) % 64
    header = (header + " " * pad + "\n").encode("latin1")
    if len(header) > 0xFFFF:
        raise FormatError("header", "shape too long for NPY version 1.0")
    return (NPY_MAGIC + b"\x01\x00" + struct.pack("<H", len(header)) + header
            + np.ascontiguousarray(arr, dtype=dtype).tobytes())


def decode_npy(buf: bytes) -> np.ndarray:
    if buf[:6] != NPY_MAGIC:
        raise FormatError("magic", f"expected {NPY_MAGIC!r}, got {bytes(buf[:6])!r}")
    if len(buf) < 10:
        raise FormatError("header", "truncated NPY preamble")
    major, minor = buf[6], buf[7]
    if (major, minor) != (1, 0):
        raise FormatError("version", f"only NPY version 1.0 is supported, got {major}.{minor}")
    (hlen,) = struct.unpack_from("<H", buf, 8)
    if len(buf) < 10 + hlen:
        raise FormatError("header", "file ends inside the NPY header")
    try:
        header = ast.literal_eval(bytes(buf[10:10 + hlen]).decode("latin1"))
    except (SyntaxError, ValueError) as exc:
        raise FormatError("header", f"unparseable header: {exc}") from None
    if not isinstance(header, dict) or set(header) != {"descr", "fortran_order", "shape"}:
        raise FormatError("header", "header must have exactly descr, fortran_order and shape")
    descr = header["descr"]
    if descr not in ("<f4", "<f8"):
        raise FormatError("descr", f"unsupported dtype {descr!r}; need '<f4' or '<f8'")
    if header["fortran_order"] is not False:
        raise FormatError("fortran_order", "Fortran-ordered arrays are not supported")
    shape = header["shape"]
    if not isinstance(shape, tuple) or not all(isinstance(d, int) and d >= 0 for d in shape):
        raise FormatError("shape", f"invalid shape {shape!r}")
    if len(shape) < 1:
        raise FormatError("shape", "scalar arrays are not supported")
    dtype = np.dtype(descr)
    count = math.prod(shape)
    start = 10 + hlen
    if len(buf) - start != count * dtype.itemsize:
        raise FormatError("payload",
                          f"expected {count * dtype.itemsize} payload bytes, found {len(buf) - start}")
    return np.frombuffer(buf, dtype=dtype, count=count, offset=start).reshape(shape).copy()


def _is_npy(path) -> bool:
    return Path(path).suffix.lower() == ".npy"


def read_tensor(path):
    """Read a BTWT or NPY file, detected by magic bytes.

    Returns
    -------
    array : ndarray
        float32 or float64, as stored.
    metadata : dict
        Empty for NPY files and for BTWT files without metadata.
    """
    path = Path(path)
    try:
        buf = path.read_bytes()
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc
    if buf[:6] == NPY_MAGIC:
        return decode_npy(buf), {}
    return decode_btwt(buf)


def write_tensor(path, tensor, metadata: dict | None = None) -> None:
    """Write ``tensor`` as BTWT, or as NPY when ``path`` ends in ``.npy``.

    NPY output drops ``metadata``.
    """
    path = Path(path)
    data = encode_npy(tensor) if _is_npy(path) else encode_btwt(tensor, metadata)
    try:
        path.write_bytes(data)
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc


def map_metadata(amap: AttnMapBatch) -> dict:
    return {"spatial_dims": list(amap.spatial_dims), "stochastic": amap.stochastic}


def load_map(path) -> AttnMapBatch:
    """Read an attention batch; spatial dims come from metadata when present.

    Stochasticity is re-validated rather than trusted.
    """
    arr, meta = read_tensor(path)
    dims = meta.get("spatial_dims")
    try:
        return AttnMapBatch.checked(arr, tuple(dims) if dims else None)
    except ValueError as exc:
        raise FormatError("dims", str(exc)) from None


def save_map(path, amap: AttnMapBatch, dtype=np.float64) -> None:
    write_tensor(path, amap.data.astype(dtype), map_metadata(amap))

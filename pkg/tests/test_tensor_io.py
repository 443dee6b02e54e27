import struct

import numpy as np
import pytest

from bytheway.attention import random_map
from bytheway.errors import FormatError, NumericContractError
from bytheway.tensor_io import (decode_btwt, encode_btwt, encode_npy, load_map, read_tensor,
                                save_map, write_tensor)


def test_btwt_round_trip(tmp_path, rng):
    x = rng.standard_normal((3, 16, 16))
    write_tensor(tmp_path / "x.btwt", x)
    y, meta = read_tensor(tmp_path / "x.btwt")
    assert y.dtype == np.float64
    assert y.tobytes() == x.tobytes() and y.shape == x.shape
    assert meta == {}


def test_btwt_float32_round_trip(tmp_path, rng):
    x = rng.standard_normal((2, 5)).astype(np.float32)
    write_tensor(tmp_path / "x.btwt", x, {"note": "hi"})
    y, meta = read_tensor(tmp_path / "x.btwt")
    assert y.dtype == np.float32 and np.array_equal(x, y)
    assert meta == {"note": "hi"}


def test_btwt_layout(rng):
    x = rng.standard_normal((2, 3))
    buf = encode_btwt(x)
    assert buf[:4] == b"BTWT"
    assert struct.unpack_from("<HBB", buf, 4) == (1, 2, 2)
    assert struct.unpack_from("<2Q", buf, 8) == (2, 3)
    assert len(buf) == 8 + 16 + 6 * 8
    assert buf[24:] == x.astype("<f8").tobytes()
    assert len(encode_btwt(x.astype(np.float32))) == 8 + 16 + 6 * 4


def test_btwt_metadata_layout():
    buf = encode_btwt(np.zeros(2), {"a": 1})
    (n,) = struct.unpack_from("<I", buf, 8 + 8 + 16)
    assert buf[8 + 8 + 16 + 4:].decode() == '{"a": 1}' and n == 8


def test_btwt_deterministic(tmp_path, rng):
    x = rng.standard_normal((4, 4))
    write_tensor(tmp_path / "a.btwt", x, {"z": 1, "a": 2})
    write_tensor(tmp_path / "b.btwt", x, {"a": 2, "z": 1})
    assert (tmp_path / "a.btwt").read_bytes() == (tmp_path / "b.btwt").read_bytes()


def test_bad_magic():
    buf = b"XXXX" + encode_btwt(np.zeros(3))[4:]
    with pytest.raises(FormatError) as err:
        decode_btwt(buf)
    assert err.value.field == "magic"
    assert "magic" in str(err.value)


@pytest.mark.parametrize("cut,field", [(3, "header"), (12, "dims"), (20, "payload")])
def test_truncated(cut, field):
    buf = encode_btwt(np.zeros(3))
    with pytest.raises(FormatError) as err:
        decode_btwt(buf[:cut])
    assert err.value.field == field


def test_bad_dtype_code():
    buf = bytearray(encode_btwt(np.zeros(3)))
    buf[6] = 9
    with pytest.raises(FormatError) as err:
        decode_btwt(bytes(buf))
    assert err.value.field == "dtype"


def test_bad_metadata_length():
    buf = encode_btwt(np.zeros(3), {"a": 1}) + b"x"
    with pytest.raises(FormatError) as err:
        decode_btwt(buf)
    assert err.value.field == "metadata"


def test_write_rejects_scalar_and_ints(tmp_path):
    with pytest.raises(FormatError):
        write_tensor(tmp_path / "s.btwt", np.float64(1.0))
    with pytest.raises(FormatError) as err:
        write_tensor(tmp_path / "i.btwt", np.arange(3))
    assert err.value.field == "dtype"


def test_write_rejects_nonfinite(tmp_path):
    with pytest.raises(NumericContractError):
        write_tensor(tmp_path / "n.btwt", np.array([1.0, np.nan]))


def test_write_io_error_names_path(tmp_path):
    target = tmp_path / "missing" / "x.btwt"
    with pytest.raises(OSError, match="missing"):
        write_tensor(target, np.zeros(2))


@pytest.mark.parametrize("dtype", [np.float32, np.float64])
def test_npy_cross_format(tmp_path, rng, dtype):
    x = rng.standard_normal((4, 16, 16)).astype(dtype)
    np.save(tmp_path / "ref.npy", x)
    write_tensor(tmp_path / "x.btwt", x)
    a, _ = read_tensor(tmp_path / "ref.npy")
    b, _ = read_tensor(tmp_path / "x.btwt")
    assert a.dtype == b.dtype == dtype
    assert np.array_equal(a, b)


def test_npy_writer_readable_by_numpy(tmp_path, rng):
    x = rng.standard_normal((3, 2, 5)).astype(np.float32)
    write_tensor(tmp_path / "x.npy", x)
    assert np.array_equal(np.load(tmp_path / "x.npy"), x)
    assert (tmp_path / "x.npy").read_bytes()[:8] == b"\x93NUMPY\x01\x00"
    assert (len(encode_npy(x)) - x.nbytes) % 64 == 0


def test_npy_fortran_rejected(tmp_path, rng):
    np.save(tmp_path / "f.npy", np.asfortranarray(rng.standard_normal((3, 4))))
    with pytest.raises(FormatError) as err:
        read_tensor(tmp_path / "f.npy")
    assert err.value.field == "fortran_order"


def test_npy_dtype_rejected(tmp_path):
    np.save(tmp_path / "i.npy", np.arange(4))
    with pytest.raises(FormatError) as err:
        read_tensor(tmp_path / "i.npy")
    assert err.value.field == "descr"


def test_npy_version_rejected(tmp_path):
    with open(tmp_path / "v2.npy", "wb") as fh:
        np.lib.format.write_array(fh, np.zeros(3), version=(2, 0))
    with pytest.raises(FormatError) as err:
        read_tensor(tmp_path / "v2.npy")
    assert err.value.field == "version"


def test_npy_truncated(tmp_path):
    np.save(tmp_path / "t.npy", np.zeros((4, 4)))
    data = (tmp_path / "t.npy").read_bytes()
    (tmp_path / "t.npy").write_bytes(data[:-3])
    with pytest.raises(FormatError) as err:
        read_tensor(tmp_path / "t.npy")
    assert err.value.field == "payload"


def test_map_round_trip(tmp_path, rng):
    amap = random_map(12, 8, rng, spatial_dims=(1, 3, 4))
    save_map(tmp_path / "m.btwt", amap)
    back = load_map(tmp_path / "m.btwt")
    assert back.spatial_dims == (1, 3, 4)
    assert back.stochastic
    assert np.array_equal(back.data, amap.data)


def test_load_map_from_npy_defaults_dims(tmp_path, rng):
    amap = random_map(6, 8, rng)
    np.save(tmp_path / "m.npy", amap.data.astype(np.float32))
    back = load_map(tmp_path / "m.npy")
    assert back.spatial_dims == (1, 1, 6)
    np.testing.assert_allclose(back.data, amap.data, rtol=1e-6)

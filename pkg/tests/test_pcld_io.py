import struct

import numpy as np
import pytest

from pointcil.data.pcld import MAGIC, PCLDError, read_pcld, write_pcld


def test_roundtrip_identity(tmp_path):
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(57, 3)).astype(np.float32)
    path = tmp_path / "cloud.pcld"
    write_pcld(path, pts)
    back = read_pcld(path)
    assert back.dtype == np.float32
    assert np.array_equal(back, pts)  # bit-exact


def test_header_count_matches_payload(tmp_path):
    path = tmp_path / "three.pcld"
    pts = np.arange(9, dtype=np.float32).reshape(3, 3)
    write_pcld(path, pts)
    assert read_pcld(path).shape == (3, 3)


def test_truncated_payload(tmp_path):
    path = tmp_path / "bad.pcld"
    payload = MAGIC + struct.pack("<I", 3) + b"\x00" * (8 * 4)  # 8 floats, not 9
    path.write_bytes(payload)
    with pytest.raises(PCLDError, match="truncated"):
        read_pcld(path)


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.pcld"
    path.write_bytes(b"NOPE" + struct.pack("<I", 0))
    with pytest.raises(PCLDError, match="magic"):
        read_pcld(path)


def test_nonfinite_coordinate(tmp_path):
    path = tmp_path / "nan.pcld"
    pts = np.array([[np.nan, 0, 0]], dtype="<f4")
    payload = MAGIC + struct.pack("<I", 1) + pts.tobytes()
    path.write_bytes(payload)
    with pytest.raises(PCLDError, match="non-finite"):
        read_pcld(path)


def test_write_rejects_bad_shape(tmp_path):
    with pytest.raises(PCLDError):
        write_pcld(tmp_path / "x.pcld", np.zeros((3, 2)))

import numpy as np
import pytest

from cmux.errors import FormatError
from cmux.io import KINDS, file_sha256, read_cmx, read_matrix_csv, write_cmx, write_matrix_csv


def test_cmx_round_trip_and_header(tmp_path, rng):
    A = rng.standard_normal((3, 5)) + 1j * rng.standard_normal((3, 5))
    p = write_cmx(tmp_path / "a.cmx", A, "ensemble")
    raw = p.read_bytes()
    assert raw[:8] == b"CMXENSEM" and len(raw) == 24 + 16 * 15
    assert int.from_bytes(raw[8:16], "little") == 3 and int.from_bytes(raw[16:24], "little") == 5
    kind, B = read_cmx(p)
    assert kind == "ensemble"
    np.testing.assert_array_equal(A, B)


@pytest.mark.parametrize("kind", sorted(KINDS))
def test_every_kind_round_trips(tmp_path, kind):
    p = write_cmx(tmp_path / f"{kind}.cmx", np.arange(4.0), kind)
    k, arr = read_cmx(p, expect=kind)
    assert k == kind and arr.shape == (1, 4)


def test_cmx_errors(tmp_path):
    p = write_cmx(tmp_path / "s.cmx", np.ones(3), "samples")
    with pytest.raises(FormatError):
        read_cmx(p, expect="ensemble")
    bad = tmp_path / "bad.cmx"
    bad.write_bytes(b"NOTACMX!" + bytes(16))
    with pytest.raises(FormatError):
        read_cmx(bad)
    short = tmp_path / "short.cmx"
    short.write_bytes(p.read_bytes()[:-1])
    with pytest.raises(FormatError):
        read_cmx(short)
    (tmp_path / "tiny.cmx").write_bytes(b"CMX")
    with pytest.raises(FormatError):
        read_cmx(tmp_path / "tiny.cmx")
    with pytest.raises(ValueError):
        write_cmx(tmp_path / "x.cmx", np.ones(2), "bogus")


def test_matrix_csv_round_trip(tmp_path, rng):
    A = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    p = write_matrix_csv(tmp_path / "a.csv", A)
    assert p.read_text().splitlines()[0] == "re_0,im_0,re_1,im_1,re_2,im_2"
    np.testing.assert_array_equal(read_matrix_csv(p), A)


def test_matrix_csv_errors(tmp_path):
    (tmp_path / "odd.csv").write_text("re_0,im_0,re_1\n1,2,3\n")
    with pytest.raises(FormatError):
        read_matrix_csv(tmp_path / "odd.csv")
    (tmp_path / "nan.csv").write_text("re_0,im_0\nx,1\n")
    with pytest.raises(FormatError):
        read_matrix_csv(tmp_path / "nan.csv")
    (tmp_path / "empty.csv").write_text("re_0,im_0\n")
    assert read_matrix_csv(tmp_path / "empty.csv").shape == (0, 1)


def test_sha256_is_content_hash(tmp_path):
    a = write_cmx(tmp_path / "a.cmx", np.ones(3), "samples")
    b = write_cmx(tmp_path / "b.cmx", np.ones(3), "samples")
    assert file_sha256(a) == file_sha256(b) and len(file_sha256(a)) == 64

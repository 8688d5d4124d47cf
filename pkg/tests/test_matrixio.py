from __future__ import annotations

import struct

import numpy as np
import pytest

from diffsim import DataError, FormatError, ValidationError, read_array, read_matrix, write_matrix


class TestBinaryFormat:
    def test_round_trip_bit_exact_over_random_matrices(self, rng, tmp_path):
        path = tmp_path / "m.rsm"
        for _ in range(1000):
            rows = int(rng.integers(2, 9))
            cols = int(rng.integers(1, 9))
            m = rng.standard_normal((rows, cols)) * 10.0 ** rng.integers(-8, 9)
            write_matrix(m, path)
            back = read_array(path)
            assert back.shape == m.shape
            assert np.array_equal(back, m)  # bit-exact, not approx

    def test_identity_header_bytes(self, tmp_path):
        path = tmp_path / "eye.rsm"
        write_matrix(np.eye(2), path)
        blob = path.read_bytes()
        assert len(blob) == 24 + 32  # header + four float64 values
        assert blob[:8] == bytes([0x52, 0x53, 0x4D, 0x31, 0x01, 0x00, 0x00, 0x00])
        assert blob[8:16] == (2).to_bytes(8, "little")
        assert blob[16:24] == (2).to_bytes(8, "little")
        assert blob[24:] == struct.pack("<4d", 1.0, 0.0, 0.0, 1.0)

    def test_zero_rows_rejected(self, tmp_path):
        with pytest.raises(ValidationError):
            write_matrix(np.empty((0, 3)), tmp_path / "x.rsm")
        with pytest.raises(ValidationError):
            write_matrix(np.ones((1, 3)), tmp_path / "x.rsm")

    def test_nonfinite_write_rejected(self, tmp_path):
        with pytest.raises(ValidationError):
            write_matrix(np.array([[1.0, np.nan], [0.0, 1.0]]), tmp_path / "x.rsm")

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "m.rsm"
        write_matrix(np.eye(3), path)
        blob = path.read_bytes()
        path.write_bytes(blob[:-8])
        with pytest.raises(FormatError):
            read_array(path)

    def test_trailing_bytes_rejected(self, tmp_path):
        path = tmp_path / "m.rsm"
        write_matrix(np.eye(3), path)
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(FormatError):
            read_array(path)

    def test_bad_magic_reports_offset(self, tmp_path):
        path = tmp_path / "m.rsm"
        write_matrix(np.eye(2), path)
        blob = bytearray(path.read_bytes())
        blob[0] = 0x58
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError, match="offset 0"):
            read_array(path)

    def test_bad_version_reports_offset(self, tmp_path):
        path = tmp_path / "m.rsm"
        write_matrix(np.eye(2), path)
        blob = bytearray(path.read_bytes())
        blob[4] = 9
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError, match="offset 4"):
            read_array(path)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "m.rsm"
        path.write_bytes(b"RSM1\x01\x00")
        with pytest.raises(FormatError):
            read_array(path)

    def test_nan_payload_names_position(self, tmp_path):
        path = tmp_path / "m.rsm"
        header = struct.pack("<4sIQQ", b"RSM1", 1, 2, 2)
        payload = struct.pack("<4d", 1.0, 2.0, float("nan"), 4.0)
        path.write_bytes(header + payload)
        with pytest.raises(DataError, match="row 1, col 0"):
            read_array(path)

    def test_no_temp_litter_after_writes(self, tmp_path):
        write_matrix(np.eye(4), tmp_path / "a.rsm")
        write_matrix(np.eye(5), tmp_path / "b.rsm")
        assert sorted(p.name for p in tmp_path.iterdir()) == ["a.rsm", "b.rsm"]


class TestCsvFallback:
    def test_two_by_two(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1,2\n3,4\n")
        assert np.array_equal(read_array(path), np.array([[1.0, 2.0], [3.0, 4.0]]))

    def test_ragged_rows_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1,2\n3\n")
        with pytest.raises(FormatError):
            read_array(path)

    def test_non_numeric_cell_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1,2\n3,four\n")
        with pytest.raises(FormatError, match="line 2"):
            read_array(path)

    def test_nan_cell_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1,2\nnan,4\n")
        with pytest.raises(DataError, match="row 1, col 0"):
            read_array(path)

    def test_empty_csv_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("")
        with pytest.raises(FormatError):
            read_array(path)


class TestReadMatrix:
    def test_returns_validated_rep_matrix(self, tmp_path):
        path = tmp_path / "m.rsm"
        write_matrix(np.arange(6, dtype=float).reshape(3, 2), path)
        rep = read_matrix(path)
        assert rep.n_samples == 3 and rep.n_dims == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_matrix(tmp_path / "nope.rsm")

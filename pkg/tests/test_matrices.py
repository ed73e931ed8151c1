"""Sensing-matrix container, hashing, and CSV round-trips."""

import numpy as np
import pytest

from ripkit.errors import PreconditionError
from ripkit.matrices import (
    SensingMatrix,
    as_sensing_matrix,
    matrix_from_csv_text,
    matrix_to_csv_text,
    read_matrix_csv,
    write_matrix_csv,
)


def test_container_basics():
    arr = np.arange(6, dtype=float).reshape(2, 3)
    mat = SensingMatrix(arr)
    assert (mat.n, mat.p) == (2, 3)
    assert np.array_equal(mat.array, arr)
    assert mat.gram() == pytest.approx(arr.T @ arr)
    with pytest.raises(ValueError):
        mat.array[0, 0] = 99.0  # stored copy is frozen


def test_container_detaches_from_caller():
    arr = np.ones((2, 2))
    mat = SensingMatrix(arr)
    arr[0, 0] = 7.0
    assert mat.array[0, 0] == 1.0


def test_matrix_id_tracks_content():
    a = SensingMatrix(np.eye(3))
    b = SensingMatrix(np.eye(3))
    c = SensingMatrix(np.eye(3) * 2.0)
    assert a.matrix_id == b.matrix_id
    assert a.matrix_id != c.matrix_id
    # shape participates: a 1x4 and a 4x1 of equal bytes must differ
    flat = np.arange(4.0)
    assert SensingMatrix(flat.reshape(1, 4)).matrix_id != SensingMatrix(flat.reshape(4, 1)).matrix_id


def test_as_sensing_matrix_passthrough_and_validation():
    mat = SensingMatrix(np.eye(2))
    assert as_sensing_matrix(mat) is mat
    assert as_sensing_matrix(np.eye(2)).matrix_id == mat.matrix_id
    with pytest.raises(PreconditionError):
        as_sensing_matrix(np.array([[np.nan, 0.0]]))
    with pytest.raises(PreconditionError):
        as_sensing_matrix(np.ones(3))  # not 2-d
    with pytest.raises(PreconditionError):
        as_sensing_matrix(np.ones((0, 3)))


def test_csv_round_trip_is_bit_exact():
    rng = np.random.default_rng(2)
    cases = [
        rng.normal(size=(3, 5)),
        np.array([[1e-300, -1e300], [0.1, 1 / 3]]),
        np.array([[-0.0, 2.0**-52]]),
    ]
    for arr in cases:
        text = matrix_to_csv_text(arr)
        back = matrix_from_csv_text(text)
        assert back.shape == arr.shape
        assert np.array_equal(back, arr)  # repr round-trip, not approx


def test_csv_file_round_trip(tmp_path):
    arr = np.random.default_rng(9).normal(size=(4, 6))
    path = tmp_path / "m.csv"
    write_matrix_csv(path, arr)
    back = read_matrix_csv(path)
    assert np.array_equal(back, arr)


def test_csv_rejects_malformed():
    with pytest.raises(PreconditionError):
        matrix_from_csv_text("not a header\n1,2\n")
    with pytest.raises(PreconditionError):
        matrix_from_csv_text("2,2\n1,2\n3\n")  # short row
    with pytest.raises(PreconditionError):
        matrix_from_csv_text("2,2\n1,2\n")  # missing row

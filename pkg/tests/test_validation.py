import numpy as np
import pytest

from twotype._validation import (
    DataError, check_labels, check_reliability, check_responses, check_types, make_rng,
)


def test_make_rng_is_philox_and_reproducible():
    a = make_rng(7).random(5)
    b = make_rng(7).random(5)
    assert np.array_equal(a, b)
    assert isinstance(make_rng(7).bit_generator, np.random.Philox)
    g = make_rng(1)
    assert make_rng(g) is g


def test_check_responses_dense_and_missing():
    Y = [[1, -1], [-1, 1]]
    out = check_responses(Y)
    assert out.dtype == np.int8
    with pytest.raises(DataError, match="dense matrix required"):
        check_responses([[1, 0], [1, 1]])
    assert check_responses([[1, 0], [1, 1]], allow_missing=True)[0, 1] == 0


@pytest.mark.parametrize("bad", [[[2, 1]], [[0.5, 1]], [[np.nan, 1]], [1, -1, 1]])
def test_check_responses_rejects_bad_entries(bad):
    with pytest.raises(DataError):
        check_responses(bad)


def test_check_responses_min_workers():
    with pytest.raises(DataError, match="at least 3 workers"):
        check_responses([[1, 1], [1, -1]], min_workers=3)


def test_label_and_type_checks():
    assert check_labels([1, -1, 1], d=3).tolist() == [1, -1, 1]
    with pytest.raises(DataError):
        check_labels([1, 0])
    with pytest.raises(DataError):
        check_labels([1, 1], d=3)
    assert check_types([1, 2, 2]).tolist() == [1, 2, 2]
    with pytest.raises(DataError):
        check_types([0, 1])
    with pytest.raises(DataError):
        check_types([1, 3])


def test_reliability_interior_and_margin():
    check_reliability([0.5, -0.5])
    with pytest.raises(DataError):
        check_reliability([1.0, 0.2])
    check_reliability([1.0, -1.0], interior=False)
    with pytest.raises(DataError):
        check_reliability([1.2], interior=False)
    # margin 0.1 means 0.1 <= (1 + r) / 2 <= 0.9, i.e. |r| <= 0.8
    check_reliability([0.7, -0.7], margin=0.1)
    with pytest.raises(DataError, match="margin"):
        check_reliability([0.85], margin=0.1)
    with pytest.raises(DataError):
        check_reliability([0.2, 0.3], n=3)

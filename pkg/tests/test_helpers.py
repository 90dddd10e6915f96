import numpy as np
import pytest

from app.utils.helpers import child_rng, db_to_linear, linear_to_db, map_tasks, split_trials


def _square(value: int) -> int:
    return value * value


def test_decibel_conversions():
    assert db_to_linear(20.0) == pytest.approx(100.0)
    assert linear_to_db(0.001) == pytest.approx(-30.0)
    assert linear_to_db(0.0) == -np.inf


def test_child_streams_are_reproducible_and_distinct():
    first = child_rng(2023, 1, 5).random(4)
    again = child_rng(2023, 1, 5).random(4)
    other = child_rng(2023, 1, 6).random(4)
    np.testing.assert_array_equal(first, again)
    assert not np.array_equal(first, other)


def test_split_trials_covers_total():
    assert split_trials(25, 10) == [10, 10, 5]
    assert split_trials(20, 10) == [10, 10]
    assert split_trials(0, 10) == []


def test_map_tasks_keeps_order():
    assert map_tasks(_square, [3, 1, 2]) == [9, 1, 4]


def test_map_tasks_pool_matches_serial():
    tasks = list(range(12))
    assert map_tasks(_square, tasks, workers=2) == map_tasks(_square, tasks, workers=1)

import json

import numpy as np
import pytest

from gausscauchy.rng import rng


def test_golden_values(data_dir):
    gold = json.loads((data_dir / "rng_golden.json").read_text())
    assert rng(gold["seed"], gold["stream"]).random(5).tolist() == gold["random"]
    assert rng(gold["seed"], gold["stream"]).standard_normal(5).tolist() == gold["standard_normal"]


def test_same_stream_same_sequence():
    assert np.array_equal(rng(7, 3).random(100), rng(7, 3).random(100))
    assert not np.array_equal(rng(7, 3).random(100), rng(7, 4).random(100))
    assert not np.array_equal(rng(7, 3).random(100), rng(8, 3).random(100))


def test_streams_uncorrelated():
    a = rng(11, 1).standard_normal(10 ** 5)
    b = rng(11, 2).standard_normal(10 ** 5)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.01


def test_negative_ids_rejected():
    with pytest.raises(ValueError):
        rng(-1, 0)
    with pytest.raises(ValueError):
        rng(0, -2)

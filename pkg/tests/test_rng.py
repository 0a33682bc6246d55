import numpy as np
import pytest

from sparsecert.rng import MAX_SEED, check_seed, substream


class TestSubstreams:
    def test_same_key_same_stream(self):
        a = substream(7, "trial", 3, 4).random(5)
        b = substream(7, "trial", 3, 4).random(5)
        assert np.array_equal(a, b)

    def test_keys_separate_streams(self):
        base = substream(7, "trial", 3, 4).random(5)
        for other in (substream(8, "trial", 3, 4), substream(7, "rows", 3, 4), substream(7, "trial", 4, 3)):
            assert not np.array_equal(base, other.random(5))

    def test_high_seed_bits_matter(self):
        assert not np.array_equal(substream(1, "x").random(3), substream(1 + 2**40, "x").random(3))

    def test_seed_range(self):
        assert check_seed(MAX_SEED) == MAX_SEED
        with pytest.raises(ValueError):
            check_seed(-1)
        with pytest.raises(ValueError):
            check_seed(2**64)

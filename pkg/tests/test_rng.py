import numpy as np
from scipy import stats

from ltsgsprt.rng import Stream, derive_key, normal, uniform


def test_derive_key_deterministic_and_vectorized():
    reps = np.arange(5, dtype=np.uint64)
    keys = derive_key(7, 1, 0, reps)
    assert keys.shape == (5,)
    assert len(set(keys.tolist())) == 5
    for i in range(5):
        assert derive_key(7, 1, 0, i) == keys[i]
    assert derive_key(7, 1, 0, 0) != derive_key(7, 1, 1, 0)
    assert derive_key(1, 2) != derive_key(2, 1)


def test_uniform_open_interval_and_moments():
    u = uniform(derive_key(3), np.arange(200_000))
    assert u.min() > 0 and u.max() < 1
    assert abs(u.mean() - 0.5) < 4 * np.sqrt(1 / 12 / u.size)


def test_normal_draws_pass_ks():
    z = normal(derive_key(11), np.arange(100_000))
    assert stats.kstest(z, "norm").pvalue > 1e-3


def test_stream_matches_counter_draws():
    key = derive_key(5, 6)
    s = Stream(key)
    got = [s.next_normal() for _ in range(10)]
    assert np.array_equal(got, normal(key, np.arange(10)))

import numpy as np

from qcharmlab import errors
from qcharmlab._parallel import chunked, n_threads


def test_error_payload():
    e = errors.OrientationFailure("bad", witness=0.5 + 1j)
    assert e.to_dict() == {"error": "OrientationFailure", "message": "bad", "witness": [0.5, 1.0]}
    assert errors.ConfigError("x").to_dict() == {"error": "ConfigError", "message": "x"}
    assert issubclass(errors.InvalidRadius, ValueError)


def test_chunked_is_thread_independent(monkeypatch):
    x = np.random.default_rng(0).normal(size=10000)

    def work(a, b):
        return np.cumsum(x[a:b]), x[a:b] ** 2

    monkeypatch.setenv("QCHARMLAB_THREADS", "1")
    one = chunked(work, len(x), 1000)
    monkeypatch.setenv("QCHARMLAB_THREADS", "3")
    assert n_threads() == 3
    three = chunked(work, len(x), 1000)
    assert all(np.array_equal(a, b) for a, b in zip(one, three))
    monkeypatch.setenv("QCHARMLAB_THREADS", "lots")
    assert n_threads() == 1

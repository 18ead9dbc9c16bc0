import os
import subprocess
import sys

import numpy as np
import pytest

from ergolab import DriftError, Rotation, StepObservable, TrigPolynomial, product_rotation, step_skew
from ergolab import _kernels
from ergolab._kernels import _fallback
from ergolab.double_avg import default_points

BACKENDS = sorted(_kernels.BACKENDS)
needs_compiled = pytest.mark.skipif("compiled" not in _kernels.BACKENDS, reason="compiled kernels not built")

SQRT2 = "sqrt(2)-1"
MAPS = [Rotation([SQRT2, "sqrt(3)-1"]), product_rotation([SQRT2], ["1/7"]),
        step_skew([SQRT2], ["1/3"]), step_skew([SQRT2, "sqrt(5)"], ["1/3", "2/9"], "1/3")]


def _obs(dim):
    trig = TrigPolynomial(dim, {(1,) * dim: 0.5 - 0.5j, (-2,) + (0,) * (dim - 1): 1.0})
    box = StepObservable.indicator((0,) * dim, (0.5,) * dim)
    return trig * box + TrigPolynomial.cos((0,) * (dim - 1) + (3,))


def test_backend_selection():
    assert _kernels.backend_name() in _kernels.BACKENDS
    with pytest.raises(ValueError):
        _kernels.set_backend("gpu")
    previous = _kernels.set_backend("python")
    try:
        assert _kernels.backend_name() == "python"
    finally:
        _kernels.set_backend(previous)


def test_pure_python_switch():
    env = dict(os.environ, ERGOLAB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import ergolab; print(ergolab.backend_name())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_compiled
@pytest.mark.parametrize("m", MAPS, ids=lambda m: m.name)
def test_backends_agree_bitwise_on_maps_and_orbits(m):
    pts = np.random.default_rng(51).random((2000, m.dim))
    a = _kernels.map_points(m.pack(), pts, backend="python")
    b = _kernels.map_points(m.pack(), pts, backend="compiled")
    assert np.array_equal(a, b)
    start = pts[0]
    counts = np.zeros(m.pack().n_steps, dtype=np.int64)
    for n0, length in ((0, 5000), (123_456, 777)):
        pa, ca = _kernels.orbit_points(m.pack(), start, n0, counts, length, backend="python")
        pb, cb = _kernels.orbit_points(m.pack(), start, n0, counts, length, backend="compiled")
        assert np.array_equal(pa, pb)
        assert np.array_equal(ca, cb)


@needs_compiled
@pytest.mark.parametrize("m", MAPS, ids=lambda m: m.name)
def test_backends_agree_on_sums(m):
    f = _obs(m.dim)
    pts = np.random.default_rng(52).random((500, m.dim))
    va = _kernels.eval_points(f.pack(), pts, backend="python")
    vb = _kernels.eval_points(f.pack(), pts, backend="compiled")
    assert np.max(np.abs(va - vb)) <= 1e-14
    seeds = pts[:6]
    sa = _kernels.birkhoff_sums(m.pack(), f.pack(), seeds, [10, 1000, 40_000], backend="python")
    sb = _kernels.birkhoff_sums(m.pack(), f.pack(), seeds, [10, 1000, 40_000], backend="compiled")
    assert np.max(np.abs(sa - sb)) <= 1e-9


@needs_compiled
def test_backends_agree_on_double_sums():
    R = Rotation([SQRT2])
    f1, f2 = TrigPolynomial(1, {(2,): 1.0, (1,): 0.5j}), TrigPolynomial(1, {(-1,): 1.0, (3,): 0.25})
    pts = default_points(1)[:12]
    a = _kernels.double_sums(R.pack().alpha, f1.pack(), f2.pack(), pts, [10, 30_000], backend="python")
    b = _kernels.double_sums(R.pack().alpha, f1.pack(), f2.pack(), pts, [10, 30_000], backend="compiled")
    assert np.max(np.abs(a - b)) <= 1e-9


@pytest.mark.parametrize("backend", BACKENDS)
def test_results_do_not_depend_on_worker_count(backend):
    m = MAPS[2]
    f = _obs(2)
    seeds = np.random.default_rng(53).random((13, 2))
    one = _kernels.birkhoff_sums(m.pack(), f.pack(), seeds, [50, 5000], workers=1, backend=backend)
    many = _kernels.birkhoff_sums(m.pack(), f.pack(), seeds, [50, 5000], workers=8, backend=backend)
    assert np.array_equal(one, many)
    R = Rotation([SQRT2])
    g = TrigPolynomial.character((1,))
    pts = default_points(1)[:9]
    one = _kernels.double_sums(R.pack().alpha, g.pack(), g.pack(), pts, [100], workers=1, backend=backend)
    many = _kernels.double_sums(R.pack().alpha, g.pack(), g.pack(), pts, [100], workers=4, backend=backend)
    assert np.array_equal(one, many)


def test_drift_check_raises_on_corrupted_orbit():
    R = Rotation([SQRT2])
    alpha = R.pack().alpha
    idx = np.arange(0, 20_001, dtype=float)
    good = np.mod(0.1 + 2 * idx * (2 ** 0.5 - 1), 1.0)[:, None]
    _fallback._cross_check(alpha, np.array([0.1]), idx, good, 0)
    bad = good.copy()
    bad[10_000, 0] = (bad[10_000, 0] + 1e-6) % 1.0
    with pytest.raises(DriftError, match="n=10000"):
        _fallback._cross_check(alpha, np.array([0.1]), idx, bad, 0)

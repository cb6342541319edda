import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from taylorlp import kernels
from taylorlp.rng import Xoshiro256, seed_state, splitmix64

PY = kernels.get_backend("python")
try:
    CY = kernels.get_backend("cython")
except ImportError:  # pragma: no cover
    CY = None

needs_cython = pytest.mark.skipif(CY is None, reason="compiled extension not built")


def test_backend_flag():
    assert kernels.BACKEND in ("cython", "python")
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


# -- reference vectors ---------------------------------------------------------


def test_splitmix64_reference():
    _, out = splitmix64(0)
    assert out == 0xE220A8397B1DCDAF


@pytest.mark.parametrize("backend", ["python", pytest.param("cython", marks=needs_cython)])
def test_xoshiro_reference(backend):
    g = Xoshiro256.from_state([1, 2, 3, 4], backend=backend)
    assert [int(v) for v in g.uint64(4)] == [11520, 0, 1509978240, 1215971899390074240]


def test_uniform_is_top_53_bits():
    g = Xoshiro256(5)
    raw = Xoshiro256(5).uint64(10)
    u = g.uniform(10)
    assert np.array_equal(u, np.array([(int(x) >> 11) / 2.0**53 for x in raw]))
    assert np.all((u >= 0) & (u < 1))


def test_normal_box_muller_by_hand():
    raw = Xoshiro256(11).uint64(4)
    u = [(int(x) >> 11) / 2.0**53 for x in raw]
    expect = []
    for a, b in ((u[0], u[1]), (u[2], u[3])):
        r = math.sqrt(-2 * math.log(1 - a))
        expect += [r * math.cos(2 * math.pi * b), r * math.sin(2 * math.pi * b)]
    assert np.array_equal(Xoshiro256(11).normal(4), np.array(expect))
    # odd count discards the spare but consumes the pair
    g = Xoshiro256(11)
    assert np.array_equal(g.normal(3), np.array(expect[:3]))
    assert g.uint64(1)[0] == Xoshiro256(11).uint64(5)[4]


def test_seed_range():
    with pytest.raises(ValueError):
        seed_state(-1)
    with pytest.raises(ValueError):
        seed_state(2**64)


def test_normal_moments():
    z = Xoshiro256(3).normal(200_000)
    assert abs(z.mean()) < 0.01
    assert abs(z.std() - 1) < 0.01


# -- backend agreement ---------------------------------------------------------


@needs_cython
@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), n=st.integers(0, 257))
def test_streams_bit_identical(seed, n):
    for method in ("uint64", "uniform", "normal"):
        a, b = Xoshiro256(seed, backend="python"), Xoshiro256(seed, backend="cython")
        assert np.array_equal(getattr(a, method)(n), getattr(b, method)(n))
        assert np.array_equal(a.state, b.state)


def _grouped(rng, n_groups, max_len, p):
    lens = rng.integers(0, max_len + 1, size=n_groups)
    codes = np.repeat(np.arange(n_groups), lens).astype(np.int64)
    years = np.concatenate([np.sort(rng.choice(30, size=k, replace=False)) for k in lens] or [[]]).astype(np.int64)
    values = np.ascontiguousarray(rng.normal(size=(len(codes), p)))
    return codes, years + 2000, values


@needs_cython
@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), g=st.integers(1, 12), p=st.integers(1, 5), k=st.integers(-4, 4))
def test_kernels_agree(seed, g, p, k):
    codes, years, values = _grouped(np.random.default_rng(seed), g, 10, p)
    np.testing.assert_allclose(CY.group_demean(values, codes, g), PY.group_demean(values, codes, g), atol=1e-12)
    np.testing.assert_allclose(
        CY.cluster_score_sums(values, codes, g), PY.cluster_score_sums(values, codes, g), atol=1e-12
    )
    assert np.array_equal(CY.shift_index(codes, years, k), PY.shift_index(codes, years, k))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), g=st.integers(1, 8), k=st.integers(-3, 3))
def test_shift_index_against_dict(seed, g, k):
    codes, years, _ = _grouped(np.random.default_rng(seed), g, 8, 1)
    where = {(int(c), int(y)): i for i, (c, y) in enumerate(zip(codes, years))}
    expect = [where.get((int(c), int(y) - k), -1) for c, y in zip(codes, years)]
    assert list(kernels.shift_index(codes, years, k)) == expect


def test_group_demean_zero_mean():
    codes, _, values = _grouped(np.random.default_rng(0), 5, 9, 3)
    out = kernels.group_demean(values, codes, 5)
    for c in range(5):
        rows = codes == c
        if rows.any():
            assert np.abs(out[rows].mean(axis=0)).max() < 1e-12


@pytest.mark.parametrize("backend", ["python", pytest.param("cython", marks=needs_cython)])
def test_empty_inputs(backend):
    b = kernels.get_backend(backend)
    none = np.empty(0, dtype=np.int64)
    assert b.shift_index(none, none, 1).shape == (0,)
    assert b.group_demean(np.empty((0, 2)), none, 1).shape == (0, 2)

import numpy as np
import pytest
from hypothesis import given, strategies as st

from looc import CodeGrid, FeatureMap, Metric, QuantConfig, featuremap_new, split_vector
from looc.errors import (
    IndexOutOfRangeError,
    IndivisibleDimensionError,
    LengthMismatchError,
    LoocError,
    NonFiniteInputError,
)


def test_featuremap_minimal_container():
    fm = featuremap_new(1, 1, 2, [0.5, -0.5])
    assert (fm.h, fm.w, fm.d) == (1, 1, 2)
    assert fm.data.dtype == np.float32
    np.testing.assert_array_equal(fm.flat(), np.array([0.5, -0.5], np.float32))


def test_featuremap_zeros():
    fm = featuremap_new(2, 2, 4, [0.0] * 16)
    assert fm.data.shape == (2, 2, 4)
    assert not fm.data.any()


def test_featuremap_rejects_nan():
    with pytest.raises(NonFiniteInputError):
        featuremap_new(1, 1, 2, [float("nan"), 0.0])
    with pytest.raises(NonFiniteInputError):
        featuremap_new(1, 1, 1, [float("inf")])


def test_featuremap_length_mismatch():
    with pytest.raises(LengthMismatchError):
        featuremap_new(2, 2, 2, [1.0, 2.0, 3.0])


def test_featuremap_copies_input():
    buf = np.ones(4, dtype=np.float32)
    fm = featuremap_new(2, 2, 1, buf)
    buf[0] = 99.0
    assert fm.flat()[0] == 1.0


def test_featuremap_immutable():
    fm = featuremap_new(1, 1, 2, [1.0, 2.0])
    with pytest.raises(ValueError):
        fm.data[0, 0, 0] = 3.0


def test_flat_offset_bijection_exhaustive():
    h, w, d = 2, 3, 4
    values = np.arange(h * w * d, dtype=np.float32)
    fm = featuremap_new(h, w, d, values)
    flat = fm.flat()
    for i in range(h):
        for j in range(w):
            for c in range(d):
                assert fm.data[i, j, c] == flat[i * w * d + j * d + c]


def test_split_vector_layout():
    parts = split_vector([1.0, 2.0, 3.0, 4.0], 2)
    assert len(parts) == 2
    np.testing.assert_array_equal(parts[0], np.array([1.0, 2.0], np.float32))
    np.testing.assert_array_equal(parts[1], np.array([3.0, 4.0], np.float32))


def test_split_vector_identity():
    [only] = split_vector([7.5], 1)
    np.testing.assert_array_equal(only, np.array([7.5], np.float32))


def test_split_vector_indivisible():
    with pytest.raises(IndivisibleDimensionError):
        split_vector([1.0, 2.0, 3.0], 2)


@given(
    st.integers(min_value=1, max_value=8),
    st.integers(min_value=1, max_value=8),
    st.integers(min_value=0, max_value=2**32 - 1),
)
def test_split_concat_roundtrip(m, per_seg, seed):
    v = np.random.default_rng(seed).standard_normal(m * per_seg).astype(np.float32)
    parts = split_vector(v, m)
    np.testing.assert_array_equal(np.concatenate(parts), v)


def test_quantconfig_defaults_and_bounds():
    cfg = QuantConfig()
    assert (cfg.m, cfg.beta, cfg.metric, cfg.mu) == (1, 1, Metric.L2, 0.25)
    with pytest.raises(LoocError):
        QuantConfig(m=0)
    with pytest.raises(LoocError):
        QuantConfig(beta=0)
    with pytest.raises(LoocError):
        QuantConfig(beta=9)
    with pytest.raises(LoocError):
        QuantConfig(mu=-0.1)


def test_quantconfig_flags_large_beta(caplog):
    with caplog.at_level("WARNING", logger="looc.core"):
        QuantConfig(beta=5)
    assert any("beta=5" in rec.message for rec in caplog.records)


def test_quantconfig_d_star():
    cfg = QuantConfig(m=4)
    assert cfg.d_star(16) == 4
    with pytest.raises(IndivisibleDimensionError):
        cfg.d_star(6)


def test_codegrid_validates_indices():
    grid = CodeGrid(np.zeros((2, 2, 1), np.int32), codebook_size=4)
    assert (grid.h, grid.w, grid.m) == (2, 2, 1)
    with pytest.raises(IndexOutOfRangeError):
        CodeGrid(np.full((1, 1, 1), 4, np.int32), codebook_size=4)
    with pytest.raises(IndexOutOfRangeError):
        CodeGrid(np.full((1, 1, 1), -1, np.int32), codebook_size=4)


def test_codegrid_flat_order():
    idx = np.arange(8, dtype=np.int32).reshape(2, 2, 2)
    grid = CodeGrid(idx, codebook_size=8)
    np.testing.assert_array_equal(grid.flat(), np.arange(8))

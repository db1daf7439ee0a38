import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import exact
from rigcert import corpus
from rigcert.core import Framework, InvalidFramework
from rigcert.matrixlab import (
    InvalidPinSet,
    PinSet,
    build_rigidity_matrix,
    kernel_data,
    pin_columns,
    pinned_matrix,
    rigidity_matrix_of_flex,
    select_pin_set,
    strip_pinned,
    trivial_motion_basis,
    zero_pad,
)


def col(f, vertex, k):
    """Column of 1-based vertex, axis k (0=x)."""
    return (vertex - 1) * f.d + k


def test_one_dimensional_edge():
    f = Framework.build([[0.0], [1.0]], [(0, 1)])
    np.testing.assert_array_equal(build_rigidity_matrix(f).entries, [[-1.0, 1.0]])


def test_triangle_first_row(triangle):
    R = build_rigidity_matrix(triangle).entries
    np.testing.assert_array_equal(R[0], [-1, 0, 1, 0, 0, 0])


def test_brace_row_13(brace):
    R = build_rigidity_matrix(brace)
    row = R.entries[brace.graph.edge_index(0, 2)]
    expected = np.zeros(8)
    expected[col(brace, 1, 0)] = -1
    expected[col(brace, 3, 0)] = 1
    np.testing.assert_array_equal(row, expected)
    assert R.row_index[1] == (0, 2)
    assert R.col_index[5] == (2, 1)


def test_trivial_basis_one_dimension():
    f = Framework.build([[0.0], [3.0]], [(0, 1)])
    np.testing.assert_array_equal(trivial_motion_basis(f.config), [[1.0], [1.0]])


def test_trivial_basis_rotation_block(triangle):
    T = trivial_motion_basis(triangle.config)
    assert T.shape == (6, 3)
    np.testing.assert_array_equal(T[2:4, 2], [0, -1])  # p2 = (1, 0)


def _all_frameworks():
    fs = [e.framework for e in corpus.canonical_entries()]
    fs += [corpus.random_singular_nullity1(s) for s in range(5)]
    fs += [corpus.random_generic(s, d=3, n_range=(4, 8)) for s in range(3)]
    return fs


@pytest.mark.parametrize("f", _all_frameworks(), ids=lambda f: f.name)
def test_trivial_motions_annihilated(f):
    R = build_rigidity_matrix(f).entries
    T = trivial_motion_basis(f.config)
    assert np.max(np.abs(R @ T)) <= 1e-12 * np.linalg.norm(R, 2)


@pytest.mark.parametrize("f", _all_frameworks(), ids=lambda f: f.name)
def test_row_support(f):
    R = build_rigidity_matrix(f).entries
    for row, (i, j) in zip(R, f.graph.edges):
        support = {v * f.d + k for v in (i, j) for k in range(f.d)}
        assert set(np.flatnonzero(row).tolist()) <= support
        np.testing.assert_allclose(row.reshape(f.n, f.d).sum(axis=0), 0, atol=1e-15)


def test_triangle_pins(triangle):
    assert select_pin_set(triangle).pinned == ((0, 0), (0, 1), (1, 1))


def test_pin_one_dimension():
    f = Framework.build([[0.0], [1.0]], [(0, 1)])
    assert len(select_pin_set(f).pinned) == 1


@pytest.mark.parametrize("f", _all_frameworks(), ids=lambda f: f.name)
def test_pins_match_exact_greedy_and_are_invertible(f):
    pin = select_pin_set(f)
    T = trivial_motion_basis(f.config)
    assert abs(np.linalg.det(T[list(pin.columns)])) > 1e-8
    pts = [[exact.Fraction(x) for x in p] for p in f.points.tolist()]
    assert list(pin.pinned) == exact.greedy_pins(pts)


def test_pinset_validation(brace):
    with pytest.raises(InvalidPinSet):
        PinSet.build(brace.config, [(0, 0), (1, 0), (2, 0)])  # only x coordinates: rotation survives
    with pytest.raises(InvalidPinSet):
        PinSet.build(brace.config, [(0, 0), (0, 1)])
    with pytest.raises(InvalidPinSet):
        PinSet.build(brace.config, [(0, 0), (0, 1), (9, 1)])


def test_degenerate_configuration_rejected():
    f = Framework.build([[0, 0], [1, 0], [2, 0]], [(0, 1), (1, 2)])
    with pytest.raises(InvalidFramework):
        select_pin_set(f)
    with pytest.raises(InvalidFramework):
        build_rigidity_matrix(f)


def test_pin_columns_shapes(triangle, hyper):
    assert pinned_matrix(triangle).shape == (3, 3)
    assert pinned_matrix(hyper).shape == (8, 7)


def test_pin_columns_subsetting(brace):
    R = build_rigidity_matrix(brace)
    pin = select_pin_set(brace)
    P = pin_columns(R, pin)
    np.testing.assert_array_equal(P.entries, R.entries[:, list(P.columns)])
    assert list(P.columns) == sorted(P.columns)


def test_pin_mismatch(brace, triangle):
    with pytest.raises(InvalidPinSet):
        pin_columns(build_rigidity_matrix(brace), select_pin_set(triangle))


def test_kernel_of_zero_matrix():
    kd = kernel_data(np.zeros((3, 3)))
    assert kd.rank == 0 and kd.stress_count == 3 and kd.nullity == 3


def test_kernel_of_rigid_triangle(triangle):
    kd = kernel_data(pinned_matrix(triangle).entries)
    assert kd.rank == 3 and kd.nullity == 0 and kd.stress_count == 0


def test_kernel_rejects_nonfinite():
    with pytest.raises(ValueError):
        kernel_data(np.array([[np.nan, 1.0]]))


def test_kernel_of_brace_matches_exact(brace):
    kd = kernel_data(pinned_matrix(brace).entries)
    assert (kd.rank, kd.stress_count, kd.nullity) == (4, 1, 1)
    omega = np.array([-0.5, 1, 1, 0, 0])
    assert abs(abs(kd.stress_basis[0] @ omega) / np.linalg.norm(omega) - 1) < 1e-12
    assert abs(abs(kd.flex_basis[0][2]) - 1) < 1e-12  # free column 2 is (3,y)


@pytest.mark.parametrize("f", _all_frameworks(), ids=lambda f: f.name)
def test_kernel_invariants(f):
    P = pinned_matrix(f).entries
    kd = kernel_data(P)
    m, N = P.shape
    assert kd.stress_count == m - kd.rank and kd.nullity == N - kd.rank
    norm = np.linalg.norm(P, 2)
    for w in kd.stress_basis:
        assert np.linalg.norm(w @ P) <= kd.tol * 10 + 1e-14 * norm
    for v in kd.flex_basis:
        assert np.linalg.norm(P @ v) <= kd.tol * 10 + 1e-14 * norm
    for B in (kd.stress_basis, kd.flex_basis):
        np.testing.assert_allclose(B @ B.T, np.eye(B.shape[0]), atol=1e-12)
        for row in B:
            big = row[np.abs(row) > 1e-9]
            assert big[0] > 0


@pytest.mark.parametrize("f", _all_frameworks(), ids=lambda f: f.name)
def test_pinning_removes_exactly_trivial_kernel(f):
    R = build_rigidity_matrix(f).entries
    P = pinned_matrix(f).entries
    full, pinned = kernel_data(R), kernel_data(P)
    assert pinned.rank == full.rank
    assert pinned.nullity == full.nullity - f.d * (f.d + 1) // 2


def test_zero_pad(brace):
    pin = select_pin_set(brace)
    assert not zero_pad(np.zeros(5), pin).vector.any()
    flex = kernel_data(pinned_matrix(brace, pin).entries).flex_basis[0]
    full = zero_pad(flex, pin)
    big = np.flatnonzero(np.abs(full.vector) > 1e-12)
    assert big.tolist() == [col(brace, 3, 1)]
    np.testing.assert_array_equal(strip_pinned(full.vector, pin), flex)
    assert np.linalg.norm(build_rigidity_matrix(brace).entries @ full.vector) < 1e-12
    with pytest.raises(ValueError):
        zero_pad(np.zeros(4), pin)


def test_matrix_of_flex(brace):
    pin = select_pin_set(brace)
    assert not rigidity_matrix_of_flex(brace, np.zeros(8), pin).entries.any()
    same = rigidity_matrix_of_flex(brace, brace.config.flat(), pin).entries
    np.testing.assert_array_equal(same, pinned_matrix(brace, pin).entries)
    v = 0.7
    flex = np.zeros(5)
    flex[2] = v
    M = rigidity_matrix_of_flex(brace, zero_pad(flex, pin), pin)
    row = brace.graph.edge_index(0, 2)
    # p'_1 - p'_3 = (0, -v); column (1,y) is pinned, column (3,y) carries +v
    free = list(pin.free_columns)
    assert M.entries[row, free.index(col(brace, 3, 1))] == pytest.approx(v)
    assert np.count_nonzero(M.entries[row]) == 1
    with pytest.raises(ValueError):
        rigidity_matrix_of_flex(brace, np.zeros(7), pin)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000), a=st.floats(-5, 5), b=st.floats(-5, 5))
def test_linearity(seed, a, b):
    f = corpus.random_generic(seed % 50)
    pin = select_pin_set(f)
    rng = np.random.default_rng(seed)
    u, v = rng.normal(size=(2, f.n * f.d))
    lhs = rigidity_matrix_of_flex(f, a * u + b * v, pin).entries
    rhs = a * rigidity_matrix_of_flex(f, u, pin).entries + b * rigidity_matrix_of_flex(f, v, pin).entries
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * (1 + abs(a) + abs(b)) * 10)

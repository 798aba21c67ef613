"""Blow-up calculus: entry formula, exchange and combining."""
import numpy as np
from hypothesis import given, settings, strategies as st

from coopmsr import create_field, linalg as la

from oracles import blowup_by_digits

GF = create_field(8)

params = st.tuples(st.sampled_from([2, 3]), st.sampled_from([2, 3]), st.integers(0, 2**32 - 1))


def rand(rng, *shape):
    return rng.integers(0, GF.q, shape).astype(GF.dtype)


@settings(max_examples=100, deadline=None)
@given(params, st.sampled_from([(1, 1), (2, 1), (1, 2)]))
def test_entry_formula(p, shape):
    s, t, seed = p
    rng = np.random.default_rng(seed)
    K = rand(rng, s * shape[0], s * shape[1])
    a = int(rng.integers(t))
    assert np.array_equal(la.blow_up(GF, K, t, a, s, shape), blowup_by_digits(K, t, a, s, shape))


def exchange_instance(rng, s):
    """Random ``(A, B, C, p, q)`` meeting the two-digit exchange hypothesis."""
    if rng.integers(2):
        # scalar-pattern A acts blockwise like C on any partitioned B
        U = rand(rng, s, s)
        p, q = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        B = rand(rng, s * p, s * q)
        return la.kron(GF, U, la.identity(GF, p)), B, la.kron(GF, U, la.identity(GF, q)), (p, p), (p, q), (q, q)
    A = rand(rng, s, s)
    B = rand(rng, s, s)
    return A, B, A, (1, 1), (1, 1), (1, 1)


def hypothesis_holds(A, B, C, s, sa, sb, sc):
    left = la.mat_mul(GF, la.kron(GF, la.identity(GF, s), A), la.box_kron(GF, la.identity(GF, s), B, sb))
    right = la.mat_mul(GF, la.box_kron(GF, la.identity(GF, s), B, sb), la.kron(GF, la.identity(GF, s), C))
    return np.array_equal(left, right)


@settings(max_examples=100, deadline=None)
@given(params)
def test_exchange(p):
    s, t, seed = p
    rng = np.random.default_rng(seed)
    A, B, C, sa, sb, sc = exchange_instance(rng, s)
    assert hypothesis_holds(A, B, C, s, sa, sb, sc)
    a0, a1 = rng.choice(t, size=2, replace=False)
    lhs = la.mat_mul(GF, la.blow_up(GF, A, t, a0, s, sa), la.blow_up(GF, B, t, a1, s, sb))
    rhs = la.mat_mul(GF, la.blow_up(GF, B, t, a1, s, sb), la.blow_up(GF, C, t, a0, s, sc))
    assert np.array_equal(lhs, rhs)


@settings(max_examples=100, deadline=None)
@given(params, st.integers(1, 3), st.integers(1, 3), st.integers(1, 3))
def test_combining(p, x, y, z):
    s, t, seed = p
    rng = np.random.default_rng(seed)
    A = rand(rng, s * x, s * y)
    B = rand(rng, s * y, s * z)
    a = int(rng.integers(t))
    lhs = la.mat_mul(GF, la.blow_up(GF, A, t, a, s, (x, y)), la.blow_up(GF, B, t, a, s, (y, z)))
    rhs = la.blow_up(GF, la.mat_mul(GF, A, B), t, a, s, (x, z))
    assert np.array_equal(lhs, rhs)


def test_exchange_needs_its_hypothesis():
    # with scalar blocks the hypothesis forces C = A
    rng = np.random.default_rng(3)
    A, B = rand(rng, 2, 2), rand(rng, 2, 2) | 1
    C = A ^ np.array([[1, 0], [0, 0]], dtype=GF.dtype)
    assert hypothesis_holds(A, B, A, 2, (1, 1), (1, 1), (1, 1))
    assert not hypothesis_holds(A, B, C, 2, (1, 1), (1, 1), (1, 1))

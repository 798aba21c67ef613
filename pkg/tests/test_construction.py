import json
import re

import numpy as np
import pytest

from coopmsr import (
    build_descriptor, check_flr, create_field, derive_params, f_det, kernel_map, kernel_matrix,
    linalg as la, load_descriptor, pairing_polynomials, parity_submatrix, save_descriptor,
    select_parameters, verify_mds,
)
from coopmsr.construction import descriptor_from_dict, g_poly, poly_mulmod
from coopmsr.errors import (
    BadIndex, DegenerateGamma, DuplicateLambda, FieldTooSmall, FlrViolation, InvalidParams,
)

from oracles import example_block, leibniz_det, naive_pow, school_mul


def test_params_example():
    p = derive_params(6, 3, 4, [2])
    assert (p.s, p.r, p.rho, p.ell_tilde, p.ell, p.m) == (2, 3, 3, 8, 24, 4)
    assert not p.punctured and p.tolerance == 3


def test_params_odd_length():
    p = derive_params(7, 3, 5, [2])
    assert (p.n_int, p.s, p.ell_tilde, p.rho, p.ell) == (8, 3, 81, 4, 324)
    assert p.r == 5 and p.tolerance == 4 and p.punctured


def test_params_multi_h():
    p = derive_params(8, 4, 6, {1, 2})
    assert p.rho == 12 and p.ell == 972 and p.h_set == (1, 2)


def test_subpacketization_formula():
    for n, k, d, h in [(6, 3, 4, 2), (7, 3, 5, 2), (8, 4, 6, 2), (9, 5, 6, 3), (10, 4, 7, 3)]:
        p = derive_params(n, k, d, [h])
        assert p.ell == (d - k + h) * (d - k + 1) ** -(-n // 2)
        assert 2 ** p.m >= p.s * p.n_int + 1 > 2 ** (p.m - 1)


@pytest.mark.parametrize("args,needle", [
    ((6, 3, 4, [4]), "n-h"),
    ((6, 3, 3, [2]), "k+1"),
    ((6, 0, 4, [2]), "k >= 1"),
    ((6, 3, 4, []), "nonempty"),
    ((6, 3, 4, [0]), "h >= 1"),
])
def test_params_invalid(args, needle):
    with pytest.raises(InvalidParams, match=re.escape(needle)):
        derive_params(*args)


def test_field_override():
    assert derive_params(6, 3, 4, [2], field_bits=8).m == 8
    with pytest.raises(FieldTooSmall):
        derive_params(6, 3, 4, [2], field_bits=3)


def test_pairing_polynomials_example(gf16):
    gamma = gf16.inv(3)
    pm = pairing_polynomials(gf16, 2, gamma)
    assert pm.F0.tolist() == [gamma, 1]
    c = gf16.inv(gf16.mul(gamma ^ 1, gamma ^ 1))
    assert pm.F1.tolist() == [gf16.mul(gamma, c), c]
    assert np.array_equal(pm.U[1], gf16.mul(np.array([[gamma, 1], [1, gamma]]), c))
    assert np.array_equal(la.mat_mul(gf16, pm.V[0], pm.U[1]), la.identity(gf16, 2))
    with pytest.raises(DegenerateGamma):
        pairing_polynomials(gf16, 2, 0)


@pytest.mark.parametrize("m,s", [(5, 3), (6, 4), (8, 5)])
def test_pairing_inverse_in_ring(m, s):
    gf = create_field(m)
    for gamma in range(2, gf.q, 7):
        if g_poly(gf, s, gamma) == 0:
            continue
        pm = pairing_polynomials(gf, s, gamma)
        assert poly_mulmod(gf, pm.F0, pm.F1).tolist() == [1] + [0] * (s - 1)
        for b in range(2):
            assert np.array_equal(la.mat_mul(gf, pm.U[b], pm.V[b]), la.circulant(gf, pm.F0 if b == 0 else pm.F1))
            assert np.array_equal(la.mat_mul(gf, pm.U[b], pm.V[1 - b]), la.identity(gf, s))
        assert np.all(pm.F0 != 0) and np.all(pm.F1 != 0)


def test_kernel_map(gf16):
    x = [3, 7]
    L = [la.vandermonde_col(gf16, v, 2) for v in x]
    assert np.array_equal(kernel_map(gf16, x, 2), np.block([[L[0], L[1]], [L[0], L[1]]]))
    assert np.array_equal(kernel_map(gf16, [5], 3), la.vandermonde_col(gf16, 5, 3))
    cols = np.concatenate(L, axis=1)
    assert np.array_equal(kernel_map(gf16, x, 2), la.box_kron(gf16, la.ones_col(gf16, 2), cols, (2, 1)))


def test_kernel_matrix_example(ex1, gf16):
    gamma = ex1.gamma
    L = lambda t: la.vandermonde_col(gf16, gf16.pow(2, t), 2)
    K00 = kernel_matrix(ex1, 0, 0, 2)
    expect = np.block([[gf16.mul(L(0), gamma), L(1)], [L(0), gf16.mul(L(1), gamma)]])
    assert np.array_equal(K00, expect)
    assert np.array_equal(kernel_matrix(ex1, 0, 1, 2), la.blkdiag(L(2), L(3)))
    with pytest.raises(BadIndex):
        kernel_matrix(ex1, 3, 0, 2)


def test_kernel_matrix_zero_pattern(code846):
    for a in range(4):
        for b in range(2):
            K = kernel_matrix(code846, a, b, 4)
            mask = np.repeat(code846.V[b] != 0, 4, axis=0)
            assert np.array_equal(K != 0, mask)


def test_f_det_example(gf16):
    gamma = gf16.inv(3)
    lam = [gf16.pow(2, i) for i in range(4)]
    w = 2
    expect = gf16.mul(gf16.mul(w, w), gf16.pow(w ^ 1, 3))
    assert f_det(gf16, lam, gamma) == expect == gf16.pow(2, 14) == 0x9


def test_f_det_scaling(code846):
    gf = code846.gf
    s = 3
    lam, gamma = code846.lam, code846.gamma
    base = f_det(gf, lam[:2 * s], gamma)
    for a in range(4):
        assert f_det(gf, lam[2 * s * a:2 * s * (a + 1)], gamma) == gf.mul(gf.pow(2, 2 * s * s * a), base)


def test_f_det_vs_leibniz(rng):
    gf = create_field(5)
    for _ in range(4):
        xs = [int(v) for v in rng.integers(0, 32, 4)]
        gamma = int(rng.integers(2, 32))
        V0 = la.circulant(gf, [gamma, 1])
        M = np.zeros((4, 4), dtype=np.int64)
        for j in range(2):
            for i in range(2):
                for u in range(2):
                    M[2 * i + u, j] = school_mul(V0[i, j], naive_pow(xs[j], u, 5, gf.prim_poly), 5, gf.prim_poly)
                    M[2 * i + u, 2 + j] = naive_pow(xs[2 + j], u, 5, gf.prim_poly) if i == j else 0
        assert f_det(gf, xs, gamma) == leibniz_det(M, 5, gf.prim_poly)


def test_check_flr_example(ex1, gf16):
    p = ex1.params
    lam = [gf16.pow(2, i) for i in range(12)]
    assert check_flr(p, lam, gf16.inv(3))
    assert gf16.inv(3) == gf16.pow(2, 11)
    assert not check_flr(p, lam, 1)
    assert not check_flr(p, lam, 0)
    with pytest.raises(DuplicateLambda):
        check_flr(p, [lam[0]] + lam[:-1], 5)


def test_select_parameters_deterministic():
    p = derive_params(6, 3, 4, [2])
    lam, gamma = select_parameters(p)
    assert lam == tuple(create_field(4).pow(2, i) for i in range(12))
    assert check_flr(p, lam, gamma)
    assert select_parameters(p) == (lam, gamma)


def test_parity_blocks_match_example(ex1):
    for i in range(6):
        H = parity_submatrix(ex1, i)
        assert H.shape == (24, 8)
        assert np.array_equal(H, example_block(i))
    with pytest.raises(BadIndex):
        parity_submatrix(ex1, 6)


def test_descriptor_shapes(ex1, code846):
    assert ex1.params.ell == 24 and len(ex1.parity_blocks) == 6
    assert all(H.shape == (24, 8) for H in ex1.parity_blocks)
    assert code846.params.ell_tilde == 81
    assert all(H.shape == (324, 81) for H in code846.parity_blocks)


def test_descriptor_invariants(code846, code735):
    for desc in (code846, code735):
        gf = desc.gf
        s = desc.params.s
        assert g_poly(gf, s, desc.gamma) != 0
        assert len(set(desc.lam)) == len(desc.lam)
        assert np.array_equal(desc.U[0], la.identity(gf, s)) and np.array_equal(desc.V[1], la.identity(gf, s))
        for b in range(2):
            assert np.array_equal(la.mat_mul(gf, desc.U[b], desc.V[1 - b]), la.identity(gf, s))


def test_override_rejected(gf16):
    p = derive_params(6, 3, 4, [2])
    with pytest.raises(DegenerateGamma):
        build_descriptor(p, gamma=1)
    lam = [gf16.pow(2, i) for i in range(12)]
    bad = next(g for g in range(2, 16) if g_poly(gf16, 2, g) and not check_flr(p, lam, g))
    with pytest.raises(FlrViolation):
        build_descriptor(p, lam=lam, gamma=bad)


def test_mds_example(ex1):
    rep = verify_mds(ex1)
    assert rep.checked == 20 and rep.passed
    systematic = np.concatenate(ex1.parity_blocks[3:], axis=1)
    assert la.mat_det(ex1.gf, systematic) != 0


def test_mds_sampled_is_seeded(code846):
    a = verify_mds(code846, mode="sample", samples=10, seed=4)
    b = verify_mds(code846, mode="sample", samples=10, seed=4)
    assert a.checked == 10 and a.passed and a.failures == b.failures


def test_mds_detects_bad_points(gf16):
    # repeated evaluation points across groups break the MDS property
    p = derive_params(6, 3, 4, [2])
    desc = build_descriptor(p)
    lam = list(desc.lam)
    lam[4:8] = lam[0:4]
    from coopmsr.construction import CodeDescriptor
    broken = CodeDescriptor(params=p, lam=tuple(lam), gamma=desc.gamma, pairing=desc.pairing)
    assert not verify_mds(broken).passed


def test_descriptor_roundtrip(tmp_path, ex1):
    path = tmp_path / "d.json"
    save_descriptor(ex1, path)
    data = json.loads(path.read_text())
    assert set(data) == {"version", "n", "k", "d", "h_set", "m", "prim_poly", "lambda", "gamma"}
    back = load_descriptor(path)
    assert back.lam == ex1.lam and back.gamma == ex1.gamma
    assert all(np.array_equal(x, y) for x, y in zip(back.parity_blocks, ex1.parity_blocks))


def test_descriptor_tampered(ex1):
    data = ex1.to_dict()
    data["lambda"][1] = data["lambda"][0]
    with pytest.raises(DuplicateLambda):
        descriptor_from_dict(data)
    data = ex1.to_dict()
    data["prim_poly"] = 0x19
    with pytest.raises(InvalidParams):
        descriptor_from_dict(data)

"""Dense matrix algebra over GF(2^m) and the block operators of the construction.

Matrices are plain 2-D numpy arrays of field elements.  Block structure is
never inferred: operators that depend on it (:func:`box_kron`,
:func:`blow_up`) take the block shape ``(rows, cols)`` of one block entry.

Index digits follow a fixed convention everywhere: ``i in [s^t]`` has digits
``i_z = (i // s**z) % s``, digit 0 least significant.
"""
from __future__ import annotations

import numpy as np

from .errors import BadIndex, BadPartition, DimensionMismatch, SingularMatrix
from .gf import GF2m


def identity(gf: GF2m, n: int) -> np.ndarray:
    return np.eye(n, dtype=gf.dtype)


def zeros(gf: GF2m, rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=gf.dtype)


def ones_col(gf: GF2m, n: int) -> np.ndarray:
    """The all-one column vector of length ``n``."""
    return np.ones((n, 1), dtype=gf.dtype)


def is_binary(A) -> bool:
    A = np.asarray(A)
    return A.size == 0 or int(A.max()) <= 1


def mat_mul(gf: GF2m, A, B) -> np.ndarray:
    return gf.matmul(A, B)


def mat_add(gf: GF2m, A, B) -> np.ndarray:
    A, B = np.asarray(A), np.asarray(B)
    if A.shape != B.shape:
        raise DimensionMismatch(f"cannot add {A.shape} and {B.shape}")
    return np.bitwise_xor(A, B).astype(gf.dtype)


def hadamard(gf: GF2m, A, B) -> np.ndarray:
    A, B = np.asarray(A), np.asarray(B)
    if A.shape != B.shape:
        raise DimensionMismatch(f"Hadamard product needs equal shapes, got {A.shape} and {B.shape}")
    return gf.mul(A, B)


def scale(gf: GF2m, c: int, A) -> np.ndarray:
    return gf.mul(np.asarray(A), c)


# -- elimination ------------------------------------------------------------

def _row_times(gf, row, factors):
    """Outer product ``factors[:, None] * row[None, :]``."""
    if gf._mul_table is not None:
        # one gather of q scaled copies of the row beats a 2-D fancy index
        scaled = gf._mul_table[:, row.astype(np.intp)]
        return scaled[factors.astype(np.intp)]
    return gf.mul(factors[:, None], row[None, :])


def _eliminate(gf: GF2m, M: np.ndarray, ncols: int):
    """In-place Gauss-Jordan on the first ``ncols`` columns of ``M``.

    Returns ``(pivot_columns, det_factor)`` where ``det_factor`` is the
    product of pivots times the sign of the row permutation (meaningful only
    when ``M[:, :ncols]`` is square and nonsingular).
    """
    rows = M.shape[0]
    pivots = []
    det = 1
    r = 0
    for c in range(ncols):
        if r == rows:
            break
        nz = np.flatnonzero(M[r:, c])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            M[[r, p]] = M[[p, r]]
            det = gf.neg(det)
        piv = int(M[r, c])
        det = gf.mul(det, piv)
        if piv != 1:
            M[r] = gf.mul(M[r], gf.inv(piv))
        col = M[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            M[hit] ^= _row_times(gf, M[r], col[hit])
        pivots.append(c)
        r += 1
    return pivots, det


def rank(gf: GF2m, A) -> int:
    M = np.array(A, dtype=gf.dtype)
    pivots, _ = _eliminate(gf, M, M.shape[1])
    return len(pivots)


def _square(A):
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    return A


def mat_det(gf: GF2m, A) -> int:
    A = _square(A)
    M = np.array(A, dtype=gf.dtype)
    pivots, det = _eliminate(gf, M, M.shape[1])
    return int(det) if len(pivots) == M.shape[0] else 0


def is_invertible(gf: GF2m, A) -> bool:
    A = _square(A)
    return rank(gf, A) == A.shape[0]


def mat_inverse(gf: GF2m, A) -> np.ndarray:
    A = _square(A)
    n = A.shape[0]
    M = np.concatenate([np.asarray(A, dtype=gf.dtype), identity(gf, n)], axis=1)
    pivots, _ = _eliminate(gf, M, n)
    if len(pivots) != n:
        raise SingularMatrix(f"matrix of size {n} has rank {len(pivots)}")
    return M[:, n:].copy()


def solve(gf: GF2m, A, b) -> np.ndarray:
    """Unique ``x`` with ``A x = b``; ``b`` may be a vector or a matrix of columns."""
    A = _square(A)
    b = np.asarray(b)
    vec = b.ndim == 1
    rhs = b[:, None] if vec else b
    if rhs.shape[0] != A.shape[0]:
        raise DimensionMismatch(f"right-hand side has {rhs.shape[0]} rows, expected {A.shape[0]}")
    n = A.shape[0]
    M = np.concatenate([np.asarray(A, dtype=gf.dtype), rhs.astype(gf.dtype)], axis=1)
    pivots, _ = _eliminate(gf, M, n)
    if len(pivots) != n:
        raise SingularMatrix(f"matrix of size {n} has rank {len(pivots)}")
    x = M[:, n:]
    return x[:, 0].copy() if vec else x.copy()


# -- structural operators ---------------------------------------------------

def kron(gf: GF2m, A, B) -> np.ndarray:
    """Kronecker product with the standard layout: block ``(i, j)`` is ``A[i, j] * B``."""
    A, B = np.asarray(A), np.asarray(B)
    if is_binary(A) or is_binary(B):
        return np.kron(A.astype(gf.dtype), B.astype(gf.dtype)).astype(gf.dtype)
    ar, ac = A.shape
    br, bc = B.shape
    out = gf.mul(A[:, None, :, None], B[None, :, None, :])
    return out.reshape(ar * br, ac * bc)


def _check_partition(B, block_shape):
    p, q = block_shape
    if p <= 0 or q <= 0 or B.shape[0] % p or B.shape[1] % q:
        raise BadPartition(f"block shape {block_shape} does not tile a {B.shape} matrix")
    return B.shape[0] // p, B.shape[1] // q


def box_kron(gf: GF2m, A, B, block_shape) -> np.ndarray:
    """``A ⊠ B``: replace every block ``B_ij`` (of shape ``block_shape``) by ``A ⊗ B_ij``."""
    A, B = np.asarray(A), np.asarray(B)
    p, q = block_shape
    mb, nb = _check_partition(B, block_shape)
    ar, ac = A.shape
    B4 = B.reshape(mb, p, nb, q)
    if is_binary(A) or is_binary(B):
        out = A[None, :, None, None, :, None].astype(np.uint32) * B4[:, None, :, :, None, :]
    else:
        out = gf.mul(A[None, :, None, None, :, None], B4[:, None, :, :, None, :])
    return out.reshape(mb * ar * p, nb * ac * q).astype(gf.dtype)


def blow_up(gf: GF2m, K, t: int, a: int, s: int, block_shape=(1, 1)) -> np.ndarray:
    """``I_{s^(t-a-1)} ⊗ (I_{s^a} ⊠ K)`` for an ``s x s`` block matrix ``K``."""
    K = np.asarray(K)
    if not 0 <= a < t:
        raise BadIndex(f"blow-up digit {a} outside [0, {t})")
    mb, nb = _check_partition(K, block_shape)
    if (mb, nb) != (s, s):
        raise BadPartition(f"expected {s}x{s} blocks, got {mb}x{nb}")
    inner = box_kron(gf, identity(gf, s ** a), K, block_shape)
    return kron(gf, identity(gf, s ** (t - a - 1)), inner)


def blocks(M, block_shape):
    """View ``M`` as a 4-D array ``[block_row, row, block_col, col]``."""
    M = np.asarray(M)
    mb, nb = _check_partition(M, block_shape)
    p, q = block_shape
    return M.reshape(mb, p, nb, q)


def block(M, block_shape, i: int, j: int) -> np.ndarray:
    return blocks(M, block_shape)[i, :, j, :]


def vandermonde_col(gf: GF2m, x: int, t: int) -> np.ndarray:
    """``(1, x, ..., x^(t-1))`` as a ``t x 1`` column."""
    if t < 1:
        raise ValueError("t must be positive")
    col = [1]
    for _ in range(t - 1):
        col.append(gf.mul(col[-1], x))
    return np.array(col, dtype=gf.dtype)[:, None]


def circulant(gf: GF2m, coeffs) -> np.ndarray:
    """The circulant of a polynomial mod ``x^s - 1``: row ``i`` is ``coeffs`` rotated right by ``i``."""
    c = np.asarray(coeffs, dtype=gf.dtype)
    s = c.size
    idx = (np.arange(s)[None, :] - np.arange(s)[:, None]) % s
    return c[idx]


def blkdiag(*mats) -> np.ndarray:
    if not mats:
        raise ValueError("blkdiag needs at least one matrix")
    mats = [np.atleast_2d(np.asarray(m)) for m in mats]
    rows = sum(m.shape[0] for m in mats)
    cols = sum(m.shape[1] for m in mats)
    out = np.zeros((rows, cols), dtype=np.result_type(*mats))
    r = c = 0
    for m in mats:
        out[r:r + m.shape[0], c:c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return out


def digit(i: int, z: int, s: int) -> int:
    return (i // s ** z) % s


def dump_hex(M) -> str:
    """Row-per-line hex dump for debugging."""
    M = np.atleast_2d(np.asarray(M))
    width = max(1, len(f"{int(M.max()):x}")) if M.size else 1
    return "\n".join(" ".join(f"{int(v):0{width}x}" for v in row) for row in M)

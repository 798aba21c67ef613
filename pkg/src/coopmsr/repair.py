"""Cooperative repair of ``h`` failed nodes from ``d`` helpers.

Repair runs independently on each layer group: ``s + h - 1`` consecutive
layers of every node, a contiguous slice of length ``(s + h - 1) * ell_tilde``.
Inside a group node ``j`` satisfies the parity equations with
``I_{s+h-1} ⊗ H_j``, where ``H_j`` is the node's intermediate-code block.

Step 1: every helper ``j`` sends ``D_{i,j} C_j`` to each failed node ``i``;
node ``i`` solves a small MDS code for its own ``s`` pieces and one piece of
each other failed node.  Step 2: failed nodes swap those pieces and each one
inverts the stacked selection matrix to get its content back.
"""
from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .construction import CodeDescriptor, CodeParams, kernel_matrix, masked_kernel
from .errors import (
    BadFailureCount,
    BadHelperCount,
    BadIndex,
    MissingPayload,
    MissingPiece,
    NotFailed,
    Overlap,
    SingularMatrix,
    SingularSystem,
)


# -- selection matrices -----------------------------------------------------

def row_selector(params: CodeParams, a: int, g: int) -> np.ndarray:
    """``I_{s^(half-a-1)} ⊗ e_g ⊗ I_{s^a}``: keeps the rows whose digit ``a`` equals ``g``."""
    s, half = params.s, params.half
    if not 0 <= a < half or not 0 <= g < s:
        raise BadIndex(f"row selector (a={a}, g={g}) out of range")
    e = np.zeros((1, s), dtype=np.uint8)
    e[0, g] = 1
    return np.kron(np.kron(np.eye(s ** (half - a - 1), dtype=np.uint8), e), np.eye(s ** a, dtype=np.uint8))


def _check_h(params: CodeParams, h: int) -> None:
    if h not in params.h_set:
        raise BadFailureCount(f"h={h} not in h_set {params.h_set}")
    if params.rho % (params.s + h - 1):
        raise BadFailureCount(f"s+h-1={params.s + h - 1} does not divide rho={params.rho}")


def selection_matrix(params: CodeParams, h: int, a: int, g: int, z: int) -> np.ndarray:
    """``S_{a,g,z}``: an ``s x (s+h-1)`` block matrix of row selectors."""
    s, lt = params.s, params.ell_tilde
    if not 0 <= z < h:
        raise BadIndex(f"z={z} outside [0, {h})")
    rows = lt // s
    out = np.zeros((lt, (s + h - 1) * lt), dtype=np.uint8)
    for i in range(s):
        R = row_selector(params, a, (g + i) % s)
        out[i * rows:(i + 1) * rows, i * lt:(i + 1) * lt] = R
        if z < h - 1:
            out[i * rows:(i + 1) * rows, (z + s) * lt:(z + s + 1) * lt] = R
    return out


def q_matrix(params: CodeParams, h: int, z: int) -> np.ndarray:
    """``Q_z``: identity on the trailing ``h - 1`` diagonal blocks, ``-I`` at ``(i, z+s)`` for ``i < s``.

    Over characteristic 2 the ``-I`` blocks are stored as ``I``.
    """
    s, lt = params.s, params.ell_tilde
    if not 0 <= z < h:
        raise BadIndex(f"z={z} outside [0, {h})")
    w = s + h - 1
    out = np.zeros((w * lt, w * lt), dtype=np.uint8)
    I = np.eye(lt, dtype=np.uint8)
    for c in range(s, w):
        out[c * lt:(c + 1) * lt, c * lt:(c + 1) * lt] = I
    if z + s < w:
        for i in range(s):
            out[i * lt:(i + 1) * lt, (z + s) * lt:(z + s + 1) * lt] = I  # -I in char 2
    return out


def _failed_rank(F, i) -> int:
    F = sorted(F)
    if i not in F:
        raise NotFailed(f"node {i} is not in the failed set {F}")
    return F.index(i)


def repair_matrix(desc: CodeDescriptor, F, i: int) -> np.ndarray:
    """``S_{a,0,î} (I_{s+h-1} ⊗ Φ(U_b))`` for failed node ``i = 2a + b``."""
    p = desc.params
    h = len(F)
    ihat = _failed_rank(F, i)
    a, b = divmod(i, 2)
    S = selection_matrix(p, h, a, 0, ihat)
    if b == 0:
        return S.astype(desc.gf.dtype)
    PU = la.blow_up(desc.gf, desc.U[b], p.half, a, p.s)
    lt = p.ell_tilde
    out = np.zeros(S.shape, dtype=desc.gf.dtype)
    for c in range(s_plus(p, h)):
        blk = S[:, c * lt:(c + 1) * lt]
        if blk.any():
            out[:, c * lt:(c + 1) * lt] = la.mat_mul(desc.gf, blk, PU)
    return out


def s_plus(params: CodeParams, h: int) -> int:
    """Layers per repair group, ``s + h - 1``."""
    return params.s + h - 1


# -- small-code matrices ------------------------------------------------------

def _d_matrix(desc: CodeDescriptor, F, i: int, j: int) -> np.ndarray:
    p = desc.params
    a = i // 2
    if j // 2 == a:
        return selection_matrix(p, len(F), a, 0, _failed_rank(F, i)).astype(desc.gf.dtype)
    return repair_matrix(desc, F, i)


def _sandwich(desc: CodeDescriptor, X, Hj, Y) -> np.ndarray:
    """``(X ⊗ I_r)(I_w ⊗ Hj) Y^T`` computed block by block."""
    gf = desc.gf
    p = desc.params
    lt = p.ell_tilde
    w = X.shape[1] // lt
    out = np.zeros((p.r * lt, Y.shape[0]), dtype=gf.dtype)
    for c in range(w):
        Xc = X[:, c * lt:(c + 1) * lt]
        Yc = Y[:, c * lt:(c + 1) * lt]
        if not Xc.any() or not Yc.any():
            continue
        left = la.mat_mul(gf, la.kron(gf, Xc, la.identity(gf, p.r)), Hj)
        out ^= la.mat_mul(gf, left, Yc.T)
    return out


def _sandwich_dense(desc: CodeDescriptor, X, Hj, Y) -> np.ndarray:
    gf = desc.gf
    w = X.shape[1] // desc.params.ell_tilde
    big = la.kron(gf, la.identity(gf, w), Hj)
    left = la.mat_mul(gf, la.kron(gf, X, la.identity(gf, desc.params.r)), big)
    return la.mat_mul(gf, left, np.asarray(Y).T)


@dataclass
class SmallCode:
    """Parity blocks and selection maps of the code induced at failed node ``i``."""
    i: int
    self_H: list     # H^<g>_{i,i}, g in [s]
    self_D: list     # D^<g>_{i,i}
    H: dict          # j -> H_{i,j}, j in [n_int] without i
    D: dict          # j -> D_{i,j}


def small_code_matrices(desc: CodeDescriptor, F, i: int, dense: bool = False) -> SmallCode:
    """Matrices of the induced ``(n+s-1, d)`` code, from their defining products.

    ``dense=True`` materializes ``I ⊗ H_j`` and the Kronecker factors
    literally; the default multiplies block by block.
    """
    p = desc.params
    F = tuple(sorted(F))
    h = len(F)
    ihat = _failed_rank(F, i)
    a = i // 2
    sandwich = _sandwich_dense if dense else _sandwich
    Rm = repair_matrix(desc, F, i)
    S_last = [selection_matrix(p, h, a, g, h - 1) for g in range(p.s)]
    S0 = selection_matrix(p, h, a, 0, ihat)
    Hi = desc.parity_blocks[i]
    self_H = [sandwich(desc, Rm, Hi, S_last[g]) for g in range(p.s)]
    self_D = [selection_matrix(p, h, a, g, ihat).astype(desc.gf.dtype) for g in range(p.s)]
    H, D = {}, {}
    for j in range(p.n_int):
        if j == i:
            continue
        if j // 2 == a:
            H[j] = sandwich(desc, Rm, desc.parity_blocks[j], S_last[0])
            D[j] = S0.astype(desc.gf.dtype)
        else:
            H[j] = sandwich(desc, S0, desc.parity_blocks[j], S_last[0])
            D[j] = Rm
    return SmallCode(i=i, self_H=self_H, self_D=self_D, H=H, D=D)


def _shifted_group(c: int, a: int, half: int) -> int:
    if c < a:
        return c
    if c == a:
        return half - 1
    return c - 1


def closed_form_small_code(desc: CodeDescriptor, F, i: int) -> SmallCode:
    """The same matrices from their explicit blow-up expressions."""
    p = desc.params
    gf = desc.gf
    s, r, half = p.s, p.r, p.half
    a, b = divmod(i, 2)
    coeffs = desc.pairing.F0 if b == 0 else desc.pairing.F1
    lam = desc.lam

    def diag_kernel(idx):
        return la.blkdiag(*[la.vandermonde_col(gf, lam[x], r) for x in idx])

    self_H = []
    for g in range(s):
        K = diag_kernel([s * i + (g + x) % s for x in range(s)])
        self_H.append(la.scale(gf, int(coeffs[g]), la.blow_up(gf, K, half, half - 1, s, (r, 1))))
    H = {}
    for j in range(p.n_int):
        if j == i:
            continue
        c = j // 2
        if c == a:
            K = diag_kernel([s * j + x for x in range(s)])
            H[j] = la.blow_up(gf, K, half, half - 1, s, (r, 1))
        else:
            K = kernel_matrix(desc, c, j % 2, r)
            H[j] = la.blow_up(gf, K, half, _shifted_group(c, a, half), s, (r, 1))
    ref = small_code_matrices(desc, F, i)
    return SmallCode(i=i, self_H=self_H, self_D=ref.self_D, H=H, D=ref.D)


def stacked_matrix(desc: CodeDescriptor, F, i: int) -> np.ndarray:
    """Rows ``D^<g>_{i,i}`` for ``g`` ascending, then ``D_{j,i}`` for each other failed ``j`` ascending."""
    p = desc.params
    F = tuple(sorted(F))
    ihat = _failed_rank(F, i)
    a = i // 2
    h = len(F)
    parts = [selection_matrix(p, h, a, g, ihat).astype(desc.gf.dtype) for g in range(p.s)]
    parts += [_d_matrix(desc, F, j, i) for j in F if j != i]
    return np.concatenate(parts, axis=0)


def cut_set_bound(params: CodeParams, h: int) -> int:
    """``h (d + h - 1) ell / (d - k + h)`` symbols."""
    if h not in params.h_set:
        raise BadFailureCount(f"h={h} not in h_set {params.h_set}")
    num = h * (params.d + h - 1) * params.ell
    q, rem = divmod(num, params.d - params.k + h)
    if rem:
        raise BadFailureCount(f"d-k+h={params.d - params.k + h} does not divide rho={params.rho}")
    return q


# -- plans --------------------------------------------------------------------

@dataclass
class NodePlan:
    i: int
    helper_D: dict          # j -> D_{i,j} for helpers and other failed nodes
    unknowns: list          # ("self", g) or node index, in solve order
    solve: np.ndarray       # maps stacked helper payloads to stacked unknowns
    combine: np.ndarray     # inverse of the stacked selection matrix


@dataclass
class RepairPlan:
    F: tuple
    H: tuple
    h: int
    width: int              # s + h - 1
    groups: int             # rho / (s + h - 1)
    nodes: dict = field(repr=False)


def _validate(desc: CodeDescriptor, F, H):
    p = desc.params
    F = tuple(sorted({int(x) for x in F}))
    H = tuple(sorted({int(x) for x in H}))
    for x in F + H:
        if not 0 <= x < p.n:
            raise BadIndex(f"node {x} outside [0, {p.n})")
    _check_h(p, len(F))
    if set(F) & set(H):
        raise Overlap(f"failed and helper sets intersect: {sorted(set(F) & set(H))}")
    if len(H) != p.d:
        raise BadHelperCount(f"need exactly d={p.d} helpers, got {len(H)}")
    return F, H


def plan_repair(desc: CodeDescriptor, F, H) -> RepairPlan:
    F, H = _validate(desc, F, H)
    cache = desc.__dict__.setdefault("_repair_cache", {})
    key = (F, H)
    if key in cache:
        return cache[key]
    p = desc.params
    gf = desc.gf
    h = len(F)
    nodes = {}
    for i in F:
        sc = small_code_matrices(desc, F, i)
        unknowns = [("self", g) for g in range(p.s)] + [j for j in range(p.n_int) if j != i and j not in H]
        A = np.concatenate([sc.self_H[u[1]] if isinstance(u, tuple) else sc.H[u] for u in unknowns], axis=1)
        B = np.concatenate([sc.H[j] for j in H], axis=1)
        try:
            Ainv = la.mat_inverse(gf, A)
        except SingularMatrix as exc:
            raise SingularSystem(f"step-1 system at node {i}: {exc}") from None
        try:
            combine = la.mat_inverse(gf, stacked_matrix(desc, F, i))
        except SingularMatrix as exc:
            raise SingularSystem(f"step-2 system at node {i}: {exc}") from None
        helper_D = {j: sc.D[j] for j in H + tuple(x for x in F if x != i)}
        nodes[i] = NodePlan(i=i, helper_D=helper_D, unknowns=unknowns,
                            solve=gf.neg(la.mat_mul(gf, Ainv, B)), combine=combine)
    w = s_plus(p, h)
    plan = RepairPlan(F=F, H=H, h=h, width=w, groups=p.rho // w, nodes=nodes)
    cache[key] = plan
    return plan


def _grouped(desc: CodeDescriptor, C, width: int) -> np.ndarray:
    p = desc.params
    C = np.asarray(C, dtype=desc.gf.dtype)
    if C.shape[-1] != p.ell:
        raise ValueError(f"node length {C.shape[-1]} != ell={p.ell}")
    return C.reshape(C.shape[:-1] + (p.rho // width, width * p.ell_tilde))


def _apply_rows(desc: CodeDescriptor, M, x) -> np.ndarray:
    """``M`` applied to the last axis of ``x``."""
    lead = x.shape[:-1]
    out = desc.gf.matmul(np.ascontiguousarray(x.reshape(-1, x.shape[-1])), np.ascontiguousarray(M.T))
    return out.reshape(lead + (M.shape[0],))


def helper_compute(desc: CodeDescriptor, F, i: int, j: int, C_j) -> np.ndarray:
    """Payload ``D_{i,j} C_j`` for every layer group: shape ``(..., groups, ell_tilde)``."""
    p = desc.params
    F = tuple(sorted(F))
    _check_h(p, len(F))
    if not 0 <= j < p.n_int or j == i:
        raise BadIndex(f"helper index {j} invalid for failed node {i}")
    D = _d_matrix(desc, F, i, j)
    return _apply_rows(desc, D, _grouped(desc, C_j, s_plus(p, len(F))))


def step1_solve(desc: CodeDescriptor, F, H, i: int, payloads: dict):
    """Recover ``(self_pieces, peer_pieces)`` at failed node ``i`` from the helpers' payloads.

    ``self_pieces`` has shape ``(..., s, groups, ell_tilde)`` ordered by ``g``;
    ``peer_pieces`` maps each other failed node ``j`` to ``D_{i,j} C_j``.
    """
    plan = plan_repair(desc, F, H)
    if i not in plan.F:
        raise NotFailed(f"node {i} is not in the failed set {plan.F}")
    missing = [j for j in plan.H if j not in payloads]
    if missing:
        raise MissingPayload(f"no payload from helpers {missing}")
    node = plan.nodes[i]
    x = np.concatenate([np.asarray(payloads[j], dtype=desc.gf.dtype) for j in plan.H], axis=-1)
    y = _apply_rows(desc, node.solve, x)
    lt = desc.params.ell_tilde
    pieces = {u: y[..., k * lt:(k + 1) * lt] for k, u in enumerate(node.unknowns)}
    self_pieces = np.stack([pieces[("self", g)] for g in range(desc.params.s)], axis=-3)
    peers = {j: pieces[j] for j in plan.F if j != i}
    return self_pieces, peers


def step2_combine(desc: CodeDescriptor, F, i: int, self_pieces, peer_pieces: dict) -> np.ndarray:
    """Rebuild ``C_i`` from its ``s`` own pieces and one piece from each other failed node."""
    p = desc.params
    F = tuple(sorted(F))
    _check_h(p, len(F))
    _failed_rank(F, i)
    missing = [j for j in F if j != i and j not in peer_pieces]
    if missing:
        raise MissingPiece(f"no step-2 piece from failed nodes {missing}")
    self_pieces = np.asarray(self_pieces, dtype=desc.gf.dtype)
    if self_pieces.shape[-3] != p.s:
        raise MissingPiece(f"expected {p.s} self pieces, got {self_pieces.shape[-3]}")
    parts = [self_pieces[..., g, :, :] for g in range(p.s)]
    parts += [np.asarray(peer_pieces[j], dtype=desc.gf.dtype) for j in F if j != i]
    x = np.concatenate(parts, axis=-1)
    cache = desc.__dict__.setdefault("_combine_cache", {})
    if (F, i) not in cache:
        cache[(F, i)] = la.mat_inverse(desc.gf, stacked_matrix(desc, F, i))
    y = _apply_rows(desc, cache[(F, i)], x)
    return y.reshape(y.shape[:-2] + (p.ell,))


# -- end-to-end simulation ------------------------------------------------------

@dataclass
class BandwidthLedger:
    edges: dict = field(default_factory=dict)   # (src, dst) -> symbols
    step1: int = 0
    step2: int = 0
    stripes: int = 1

    @property
    def total(self) -> int:
        return self.step1 + self.step2

    def record(self, step: int, src: int, dst: int, count: int) -> None:
        self.edges[(src, dst)] = self.edges.get((src, dst), 0) + count
        if step == 1:
            self.step1 += count
        else:
            self.step2 += count

    def per_stripe(self) -> dict:
        return {"step1": self.step1 // self.stripes, "step2": self.step2 // self.stripes,
                "total": self.total // self.stripes}

    def to_dict(self) -> dict:
        return {
            "edges": [{"src": s, "dst": d, "symbols": c} for (s, d), c in sorted(self.edges.items())],
            "step1": self.step1, "step2": self.step2, "total": self.total,
            "stripes": self.stripes, "per_stripe": self.per_stripe(),
        }


def _digest(x) -> str:
    return hashlib.sha256(np.ascontiguousarray(x).tobytes()).hexdigest()


def cooperative_repair(desc: CodeDescriptor, nodes, F, H, transcript: list | None = None):
    """Run both repair steps and return ``({i: C_i}, ledger)``.

    ``nodes`` is either an array ``(..., n, ell)`` (failed rows are never
    read) or a mapping from helper index to its ``(..., ell)`` content.
    Pass a list as ``transcript`` to collect ``(step, src, dst, count, sha256)``
    records in transmission order.
    """
    plan = plan_repair(desc, F, H)
    if isinstance(nodes, dict):
        content = {j: np.asarray(nodes[j]) for j in plan.H if j in nodes}
    else:
        arr = np.asarray(nodes)
        content = {j: arr[..., j, :] for j in plan.H}
    missing = [j for j in plan.H if j not in content]
    if missing:
        raise MissingPayload(f"helpers {missing} supplied no data")
    batch = next(iter(content.values())).shape[:-1]
    ledger = BandwidthLedger(stripes=int(np.prod(batch, dtype=np.int64)))

    def send(step, src, dst, data):
        ledger.record(step, src, dst, int(data.size))
        if transcript is not None:
            transcript.append((step, src, dst, int(data.size), _digest(data)))

    width = plan.width
    step1 = {}
    for i in plan.F:
        node = plan.nodes[i]
        payloads = {}
        for j in plan.H:
            payloads[j] = _apply_rows(desc, node.helper_D[j], _grouped(desc, content[j], width))
            send(1, j, i, payloads[j])
        step1[i] = step1_solve(desc, plan.F, plan.H, i, payloads)
    repaired = {}
    for i in plan.F:
        peer_pieces = {}
        for j in plan.F:
            if j != i:
                peer_pieces[j] = step1[j][1][i]
                send(2, j, i, peer_pieces[j])
        repaired[i] = step2_combine(desc, plan.F, i, step1[i][0], peer_pieces)
    return repaired, ledger


# -- identity checks ------------------------------------------------------------

@dataclass
class IdentityReport:
    F: tuple
    checks: dict = field(default_factory=dict)   # name -> bool

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def add(self, name: str, ok: bool) -> None:
        self.checks[name] = self.checks.get(name, True) and bool(ok)

    def to_dict(self) -> dict:
        return {"failed": list(self.F), "checks": dict(self.checks), "passed": self.passed}


def verify_repair_identities(desc: CodeDescriptor, F, seed: int = 0, subsets: int = 20) -> IdentityReport:
    """Check the algebraic facts repair relies on for the failed set ``F``."""
    p = desc.params
    gf = desc.gf
    F = tuple(sorted(F))
    h = len(F)
    _check_h(p, h)
    rng = np.random.default_rng(seed)
    rep = IdentityReport(F=F)
    lg = s_plus(p, h) * p.ell_tilde

    for a in range(p.half):
        for z in range(h):
            acc = q_matrix(p, h, z).astype(gf.dtype)
            for g in range(p.s):
                S_last = selection_matrix(p, h, a, g, h - 1)
                acc ^= la.mat_mul(gf, S_last.T, selection_matrix(p, h, a, g, z))
            rep.add("selection_identity", np.array_equal(acc, la.identity(gf, lg)))

    for i in F:
        a, b = divmod(i, 2)
        s = p.s
        UK = la.mat_mul(gf, la.kron(gf, desc.U[b], la.identity(gf, p.r)), kernel_matrix(desc, a, b, p.r))
        rotF = la.circulant(gf, desc.pairing.F0 if b == 0 else desc.pairing.F1)
        rep.add("Kii", np.array_equal(UK, masked_kernel(gf, rotF, desc.lam[s * i:s * i + s], p.r)))
        j = 2 * a + (1 - b)
        UK = la.mat_mul(gf, la.kron(gf, desc.U[b], la.identity(gf, p.r)), kernel_matrix(desc, a, 1 - b, p.r))
        rep.add("Kij", np.array_equal(UK, masked_kernel(gf, la.identity(gf, s), desc.lam[s * j:s * j + s], p.r)))

        ref = small_code_matrices(desc, F, i)
        dense = small_code_matrices(desc, F, i, dense=True)
        closed = closed_form_small_code(desc, F, i)
        rep.add("blockwise_matches_dense",
                all(np.array_equal(x, y) for x, y in zip(ref.self_H, dense.self_H))
                and all(np.array_equal(ref.H[j], dense.H[j]) for j in ref.H))
        rep.add("subrepair1", all(np.array_equal(x, y) for x, y in zip(ref.self_H, closed.self_H)))
        rep.add("subrepair2", all(np.array_equal(ref.H[j], closed.H[j]) for j in ref.H if j // 2 == a))
        rep.add("subrepair3", all(np.array_equal(ref.H[j], closed.H[j]) for j in ref.H if j // 2 != a))

        # case split of (R_i ⊗ I_r)(I ⊗ H_j) C_j on random C_j
        Rm = repair_matrix(desc, F, i)
        E = la.kron(gf, la.identity(gf, s_plus(p, h)), la.blow_up(gf, desc.U[b], p.half, a, p.s))
        for jj in range(p.n_int):
            Hj = la.kron(gf, la.identity(gf, s_plus(p, h)), desc.parity_blocks[jj])
            Cj = rng.integers(0, gf.q, lg).astype(gf.dtype)
            lhs = la.mat_mul(gf, la.mat_mul(gf, la.kron(gf, Rm, la.identity(gf, p.r)), Hj), Cj)
            if jj == i:
                rhs = np.zeros_like(lhs)
                for g in range(p.s):
                    rhs ^= la.mat_mul(gf, ref.self_H[g], la.mat_mul(gf, ref.self_D[g], Cj))
            else:
                rhs = la.mat_mul(gf, ref.H[jj], la.mat_mul(gf, ref.D[jj], Cj))
                if jj // 2 != a:
                    EI = la.kron(gf, E, la.identity(gf, p.r))
                    rep.add("exchange", np.array_equal(la.mat_mul(gf, EI, Hj), la.mat_mul(gf, Hj, E)))
            rep.add("case_split", np.array_equal(lhs, rhs))

        rep.add("stacked_invertible", la.is_invertible(gf, stacked_matrix(desc, F, i)))

        cols = ([ref.self_H[g] for g in range(p.s)] + [ref.H[j] for j in sorted(ref.H)])
        combos = list(itertools.combinations(range(len(cols)), p.r))
        pick = rng.choice(len(combos), size=min(subsets, len(combos)), replace=False)
        rep.add("small_code_mds", all(
            la.is_invertible(gf, np.concatenate([cols[c] for c in combos[t]], axis=1)) for t in pick))
    return rep

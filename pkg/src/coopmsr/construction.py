"""Parameters, kernel matrices and parity-check blocks of the cooperative MSR code.

The internal code has even length ``n_int`` (``n`` itself, or ``n + 1`` with
the last node punctured).  Nodes are paired into ``n_int / 2`` groups; node
``2a + b`` is member ``b`` of group ``a``.  Each node's parity-check block of
the intermediate code is the kernel matrix ``K_{a,b}`` blown up at digit
``a``, and the full code stacks ``rho`` independent copies (layers) of it.
"""
from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass, field
from functools import cached_property, reduce

import numpy as np

from . import linalg as la
from .errors import (
    BadIndex,
    DegenerateGamma,
    DuplicateLambda,
    FieldTooSmall,
    FlrViolation,
    InvalidParams,
    NoValidGamma,
)
from .gf import GF2m, create_field, min_degree_for

DESCRIPTOR_VERSION = 1


@dataclass(frozen=True)
class CodeParams:
    n: int
    k: int
    d: int
    h_set: tuple
    r: int          # internal redundancy n_int - k
    s: int          # d - k + 1
    n_int: int      # even internal length
    half: int       # n_int / 2, number of node groups
    ell_tilde: int  # s ** half, sub-packetization of one layer
    rho: int        # number of layers
    ell: int        # rho * ell_tilde
    m: int          # field degree

    @property
    def punctured(self) -> bool:
        return self.n_int != self.n

    @property
    def q(self) -> int:
        return 1 << self.m

    @property
    def tolerance(self) -> int:
        """Erasures a user-visible codeword survives."""
        return self.n - self.k


def derive_params(n, k, d, h_set, field_bits=None) -> CodeParams:
    """Validate ``(n, k, d, h_set)`` and derive every dependent quantity."""
    if isinstance(h_set, int):
        h_set = (h_set,)
    try:
        n, k, d = int(n), int(k), int(d)
        hs = tuple(sorted({int(h) for h in h_set}))
    except (TypeError, ValueError) as exc:
        raise InvalidParams(f"parameters must be integers: {exc}") from None
    if not hs:
        raise InvalidParams("h_set must be nonempty")
    if k < 1:
        raise InvalidParams("k >= 1 violated")
    if min(hs) < 1:
        raise InvalidParams("h >= 1 violated")
    if d < k + 1:
        raise InvalidParams(f"k+1 <= d violated (k={k}, d={d})")
    for h in hs:
        if d > n - h:
            raise InvalidParams(f"d <= n-h violated (n={n}, d={d}, h={h})")

    n_int = n + (n % 2)
    half = n_int // 2
    s = d - k + 1
    ell_tilde = s ** half
    rho = reduce(math.lcm, (s + h - 1 for h in hs))
    m_min = min_degree_for(s * n_int + 1)
    if field_bits is None:
        m = m_min
    else:
        m = int(field_bits)
        if m < m_min:
            raise FieldTooSmall(f"field needs 2^m >= {s * n_int + 1}, so m >= {m_min}; got {m}")
        create_field(m)  # range check
    return CodeParams(n=n, k=k, d=d, h_set=hs, r=n_int - k, s=s, n_int=n_int, half=half,
                      ell_tilde=ell_tilde, rho=rho, ell=rho * ell_tilde, m=m)


# -- cooperative pairing matrices -------------------------------------------

def g_poly(gf: GF2m, s: int, gamma: int) -> int:
    """``gamma (gamma - 1)(gamma + s - 1)(gamma + s - 2)``."""
    c = gf.from_integer
    terms = [gamma, gf.sub(gamma, 1), gf.add(gamma, c(s - 1)), gf.add(gamma, c(s - 2))]
    return reduce(gf.mul, terms, 1)


@dataclass(frozen=True)
class PairingMatrices:
    F0: np.ndarray   # coefficients c_0..c_{s-1}
    F1: np.ndarray
    U: tuple         # (U_0, U_1)
    V: tuple         # (V_0, V_1)


def pairing_polynomials(gf: GF2m, s: int, gamma: int) -> PairingMatrices:
    if g_poly(gf, s, gamma) == 0:
        raise DegenerateGamma(f"g(gamma) = 0 for gamma={gamma:#x}, s={s}")
    c = gf.from_integer
    F0 = np.ones(s, dtype=gf.dtype)
    F0[0] = gamma
    denom = gf.neg(gf.mul(gf.sub(gamma, 1), gf.add(gamma, c(s - 1))))
    inv = gf.inv(denom)
    F1 = np.full(s, inv, dtype=gf.dtype)
    F1[0] = gf.mul(gf.neg(gf.add(gamma, c(s - 2))), inv)
    I = la.identity(gf, s)
    return PairingMatrices(F0=F0, F1=F1, U=(I, la.circulant(gf, F1)), V=(la.circulant(gf, F0), I))


def poly_mulmod(gf: GF2m, f, g) -> np.ndarray:
    """Product in ``F_q[x] / (x^s - 1)``."""
    f, g = np.asarray(f), np.asarray(g)
    s = f.size
    out = np.zeros(s, dtype=gf.dtype)
    for i in range(s):
        for j in range(s):
            out[(i + j) % s] ^= gf.mul(int(f[i]), int(g[j]))
    return out


# -- kernels ----------------------------------------------------------------

def kernel_map(gf: GF2m, xs, t: int) -> np.ndarray:
    """``1^(s) ⊠ [L(x_0) ... L(x_{s-1})]``: an ``st x s`` matrix of ``t x 1`` blocks."""
    xs = [int(x) for x in xs]
    row = np.concatenate([la.vandermonde_col(gf, x, t) for x in xs], axis=1)
    return la.box_kron(gf, la.ones_col(gf, len(xs)), row, (t, 1))


def masked_kernel(gf: GF2m, mask, xs, t: int) -> np.ndarray:
    """``(mask ⊗ 1^(t)) ⊙ kernel_map(xs, t)``."""
    return la.hadamard(gf, la.kron(gf, mask, la.ones_col(gf, t)), kernel_map(gf, xs, t))


def f_det(gf: GF2m, xs, gamma: int) -> int:
    """Determinant of the ``2s x 2s`` group matrix at ``t = 2`` for nodes ``(xs[:s], xs[s:])``."""
    xs = list(xs)
    s = len(xs) // 2
    pm = pairing_polynomials(gf, s, gamma) if g_poly(gf, s, gamma) else None
    V0 = pm.V[0] if pm else la.circulant(gf, [gamma] + [1] * (s - 1))
    left = masked_kernel(gf, V0, xs[:s], 2)
    right = masked_kernel(gf, la.identity(gf, s), xs[s:], 2)
    return la.mat_det(gf, np.concatenate([left, right], axis=1))


def check_flr(params: CodeParams, lam, gamma: int, gf: GF2m | None = None) -> bool:
    """True iff ``g(gamma) != 0`` and every group determinant is nonzero."""
    gf = gf or create_field(params.m)
    lam = [int(x) for x in lam]
    s = params.s
    if len(lam) != s * params.n_int:
        raise InvalidParams(f"need {s * params.n_int} lambdas, got {len(lam)}")
    if len(set(lam)) != len(lam):
        raise DuplicateLambda("lambda values are not pairwise distinct")
    if g_poly(gf, s, gamma) == 0:
        return False
    for a in range(params.half):
        if f_det(gf, lam[2 * s * a:2 * s * (a + 1)], gamma) == 0:
            return False
    return True


def gamma_scan(gf: GF2m):
    """Candidate order 0, 1, w, w^2, ..., w^(q-2)."""
    yield 0
    yield 1
    x = 1
    for _ in range(1, gf.q - 1):
        x = gf.mul(x, gf.primitive_element)
        yield x


def select_parameters(params: CodeParams):
    """``lambda_i = w^i`` and the first ``gamma`` in scan order passing :func:`check_flr`."""
    gf = create_field(params.m)
    if gf.q < params.s * params.n_int + 1:
        raise FieldTooSmall("q >= s*n + 1 violated")
    lam = tuple(gf.pow(gf.primitive_element, i) for i in range(params.s * params.n_int))
    for gamma in gamma_scan(gf):
        if check_flr(params, lam, gamma, gf):
            return lam, gamma
    raise NoValidGamma("no gamma satisfies the nonvanishing condition")


# -- descriptor -------------------------------------------------------------

@dataclass(eq=False)
class CodeDescriptor:
    params: CodeParams
    lam: tuple
    gamma: int
    pairing: PairingMatrices = field(repr=False)

    @property
    def gf(self) -> GF2m:
        return create_field(self.params.m)

    @property
    def U(self):
        return self.pairing.U

    @property
    def V(self):
        return self.pairing.V

    def kernel_matrix(self, a: int, b: int, t: int) -> np.ndarray:
        return kernel_matrix(self, a, b, t)

    @cached_property
    def parity_blocks(self) -> tuple:
        return tuple(_parity_submatrix(self, i) for i in range(self.params.n_int))

    def parity_submatrix(self, i: int) -> np.ndarray:
        if not 0 <= i < self.params.n_int:
            raise BadIndex(f"node {i} outside [0, {self.params.n_int})")
        return self.parity_blocks[i]

    @cached_property
    def parity_inverse(self) -> np.ndarray:
        """Inverse of ``[H_k ... H_{n_int-1}]`` used by systematic encoding."""
        from .errors import SingularMatrix, SingularParityBlock
        P = np.concatenate(self.parity_blocks[self.params.k:], axis=1)
        try:
            return la.mat_inverse(self.gf, P)
        except SingularMatrix as exc:
            raise SingularParityBlock(str(exc)) from None

    def to_dict(self) -> dict:
        p = self.params
        return {
            "version": DESCRIPTOR_VERSION,
            "n": p.n, "k": p.k, "d": p.d, "h_set": list(p.h_set),
            "m": p.m, "prim_poly": self.gf.prim_poly,
            "lambda": [int(x) for x in self.lam], "gamma": int(self.gamma),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def kernel_matrix(desc: CodeDescriptor, a: int, b: int, t: int) -> np.ndarray:
    """``K_{a,b}^(t) = (V_b ⊗ 1^(t)) ⊙ kernel_map(lambda_{s(2a+b)+[s]}, t)``."""
    p = desc.params
    if not 0 <= a < p.half or b not in (0, 1):
        raise BadIndex(f"kernel index (a={a}, b={b}) out of range")
    s = p.s
    base = s * (2 * a + b)
    return masked_kernel(desc.gf, desc.V[b], desc.lam[base:base + s], t)


def _parity_submatrix(desc: CodeDescriptor, i: int) -> np.ndarray:
    p = desc.params
    a, b = divmod(i, 2)
    K = kernel_matrix(desc, a, b, p.r)
    return la.blow_up(desc.gf, K, p.half, a, p.s, (p.r, 1))


def parity_submatrix(desc: CodeDescriptor, i: int) -> np.ndarray:
    return desc.parity_submatrix(i)


def build_descriptor(params: CodeParams, lam=None, gamma=None) -> CodeDescriptor:
    """Build a descriptor, choosing ``(lambda, gamma)`` automatically unless both are given."""
    gf = create_field(params.m)
    if lam is None and gamma is None:
        lam, gamma = select_parameters(params)
    else:
        if lam is None:
            lam = tuple(gf.pow(gf.primitive_element, i) for i in range(params.s * params.n_int))
        if gamma is None:
            for gamma in gamma_scan(gf):
                if check_flr(params, lam, gamma, gf):
                    break
            else:
                raise NoValidGamma("no gamma satisfies the nonvanishing condition")
        lam = tuple(int(x) for x in lam)
        gamma = int(gamma)
        if any(not 0 <= x < gf.q for x in lam + (gamma,)):
            raise InvalidParams("lambda/gamma outside the field")
        if g_poly(gf, params.s, gamma) == 0:
            raise DegenerateGamma(f"g(gamma) = 0 for gamma={gamma:#x}")
        if not check_flr(params, lam, gamma, gf):
            raise FlrViolation("a group determinant vanishes")
    pairing = pairing_polynomials(gf, params.s, gamma)
    return CodeDescriptor(params=params, lam=tuple(int(x) for x in lam), gamma=int(gamma), pairing=pairing)


def descriptor_from_dict(data: dict) -> CodeDescriptor:
    if data.get("version") != DESCRIPTOR_VERSION:
        raise InvalidParams(f"unsupported descriptor version {data.get('version')!r}")
    params = derive_params(data["n"], data["k"], data["d"], data["h_set"], field_bits=data["m"])
    gf = create_field(params.m)
    if int(data["prim_poly"]) != gf.prim_poly:
        raise InvalidParams(f"descriptor polynomial {data['prim_poly']:#x} differs from built-in {gf.prim_poly:#x}")
    return build_descriptor(params, lam=data["lambda"], gamma=data["gamma"])


def save_descriptor(desc: CodeDescriptor, path) -> None:
    with open(path, "w") as fh:
        fh.write(desc.to_json())
        fh.write("\n")


def load_descriptor(path) -> CodeDescriptor:
    with open(path) as fh:
        return descriptor_from_dict(json.load(fh))


# -- MDS verification -------------------------------------------------------

@dataclass
class MdsReport:
    checked: int
    failures: list
    seconds: float

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {"checked": self.checked, "failures": [list(f) for f in self.failures],
                "passed": self.passed, "seconds": round(self.seconds, 4)}


def verify_mds(desc: CodeDescriptor, mode="exhaustive", samples: int = 0, seed: int = 0) -> MdsReport:
    """Check that every (or a sample of) ``r``-subset of parity blocks is invertible.

    Invertibility of the intermediate blocks is enough for the replicated
    code because its blocks are ``I_rho ⊗ H_i``.
    """
    p = desc.params
    t0 = time.perf_counter()
    subsets = list(itertools.combinations(range(p.n_int), p.r))
    if mode == "sample":
        rng = np.random.default_rng(seed)
        if samples < len(subsets):
            pick = rng.choice(len(subsets), size=samples, replace=False)
            subsets = [subsets[i] for i in sorted(pick)]
    elif mode != "exhaustive":
        raise ValueError(f"unknown mode {mode!r}")
    failures = []
    for sub in subsets:
        M = np.concatenate([desc.parity_blocks[i] for i in sub], axis=1)
        if not la.is_invertible(desc.gf, M):
            failures.append(sub)
    return MdsReport(checked=len(subsets), failures=failures, seconds=time.perf_counter() - t0)

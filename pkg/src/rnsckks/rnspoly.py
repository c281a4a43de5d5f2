"""RNS polynomials, fast base conversion, and Galois automorphisms.

A polynomial in Z_Q[X]/(X^N + 1) with Q = q_0 ... q_l is held as an
(l+1) x N uint64 matrix of per-prime residue limbs, in either coefficient
or evaluation (NTT) representation.  Base conversion follows the textbook
approximate form: out_i = sum_j ([P]_{p_j} * phat_j^{-1} mod p_j) * phat_j
mod q_i, which may add an integer multiple k * P_src, 0 <= k < |source|;
callers rely on that slack being annihilated downstream (key-switching) or
irrelevant (mod raise).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

from .errors import BasisMismatchError, ConfigurationError, RepresentationError
from .modmath import (U64, PrimeModulus, barrett_mul, mod_add, mod_neg,
                      mod_sub, shoup_mul)
from .ntt import ntt

COEFF = "coeff"
EVAL = "eval"


@dataclass(frozen=True)
class LimbBasis:
    """An ordered set of coprime NTT-friendly primes."""

    primes: tuple[PrimeModulus, ...]

    def __len__(self) -> int:
        return len(self.primes)

    def __iter__(self):
        return iter(self.primes)

    @property
    def modulus(self) -> int:
        return reduce(lambda a, b: a * b.q, self.primes, 1)

    @property
    def qs(self) -> tuple[int, ...]:
        return tuple(p.q for p in self.primes)

    def concat(self, other: "LimbBasis") -> "LimbBasis":
        return LimbBasis(self.primes + other.primes)

    def slice(self, start: int, stop: int) -> "LimbBasis":
        return LimbBasis(self.primes[start:stop])


@dataclass
class RnsPolynomial:
    """Residue-limb matrix plus its basis and representation tag."""

    basis: LimbBasis
    rep: str
    limbs: np.ndarray        # shape (len(basis), N), dtype uint64

    def __post_init__(self):
        if self.limbs.ndim != 2 or self.limbs.shape[0] != len(self.basis):
            raise BasisMismatchError(
                f"limb matrix {self.limbs.shape} does not match basis "
                f"of {len(self.basis)} primes")
        if self.rep not in (COEFF, EVAL):
            raise RepresentationError(f"unknown representation {self.rep!r}")

    @property
    def n(self) -> int:
        return self.limbs.shape[1]

    def copy(self) -> "RnsPolynomial":
        return RnsPolynomial(self.basis, self.rep, self.limbs.copy())

    def to_eval(self) -> "RnsPolynomial":
        if self.rep == EVAL:
            return self
        out = np.empty_like(self.limbs)
        for i, p in enumerate(self.basis):
            out[i] = ntt(self.limbs[i], p, "forward")
        return RnsPolynomial(self.basis, EVAL, out)

    def to_coeff(self) -> "RnsPolynomial":
        if self.rep == COEFF:
            return self
        out = np.empty_like(self.limbs)
        for i, p in enumerate(self.basis):
            out[i] = ntt(self.limbs[i], p, "inverse")
        return RnsPolynomial(self.basis, COEFF, out)


def zero_poly(basis: LimbBasis, n: int, rep: str = COEFF) -> RnsPolynomial:
    return RnsPolynomial(basis, rep, np.zeros((len(basis), n), dtype=U64))


def poly_from_int_coeffs(coeffs: np.ndarray, basis: LimbBasis,
                         rep: str = COEFF) -> RnsPolynomial:
    """Reduce signed word-sized integer coefficients into every limb."""
    coeffs = np.asarray(coeffs, dtype=np.int64)
    limbs = np.empty((len(basis), len(coeffs)), dtype=U64)
    for i, p in enumerate(basis):
        limbs[i] = (coeffs % np.int64(p.q)).astype(U64)
    out = RnsPolynomial(basis, COEFF, limbs)
    return out.to_eval() if rep == EVAL else out


def poly_from_big_coeffs(coeffs, basis: LimbBasis, rep: str = COEFF) -> RnsPolynomial:
    """Reduce arbitrary-precision integer coefficients into every limb."""
    limbs = np.empty((len(basis), len(coeffs)), dtype=U64)
    for i, p in enumerate(basis):
        limbs[i] = np.array([int(c) % p.q for c in coeffs], dtype=U64)
    out = RnsPolynomial(basis, COEFF, limbs)
    return out.to_eval() if rep == EVAL else out


def _check_pair(a: RnsPolynomial, b: RnsPolynomial):
    if a.basis != b.basis:
        raise BasisMismatchError("operands live over different bases")
    if a.rep != b.rep:
        raise RepresentationError(f"operands mix {a.rep} and {b.rep}")


def rp_add(a: RnsPolynomial, b: RnsPolynomial) -> RnsPolynomial:
    _check_pair(a, b)
    out = np.empty_like(a.limbs)
    for i, p in enumerate(a.basis):
        out[i] = mod_add(a.limbs[i], b.limbs[i], p)
    return RnsPolynomial(a.basis, a.rep, out)


def rp_sub(a: RnsPolynomial, b: RnsPolynomial) -> RnsPolynomial:
    _check_pair(a, b)
    out = np.empty_like(a.limbs)
    for i, p in enumerate(a.basis):
        out[i] = mod_sub(a.limbs[i], b.limbs[i], p)
    return RnsPolynomial(a.basis, a.rep, out)


def rp_neg(a: RnsPolynomial) -> RnsPolynomial:
    out = np.empty_like(a.limbs)
    for i, p in enumerate(a.basis):
        out[i] = mod_neg(a.limbs[i], p)
    return RnsPolynomial(a.basis, a.rep, out)


def rp_mul(a: RnsPolynomial, b: RnsPolynomial) -> RnsPolynomial:
    """Pointwise product; the multiply-accumulate path, Barrett reduced."""
    _check_pair(a, b)
    if a.rep != EVAL:
        raise RepresentationError("pointwise product needs evaluation rep")
    out = np.empty_like(a.limbs)
    for i, p in enumerate(a.basis):
        out[i] = barrett_mul(a.limbs[i], b.limbs[i], p)
    return RnsPolynomial(a.basis, a.rep, out)


def rp_scalar_mul(a: RnsPolynomial, scalar: int) -> RnsPolynomial:
    """Multiply by one integer scalar, reduced per limb."""
    out = np.empty_like(a.limbs)
    for i, p in enumerate(a.basis):
        out[i] = barrett_mul(a.limbs[i], np.array(scalar % p.q, dtype=U64), p)
    return RnsPolynomial(a.basis, a.rep, out)


def rp_scalar_mul_per_limb(a: RnsPolynomial, scalars: dict[int, int]) -> RnsPolynomial:
    """Multiply limb of prime q by scalars[q]; used for exact-division tricks."""
    out = np.empty_like(a.limbs)
    for i, p in enumerate(a.basis):
        out[i] = barrett_mul(a.limbs[i], np.array(scalars[p.q] % p.q, dtype=U64), p)
    return RnsPolynomial(a.basis, a.rep, out)


# ---------------------------------------------------------------------------
# Fast base conversion.

@dataclass(frozen=True)
class BaseTable:
    """Precomputed factors for source -> target fast base conversion.

    `inv_factors[j]` is phat_j^{-1} mod p_j and `factors[i, j]` is
    phat_j mod q_i, where phat_j = prod_{k != j} p_k over the source
    primes; `src_mod[i]` is P_src mod q_i for the signed correction.
    Each array rides with its 64-bit reciprocal companion so conversions
    multiply via the fixed-operand fast path.
    """

    source: LimbBasis
    target: LimbBasis
    inv_factors: np.ndarray
    inv_shoup: np.ndarray
    factors: np.ndarray
    factors_shoup: np.ndarray
    src_mod: np.ndarray
    src_mod_shoup: np.ndarray

    def __post_init__(self):
        # Entries are recomputed the slow way (big-integer products) and
        # compared; a table built from a mismatched basis pair never ships.
        p_src = self.source.modulus
        for j, pj in enumerate(self.source):
            phat = p_src // pj.q
            want_inv = pow(phat % pj.q, -1, pj.q)
            if int(self.inv_factors[j]) != want_inv \
                    or int(self.inv_shoup[j]) != (want_inv << 64) // pj.q:
                raise ConfigurationError("base table inverse factor mismatch")
            for i, qi in enumerate(self.target):
                want = phat % qi.q
                if int(self.factors[i, j]) != want \
                        or int(self.factors_shoup[i, j]) != (want << 64) // qi.q:
                    raise ConfigurationError("base table factor mismatch")
        for i, qi in enumerate(self.target):
            want = p_src % qi.q
            if int(self.src_mod[i]) != want \
                    or int(self.src_mod_shoup[i]) != (want << 64) // qi.q:
                raise ConfigurationError("base table correction mismatch")


@lru_cache(maxsize=None)
def _base_table_cached(source: LimbBasis, target: LimbBasis) -> BaseTable:
    p_src = source.modulus
    inv = np.empty(len(source), dtype=U64)
    inv_sh = np.empty(len(source), dtype=U64)
    fac = np.empty((len(target), len(source)), dtype=U64)
    fac_sh = np.empty((len(target), len(source)), dtype=U64)
    src = np.empty(len(target), dtype=U64)
    src_sh = np.empty(len(target), dtype=U64)
    for j, pj in enumerate(source):
        phat = p_src // pj.q
        w = pow(phat % pj.q, -1, pj.q)
        inv[j], inv_sh[j] = w, (w << 64) // pj.q
        for i, qi in enumerate(target):
            w = phat % qi.q
            fac[i, j], fac_sh[i, j] = w, (w << 64) // qi.q
    for i, qi in enumerate(target):
        w = p_src % qi.q
        src[i], src_sh[i] = w, (w << 64) // qi.q
    return BaseTable(source=source, target=target,
                     inv_factors=inv, inv_shoup=inv_sh,
                     factors=fac, factors_shoup=fac_sh,
                     src_mod=src, src_mod_shoup=src_sh)


def make_base_table(source: LimbBasis, target: LimbBasis) -> BaseTable:
    return _base_table_cached(source, target)


def _bconv_accumulate(v: np.ndarray, table: BaseTable, i: int,
                      cols: slice) -> np.ndarray:
    """sum_j v[j] * factors[i, j] mod q_i over a column slice."""
    qi = table.target.primes[i]
    # Partial sums of values < q_i stay below 2^64 for `room` terms.
    room = max(1, ((1 << 64) - 1) // (qi.q - 1) - 1)
    acc = np.zeros(v.shape[1] if cols == slice(None) else
                   len(range(*cols.indices(v.shape[1]))), dtype=U64)
    pending = 0
    for j in range(v.shape[0]):
        acc = acc + shoup_mul(v[j, cols], table.factors[i, j],
                              table.factors_shoup[i, j], qi)
        pending += 1
        if pending == room:
            acc %= U64(qi.q)
            pending = 0
    return acc % U64(qi.q)


def base_convert(p: RnsPolynomial, table: BaseTable, order: str = "blocked",
                 centered: bool = True) -> RnsPolynomial:
    """Fast base conversion of a coefficient-representation polynomial.

    With `centered` the step-1 residues are read as signed representatives:
    since v_j - b_j p_j with b_j = (v_j > p_j/2) shifts the sum by exactly
    (sum b_j) * P_src, one subtraction per target row converts the unsigned
    form; the leftover slack k * P_src then has |k| <= ceil(|source| / 2)
    and zero mean instead of a positive bias.

    `order` picks the loop order of the accumulation: 'blocked' walks the
    factor table in 6-row by 1024-column tiles (the shape the multiply-
    accumulate units stream), 'naive' runs whole rows; results are
    identical.
    """
    if p.rep != COEFF:
        raise RepresentationError("base conversion needs coefficient rep")
    if p.basis != table.source:
        raise BasisMismatchError("polynomial basis is not the table source")
    v = np.empty_like(p.limbs)
    borrow = np.zeros(p.n, dtype=U64)
    for j, pj in enumerate(table.source):
        v[j] = shoup_mul(p.limbs[j], table.inv_factors[j],
                         table.inv_shoup[j], pj)
        if centered:
            borrow += (v[j] > U64(pj.q // 2)).astype(U64)

    n = p.n
    out = np.empty((len(table.target), n), dtype=U64)
    if order == "naive":
        for i in range(len(table.target)):
            out[i] = _bconv_accumulate(v, table, i, slice(None))
    elif order == "blocked":
        row_block, col_block = 6, 4 * 256
        for i0 in range(0, len(table.target), row_block):
            for c0 in range(0, n, col_block):
                cols = slice(c0, min(c0 + col_block, n))
                for i in range(i0, min(i0 + row_block, len(table.target))):
                    out[i, cols] = _bconv_accumulate(v, table, i, cols)
    else:
        raise ConfigurationError(f"unknown accumulation order {order!r}")
    if centered:
        for i, qi in enumerate(table.target):
            shift = shoup_mul(borrow, table.src_mod[i],
                              table.src_mod_shoup[i], qi)
            out[i] = mod_sub(out[i], shift, qi)
    return RnsPolynomial(table.target, COEFF, out)


def bconv_routine(p: RnsPolynomial, table: BaseTable, order: str = "blocked",
                  centered: bool = True) -> RnsPolynomial:
    """INTT -> base conversion -> NTT: the evaluation-rep conversion unit."""
    if p.rep != EVAL:
        raise RepresentationError("bconv routine expects evaluation rep")
    return base_convert(p.to_coeff(), table, order, centered).to_eval()


# ---------------------------------------------------------------------------
# Galois automorphisms X -> X^(5^r mod 2N).

@lru_cache(maxsize=None)
def _auto_maps(n: int, r: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(coeff target index, coeff sign-flip mask, eval source index) for psi_r."""
    exp5 = pow(5, r % (n // 2), 2 * n)
    i = np.arange(n, dtype=np.int64)
    e = (i * exp5) % (2 * n)
    coeff_tgt = e % n
    coeff_flip = e >= n
    j_out = np.arange(n, dtype=np.int64)
    e_src = ((2 * j_out + 1) * exp5) % (2 * n)
    eval_src = (e_src - 1) // 2
    return coeff_tgt, coeff_flip, eval_src


def automorphism(p: RnsPolynomial, r: int) -> RnsPolynomial:
    """Apply psi_r: X -> X^(5^r mod 2N), in either representation.

    Coefficient rep: a signed monomial permutation (negacyclic wraps flip
    sign).  Evaluation rep: a pure index permutation of the odd-exponent
    evaluation points.
    """
    coeff_tgt, coeff_flip, eval_src = _auto_maps(p.n, r)
    out = np.empty_like(p.limbs)
    if p.rep == COEFF:
        for i, pm in enumerate(p.basis):
            row = np.empty_like(p.limbs[i])
            vals = np.where(coeff_flip, mod_neg(p.limbs[i], pm), p.limbs[i])
            row[coeff_tgt] = vals
            out[i] = row
    else:
        out[:] = p.limbs[:, eval_src]
    return RnsPolynomial(p.basis, p.rep, out)


# ---------------------------------------------------------------------------
# CRT reconstruction (big-integer exact path).

def crt_reconstruct(p: RnsPolynomial, centered: bool = True) -> np.ndarray:
    """Exact coefficients as Python integers, centered in (-Q/2, Q/2]."""
    poly = p.to_coeff()
    big_q = poly.basis.modulus
    acc = np.zeros(poly.n, dtype=object)
    for i, pm in enumerate(poly.basis):
        q_hat = big_q // pm.q
        y = pow(q_hat % pm.q, -1, pm.q)
        t = barrett_mul(poly.limbs[i], np.array(y, dtype=U64), pm)
        acc += t.astype(object) * q_hat
    acc %= big_q
    if centered:
        acc = np.where(acc > big_q // 2, acc - big_q, acc)
    return acc

"""Negacyclic number-theoretic transforms, flat and four-step.

Conventions, fixed across the package:

* `ntt` maps coefficients a_0..a_{n-1} of P(X) in Z_q[X]/(X^n + 1) to the
  evaluation vector out[j] = P(psi^(2j+1)) in natural j order, where psi is
  a primitive 2n-th root of unity mod q.  The odd-exponent indexing makes
  the evaluation-domain automorphism a closed-form index permutation.
* `intt` direction is the exact inverse; the 1/n factor is folded into the
  final stage's twiddles so the roundtrip is the identity bitwise.
* `four_step_ntt` computes the same map for square n via sqrt(n)-point
  column and row passes joined by a twisting-factor table whose rows are
  geometric progressions; the table is never materialized in full, only
  expanded column by column from (start, ratio) seeds.

Twiddle tables are cached per (q, n, root) and stored alongside their
64-bit reciprocal companions so each butterfly costs one high-word
multiply, two wrapping multiplies, and a conditional subtract.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError
from .modmath import U64, PrimeModulus, mod_add, mod_sub, mont_mul, shoup_mul


def bit_reverse_permutation(n: int) -> np.ndarray:
    """Index array p with p[i] = bit-reversal of i over log2(n) bits."""
    bits = n.bit_length() - 1
    idx = np.arange(n, dtype=np.int64)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


@dataclass(frozen=True)
class NttTables:
    """Per-stage twiddles and reciprocals for one (q, n, psi) triple."""

    mod: PrimeModulus
    n: int
    psi: int
    br: np.ndarray
    fwd: tuple[np.ndarray, ...]     # stage h = 1, 2, ..., n/2
    fwd_shoup: tuple[np.ndarray, ...]
    inv: tuple[np.ndarray, ...]     # same indexing; h = 1 entry folds 1/n
    inv_shoup: tuple[np.ndarray, ...]
    n_inv: np.ndarray
    n_inv_shoup: np.ndarray
    cyclic: bool = False


def _with_shoup(words: list[int], q: int) -> tuple[np.ndarray, np.ndarray]:
    return (np.array(words, dtype=U64),
            np.array([(w << 64) // q for w in words], dtype=U64))


def _build_tables(mod: PrimeModulus, n: int, psi: int, cyclic: bool) -> NttTables:
    q = mod.q
    order = n if cyclic else 2 * n
    if pow(psi, order // 2, q) != q - 1:
        raise ConfigurationError(f"root {psi} lacks order {order} mod {q}")
    psi_inv = pow(psi, -1, q)
    n_inv = pow(n, -1, q)
    fwd, fwd_shoup = [], []
    inv, inv_shoup = [], []
    h = 1
    while h < n:
        # Stage h merges length-h sub-transforms; the sub-root is the
        # n/(2h)-th power of psi, taken at odd exponents when negacyclic.
        step = n // (2 * h)
        exps = [(u * step if cyclic else (2 * u + 1) * step) for u in range(h)]
        w, w_sh = _with_shoup([pow(psi, e, q) for e in exps], q)
        w_inv = [pow(psi_inv, e, q) for e in exps]
        if h == 1:
            w_inv = [x * n_inv % q for x in w_inv]
        wi, wi_sh = _with_shoup(w_inv, q)
        fwd.append(w)
        fwd_shoup.append(w_sh)
        inv.append(wi)
        inv_shoup.append(wi_sh)
        h <<= 1
    ni, ni_sh = _with_shoup([n_inv], q)
    return NttTables(mod=mod, n=n, psi=psi, br=bit_reverse_permutation(n),
                     fwd=tuple(fwd), fwd_shoup=tuple(fwd_shoup),
                     inv=tuple(inv), inv_shoup=tuple(inv_shoup),
                     n_inv=ni[0], n_inv_shoup=ni_sh[0], cyclic=cyclic)


@lru_cache(maxsize=None)
def _tables_cached(mod: PrimeModulus, n: int, psi: int, cyclic: bool) -> NttTables:
    return _build_tables(mod, n, psi, cyclic)


def get_tables(mod: PrimeModulus, n: int, psi: int | None = None,
               cyclic: bool = False) -> NttTables:
    if n < 2 or n & (n - 1):
        raise ConfigurationError(f"transform length {n} is not a power of two >= 2")
    if psi is None:
        order = n if cyclic else 2 * n
        if mod.two_n % order:
            raise ConfigurationError(
                f"modulus root order {mod.two_n} does not cover length {n}")
        psi = pow(mod.root, mod.two_n // order, mod.q)
    return _tables_cached(mod, n, psi, cyclic)


def _forward(values: np.ndarray, t: NttTables) -> np.ndarray:
    shape = values.shape
    x = values.reshape(-1, t.n)[:, t.br]        # fancy index: fresh buffer
    h = 1
    stage = 0
    while h < t.n:
        x = x.reshape(-1, 2 * h)
        lo = x[:, :h]
        prod = shoup_mul(x[:, h:], t.fwd[stage][None, :],
                         t.fwd_shoup[stage][None, :], t.mod)
        x[:, h:] = mod_sub(lo, prod, t.mod)
        x[:, :h] = mod_add(lo, prod, t.mod)
        h <<= 1
        stage += 1
    return x.reshape(shape)


def _inverse(values: np.ndarray, t: NttTables) -> np.ndarray:
    shape = values.shape
    x = values.reshape(-1, t.n).copy()
    h = t.n // 2
    while h >= 1:
        stage = h.bit_length() - 1
        x = x.reshape(-1, 2 * h)
        lo = x[:, :h]
        hi = x[:, h:]
        s = mod_add(lo, hi, t.mod)
        d = shoup_mul(mod_sub(lo, hi, t.mod), t.inv[stage][None, :],
                      t.inv_shoup[stage][None, :], t.mod)
        if h == 1:
            # 1/n lives in this stage: the difference path's twiddles carry
            # it already, the sum path takes it explicitly.
            s = shoup_mul(s, t.n_inv, t.n_inv_shoup, t.mod)
        x[:, :h] = s
        x[:, h:] = d
        h >>= 1
    return x.reshape(-1, t.n)[:, t.br].reshape(shape)


def ntt(values: np.ndarray, mod: PrimeModulus, direction: str = "forward",
        n: int | None = None, psi: int | None = None) -> np.ndarray:
    """Negacyclic NTT over the last axis; direction 'forward' or 'inverse'."""
    values = np.asarray(values, dtype=U64)
    t = get_tables(mod, n or values.shape[-1], psi)
    if direction == "forward":
        return _forward(values, t)
    if direction == "inverse":
        return _inverse(values, t)
    raise ConfigurationError(f"unknown direction {direction!r}")


def cyclic_ntt(values: np.ndarray, mod: PrimeModulus, direction: str,
               psi: int) -> np.ndarray:
    """Cyclic (X^n - 1) companion transform used by the four-step row pass."""
    values = np.asarray(values, dtype=U64)
    t = get_tables(mod, values.shape[-1], psi, cyclic=True)
    return _forward(values, t) if direction == "forward" else _inverse(values, t)


@dataclass(frozen=True)
class TwistSchedule:
    """Seeds of the four-step twisting table: row r is start[r] * ratio[r]^c.

    Keeping only the seeds is the on-the-fly policy: 2 sqrt(n) words of
    state replace the sqrt(n) x sqrt(n) table.  `words_avoided` counts the
    entries never stored.
    """

    mod: PrimeModulus
    start_values: np.ndarray
    common_ratios: np.ndarray

    @property
    def rows(self) -> int:
        return len(self.start_values)

    @property
    def words_avoided(self) -> int:
        return self.rows * self.rows


def make_twist_schedule(mod: PrimeModulus, n: int, direction: str) -> TwistSchedule:
    """Seeds for the twist psi^(±(2j+1)c) joining column and row passes."""
    s = _sqrt_len(n)
    psi = pow(mod.root, mod.two_n // (2 * n), mod.q)
    if direction == "inverse":
        psi = pow(psi, -1, mod.q)
    ratios = np.array([pow(psi, 2 * j + 1, mod.q) for j in range(s)], dtype=U64)
    return TwistSchedule(mod=mod, start_values=np.ones(s, dtype=U64),
                         common_ratios=ratios)


def expand_twist(t: TwistSchedule, steps: int) -> np.ndarray:
    """Materialize `steps` columns of the twist table from its seeds."""
    r2 = np.array(t.mod.r2, dtype=U64)
    ratios_mont = mont_mul(t.common_ratios, r2, t.mod)
    out = np.empty((t.rows, steps), dtype=U64)
    col = t.start_values.astype(U64)
    for c in range(steps):
        out[:, c] = col
        col = mont_mul(col, ratios_mont, t.mod)
    return out


def _sqrt_len(n: int) -> int:
    s = 1 << ((n.bit_length() - 1) // 2)
    if s * s != n:
        raise ConfigurationError(f"four-step needs a square length, got {n}")
    return s


def _apply_twist(mat: np.ndarray, twist: TwistSchedule) -> np.ndarray:
    """Multiply mat[j, c] by start[j] * ratio[j]^c, one column at a time."""
    r2 = np.array(twist.mod.r2, dtype=U64)
    col_mont = mont_mul(twist.start_values, r2, twist.mod)
    ratios_mont = mont_mul(twist.common_ratios, r2, twist.mod)
    out = np.empty_like(mat)
    for c in range(mat.shape[1]):
        out[:, c] = mont_mul(mat[:, c], col_mont, twist.mod)
        col_mont = mont_mul(col_mont, ratios_mont, twist.mod)
    return out


def four_step_ntt(values: np.ndarray, mod: PrimeModulus, direction: str = "forward",
                  twist: TwistSchedule | None = None) -> np.ndarray:
    """Four-step evaluation of the same map as `ntt`, bit-identical output.

    Column pass: sqrt(n)-point negacyclic transforms (root psi^sqrt(n)).
    Twist: entry (j0, t0) gains psi^(±(2 j0 + 1) t0), rows expanded
    geometrically from the schedule seeds.  Row pass: sqrt(n)-point cyclic
    transforms (root psi^(2 sqrt(n))).
    """
    values = np.asarray(values, dtype=U64)
    n = values.shape[-1]
    s = _sqrt_len(n)
    psi = pow(mod.root, mod.two_n // (2 * n), mod.q)
    eta = pow(psi, s, mod.q)            # order 2s: column negacyclic root
    mu = pow(psi, 2 * s, mod.q)         # order s: row cyclic root
    if twist is None:
        twist = make_twist_schedule(mod, n, direction)

    if direction == "forward":
        mat = values.reshape(s, s)                        # [t1, t0]
        cols = ntt(mat.T.copy(), mod, "forward", n=s, psi=eta)   # [t0, j0]
        twisted = _apply_twist(cols.T.copy(), twist)      # [j0, t0]
        rows = cyclic_ntt(twisted, mod, "forward", psi=mu)       # [j0, j1]
        return rows.T.reshape(n).copy()                   # out[j1 * s + j0]
    if direction == "inverse":
        mat = values.reshape(s, s).T.copy()               # [j0, j1]
        rows = cyclic_ntt(mat, mod, "inverse", psi=mu)    # [j0, t0]
        untwisted = _apply_twist(rows, twist)
        cols = ntt(untwisted.T.copy(), mod, "inverse", n=s, psi=eta)  # [t0, t1]
        return cols.T.reshape(n).copy()
    raise ConfigurationError(f"unknown direction {direction!r}")

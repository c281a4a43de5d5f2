"""Word-level modular arithmetic over NTT-friendly primes.

All bulk arithmetic runs on uint64 numpy arrays.  Products of two sub-2^62
operands need 128 bits, which numpy lacks, so products are assembled from
32-bit halves into an explicit (hi, lo) pair and reduced with one of two
strategies:

* Montgomery (REDC) for paths where one operand is a precomputed constant
  (twiddles, base-conversion tables); the constant is stored in Montgomery
  form so each product costs a single REDC.
* Barrett with a precomputed floor(2^128 / q) for general data-by-data
  products (multiply-accumulate paths).

Both strategies return the canonical representative in [0, q) and agree
bitwise; tests cross-check them against wide-integer reference arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

U64 = np.uint64
MASK32 = U64(0xFFFFFFFF)
SHIFT32 = U64(32)

# Deterministic Miller-Rabin witnesses for all 64-bit integers.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 2^64."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def generate_ntt_primes(bits: int, count: int, two_n: int,
                        skip: tuple[int, ...] = ()) -> list[int]:
    """Largest `count` primes below 2^bits with q = 1 (mod two_n).

    Scanning downward keeps the set deterministic for a given request.
    """
    if bits < 2 or bits > 62:
        raise ConfigurationError(f"prime width {bits} outside supported 2..62")
    primes: list[int] = []
    q = ((1 << bits) - 1) // two_n * two_n + 1
    while len(primes) < count:
        if q < two_n + 1 or q.bit_length() < bits - 1:
            raise ConfigurationError(
                f"not enough {bits}-bit primes with q = 1 mod {two_n}")
        if q not in skip and is_prime(q):
            primes.append(q)
        q -= two_n
    return primes


def _find_2n_root(q: int, two_n: int) -> int:
    """Smallest-generator primitive two_n-th root of unity mod q."""
    if (q - 1) % two_n != 0:
        raise ConfigurationError(f"{q} is not 1 mod {two_n}")
    for g in range(2, q):
        root = pow(g, (q - 1) // two_n, q)
        # order divides two_n (a power of two); root^(two_n/2) = -1 pins it.
        if pow(root, two_n // 2, q) == q - 1:
            return root
    raise ConfigurationError(f"no primitive {two_n}-th root mod {q}")


@dataclass(frozen=True)
class PrimeModulus:
    """An NTT-friendly prime with cached reduction constants.

    `two_n` is the transform length the prime was generated for; `root` is a
    primitive two_n-th root of unity mod q.
    """

    q: int
    two_n: int
    root: int = 0
    # Montgomery: R = 2^64; neg_qinv = -q^{-1} mod R; r2 = R^2 mod q.
    neg_qinv: int = field(init=False)
    r2: int = field(init=False)
    # Barrett: (hi, lo) words of floor(2^128 / q).
    ratio_hi: int = field(init=False)
    ratio_lo: int = field(init=False)

    def __post_init__(self):
        q = self.q
        if q % 2 == 0 or q.bit_length() > 62:
            raise ConfigurationError(f"modulus {q} must be odd and < 2^62")
        if self.two_n and (q - 1) % self.two_n != 0:
            raise ConfigurationError(f"{q} != 1 mod {self.two_n}")
        root = self.root or _find_2n_root(q, self.two_n)
        if self.two_n:
            if pow(root, self.two_n // 2, q) != q - 1:
                raise ConfigurationError(f"{root} has wrong order mod {q}")
        object.__setattr__(self, "root", root)
        object.__setattr__(self, "neg_qinv", (-pow(q, -1, 1 << 64)) % (1 << 64))
        object.__setattr__(self, "r2", (1 << 128) % q)
        ratio = (1 << 128) // q
        object.__setattr__(self, "ratio_hi", ratio >> 64)
        object.__setattr__(self, "ratio_lo", ratio & ((1 << 64) - 1))

    @property
    def bit_width(self) -> int:
        return self.q.bit_length()

    def to_mont(self, x: int) -> int:
        """Scalar Montgomery-domain image x * 2^64 mod q."""
        return (x << 64) % self.q


def mulhi(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """High 64 bits of the 128-bit product."""
    with np.errstate(over="ignore"):
        a0 = a & MASK32
        a1 = a >> SHIFT32
        b0 = b & MASK32
        b1 = b >> SHIFT32
        ll = a0 * b0
        lh = a0 * b1
        hl = a1 * b0
        mid = (ll >> SHIFT32) + (lh & MASK32) + (hl & MASK32)
        return a1 * b1 + (lh >> SHIFT32) + (hl >> SHIFT32) + (mid >> SHIFT32)


def mul128(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Full 64x64 -> 128 product as (hi, lo) uint64 arrays."""
    with np.errstate(over="ignore"):
        return mulhi(a, b), a * b       # wrapping product is the exact low word


def shoup_mul(a: np.ndarray, w: np.ndarray, w_shoup: np.ndarray,
              mod: PrimeModulus) -> np.ndarray:
    """a * w mod q for a fixed multiplier with w_shoup = floor(w * 2^64 / q).

    The quotient estimate floor(a * w_shoup / 2^64) is off by at most one,
    so one high-word multiply, two wrapping multiplies, and a conditional
    subtract replace a full reduction.  Requires q < 2^63 and w < q.
    """
    q = U64(mod.q)
    with np.errstate(over="ignore"):
        quot = mulhi(a, w_shoup)
        r = a * w - quot * q                 # in [0, 2q)
        return np.minimum(r, r - q)


def _redc(hi: np.ndarray, lo: np.ndarray, mod: PrimeModulus) -> np.ndarray:
    """Montgomery reduction of a 128-bit value T < q * 2^64: T * 2^-64 mod q."""
    q = U64(mod.q)
    with np.errstate(over="ignore"):
        m = lo * U64(mod.neg_qinv)              # wrapping multiply mod 2^64
        # T + m*q has zero low word; its carry into the high word is (lo != 0).
        t = hi + mulhi(m, q) + np.minimum(lo, 1)
        return np.minimum(t, t - q)             # t < 2q


def mont_mul(a: np.ndarray, b_mont: np.ndarray, mod: PrimeModulus) -> np.ndarray:
    """a * b mod q where b_mont = b * 2^64 mod q is in Montgomery form."""
    hi, lo = mul128(np.asarray(a, dtype=U64), np.asarray(b_mont, dtype=U64))
    return _redc(hi, lo, mod)


def barrett_reduce128(hi: np.ndarray, lo: np.ndarray, mod: PrimeModulus) -> np.ndarray:
    """T mod q for a 128-bit T = hi * 2^64 + lo with T < q * 2^64."""
    q = U64(mod.q)
    r_lo = U64(mod.ratio_lo)
    r_hi = U64(mod.ratio_hi)
    with np.errstate(over="ignore"):
        # Quotient estimate floor(T * ratio / 2^128), off by at most one.
        carry = mulhi(lo, r_lo)
        p1_hi, p1_lo = mul128(lo, r_hi)
        tmp = p1_lo + carry
        round1_hi = p1_hi + (tmp < carry).astype(U64)
        p2_hi, p2_lo = mul128(hi, r_lo)
        tmp2 = tmp + p2_lo
        carry2 = p2_hi + (tmp2 < p2_lo).astype(U64)
        quot = hi * r_hi + round1_hi + carry2
        rem = lo - quot * q                      # wrapping, correct mod 2^64
        return np.minimum(rem, rem - q)          # rem < 2q


def barrett_mul(a: np.ndarray, b: np.ndarray, mod: PrimeModulus) -> np.ndarray:
    """General a * b mod q via Barrett reduction."""
    hi, lo = mul128(np.asarray(a, dtype=U64), np.asarray(b, dtype=U64))
    return barrett_reduce128(hi, lo, mod)


def mod_add(a: np.ndarray, b: np.ndarray, mod: PrimeModulus) -> np.ndarray:
    # s < 2q < 2^64; when s < q the wrapped s - q exceeds 2^63, so the
    # minimum picks the canonical representative without a boolean pass.
    q = U64(mod.q)
    s = np.asarray(a, dtype=U64) + np.asarray(b, dtype=U64)
    with np.errstate(over="ignore"):
        return np.minimum(s, s - q)


def mod_sub(a: np.ndarray, b: np.ndarray, mod: PrimeModulus) -> np.ndarray:
    q = U64(mod.q)
    d = np.asarray(a, dtype=U64) + (q - np.asarray(b, dtype=U64))
    with np.errstate(over="ignore"):
        return np.minimum(d, d - q)


def mod_neg(a: np.ndarray, mod: PrimeModulus) -> np.ndarray:
    q = U64(mod.q)
    d = q - np.asarray(a, dtype=U64)             # in (0, q]
    with np.errstate(over="ignore"):
        return np.minimum(d, d - q)


def mod_mul(a: np.ndarray, b: np.ndarray, mod: PrimeModulus,
            strategy: str = "barrett") -> np.ndarray:
    """a * b mod q under the chosen reduction strategy.

    Domain encodings are internal: both strategies take and return canonical
    representatives and produce bitwise-identical results.
    """
    if strategy == "barrett":
        return barrett_mul(a, b, mod)
    if strategy == "montgomery":
        b_mont = mont_mul(np.asarray(b, dtype=U64), U64(mod.r2 % mod.q), mod)
        return mont_mul(np.asarray(a, dtype=U64), b_mont, mod)
    raise ConfigurationError(f"unknown reduction strategy {strategy!r}")


def mod_pow_scalar(base: int, exp: int, mod: PrimeModulus) -> int:
    return pow(base, exp, mod.q)

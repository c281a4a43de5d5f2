"""RNS-CKKS scheme: parameters, keys, encoding, and homomorphic operators.

Levels count remaining rescales: a level-l ciphertext lives over the first
l+1 primes of the modulus chain, level 0 over the base prime alone.  Scales
are tracked as exact rationals; operators enforce exact scale equality for
additive mixing and leave rescaling to the caller.

Key-switching uses one fixed full-level key per switched element.  The
switched polynomial is cut into digit pieces of alpha limbs, each piece is
base-extended to the full current basis plus the auxiliary primes, and the
inner product with the key pairs is taken there; the gadget constants
T_i = P * (Q/Q_i) * ((Q/Q_i)^{-1} mod Q_i) make every base-extension slack
term vanish modulo the working modulus at every level, so one key serves
all levels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce

import numpy as np

from .embedding import packed_to_slots, slots_to_packed
from .errors import (BasisMismatchError, ConfigurationError,
                     LevelExhaustedError, MissingKeyError, ScaleMismatchError)
from .modmath import (U64, PrimeModulus, barrett_mul, generate_ntt_primes,
                      mod_sub)
from .ntt import ntt
from .rnspoly import (COEFF, EVAL, LimbBasis, RnsPolynomial, automorphism,
                      base_convert, crt_reconstruct, make_base_table,
                      poly_from_int_coeffs, rp_add, rp_mul, rp_neg,
                      rp_scalar_mul_per_limb, rp_sub)


@dataclass(frozen=True)
class NoiseBudgets:
    """Accepted relative error per operation class, used as test gates."""

    fresh: float = 2.0 ** -20
    multiply: float = 2.0 ** -12
    rotate_factor: float = 2.0      # grouped rotations vs. one-step baseline
    bootstrap: float = 2.0 ** -8


@dataclass(frozen=True)
class CkksParams:
    """Ring, chain, and noise configuration.

    Defaults give a desk-scale instance: ring degree 2^13, 64 message
    slots, 7 rescale levels over 40-bit primes under a 59-bit base, and
    four 60-bit auxiliary primes (two digit pieces at the top level).
    """

    n_ring: int = 8192
    n_slots: int = 64
    levels: int = 7
    alpha: int = 4
    scale_bits: int = 40
    q0_bits: int = 59
    aux_bits: int = 60
    sigma: float = 3.2
    budgets: NoiseBudgets = field(default_factory=NoiseBudgets)

    def __post_init__(self):
        for name in ("n_ring", "n_slots"):
            v = getattr(self, name)
            if v < 2 or v & (v - 1):
                raise ConfigurationError(f"{name} must be a power of two >= 2")
        if self.n_slots > self.n_ring // 2:
            raise ConfigurationError("n_slots cannot exceed n_ring / 2")
        if self.levels < 1 or self.alpha < 1:
            raise ConfigurationError("need at least one level and one aux prime")
        if not (self.scale_bits < self.q0_bits <= 60 and self.aux_bits <= 60):
            raise ConfigurationError("prime widths out of range")

    @property
    def scale(self) -> int:
        return 1 << self.scale_bits

    @property
    def dnum(self) -> int:
        return -(-(self.levels + 1) // self.alpha)

    def piece_count(self, level: int) -> int:
        return -(-(level + 1) // self.alpha)


@lru_cache(maxsize=None)
def _chains(params: CkksParams) -> tuple[tuple[PrimeModulus, ...],
                                         tuple[PrimeModulus, ...]]:
    two_n = 2 * params.n_ring
    base = generate_ntt_primes(params.q0_bits, 1, two_n)
    scale = generate_ntt_primes(params.scale_bits, params.levels, two_n,
                                skip=tuple(base))
    aux = generate_ntt_primes(params.aux_bits, params.alpha, two_n,
                              skip=tuple(base + scale))
    mods = tuple(PrimeModulus(q, two_n) for q in base + scale)
    auxm = tuple(PrimeModulus(q, two_n) for q in aux)
    return mods, auxm


def modulus_chain(params: CkksParams) -> tuple[PrimeModulus, ...]:
    return _chains(params)[0]


def aux_chain(params: CkksParams) -> tuple[PrimeModulus, ...]:
    return _chains(params)[1]


def basis_c(params: CkksParams, level: int) -> LimbBasis:
    if not 0 <= level <= params.levels:
        raise LevelExhaustedError(f"level {level} outside [0, {params.levels}]")
    return LimbBasis(modulus_chain(params)[:level + 1])


def basis_b(params: CkksParams) -> LimbBasis:
    return LimbBasis(aux_chain(params))


def basis_d(params: CkksParams, level: int) -> LimbBasis:
    return basis_c(params, level).concat(basis_b(params))


def piece_basis(params: CkksParams, i: int, level: int) -> LimbBasis:
    chain = modulus_chain(params)[:level + 1]
    lo = i * params.alpha
    if lo >= len(chain):
        raise ConfigurationError(f"piece {i} empty at level {level}")
    return LimbBasis(chain[lo:lo + params.alpha])


# ---------------------------------------------------------------------------
# Keys and text objects.

@dataclass
class SecretKey:
    params: CkksParams
    poly: RnsPolynomial          # eval rep over the full basis C_L + B


@dataclass
class Plaintext:
    poly: RnsPolynomial          # eval rep over C_level
    scale: Fraction
    level: int
    slots: int


@dataclass
class Ciphertext:
    c0: RnsPolynomial            # eval rep over C_level
    c1: RnsPolynomial
    scale: Fraction
    level: int
    slots: int

    def copy(self) -> "Ciphertext":
        return Ciphertext(self.c0.copy(), self.c1.copy(), self.scale,
                          self.level, self.slots)


@dataclass
class EvaluationKey:
    """Switching key for one secret: digit-piece pairs over C_L + B."""

    kind: str                    # "mult" or "rot"
    step: int                    # rotation amount; 0 for "mult"
    pieces: tuple[tuple[RnsPolynomial, RnsPolynomial], ...]


def restrict_poly(p: RnsPolynomial, basis: LimbBasis) -> RnsPolynomial:
    """Select the limb rows of `basis` out of a wider polynomial."""
    pos = {pm.q: i for i, pm in enumerate(p.basis)}
    try:
        rows = [pos[pm.q] for pm in basis]
    except KeyError as e:
        raise BasisMismatchError(f"prime {e} not present in source basis")
    return RnsPolynomial(basis, p.rep, p.limbs[rows])


# ---------------------------------------------------------------------------
# Sampling.

def sample_ternary(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(-1, 2, n, dtype=np.int64)


def sample_error(rng: np.random.Generator, n: int, sigma: float) -> np.ndarray:
    return np.rint(rng.normal(0.0, sigma, n)).astype(np.int64)


def sample_uniform(basis: LimbBasis, n: int,
                   rng: np.random.Generator) -> RnsPolynomial:
    limbs = np.empty((len(basis), n), dtype=U64)
    for i, pm in enumerate(basis):
        limbs[i] = rng.integers(0, pm.q, n, dtype=np.uint64)
    return RnsPolynomial(basis, EVAL, limbs)


def keygen(params: CkksParams, rng: np.random.Generator) -> SecretKey:
    s = sample_ternary(rng, params.n_ring)
    poly = poly_from_int_coeffs(s, basis_d(params, params.levels), rep=EVAL)
    return SecretKey(params, poly)


@lru_cache(maxsize=None)
def _gadget_constants(params: CkksParams, i: int) -> dict[int, int]:
    """T_i mod each prime of C_L + B for digit piece i."""
    chain = modulus_chain(params)
    big_q = reduce(lambda a, b: a * b.q, chain, 1)
    q_i = reduce(lambda a, b: a * b.q,
                 chain[i * params.alpha:(i + 1) * params.alpha], 1)
    big_p = reduce(lambda a, b: a * b.q, aux_chain(params), 1)
    q_hat = big_q // q_i
    t_i = big_p * q_hat * pow(q_hat % q_i, -1, q_i)
    return {pm.q: t_i % pm.q for pm in chain + aux_chain(params)}


def _make_switch_key(params: CkksParams, sk: SecretKey,
                     target: RnsPolynomial, rng: np.random.Generator,
                     kind: str, step: int) -> EvaluationKey:
    """Key pairs (b_i, a_i) with b_i = -a_i s + e_i + T_i * target."""
    full = basis_d(params, params.levels)
    pieces = []
    for i in range(params.dnum):
        a_i = sample_uniform(full, params.n_ring, rng)
        e_i = poly_from_int_coeffs(
            sample_error(rng, params.n_ring, params.sigma), full, rep=EVAL)
        masked = rp_scalar_mul_per_limb(target, _gadget_constants(params, i))
        b_i = rp_sub(rp_add(e_i, masked), rp_mul(a_i, sk.poly))
        pieces.append((b_i, a_i))
    return EvaluationKey(kind=kind, step=step, pieces=tuple(pieces))


def make_relin_key(params: CkksParams, sk: SecretKey,
                   rng: np.random.Generator) -> EvaluationKey:
    s_sq = rp_mul(sk.poly, sk.poly)
    return _make_switch_key(params, sk, s_sq, rng, "mult", 0)


def normalize_step(params: CkksParams, r: int) -> int:
    return r % (params.n_ring // 2)


def make_rotation_key(params: CkksParams, sk: SecretKey, r: int,
                      rng: np.random.Generator) -> EvaluationKey:
    r = normalize_step(params, r)
    if r == 0:
        raise ConfigurationError("rotation by zero needs no key")
    s_rot = automorphism(sk.poly, r)
    return _make_switch_key(params, sk, s_rot, rng, "rot", r)


def make_rotation_keys(params: CkksParams, sk: SecretKey, steps,
                       rng: np.random.Generator) -> dict[int, EvaluationKey]:
    out = {}
    for r in steps:
        r = normalize_step(params, r)
        if r and r not in out:
            out[r] = make_rotation_key(params, sk, r, rng)
    return out


# ---------------------------------------------------------------------------
# Encoding.

def encode(params: CkksParams, values, level: int | None = None,
           scale: int | Fraction | None = None) -> Plaintext:
    """Embed a complex vector as a scaled integer polynomial.

    Vectors shorter than n_ring/2 slots are replicated across the slot
    space; the inverse packed transform of a periodic vector lands on the
    matching subring, so short messages cost nothing extra.
    """
    level = params.levels if level is None else level
    scale = Fraction(params.scale if scale is None else scale)
    values = np.asarray(values, dtype=np.complex128)
    if values.ndim != 1:
        raise ConfigurationError("encode expects one vector")
    m = values.shape[0]
    half = params.n_ring // 2
    if m < 1 or half % m:
        raise ConfigurationError(f"slot count {m} must divide {half}")
    packed = slots_to_packed(np.tile(values, half // m))
    coeffs = np.concatenate([
        np.rint(packed.real * float(scale)),
        np.rint(packed.imag * float(scale))])
    if np.any(np.abs(coeffs) >= 2.0 ** 62):
        raise ConfigurationError("encoded coefficients overflow 62 bits")
    poly = poly_from_int_coeffs(coeffs.astype(np.int64),
                                basis_c(params, level), rep=EVAL)
    return Plaintext(poly=poly, scale=scale, level=level, slots=m)


def decode(params: CkksParams, pt: Plaintext) -> np.ndarray:
    coeffs = crt_reconstruct(pt.poly).astype(np.float64)
    half = params.n_ring // 2
    packed = (coeffs[:half] + 1j * coeffs[half:]) / float(pt.scale)
    return packed_to_slots(packed)[:pt.slots]


def encode_diagonal_batch(params: CkksParams, rows: np.ndarray, level: int,
                          scale: int | Fraction | None = None) -> list[Plaintext]:
    """Encode many full-slot vectors at once; one batched transform and one
    batched NTT per limb instead of per-row calls."""
    scale = Fraction(params.scale if scale is None else scale)
    rows = np.asarray(rows, dtype=np.complex128)
    half = params.n_ring // 2
    if rows.ndim != 2 or rows.shape[1] != half:
        raise ConfigurationError("diagonal batch must be (rows, n_ring/2)")
    packed = slots_to_packed(rows)
    coeffs = np.concatenate([np.rint(packed.real * float(scale)),
                             np.rint(packed.imag * float(scale))], axis=1)
    basis = basis_c(params, level)
    stacks = np.empty((len(basis), rows.shape[0], params.n_ring), dtype=U64)
    for i, pm in enumerate(basis):
        residues = (coeffs.astype(np.int64) % np.int64(pm.q)).astype(U64)
        stacks[i] = ntt(residues, pm, "forward")
    return [Plaintext(poly=RnsPolynomial(basis, EVAL, stacks[:, r].copy()),
                      scale=scale, level=level, slots=half)
            for r in range(rows.shape[0])]


# ---------------------------------------------------------------------------
# Encryption.

def encrypt(params: CkksParams, pt: Plaintext, sk: SecretKey,
            rng: np.random.Generator) -> Ciphertext:
    basis = basis_c(params, pt.level)
    a = sample_uniform(basis, params.n_ring, rng)
    e = poly_from_int_coeffs(sample_error(rng, params.n_ring, params.sigma),
                             basis, rep=EVAL)
    s = restrict_poly(sk.poly, basis)
    c0 = rp_add(rp_sub(e, rp_mul(a, s)), pt.poly)
    return Ciphertext(c0=c0, c1=a, scale=pt.scale, level=pt.level,
                      slots=pt.slots)


def decrypt(params: CkksParams, ct: Ciphertext, sk: SecretKey) -> Plaintext:
    s = restrict_poly(sk.poly, ct.c0.basis)
    poly = rp_add(ct.c0, rp_mul(ct.c1, s))
    return Plaintext(poly=poly, scale=ct.scale, level=ct.level, slots=ct.slots)


def slot_values(params: CkksParams, ct: Ciphertext, sk: SecretKey) -> np.ndarray:
    return decode(params, decrypt(params, ct, sk))


# ---------------------------------------------------------------------------
# Arithmetic.

def _check_add(a, b):
    if a.level != b.level:
        raise BasisMismatchError(f"levels differ: {a.level} vs {b.level}")
    if a.scale != b.scale:
        raise ScaleMismatchError(f"scales differ: {a.scale} vs {b.scale}")


def hadd(a: Ciphertext, b: Ciphertext) -> Ciphertext:
    _check_add(a, b)
    return Ciphertext(rp_add(a.c0, b.c0), rp_add(a.c1, b.c1), a.scale,
                      a.level, min(a.slots, b.slots))


def hsub(a: Ciphertext, b: Ciphertext) -> Ciphertext:
    _check_add(a, b)
    return Ciphertext(rp_sub(a.c0, b.c0), rp_sub(a.c1, b.c1), a.scale,
                      a.level, min(a.slots, b.slots))


def hneg(a: Ciphertext) -> Ciphertext:
    return Ciphertext(rp_neg(a.c0), rp_neg(a.c1), a.scale, a.level, a.slots)


def padd(ct: Ciphertext, pt: Plaintext) -> Ciphertext:
    _check_add(ct, pt)
    return Ciphertext(rp_add(ct.c0, pt.poly), ct.c1, ct.scale, ct.level,
                      ct.slots)


def pmult(ct: Ciphertext, pt: Plaintext) -> Ciphertext:
    if ct.level != pt.level:
        raise BasisMismatchError(f"levels differ: {ct.level} vs {pt.level}")
    return Ciphertext(rp_mul(ct.c0, pt.poly), rp_mul(ct.c1, pt.poly),
                      ct.scale * pt.scale, ct.level, ct.slots)


def _scalar_plaintext(params: CkksParams, z: complex, level: int,
                      scale: Fraction) -> Plaintext:
    """z = x + iy as the two-term polynomial round(x*s) + round(y*s) X^(N/2);
    X^(N/2) evaluates to i in every slot."""
    coeffs = np.zeros(params.n_ring, dtype=np.int64)
    coeffs[0] = int(round(z.real * float(scale)))
    coeffs[params.n_ring // 2] = int(round(z.imag * float(scale)))
    poly = poly_from_int_coeffs(coeffs, basis_c(params, level), rep=EVAL)
    return Plaintext(poly=poly, scale=scale, level=level,
                     slots=params.n_ring // 2)


def cadd(params: CkksParams, ct: Ciphertext, z: complex) -> Ciphertext:
    return padd(ct, _scalar_plaintext(params, complex(z), ct.level, ct.scale))


def cmult(params: CkksParams, ct: Ciphertext, z: complex,
          scale: int | Fraction | None = None) -> Ciphertext:
    scale = Fraction(params.scale if scale is None else scale)
    return pmult(ct, _scalar_plaintext(params, complex(z), ct.level, scale))


# ---------------------------------------------------------------------------
# Key switching and the operators built on it.

def key_switch(params: CkksParams, d: RnsPolynomial,
               evk: EvaluationKey) -> tuple[RnsPolynomial, RnsPolynomial]:
    """Switch the secret under `d` (eval rep over C_level) using `evk`."""
    level = len(d.basis) - 1
    c_basis = basis_c(params, level)
    if d.basis != c_basis:
        raise BasisMismatchError("switched polynomial is not over C_level")
    b_basis = basis_b(params)
    d_basis = basis_d(params, level)
    d_coeff = d.to_coeff()

    acc0 = acc1 = None
    for i in range(params.piece_count(level)):
        src = piece_basis(params, i, level)
        own = restrict_poly(d_coeff, src)
        rest = LimbBasis(tuple(pm for pm in d_basis.primes
                               if pm not in src.primes))
        ext = base_convert(own, make_base_table(src, rest)).to_eval()
        limbs = np.empty((len(d_basis), params.n_ring), dtype=U64)
        pos_own = {pm.q: j for j, pm in enumerate(src)}
        pos_ext = {pm.q: j for j, pm in enumerate(rest)}
        own_eval = restrict_poly(d, src)
        for j, pm in enumerate(d_basis):
            if pm.q in pos_own:
                limbs[j] = own_eval.limbs[pos_own[pm.q]]
            else:
                limbs[j] = ext.limbs[pos_ext[pm.q]]
        piece = RnsPolynomial(d_basis, EVAL, limbs)
        b_i = restrict_poly(evk.pieces[i][0], d_basis)
        a_i = restrict_poly(evk.pieces[i][1], d_basis)
        t0 = rp_mul(piece, b_i)
        t1 = rp_mul(piece, a_i)
        acc0 = t0 if acc0 is None else rp_add(acc0, t0)
        acc1 = t1 if acc1 is None else rp_add(acc1, t1)

    inv_p = {pm.q: pow(basis_b(params).modulus % pm.q, -1, pm.q)
             for pm in c_basis}
    table_bc = make_base_table(b_basis, c_basis)

    def mod_down(acc: RnsPolynomial) -> RnsPolynomial:
        cpart = restrict_poly(acc, c_basis)
        bpart = restrict_poly(acc, b_basis)
        corr = base_convert(bpart.to_coeff(), table_bc).to_eval()
        return rp_scalar_mul_per_limb(rp_sub(cpart, corr), inv_p)

    return mod_down(acc0), mod_down(acc1)


def hmult(params: CkksParams, a: Ciphertext, b: Ciphertext,
          evk: EvaluationKey) -> Ciphertext:
    if evk.kind != "mult":
        raise MissingKeyError("relinearization key required")
    if a.level != b.level:
        raise BasisMismatchError(f"levels differ: {a.level} vs {b.level}")
    d0 = rp_mul(a.c0, b.c0)
    d1 = rp_add(rp_mul(a.c0, b.c1), rp_mul(a.c1, b.c0))
    d2 = rp_mul(a.c1, b.c1)
    k0, k1 = key_switch(params, d2, evk)
    return Ciphertext(rp_add(d0, k0), rp_add(d1, k1), a.scale * b.scale,
                      a.level, min(a.slots, b.slots))


def hrot(params: CkksParams, ct: Ciphertext, r: int,
         evk: EvaluationKey) -> Ciphertext:
    """Rotate slot contents left by r places."""
    r = normalize_step(params, r)
    if r == 0:
        return ct
    if evk.kind != "rot" or evk.step != r:
        raise MissingKeyError(f"no rotation key for step {r}")
    r0 = automorphism(ct.c0, r)
    r1 = automorphism(ct.c1, r)
    k0, k1 = key_switch(params, r1, evk)
    return Ciphertext(rp_add(r0, k0), k1, ct.scale, ct.level, ct.slots)


@lru_cache(maxsize=None)
def _rescale_inverses(params: CkksParams, level: int) -> dict[int, int]:
    chain = modulus_chain(params)
    qt = chain[level].q
    return {pm.q: pow(qt % pm.q, -1, pm.q) for pm in chain[:level]}


def _rescale_poly(params: CkksParams, p: RnsPolynomial,
                  level: int) -> RnsPolynomial:
    """(p - [p]_{q_level}) / q_level over the shrunken basis."""
    chain = modulus_chain(params)
    qt = chain[level]
    coeff = p.to_coeff()
    last = coeff.limbs[level]
    # Centered lift of the dropped limb keeps the rounding error at most
    # half a unit.
    lifted = last.astype(np.int64) - np.where(
        last > qt.q // 2, np.int64(qt.q), np.int64(0))
    out_basis = basis_c(params, level - 1)
    limbs = np.empty((level, params.n_ring), dtype=U64)
    inv = _rescale_inverses(params, level)
    for i, pm in enumerate(out_basis):
        red = (lifted % np.int64(pm.q)).astype(U64)
        diff = mod_sub(coeff.limbs[i], red, pm)
        limbs[i] = barrett_mul(diff, np.array(inv[pm.q], dtype=U64), pm)
    return RnsPolynomial(out_basis, COEFF, limbs).to_eval()


def hrescale(params: CkksParams, ct: Ciphertext) -> Ciphertext:
    if ct.level == 0:
        raise LevelExhaustedError("cannot rescale below the base prime")
    qt = modulus_chain(params)[ct.level].q
    return Ciphertext(_rescale_poly(params, ct.c0, ct.level),
                      _rescale_poly(params, ct.c1, ct.level),
                      ct.scale / qt, ct.level - 1, ct.slots)


def mod_drop(params: CkksParams, ct: Ciphertext, level: int) -> Ciphertext:
    """Forget limbs above `level`; scale and plaintext are unchanged."""
    if level > ct.level:
        raise LevelExhaustedError(f"cannot raise {ct.level} to {level}")
    basis = basis_c(params, level)
    return Ciphertext(restrict_poly(ct.c0, basis), restrict_poly(ct.c1, basis),
                      ct.scale, level, ct.slots)

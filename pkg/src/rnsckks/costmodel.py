"""Analytical cost model for RNS-CKKS key-switching workloads.

Everything in this module is closed-form arithmetic over parameter
profiles; no ciphertext is touched.  The unit of compute is one modular
multiplication (modular additions and reductions ride along for free)
and the unit of traffic is one off-chip byte; arithmetic intensity is
the quotient of the two.

The traffic model for homomorphic (I)DFT passes assumes a device whose
on-chip memory holds the working ciphertext and rotation state, so
off-chip traffic consists of switching keys and plaintext constants
only.  Keys and plaintexts are sized at the working level: a rotation
key consulted at level l contributes dnum_l * 2 * (alpha + l + 1) * N
words, where dnum_l = ceil((l + 1) / alpha) is the number of gadget
pieces that carry data at that level, and a full plaintext contributes
(l + 1) * N words.  The on-the-fly extension variant loads one word per
coefficient instead, cutting plaintext traffic by a factor of l + 1 at
the price of the forward transforms that rebuild the missing limbs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

from .errors import ConfigurationError

VARIANTS = ("baseline", "minks", "minks-oflimb")

POLICY_ALTERNATING = "alternating"
POLICY_LIMB_WISE = "limb_wise_only"


# ---------------------------------------------------------------------------
# Profiles.

@dataclass(frozen=True)
class ParamProfile:
    """Scheme shape of one published or local configuration.

    `L_boot` is the level a freshly bootstrapped ciphertext comes back
    at, or None for configurations that never bootstrap packed data.
    `n` is the slot count the configuration refreshes at a time.
    """

    name: str
    N: int
    L: int
    dnum: int
    alpha: int
    n: int
    L_boot: int | None = None
    word_bytes: int = 8

    def __post_init__(self):
        if self.N < 2 or self.N & (self.N - 1):
            raise ConfigurationError("N must be a power of two")
        if self.alpha * self.dnum != self.L + 1:
            raise ConfigurationError("alpha * dnum must equal L + 1")
        if not 1 <= self.n <= self.N // 2:
            raise ConfigurationError("slot count out of range")
        if self.word_bytes <= 0:
            raise ConfigurationError("word_bytes must be positive")
        if self.L_boot is not None and not 0 <= self.L_boot <= self.L:
            raise ConfigurationError("L_boot out of range")

    def dnum_at(self, level: int) -> int:
        if not 0 <= level <= self.L:
            raise ConfigurationError(f"level {level} out of range")
        return -(-(level + 1) // self.alpha)


@dataclass(frozen=True)
class MachineProfile:
    """Accelerator envelope: multipliers, clock, and memory system."""

    name: str
    modular_multiplier_count: int
    clock_hz: float
    offchip_bandwidth_bytes_per_s: float
    onchip_capacity_bytes: int

    def __post_init__(self):
        for fname in ("modular_multiplier_count", "clock_hz",
                      "offchip_bandwidth_bytes_per_s",
                      "onchip_capacity_bytes"):
            if getattr(self, fname) <= 0:
                raise ConfigurationError(f"{fname} must be positive")


PROFILES = {
    "desk": ParamProfile("desk", N=1 << 13, L=7, dnum=2, alpha=4,
                         n=64, L_boot=0),
    "lattigo": ParamProfile("lattigo", N=1 << 16, L=24, dnum=5, alpha=5,
                            n=1 << 15, L_boot=15),
    "100x": ParamProfile("100x", N=1 << 17, L=29, dnum=3, alpha=10,
                         n=1 << 16, L_boot=19),
    "f1": ParamProfile("f1", N=1 << 14, L=15, dnum=16, alpha=1,
                       n=1, L_boot=None, word_bytes=4),
    "ark": ParamProfile("ark", N=1 << 16, L=23, dnum=4, alpha=6,
                        n=1 << 15, L_boot=15),
}

# A dense-multiplier design scaled up to bootstrappable ring sizes,
# used as the reference point for utilization bounds.
SCALED_F1 = MachineProfile("scaled-f1",
                           modular_multiplier_count=40960,
                           clock_hz=1e9,
                           offchip_bandwidth_bytes_per_s=3e12,
                           onchip_capacity_bytes=64 << 20)


# ---------------------------------------------------------------------------
# Static data sizes.

class DataSizes(NamedTuple):
    plaintext_bytes: int
    ciphertext_bytes: int
    evk_bytes: int


def data_sizes(p: ParamProfile) -> DataSizes:
    """Full-level object sizes: plaintext, ciphertext, switching key."""
    pt = (p.L + 1) * p.N * p.word_bytes
    evk = p.dnum * 2 * (p.alpha + p.L + 1) * p.N * p.word_bytes
    return DataSizes(pt, 2 * pt, evk)


def evk_bytes_at(p: ParamProfile, level: int) -> int:
    """Bytes of one switching key consulted at the given level."""
    d = p.dnum_at(level)
    return d * 2 * (p.alpha + level + 1) * p.N * p.word_bytes


def plaintext_bytes_at(p: ParamProfile, level: int) -> int:
    return (level + 1) * p.N * p.word_bytes


def twist_words_avoided(p: ParamProfile) -> int:
    """Words of twisting factors a full-basis transform pass would load.

    Negacyclic transforms fold the order-2N twist into their butterfly
    sweep, so generating twiddles on the fly spares one forward and one
    inverse table per limb across the extended basis.
    """
    return 2 * (p.alpha + p.L + 1) * p.N


# ---------------------------------------------------------------------------
# Key-switching compute.

class KeySwitchMults(NamedTuple):
    """Modular-mult count of one key-switching, split by kernel."""
    ntt: int
    bconv: int
    elementwise: int

    @property
    def total(self) -> int:
        return self.ntt + self.bconv + self.elementwise

    @property
    def ntt_share(self) -> float:
        return self.ntt / self.total

    @property
    def bconv_share(self) -> float:
        return self.bconv / self.total


def _butterflies(N: int) -> int:
    # One limb transform, counting butterfly mults only.
    return (N // 2) * N.bit_length() - (N // 2)


def keyswitch_mults(p: ParamProfile, level: int) -> KeySwitchMults:
    """Closed-form mult count of one key-switching at a working level.

    Each of the dnum_l input pieces is taken to coefficient form on its
    own alpha limbs and re-extended over the remaining level + 1 limbs;
    the two output polynomials each run the same routine to shed the
    auxiliary limbs.  That gives (dnum_l + 2) * (alpha + level + 1) limb
    transforms.  Each base conversion scales its alpha source limbs and
    feeds an alpha by (level + 1) accumulation per coefficient.  The
    element-wise part is the key inner product over the extended basis
    plus the final per-limb scaling of both outputs.
    """
    d = p.dnum_at(level)
    limbs = p.alpha + level + 1
    ntt = (d + 2) * limbs * _butterflies(p.N)
    bconv = (d + 2) * p.alpha * (level + 2) * p.N
    elementwise = 2 * d * limbs * p.N + 2 * (level + 1) * p.N
    return KeySwitchMults(ntt, bconv, elementwise)


def pmult_mults(p: ParamProfile, level: int) -> int:
    # Plaintext times both ciphertext polynomials, level + 1 limbs each.
    return 2 * (level + 1) * p.N


def rescale_mults(p: ParamProfile, level: int) -> int:
    # Per polynomial: invert the dropped limb, re-extend it across the
    # remaining limbs, and scale each by the dropped prime's inverse.
    return 2 * ((level + 1) * _butterflies(p.N) + level * p.N)


# ---------------------------------------------------------------------------
# Homomorphic (I)DFT pass costs.

@dataclass(frozen=True)
class PassShape:
    """Shape of one merged-radix transform pass, enough to cost it.

    `levels` lists each iteration's working level in execution order;
    every iteration ends in a rescale, so consecutive entries drop by
    one.  `direction` decides where the grouped variants spend their
    single residual fix-up rotation: first iteration for "dft", last
    for "idft".
    """

    direction: str
    size: int
    k: int
    k1: int
    k2: int
    levels: tuple[int, ...]

    def __post_init__(self):
        if self.direction not in ("dft", "idft"):
            raise ConfigurationError("direction must be dft or idft")
        if self.size < 2 or self.size & (self.size - 1):
            raise ConfigurationError("size must be a power of two")
        n_bits = self.size.bit_length() - 1
        if n_bits % self.k:
            raise ConfigurationError("k must divide log2(size)")
        if self.k1 + self.k2 != self.k + 1:
            raise ConfigurationError("split must satisfy k1 + k2 = k + 1")
        if len(self.levels) != n_bits // self.k:
            raise ConfigurationError("one level per iteration required")
        for a, b in zip(self.levels, self.levels[1:]):
            if b != a - 1:
                raise ConfigurationError("levels must descend by one")

    @property
    def iterations(self) -> int:
        return len(self.levels)

    @classmethod
    def from_plan(cls, plan) -> "PassShape":
        return cls(plan.direction, plan.size, plan.k, plan.k1, plan.k2,
                   tuple(st.level for st in plan.stages))


def bootstrap_pass_shapes(p: ParamProfile, k: int, split: tuple[int, int],
                          dft_floor: int = 2) -> tuple[PassShape, PassShape]:
    """Default slot-to-coefficient schedules around a bootstrap.

    The inverse transform runs right after the raise, starting at the
    top level; the forward transform runs at the bottom of the modulus
    chain, finishing at `dft_floor`, so its plaintexts and keys stay
    small.
    """
    size = p.N // 2
    iters = (size.bit_length() - 1) // k
    k1, k2 = split
    idft = PassShape("idft", size, k, k1, k2,
                     tuple(range(p.L, p.L - iters, -1)))
    dft = PassShape("dft", size, k, k1, k2,
                    tuple(range(dft_floor + iters - 1, dft_floor - 1, -1)))
    return idft, dft


@dataclass(frozen=True)
class StageCost:
    level: int
    evk_loads: int
    evk_bytes: int
    plaintext_bytes: int
    modular_mults: int


@dataclass(frozen=True)
class CostReport:
    """Off-chip traffic and compute of one transform pass."""

    variant: str
    evk_bytes: int
    plaintext_bytes: int
    ciphertext_bytes: int
    twist_bytes: int
    modular_mults: int
    evk_loads: int
    stages: tuple[StageCost, ...]

    @property
    def offchip_bytes(self) -> int:
        return (self.evk_bytes + self.plaintext_bytes
                + self.ciphertext_bytes + self.twist_bytes)

    @property
    def ops_per_byte(self) -> float:
        if self.offchip_bytes == 0:
            return 0.0
        return self.modular_mults / self.offchip_bytes


def _stage_rotations(shape: PassShape, variant: str) -> int:
    # Performed rotations per iteration: the grouped variants drop the
    # pre-rotation; the baseline giant step skips its zero cell.
    babies = (1 << shape.k1) - 1
    giants = (1 << shape.k2) - 1
    return babies + giants + (1 if variant == "baseline" else 0)


def _stage_loads(shape: PassShape, variant: str) -> int:
    # Distinct key ids per iteration under nominal accounting.
    if variant == "baseline":
        return (1 << shape.k1) + (1 << shape.k2) - 1
    return 2


def hdft_pass_cost(shape: PassShape, p: ParamProfile, variant: str,
                   usage=None) -> CostReport:
    """Cost one homomorphic (I)DFT pass at a profile.

    Without a usage log the pass is costed from the schedule's nominal
    counts.  With one, key loads and performed rotations come from the
    log's entries for `shape.direction`, so a report built from a real
    run reproduces the measured working set exactly.
    """
    if variant not in VARIANTS:
        raise ConfigurationError(f"unknown variant {variant!r}")
    if usage is not None:
        logged = usage.loads_by_stage(shape.direction)
        if sorted(logged) != list(range(shape.iterations)):
            raise ConfigurationError("usage log does not cover the pass")

    diagonals = (1 << (shape.k + 1)) - 1
    fix_stage = 0 if shape.direction == "dft" else shape.iterations - 1
    stages = []
    for s, level in enumerate(shape.levels):
        if usage is None:
            loads = _stage_loads(shape, variant)
            rotations = _stage_rotations(shape, variant)
            if variant != "baseline" and s == fix_stage:
                rotations += 1
        else:
            loads = logged[s]
            rotations = sum(1 for e in usage.entries
                            if e.transform == shape.direction
                            and e.stage == s and e.op == "hrot"
                            and e.performed)
        mults = (rotations * keyswitch_mults(p, level).total
                 + diagonals * pmult_mults(p, level)
                 + rescale_mults(p, level))
        pt_bytes = diagonals * (p.N * p.word_bytes
                                if variant == "minks-oflimb"
                                else plaintext_bytes_at(p, level))
        if variant == "minks-oflimb":
            mults += diagonals * (level + 1) * _butterflies(p.N)
        stages.append(StageCost(level, loads, loads * evk_bytes_at(p, level),
                                pt_bytes, mults))

    return CostReport(
        variant=variant,
        evk_bytes=sum(st.evk_bytes for st in stages),
        plaintext_bytes=sum(st.plaintext_bytes for st in stages),
        ciphertext_bytes=0,
        twist_bytes=0,
        modular_mults=sum(st.modular_mults for st in stages),
        evk_loads=sum(st.evk_loads for st in stages),
        stages=tuple(stages),
    )


# ---------------------------------------------------------------------------
# Derived metrics.

def utilization_bound(m: MachineProfile, single_use_bytes: float,
                      workload_mults: float) -> float:
    """Fraction of multiplier capacity a bandwidth-bound pass can use.

    Loading the single-use data takes bytes / bandwidth seconds; the
    multipliers could retire count * clock * time mults in that window,
    and the workload only has `workload_mults` to offer.
    """
    if single_use_bytes <= 0 or workload_mults <= 0:
        raise ConfigurationError("inputs must be positive")
    load_time = single_use_bytes / m.offchip_bandwidth_bytes_per_s
    capacity = m.modular_multiplier_count * m.clock_hz * load_time
    return min(1.0, workload_mults / capacity)


def distribution_transfer(p: ParamProfile, policy: str) -> int:
    """Words moved between compute clusters per key-switching.

    Alternating coefficient- and limb-wise layouts pays one all-to-all
    per base-conversion routine; staying limb-wise pays two all-to-alls
    of the full extended working set at the accumulation instead.
    """
    words = (p.alpha + p.L + 1) * p.N
    if policy == POLICY_ALTERNATING:
        return (p.dnum + 2) * words
    if policy == POLICY_LIMB_WISE:
        return 2 * p.dnum * words
    raise ConfigurationError(f"unknown policy {policy!r}")


def tas_metric(t_boot: float, t_mult: Callable[[int], float],
               p: ParamProfile) -> float:
    """Amortized multiply time per slot.

    One bootstrap buys L - L_boot rescale levels across n slots, so the
    cost of the bootstrap plus one multiply per recovered level, spread
    over every level of every slot, prices the scheme's throughput.
    """
    if p.L_boot is None or p.L <= p.L_boot:
        raise ConfigurationError("profile must recover at least one level")
    depth = p.L - p.L_boot
    total = t_boot + sum(t_mult(level) for level in range(1, depth + 1))
    return total / depth / p.n


# ---------------------------------------------------------------------------
# Report records.

def report_records(label: str, report: CostReport) -> list[tuple]:
    """Flatten a report into (metric, variant, value, unit) records."""
    rec = [
        ("evk_bytes", report.variant, report.evk_bytes, "B"),
        ("plaintext_bytes", report.variant, report.plaintext_bytes, "B"),
        ("offchip_bytes", report.variant, report.offchip_bytes, "B"),
        ("modular_mults", report.variant, report.modular_mults, "mult"),
        ("evk_loads", report.variant, report.evk_loads, "key"),
        ("ops_per_byte", report.variant,
         round(report.ops_per_byte, 4), "mult/B"),
    ]
    return [(f"{label}.{m}", v, val, unit) for m, v, val, unit in rec]

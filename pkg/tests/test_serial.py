"""Container formats: roundtrips, corruption detection, determinism."""

from fractions import Fraction

import numpy as np
import pytest

from rnsckks.ckks import (decrypt, encode, encrypt, make_rotation_key,
                          slot_values)
from rnsckks.errors import SerializationError
from rnsckks.hdft import IDFT, EvkUsageLog, build_dft_plan
from rnsckks.serial import (EVKLOG_SCHEMA, PARAMS_SCHEMA, PlanSeeds,
                            load_ciphertext, load_evaluation_key,
                            load_plaintext, load_plan_seeds, load_secret_key,
                            read_params, read_usage_log, save_ciphertext,
                            save_evaluation_key, save_plaintext,
                            save_plan_seeds, save_secret_key, write_params,
                            write_usage_log)


def message(params, rng):
    return (rng.uniform(-1, 1, params.n_slots)
            + 1j * rng.uniform(-1, 1, params.n_slots))


@pytest.fixture()
def ct(params, sk):
    rng = np.random.default_rng(111)
    return encrypt(params, encode(params, message(params, rng)), sk, rng)


# ---------------------------------------------------------------------------
# Roundtrips.

def test_plaintext_roundtrip(params, tmp_path):
    pt = encode(params, message(params, np.random.default_rng(113)),
                level=5, scale=Fraction(3, 2) * (1 << 40))
    path = str(tmp_path / "m.pt")
    save_plaintext(path, pt)
    back = load_plaintext(path)
    assert back.scale == pt.scale            # exact Fraction survives
    assert (back.level, back.slots) == (pt.level, pt.slots)
    assert back.poly.basis == pt.poly.basis
    assert back.poly.rep == pt.poly.rep
    assert np.array_equal(back.poly.limbs, pt.poly.limbs)


def test_ciphertext_roundtrip(params, sk, ct, tmp_path):
    path = str(tmp_path / "m.ct")
    save_ciphertext(path, ct)
    back = load_ciphertext(path)
    assert back.scale == ct.scale
    assert np.array_equal(back.c0.limbs, ct.c0.limbs)
    assert np.array_equal(back.c1.limbs, ct.c1.limbs)
    assert np.array_equal(slot_values(params, back, sk),
                          slot_values(params, ct, sk))


def test_secret_key_roundtrip(params, sk, tmp_path):
    path = str(tmp_path / "s.key")
    save_secret_key(path, sk)
    back = load_secret_key(path, params)
    assert back.params is params
    assert np.array_equal(back.poly.limbs, sk.poly.limbs)


def test_secret_key_checks_ring_degree(params, tiny_params, tiny_sk,
                                       tmp_path):
    path = str(tmp_path / "tiny.key")
    save_secret_key(path, tiny_sk)
    load_secret_key(path, tiny_params)
    with pytest.raises(SerializationError, match="ring degree"):
        load_secret_key(path, params)


def test_evaluation_key_roundtrip(params, sk, relin, tmp_path):
    rot = make_rotation_key(params, sk, 3, np.random.default_rng(127))
    for name, evk in (("r.evk", relin), ("rot3.evk", rot)):
        path = str(tmp_path / name)
        save_evaluation_key(path, evk)
        back = load_evaluation_key(path)
        assert (back.kind, back.step) == (evk.kind, evk.step)
        assert len(back.pieces) == len(evk.pieces)
        for (b0, a0), (b1, a1) in zip(back.pieces, evk.pieces):
            assert np.array_equal(b0.limbs, b1.limbs)
            assert np.array_equal(a0.limbs, a1.limbs)


def test_plan_seeds_roundtrip(params, tmp_path):
    plan = build_dft_plan(params, IDFT, size=16, k=2, split=(1, 2),
                          levels=[5, 4])
    path = str(tmp_path / "plan.seeds")
    save_plan_seeds(path, plan)
    seeds = load_plan_seeds(path)
    assert isinstance(seeds, PlanSeeds)
    assert (seeds.direction, seeds.size, seeds.k) == (IDFT, 16, 2)
    assert (seeds.k1, seeds.k2) == (1, 2)
    assert seeds.const_scale == Fraction(plan.const_scale)
    consts = plan.stage_constants("minks-oflimb")
    assert len(seeds.stages) == len(plan.stages)
    for st, seed_st, cells in zip(plan.stages, seeds.stages, consts):
        assert (seed_st.level, seed_st.g) == (st.level, st.g)
        assert seed_st.minks_roll == st.minks_roll
        assert seed_st.center_only == st.center_only
        assert sorted(seed_st.cells) == sorted(cells)
        for key, got in seed_st.cells.items():
            want = cells[key]
            assert got.scale == want.scale
            assert got.tag == want.tag
            assert got.q0_limb.dtype == np.int64
            assert np.array_equal(got.q0_limb, want.q0_limb)


def test_serialization_is_deterministic(params, ct, tmp_path):
    a, b = str(tmp_path / "a.ct"), str(tmp_path / "b.ct")
    save_ciphertext(a, ct)
    save_ciphertext(b, ct)
    assert open(a, "rb").read() == open(b, "rb").read()


# ---------------------------------------------------------------------------
# Corruption.

def test_flipped_byte_names_the_file(params, ct, tmp_path):
    path = str(tmp_path / "corrupt.ct")
    save_ciphertext(path, ct)
    raw = bytearray(open(path, "rb").read())
    raw[len(raw) // 2] ^= 0x40
    open(path, "wb").write(bytes(raw))
    with pytest.raises(SerializationError, match="corrupt.ct") as info:
        load_ciphertext(path)
    assert "checksum" in str(info.value)


def test_truncation_detected(params, ct, tmp_path):
    path = str(tmp_path / "short.ct")
    save_ciphertext(path, ct)
    raw = open(path, "rb").read()
    open(path, "wb").write(raw[:len(raw) - 9])
    with pytest.raises(SerializationError):
        load_ciphertext(path)
    open(path, "wb").write(raw[:11])
    with pytest.raises(SerializationError, match="header"):
        load_ciphertext(path)


def test_bad_magic_and_kind_mismatch(params, ct, tmp_path):
    path = str(tmp_path / "odd.ct")
    save_ciphertext(path, ct)
    raw = bytearray(open(path, "rb").read())
    with pytest.raises(SerializationError, match="expected plaintext"):
        load_plaintext(path)
    raw[0] ^= 0xFF
    open(path, "wb").write(bytes(raw))
    with pytest.raises(SerializationError, match="magic"):
        load_ciphertext(path)


def test_trailing_garbage_detected(params, ct, tmp_path):
    import struct
    import zlib
    path = str(tmp_path / "long.ct")
    save_ciphertext(path, ct)
    raw = open(path, "rb").read()
    head, body = raw[:16], raw[16:] + b"\x00" * 8
    head = head[:12] + struct.pack("<I", zlib.crc32(body))
    open(path, "wb").write(head + body)
    with pytest.raises(SerializationError, match="trailing"):
        load_ciphertext(path)


# ---------------------------------------------------------------------------
# Parameter files.

def test_params_file_roundtrip(params, tmp_path):
    path = str(tmp_path / "params.txt")
    write_params(path, params, seed=12345)
    first = open(path).read()
    assert first.splitlines()[0] == PARAMS_SCHEMA
    back, seed = read_params(path)
    assert back == params
    assert seed == 12345
    write_params(path, params)
    again, no_seed = read_params(path)
    assert again == params and no_seed is None


def test_params_file_expresses_digit_count(tmp_path):
    path = str(tmp_path / "params.txt")
    path2 = str(tmp_path / "p2.txt")
    open(path, "w").write("n_ring = 64\nn_slots = 4\nlevels = 5\ndnum = 2\n")
    back, _ = read_params(path)
    assert back.alpha == 3 and back.dnum == 2
    open(path2, "w").write("levels = 5\ndnum = 4\n")
    with pytest.raises(SerializationError, match="divide"):
        read_params(path2)


@pytest.mark.parametrize("line,what", [
    ("n_ring 8192", "expected key = value"),
    ("edges = 3", "unknown key"),
    ("levels = seven", "malformed value"),
    ("n_slots = 8192", "invalid parameters"),
])
def test_params_file_rejects_bad_lines(tmp_path, line, what):
    path = str(tmp_path / "bad.txt")
    open(path, "w").write(PARAMS_SCHEMA + "\n" + line + "\n")
    with pytest.raises(SerializationError, match=what):
        read_params(path)


def test_params_file_missing(tmp_path):
    with pytest.raises(SerializationError, match="cannot read"):
        read_params(str(tmp_path / "absent.txt"))


# ---------------------------------------------------------------------------
# Usage logs.

def test_usage_log_roundtrip(tmp_path):
    log = EvkUsageLog()
    log.note_rotation("idft", 0, 64, 64)
    log.note_rotation("idft", 0, 128, 64)
    log.note_rotation("idft", 0, -256, -256, performed=False)
    log.note_pmult("idft", 0, count=3)
    log.note_rotation("dft", 1, 8, 8)
    path = str(tmp_path / "ops.evklog")
    write_usage_log(path, log)
    assert open(path).read().splitlines()[0] == EVKLOG_SCHEMA
    back = read_usage_log(path)
    assert back.entries == log.entries
    assert back.loads("idft") == log.loads("idft") == 2
    assert back.reuses("idft") == 1
    # The dedup set is rebuilt, so appending keeps classifying correctly.
    back.note_rotation("idft", 0, 192, 64)
    assert back.entries[-1].kind == "reuse"


@pytest.mark.parametrize("body,what", [
    ("", "schema"),
    ("hrot idft 0 64 64 load", "expected 7 fields"),
    ("spin idft 0 64 64 load 1", "malformed record"),
    ("hrot idft zero 64 64 load 1", "malformed numbers"),
])
def test_usage_log_rejects_malformed(tmp_path, body, what):
    path = str(tmp_path / "bad.evklog")
    text = body if body == "" else EVKLOG_SCHEMA + "\n" + body + "\n"
    open(path, "w").write(text)
    with pytest.raises(SerializationError, match=what):
        read_usage_log(path)

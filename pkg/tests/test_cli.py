"""End-to-end exercises of the command-line harness.

Every command runs as a subprocess (``python -m rnsckks.cli ...``) so the
tests observe exactly what a shell user would: the stdout report, stderr
notes, and the exit status.  Report lines are pinned byte-for-byte where
the contract promises determinism under a fixed seed.
"""

from __future__ import annotations

import os
import re
import subprocess
import sys

import pytest

from rnsckks import serial
from rnsckks.ckks import CkksParams


def run_cli(*args: str, timeout: float = 600.0) -> subprocess.CompletedProcess:
    return subprocess.run([sys.executable, "-m", "rnsckks.cli", *args],
                          capture_output=True, text=True, timeout=timeout)


def line_with(proc: subprocess.CompletedProcess, prefix: str) -> str:
    hits = [ln for ln in proc.stdout.splitlines() if ln.startswith(prefix)]
    assert len(hits) == 1, f"expected one line starting {prefix!r}:\n{proc.stdout}"
    return hits[0]


@pytest.fixture(scope="module")
def executed16():
    """Baseline and grouped runs of the same seeded size-16 roundtrip,
    plus a repeat of the grouped run for the determinism check."""
    base = run_cli("hdft", "--n", "16", "--k", "2", "--variant", "baseline")
    mks = run_cli("hdft", "--n", "16", "--k", "2", "--variant", "minks")
    again = run_cli("hdft", "--n", "16", "--k", "2", "--variant", "minks")
    return base, mks, again


# ---------------------------------------------------------------------------
# Parser surface.

def test_help_lists_every_command():
    proc = run_cli("--help")
    assert proc.returncode == 0
    for name in ("selftest", "hdft", "sizes", "keygen", "bench"):
        assert name in proc.stdout


@pytest.mark.parametrize("flag,value", [("--variant", "fastest"),
                                        ("--profile", "gpu")])
def test_unknown_choice_is_rejected(flag, value):
    proc = run_cli("hdft", flag, value)
    assert proc.returncode == 2
    assert "invalid choice" in proc.stderr


# ---------------------------------------------------------------------------
# sizes: the published table, in both byte units, deterministically.

def test_sizes_rows_match():
    proc = run_cli("sizes")
    assert proc.returncode == 0
    lines = proc.stdout.splitlines()
    assert lines[0] == "# rnsckks-report v1"
    assert "result: 4/4 rows match" in lines
    for name in ("lattigo", "100x", "f1", "ark"):
        row = line_with(proc, f"row {name}:")
        assert row.endswith("ok")
        assert "MiB" in row and "MB)" in row


def test_sizes_deterministic_and_out_mirrors(tmp_path):
    out = tmp_path / "sizes.txt"
    first = run_cli("sizes")
    second = run_cli("sizes", "--out", str(out))
    assert first.stdout == second.stdout
    assert out.read_text() == second.stdout


# ---------------------------------------------------------------------------
# hdft --analytic-only: the traffic/intensity table for a wide machine.

def test_analytic_report_is_pinned_and_deterministic():
    first = run_cli("hdft", "--analytic-only")
    again = run_cli("hdft", "--analytic-only")
    assert first.returncode == 0
    assert first.stdout == again.stdout
    lines = first.stdout.splitlines()
    for pinned in (
            "profile: ark",
            "mode: analytic",
            "schedule: size=2^15 k=5 split=3+3",
            "pass idft variant baseline: offchip_bytes 7752646656 "
            "mults 8123842560 evk_loads 45 ops_per_byte 1.048",
            "pass idft variant minks: offchip_bytes 3008888832 "
            "mults 7785545728 evk_loads 6 ops_per_byte 2.588",
            "pass idft variant minks-oflimb: offchip_bytes 828899328 "
            "mults 10064625664 evk_loads 6 ops_per_byte 12.142",
            "pass idft grouped intensity gain: 2.469x",
            "pass idft cumulative intensity: 12.142 ops/byte",
            "pass idft traffic cut: 89.3%",
            "pass dft variant baseline: offchip_bytes 868220928 "
            "mults 1168637952 evk_loads 45 ops_per_byte 1.346",
            "pass dft variant minks: offchip_bytes 459276288 "
            "mults 1124728832 evk_loads 6 ops_per_byte 2.449",
            "pass dft variant minks-oflimb: offchip_bytes 162004992 "
            "mults 1521090560 evk_loads 6 ops_per_byte 9.389",
            "pass dft grouped intensity gain: 1.819x",
            "pass dft cumulative intensity: 9.389 ops/byte",
            "pass dft traffic cut: 81.3%"):
        assert pinned in lines, f"missing report line: {pinned}"


@pytest.mark.parametrize("profile", ["desk", "lattigo", "100x", "f1"])
def test_analytic_report_covers_every_profile(profile):
    proc = run_cli("hdft", "--analytic-only", "--profile", profile)
    assert proc.returncode == 0
    assert f"profile: {profile}" in proc.stdout.splitlines()
    for label in ("idft", "dft"):
        assert line_with(proc, f"pass {label} traffic cut:").endswith("%")


# ---------------------------------------------------------------------------
# hdft executed: seeded roundtrip, identical outputs, different traffic.

def test_executed_roundtrip_passes(executed16):
    for proc in executed16:
        assert proc.returncode == 0
        assert line_with(proc, "roundtrip max error:").endswith("ok")


def test_variants_decrypt_to_the_same_vector(executed16):
    base, mks, _ = executed16
    assert (line_with(base, "output digest")
            == line_with(mks, "output digest"))
    # ... while the evk traffic differs: 2^1 + 2^2 - 1 baby/giant keys per
    # stage for the naive walk versus two grouped loads.
    for label in ("idft", "dft"):
        assert line_with(base, f"pass {label} evk loads by stage:") \
            .endswith("0:5 1:5")
        assert line_with(mks, f"pass {label} evk loads by stage:") \
            .endswith("0:2 1:2")


def test_executed_report_is_deterministic(executed16):
    _, mks, again = executed16
    assert mks.stdout == again.stdout


def test_default_invocation_full_width_message():
    proc = run_cli("hdft")
    assert proc.returncode == 0
    lines = proc.stdout.splitlines()
    assert "mode: executed (size=64 k=2 split=(1, 2))" in lines
    assert line_with(proc, "roundtrip max error:").endswith("ok")
    for label in ("idft", "dft"):
        per_stage = line_with(proc, f"pass {label} evk loads by stage:")
        counts = [int(tok.split(":")[1])
                  for tok in per_stage.split("stage:")[1].split()]
        assert counts == [2, 2, 2]


# ---------------------------------------------------------------------------
# selftest and bench.

def test_selftest_passes_every_check():
    proc = run_cli("selftest")
    assert proc.returncode == 0
    checks = [ln for ln in proc.stdout.splitlines()
              if ln.startswith("check ")]
    assert len(checks) == 8
    assert all(ln.endswith("ok") for ln in checks)
    assert "result: 8/8 passed" in proc.stdout.splitlines()


def test_bench_reports_model_counts():
    first = run_cli("bench")
    again = run_cli("bench")
    assert first.returncode == 0
    lines = first.stdout.splitlines()
    assert ("model keyswitch@L: ntt 2555904 bconv 1179648 "
            "elementwise 524288 total 4259840") in lines
    assert ("model bytes: plaintext 524288 ciphertext 1048576 "
            "evk 3145728") in lines
    assert ("ops timed: encode encrypt decrypt hadd pmult "
            "hmult+rescale hrot") in lines
    # Wall times live on stderr only, so the report stays byte-stable.
    assert first.stdout == again.stdout
    assert "bench:" in first.stderr


# ---------------------------------------------------------------------------
# keygen: reproducible key material on disk.

def test_keygen_is_reproducible(tmp_path):
    runs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        proc = run_cli("keygen", "--n", "16", "--out", str(out))
        assert proc.returncode == 0
        runs.append((out, proc))
    (dir_a, proc_a), (dir_b, proc_b) = runs
    assert proc_a.stdout == proc_b.stdout
    assert (dir_a / "report.txt").read_text() == proc_a.stdout

    steps = line_with(proc_a, "rotation steps:").split(":")[1].split()
    assert steps and steps == sorted(steps, key=int)
    for ln in proc_a.stdout.splitlines():
        m = re.match(r"file (\S+): (\d+) bytes sha256:([0-9a-f]{16})", ln)
        if not m:
            continue
        name, size = m.group(1), int(m.group(2))
        assert os.path.getsize(dir_a / name) == size
        assert (dir_a / name).read_bytes() == (dir_b / name).read_bytes()
    names = {ln.split()[1].rstrip(":") for ln in proc_a.stdout.splitlines()
             if ln.startswith("file ")}
    assert {"params.txt", "secret.key", "relin.evk"} <= names


def test_keygen_seed_changes_the_keys(tmp_path):
    out_a = tmp_path / "seed0"
    out_b = tmp_path / "seed1"
    proc_a = run_cli("keygen", "--n", "16", "--out", str(out_a))
    proc_b = run_cli("keygen", "--n", "16", "--seed", "1",
                     "--out", str(out_b))
    assert proc_a.returncode == 0 and proc_b.returncode == 0
    assert (line_with(proc_a, "file secret.key:")
            != line_with(proc_b, "file secret.key:"))


# ---------------------------------------------------------------------------
# Parameter files and failure modes.

def test_params_file_carries_the_seed(tmp_path):
    path = tmp_path / "params.txt"
    serial.write_params(str(path), CkksParams(), seed=9)
    proc = run_cli("hdft", "--analytic-only", "--params", str(path))
    assert proc.returncode == 0
    assert "seed: 9" in proc.stdout.splitlines()


def test_corrupt_params_file_exits_2(tmp_path):
    path = tmp_path / "broken.txt"
    path.write_text("# rnsckks-params v1\nn_ring = shiny\n")
    proc = run_cli("sizes", "--params", str(path))
    assert proc.returncode == 2
    assert "error:" in proc.stderr


def test_missing_params_file_exits_2(tmp_path):
    proc = run_cli("bench", "--params", str(tmp_path / "nope.txt"))
    assert proc.returncode == 2
    assert "error:" in proc.stderr

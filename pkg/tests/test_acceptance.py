"""Acceptance gate.  Each test carries a ``criterion`` marker; the terminal
summary prints one PASS/FAIL line per criterion with the measured values."""
import math
import time

import numpy as np
import pytest

from chaospeech import adpcm, audio, pipeline
from chaospeech.analysis.differential import average_npcr_uaci, npcr_uaci
from chaospeech.analysis.keyspace import key_space
from chaospeech.analysis.lyapunov import lyapunov_spectrum
from chaospeech.analysis.randomness import battery
from chaospeech.analysis.sensitivity import sensitivity_scan
from chaospeech.chaos_core import FactorOrder, ScramblerKey, build_transform_matrix, generate_table
from chaospeech.keys import keygen
from chaospeech.permutation import FRAME_BYTES, GROUP_BYTES, permute_frame, scramble_bits, scramble_bytes, unpermute_frame
from chaospeech.stream_cipher import (
    ChaoticSystem, StreamCipherKey, error_dynamics_steady_state, keystream, sigma_for_epsilon,
)
from chaospeech.transport import FramePacket, MulticastReceiver, MulticastSender

from test_chaos_core import MAT6, MAT6_SWAP, MAT7, MAT7_SWAP


def criterion(n, title):
    return pytest.mark.criterion(n, title)


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


@criterion(1, "transform-matrix golden vectors")
def test_matrix_golden_vectors(record_property):
    with Timer() as t:
        got = [build_transform_matrix(FactorOrder.canonical(6)).tolist(),
               build_transform_matrix(FactorOrder.canonical(7)).tolist(),
               build_transform_matrix(FactorOrder.canonical(6).swapped((1, 2), (3, 4))).tolist(),
               build_transform_matrix(FactorOrder.canonical(7).swapped((1, 2), (4, 5))).tolist()]
    record_property("detail", f"4/4 matrices exact in {t.elapsed:.3f} s")
    assert got == [MAT6, MAT7, MAT6_SWAP, MAT7_SWAP]
    assert t.elapsed < 1.0


@criterion(2, "worked-example table indices")
def test_worked_example_indices(record_property):
    t6 = generate_table(build_transform_matrix(FactorOrder.canonical(6)), 6)
    t7 = generate_table(build_transform_matrix(FactorOrder.canonical(7)), 7)
    record_property("detail", f"E6[14]={t6[14]}, E7[100]={t7[100]}")
    assert (t6[14], t7[100]) == (1792, 3296)


@criterion(3, "permutation inverse and preservation on 1000 random frames")
def test_permutation_properties(record_property):
    rng = np.random.default_rng(3)
    keys = [keygen(s) for s in range(10)]
    tables = [k.tables() for k in keys]
    with Timer() as t:
        for k in range(1000):
            bit, byte = tables[k % len(tables)]
            frame = rng.integers(0, 256, FRAME_BYTES, dtype=np.uint8)
            out = permute_frame(frame, bit, byte)
            assert unpermute_frame(out, bit, byte) == frame.tobytes()
            o = np.frombuffer(out, np.uint8)
            assert np.unpackbits(o).sum() == np.unpackbits(frame).sum()
            g = frame[:GROUP_BYTES]
            assert np.unpackbits(np.frombuffer(scramble_bits(g, bit), np.uint8)).sum() == np.unpackbits(g).sum()
            shuffled = np.frombuffer(scramble_bytes(frame, byte), np.uint8)
            assert np.array_equal(np.bincount(shuffled, minlength=256), np.bincount(frame, minlength=256))
    record_property("detail", f"1000 frames in {t.elapsed:.1f} s")
    assert t.elapsed < 30


@criterion(4, "WAV pipeline roundtrip and codec SNR")
def test_pipeline_roundtrip(tmp_path, record_property):
    speech = audio.speech_like(60.0, seed=4)
    audio.write_wav(tmp_path / "in.wav", speech)
    key = keygen()
    with Timer() as t:
        pipeline.encrypt_file(tmp_path / "in.wav", key, tmp_path / "c.bin")
        frames, n, _, _ = pipeline.unpack_container((tmp_path / "c.bin").read_bytes())
        recovered = [pipeline.decrypt_compressed(f, key) for f in frames]
    assert recovered == adpcm.compress(speech)
    tone = audio.sine(1000, 2.0, rate=8000)
    snr = adpcm.snr_db(tone, adpcm.decompress(adpcm.compress(tone), len(tone)))
    record_property("detail", f"60 s audio in {t.elapsed:.2f} s, 1 kHz SNR {snr:.1f} dB")
    assert snr >= 20.0
    assert t.elapsed < 10.0


@criterion(5, "Lyapunov spectrum reproduction")
def test_lyapunov(record_property):
    with Timer() as t1:
        hi = lyapunov_spectrum(ChaoticSystem(epsilon=3e8, sigma=2e5), iterations=100_000)
    with Timer() as t2:
        lo = lyapunov_spectrum(ChaoticSystem(epsilon=100.0, sigma=0.0667), iterations=100_000)
    e = hi.exponents
    record_property("detail", "eps=3e8: ({:.3f}, {:.3f}, {:.3f}); eps=100: ({:.2e}, {:.4f}, {:.4f}); "
                    "{:.1f}+{:.1f} s".format(*e, *lo.exponents, t1.elapsed, t2.elapsed))
    assert abs(e[0] - 14.84) <= 0.5 and abs(e[1] - 14.81) <= 0.5 and abs(e[2] - 0.19) <= 0.05
    assert all(v < 0 for v in lo.exponents)
    assert t1.elapsed < 10 and t2.elapsed < 10


@criterion(6, "average NPCR/UACI over 256 perturbation positions")
def test_npcr_uaci(record_property):
    frame = np.random.default_rng(6).integers(0, 256, FRAME_BYTES, dtype=np.uint8).tobytes()
    with Timer() as t:
        m1 = average_npcr_uaci(StreamCipherKey(rounds=1), frame, 256, seed=6)
        m2 = average_npcr_uaci(StreamCipherKey(rounds=2), frame, 256, seed=6)
    record_property("detail", f"M=1 {m1.npcr:.2f}%/{m1.uaci:.2f}%, M=2 {m2.npcr:.2f}%/{m2.uaci:.2f}%, "
                    f"{t.elapsed:.1f} s")
    assert abs(m1.npcr - 49.8) <= 3 and abs(m1.uaci - 16.73) <= 2
    assert m2.npcr >= 99.5 and abs(m2.uaci - 33.47) <= 0.5
    assert t.elapsed < 120


@criterion(7, "NIST subset on 20 x 1e5-bit keystream sequences")
def test_statistical_battery(record_property):
    n, bits = 20, 100_000
    with Timer() as t:
        strong = battery(keystream(StreamCipherKey(), n * bits // 8), n, bits)
        weak_key = StreamCipherKey(ChaoticSystem(epsilon=100.0, sigma=sigma_for_epsilon(100.0)))
        weak = battery(keystream(weak_key, n * bits // 8), n, bits)
    record_property("detail", f"eps=3e8 passes {strong['pass_counts']}; "
                    f"eps=100 frequency passes {weak['pass_counts']['frequency']}/20; {t.elapsed:.1f} s")
    assert all(v >= 18 for v in strong["pass_counts"].values())
    assert n - weak["pass_counts"]["frequency"] >= 18
    assert t.elapsed < 60


@criterion(8, "mismatch sensitivity decades")
def test_sensitivity(record_property):
    with Timer() as t:
        m5 = sensitivity_scan(StreamCipherKey(rounds=5)).exponents
        m1 = sensitivity_scan(StreamCipherKey(rounds=1)).exponents
    expect = np.full((3, 3), -9.0)
    expect[1, 0] = expect[2, 0] = -3.0
    col1 = [m1[1, 0], m1[2, 0]]
    # an entry that never failed inside the scanned decades is at least 10x the top decade
    col1 = [v if not math.isnan(v) else 2.0 for v in col1]
    others = [m1[i, j] for i in range(3) for j in range(3) if (i, j) not in ((1, 0), (2, 0))]
    asym = 10.0 ** (min(col1) - max(others))
    record_property("detail", f"M=5 log10 thresholds {m5.tolist()}; M=1 asymmetry {asym:.0e}; {t.elapsed:.1f} s")
    assert not np.isnan(m5).any()
    assert np.all(np.abs(m5 - expect) <= 1)
    assert asym >= 1e4
    assert t.elapsed < 300


def _sig_agree(value, printed, digits=5):
    """Agreement to ``digits`` significant figures: |p - p*| / |p| <= 5 * 10**-digits."""
    return abs(value - printed) / abs(value) <= 5 * 10.0 ** -digits


@criterion(9, "key-space arithmetic")
def test_key_space(record_property):
    ks = key_space()
    got = [float(ks.bit_level), float(ks.byte_level), ks.stream_level, ks.total]
    printed = [9.4154e14, 2.575e23, 3.2607e64, 7.9055e102]
    rel = [abs(g - p) / abs(g) for g, p in zip(got, printed)]
    rounded = ["{:.4e}".format(g) for g in got]
    record_property("detail", "computed " + ", ".join(rounded) + "; relative errors "
                    + ", ".join(f"{r:.1e}" for r in rel))
    assert ks.bit_level == math.factorial(15) * math.factorial(6)
    assert ks.byte_level == math.factorial(21) * math.factorial(7)
    assert all(_sig_agree(g, p) for g, p in zip(got, printed))


@criterion(10, "multicast fan-out: two matched receivers, one mismatched")
@pytest.mark.network
def test_multicast_fanout(loopback_group, record_property):
    key = keygen()
    wrong = key.with_stream(system=key.stream.system.with_entry(0, 0, 1e-9))
    speech = audio.speech_like(8.0, seed=10)
    plain = adpcm.compress(speech)
    with Timer() as t:
        rxs = [MulticastReceiver(loopback_group) for _ in range(3)]
        try:
            with MulticastSender(loopback_group) as tx:
                sent = pipeline.stream_send(speech, key, tx)
            got = [[rx.recv_frame(5.0) for _ in range(sent)] for rx in rxs]
        finally:
            for rx in rxs:
                rx.close()
        outs = [b"".join(pipeline.decrypt_compressed(p.payload, k) for p in g)
                for g, k in zip(got, (key, key, wrong))]
    ref = b"".join(plain)
    npcr = npcr_uaci(outs[2], ref).npcr
    record_property("detail", f"{sent} frames; matched identical={outs[0] == outs[1] == ref}; "
                    f"mismatched NPCR {npcr:.2f}%; {t.elapsed:.2f} s")
    assert outs[0] == outs[1] == ref
    assert npcr >= 99.0
    assert t.elapsed < 30


@criterion(11, "steady-state error coefficients")
def test_steady_state(record_property):
    e = error_dynamics_steady_state(which="a31")
    record_property("detail", "({:.4f}, {:.4f}, {:.4f})".format(*e))
    assert np.allclose(e, [-0.0887, 0.7507, 1.4194], atol=1e-3)

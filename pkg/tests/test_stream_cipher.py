import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chaospeech.errors import CipherFault, InvalidKey
from chaospeech.stream_cipher import (
    REFERENCE_A, ChaoticSystem, StreamCipherKey, decrypt_frame, decrypt_round, encrypt_frame,
    encrypt_round, error_dynamics_steady_state, keystream, keystream_byte, sigma_for_epsilon,
)

GOLDEN = json.loads((Path(__file__).parent / "data" / "golden_keystream.json").read_text())


def oracle_encrypt(plain, A, eps, sig, x0):
    """Direct transcription of the sender equations, one byte at a time."""
    x = list(x0)
    out = []
    for s in plain:
        k = int(math.floor(x[0])) % 256
        p = k ^ s
        out.append(p)
        x = [A[0][0] * x[0] + A[0][1] * x[1] + A[0][2] * x[2],
             A[1][0] * p + A[1][1] * x[1] + A[1][2] * x[2],
             A[2][0] * p + A[2][1] * x[1] + A[2][2] * x[2] + eps * math.sin(sig * p)]
    return bytes(out)


@pytest.mark.parametrize("x1,expect", [(-1.5, 254), (0.0, 0), (255.9, 255), (256.0, 0),
                                       (-256.0, 0), (1e12 + 3.7, (10**12 + 3) % 256)])
def test_keystream_byte(x1, expect):
    assert keystream_byte(x1) == expect


@pytest.mark.parametrize("x1", [float("inf"), float("nan"), 2.0**63, -2.0**64])
def test_keystream_byte_out_of_range(x1):
    with pytest.raises(CipherFault):
        keystream_byte(x1)


def test_round_matches_oracle(rng):
    key = StreamCipherKey()
    plain = rng.integers(0, 256, 2000, dtype=np.uint8).tobytes()
    s = key.system
    assert encrypt_round(plain, key) == oracle_encrypt(plain, s.A, s.epsilon, s.sigma, key.x0)


def test_golden_vector():
    key = StreamCipherKey.from_dict(GOLDEN["key"])
    assert key == StreamCipherKey()
    assert keystream(key, 256).hex() == GOLDEN["keystream_hex"]
    plain = bytes.fromhex(GOLDEN["plaintext_hex"])
    assert encrypt_frame(plain, key).hex() == GOLDEN["cipher_hex"]


@settings(max_examples=30, deadline=None)
@given(st.binary(max_size=300), st.integers(1, 6))
def test_frame_roundtrip(data, rounds):
    key = StreamCipherKey(rounds=rounds)
    assert decrypt_frame(encrypt_frame(data, key), key) == data


def test_round_state_continuation(rng):
    key = StreamCipherKey()
    plain = rng.integers(0, 256, 600, dtype=np.uint8).tobytes()
    head, state = encrypt_round(plain[:250], key, return_state=True)
    assert head + encrypt_round(plain[250:], key, state) == encrypt_round(plain, key)


def test_self_synchronization(rng):
    key = StreamCipherKey(rounds=1)
    plain = rng.integers(0, 256, 3000, dtype=np.uint8).tobytes()
    cipher = encrypt_round(plain, key)
    out = decrypt_round(cipher, StreamCipherKey(rounds=1, x0=(10.0, -4.0, 7.0)))
    assert out[64:] == plain[64:]


def test_second_round_spreads_changes_backwards(rng):
    plain = bytearray(rng.integers(0, 256, 4096, dtype=np.uint8).tobytes())
    one, two = StreamCipherKey(rounds=1), StreamCipherKey(rounds=2)
    c1, c2 = encrypt_frame(plain, one), encrypt_frame(plain, two)
    plain[-1] ^= 1
    d1, d2 = encrypt_frame(plain, one), encrypt_frame(plain, two)
    assert d1[:-1] == c1[:-1]       # a causal pass cannot reach earlier bytes
    assert d2[0] != c2[0] or d2[1] != c2[1]


def test_keystream_is_zero_plaintext_encryption():
    key = StreamCipherKey()
    assert keystream(key, 100) == encrypt_round(bytes(100), key)


def test_unstable_matrix_rejected():
    with pytest.raises(InvalidKey):
        ChaoticSystem(((1.2, 0, 0), (0, 0.1, 0), (0, 0, 0.1))).validate()
    assert ChaoticSystem().spectral_radius() < 1


def test_bad_keys_rejected():
    with pytest.raises(InvalidKey):
        StreamCipherKey(rounds=0)
    with pytest.raises(InvalidKey):
        StreamCipherKey(x0=(0.1, float("nan"), 0.1))
    with pytest.raises(InvalidKey):
        ChaoticSystem(A=((1, 2), (3, 4)))


def test_divergent_receiver_raises_cipher_fault():
    key = StreamCipherKey(rounds=1)
    cipher = encrypt_frame(bytes(2000), key)
    wild = StreamCipherKey(key.system.with_entry(0, 0, 10.0), 1, key.x0)
    with pytest.raises(CipherFault):
        decrypt_frame(cipher, wild)


def test_with_entry_offsets_one_coefficient():
    s = ChaoticSystem().with_entry(1, 0, 1e-3)
    assert s.A[1][0] == REFERENCE_A[1][0] + 1e-3
    assert s.A[0] == REFERENCE_A[0]


def test_jacobian_matches_finite_difference():
    s = ChaoticSystem(epsilon=100.0, sigma=sigma_for_epsilon(100.0))
    x = np.array([0.3, -0.2, 0.5])
    h = 1e-6
    num = np.column_stack([(np.array(s.step(x + h * e)) - np.array(s.step(x - h * e))) / (2 * h)
                           for e in np.eye(3)])
    assert np.allclose(s.jacobian(x), num, atol=1e-5)


def test_steady_state_matches_fixed_point_iteration():
    b = np.array(REFERENCE_A)
    b[1, 0] = b[2, 0] = 0.0
    d = np.array([0.0, 0.0, 1.0])
    e = np.zeros(3)
    for _ in range(500):
        e = b @ e + d
    assert np.allclose(error_dynamics_steady_state(which="a31"), e, atol=1e-12)
    assert np.allclose(error_dynamics_steady_state(which="a31"), [-0.0887, 0.7507, 1.4194], atol=1e-3)


def test_steady_state_rejects_unknown_parameter():
    with pytest.raises(ValueError):
        error_dynamics_steady_state(which="a44")


def test_key_dict_roundtrip_exact():
    key = StreamCipherKey(ChaoticSystem(epsilon=1.2345678901234567e8, sigma=0.1 + 0.2), 3,
                          (1 / 3, -2 / 7, 1e-300))
    back = StreamCipherKey.from_dict(json.loads(json.dumps(key.to_dict())))
    assert back == key

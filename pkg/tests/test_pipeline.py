import json

import numpy as np
import pytest

from chaospeech import adpcm, audio, pipeline
from chaospeech.chaos_core import build_transform_matrix
from chaospeech.errors import FormatError, InvalidKey
from chaospeech.keys import KeyBundle, keygen, load_key, save_key
from chaospeech.analysis.differential import npcr_uaci
from chaospeech.stream_cipher import keystream
from chaospeech.transport import simulated_channel

from test_chaos_core import MAT6, MAT7


# keys --------------------------------------------------------------------------------

def test_default_key_is_reference(tmp_path):
    save_key(keygen(), tmp_path / "k.json")
    key = load_key(tmp_path / "k.json")
    assert build_transform_matrix(key.bit_scrambler.order).tolist() == MAT6
    assert build_transform_matrix(key.byte_scrambler.order).tolist() == MAT7
    s = key.stream
    assert (s.system.epsilon, s.system.sigma, s.rounds, s.x0) == (3e8, 2e5, 5, (0.1, 0.1, 0.1))


def test_seeded_keygen_is_deterministic():
    assert keygen(42) == keygen(42)
    assert keygen(42) != keygen(43)


def test_keygen_rejects_unstable_matrix():
    with pytest.raises(InvalidKey):
        keygen(A=((0.9, 0.5, 0.0), (0.5, 0.9, 0.0), (0.0, 0.0, 0.1)))


def test_key_file_roundtrip_reproduces_tables_and_keystream(tmp_path):
    key = keygen(9, rounds=3)
    save_key(key, tmp_path / "k.json")
    back = load_key(tmp_path / "k.json")
    assert back == key
    for a, b in zip(back.tables(), key.tables()):
        assert np.array_equal(a, b)
    assert keystream(back.stream, 500) == keystream(key.stream, 500)
    assert json.loads((tmp_path / "k.json").read_text())["format"] == "chaospeech-key/1"


def test_malformed_key_files(tmp_path):
    (tmp_path / "a.json").write_text("{not json")
    with pytest.raises(InvalidKey):
        load_key(tmp_path / "a.json")
    d = keygen().to_dict()
    d["bit_scrambler"]["n"] = 7
    d["bit_scrambler"]["pairs"] = [list(p) for p in keygen().byte_scrambler.order.pairs]
    with pytest.raises(InvalidKey):
        KeyBundle.from_dict(d)


# pipeline ---------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def speech():
    return audio.speech_like(9.0, seed=11)


def test_compressed_roundtrip_exact(speech):
    key = keygen(3)
    for f in adpcm.compress(speech):
        assert pipeline.decrypt_compressed(pipeline.encrypt_compressed(f, key), key) == f


def test_file_roundtrip_equals_codec_only(tmp_path, speech):
    key = keygen()
    audio.write_wav(tmp_path / "in.wav", speech)
    n = pipeline.encrypt_file(tmp_path / "in.wav", key, tmp_path / "c.bin")
    assert n == 3
    pipeline.decrypt_file(tmp_path / "c.bin", key, tmp_path / "out.wav")
    out, rate = audio.read_wav(tmp_path / "out.wav")
    codec = adpcm.decompress(adpcm.compress(speech), len(speech))
    assert rate == 8000 and np.array_equal(out, codec)
    assert adpcm.snr_db(speech, out) == adpcm.snr_db(speech, codec)


def test_wrong_a11_gives_noise(speech):
    key = keygen()
    wrong = key.with_stream(system=key.stream.system.with_entry(0, 0, 1e-9))
    plain = adpcm.compress(speech)[0]
    got = pipeline.decrypt_compressed(pipeline.encrypt_compressed(plain, key), wrong)
    assert npcr_uaci(got, plain).npcr > 99.0


def test_empty_input(tmp_path):
    audio.write_wav(tmp_path / "e.wav", np.zeros(0, np.int16))
    assert pipeline.encrypt_file(tmp_path / "e.wav", keygen(), tmp_path / "e.bin") == 0
    assert pipeline.decrypt_file(tmp_path / "e.bin", keygen(), tmp_path / "o.wav") == 0
    assert len(audio.read_wav(tmp_path / "o.wav")[0]) == 0


def test_container_validation():
    blob = pipeline.pack_container([bytes(16384)], 100, 8000, 5)
    frames, n, rate, rounds = pipeline.unpack_container(blob)
    assert (len(frames), n, rate, rounds) == (1, 100, 8000, 5)
    with pytest.raises(FormatError):
        pipeline.unpack_container(b"XXXX" + blob[4:])
    with pytest.raises(FormatError):
        pipeline.unpack_container(blob[:-1])
    with pytest.raises(FormatError):
        pipeline.unpack_container(b"CS")
    with pytest.raises(ValueError):
        pipeline.pack_container([bytes(10)], 5, 8000, 5)


def test_frames_decode_independently(speech):
    """Dropping any frame leaves the others decodable (per-frame state reset)."""
    key = keygen(5)
    plain = adpcm.compress(speech)
    cipher = [pipeline.encrypt_compressed(f, key) for f in plain]
    for drop in range(len(cipher)):
        kept = [c for i, c in enumerate(cipher) if i != drop]
        expect = [f for i, f in enumerate(plain) if i != drop]
        assert [pipeline.decrypt_compressed(c, key) for c in kept] == expect


def test_stream_over_lossy_channel(speech):
    key = keygen()
    sender, (rx,) = simulated_channel(loss_rate=0.05, receivers=1, seed=4)
    pipeline.stream_send(speech, key, sender)
    sender.close()
    got = pipeline.stream_receive(rx, key, idle_timeout=0.01)
    plain = adpcm.compress(speech)
    assert 0 < len(got) < len(plain)          # at least one frame lost, the rest decoded
    for seq, pcm in got:
        assert np.array_equal(pcm, adpcm.decompress_frame(plain[seq])[0])


def test_stream_send_propagates_worker_errors():
    class Boom:
        def send_frame(self, packet):
            raise RuntimeError("link down")

    with pytest.raises(RuntimeError):
        pipeline.stream_send(audio.speech_like(1.0), keygen(), Boom())

"""
Encrypting a speech file
========================

IMA-ADPCM compresses 32768-sample blocks into 16384-byte frames; each frame is
bit-scrambled, byte-scrambled and stream-encrypted.  A matched key gives back
exactly the codec output, a key off by 1e-9 in one coefficient gives noise.
"""

from pathlib import Path

import numpy as np

from chaospeech import adpcm, audio, pipeline
from chaospeech.keys import keygen, save_key

out = Path("demo_output")
out.mkdir(exist_ok=True)

speech = audio.speech_like(10.0)
audio.write_wav(out / "speech.wav", speech)

key = keygen()
save_key(key, out / "key.json")
n = pipeline.encrypt_file(out / "speech.wav", key, out / "speech.cspe")
print(n, "frames written")

pipeline.decrypt_file(out / "speech.cspe", key, out / "decrypted.wav")
good, _ = audio.read_wav(out / "decrypted.wav")
print("matched key, SNR vs original: %.1f dB (codec alone: %.1f dB)"
      % (adpcm.snr_db(speech, good), adpcm.snr_db(speech, adpcm.decompress(adpcm.compress(speech), len(speech)))))

# a receiver with a11 off by 1e-9
wrong = key.with_stream(system=key.stream.system.with_entry(0, 0, 1e-9))
pipeline.decrypt_file(out / "speech.cspe", wrong, out / "mismatched.wav")
bad, _ = audio.read_wav(out / "mismatched.wav")
print("mismatched key, SNR: %.1f dB" % adpcm.snr_db(speech, bad))
print("peak levels: original %d, mismatched %d" % (np.abs(speech).max(), np.abs(bad).max()))

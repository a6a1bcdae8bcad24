"""
Security analysis
=================

Lyapunov spectrum, a NIST SP 800-22 subset on the keystream, differential
metrics, coefficient sensitivity and the key-space count.  Data files for
plotting land in ``demo_output/``.
"""

from pathlib import Path

import numpy as np

from chaospeech.analysis import battery, key_space, lyapunov_spectrum, sensitivity_scan, sweep
from chaospeech.analysis.differential import histogram
from chaospeech.analysis.reports import write_gnuplot
from chaospeech.stream_cipher import ChaoticSystem, StreamCipherKey, keystream, sigma_for_epsilon

out = Path("demo_output")
out.mkdir(exist_ok=True)

# exponents in nats per iteration
print("eps=3e8:", np.round(lyapunov_spectrum(ChaoticSystem(), iterations=20_000).exponents, 3))
rows = sweep([0, 1e2, 1e4, 1e6, 3e8], iterations=5000)
write_gnuplot(out / "lyapunov_sweep.dat", ["eps", "sigma", "le1", "le2", "le3"], rows)

###############################################################################
# Randomness: a weak controller (eps=100) leaves a strongly biased keystream.

for eps, sigma in ((3e8, 2e5), (100.0, sigma_for_epsilon(100.0))):
    key = StreamCipherKey(ChaoticSystem(epsilon=eps, sigma=sigma))
    res = battery(keystream(key, 10 * 12_500), 10, 100_000)
    print(f"eps={eps:g}: passes out of 10 ->", res["pass_counts"])

h = histogram(keystream(StreamCipherKey(), 1 << 16))
print("keystream histogram chi2 %.1f (p=%.2f)" % (h.chi2, h.pvalue))

###############################################################################
# Sensitivity: smallest decade of mismatch that turns decryption into noise.

s = sensitivity_scan(StreamCipherKey(rounds=5))
print("log10 thresholds, M=5:\n", s.exponents)

ks = key_space()
print("key space: %.4e x %.4e x %.4e = %.4e" % (ks.bit_level, ks.byte_level, ks.stream_level, ks.total))

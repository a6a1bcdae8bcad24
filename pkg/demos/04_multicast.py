"""
One sender, two receivers
=========================

Frames are split into <=1400-byte datagrams and sent to a multicast group.
Here both receivers sit on the loopback interface; the second one holds a
key whose byte-level factor order has T12 and T45 exchanged.  When loopback
multicast is unavailable the in-process simulated channel is used instead.
"""

from chaospeech import audio, reproduce
from chaospeech.errors import TransportError
from chaospeech.transport import FramePacket, GroupConfig, simulated_channel

speech = audio.speech_like(8.0, seed=2)

try:
    res = reproduce.run_scenario("byte-mismatch", speech, transport="multicast",
                                 group=GroupConfig(port=5006, interface="127.0.0.1"))
except (TransportError, OSError) as exc:
    print("multicast unavailable (%s); using the simulated channel" % exc)
    res = reproduce.run_scenario("byte-mismatch", speech)

for name, rx in zip(("mismatched", "matched"), res["receivers"]):
    print(f"{name:>10}: frames {rx['frames']}, identical {rx['identical']}, NPCR {rx['npcr']:.2f}%")

# the loss model: each datagram is dropped independently, a lost chunk costs its frame

tx, rxs = simulated_channel(loss_rate=0.05, receivers=2, seed=3)
for seq in range(10):
    tx.send_frame(FramePacket(seq, 5, bytes(16384)))
tx.close()
print("frames delivered per receiver:", [[p.seq for p in r.drain()] for r in rxs])

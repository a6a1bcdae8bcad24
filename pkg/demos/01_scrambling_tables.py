"""
Scrambling tables from modular matrix maps
==========================================

Bit and byte positions are shuffled with permutation tables built from a
product of elementary 2x2-block factors iterated mod 4.  The factor order is
the key: exchanging two factors gives a different table.
"""

import numpy as np

from chaospeech.chaos_core import FactorOrder, ScramblerKey, build_transform_matrix, invert_table

# the canonical order T12 T13 ... T56 for the 6-D (bit level) map
order6 = FactorOrder.canonical(6)
print(build_transform_matrix(order6))

# each 512-byte group holds 4**6 = 4096 bits, so the table is a permutation of 0..4095
bit_table = ScramblerKey(order6).table()
print("bit 14 (byte 1, bit 6) moves to", bit_table[14], "= byte", bit_table[14] // 8, "bit", bit_table[14] % 8)

# the 7-D map does the same for the 4**7 = 16384 bytes of a frame
byte_table = ScramblerKey.reference(7).table()
print("byte 100 moves to", byte_table[100])

###############################################################################
# A receiver whose order has T12 and T34 exchanged puts that bit back in
# the wrong place.

wrong = ScramblerKey(order6.swapped((1, 2), (3, 4)))
print(build_transform_matrix(wrong.order))
back = invert_table(wrong.table())[bit_table[14]]
print("mismatched receiver restores it to byte", back // 8, "bit", back % 8)

wrong7 = ScramblerKey(FactorOrder.canonical(7).swapped((1, 2), (4, 5)))
print("mismatched byte receiver restores byte 100 to", invert_table(wrong7.table())[byte_table[100]])

# the two tables agree on only a handful of positions
print("positions where both tables agree:", int(np.sum(wrong.table() == bit_table)), "of 4096")

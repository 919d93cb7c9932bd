"""
Denoising map at the relay
==========================

Two 4-QAM users transmit at the same time. The relay sees their sum on a
3 x 3 grid per dimension and only needs the digit sum modulo q.
"""
import numpy as np

from ris_pnc import Modulation
from ris_pnc.pnc import pnc_map_digits, recover_peer, superpose, superposed_levels

m = Modulation(4)
print("constellation:", np.round(m.constellation(), 3))
print("superposed levels per dimension:", np.round(superposed_levels(m), 3))

# every pair of symbols, and what the relay forwards
d = m.all_digits()
for a in d:
    row = []
    for b in d:
        z = pnc_map_digits(a[None], b[None], m)[0]
        row.append("".join(map(str, z)))
    print("a =", a, " z for each b:", row)

# UE A removes its own digits from z to get UE B's
a, b = d[1], d[2]
z = pnc_map_digits(a[None], b[None], m)
print("recovered b:", recover_peer(z, a[None], m)[0], "sent:", b)
print("noiseless sum:", superpose(a[None], b[None], m)[0])

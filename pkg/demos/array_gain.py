"""
How much transmit power a bigger surface saves
==============================================

Each fourfold increase of the element count should buy roughly 12 dB
(coherent combining on both hops).
"""
from ris_pnc import Scenario, power_for_ber

needed = {}
for L in (4, 16, 64, 256):
    sc = Scenario(L=L, M=16, rounds=800, min_errors=None, master_seed=1)
    needed[L] = power_for_ber(sc, 1e-2, lo_dbm=-20.0, hi_dbm=90.0)
    print(f"L={L:4d}  P_max for BER 1e-2: {needed[L]:6.2f} dBm")

Ls = sorted(needed)
for small, big in zip(Ls, Ls[1:]):
    print(f"{small} -> {big}: saves {needed[small] - needed[big]:.1f} dB")

"""
Channel estimation error
========================

Phases are set from noisy estimates. Small errors change nothing, large
errors scramble the combining and the BER jumps to one half.
"""
from ris_pnc import Scenario, sweep

sc = Scenario(L=64, M=4, p_max_dbm=15.2, rounds=2000, min_errors=None)
levels = [None, -110.0, -90.0, -70.0, -60.0, -50.0, -30.0, -10.0]
for p in sweep(sc, "cee_db", levels):
    label = "off" if p.swept_value is None else f"{p.swept_value:.0f} dBm"
    print(f"CEE {label:>9}: BER {p.ber:.3e}  ({p.errors} errors / {p.bits} bits)")

"""
A surface that is not steered does not help
===========================================

With random reflection phases the two users arrive with unrelated phases
and the relay cannot separate the sum, so BER stays near one half no
matter the power.
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from ris_pnc import Scenario, sweep

powers = [-10.0, 10.0, 30.0, 50.0]
fig, ax = plt.subplots()
for phase_mode in ("optimal", "random"):
    sc = Scenario(L=16, M=4, phase_mode=phase_mode, rounds=300, min_errors=None)
    pts = sweep(sc, "p_max_dbm", powers)
    bers = [max(p.ber, 1e-6) for p in pts]
    print(phase_mode, [f"{b:.3g}" for b in bers])
    ax.semilogy(powers, bers, marker="o", label=phase_mode)
ax.set_xlabel("P_max (dBm)")
ax.set_ylabel("BER")
ax.legend()
fig.savefig("random_phases.png", dpi=120)

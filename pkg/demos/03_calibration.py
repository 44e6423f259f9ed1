# ## Kick-strength calibration with a two-level Rabi drive
#
# Tuning the train period to the J=2 <-> J=4 beat (T_rev/7) makes the kicks
# drive that pair resonantly; the population then Rabi-oscillates at a rate
# set by the kick strength.

import kickrotor as kr
from kickrotor.oracle import beat_period, brute_force_two_level

spec = kr.RotorSpec(j_max=30)
period = beat_period(spec)
print(f"beat period = {period:.4f} ps")

for p in (0.2, 0.5, 1.0):
    trace = brute_force_two_level(spec, p, period, 300)
    print(f"P={p:.1f}: {trace.frequency:.4f} cycles/kick, contrast {trace.contrast:.3f}")

off = brute_force_two_level(spec, 0.5, 1.5 * period, 300)
print(f"detuned (1.5x): contrast {off.contrast:.3f}")

# ## Intensity to kick strength
#
# Polarizability anisotropy is fixed so that 2e13 W/cm^2 in 130 fs gives P=3.

n2 = kr.nitrogen()
for intensity in (5e12, 1e13, 2e13):
    print(f"{intensity:.0e} W/cm^2 -> P = {kr.kick_strength_from_intensity(n2, intensity, 130.0):.3f}")
print(f"delta alpha = {n2.delta_alpha * 1e30:.4f} A^3")

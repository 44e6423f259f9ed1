# ## Energy growth: localized vs diffusive
#
# Periodic kicks stop absorbing energy after a few pulses.  Timing noise
# (33%) or amplitude noise (41%) restores steady growth.

import kickrotor as kr

spec = kr.nitrogen()
ensemble = kr.boltzmann_ensemble(spec, 27.0)
periods = kr.off_resonant_periods(spec.revival_period)
n_noise = 50  # the fig4 preset uses 200

arms = {
    "periodic": [kr.build_periodic_train(24, t, 2.3) for t in periods],
    "timing": [kr.build_timing_noise_train(24, 0.85 * spec.revival_period, 0.33, 2.3, seed=s)
               for s in range(1, n_noise + 1)],
    "amplitude": [kr.build_amplitude_noise_train(24, periods[s % 20], 2.3, 0.41, seed=s)
                  for s in range(1, n_noise + 1)],
}

curves = {}
for name, trains in arms.items():
    avg = kr.simulate_many(spec, ensemble, trains, keep_amplitudes=False)
    curves[name] = kr.energy_vs_kick(avg)

print(" N  " + "".join(f"{name:>12s}" for name in curves))
for n in range(0, 25, 2):
    print(f"{n:2d}  " + "".join(f"{c.mean[n]:12.3f}" for c in curves.values()))

e = curves["periodic"].mean
print(f"periodic E(24)/E(5) = {e[24] / e[5]:.3f}")

# ## Quantum resonance
#
# At exactly T_rev the free evolution is the identity, so N kicks add up to
# one kick of strength N*P and localization is absent.

wide = kr.RotorSpec(j_max=160)
for frac in (0.98, 1.0, 1.02):
    train = kr.build_periodic_train(24, frac * wide.revival_period, 2.3)
    avg = kr.simulate_many(wide, kr.boltzmann_ensemble(wide, 27.0), [train])
    print(f"T = {frac:.2f} T_rev: E(24) = {kr.energy_vs_kick(avg).mean[24]:8.2f} THz*h")

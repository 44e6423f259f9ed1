# ## Dynamical localization of a kicked N2 rotor
#
# A thermal (27 K) ensemble of nitrogen molecules is kicked 24 times with
# P = 2.3, at 20 different off-resonant periods.  The averaged Raman lines and
# the populations retrieved from them fall off exponentially in J.

import numpy as np

import kickrotor as kr

spec = kr.nitrogen()
ensemble = kr.boltzmann_ensemble(spec, 27.0)
print(f"{len(ensemble)} thermal members, J' = 0..{ensemble.initial_j.max()}")

periods = kr.off_resonant_periods(spec.revival_period)
print("periods / T_rev:", np.round(periods / spec.revival_period, 4))

# ## Propagate

trains = [kr.build_periodic_train(24, t, 2.3) for t in periods]
avg = kr.simulate_many(spec, ensemble, trains)

# ## Raman spectrum after 24 kicks

spectrum = kr.raman_spectrum(avg, 24, normalize=True)
for j in range(0, 21):
    print(f"J={j:2d}  shift {spectrum.shifts[j]:6.3f} THz  I={spectrum.intensities[j]:.2e}")

# ## Retrieved vs exact populations

retrieved = kr.retrieve_populations(kr.raman_spectrum(avg, 24))
exact = kr.exact_populations(avg, 24).spin_corrected(spec.spin_weights())
fit = kr.fit_localization_length(retrieved)
print(f"xi (retrieved) = {fit.xi:.3f}, R^2 = {fit.r_squared:.4f}")
print(f"xi (exact)     = {kr.fit_localization_length(exact).xi:.3f}")
print("shape:", kr.classify_shape(exact).shape)

# ## Same ensemble, timing noise instead

noisy = kr.simulate_many(spec, ensemble, [
    kr.build_timing_noise_train(24, 0.85 * spec.revival_period, 0.33, 2.3, seed=s)
    for s in range(1, 21)
])
noisy_exact = kr.exact_populations(noisy, 24).spin_corrected(spec.spin_weights())
print("shape with timing noise:", kr.classify_shape(noisy_exact).shape)
for j in (4, 8, 12, 16):
    print(f"P_{j}: periodic {exact.populations[j]:.2e}   noisy {noisy_exact.populations[j]:.2e}")

# coding: utf-8

# # A strong and a weak wave
#
# Same slab as the Marshak problem but with a thin right half driven by a much
# colder boundary.  We compare a per-cell objective count (alg2-nc) with the
# energy-proportional allocation (alg3) on a few realizations.

import numpy as np

from cellpop.imc import run_realization, two_wave_config

T0 = 11604.0
runs = 4
results = {}
for strategy, extra in (("alg2-nc", {"n_obj": 200}), ("alg3", {"n_obj": None, "n_total": 10000})):
    cfg = two_wave_config(strategy=strategy, seed=5, **extra)
    results[strategy] = [run_realization(cfg, r) for r in range(runs)]


# Mean radiative temperature in units of the initial temperature.  The hot
# wave has crossed a handful of cells; the weak one heats the right edge.

for strategy, res in results.items():
    t_rad = np.mean([r.T_rad for r in res], axis=0) / T0
    print(strategy, "left", t_rad[:8].round(1), "right", t_rad[-6:].round(2))


# alg3 moves particles to where the energy is.  The weak wave gets almost none,
# so its temperature is often zero in a given realization.

for strategy, res in results.items():
    census = np.mean([r.n_census for r in res], axis=0)
    tracked = np.mean([rep.n_tracked for r in res for rep in r.reports])
    print(strategy, "census left", census[:4].round(0), "right", census[-4:].round(1),
          "tracked per step", round(tracked))


# Energy bookkeeping holds run by run whichever strategy is used.

for strategy, res in results.items():
    print(strategy, max(r.cumulative_balance() for r in res))

# coding: utf-8

# # Iterating the control on a closed cell
#
# The harness applies cell control over and over to one cell whose initial
# population is rescaled to a fixed mass every iteration.  We track N^l, the
# particle count, and d^l, the distance of the weights to the uniform vector.

import numpy as np

from cellpop import ExperimentConfig, run_experiment

cfg = ExperimentConfig(n0=100, n_obj=10, source=0.0, mode="nc", iterations=60, runs=500, seed=3)
trace = run_experiment(cfg)
n = trace.reshape("n", cfg.runs)
d = trace.reshape("d", cfg.runs)


# Fraction of chains that have settled at exactly N_obj equal-weight particles.

for l in (1, 5, 10, 20, 40, 60):
    print(l, np.mean((n[:, l - 1] == cfg.n_obj) & (d[:, l - 1] == 0.0)))


# Conservative copies share their parent's weight, so a start below N_obj
# needs a few more iterations to even out.  The weights never drift far:
# max/min stays below 4 and N below 6 N_obj.

cons = run_experiment(ExperimentConfig(n0=5, n_obj=10, mode="c", iterations=300, runs=300, seed=4))
dc = cons.reshape("d", 300)
print("median d", {l: float(np.median(dc[:, l - 1])) for l in (10, 50, 100, 300)})
print("worst max/min weight ratio", cons.ratio.max(), "largest N", cons.n.max())


# With a source whose size is not a multiple of the objective weight the chain
# cannot become exactly uniform: d stays away from zero.

src = run_experiment(ExperimentConfig(n0=100, n_obj=10, source=0.0115, mode="nc",
                                      iterations=200, runs=300, seed=7))
print("median d at l=200", np.median(src.reshape("d", 300)[:, -1]))

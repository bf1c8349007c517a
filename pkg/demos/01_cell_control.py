# coding: utf-8

# # Controlling one cell
#
# A cell holds a handful of census particles with uneven weights and receives
# some source energy.  Cell control brings every particle to roughly the same
# weight and the particle count to roughly the objective, without losing any
# energy.

import numpy as np

from cellpop import CellControlInput, SplittingMode, StreamKey, apply_cell_control, roulette_split

weights = np.array([0.31, 0.02, 0.005, 0.12, 0.09, 0.44])
source = 0.6
inp = CellControlInput(weights, source, objective_count=10, mode="nc")
inp.total_energy


# One uniform per census particle.  The stream is keyed, so the same key always
# gives the same outcome.

key = StreamKey(seed=11).derive(0)
out = apply_cell_control(inp, key.stream())
print("objective weight", out.objective_weight)
print("kept", out.kept_weights.round(4), "from parents", out.parents)
print("emitted", out.emitted, "renorm factor", round(out.renorm_factor, 4))
print("killed", out.killed, "split", out.split_events, "clones", out.clones_created)
print("energy in", inp.total_energy, "energy out", out.total_energy())


# The two splitting modes differ only above the objective weight.  A particle of
# weight 0.25 against w_obj = 0.1 becomes two or three copies.

for mode in SplittingMode:
    print(mode.value, roulette_split(0.25, 0.1, 0.3, mode), roulette_split(0.25, 0.1, 0.7, mode))


# Before renormalization the energy is only conserved on average.  Averaging
# over many variates recovers the input weight.

u = StreamKey(seed=12).stream().uniforms(20000)
for w in (0.25, 0.04):
    mean = np.mean([sum(roulette_split(w, 0.1, x, "nc")) for x in u])
    print(w, round(mean, 4))

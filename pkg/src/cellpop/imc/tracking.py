"""Particle tracking through a 1-D slab with implicit capture.

Each flight is the shortest of: distance to the cell face, distance to census
(``c * t_remaining``) and a sampled effective-scattering distance with rate
``(1 - f) k``.  Over a flight of length ``s`` the weight decays by
``exp(-f k s)`` and the lost energy is deposited in the current cell.
Effective scatters redraw the direction isotropically.  A particle whose
weight drops below the cell's cutoff deposits the remainder locally.
"""
from __future__ import annotations

import math

import numba
import numpy as np

from ..errors import TrackingOverflow
from ..rng import nb_child_hash, nb_uniform

CENSUS = 0
CUTOFF = 1
ESCAPE_LEFT = 2
ESCAPE_RIGHT = 3
ABSORBED = 4

MAX_EVENTS = 1_000_000


@numba.njit(cache=True, error_model="numpy")
def _track_kernel(x, mu, w, cell, t_rem, step_hash, edges, k, f, cutoff, c,
                  dep, tracks, fate, max_events):
    """Track every particle in place; returns (leak_left, leak_right, events, overflow_index).

    Attenuation is accumulated as path length inside the current cell and
    applied when the particle leaves it, reaches census or falls below the
    cutoff; ``exp(-fk a) exp(-fk b) = exp(-fk (a + b))`` makes this identical
    to attenuating flight by flight.  When the path left before the cutoff is
    shorter than both the distance to the nearest face and the distance to
    census, the particle can only end up cut off in this cell, so its weight
    is deposited at once.
    """
    n_cells = k.size
    leak_l = 0.0
    leak_r = 0.0
    events_total = 0
    for p in range(x.size):
        h = nb_child_hash(step_hash, p)
        ctr = 0
        xx = x[p]
        mm = mu[p]
        ww = w[p]
        cc = cell[p]
        tt = t_rem[p]
        tracks[cc] += 1
        ev = 0
        enter = True
        inv_c = 1.0 / c
        inv_mu = 1.0 / mm if mm != 0.0 else np.inf
        while True:
            if enter:
                enter = False
                sig = k[cc]
                if math.isinf(sig):
                    # 0 K cell: infinitely opaque, everything is absorbed on entry
                    dep[cc] += ww
                    ww = 0.0
                    fate[p] = ABSORBED
                    break
                fk = f[cc] * sig
                ss = sig - fk
                inv_ss = 1.0 / ss if ss > 0.0 else np.inf
                lo = edges[cc]
                hi = edges[cc + 1]
                s_acc = 0.0
                if fk > 0.0 and cutoff[cc] > 0.0:
                    s_cut = math.log(ww / cutoff[cc]) / fk if ww > cutoff[cc] else 0.0
                else:
                    s_cut = np.inf
            left = s_cut - s_acc
            dc = c * tt
            safety = min(xx - lo, hi - xx)
            if left <= 0.0 or (left < safety and left < dc):
                dep[cc] += ww
                ww = 0.0
                fate[p] = CUTOFF
                break
            if mm > 0.0:
                db = (hi - xx) * inv_mu
            elif mm < 0.0:
                db = (lo - xx) * inv_mu
            else:
                db = np.inf
            if db < 0.0:
                db = 0.0
            if ss > 0.0:
                u = nb_uniform(h, ctr)
                ctr += 1
                ds = -math.log1p(-u) * inv_ss
            else:
                ds = np.inf

            if dc <= db and dc <= ds:
                s = dc
                kind = 0
            elif db <= ds:
                s = db
                kind = 1
            else:
                s = ds
                kind = 2
            ev += 1
            s_acc += s
            if s_acc >= s_cut:
                dep[cc] += ww
                ww = 0.0
                fate[p] = CUTOFF
                break
            if kind == 2:
                xx += mm * s
                if xx < lo:
                    xx = lo
                elif xx > hi:
                    xx = hi
                tt -= s * inv_c
                if tt < 0.0:
                    tt = 0.0
                u = nb_uniform(h, ctr)
                ctr += 1
                mm = 2.0 * u - 1.0
                inv_mu = 1.0 / mm if mm != 0.0 else np.inf
                if ev >= max_events:
                    return leak_l, leak_r, events_total + ev, p
                continue

            # leaving the segment: apply the accumulated attenuation
            lost = -ww * math.expm1(-fk * s_acc)
            dep[cc] += lost
            ww -= lost
            if kind == 0:
                xx += mm * s
                if xx < lo:
                    xx = lo
                elif xx > hi:
                    xx = hi
                tt = 0.0
                fate[p] = CENSUS
                break
            tt -= s / c
            if tt < 0.0:
                tt = 0.0
            if mm > 0.0:
                cc += 1
                if cc >= n_cells:
                    leak_r += ww
                    ww = 0.0
                    fate[p] = ESCAPE_RIGHT
                    break
                xx = edges[cc]
            else:
                xx = edges[cc]
                cc -= 1
                if cc < 0:
                    leak_l += ww
                    ww = 0.0
                    fate[p] = ESCAPE_LEFT
                    break
            tracks[cc] += 1
            enter = True
            if ev >= max_events:
                return leak_l, leak_r, events_total + ev, p
        events_total += ev
        x[p] = xx
        mu[p] = mm
        w[p] = ww
        cell[p] = cc
        t_rem[p] = tt
    return leak_l, leak_r, events_total, -1


class TrackResult:
    __slots__ = ("deposited", "tracks", "fate", "leak_left", "leak_right", "events")

    def __init__(self, deposited, tracks, fate, leak_left, leak_right, events):
        self.deposited = deposited
        self.tracks = tracks
        self.fate = fate
        self.leak_left = leak_left
        self.leak_right = leak_right
        self.events = events


def track(x, mu, w, cell, t_rem, step_hash, edges, k, f, cutoff, c,
          max_events=MAX_EVENTS) -> TrackResult:
    """Track a batch of particles in place.

    On return ``w`` holds census weights (0 for particles that left) and
    ``fate`` tells what happened to each particle.  ``step_hash`` is the
    64-bit stream key of this step; particle ``p`` uses the child stream ``p``.
    """
    n_cells = k.size
    dep = np.zeros(n_cells)
    tracks = np.zeros(n_cells, dtype=np.int64)
    fate = np.full(x.size, -1, dtype=np.int8)
    leak_l, leak_r, events, bad = _track_kernel(
        x, mu, w, cell, t_rem, np.uint64(step_hash), edges, k, f, cutoff, float(c),
        dep, tracks, fate, max_events)
    if bad >= 0:
        raise TrackingOverflow(f"particle {bad} exceeded {max_events} events in one step")
    return TrackResult(dep, tracks, fate, leak_l, leak_r, events)

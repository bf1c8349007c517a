"""Gray IMC material closures: opacity, Fleck factor, emission, matter update.

CGS units throughout (erg, cm, s, K, g).
"""
from __future__ import annotations

import numpy as np

from ..errors import NonPhysicalTemperature

A_RAD = 7.56e-15     # erg cm^-3 K^-4
C_LIGHT = 3.0e10     # cm s^-1


def opacity(T, rho, d):
    """Absorption opacity ``rho * d * T^-3`` in cm^-1."""
    T = np.asarray(T, dtype=float)
    if np.any(T <= 0.0):
        raise NonPhysicalTemperature("opacity needs a positive temperature")
    k = rho * d / T**3
    return k if k.ndim else float(k)


def beta(T, rho, c_v, a=A_RAD):
    return 4.0 * a * np.asarray(T, dtype=float) ** 3 / (rho * c_v)


def fleck_factor(T, k, dt, rho, c_v, a=A_RAD, c=C_LIGHT):
    """``f = 1 / (1 + beta c k dt)`` with ``beta = 4 a T^3 / (rho C_V)``."""
    f = 1.0 / (1.0 + beta(T, rho, c_v, a) * c * np.asarray(k, dtype=float) * dt)
    return f if np.ndim(f) else float(f)


def volumic_emission(f, k, T, dt, volume, a=A_RAD, c=C_LIGHT):
    """Energy emitted by a cell during one step: ``V f k a c T^4 dt``."""
    s = volume * np.asarray(f) * np.asarray(k) * a * c * np.asarray(T, dtype=float) ** 4 * dt
    return s if np.ndim(s) else float(s)


def surface_emission(T_bc, dt, a=A_RAD, c=C_LIGHT, area=1.0):
    """Energy entering through a boundary held at ``T_bc``: ``a c T^4 dt / 4`` per cm^2."""
    return a * c * float(T_bc) ** 4 * dt / 4.0 * area


def update_matter(T, deposited, emitted, rho, c_v, volume):
    """New matter temperature from absorbed minus emitted energy."""
    T_new = np.asarray(T, dtype=float) + (np.asarray(deposited) - np.asarray(emitted)) / (
        rho * c_v * volume)
    # a cell already at 0 K may stay there (nothing to emit, nothing absorbed)
    bad = np.flatnonzero(np.atleast_1d((T_new < 0.0) | ((T_new <= 0.0) & (np.asarray(T) > 0.0))))
    if bad.size:
        raise NonPhysicalTemperature(f"matter temperature became non-positive in cells {bad.tolist()}")
    return T_new if T_new.ndim else float(T_new)


def radiative_temperature(e_r, volume, a=A_RAD):
    """``(E_r / (a V))^(1/4)``."""
    e = np.asarray(e_r, dtype=float)
    if np.any(e < 0.0):
        raise ValueError("radiative energy must be non-negative")
    t = (e / (a * volume)) ** 0.25
    return t if t.ndim else float(t)

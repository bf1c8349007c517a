import numpy as np
import pytest

from cellpop.errors import NonPhysicalTemperature
from cellpop.imc.physics import (A_RAD, C_LIGHT, beta, fleck_factor, opacity, radiative_temperature,
                                 surface_emission, update_matter, volumic_emission)

RHO, D, CV, DT = 3.0, 1.56e23, 8.6177e7, 4e-11
T0 = 11604.0

# oracle values evaluated independently at 30 significant digits
K_ORACLE = 2.99517838321965868e11
F_ORACLE = 1.49948539308051619e-2
S_ORACLE = 7.38752314078821946e9        # V = 0.01 cm^3
E_SURF_ORACLE = 4.11219717830633134e13  # T = 11604000 K, per cm^2


def test_opacity_oracle():
    assert opacity(T0, RHO, D) == pytest.approx(K_ORACLE, rel=1e-12)
    assert opacity(T0, RHO, D) == pytest.approx(2.995e11, rel=1e-3)


def test_opacity_cubic_scaling_and_right_region():
    assert opacity(2 * T0, RHO, D) == pytest.approx(opacity(T0, RHO, D) / 8, rel=1e-14)
    assert opacity(T0, RHO, D) / opacity(T0, RHO, 1.56e13) == pytest.approx(1e10, rel=1e-14)


def test_opacity_rejects_non_positive_temperature():
    with pytest.raises(NonPhysicalTemperature):
        opacity(0.0, RHO, D)
    with pytest.raises(NonPhysicalTemperature):
        opacity(np.array([1.0, -2.0]), RHO, D)


def test_fleck_factor():
    k = opacity(T0, RHO, D)
    assert fleck_factor(T0, k, DT, RHO, CV) == pytest.approx(F_ORACLE, rel=1e-12)
    assert fleck_factor(T0, 0.0, DT, RHO, CV) == 1.0
    # beta c k dt = 1
    b = beta(T0, RHO, CV)
    assert fleck_factor(T0, 1.0 / (b * C_LIGHT * DT), DT, RHO, CV) == pytest.approx(0.5, rel=1e-14)


def test_volumic_emission():
    k = opacity(T0, RHO, D)
    f = fleck_factor(T0, k, DT, RHO, CV)
    s = volumic_emission(f, k, T0, DT, 0.01)
    assert s == pytest.approx(S_ORACLE, rel=1e-12)
    assert volumic_emission(0.0, k, T0, DT, 0.01) == 0.0
    assert volumic_emission(f, k, T0, 2 * DT, 0.01) == pytest.approx(2 * s, rel=1e-15)


def test_surface_emission():
    assert surface_emission(11604000.0, DT) == pytest.approx(E_SURF_ORACLE, rel=1e-12)
    assert surface_emission(0.0, DT) == 0.0
    assert surface_emission(2 * T0, DT) == pytest.approx(16 * surface_emission(T0, DT), rel=1e-14)


def test_update_matter():
    v = 0.01
    assert update_matter(T0, 5.0, 5.0, RHO, CV, v) == T0
    assert update_matter(T0, 5.0 + RHO * CV * v, 5.0, RHO, CV, v) == pytest.approx(T0 + 1, rel=1e-14)
    T = T0
    for _ in range(100):
        T = update_matter(T, 0.0, 0.0, RHO, CV, v)
    assert T == T0
    with pytest.raises(NonPhysicalTemperature):
        update_matter(T0, 0.0, 2 * RHO * CV * v * T0, RHO, CV, v)


def test_radiative_temperature():
    v = 0.01
    assert radiative_temperature(0.0, v) == 0.0
    assert radiative_temperature(A_RAD * v * T0**4, v) == pytest.approx(T0, rel=1e-14)
    assert radiative_temperature(2.0, v) / radiative_temperature(1.0, v) == pytest.approx(2**0.25)

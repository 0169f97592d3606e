"""Material models, thermal occupation and the fluctuation-dissipation relation.

Temperatures are in kelvin and frequencies are angular (rad/s).  Signed
frequencies follow the convention ``S(w) = int <F(t+tau) F(t)> e^{i w tau}``:
``w > 0`` is the emission (cooling) side, ``w < 0`` the absorption (heating)
side of a spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import C, EPS0, HBAR, KB, MU0


@dataclass(frozen=True)
class Material:
    """Flat substrate described by a DC resistivity and a real static permittivity.

    The dielectric function is ``static_eps_real + i/(eps0 * resistivity * w)``.
    """

    name: str
    resistivity: float  # Ohm m
    static_eps_real: float = 1.0

    def __post_init__(self):
        if not (self.resistivity > 0 and math.isfinite(self.resistivity)):
            raise ValueError(f"resistivity must be positive and finite, got {self.resistivity!r}")
        if not self.static_eps_real >= 1:
            raise ValueError(f"static_eps_real must be >= 1, got {self.static_eps_real!r}")


@dataclass(frozen=True)
class ThermalEnvironment:
    temperature: float  # K

    def __post_init__(self):
        if not self.temperature >= 0:
            raise ValueError(f"temperature must be >= 0 K, got {self.temperature!r}")


COPPER = Material("copper", 1.7e-8)
GLASS = Material("glass", 1e9, 5.0)
MATERIALS = {m.name: m for m in (COPPER, GLASS)}


def _check_omega(omega):
    if omega == 0 or not math.isfinite(omega):
        raise ValueError("angular frequency must be finite and nonzero "
                         "(the conductor model has a pole at w = 0)")


def dielectric_function(material: Material, omega: float) -> complex:
    _check_omega(omega)
    eps = complex(material.static_eps_real, 1.0 / (EPS0 * material.resistivity * abs(omega)))
    return eps if omega > 0 else eps.conjugate()


def skin_depth(material: Material, omega: float) -> float:
    """Skin depth ``sqrt(2 rho / (mu0 |w|))`` in metres."""
    _check_omega(omega)
    return math.sqrt(2.0 * material.resistivity / (MU0 * abs(omega)))


def thermal_occupation(env: ThermalEnvironment, omega: float) -> float:
    """Bose-Einstein occupation ``1/(exp(hbar w / kT) - 1)`` for ``w > 0``."""
    if not omega > 0:
        raise ValueError("thermal occupation needs a positive frequency")
    if env.temperature == 0:
        return 0.0
    return 1.0 / math.expm1(HBAR * omega / (KB * env.temperature))


def thermal_energy(env: ThermalEnvironment, omega: float) -> float:
    """Effective noise energy ``hbar w / (1 - exp(-hbar w / kT))`` in joules.

    Equals ``hbar w (n+1)`` for ``w > 0`` and ``hbar |w| n`` for ``w < 0``; it
    tends to ``kT`` when ``hbar |w| << kT``.  Every high-temperature closed form
    in this package has ``kT`` replaced by this quantity.
    """
    if omega == 0:
        return KB * env.temperature
    n = thermal_occupation(env, abs(omega))
    return HBAR * abs(omega) * (n + 1.0 if omega > 0 else n)


def blackbody_electric_spectrum(env: ThermalEnvironment, omega: float) -> float:
    """Free-space electric field spectrum per Cartesian component, (V/m)^2 s."""
    if omega == 0:
        return 0.0
    return omega**2 * thermal_energy(env, omega) / (3 * math.pi * EPS0 * C**3)


def blackbody_magnetic_spectrum(env: ThermalEnvironment, omega: float) -> float:
    """Free-space magnetic field spectrum per Cartesian component, T^2 s."""
    return blackbody_electric_spectrum(env, omega) / C**2


def fdt_spectrum(im_green: float, env: ThermalEnvironment, omega_signed: float) -> float:
    """Noise spectrum from ``Im G`` evaluated at ``|w|``.

    ``2 hbar (n+1) Im G`` on the emission side and ``2 hbar n Im G`` on the
    absorption side.
    """
    _check_omega(omega_signed)
    n = thermal_occupation(env, abs(omega_signed))
    return 2 * HBAR * (n + 1.0 if omega_signed > 0 else n) * im_green

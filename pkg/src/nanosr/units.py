"""Physical constants and the handful of unit conversions the simulator needs.

Everything inside the package is SI. Configs speak cm^-1, angstrom, nm and
debye; they are converted here, once, at the boundary.
"""
from dataclasses import dataclass
import math


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA 2018 values (exact where the SI defines them)."""

    speed_of_light: float = 299_792_458.0  # m/s
    planck: float = 6.626_070_15e-34  # J s
    boltzmann: float = 1.380_649e-23  # J/K
    proton_charge: float = 1.602_176_634e-19  # C
    vacuum_permittivity: float = 8.854_187_8128e-12  # F/m
    avogadro: float = 6.022_140_76e23  # 1/mol

    @property
    def reduced_planck(self) -> float:
        return self.planck / (2.0 * math.pi)

    @property
    def debye(self) -> float:
        # 1 D = 1e-21 / c  C m
        return 1e-21 / self.speed_of_light


CONSTANTS = PhysicalConstants()

C = CONSTANTS.speed_of_light
H = CONSTANTS.planck
HBAR = CONSTANTS.reduced_planck
KB = CONSTANTS.boltzmann
E_CHARGE = CONSTANTS.proton_charge
EPS0 = CONSTANTS.vacuum_permittivity
N_A = CONSTANTS.avogadro
DEBYE = CONSTANTS.debye

ANGSTROM = 1e-10
NM = 1e-9
C_CM = C * 100.0  # cm/s
MEV = 1e-3 * E_CHARGE


def _check_nonneg(value, name):
    if not value >= 0:
        raise ValueError(f"{name} must be >= 0, got {value!r}")


def wavenumber_to_angular_frequency(sigma: float) -> float:
    """Angular frequency (rad/s) of a transition at ``sigma`` cm^-1."""
    _check_nonneg(sigma, "wavenumber")
    return 2.0 * math.pi * C_CM * sigma


def wavenumber_to_energy(sigma: float) -> float:
    """Photon energy in joules for ``sigma`` cm^-1."""
    _check_nonneg(sigma, "wavenumber")
    return H * C_CM * sigma


def energy_to_mev(energy: float) -> float:
    return energy / MEV


def thermal_ratio(sigma: float, temperature: float) -> float:
    """Ratio of the transition energy to kT."""
    if not temperature > 0:
        raise ValueError(f"temperature must be > 0, got {temperature!r}")
    return wavenumber_to_energy(sigma) / (KB * temperature)


def dipole_moment_from_displacement(displacement: float) -> float:
    """Dipole moment 2 e P (C m) for a charge displacement ``P`` given in angstrom."""
    _check_nonneg(displacement, "displacement")
    return 2.0 * E_CHARGE * displacement * ANGSTROM


def to_debye(dipole: float) -> float:
    return dipole / DEBYE

"""Sectioned comb medium and the physical quantities derived from it.

Coordinates put z = 0 at the centre of the medium; section ``m`` occupies
``[m*L0 - d/2, m*L0 + d/2]`` with ``m = i - (M-1)/2`` for ``i = 0..M-1``.
For odd M the ladder is the integer set -M0..M0, for even M it is
half-integer. All quantities are SI (seconds, metres, rad/s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import constants as const


@dataclass(frozen=True)
class CombMedium:
    """Geometry and coupling of the gradient-frequency-comb medium.

    Attributes
    ----------
    M : int
        Number of sections (one control beam per section).
    d : float
        Section length [m].
    L0 : float
        Centre-to-centre section spacing [m], ``L0 >= d``.
    b : float
        Coupling density ``|g|^2 N`` [s^-1 m^-1].
    delta_omega_c : float
        Frequency spacing of adjacent control beams [rad/s].
    gamma31 : float
        Spin-wave decoherence rate [s^-1].
    doppler_td : float
        Doppler dephasing time [s]; ``inf`` disables dephasing.
    """

    M: int
    d: float
    L0: float
    b: float
    delta_omega_c: float
    gamma31: float = 0.0
    doppler_td: float = math.inf

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise ValueError(f"M must be a positive integer, got {self.M!r}")
        if not self.d > 0 or not math.isfinite(self.d):
            raise ValueError(f"section length d must be positive, got {self.d!r}")
        if not self.L0 >= self.d or not math.isfinite(self.L0):
            raise ValueError(f"L0 ({self.L0!r}) must be >= d ({self.d!r})")
        if not self.b >= 0 or not math.isfinite(self.b):
            raise ValueError(f"coupling density b must be >= 0, got {self.b!r}")
        if not self.delta_omega_c > 0 or not math.isfinite(self.delta_omega_c):
            raise ValueError(f"delta_omega_c must be positive, got {self.delta_omega_c!r}")
        if not self.gamma31 >= 0:
            raise ValueError(f"gamma31 must be >= 0, got {self.gamma31!r}")
        if not self.doppler_td > 0:
            raise ValueError(f"doppler_td must be positive, got {self.doppler_td!r}")
        object.__setattr__(self, "M", int(self.M))

    @classmethod
    def from_comb(cls, M, d, L0, zeta_eff, T0, gamma31=0.0, doppler_td=math.inf):
        """Build a medium from the effective thickness and comb period."""
        if not T0 > 0:
            raise ValueError(f"comb period must be positive, got {T0!r}")
        dw = 2 * math.pi / T0
        return cls(M=M, d=d, L0=L0, b=zeta_eff * dw / (4 * d), delta_omega_c=dw,
                   gamma31=gamma31, doppler_td=doppler_td)

    @property
    def indices(self) -> np.ndarray:
        """Section indices m, ordered along +z."""
        return np.arange(self.M) - (self.M - 1) / 2

    @property
    def length(self) -> float:
        return (self.M - 1) * self.L0 + self.d

    @property
    def zeta_eff(self) -> float:
        return effective_thickness(self)

    @property
    def T0(self) -> float:
        return comb_period(self)


@dataclass(frozen=True)
class PhysicalScenario:
    """Atomic and optical parameters from which ``b`` and ``t_d`` follow."""

    signal_frequency: float
    dipole_matrix_element: float
    control_rabi: float
    one_photon_detuning: float
    atomic_density: float
    refractive_index: float = 1.0
    temperature: float = 0.0
    atomic_mass: float = 0.0
    signal_wavenumber: float = 0.0

    def __post_init__(self):
        if self.one_photon_detuning == 0:
            raise ValueError("one_photon_detuning must be nonzero (off-resonant Raman regime)")
        for name in ("signal_frequency", "dipole_matrix_element", "atomic_density"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.refractive_index >= 1:
            raise ValueError("refractive_index must be >= 1")
        if self.control_rabi < 0 or self.temperature < 0 or self.atomic_mass < 0:
            raise ValueError("control_rabi, temperature and atomic_mass must be >= 0")
        if self.signal_wavenumber == 0:
            k = self.refractive_index * self.signal_frequency / const.c
            object.__setattr__(self, "signal_wavenumber", k)


def section_of(z, medium):
    """Section index containing ``z``, or ``None`` if ``z`` lies in a gap."""
    m = round(z / medium.L0 + (medium.M - 1) / 2) - (medium.M - 1) / 2
    if abs(m) > (medium.M - 1) / 2:
        return None
    if abs(z - m * medium.L0) > medium.d / 2 * (1 + 1e-12):
        return None
    return int(m) if float(m).is_integer() else float(m)


def base_detuning(z, medium):
    """Two-photon detuning at ``z`` with no control events applied [rad/s]."""
    m = section_of(z, medium)
    if m is None:
        return 0.0
    return -m * medium.delta_omega_c


def effective_thickness(medium):
    """Effective optical thickness of one section, ``4 b d / delta_omega_c``."""
    if not medium.delta_omega_c > 0:
        raise ValueError("delta_omega_c must be positive")
    return 4 * medium.b * medium.d / medium.delta_omega_c


def comb_period(medium):
    """Rephasing period ``2 pi / delta_omega_c`` [s]."""
    if not medium.delta_omega_c > 0:
        raise ValueError("delta_omega_c must be positive")
    return 2 * math.pi / medium.delta_omega_c


def finesse(medium):
    """Comb finesse ``delta_omega_c / (2 gamma31)``; infinite without decoherence."""
    if medium.gamma31 == 0:
        return math.inf
    return medium.delta_omega_c / (2 * medium.gamma31)


def doppler_time(scenario):
    """Doppler dephasing time ``1 / (sqrt(kB T / m_a) k_s)`` [s].

    Zero temperature gives ``inf`` (atoms at rest never dephase).
    """
    T, m_a, k_s = scenario.temperature, scenario.atomic_mass, scenario.signal_wavenumber
    if T < 0 or not m_a > 0 or not k_s > 0:
        raise ValueError("doppler_time needs T >= 0, atomic_mass > 0, signal_wavenumber > 0")
    if T == 0:
        return math.inf
    return 1.0 / (math.sqrt(const.k * T / m_a) * k_s)


def coupling_from_physical(scenario):
    """Coupling density ``|g|^2 N`` [s^-1 m^-1] from the Raman coupling constant."""
    s = scenario
    if s.one_photon_detuning == 0:
        raise ValueError("one_photon_detuning must be nonzero")
    g2 = (s.signal_frequency / (2 * const.hbar * const.epsilon_0 * const.c * s.refractive_index)
          * (s.dipole_matrix_element * s.control_rabi / s.one_photon_detuning) ** 2)
    return g2 * s.atomic_density

"""Physical constants and display-unit helpers.

All internal numerics are SI: farad, henry, ohm, joule, weber, rad/s.
The CLI can render capacitances in fF, inverse inductances in 1/nH and
frequencies in GHz for readability; conversion happens only at the
output boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

from scipy import constants as _const

#: Magnetic flux quantum h/2e in Wb.
PHI0 = _const.physical_constants["mag. flux quantum"][0]

#: Elementary charge in C.
E_CHARGE = _const.e

#: Reduced flux quantum in Wb (flux-to-phase scale).
PHI0_BAR = PHI0 / (2.0 * _const.pi)


@dataclass(frozen=True)
class PhysicalConstants:
    """Constants a circuit's potential terms depend on."""

    phi0: float = PHI0
    e: float = E_CHARGE

    @property
    def phi0_bar(self) -> float:
        return self.phi0 / (2.0 * _const.pi)


def josephson_energy_from_critical_current(i_c: float) -> float:
    """E_J = I_c * Phi0 / 2pi."""
    return i_c * PHI0_BAR


def critical_current_from_josephson_energy(e_j: float) -> float:
    """I_c = 2pi * E_J / Phi0, the inverse of the energy convention."""
    return e_j / PHI0_BAR


def critical_voltage_from_slip_energy(e_s: float) -> float:
    """V_c = pi * E_S / e for a phase-slip element."""
    return _const.pi * e_s / E_CHARGE

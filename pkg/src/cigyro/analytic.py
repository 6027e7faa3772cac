"""Closed-form Borde-Chu (BCI) and modified Borde-Chu (MBCI) results.

The MBCI applies the scan phase from ``delta_tau`` past the middle of the
pi pulse onward; ``delta_tau = +tau/2`` recovers the original BCI with the
phase on the last pulse only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core_dynamics import HBAR, PhysicalParams


@dataclass(frozen=True)
class BciAnalyticInputs:
    delta_phi0: float
    omega0: float
    tau: float
    delta_tau: float = 0.0
    phi: float = 0.0
    phi20: float = 0.0
    phi30: float = 0.0
    omega_b_free: float = 0.0
    T: float = 0.0

    def __post_init__(self):
        if abs(self.omega0 * self.tau - math.pi) > 1e-12 * math.pi:
            raise ValueError("omega0 * tau == pi required (pi-pulse condition)")
        if abs(self.delta_tau) > 0.5 * self.tau * (1 + 1e-12):
            raise ValueError("|delta_tau| <= tau/2 required")

    @classmethod
    def from_zone_phases(cls, omega0: float, delta_tau: float, phi: float, phi20: float, phi30: float, **kw) -> "BciAnalyticInputs":
        """Zone-1 phase taken as zero, so delta_phi0 = phi30 - 2 phi20."""
        return cls(delta_phi0=phi30 - 2.0 * phi20, omega0=omega0, tau=math.pi / omega0,
                   delta_tau=delta_tau, phi=phi, phi20=phi20, phi30=phi30, **kw)

    @property
    def tau2(self) -> float:
        return 0.5 * self.tau - self.delta_tau


@dataclass(frozen=True)
class SensitivityInputs:
    area_eff: float
    area_0: float
    alpha: float
    S0: float
    m: float
    hbar: float = HBAR

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")


def rotational_phase(params: PhysicalParams, omega_rot: float) -> float:
    """Sagnac phase 4 k L Omega T of the three-zone interferometer."""
    return 4.0 * params.k * params.L * omega_rot * params.T


def rotational_phase_from_area(params: PhysicalParams, omega_rot: float) -> float:
    """Same phase written as 2 Omega A0 m / hbar."""
    return 2.0 * omega_rot * bci_area(params) * params.m / params.hbar


def omega_for_phase(params: PhysicalParams, delta_phi0: float) -> float:
    """Rotation rate that produces a given Sagnac phase."""
    return delta_phi0 / (4.0 * params.k * params.L * params.T)


def fringe_probability(delta_phi):
    return 0.5 * (1.0 - np.cos(delta_phi))


def mbci_amplitude(inputs: BciAnalyticInputs) -> complex:
    """Amplitude of |b> after the third zone of the MBCI (Delta = 0)."""
    half = 0.5 * inputs.omega0 * inputs.tau2
    s, c = math.sin(half), math.cos(half)
    e = lambda x: complex(math.cos(x), -math.sin(x))  # exp(-i x)
    dphi, phi = inputs.delta_phi0, inputs.phi
    bracket = (
        s * c * (e(inputs.phi30) - 1.0) * (1.0 - e(phi))
        + c * c * e(inputs.phi20) * (e(dphi + phi) - 1.0)
        + s * s * e(inputs.phi20) * (e(dphi) - e(phi))
    )
    return 0.5j * e(2.0 * inputs.omega_b_free * inputs.T) * bracket


def exact_fringe_shift(delta_phi0: float, omega0: float, delta_tau: float, tau: float) -> float:
    """Shift of the fringe minimum for the MBCI, quadrant-correct.

    At delta_tau == 0 this returns 0 (the printed closed form), although the
    small-rotation limit approaches -pi/2 from either side.
    """
    if abs(delta_tau) > 0.5 * tau * (1 + 1e-12):
        raise ValueError("|delta_tau| <= tau/2 required")
    tau2 = 0.5 * tau - delta_tau
    s2 = math.sin(0.5 * omega0 * tau2) ** 2
    c2 = math.cos(0.5 * omega0 * tau2) ** 2
    num = (s2 * s2 - c2 * c2) * math.sin(delta_phi0)
    den = (
        s2 * s2 * math.cos(delta_phi0)
        - 0.5 * math.sin(omega0 * tau2) ** 2 * math.cos(2.0 * delta_phi0)
        + c2 * c2 * math.cos(delta_phi0)
    )
    if abs(num) < 1e-300 and abs(den) < 1e-300:
        raise ArithmeticError("fringe shift undefined: numerator and denominator both vanish")
    return math.atan2(num, den)


def approx_fringe_shift(delta_phi0: float, omega0: float, delta_tau: float) -> float:
    """Small-rotation fringe shift -atan(delta_phi0 / sin(omega0 delta_tau))."""
    s = math.sin(omega0 * delta_tau)
    if delta_phi0 == 0.0:
        return 0.0
    if s == 0.0:
        return -math.copysign(0.5 * math.pi, delta_phi0)
    return -math.atan(delta_phi0 / s)


def signal_amplitude_mbci(omega0: float, delta_tau: float) -> float:
    return math.sin(omega0 * delta_tau) ** 2


def eta_mbci(delta_phi0: float, omega0: float, delta_tau: float, signed: bool = False) -> float:
    """Effective-area ratio A_eff / A0 of the MBCI.

    By default the magnitude convention is used: the value is even in
    delta_tau and tends to 1 at both ends. ``signed=True`` keeps the sign of
    sin(omega0 delta_tau), i.e. -shift / delta_phi0 of the small-rotation law.
    """
    if delta_phi0 == 0.0:
        raise ValueError("delta_phi0 must be nonzero (eta is a ratio of shifts)")
    s = math.sin(omega0 * delta_tau)
    if s == 0.0:
        return 0.5 * math.pi / (delta_phi0 if signed else abs(delta_phi0))
    if signed:
        return math.atan(delta_phi0 / s) / delta_phi0
    return math.atan(delta_phi0 / abs(s)) / delta_phi0


def quality_factor_mbci(delta_phi0: float, omega0: float, delta_tau: float) -> float:
    if delta_phi0 == 0.0:
        raise ValueError("delta_phi0 must be nonzero")
    s = math.sin(omega0 * delta_tau)
    if s == 0.0:
        return 0.0
    return s / delta_phi0 * math.atan(delta_phi0 / s)


def bci_area(params: PhysicalParams) -> float:
    """Enclosed area L**2 (2 hbar k / m) / vx of the equivalent BCI."""
    return params.L**2 * params.recoil_velocity / params.vx


def min_measurable_rotation(inputs: SensitivityInputs) -> float:
    """Shot-noise-limited minimum rotation rate (rad/s)."""
    if inputs.S0 <= 0:
        raise ValueError("S0 > 0 required")
    if inputs.area_eff == 0:
        raise ValueError("effective area must be nonzero")
    if inputs.alpha <= 0:
        raise ValueError("alpha > 0 required")
    return inputs.hbar / (2.0 * inputs.m) * math.pi / (abs(inputs.area_eff) * math.sqrt(inputs.alpha * inputs.S0))


def min_measurable_rotation_bci(area_0: float, S0: float, m: float, hbar: float = HBAR) -> float:
    """Ideal BCI (alpha = 1) form, h / (4 m A0 sqrt(S0))."""
    h = 2.0 * math.pi * hbar
    return h / (4.0 * m * area_0 * math.sqrt(S0))


def quality_factor(inputs: SensitivityInputs) -> float:
    return abs(inputs.area_eff / inputs.area_0) * math.sqrt(inputs.alpha)

"""Per-manifold dynamics of a Raman-coupled Lambda atom.

Each momentum manifold {|p, a>, |p + hbar k, e>, |p + 2 hbar k, b>} evolves
independently. The main engine is the adiabatically eliminated two-level
propagator (closed form for piecewise-constant fields); the full three-level
integrator is kept only as a validation oracle.

All frequencies are angular (rad/s) and Hamiltonians are returned divided
by hbar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

HBAR = 1.054571817e-34
RB87_MASS = 1.44316e-25
RB_D2_K = 8.0556e6


def recoil_resonance(k: float = RB_D2_K, m: float = RB87_MASS, hbar: float = HBAR) -> float:
    """Difference detuning offset that puts the p = 0 manifold on resonance."""
    return 2.0 * hbar * k**2 / m


@dataclass(frozen=True)
class PhysicalParams:
    """Atom and laser constants.

    ``omega0`` defaults to ``3.3 * vx / L`` so that the dimensionless knob
    omega0 * T equals 3.3 for the default geometry. ``delta0_diff`` defaults
    to the recoil resonance of the p = 0 manifold.
    """

    k: float = RB_D2_K
    m: float = RB87_MASS
    omega0: float = 3.3 * 300.0 / 3e-3
    delta0_diff: float = field(default_factory=recoil_resonance)
    delta0_common: float = 2 * math.pi * 1e9
    vx: float = 300.0
    L: float = 3e-3
    hbar: float = HBAR

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError("k > 0 required")
        if not self.m > 0:
            raise ValueError("m > 0 required")
        if not self.omega0 >= 0:
            raise ValueError("omega0 >= 0 required")
        if not self.vx > 0:
            raise ValueError("vx > 0 required")
        if not self.L > 0:
            raise ValueError("L > 0 required")
        if not self.hbar > 0:
            raise ValueError("hbar > 0 required")

    @property
    def T(self) -> float:
        """Transit time across one beam length, L / vx."""
        return self.L / self.vx

    @property
    def omega0_T(self) -> float:
        return self.omega0 * self.T

    @property
    def recoil_velocity(self) -> float:
        return 2.0 * self.hbar * self.k / self.m

    def with_omega0_T(self, value: float) -> "PhysicalParams":
        """Copy with omega0 chosen so that omega0 * T == value."""
        return replace(self, omega0=value / self.T)


@dataclass
class ManifoldAmplitudes:
    """Interaction-picture amplitudes (alpha, beta) of one or many manifolds.

    ``alpha``, ``beta`` and ``p`` may be scalars or equally shaped arrays.
    """

    alpha: complex | np.ndarray
    beta: complex | np.ndarray
    p: float | np.ndarray = 0.0

    def norm(self):
        return np.abs(self.alpha) ** 2 + np.abs(self.beta) ** 2


@dataclass
class ThreeLevelAmplitudes:
    alpha: complex
    beta: complex
    xi: complex
    p: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.xi], dtype=complex)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.as_array()) ** 2))


@dataclass(frozen=True)
class Detunings:
    big_delta: float | np.ndarray
    small_delta: float

    @property
    def usable_for_elimination(self) -> bool:
        return self.small_delta != 0.0


def detuning_difference(params: PhysicalParams, p):
    """Two-photon detuning of manifold p, including recoil and Doppler terms."""
    k, m = params.k, params.m
    return params.delta0_diff - 2.0 * k * np.asarray(p) / m - 2.0 * params.hbar * k**2 / m


def detuning_common(params: PhysicalParams) -> float:
    return params.delta0_common + params.hbar * params.k**2 / (2.0 * params.m)


def detunings(params: PhysicalParams, p) -> Detunings:
    return Detunings(detuning_difference(params, p), detuning_common(params))


def effective_hamiltonian(omega_eff: float, big_delta: float, coupling_phase: float) -> np.ndarray:
    """Two-level Hamiltonian / hbar after adiabatic elimination (Omega1 == Omega2)."""
    if omega_eff < 0:
        raise ValueError("omega_eff >= 0 required")
    half = 0.5 * omega_eff
    off = half * np.exp(-1j * coupling_phase)
    return np.array(
        [[0.5 * big_delta + half, off], [np.conj(off), -0.5 * big_delta + half]],
        dtype=complex,
    )


def manifold_propagator(omega_eff, big_delta, coupling_phase, dt):
    """Matrix elements (u_aa, u_ab, u_ba, u_bb) of exp(-i H dt) for constant H.

    Arguments broadcast against each other, so one call can evolve every
    manifold of a packet (array ``big_delta``) or a batch of phase-scan
    points (array ``coupling_phase``) at once.
    """
    omega_eff = np.asarray(omega_eff, dtype=float)
    big_delta = np.asarray(big_delta, dtype=float)
    half_rabi = 0.5 * np.sqrt(omega_eff**2 + big_delta**2)
    theta = half_rabi * dt
    cos_t = np.cos(theta)
    # sin(theta)/half_rabi, finite as half_rabi -> 0
    sinc_t = dt * np.sinc(theta / np.pi)
    light_shift = np.exp(-0.5j * omega_eff * dt)
    cpl = np.exp(-1j * np.asarray(coupling_phase, dtype=float))
    u_aa = light_shift * (cos_t - 0.5j * big_delta * sinc_t)
    u_bb = light_shift * (cos_t + 0.5j * big_delta * sinc_t)
    u_ab = light_shift * (-0.5j * omega_eff * sinc_t) * cpl
    u_ba = light_shift * (-0.5j * omega_eff * sinc_t) * np.conj(cpl)
    return u_aa, u_ab, u_ba, u_bb


def step_manifold(state: ManifoldAmplitudes, omega_eff, big_delta, coupling_phase, dt: float) -> ManifoldAmplitudes:
    """Exact evolution over ``dt`` with piecewise-constant fields."""
    if not dt > 0:
        raise ValueError("dt > 0 required")
    u_aa, u_ab, u_ba, u_bb = manifold_propagator(omega_eff, big_delta, coupling_phase, dt)
    alpha = u_aa * state.alpha + u_ab * state.beta
    beta = u_ba * state.alpha + u_bb * state.beta
    return ManifoldAmplitudes(alpha, beta, state.p)


def adiabatic_excited_estimate(state: ManifoldAmplitudes, omega1, omega2, small_delta: float):
    """Excited-state amplitude implied by adiabatic elimination."""
    if small_delta == 0:
        raise ValueError("small_delta must be nonzero for adiabatic elimination")
    return (omega1 * state.alpha + omega2 * state.beta) / (2.0 * small_delta)


def kinetic_phase(params: PhysicalParams, p, t: float):
    """Lab-frame phase shared by both amplitudes of manifold p at time t."""
    hk2 = 2.0 * params.hbar * params.k
    p = np.asarray(p, dtype=float)
    return -(p**2 + (p + hk2) ** 2) * t / (4.0 * params.m * params.hbar)


# --- three-level oracle -----------------------------------------------------


def _three_level_rhs(y, omega1, omega2, big_delta, small_delta):
    a, b, x = y
    return np.array(
        [
            -1j * (0.5 * big_delta * a + 0.5 * omega1 * x),
            -1j * (-0.5 * big_delta * b + 0.5 * omega2 * x),
            -1j * (-small_delta * x + 0.5 * omega1 * a + 0.5 * omega2 * b),
        ]
    )


def max_three_level_step(omega1: float, omega2: float, big_delta: float, small_delta: float) -> float:
    fastest = max(abs(small_delta), abs(omega1), abs(omega2), abs(big_delta))
    return math.inf if fastest == 0 else 0.02 / fastest


def step_three_level(
    state: ThreeLevelAmplitudes,
    omega1: float,
    omega2: float,
    big_delta: float,
    small_delta: float,
    dt: float,
) -> ThreeLevelAmplitudes:
    """Integrate the three-level equations over ``dt`` with constant fields.

    Classical RK4, internally subdivided so that each substep respects
    h <= 0.02 / max(|delta|, Omega1, Omega2, |Delta|).
    """
    if not dt > 0:
        raise ValueError("dt > 0 required")
    n = max(1, math.ceil(dt / max_three_level_step(omega1, omega2, big_delta, small_delta)))
    h = dt / n
    y = state.as_array()
    norm0 = float(np.sum(np.abs(y) ** 2))
    args = (omega1, omega2, big_delta, small_delta)
    for _ in range(n):
        k1 = _three_level_rhs(y, *args)
        k2 = _three_level_rhs(y + 0.5 * h * k1, *args)
        k3 = _three_level_rhs(y + 0.5 * h * k2, *args)
        k4 = _three_level_rhs(y + h * k3, *args)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    drift = abs(float(np.sum(np.abs(y) ** 2)) - norm0)
    if drift > 1e-6:
        raise ArithmeticError(f"three-level norm drift {drift:.3e} exceeds 1e-6")
    return ThreeLevelAmplitudes(y[0], y[1], y[2], state.p)


@njit(cache=True)
def _gaussian_traversal_kernel(y0, omega1_peak, omega2_peak, big_delta, small_delta, t_total, t_center, t_width, n_steps):
    h = t_total / n_steps
    y = y0.copy()
    k1 = np.empty(3, dtype=np.complex128)
    k2 = np.empty(3, dtype=np.complex128)
    k3 = np.empty(3, dtype=np.complex128)
    k4 = np.empty(3, dtype=np.complex128)
    tmp = np.empty(3, dtype=np.complex128)
    max_xi2 = 0.0
    max_est2 = 0.0
    for i in range(n_steps):
        t = i * h
        for stage in range(4):
            if stage == 0:
                ts = t
                for j in range(3):
                    tmp[j] = y[j]
            elif stage == 1:
                ts = t + 0.5 * h
                for j in range(3):
                    tmp[j] = y[j] + 0.5 * h * k1[j]
            elif stage == 2:
                ts = t + 0.5 * h
                for j in range(3):
                    tmp[j] = y[j] + 0.5 * h * k2[j]
            else:
                ts = t + h
                for j in range(3):
                    tmp[j] = y[j] + h * k3[j]
            s = (ts - t_center) / t_width
            env = math.exp(-0.5 * s * s)
            o1 = omega1_peak * env
            o2 = omega2_peak * env
            da = -1j * (0.5 * big_delta * tmp[0] + 0.5 * o1 * tmp[2])
            db = -1j * (-0.5 * big_delta * tmp[1] + 0.5 * o2 * tmp[2])
            dx = -1j * (-small_delta * tmp[2] + 0.5 * o1 * tmp[0] + 0.5 * o2 * tmp[1])
            if stage == 0:
                k1[0], k1[1], k1[2] = da, db, dx
            elif stage == 1:
                k2[0], k2[1], k2[2] = da, db, dx
            elif stage == 2:
                k3[0], k3[1], k3[2] = da, db, dx
            else:
                k4[0], k4[1], k4[2] = da, db, dx
        for j in range(3):
            y[j] = y[j] + (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
        xi2 = abs(y[2]) ** 2
        if xi2 > max_xi2:
            max_xi2 = xi2
        s = (t + h - t_center) / t_width
        env = math.exp(-0.5 * s * s)
        est = (omega1_peak * env * y[0] + omega2_peak * env * y[1]) / (2.0 * small_delta)
        est2 = abs(est) ** 2
        if est2 > max_est2:
            max_est2 = est2
    return y, max_xi2, max_est2


@dataclass(frozen=True)
class AdiabaticComparison:
    """Two-level vs three-level traversal of a Gaussian beam, central manifold."""

    delta0_over_omega1: float
    omega1_peak: float
    small_delta: float
    pop_b_two_level: float
    pop_b_three_level: float
    max_xi2: float
    max_xi2_estimate: float
    norm_three_level: float

    @property
    def discrepancy(self) -> float:
        return abs(self.pop_b_two_level - self.pop_b_three_level)


def single_photon_peak(params: PhysicalParams, delta0_over_omega1: float) -> tuple[float, float]:
    """Peak Omega1 (= Omega2) and common detuning for a given delta0 / Omega1 ratio.

    Solves Omega1**2 / (2 delta) = omega0 with delta = ratio * Omega1 + recoil.
    """
    recoil = params.hbar * params.k**2 / (2.0 * params.m)
    a = 2.0 * params.omega0 * delta0_over_omega1
    omega1 = 0.5 * (a + math.sqrt(a * a + 8.0 * params.omega0 * recoil))
    return omega1, delta0_over_omega1 * omega1 + recoil


def compare_adiabatic(
    params: PhysicalParams,
    delta0_over_omega1: float,
    p: float = 0.0,
    window_half_width: float | None = None,
    n_slices: int = 4000,
    omega1_peak: float | None = None,
) -> AdiabaticComparison:
    """Propagate one manifold through the Gaussian beam both ways.

    The single-photon Rabi frequencies have profile exp(-x**2 / 2 L**2) so that
    the eliminated two-photon coupling is omega0 * exp(-(x/L)**2).
    ``omega1_peak`` overrides the value implied by the ratio (0 switches the
    beam off).
    """
    hw = 2.5 * params.L if window_half_width is None else window_half_width
    omega1, small_delta = single_photon_peak(params, delta0_over_omega1)
    if omega1_peak is not None:
        omega1 = omega1_peak
    omega_eff_peak = omega1**2 / (2.0 * small_delta)
    big_delta = float(detuning_difference(params, p))

    edges = np.linspace(-hw, hw, n_slices + 1)
    centers = 0.5 * (edges[1:] + edges[:-1])
    dt = (edges[1] - edges[0]) / params.vx
    state = ManifoldAmplitudes(1.0 + 0j, 0j, p)
    for x in centers:
        state = step_manifold(state, omega_eff_peak * math.exp(-((x / params.L) ** 2)), big_delta, 0.0, dt)
    pop_two = float(abs(state.beta) ** 2)

    t_total = 2.0 * hw / params.vx
    h_max = max_three_level_step(omega1, omega1, big_delta, small_delta)
    n_steps = max(1000, math.ceil(t_total / h_max)) if math.isfinite(h_max) else 1000
    y0 = np.array([1.0 + 0j, 0j, 0j])
    y, max_xi2, max_est2 = _gaussian_traversal_kernel(
        y0, omega1, omega1, big_delta, small_delta, t_total, 0.5 * t_total, params.T, n_steps
    )
    norm3 = float(np.sum(np.abs(y) ** 2))
    if abs(norm3 - 1.0) > 1e-6:
        raise ArithmeticError(f"three-level norm drift {abs(norm3 - 1.0):.3e} exceeds 1e-6")
    return AdiabaticComparison(
        delta0_over_omega1=delta0_over_omega1,
        omega1_peak=omega1,
        small_delta=small_delta,
        pop_b_two_level=pop_two,
        pop_b_three_level=float(abs(y[1]) ** 2),
        max_xi2=float(max_xi2),
        max_xi2_estimate=float(max_est2),
        norm_three_level=norm3,
    )

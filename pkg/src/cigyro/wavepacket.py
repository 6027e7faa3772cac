"""Momentum-space wavepacket propagation through a beam schedule.

Amplitudes are stored in the interaction picture, one (alpha, beta) pair per
momentum manifold on a uniform grid, normalized so that
sum(|alpha|**2 + |beta|**2) * dp == 1. Kinetic phases are applied only when
position-space wavefunctions are reconstructed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .beams import BeamSchedule, RotationModel, coupling_phases
from .core_dynamics import PhysicalParams, detuning_difference, kinetic_phase, manifold_propagator

NORM_TOL = 1e-9


class NumericalFailure(ArithmeticError):
    """Propagation lost probability beyond tolerance."""


@dataclass(frozen=True)
class MomentumGrid:
    p_values: np.ndarray
    center: float = 0.0

    def __post_init__(self):
        p = np.asarray(self.p_values, dtype=float)
        if p.ndim != 1 or p.size < 16:
            raise ValueError("momentum grid needs N >= 16 points")
        d = np.diff(p)
        if not np.allclose(d, d[0], rtol=1e-9, atol=0):
            raise ValueError("momentum grid must be uniformly spaced")
        if not math.isclose(p[0] + p[-1], 2 * self.center, abs_tol=1e-9 * d[0]):
            raise ValueError("momentum grid must be symmetric about the packet center")
        object.__setattr__(self, "p_values", p)

    @classmethod
    def symmetric(cls, params: PhysicalParams, span_hk: float = 6.0, n: int = 512, center: float = 0.0) -> "MomentumGrid":
        hk = params.hbar * params.k
        return cls(np.linspace(center - span_hk * hk, center + span_hk * hk, n), center)

    @property
    def dp(self) -> float:
        return float(self.p_values[1] - self.p_values[0])

    @property
    def count(self) -> int:
        return int(self.p_values.size)


@dataclass
class WavepacketState:
    grid: MomentumGrid
    alpha: np.ndarray
    beta: np.ndarray
    t_elapsed: float = 0.0

    def norm(self) -> float:
        return float(np.sum(np.abs(self.alpha) ** 2 + np.abs(self.beta) ** 2) * self.grid.dp)

    def copy(self) -> "WavepacketState":
        return WavepacketState(self.grid, self.alpha.copy(), self.beta.copy(), self.t_elapsed)


@dataclass(frozen=True)
class TrajectorySample:
    x: float
    centroid_a: float
    centroid_b: float
    pop_a: float
    pop_b: float


@dataclass
class TrajectoryRecord:
    samples: list[TrajectorySample] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.samples])


def init_gaussian_packet(grid: MomentumGrid, params: PhysicalParams, half_width: float | None = None) -> WavepacketState:
    """Packet in |a> whose position amplitude has 1/e half-width ``half_width`` (default 1/k).

    |psi(z)| ~ exp(-(z / w)**2) has momentum amplitude exp(-(p w / 2 hbar)**2).
    """
    w = 1.0 / params.k if half_width is None else half_width
    p = grid.p_values - grid.center
    alpha = np.exp(-((p * w / (2.0 * params.hbar)) ** 2)).astype(complex)
    # Gaussian integral of |alpha|^2 over the real line
    exact = math.sqrt(2.0 * math.pi) * params.hbar / w
    discrete = float(np.sum(np.abs(alpha) ** 2) * grid.dp)
    if abs(discrete - exact) / exact > 1e-6:
        raise ValueError("momentum grid too narrow: truncated norm loss exceeds 1e-6")
    alpha /= math.sqrt(discrete)
    return WavepacketState(grid, alpha, np.zeros_like(alpha), 0.0)


def populations(state: WavepacketState) -> tuple[float, float]:
    dp = state.grid.dp
    return float(np.sum(np.abs(state.alpha) ** 2) * dp), float(np.sum(np.abs(state.beta) ** 2) * dp)


def conjugate_z_grid(grid: MomentumGrid, params: PhysicalParams) -> np.ndarray:
    """Position grid whose DFT pairs exactly with ``grid`` (span 2 pi hbar / dp)."""
    n = grid.count
    dz = 2.0 * math.pi * params.hbar / (n * grid.dp)
    return (np.arange(n) - n // 2) * dz


def _check_z_grid(grid: MomentumGrid, params: PhysicalParams, z: np.ndarray) -> None:
    period = 2.0 * math.pi * params.hbar / grid.dp
    if z.size > 1 and (z.max() - z.min()) >= period * (1 + 1e-12):
        raise ValueError(f"z grid span {z.max() - z.min():.3e} m aliases (period {period:.3e} m)")


def _kernel(p: np.ndarray, z: np.ndarray, hbar: float) -> np.ndarray:
    return np.exp(-1j * np.outer(z, p) / hbar)


def position_wavefunctions(state: WavepacketState, params: PhysicalParams, z_grid=None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """psi_a(z), psi_b(z) with kinetic phases, returned with the z grid used.

    Kernel exp(-i p z / hbar); |b> is synthesized at its physical momentum
    p + 2 hbar k. Normalized so that sum |psi|^2 dz equals the momentum norm.
    """
    grid = state.grid
    z = conjugate_z_grid(grid, params) if z_grid is None else np.asarray(z_grid, dtype=float)
    _check_z_grid(grid, params, z)
    p = grid.p_values
    phase = np.exp(1j * kinetic_phase(params, p, state.t_elapsed))
    scale = grid.dp / math.sqrt(2.0 * math.pi * params.hbar)
    psi_a = _kernel(p, z, params.hbar) @ (state.alpha * phase) * scale
    psi_b = _kernel(p + 2.0 * params.hbar * params.k, z, params.hbar) @ (state.beta * phase) * scale
    return psi_a, psi_b, z


def momentum_amplitudes(psi_a, psi_b, z_grid, grid: MomentumGrid, params: PhysicalParams, t_elapsed: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`position_wavefunctions` on a conjugate z grid."""
    z = np.asarray(z_grid, dtype=float)
    dz = float(z[1] - z[0])
    p = grid.p_values
    scale = dz / math.sqrt(2.0 * math.pi * params.hbar)
    phase = np.exp(-1j * kinetic_phase(params, p, t_elapsed))
    alpha = np.conj(_kernel(p, z, params.hbar)).T @ psi_a * scale * phase
    beta = np.conj(_kernel(p + 2.0 * params.hbar * params.k, z, params.hbar)).T @ psi_b * scale * phase
    return alpha, beta


def centroid_deflection(psi, z_grid) -> float:
    z = np.asarray(z_grid, dtype=float)
    dens = np.abs(psi) ** 2
    dz = float(z[1] - z[0]) if z.size > 1 else 1.0
    total = float(np.sum(dens) * dz)
    if total <= 1e-12:
        raise ValueError("centroid undefined for an empty state")
    return float(np.sum(z * dens) * dz / total)


def packet_half_width(psi, z_grid, level: float = math.exp(-1)) -> float:
    """Half-width of |psi| at ``level`` of its peak, by linear interpolation."""
    z = np.asarray(z_grid, dtype=float)
    amp = np.abs(psi)
    i0 = int(np.argmax(amp))
    target = level * amp[i0]

    def crossing(indices):
        prev = i0
        for i in indices:
            if amp[i] < target:
                f = (amp[prev] - target) / (amp[prev] - amp[i])
                return z[prev] + f * (z[i] - z[prev])
            prev = i
        raise ValueError("profile does not fall below the requested level")

    right = crossing(range(i0 + 1, z.size))
    left = crossing(range(i0 - 1, -1, -1))
    return 0.5 * (right - left)


def _trajectory_sample(state: WavepacketState, params: PhysicalParams, x: float, z: np.ndarray) -> TrajectorySample:
    pa, pb = populations(state)
    psi_a, psi_b, _ = position_wavefunctions(state, params, z)
    try:
        ca = centroid_deflection(psi_a, z)
    except ValueError:
        ca = math.nan
    try:
        cb = centroid_deflection(psi_b, z)
    except ValueError:
        cb = math.nan
    return TrajectorySample(x, ca, cb, pa, pb)


def evolve_amplitudes(alpha, beta, big_delta, omegas, phases, dts):
    """Apply the slice propagators in order.

    ``alpha``/``beta`` have shape (..., N); ``phases`` has shape (n_slices, ...)
    broadcastable against the leading batch axes. Returns new arrays.
    """
    alpha = np.array(alpha, dtype=complex)
    beta = np.array(beta, dtype=complex)
    for omega, phase, dt in zip(omegas, phases, dts):
        u_aa, u_ab, u_ba, u_bb = manifold_propagator(omega, big_delta, np.asarray(phase)[..., None], dt)
        alpha, beta = u_aa * alpha + u_ab * beta, u_ba * alpha + u_bb * beta
    return alpha, beta


def manifold_detunings(grid: MomentumGrid, params: PhysicalParams, include_doppler: bool = True) -> np.ndarray:
    if include_doppler:
        return np.asarray(detuning_difference(params, grid.p_values), dtype=float)
    return np.zeros(grid.count)


def propagate(
    state: WavepacketState,
    schedule: BeamSchedule,
    model: RotationModel,
    params: PhysicalParams,
    record_every: int = 5,
    include_doppler: bool = True,
    z_grid=None,
) -> tuple[WavepacketState, TrajectoryRecord]:
    """Carry the packet across every slice of ``schedule``.

    Every ``record_every`` slices (and after the last one) a trajectory sample
    is taken at the slice's exit edge; ``record_every=0`` disables recording.
    ``include_doppler=False`` forces the difference detuning to zero.
    """
    norm0 = state.norm()
    if abs(norm0 - 1.0) > NORM_TOL:
        raise NumericalFailure(f"input state not normalized (norm={norm0:.12f})")
    big_delta = manifold_detunings(state.grid, params, include_doppler)
    phases = coupling_phases(schedule, model, params)
    z = conjugate_z_grid(state.grid, params) if z_grid is None else np.asarray(z_grid, dtype=float)

    out = state.copy()
    record = TrajectoryRecord()
    n = len(schedule.slices)
    for i, s in enumerate(schedule.slices):
        dt = s.width / params.vx
        out.alpha, out.beta = evolve_amplitudes(out.alpha, out.beta, big_delta, [s.omega_eff], [phases[i]], [dt])
        out.t_elapsed += dt
        if record_every and ((i + 1) % record_every == 0 or i == n - 1):
            record.samples.append(_trajectory_sample(out, params, s.x_center + 0.5 * s.width, z))

    drift = abs(out.norm() - norm0)
    if drift > NORM_TOL:
        raise NumericalFailure(f"norm drift {drift:.3e} exceeds {NORM_TOL:g}")
    return out, record

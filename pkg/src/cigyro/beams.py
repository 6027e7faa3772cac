"""Sliced beam schedules and the rotation-induced laser phase.

A schedule is an ordered list of slices the atom crosses at speed vx. Each
slice carries a constant two-photon Rabi frequency and an applied scan phase;
the rotation phase is added per slice by :func:`total_coupling_phase`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core_dynamics import PhysicalParams


@dataclass(frozen=True)
class Slice:
    x_center: float
    width: float
    omega_eff: float
    applied_phase: float = 0.0
    # position at which the rotation phase is evaluated; top-hat zones use
    # the zone center so the whole zone shares one laser phase
    phase_x: float | None = None

    @property
    def rotation_x(self) -> float:
        return self.x_center if self.phase_x is None else self.phase_x


@dataclass(frozen=True)
class BeamSchedule:
    slices: tuple[Slice, ...]
    window: tuple[float, float]

    def __post_init__(self):
        if not self.slices:
            raise ValueError("schedule needs at least one slice")
        x = self.window[0]
        tol = 1e-9 * (self.window[1] - self.window[0])
        for s in self.slices:
            if s.omega_eff < 0:
                raise ValueError("omega_eff >= 0 required for every slice")
            if not s.width > 0:
                raise ValueError("slice widths must be positive")
            if abs((s.x_center - 0.5 * s.width) - x) > tol:
                raise ValueError("slices must tile the window without gaps or overlap")
            x = s.x_center + 0.5 * s.width
        if abs(x - self.window[1]) > tol:
            raise ValueError("slices must cover the window")

    def __len__(self) -> int:
        return len(self.slices)

    @property
    def x_centers(self) -> np.ndarray:
        return np.array([s.x_center for s in self.slices])

    @property
    def widths(self) -> np.ndarray:
        return np.array([s.width for s in self.slices])

    @property
    def omegas(self) -> np.ndarray:
        return np.array([s.omega_eff for s in self.slices])

    @property
    def applied_phases(self) -> np.ndarray:
        return np.array([s.applied_phase for s in self.slices])

    @property
    def rotation_xs(self) -> np.ndarray:
        return np.array([s.rotation_x for s in self.slices])

    def pulse_area(self, params: PhysicalParams) -> float:
        return float(np.sum(self.omegas * self.widths) / params.vx)


@dataclass(frozen=True)
class RotationModel:
    """Rigid rotation of the apparatus about an axis at ``axis_x``.

    ``entry_x`` is where the clock starts (t_arrival = 0) and where the atom
    moves parallel to the beam wavefronts. With ``comoving_source`` the atom
    is launched by the rotating apparatus, so the phase follows the beam's
    displacement relative to the atom and does not depend on ``axis_x``.
    """

    omega_rot: float = 0.0
    axis_x: float = 0.0
    entry_x: float = 0.0
    comoving_source: bool = True

    @classmethod
    def at(cls, omega_rot: float, entry_x: float = 0.0, axis_x: float | None = None, **kw) -> "RotationModel":
        return cls(omega_rot=omega_rot, axis_x=entry_x if axis_x is None else axis_x, entry_x=entry_x, **kw)


class PhaseTarget(str, Enum):
    LAST_ZONE = "last_zone"
    FROM_DELTA_TAU = "from_delta_tau"


@dataclass(frozen=True)
class BciGeometry:
    """Three top-hat zones (pi/2, pi, pi/2) with centers ``zone_separation`` apart.

    Durations default to the ideal pulse areas for the given omega0.
    """

    zone_separation: float
    tau: float
    delta_tau: float = 0.0

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau > 0 required")
        if abs(self.delta_tau) > 0.5 * self.tau * (1 + 1e-12):
            raise ValueError("|delta_tau| <= tau/2 required")

    @classmethod
    def for_params(cls, params: PhysicalParams, delta_tau_over_tau: float = 0.5) -> "BciGeometry":
        if params.omega0 <= 0:
            raise ValueError("omega0 > 0 required for a pulsed interferometer")
        tau = math.pi / params.omega0
        return cls(zone_separation=params.L, tau=tau, delta_tau=delta_tau_over_tau * tau)

    @property
    def durations(self) -> tuple[float, float, float]:
        return (0.5 * self.tau, self.tau, 0.5 * self.tau)


def gaussian_profile(params: PhysicalParams, x, power: float = 2.0):
    return params.omega0 * np.exp(-np.abs(np.asarray(x) / params.L) ** power)


def gaussian_schedule(
    params: PhysicalParams,
    n_slices: int,
    window_half_width: float,
    delta_l: float,
    phi: float,
    power: float = 2.0,
) -> BeamSchedule:
    """Uniformly sliced Gaussian beam; ``phi`` is applied to slices with x >= delta_l."""
    if n_slices < 3:
        raise ValueError("n_slices >= 3 required")
    if not window_half_width > 0:
        raise ValueError("window_half_width > 0 required")
    if abs(delta_l) > window_half_width:
        raise ValueError(f"delta_l={delta_l} lies outside the window +/-{window_half_width}")
    edges = np.linspace(-window_half_width, window_half_width, n_slices + 1)
    centers = 0.5 * (edges[1:] + edges[:-1])
    widths = np.diff(edges)
    omegas = gaussian_profile(params, centers, power)
    slices = tuple(
        Slice(float(x), float(w), float(o), float(phi) if x >= delta_l else 0.0)
        for x, w, o in zip(centers, widths, omegas)
    )
    return BeamSchedule(slices, (-window_half_width, window_half_width))


def bci_schedule(
    params: PhysicalParams,
    geometry: BciGeometry,
    phi: float,
    phase_target: PhaseTarget | str = PhaseTarget.LAST_ZONE,
) -> BeamSchedule:
    """Three-zone Borde-Chu pulse train with zone centers at 0, L, 2L.

    With ``from_delta_tau`` the pi pulse is split at ``delta_tau`` from its
    middle and ``phi`` is applied from there through the third zone.
    """
    target = PhaseTarget(phase_target)
    if params.omega0 <= 0:
        raise ValueError("omega0 > 0 required for a pulsed interferometer")
    v, sep = params.vx, geometry.zone_separation
    d1, d2, d3 = geometry.durations
    half = (0.5 * d1 * v, 0.5 * d2 * v, 0.5 * d3 * v)
    centers = (0.0, sep, 2.0 * sep)
    if half[0] + half[1] > sep or half[1] + half[2] > sep:
        raise ValueError("zones overlap: zone_separation too short for the pulse durations")

    pieces: list[tuple[float, float, float, float, float]] = []  # (x0, x1, omega, phase, phase_x)
    pieces.append((-half[0], half[0], params.omega0, 0.0, centers[0]))
    pieces.append((half[0], centers[1] - half[1], 0.0, 0.0, None))
    if target is PhaseTarget.LAST_ZONE:
        pieces.append((centers[1] - half[1], centers[1] + half[1], params.omega0, 0.0, centers[1]))
    else:
        split = centers[1] + geometry.delta_tau * v
        pieces.append((centers[1] - half[1], split, params.omega0, 0.0, centers[1]))
        pieces.append((split, centers[1] + half[1], params.omega0, phi, centers[1]))
    pieces.append((centers[1] + half[1], centers[2] - half[2], 0.0, 0.0, None))
    pieces.append((centers[2] - half[2], centers[2] + half[2], params.omega0, phi, centers[2]))

    slices = []
    x = pieces[0][0]
    for x0, x1, omega, phase, phase_x in pieces:
        width = x1 - x0
        if width <= 1e-15 * sep:
            continue
        # abut exactly on the previous slice to keep the tiling exact
        width = x1 - x
        slices.append(Slice(x + 0.5 * width, width, omega, phase, phase_x))
        x = x1
    return BeamSchedule(tuple(slices), (pieces[0][0], pieces[-1][1]))


def rotation_phase_at(model: RotationModel, params: PhysicalParams, x):
    """Two-photon phase 2 k dy from the beam's displacement at slice x.

    dy = (x - axis) * Omega * t_arrival with t_arrival = (x - entry) / vx.
    """
    x = np.asarray(x, dtype=float)
    t_arrival = (x - model.entry_x) / params.vx
    return 2.0 * params.k * (x - model.axis_x) * model.omega_rot * t_arrival


def launch_phase_at(model: RotationModel, params: PhysicalParams, x):
    """Phase 2 k y_atom of an atom launched with the apparatus' transverse velocity."""
    x = np.asarray(x, dtype=float)
    if not model.comoving_source:
        return np.zeros_like(x)
    t_arrival = (x - model.entry_x) / params.vx
    return 2.0 * params.k * (model.entry_x - model.axis_x) * model.omega_rot * t_arrival


def relative_rotation_phase(model: RotationModel, params: PhysicalParams, x):
    return rotation_phase_at(model, params, x) - launch_phase_at(model, params, x)


def total_coupling_phase(schedule: BeamSchedule, model: RotationModel, params: PhysicalParams, slice_index: int) -> float:
    if not 0 <= slice_index < len(schedule.slices):
        raise IndexError(f"slice index {slice_index} out of range for {len(schedule.slices)} slices")
    s = schedule.slices[slice_index]
    return float(s.applied_phase + relative_rotation_phase(model, params, s.rotation_x))


def coupling_phases(schedule: BeamSchedule, model: RotationModel, params: PhysicalParams) -> np.ndarray:
    """Vectorized :func:`total_coupling_phase` over every slice."""
    return schedule.applied_phases + relative_rotation_phase(model, params, schedule.rotation_xs)

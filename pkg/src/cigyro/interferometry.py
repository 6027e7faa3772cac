"""Phase scans, fringe fits and rotation-sensitivity figures of merit.

A scan sweeps the applied phase phi over one period and records the final
|b> population. Static and rotating scans are fitted by their first harmonic;
the shift of the fringe minimum gives the effective area through
shift = -2 m Omega A_eff / hbar.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import analytic
from .beams import (
    BciGeometry,
    BeamSchedule,
    PhaseTarget,
    RotationModel,
    bci_schedule,
    coupling_phases,
    gaussian_schedule,
)
from .core_dynamics import PhysicalParams
from .wavepacket import (
    NORM_TOL,
    MomentumGrid,
    NumericalFailure,
    TrajectoryRecord,
    evolve_amplitudes,
    init_gaussian_packet,
    manifold_detunings,
    propagate,
)

DEFAULT_N_PHI = 64
DEFAULT_OMEGA_ROT = 0.03
DEFAULT_S0 = 1e6


class DegenerateFit(ValueError):
    """Fringe amplitude too small for the phase to be defined."""


@dataclass(frozen=True)
class CiSetup:
    """Gaussian single-zone beam with the scan phase applied from ``delta_l``.

    Positions are given in units of the beam length L: the simulated window
    is +/- ``window_half_width_L`` and the phase-start offset is measured as a
    fraction of the scan length ``scan_length_L`` (l = L by default).
    """

    params: PhysicalParams
    delta_l_over_l: float = 12 / 25
    n_slices: int = 500
    window_half_width_L: float = 2.5
    scan_length_L: float = 1.0
    power: float = 2.0

    @property
    def delta_l(self) -> float:
        return self.delta_l_over_l * self.scan_length_L * self.params.L

    def __call__(self, phi: float) -> BeamSchedule:
        return gaussian_schedule(
            self.params, self.n_slices, self.window_half_width_L * self.params.L, self.delta_l, phi, self.power
        )

    def rotation(self, omega_rot: float, axis_offset: float = 0.0) -> RotationModel:
        """Rotation referenced to the beam center, axis displaced by ``axis_offset`` (m)."""
        return RotationModel(omega_rot=omega_rot, axis_x=axis_offset, entry_x=0.0)


@dataclass(frozen=True)
class BciSetup:
    """Three-zone interferometer; MBCI when the phase starts inside the pi pulse."""

    params: PhysicalParams
    delta_tau_over_tau: float = 0.5
    phase_target: PhaseTarget = PhaseTarget.LAST_ZONE

    @property
    def geometry(self) -> BciGeometry:
        return BciGeometry.for_params(self.params, self.delta_tau_over_tau)

    def __call__(self, phi: float) -> BeamSchedule:
        return bci_schedule(self.params, self.geometry, phi, self.phase_target)

    def rotation(self, omega_rot: float, axis_offset: float = 0.0) -> RotationModel:
        """Rotation referenced to the first zone, axis displaced by ``axis_offset`` (m)."""
        return RotationModel(omega_rot=omega_rot, axis_x=axis_offset, entry_x=0.0)


ScheduleFactory = Callable[[float], BeamSchedule]


@dataclass(frozen=True)
class ScanResult:
    phi_values: np.ndarray
    p_b_values: np.ndarray
    config_digest: str

    def __post_init__(self):
        if np.any(np.diff(self.phi_values) <= 0):
            raise ValueError("phi values must be strictly increasing")
        if np.any(self.p_b_values < -1e-12) or np.any(self.p_b_values > 1 + 1e-12):
            raise ValueError("populations must lie in [0, 1]")


@dataclass(frozen=True)
class FringeFit:
    offset: float
    amplitude_alpha: float
    phi_min: float
    residual_rms: float


@dataclass(frozen=True)
class SensitivityReport:
    delta_phi_shift: float
    area_eff: float
    eta: float
    alpha: float
    quality_q: float
    omega_mm: float
    omega_rot_used: float
    static_fit: FringeFit | None = field(default=None, compare=False)
    rotating_fit: FringeFit | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SweepPoint:
    position: float
    report: SensitivityReport | None
    error: str = ""


def config_digest(*parts) -> str:
    return hashlib.sha256(repr(parts).encode()).hexdigest()[:16]


def phase_grid(n_phi: int = DEFAULT_N_PHI, offset: float = 0.0) -> np.ndarray:
    if n_phi < 16:
        raise ValueError("n_phi >= 16 required")
    return offset + 2.0 * math.pi * np.arange(n_phi) / n_phi


def run_phase_scan(
    schedule_factory: ScheduleFactory,
    model: RotationModel,
    params: PhysicalParams,
    n_phi: int = DEFAULT_N_PHI,
    grid: MomentumGrid | None = None,
    include_doppler: bool = True,
    phase_offset: float = 0.0,
) -> ScanResult:
    """Final P(b) for a uniform grid of applied phases over one period.

    Every phase point starts from a fresh packet. Schedules that differ only
    in their phases are propagated together as one batch.
    """
    phis = phase_grid(n_phi, phase_offset)
    grid = MomentumGrid.symmetric(params) if grid is None else grid
    packet = init_gaussian_packet(grid, params)
    schedules = [schedule_factory(float(phi)) for phi in phis]
    first = schedules[0]
    big_delta = manifold_detunings(grid, params, include_doppler)
    dts = first.widths / params.vx
    omegas = first.omegas
    for s in schedules[1:]:
        if len(s) != len(first) or not (np.array_equal(s.omegas, omegas) and np.array_equal(s.widths, first.widths)):
            raise ValueError("phase scan schedules must share their slice layout")
    phases = np.stack([coupling_phases(s, model, params) for s in schedules], axis=1)
    alpha0 = np.broadcast_to(packet.alpha, (n_phi, grid.count))
    beta0 = np.broadcast_to(packet.beta, (n_phi, grid.count))
    alpha, beta = evolve_amplitudes(alpha0, beta0, big_delta, omegas, phases, dts)
    p_a = np.sum(np.abs(alpha) ** 2, axis=1) * grid.dp
    p_b = np.sum(np.abs(beta) ** 2, axis=1) * grid.dp
    drift = np.abs(p_a + p_b - 1.0)
    if np.any(drift > NORM_TOL):
        bad = int(np.argmax(drift))
        raise NumericalFailure(f"norm drift {drift[bad]:.3e} at phi={phis[bad]:.6f}")
    digest = config_digest(schedule_factory, model, params, n_phi, grid.count, include_doppler, phase_offset)
    return ScanResult(phis, p_b, digest)


def _first_harmonic(scan: ScanResult) -> complex:
    return complex(np.mean(scan.p_b_values * np.exp(-1j * scan.phi_values)))


def fit_fringe(scan: ScanResult) -> FringeFit:
    """Least-squares fit of P = C - (alpha/2) cos(phi - phi_min).

    On a uniform full-period grid this is the projection onto the first
    Fourier harmonic; alpha equals P_max - P_min of the fitted sinusoid.
    """
    phi, p = scan.phi_values, scan.p_b_values
    h = _first_harmonic(scan)
    alpha = 4.0 * abs(h)
    if alpha < 1e-9:
        raise DegenerateFit(f"fringe amplitude {alpha:.3e} too small to define a phase")
    # h = -(alpha/4) exp(-i phi_min)
    phi_min = -math.atan2((-h).imag, (-h).real)
    phi_min = (phi_min + math.pi) % (2 * math.pi) - math.pi
    offset = float(np.mean(p))
    model = offset - 0.5 * alpha * np.cos(phi - phi_min)
    resid = float(np.sqrt(np.mean((p - model) ** 2)))
    return FringeFit(offset, min(alpha, 1.0), phi_min, resid)


def wrap_phase(x: float) -> float:
    """Wrap into (-pi, pi]."""
    y = math.remainder(x, 2.0 * math.pi)
    return math.pi if y == -math.pi else y


def fringe_shift(fit_rotating: FringeFit, fit_static: FringeFit) -> float:
    for f in (fit_rotating, fit_static):
        if f.amplitude_alpha < 1e-9:
            raise DegenerateFit("fringe shift needs non-degenerate fits")
    return wrap_phase(fit_rotating.phi_min - fit_static.phi_min)


def locate_extremum(scan: ScanResult, kind: str = "min") -> float:
    """Position of the scan's minimum or maximum on its trigonometric interpolant.

    Independent of the first-harmonic fit: all harmonics resolved by the grid
    are kept, and the grid extremum is refined by Newton iteration.
    """
    if kind not in ("min", "max"):
        raise ValueError("kind must be 'min' or 'max'")
    phi, p = scan.phi_values, scan.p_b_values
    n = phi.size
    coef = np.fft.rfft(p) / n
    m = np.arange(coef.size)
    if n % 2 == 0:
        coef[-1] *= 0.5
    phi0 = phi[0]

    def derivs(x):
        e = np.exp(1j * m * (x - phi0))
        d1 = 2.0 * np.real(np.sum(1j * m * coef * e))
        d2 = 2.0 * np.real(np.sum(-(m**2) * coef * e))
        return d1, d2

    i = int(np.argmin(p) if kind == "min" else np.argmax(p))
    x = float(phi[i])
    step = phi[1] - phi[0]
    for _ in range(50):
        d1, d2 = derivs(x)
        if d2 == 0:
            break
        dx = -d1 / d2
        dx = max(-step, min(step, dx))
        x += dx
        if abs(dx) < 1e-14:
            break
    return wrap_phase(x)


def extremum_shift(scan_rotating: ScanResult, scan_static: ScanResult, kind: str = "min") -> float:
    return wrap_phase(locate_extremum(scan_rotating, kind) - locate_extremum(scan_static, kind))


def effective_area(shift: float, omega_rot: float, params: PhysicalParams) -> float:
    if omega_rot == 0:
        raise ValueError("effective area needs a nonzero rotation rate")
    return -shift * params.hbar / (2.0 * params.m * omega_rot)


def sensitivity_report(
    params: PhysicalParams,
    schedule_factory: ScheduleFactory,
    model: RotationModel,
    n_phi: int = DEFAULT_N_PHI,
    S0: float = DEFAULT_S0,
    grid: MomentumGrid | None = None,
    include_doppler: bool = True,
    phase_offset: float = 0.0,
) -> SensitivityReport:
    """Static and rotating scans reduced to shift, A_eff, eta, alpha, Q and Omega_mm."""
    if model.omega_rot == 0:
        raise ValueError("sensitivity report needs a nonzero rotation rate")
    kw = dict(n_phi=n_phi, grid=grid, include_doppler=include_doppler, phase_offset=phase_offset)
    static = run_phase_scan(schedule_factory, replace(model, omega_rot=0.0), params, **kw)
    rotating = run_phase_scan(schedule_factory, model, params, **kw)
    fit_s, fit_r = fit_fringe(static), fit_fringe(rotating)
    shift = fringe_shift(fit_r, fit_s)
    area = effective_area(shift, model.omega_rot, params)
    a0 = analytic.bci_area(params)
    alpha = fit_s.amplitude_alpha
    inputs = analytic.SensitivityInputs(area, a0, alpha, S0, params.m, params.hbar)
    q = analytic.quality_factor(inputs)
    omega_mm = analytic.min_measurable_rotation(inputs) if area != 0 else math.inf
    return SensitivityReport(shift, area, area / a0, alpha, q, omega_mm, model.omega_rot, fit_s, fit_r)


def _sweep_one(args) -> SweepPoint:
    position, setup, omega_rot, n_phi, S0, grid, include_doppler = args
    try:
        report = sensitivity_report(
            setup.params, setup, setup.rotation(omega_rot), n_phi, S0, grid, include_doppler
        )
    except (ValueError, ArithmeticError) as exc:
        return SweepPoint(position, None, f"{type(exc).__name__}: {exc}")
    return SweepPoint(position, report)


def sweep_phase_start(
    params: PhysicalParams,
    positions: Sequence[float],
    kind: str = "ci",
    omega_rot: float = DEFAULT_OMEGA_ROT,
    S0: float = DEFAULT_S0,
    n_phi: int = DEFAULT_N_PHI,
    grid: MomentumGrid | None = None,
    include_doppler: bool = True,
    workers: int = 1,
    **setup_kw,
) -> list[SweepPoint]:
    """One sensitivity report per phase-start position.

    ``kind='ci'`` reads positions as delta_l / l of the Gaussian beam;
    ``kind='mbci'`` reads them as delta_tau / tau of the three-zone
    interferometer. Failed points carry their error and the sweep continues.
    """
    jobs = []
    for pos in positions:
        if kind == "ci":
            setup = CiSetup(params, delta_l_over_l=float(pos), **setup_kw)
            if abs(setup.delta_l) > setup.window_half_width_L * params.L:
                jobs.append((float(pos), None))
                continue
        elif kind == "mbci":
            if abs(pos) > 0.5:
                jobs.append((float(pos), None))
                continue
            setup = BciSetup(params, float(pos), PhaseTarget.FROM_DELTA_TAU, **setup_kw)
        else:
            raise ValueError(f"unknown sweep kind {kind!r}")
        jobs.append((float(pos), (float(pos), setup, omega_rot, n_phi, S0, grid, include_doppler)))

    todo = [j[1] for j in jobs if j[1] is not None]
    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            done = list(pool.map(_sweep_one, todo))
    else:
        done = [_sweep_one(a) for a in todo]
    it = iter(done)
    out = []
    for pos, args in jobs:
        out.append(next(it) if args is not None else SweepPoint(pos, None, "ValueError: position outside the sweepable range"))
    return out


def trajectory_figures(
    params: PhysicalParams,
    phis: Sequence[float] = (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi),
    delta_l_over_l: float = 12 / 25,
    model: RotationModel | None = None,
    grid: MomentumGrid | None = None,
    record_every: int = 5,
    include_doppler: bool = True,
    **setup_kw,
) -> dict[float, TrajectoryRecord]:
    """Centroid trajectories through the CI beam for several applied phases."""
    setup = CiSetup(params, delta_l_over_l=delta_l_over_l, **setup_kw)
    model = RotationModel() if model is None else model
    grid = MomentumGrid.symmetric(params) if grid is None else grid
    out = {}
    for phi in phis:
        packet = init_gaussian_packet(grid, params)
        _, record = propagate(packet, setup(phi), model, params, record_every, include_doppler)
        out[float(phi)] = record
    return out

"""Particle on a ring: standing waves from counter-propagating eigenpaths.

Two cables drift at +v and -v around a periodic spatial domain of
circumference L.  Each cable is retuned so the pattern it lays down along
its world line advances in phase at the de Broglie rate p = m*v per unit
distance; the pattern then closes coherently on itself after a wrap exactly
when p*L = 2*pi*k, i.e. at the eigen speeds

    v_k = 2*pi*k / (m*L),

consistent with v = sqrt(2*E_k/m) for E_k = (2*pi*k)**2 / (2*m*L**2).  At an
eigen speed the accumulated density shows a stationary k-wavelength spatial
mode; at other speeds the dominant mode's phase drifts from wrap to wrap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density import DensityField, accumulate
from .lattice import PERIOD, LatticeSpec
from .paths import Frame, build_cable, concatenate, right_envelope, with_frame


def eigen_speed(k: int, mass: float, circumference: float) -> float:
    """Speed closing the ring in phase: momentum quantization p = m*v = 2*pi*k/L."""
    if k < 1:
        raise ValueError("mode number k must be >= 1")
    if not (mass > 0 and circumference > 0):
        raise ValueError("mass and circumference must be positive")
    v = 2.0 * math.pi * k / (mass * circumference)
    if v >= 1.0:
        raise ValueError(f"relativistic eigen speed {v:.3f}; increase L or m")
    return v


@dataclass(frozen=True)
class RingSpec:
    """Ring run parameters.

    ``speed`` defaults to the eigen speed of ``mode``; pass another value
    (e.g. 1.5x eigen) to probe off-eigen behaviour.  ``cycles`` is the
    temporal extent in carrier periods of the written pattern.
    """

    circumference: float
    mode: int = 1
    speed: float | None = None
    cycles: int = 8

    def __post_init__(self):
        if not (self.circumference > 0):
            raise ValueError("circumference must be positive")
        if self.mode < 1:
            raise ValueError("mode must be >= 1")
        if self.speed is not None and not (0.0 <= self.speed < 1.0):
            raise ValueError(f"speed must lie in [0, 1) (got {self.speed})")
        if self.cycles < 1:
            raise ValueError("cycles must be >= 1")

    def resolved_speed(self, mass: float) -> float:
        if self.speed is not None:
            return self.speed
        return eigen_speed(self.mode, mass, self.circumference)


def run_ring(spec: RingSpec, lattice: LatticeSpec, M: int, origin_cell: int = 0,
             threads: int = 1) -> DensityField:
    """Write the counter-propagating pair on the periodic domain.

    The two drifted cables are concatenated into one continuous path (the
    joining bridge is excluded from counting) and accumulated with x wrapped
    modulo the circumference.  ``origin_cell`` rotates the write origin by
    whole cells; by ring symmetry this only rolls the field.  The degenerate
    ``speed=0`` run writes plain carrier columns with no spatial mode.
    """
    mass = lattice.mass
    cell = lattice.cell_physical
    v = spec.resolved_speed(mass)
    x_cells_f = spec.circumference / cell
    x_cells = round(x_cells_f)
    if abs(x_cells_f - x_cells) > 1e-9 or x_cells < 2:
        raise ValueError(
            f"circumference must be a whole number of cells (L/cell = {x_cells_f:.6f})")

    if v > 0.0:
        t_scale = lattice.mass_scale / (v * v)  # carrier at the de Broglie rate m*v^2
    else:
        t_scale = lattice.mass_scale
    carrier_period = PERIOD * t_scale

    repeats = spec.cycles + 2
    cable = build_cable((0.0, 0.0), lattice, M=M, repeats=repeats)
    pair = []
    for drift in (v, -v):
        frame = Frame(t_scale=t_scale, x_scale=lattice.mass_scale, drift=drift, x0=0.0, t0=0.0)
        pair.append(with_frame(cable, frame))
    path = concatenate(pair)

    lo = path.steady_window[0]
    t0_cell = math.ceil(lo / cell - 1e-9)
    t_cells = int(round(spec.cycles * carrier_period / cell))
    field = DensityField(cell, t0_cell, 0, t_cells, x_cells, wrap_x=True)
    accumulate(field, right_envelope(path), clip=True, threads=threads)
    if origin_cell % x_cells:
        shift = origin_cell % x_cells
        field.adolescent[:] = np.roll(field.adolescent, shift, axis=1)
        field.senescent[:] = np.roll(field.senescent, shift, axis=1)
    return field


@dataclass(frozen=True)
class RingMetrics:
    """Spatial-mode summary of a ring field.

    ``phase_drift`` is the linear drift of the dominant mode's spatial phase
    in radians per carrier period (per slice when no period is given);
    ``mode_purity`` is the dominant mode's share of time-averaged spectral
    power (NaN for the degenerate mode-0 case).
    """

    dominant_mode: int
    phase_drift: float
    mode_purity: float
    n_slices: int


def standing_wave_metrics(field: DensityField, slice_cells: int | None = None,
                          period_cells: float | None = None) -> RingMetrics:
    """Fourier-analyze the adolescent channel per time slice.

    Rows are aggregated into slices of ``slice_cells`` rows (default: 32
    slices) so each slice integrates enough world-line passes to expose the
    spatial mode; the dominant mode maximizes time-averaged power, and its
    phase across slices is fit linearly for the drift rate.
    """
    data = field.adolescent
    if not data.any():
        raise ValueError("all-zero field")
    t_cells = data.shape[0]
    if slice_cells is None:
        slice_cells = max(1, t_cells // 32)
    n_slices = t_cells // slice_cells
    if n_slices < 1:
        raise ValueError("slice_cells exceeds the field extent")
    trimmed = data[: n_slices * slice_cells]
    slices = trimmed.reshape(n_slices, slice_cells, -1).sum(axis=1).astype(float)

    spectra = np.fft.rfft(slices, axis=1)
    power = np.mean(np.abs(spectra) ** 2, axis=0)
    dominant = int(np.argmax(power))
    if dominant == 0:
        return RingMetrics(dominant_mode=0, phase_drift=0.0, mode_purity=math.nan,
                           n_slices=n_slices)
    purity = float(power[dominant] / power.sum())

    coef = spectra[:, dominant]
    live = np.abs(coef) > 1e-12
    idx = np.nonzero(live)[0]
    if len(idx) < 2:
        return RingMetrics(dominant_mode=dominant, phase_drift=0.0, mode_purity=purity,
                           n_slices=n_slices)
    phases = np.unwrap(np.angle(coef[live]))
    slope, _ = np.polyfit(idx.astype(float), phases, 1)  # rad per slice
    if period_cells is not None:
        drift = float(slope * (period_cells / slice_cells))
    else:
        drift = float(slope)
    return RingMetrics(dominant_mode=dominant, phase_drift=drift, mode_purity=purity,
                       n_slices=n_slices)


def drift_in_cells_per_period(metrics: RingMetrics, x_cells: int) -> float:
    """Convert a phase drift (rad/period) to node motion in cells per period."""
    if metrics.dominant_mode == 0:
        return 0.0
    return abs(metrics.phase_drift) * x_cells / (2.0 * math.pi * metrics.dominant_mode)

"""Writing the low-velocity propagator phase along rays of constant velocity.

Along a ray x = v*t the un-normalized kernel reduces to a single complex
exponential whose frequency is the carrier reduced by the classical action
rate:

    K(x, t) = exp(-i*m*t*(1 - x**2 / (2*t**2))) = exp(-i * omega(v) * t),
    omega(v) = m * (1 - v**2 / 2).

A ray is written by retuning a cable so its loop period matches
2*pi/omega(v), shearing it onto the ray, and accumulating its counted
segments; a region is written by sweeping a fan of such rays and comparing
each ray's density profile against the analytic frequency law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density import (DensityField, accumulate, accumulate_profile, best_lag, fit_sinusoid,
                      _cell_ceil, _cell_floor)
from .lattice import PERIOD, LatticeSpec
from .paths import EntwinedPath, Frame, build_cable, cords_per_shift, right_envelope, with_frame


def analytic_kernel(x, t, mass: float):
    """Unit-modulus, un-normalized kernel exp(-i*m*t*(1 - x^2/(2 t^2))).

    Valid in the low-velocity regime |x/t| << 1 (not enforced); ``t`` must
    be positive.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("analytic kernel requires t > 0")
    out = np.exp(-1j * mass * t * (1.0 - x**2 / (2.0 * t**2)))
    return complex(out) if out.ndim == 0 else out


def reduced_frequency(v: float, mass: float) -> float:
    """Carrier frequency along a constant-velocity ray: m*(1 - v^2/2)."""
    return mass * (1.0 - v * v / 2.0)


@dataclass(frozen=True)
class RaySpec:
    """A constant-velocity ray with its reduced carrier frequency."""

    v: float
    omega: float
    t_span: tuple[float, float]

    def __post_init__(self):
        if not abs(self.v) < 1.0:
            raise ValueError(f"superluminal ray velocity {self.v}")
        if not (self.omega > 0):
            raise ValueError("omega must be positive")
        if not (0 < self.t_span[0] < self.t_span[1]):
            raise ValueError("t_span must satisfy 0 < start < end")

    @classmethod
    def from_velocity(cls, v: float, mass: float, t_span: tuple[float, float]) -> "RaySpec":
        return cls(v=v, omega=reduced_frequency(v, mass), t_span=t_span)


@dataclass(frozen=True)
class RegionSpec:
    """A space-time window plus the fan of rays that writes it."""

    x_range: tuple[float, float]
    t_range: tuple[float, float]
    ray_fan: tuple[float, ...]
    lattice: LatticeSpec

    def __post_init__(self):
        if not (0 < self.t_range[0] < self.t_range[1]):
            raise ValueError("t_range must satisfy 0 < start < end (rays emanate from the origin)")
        if not self.x_range[0] < self.x_range[1]:
            raise ValueError("x_range must be increasing")
        for v in self.ray_fan:
            if not abs(v) < 1.0:
                raise ValueError(f"superluminal ray velocity {v} in fan")


def region_for_fan(lattice: LatticeSpec, ray_fan, start_periods: float = 2.0,
                   n_periods: float = 6.0) -> RegionSpec:
    """Region sized so every ray in the fan stays inside for the whole window."""
    mass = lattice.mass
    t_c = 2.0 * math.pi / mass
    t_range = (start_periods * t_c, (start_periods + n_periods) * t_c)
    pad = 2.5 * lattice.mass_scale
    v_lo = min(min(ray_fan), 0.0)
    v_hi = max(max(ray_fan), 0.0)
    x_range = (v_lo * t_range[1] - pad, v_hi * t_range[1] + pad)
    return RegionSpec(x_range=x_range, t_range=t_range, ray_fan=tuple(ray_fan), lattice=lattice)


def write_ray(ray: RaySpec, spec: LatticeSpec, M: int) -> EntwinedPath:
    """Build the retuned, sheared cable whose counted density writes the ray.

    The cable's internal period is stretched by m/omega(v) so the carrier
    along the ray oscillates at omega(v); spatial loop size stays at the
    lattice's own scale.  Enough repeats are concatenated for the steady
    region to cover ``t_span``.
    """
    mass = spec.mass
    t_scale = spec.mass_scale * mass / ray.omega
    counts = cords_per_shift(spec.n, M)
    if not any(counts):
        raise ValueError("M too small: cable would be empty")
    last_shift = max(k for k, c in enumerate(counts) if c) * spec.eps
    span = ray.t_span[1] - ray.t_span[0]
    # steady window of a cable with R repeats: [last_shift + 4, 4R - 1 + eps]
    need = last_shift + 5.0 - spec.eps + span / t_scale
    repeats = max(1, math.ceil(need / PERIOD))
    cable = build_cable((0.0, 0.0), spec, M=M, repeats=repeats)
    t0 = ray.t_span[0] - t_scale * cable.steady_window[0]
    frame = Frame(t_scale=t_scale, x_scale=spec.mass_scale, drift=ray.v, x0=0.0, t0=t0)
    path = with_frame(cable, frame)
    path.extras["ray"] = ray
    return path


@dataclass(frozen=True)
class RayReport:
    """Per-ray comparison between written density and the frequency law.

    Convention: after per-ray amplitude normalization and with the fitted
    phase origin free, the right-mover profile plays cos(omega*t) (the
    kernel's real part) and the left-mover profile its quarter-period delay
    sin(omega*t) (minus the imaginary part); ``lag_cells`` checks that
    delay, ``rms_residual`` the fit to the carrier.
    """

    v: float
    omega_expected: float
    omega_fitted: float
    amplitude: float
    rms_residual: float
    lag_cells: int
    lag_expected_cells: float

    @property
    def rel_freq_error(self) -> float:
        return abs(self.omega_fitted - self.omega_expected) / self.omega_expected

    @property
    def rel_rms(self) -> float:
        return self.rms_residual / self.amplitude if self.amplitude else math.inf


@dataclass(frozen=True)
class RegionResult:
    field: DensityField
    reports: tuple[RayReport, ...]

    @property
    def max_rel_freq_error(self) -> float:
        return max(r.rel_freq_error for r in self.reports)

    @property
    def max_rel_rms(self) -> float:
        return max(r.rel_rms for r in self.reports)


def _ray_report(ray: RaySpec, profile: dict[str, np.ndarray], cell: float, t0_cell: int) -> RayReport:
    ado = profile["adolescent"]
    sen = profile["senescent"]
    centers = (t0_cell + np.arange(len(ado)) + 0.5) * cell
    fit = fit_sinusoid(centers, ado.astype(float))
    period_cells = 2.0 * np.pi / ray.omega / cell
    max_lag = int(period_cells) + 2
    lag = best_lag(ado, sen, max_lag)
    return RayReport(
        v=ray.v,
        omega_expected=ray.omega,
        omega_fitted=float(fit.omega),
        amplitude=float(fit.amplitude),
        rms_residual=float(fit.rms_residual),
        lag_cells=lag,
        lag_expected_cells=float(period_cells / 4.0),
    )


def write_region(region: RegionSpec, M: int, threads: int = 1) -> RegionResult:
    """Sweep every ray in the fan, sum their densities, compare per ray.

    Rays are independent work units; the summed field and the per-ray
    reports are identical for any ``threads``.  Cells outside the region
    are clipped silently (cables overhang the window by construction).
    """
    if not region.ray_fan:
        raise ValueError("ray fan is empty")
    lattice = region.lattice
    mass = lattice.mass
    cell = lattice.cell_physical
    t0_cell = _cell_floor(region.t_range[0], cell)
    t_cells = _cell_ceil(region.t_range[1], cell) - t0_cell
    x0_cell = _cell_floor(region.x_range[0], cell)
    x_cells = _cell_ceil(region.x_range[1], cell) - x0_cell

    def one_ray(v: float):
        ray = RaySpec.from_velocity(v, mass, region.t_range)
        path = write_ray(ray, lattice, M)
        env = right_envelope(path)
        sub = DensityField(cell, t0_cell, x0_cell, t_cells, x_cells)
        accumulate(sub, env, clip=True)
        profile = accumulate_profile(env, cell, t0_cell, t_cells, clip=True)
        return sub, _ray_report(ray, profile, cell, t0_cell)

    if threads > 1 and len(region.ray_fan) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one_ray, region.ray_fan))
    else:
        results = [one_ray(v) for v in region.ray_fan]

    field = DensityField(cell, t0_cell, x0_cell, t_cells, x_cells)
    reports = []
    for sub, report in results:
        field.adolescent += sub.adolescent
        field.senescent += sub.senescent
        reports.append(report)
    return RegionResult(field=field, reports=tuple(reports))


RAY_REPORT_COLUMNS = ("v", "omega_expected", "omega_fitted", "rel_freq_error",
                      "amplitude", "rms_residual", "lag_cells", "lag_expected_cells")


def write_ray_report(reports, fh) -> None:
    """Tab-separated per-ray records plus one summary line."""
    fh.write("\t".join(RAY_REPORT_COLUMNS) + "\n")
    for r in reports:
        fh.write(
            f"{r.v!r}\t{r.omega_expected!r}\t{r.omega_fitted!r}\t{r.rel_freq_error!r}\t"
            f"{r.amplitude!r}\t{r.rms_residual!r}\t{r.lag_cells}\t{r.lag_expected_cells!r}\n"
        )
    worst = max(r.rel_freq_error for r in reports)
    fh.write(f"# max_rel_freq_error\t{worst!r}\n")

import math

import numpy as np
import pytest

from entwined.density import accumulate_profile, best_lag, fit_sinusoid, _cell_ceil, _cell_floor
from entwined.lattice import LatticeSpec
from entwined.paths import right_envelope
from entwined.propagator import (RaySpec, RegionSpec, analytic_kernel, reduced_frequency,
                                 region_for_fan, write_ray, write_region)


@pytest.fixture(scope="module")
def lattice():
    return LatticeSpec.for_mass(20, mass=1.0)


def ray_profile(lattice, ray, M):
    path = write_ray(ray, lattice, M)
    env = right_envelope(path)
    cell = lattice.cell_physical
    t0 = _cell_floor(ray.t_span[0], cell)
    t_cells = _cell_ceil(ray.t_span[1], cell) - t0
    prof = accumulate_profile(env, cell, t0, t_cells, clip=True)
    centers = (t0 + np.arange(t_cells) + 0.5) * cell
    return prof, centers


# --- analytic kernel -------------------------------------------------------


def test_kernel_at_origin_is_pure_carrier():
    for t in (0.5, 2.0, 9.0):
        assert analytic_kernel(0.0, t, 1.3) == pytest.approx(np.exp(-1.3j * t))


def test_kernel_velocity_identity():
    # exp(-i m t (1 - x^2/2t^2)) == exp(-i m t) * exp(i m v^2 t / 2) with v = x/t
    for x, t, m in ((0.3, 2.0, 1.0), (-0.5, 4.0, 0.7), (1.0, 10.0, 2.0)):
        v = x / t
        assert analytic_kernel(x, t, m) == pytest.approx(
            np.exp(-1j * m * t) * np.exp(1j * m * v * v * t / 2.0))


def test_kernel_has_unit_modulus():
    x = np.linspace(-2, 2, 41)
    t = np.full_like(x, 5.0)
    np.testing.assert_allclose(np.abs(analytic_kernel(x, t, 1.0)), 1.0, rtol=1e-12)


def test_kernel_requires_positive_time():
    with pytest.raises(ValueError):
        analytic_kernel(0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        analytic_kernel(0.0, -1.0, 1.0)


# --- ray specs -------------------------------------------------------------


def test_ray_spec_validation():
    with pytest.raises(ValueError, match="superluminal"):
        RaySpec(v=1.0, omega=1.0, t_span=(1.0, 2.0))
    with pytest.raises(ValueError):
        RaySpec(v=0.1, omega=1.0, t_span=(0.0, 2.0))
    ray = RaySpec.from_velocity(0.2, 1.0, (1.0, 2.0))
    assert ray.omega == pytest.approx(0.98)


def test_reduced_frequency_values():
    assert reduced_frequency(0.0, 1.0) == 1.0
    assert reduced_frequency(0.2, 1.0) == pytest.approx(0.98)
    assert reduced_frequency(-0.2, 2.0) == pytest.approx(1.96)


def test_region_spec_validation(lattice):
    with pytest.raises(ValueError, match="origin"):
        RegionSpec(x_range=(-1, 1), t_range=(0.0, 2.0), ray_fan=(0.0,), lattice=lattice)
    with pytest.raises(ValueError, match="superluminal"):
        RegionSpec(x_range=(-1, 1), t_range=(1.0, 2.0), ray_fan=(1.2,), lattice=lattice)
    with pytest.raises(ValueError):
        RegionSpec(x_range=(1, -1), t_range=(1.0, 2.0), ray_fan=(0.0,), lattice=lattice)


# --- single rays -----------------------------------------------------------


def test_zero_velocity_ray_oscillates_at_the_carrier(lattice):
    span = (2 * math.pi, 10 * math.pi)
    ray = RaySpec.from_velocity(0.0, lattice.mass, span)
    prof, centers = ray_profile(lattice, ray, M=20)
    fit = fit_sinusoid(centers, prof["adolescent"].astype(float))
    assert abs(fit.omega - lattice.mass) / lattice.mass < 0.01


def test_written_ray_is_one_continuous_path(lattice):
    ray = RaySpec.from_velocity(0.15, lattice.mass, (2 * math.pi, 6 * math.pi))
    path = write_ray(ray, lattice, M=8)
    path.validate_continuity()
    assert path.steady_window[0] <= ray.t_span[0]
    assert path.steady_window[1] >= ray.t_span[1]


def test_drifting_ray_frequency_reduced(lattice):
    span = (2 * math.pi, 12 * math.pi)
    ray = RaySpec.from_velocity(0.2, lattice.mass, span)
    prof, centers = ray_profile(lattice, ray, M=20)
    fit = fit_sinusoid(centers, prof["adolescent"].astype(float))
    assert abs(fit.omega - 0.98 * lattice.mass) / (0.98 * lattice.mass) < 0.01


def test_ray_channels_lag_by_quarter_period(lattice):
    span = (2 * math.pi, 12 * math.pi)
    for v in (0.0, 0.2):
        ray = RaySpec.from_velocity(v, lattice.mass, span)
        prof, _ = ray_profile(lattice, ray, M=20)
        period_cells = 2 * math.pi / ray.omega / lattice.cell_physical
        lag = best_lag(prof["adolescent"], prof["senescent"], int(period_cells / 2) + 2)
        assert abs(lag - period_cells / 4.0) <= 1.0


def test_ray_amplitude_uniform_along_interior(lattice, calibration):
    span = (2 * math.pi, 14 * math.pi)
    ray = RaySpec.from_velocity(0.1, lattice.mass, span)
    prof, centers = ray_profile(lattice, ray, M=40)
    half = len(centers) // 2
    first = fit_sinusoid(centers[:half], prof["adolescent"][:half].astype(float))
    second = fit_sinusoid(centers[half:], prof["adolescent"][half:].astype(float))
    bound = calibration["ray_amplitude_uniformity_bound"]
    assert abs(first.amplitude - second.amplitude) / first.amplitude < bound


# --- regions ---------------------------------------------------------------


def test_single_ray_region_reduces_to_write_ray(lattice):
    region = region_for_fan(lattice, (0.0,), start_periods=2.0, n_periods=4.0)
    result = write_region(region, M=20)
    assert len(result.reports) == 1
    report = result.reports[0]
    ray = RaySpec.from_velocity(0.0, lattice.mass, region.t_range)
    prof, centers = ray_profile(lattice, ray, M=20)
    fit = fit_sinusoid(centers, prof["adolescent"].astype(float))
    assert report.omega_fitted == pytest.approx(fit.omega)
    assert report.amplitude == pytest.approx(fit.amplitude)


def test_fan_frequency_law(lattice, calibration):
    fan = tuple(float(v) for v in np.linspace(-0.25, 0.25, 11))
    region = region_for_fan(lattice, fan, start_periods=2.0, n_periods=4.0)
    result = write_region(region, M=20)
    for report in result.reports:
        assert report.omega_expected == pytest.approx(
            reduced_frequency(report.v, lattice.mass))
    assert result.max_rel_freq_error < calibration["fan_rel_freq_error_bound_n20"]


def test_region_field_not_empty_and_reports_ordered(lattice):
    fan = (-0.1, 0.0, 0.1)
    region = region_for_fan(lattice, fan, start_periods=2.0, n_periods=3.0)
    result = write_region(region, M=10)
    assert [r.v for r in result.reports] == list(fan)
    assert result.field.adolescent.any()


def test_region_threads_do_not_change_results(lattice):
    fan = (-0.1, 0.1)
    region = region_for_fan(lattice, fan, start_periods=2.0, n_periods=3.0)
    serial = write_region(region, M=10, threads=1)
    threaded = write_region(region, M=10, threads=4)
    assert np.array_equal(serial.field.adolescent, threaded.field.adolescent)
    assert np.array_equal(serial.field.senescent, threaded.field.senescent)
    assert serial.reports == threaded.reports


def test_refinement_is_monotone(lattice):
    fan = (-0.2, 0.0, 0.2)
    coarse_region = region_for_fan(lattice, fan, start_periods=2.0, n_periods=4.0)
    coarse = write_region(coarse_region, M=15)
    fine_lattice = LatticeSpec.for_mass(2 * lattice.n, mass=lattice.mass)
    fine_region = region_for_fan(fine_lattice, fan, start_periods=2.0, n_periods=4.0)
    fine = write_region(fine_region, M=30)
    for c, f in zip(coarse.reports, fine.reports):
        assert f.rel_rms <= c.rel_rms


def test_empty_fan_rejected(lattice):
    region = RegionSpec(x_range=(-1.0, 1.0), t_range=(1.0, 2.0), ray_fan=(), lattice=lattice)
    with pytest.raises(ValueError, match="fan"):
        write_region(region, M=5)

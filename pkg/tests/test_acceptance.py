"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they
complete.  Tolerances are fixed here and in tests/fixtures/calibration.json;
nothing is tuned at runtime.
"""

import functools
import hashlib
import math
import time
from fractions import Fraction
import numpy as np
import pytest

from entwined.chessboard import (ChessboardProblem, CornerHistogram, enumerate_corner_histogram,
                                 kernel_corner_sum, kernel_transfer_matrix)
from entwined.cli import main as cli_main
from entwined.density import (ReferenceDensity, Region, accumulate, best_lag, compare,
                              field_for_segments, reference_eval, steady_region)
from entwined.lattice import LatticeSpec
from entwined.paths import build_cable, build_cord, build_fiber, right_envelope
from entwined.propagator import region_for_fan, write_region
from entwined.ring import (RingSpec, drift_in_cells_per_period, eigen_speed, run_ring,
                           standing_wave_metrics)


def criterion(number, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                detail = fn(*args, **kwargs)
            except BaseException:
                print(f"ACCEPTANCE {number} [{title}]: FAIL")
                raise
            print(f"ACCEPTANCE {number} [{title}]: PASS ({detail})")
        return run
    return wrap


@criterion(1, "chessboard triple equivalence")
def test_triple_equivalence(calibration):
    started = time.perf_counter()
    checked = 0
    worst = 0.0
    for n_steps in range(1, 15):
        for initial in ("right", "left"):
            for incoming in (False, True):
                for displacement in range(-n_steps, n_steps + 1, 2):
                    if (n_steps - displacement) % 2:
                        continue
                    hist = enumerate_corner_histogram(ChessboardProblem(
                        n_steps=n_steps, displacement=displacement,
                        initial_direction=initial, incoming_corner=incoming))
                    for em in (0.05, 0.1, 0.3):
                        problem = ChessboardProblem(
                            n_steps=n_steps, displacement=displacement, step_size=em,
                            mass=1.0, initial_direction=initial, incoming_corner=incoming)
                        summed = kernel_corner_sum(hist, em, 1.0)
                        transferred = kernel_transfer_matrix(problem)
                        diff = max(abs(summed.phi_plus - transferred.phi_plus),
                                   abs(summed.phi_minus - transferred.phi_minus))
                        worst = max(worst, diff)
                        assert diff < 1e-12
                        checked += 1
    # exact big-rational agreement on a sampled sweep
    exact_checked = 0
    for n_steps in (3, 7, 11, 14):
        for displacement in (0, 1, -1, n_steps):
            if (n_steps - displacement) % 2:
                continue
            for em in (Fraction(1, 20), Fraction(1, 10), Fraction(3, 10)):
                problem = ChessboardProblem(n_steps=n_steps, displacement=displacement,
                                            step_size=em, mass=1)
                hist = enumerate_corner_histogram(problem)
                summed = kernel_corner_sum(hist, em, 1, exact=True)
                transferred = kernel_transfer_matrix(problem, exact=True)
                assert summed.phi_plus == transferred.phi_plus
                assert summed.phi_minus == transferred.phi_minus
                exact_checked += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0, f"criterion budget exceeded: {elapsed:.1f}s"
    return (f"{checked} float problems max|diff|={worst:.2e}, "
            f"{exact_checked} exact problems, {elapsed:.1f}s")


@criterion(2, "kernel partition signs")
def test_partition_signs():
    em = Fraction(3, 10)
    for r in range(8):
        value = kernel_corner_sum(CornerHistogram({r: 1}), em, 1, exact=True)
        expected = em**r
        if r % 2 == 0:
            assert value.phi_minus == 0
            assert value.phi_plus == (expected if r % 4 == 0 else -expected)
        else:
            assert value.phi_plus == 0
            assert value.phi_minus == (expected if r % 4 == 1 else -expected)
    return "single-R histograms R=0..7, exact rational equality"


@criterion(3, "fiber densities")
def test_fiber_densities():
    for n in (4, 10, 50):
        spec = LatticeSpec(n=n)
        fiber = build_fiber((0.0, 0.0), spec)
        field = field_for_segments(fiber.segs, pad=2)
        accumulate(field, right_envelope(fiber))
        region = Region(0, spec.cells_per_period, field.x0_cell, field.x0_cell + field.x_cells)
        ts, xs = region.slices(field)
        centers = field.t_centers()[ts]
        ado = field.adolescent[ts, xs].sum(axis=1)
        sen = field.senescent[ts, xs].sum(axis=1)
        assert np.array_equal(ado, reference_eval(ReferenceDensity("fiber_unit"), centers).astype(int))
        assert np.array_equal(sen, reference_eval(ReferenceDensity("fiber_unit_lagged"), centers).astype(int))
        gap = slice(n // 2, n)  # cells with t in (1, 2]
        assert not ado[gap].any()
    return "integer equality over one period incl. the (1,2] gap, n=4,10,50"


@criterion(4, "cord delta chain")
def test_cord_delta_chain():
    for n in (4, 10, 50):
        spec = LatticeSpec(n=n)
        cord = build_cord((0.0, 0.0), spec, repeats=4)
        field = field_for_segments(cord.segs, pad=2)
        accumulate(field, right_envelope(cord))
        region = steady_region(cord, field)
        report = compare(field, ReferenceDensity("delta_chain", eps=spec.eps),
                         "adolescent", region)
        assert report.l_inf == 0.0
        ts, xs = region.slices(field)
        ado = field.adolescent[ts, xs].sum(axis=1)
        for j, value in enumerate(ado):
            cell = region.t_lo + j
            if cell % (2 * n) == 0:
                assert value == 2
            elif cell % (2 * n) == n:
                assert value == -2
            else:
                assert value == 0
    return "exact +-2 spikes at t=0,2 mod 4 for n=4,10,50"


@criterion(5, "carrier synthesis")
def test_carrier_synthesis(calibration):
    started = time.perf_counter()
    residuals = {}
    for n, M in ((10, 20), (100, 1000)):
        spec = LatticeSpec(n=n)
        cable = build_cable((0.0, 0.0), spec, M=M, repeats=3)
        field = field_for_segments(cable.segs, pad=2)
        accumulate(field, right_envelope(cable))
        report = compare(field, ReferenceDensity("sinusoid"), "adolescent",
                         steady_region(cable, field))
        residuals[(n, M)] = report.fitted.rel_rms
        assert abs(report.fitted.period - 4.0) <= spec.eps
        if (n, M) == (10, 20):
            assert report.fitted.rel_rms < calibration["carrier_rel_rms_bound_n10_m20"]
            ado = field.adolescent.sum(axis=1)
            sen = field.senescent.sum(axis=1)
            lag = best_lag(ado, sen, spec.cells_per_period // 2)
            assert lag == spec.cells_per_period // 4  # one quarter period exactly
    assert residuals[(100, 1000)] < residuals[(10, 20)]
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0, f"criterion budget exceeded: {elapsed:.1f}s"
    return (f"period within eps, lag exact, rel_rms {residuals[(10, 20)]:.4f} -> "
            f"{residuals[(100, 1000)]:.6f}, {elapsed:.1f}s")


@criterion(6, "ray frequency law")
def test_ray_frequency_law(calibration):
    started = time.perf_counter()
    lattice = LatticeSpec.for_mass(50, mass=1.0)
    fan = tuple(float(v) for v in np.linspace(-0.25, 0.25, 11))
    region = region_for_fan(lattice, fan, start_periods=2.0, n_periods=6.0)
    result = write_region(region, M=60)
    for report in result.reports:
        assert report.rel_freq_error <= 0.01
        assert report.rel_freq_error <= calibration["fan_rel_freq_error_bound_n50"]
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0, f"criterion budget exceeded: {elapsed:.1f}s"
    return (f"11 rays, max rel err {result.max_rel_freq_error:.2e} "
            f"(<= 1%), {elapsed:.1f}s")


@criterion(7, "ring standing wave")
def test_ring_standing_wave(calibration):
    lattice = LatticeSpec(n=20)
    circumference = 8.0 * math.pi
    v1 = eigen_speed(1, lattice.mass, circumference)

    def drift_of(spec):
        field = run_ring(spec, lattice, M=30)
        v = spec.resolved_speed(lattice.mass)
        t_scale = lattice.mass_scale / (v * v)
        metrics = standing_wave_metrics(
            field, slice_cells=int(round((circumference / v) / lattice.cell_physical)),
            period_cells=4.0 * t_scale / lattice.cell_physical)
        return metrics, drift_in_cells_per_period(metrics, field.x_cells)

    eigen_metrics, eigen_drift = drift_of(RingSpec(circumference=circumference, mode=1, cycles=8))
    assert eigen_metrics.dominant_mode == 1
    assert eigen_drift < calibration["ring_eigen_drift_cells_per_period"]

    _, off_drift = drift_of(RingSpec(circumference=circumference, mode=1,
                                     speed=1.5 * v1, cycles=8))
    assert off_drift >= 10.0 * max(eigen_drift, 1e-12)
    return (f"mode 1 stationary (drift {eigen_drift:.4f} cells/period), "
            f"off-eigen drift {off_drift:.1f} (x{off_drift / max(eigen_drift, 1e-12):.0f})")


@criterion(8, "determinism across thread counts")
def test_determinism_across_threads(tmp_path):
    experiments = [
        ("chessboard", ["--n-steps", "12", "--step-size", "0.1"]),
        ("carrier", ["--n", "10", "--cords", "20"]),
        ("propagate", ["--n", "10", "--cords", "10", "--v-count", "5", "--n-periods", "3"]),
        ("ring", ["--n", "8", "--cords", "8", "--cycles", "4"]),
    ]
    for experiment, flags in experiments:
        digests = []
        for threads in ("1", "8"):
            out = tmp_path / f"{experiment}-t{threads}"
            code = cli_main([experiment, *flags, "--threads", threads, "--out", str(out)])
            assert code == 0
            tree = {p.name: hashlib.sha256(p.read_bytes()).hexdigest()
                    for p in sorted(out.iterdir())}
            digests.append(tree)
        assert digests[0] == digests[1], f"{experiment} outputs differ across thread counts"
    return "4 experiments byte-identical for threads=1 vs threads=8"

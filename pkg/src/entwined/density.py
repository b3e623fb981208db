"""Signed per-cell counting of envelope segments, and reference densities.

Counting rule: a segment contributes to every time cell its span overlaps
(zero-measure touches excluded); within each covered slab it adds its
traversal sign (+1 forward in t, -1 backward) to the channel named by its
species, in the spatial cell containing the segment midpoint of that slab.
Midpoints of lattice-aligned construct segments always fall strictly inside
cells, so integer counts are exact; boundary events at exact cell edges bind
to the later cell (half-open cells).

Fields hold two integer channels: adolescent (right movers) and senescent
(left movers).
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .lattice import PERIOD
from .paths import RIGHT_MOVER, EntwinedPath, SegmentArray

_CHUNK_SEGMENTS = 16384

CHANNELS = ("adolescent", "senescent")


class DensityField:
    """Two-channel signed-integer accumulation grid over (x, t) cells.

    Cell (i, j) of each channel covers t in [ (t0_cell+i)*cell, +cell ) and
    x in [ (x0_cell+j)*cell, +cell ).  ``wrap_x`` folds spatial indices
    modulo the grid width (periodic/ring domains).
    """

    def __init__(self, cell: float, t0_cell: int, x0_cell: int, t_cells: int, x_cells: int,
                 wrap_x: bool = False):
        if t_cells <= 0 or x_cells <= 0:
            raise ValueError("field must have positive extent")
        self.cell = float(cell)
        self.t0_cell = int(t0_cell)
        self.x0_cell = int(x0_cell)
        self.wrap_x = bool(wrap_x)
        self.adolescent = np.zeros((t_cells, x_cells), dtype=np.int64)
        self.senescent = np.zeros((t_cells, x_cells), dtype=np.int64)

    @property
    def t_cells(self) -> int:
        return self.adolescent.shape[0]

    @property
    def x_cells(self) -> int:
        return self.adolescent.shape[1]

    @property
    def origin_offset(self) -> tuple[float, float]:
        """(x, t) coordinates of the lower edge of cell (0, 0)."""
        return (self.x0_cell * self.cell, self.t0_cell * self.cell)

    def channel(self, name: str) -> np.ndarray:
        if name not in CHANNELS:
            raise ValueError(f"unknown channel {name!r}")
        return getattr(self, name)

    def t_centers(self) -> np.ndarray:
        return (self.t0_cell + np.arange(self.t_cells) + 0.5) * self.cell

    def x_centers(self) -> np.ndarray:
        return (self.x0_cell + np.arange(self.x_cells) + 0.5) * self.cell

    def copy(self) -> "DensityField":
        out = DensityField(self.cell, self.t0_cell, self.x0_cell, self.t_cells, self.x_cells,
                           wrap_x=self.wrap_x)
        out.adolescent[:] = self.adolescent
        out.senescent[:] = self.senescent
        return out


@dataclass(frozen=True)
class Region:
    """Half-open cell-index window [t_lo, t_hi) x [x_lo, x_hi), absolute indices."""

    t_lo: int
    t_hi: int
    x_lo: int
    x_hi: int

    def slices(self, field: DensityField) -> tuple[slice, slice]:
        ti = self.t_lo - field.t0_cell
        tj = self.t_hi - field.t0_cell
        xi = self.x_lo - field.x0_cell
        xj = self.x_hi - field.x0_cell
        if not (0 <= ti < tj <= field.t_cells and 0 <= xi < xj <= field.x_cells):
            raise ValueError("region empty or outside field bounds")
        return slice(ti, tj), slice(xi, xj)


def whole_region(field: DensityField) -> Region:
    return Region(field.t0_cell, field.t0_cell + field.t_cells,
                  field.x0_cell, field.x0_cell + field.x_cells)


def _cell_floor(value: float, cell: float) -> int:
    s = value / cell
    r = round(s)
    return int(r) if abs(s - r) < 1e-9 else math.floor(s)


def _cell_ceil(value: float, cell: float) -> int:
    s = value / cell
    r = round(s)
    return int(r) if abs(s - r) < 1e-9 else math.ceil(s)


def steady_region(path: EntwinedPath, field: DensityField) -> Region:
    """Cells at least one construct period away from the path's temporal ends.

    The window is recorded on the path at construction; cells only partially
    inside it are excluded.
    """
    if path.steady_window is None:
        raise ValueError(f"path of kind {path.kind!r} has no steady window")
    lo, hi = path.steady_window
    t_lo = max(_cell_ceil(lo, field.cell), field.t0_cell)
    t_hi = min(_cell_floor(hi, field.cell), field.t0_cell + field.t_cells)
    return Region(t_lo, t_hi, field.x0_cell, field.x0_cell + field.x_cells)


def field_for_segments(segs: SegmentArray, cell: float | None = None, pad: int = 1,
                       wrap_x: bool = False) -> DensityField:
    """Smallest cell-aligned field covering the segments, padded by ``pad`` cells."""
    if len(segs) == 0:
        raise ValueError("no segments")
    if cell is None:
        cell = segs.lattice.eps
    x1, t1, x2, t2 = segs.physical_endpoints()
    t_lo = _cell_floor(float(min(t1.min(), t2.min())), cell) - pad
    t_hi = _cell_ceil(float(max(t1.max(), t2.max())), cell) + pad
    x_lo = _cell_floor(float(min(x1.min(), x2.min())), cell) - pad
    x_hi = _cell_ceil(float(max(x1.max(), x2.max())), cell) + pad
    return DensityField(cell, t_lo, x_lo, t_hi - t_lo, x_hi - x_lo, wrap_x=wrap_x)


def _as_segment_array(envelope, cell: float) -> SegmentArray | None:
    """Coerce an envelope to a SegmentArray; None means nothing to count.

    Plain iterables of PathSegment are quantized onto the half-cell grid
    implied by ``cell`` (internal units), which covers hand-built segments;
    envelopes from this package arrive as SegmentArray already.
    """
    if isinstance(envelope, SegmentArray):
        return envelope if len(envelope) else None
    if isinstance(envelope, EntwinedPath):
        raise TypeError("pass the path's right envelope, not the path itself")
    segments = list(envelope)
    if not segments:
        return None
    n = 2.0 / cell
    if abs(n - round(n)) > 1e-9 or round(n) % 2:
        raise TypeError("plain segment lists need an internal-unit field "
                        "(cell = 2/n, n even); pass a SegmentArray instead")
    from .lattice import LatticeSpec

    return SegmentArray.from_segments(LatticeSpec(n=int(round(n))), segments)


def _frames_identity(segs: SegmentArray) -> bool:
    used = np.unique(segs.frame_idx)
    return all(segs.frames[i].is_identity for i in used)


def _uniform_int_counts(segs: SegmentArray, sl: slice, field: DensityField):
    """Fused counting for cell-aligned equal-span segments (the common case:
    envelope segments of lattice constructs each cover exactly n/2 full
    cells).  Returns the signed (2, t_cells, x_cells) block, or None when the
    chunk does not qualify.  All arithmetic is exact int32.
    """
    x1 = segs.x1[sl]
    t1 = segs.t1[sl]
    x2 = segs.x2[sl]
    t2 = segs.t2[sl]
    lo = np.minimum(t1, t2)
    hi = np.maximum(t1, t2)
    span = segs.lattice.n // 2
    if ((lo & 1) != 0).any() or ((hi & 1) != 0).any() or (hi - lo != 2 * span).any():
        return None
    t_cells, x_cells = field.t_cells, field.x_cells
    size = t_cells * x_cells
    slope = (np.sign(x2 - x1) * np.sign(t2 - t1)).astype(np.int32)
    base2x = 2 * x1 - slope * (2 * t1)
    ar = np.arange(span, dtype=np.int32)
    kk = (lo >> 1)[:, None] + ar[None, :]
    x2x = (kk << 2) + 2
    x2x *= slope[:, None]
    x2x += base2x[:, None]
    j_rel = np.floor_divide(x2x, 4)
    j_rel -= field.x0_cell
    if field.wrap_x:
        np.mod(j_rel, x_cells, out=j_rel)
    k_rel = kk
    k_rel -= field.t0_cell
    if (k_rel < 0).any() or (k_rel >= t_cells).any() or (j_rel < 0).any() or (j_rel >= x_cells).any():
        return None  # let the generic path handle bounds reporting/clipping
    lin = k_rel
    lin *= x_cells
    lin += j_rel
    lin += (segs.species[sl] != RIGHT_MOVER).astype(np.int32)[:, None] * size
    plus_rows = segs.time_dir[sl] > 0
    plus = np.bincount(lin[plus_rows].ravel(), minlength=2 * size)
    minus = np.bincount(lin[~plus_rows].ravel(), minlength=2 * size)
    return (plus - minus).reshape(2, t_cells, x_cells)


def _incidences_int(segs: SegmentArray, sl: slice):
    """Exact integer slab expansion for identity-frame segments.

    Returns absolute (t_cell, x_cell) indices plus species/time_dir per
    (segment, covered time-cell) incidence, all in half-cell integer math.
    """
    x1 = segs.x1[sl].astype(np.int64)
    t1 = segs.t1[sl].astype(np.int64)
    x2 = segs.x2[sl].astype(np.int64)
    t2 = segs.t2[sl].astype(np.int64)
    lo = np.minimum(t1, t2)
    hi = np.maximum(t1, t2)
    k_lo = lo // 2
    k_hi = (hi - 1) // 2  # inclusive; zero-measure touch of the next cell excluded
    counts = (k_hi - k_lo + 1).clip(min=0)
    idx = np.repeat(np.arange(len(x1)), counts)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    k = k_lo[idx] + (np.arange(counts.sum()) - np.repeat(starts, counts))
    # midpoint of the covered part of slab k, in doubled half-cell units
    s_lo = np.maximum(lo[idx], 2 * k)
    s_hi = np.minimum(hi[idx], 2 * k + 2)
    t2x = s_lo + s_hi
    slope = np.sign((x2 - x1) * (t2 - t1))[idx]
    x2x = 2 * x1[idx] + slope * (t2x - 2 * t1[idx])
    j = np.floor_divide(x2x, 4)
    return k, j, segs.species[sl][idx], segs.time_dir[sl][idx], idx


def _incidences_float(segs: SegmentArray, sl: slice, cell: float, need_x: bool = True):
    """General slab expansion through per-segment frames (float binning)."""
    half = segs.lattice.half
    ts_tab = np.array([f.t_scale for f in segs.frames])
    xs_tab = np.array([f.x_scale for f in segs.frames])
    v_tab = np.array([f.drift for f in segs.frames])
    x0_tab = np.array([f.x0 for f in segs.frames])
    t0_tab = np.array([f.t0 for f in segs.frames])
    fi = segs.frame_idx[sl]
    t1i = segs.t1[sl] * half
    t2i = segs.t2[sl] * half
    ta = ts_tab[fi] * t1i + t0_tab[fi]
    tb = ts_tab[fi] * t2i + t0_tab[fi]
    lo = np.minimum(ta, tb)
    hi = np.maximum(ta, tb)
    k_lo = np.floor(lo / cell).astype(np.int64)
    k_hi = np.ceil(hi / cell).astype(np.int64)  # exclusive
    counts = (k_hi - k_lo).clip(min=1)
    idx = np.repeat(np.arange(len(fi)), counts)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    k = k_lo[idx] + (np.arange(counts.sum()) - np.repeat(starts, counts))
    s_lo = np.maximum(lo[idx], k * cell)
    s_hi = np.minimum(hi[idx], (k + 1) * cell)
    if need_x:
        t_m = 0.5 * (s_lo + s_hi)
        dt = segs.t2[sl] - segs.t1[sl]
        dx = segs.x2[sl] - segs.x1[sl]
        slope = np.where(dt != 0, dx / np.where(dt == 0, 1, dt), 0.0)
        t_int_m = (t_m - t0_tab[fi][idx]) / ts_tab[fi][idx]
        x_int_m = (segs.x1[sl] * half)[idx] + slope[idx] * (t_int_m - t1i[idx])
        x_phys = xs_tab[fi][idx] * x_int_m + v_tab[fi][idx] * t_m + x0_tab[fi][idx]
        j = np.floor(x_phys / cell).astype(np.int64)
    else:
        j = None
    return k, j, segs.species[sl][idx], segs.time_dir[sl][idx], idx


def _bincount_channels(shape, k_rel, j_rel, species, tdir):
    """Per-channel signed integer counts on a (t_cells, x_cells) grid."""
    t_cells, x_cells = shape
    size = t_cells * x_cells
    # fold the channel into the linear index so one bincount pass covers both
    lin = k_rel * x_cells + j_rel + np.where(species == RIGHT_MOVER, 0, size)
    plus = np.bincount(lin[tdir > 0], minlength=2 * size)
    minus = np.bincount(lin[tdir < 0], minlength=2 * size)
    signed = (plus - minus).reshape(2, t_cells, x_cells)
    return {"adolescent": signed[0], "senescent": signed[1]}


def accumulate(field: DensityField, envelope, clip: bool = False, threads: int = 1) -> DensityField:
    """Add the envelope's signed counts into ``field`` (in place) and return it.

    Counts are integers and the result is independent of segment order and
    of ``threads``.  Out-of-bounds incidences raise unless ``clip`` is set.
    """
    segs = _as_segment_array(envelope, field.cell)
    if segs is None:
        return field
    use_int = (_frames_identity(segs) and field.cell == segs.lattice.eps)
    shape = (field.t_cells, field.x_cells)

    def chunk_counts(sl: slice):
        if use_int:
            fused = _uniform_int_counts(segs, sl, field)
            if fused is not None:
                return {"adolescent": fused[0], "senescent": fused[1]}
            k, j, species, tdir, idx = _incidences_int(segs, sl)
        else:
            k, j, species, tdir, idx = _incidences_float(segs, sl, field.cell)
        k_rel = k - field.t0_cell
        j_rel = j - field.x0_cell
        if field.wrap_x:
            j_rel = np.mod(j_rel, field.x_cells)
        ok = (k_rel >= 0) & (k_rel < field.t_cells) & (j_rel >= 0) & (j_rel < field.x_cells)
        if not ok.all():
            if not clip:
                bad = int(np.nonzero(~ok)[0][0])
                seg = sl.start + int(idx[bad])
                raise ValueError(
                    f"segment {seg} writes outside the field at cell "
                    f"(t={int(k[bad])}, x={int(j[bad])}); pass clip=True to drop it"
                )
            k_rel, j_rel, species, tdir = k_rel[ok], j_rel[ok], species[ok], tdir[ok]
        return _bincount_channels(shape, k_rel, j_rel, species, tdir)

    slices = [slice(i, min(i + _CHUNK_SEGMENTS, len(segs))) for i in range(0, len(segs), _CHUNK_SEGMENTS)]
    if threads > 1 and len(slices) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(chunk_counts, slices))
    else:
        results = [chunk_counts(sl) for sl in slices]
    for counts in results:
        field.adolescent += counts["adolescent"]
        field.senescent += counts["senescent"]
    return field


def accumulate_profile(envelope, cell: float, t0_cell: int, t_cells: int,
                       clip: bool = False) -> dict[str, np.ndarray]:
    """Signed counts per time cell, summed over all x (per-construct profiles)."""
    segs = _as_segment_array(envelope, cell)
    out = {name: np.zeros(t_cells, dtype=np.int64) for name in CHANNELS}
    if segs is None:
        return out
    use_int = _frames_identity(segs) and cell == segs.lattice.eps
    for start in range(0, len(segs), _CHUNK_SEGMENTS):
        sl = slice(start, min(start + _CHUNK_SEGMENTS, len(segs)))
        if use_int:
            k, _, species, tdir, idx = _incidences_int(segs, sl)
        else:
            k, _, species, tdir, idx = _incidences_float(segs, sl, cell, need_x=False)
        k_rel = k - t0_cell
        ok = (k_rel >= 0) & (k_rel < t_cells)
        if not ok.all():
            if not clip:
                bad = int(np.nonzero(~ok)[0][0])
                raise ValueError(f"segment {sl.start + int(idx[bad])} writes outside the profile window")
            k_rel, species, tdir = k_rel[ok], species[ok], tdir[ok]
        for name, smask in (("adolescent", species == RIGHT_MOVER), ("senescent", species != RIGHT_MOVER)):
            plus = np.bincount(k_rel[smask & (tdir > 0)], minlength=t_cells)
            minus = np.bincount(k_rel[smask & (tdir < 0)], minlength=t_cells)
            out[name] += plus - minus
    return out


# ---------------------------------------------------------------------------
# reference densities


@dataclass(frozen=True)
class ReferenceDensity:
    """Closed-form reference evaluated at lattice times, mod one period.

    kinds: fiber_unit (single-loop right-mover wave), fiber_unit_lagged
    (the same delayed a quarter period), square_wave (two-fiber sum),
    delta_chain (cord spikes; needs eps), sinusoid (amplitude, period,
    phase).
    """

    kind: str
    eps: float = 0.0
    amplitude: float = 1.0
    period: float = PERIOD
    phase: float = 0.0

    KINDS = ("fiber_unit", "fiber_unit_lagged", "square_wave", "delta_chain", "sinusoid")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown reference kind {self.kind!r}")
        if self.kind == "delta_chain" and not (self.eps > 0):
            raise ValueError("delta_chain needs eps")


def _fiber_unit(t: np.ndarray) -> np.ndarray:
    m = np.mod(t, PERIOD)
    return np.where(m <= 1.0, 1.0, np.where((m > 2.0) & (m <= 3.0), -1.0, 0.0))


def _square_wave(t: np.ndarray) -> np.ndarray:
    return np.where(np.mod(t, PERIOD) < 2.0, 1.0, -1.0)


def reference_eval(ref: ReferenceDensity, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if ref.kind == "fiber_unit":
        return _fiber_unit(t)
    if ref.kind == "fiber_unit_lagged":
        return _fiber_unit(t - 1.0)
    if ref.kind == "square_wave":
        return _square_wave(t)
    if ref.kind == "delta_chain":
        return _square_wave(t) - _square_wave(t - ref.eps)
    return ref.amplitude * np.sin(2.0 * np.pi * t / ref.period + ref.phase)


# ---------------------------------------------------------------------------
# comparison and fitting


@dataclass(frozen=True)
class SinusoidFit:
    amplitude: float
    period: float
    phase: float
    offset: float
    rms_residual: float

    @property
    def rel_rms(self) -> float:
        return self.rms_residual / self.amplitude if self.amplitude else math.inf

    @property
    def omega(self) -> float:
        return 2.0 * np.pi / self.period


def fit_sinusoid(times: np.ndarray, values: np.ndarray,
                 omega_bracket: tuple[float, float] | None = None) -> SinusoidFit:
    """Least-squares fit of a*sin(w t) + b*cos(w t) + c with free frequency.

    The frequency starts from the dominant FFT bin of the detrended data
    (uniform spacing assumed) and is refined by a fixed-iteration golden
    section search, so results are deterministic.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(times) < 8:
        raise ValueError("too few samples for a sinusoid fit")

    def residual(omega: float):
        basis = np.column_stack([np.sin(omega * times), np.cos(omega * times), np.ones_like(times)])
        coef, *_ = np.linalg.lstsq(basis, values, rcond=None)
        resid = values - basis @ coef
        return float(np.sqrt(np.mean(resid**2))), coef

    if omega_bracket is None:
        dt = times[1] - times[0]
        spec = np.abs(np.fft.rfft(values - values.mean()))
        spec[0] = 0.0
        peak = int(np.argmax(spec))
        if peak == 0:
            raise ValueError("no oscillatory content to fit")
        omega0 = 2.0 * np.pi * peak / (dt * len(times))
        lo, hi = 0.6 * omega0, 1.6 * omega0
    else:
        lo, hi = omega_bracket

    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, _ = residual(c)
    fd, _ = residual(d)
    for _ in range(90):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc, _ = residual(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd, _ = residual(d)
    omega = 0.5 * (a + b)
    rms, coef = residual(omega)
    amp = float(np.hypot(coef[0], coef[1]))
    phase = float(np.arctan2(coef[1], coef[0]))
    return SinusoidFit(amplitude=amp, period=float(2.0 * np.pi / omega), phase=phase,
                       offset=float(coef[2]), rms_residual=rms)


def best_lag(reference: np.ndarray, delayed: np.ndarray, max_lag: int) -> int:
    """Integer lag maximizing sum(reference[i] * delayed[i + lag]).

    Scores use a fixed window of len - max_lag samples so lags compete
    fairly; ties resolve to the smallest lag.
    """
    reference = np.asarray(reference, dtype=np.int64)
    delayed = np.asarray(delayed, dtype=np.int64)
    window = len(reference) - max_lag
    if window <= 0:
        raise ValueError("max_lag leaves no overlap window")
    scores = [int(np.dot(reference[:window], delayed[lag:lag + window])) for lag in range(max_lag + 1)]
    return int(np.argmax(scores))


@dataclass(frozen=True)
class ErrorReport:
    l_inf: float
    rms: float
    fitted: SinusoidFit | None = None


def compare(field: DensityField, ref: ReferenceDensity, channel: str, region: Region) -> ErrorReport:
    """Compare a channel's x-summed profile against a reference at cell centers.

    For the sinusoid kind the amplitude/period/phase are least-squares
    fitted first and residuals are reported against the fit.
    """
    ts, xs = region.slices(field)
    profile = field.channel(channel)[ts, xs].sum(axis=1).astype(float)
    centers = field.t_centers()[ts]
    if ref.kind == "sinusoid":
        fit = fit_sinusoid(centers, profile)
        model = (fit.amplitude * np.sin(fit.omega * centers + fit.phase) + fit.offset)
        diff = profile - model
        return ErrorReport(l_inf=float(np.max(np.abs(diff))),
                           rms=float(np.sqrt(np.mean(diff**2))), fitted=fit)
    expected = reference_eval(ref, centers)
    diff = profile - expected
    return ErrorReport(l_inf=float(np.max(np.abs(diff))), rms=float(np.sqrt(np.mean(diff**2))))


# ---------------------------------------------------------------------------
# export


def export_field(field: DensityField, directory, basename: str) -> list:
    """Write one integer matrix per channel plus a JSON metadata record.

    Returns the written paths.  Matrices are tab-delimited rows (one row per
    time cell); integers render exactly, so files are bit-reproducible.
    """
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name in CHANNELS:
        path = directory / f"{basename}.{name}.tsv"
        np.savetxt(path, field.channel(name), fmt="%d", delimiter="\t")
        written.append(path)
    meta = {
        "cell_size": field.cell,
        "origin_offset": {"x": field.origin_offset[0], "t": field.origin_offset[1]},
        "origin_cell": {"x": field.x0_cell, "t": field.t0_cell},
        "t_cells": field.t_cells,
        "x_cells": field.x_cells,
        "wrap_x": field.wrap_x,
        "channels": list(CHANNELS),
    }
    meta_path = directory / f"{basename}.meta.json"
    meta_path.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    written.append(meta_path)
    return written

"""Lattice zigzag kernel on the 1+1 light-cone lattice.

Paths take ``n_steps`` unit steps, each one cell right or left; a corner is
an adjacent pair of opposite steps and every corner carries the weight
``i * eps * mass``.  The kernel splits into real and imaginary parts by
corner count mod 4:

    phi_plus  = sum over R = 0, 4, ... minus sum over R = 2, 6, ...
    phi_minus = sum over R = 1, 5, ... minus sum over R = 3, 7, ...

with each term ``N(R) * (eps * mass)**R``.  Three independent routes are
provided: exhaustive enumeration of step sequences, the corner-weighted sum
over an enumerated histogram, and a position-resolved transfer-matrix
evolution that scales far beyond the enumeration cap.

Direction conventions: the first step equals ``initial_direction`` by
default.  With ``incoming_corner=True`` the first step is free and
``initial_direction`` is read as the incoming direction of travel, so an
immediate reversal counts one corner.  ``final_direction`` restricts the
last step ("any" sums both).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

RIGHT = "right"
LEFT = "left"
ANY = "any"

ENUMERATION_CAP = 24

_CHUNK_BITS = 20  # sequences enumerated per block: 2**20


@dataclass(frozen=True)
class ChessboardProblem:
    """Endpoint data for the lattice kernel.

    ``displacement`` is net right steps minus left steps in cell units; a
    path exists only if |displacement| <= n_steps with matching parity.
    """

    n_steps: int
    displacement: int
    step_size: float = 1.0
    mass: float = 1.0
    initial_direction: str = RIGHT
    final_direction: str = ANY
    incoming_corner: bool = False

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if not (self.step_size > 0):
            raise ValueError("step_size must be positive")
        if self.mass < 0:
            raise ValueError("mass must be non-negative")
        if self.initial_direction not in (RIGHT, LEFT):
            raise ValueError(f"initial_direction must be {RIGHT!r} or {LEFT!r}")
        if self.final_direction not in (RIGHT, LEFT, ANY):
            raise ValueError(f"final_direction must be {RIGHT!r}, {LEFT!r} or {ANY!r}")

    @property
    def has_paths(self) -> bool:
        return abs(self.displacement) <= self.n_steps and (self.displacement - self.n_steps) % 2 == 0


@dataclass(frozen=True)
class CornerHistogram:
    """Map from corner count R to the number N(R) of matching paths."""

    counts: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        for r, n in self.counts.items():
            if r < 0 or n < 0:
                raise ValueError("corner counts and multiplicities must be non-negative")

    def total(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class KernelValue:
    """The split kernel K = phi_plus + i * phi_minus."""

    phi_plus: float
    phi_minus: float

    def as_complex(self) -> complex:
        return complex(self.phi_plus) + 1j * complex(self.phi_minus)


def enumerate_corner_histogram(problem: ChessboardProblem, cap: int = ENUMERATION_CAP) -> CornerHistogram:
    """Count corners over every step sequence consistent with the problem.

    Sequences are enumerated as bit masks (bit = left step) in fixed-size
    blocks; per-R counts are integers, so the result is identical for any
    block split.  Raises when ``n_steps`` exceeds ``cap``.
    """
    n = problem.n_steps
    if n > cap:
        raise ValueError(f"enumeration too large: n_steps={n} exceeds cap {cap}")
    init_bit = 0 if problem.initial_direction == RIGHT else 1
    free_bits = n if problem.incoming_corner else n - 1
    pair_mask = np.uint64((1 << (n - 1)) - 1) if n > 1 else np.uint64(0)
    final_bit = {RIGHT: 0, LEFT: 1}.get(problem.final_direction)

    hist = np.zeros(n + 1, dtype=np.int64)
    total = 1 << free_bits
    block = 1 << _CHUNK_BITS
    for start in range(0, total, block):
        stop = min(start + block, total)
        b = np.arange(start, stop, dtype=np.uint64)
        if problem.incoming_corner:
            seq = b
            extra = ((seq & np.uint64(1)) != np.uint64(init_bit)).astype(np.int64)
        else:
            seq = (b << np.uint64(1)) | np.uint64(init_bit)
            extra = 0
        lefts = np.bitwise_count(seq).astype(np.int64)
        disp = n - 2 * lefts
        corners = np.bitwise_count((seq ^ (seq >> np.uint64(1))) & pair_mask).astype(np.int64) + extra
        ok = disp == problem.displacement
        if final_bit is not None:
            ok &= ((seq >> np.uint64(n - 1)) & np.uint64(1)) == np.uint64(final_bit)
        if ok.any():
            hist += np.bincount(corners[ok], minlength=n + 1)
    return CornerHistogram({int(r): int(c) for r, c in enumerate(hist) if c})


def kernel_corner_sum(hist: CornerHistogram, eps, mass, exact: bool = False) -> KernelValue:
    """Evaluate the corner-weighted sums over a histogram.

    Even R contributes to phi_plus with sign (-1)**(R//2); odd R to
    phi_minus with sign (-1)**((R-1)//2).  With ``exact=True``, ``eps`` and
    ``mass`` are taken as rationals and the components come back as
    :class:`fractions.Fraction`.
    """
    if exact:
        em = Fraction(eps) * Fraction(mass)
        plus = Fraction(0)
        minus = Fraction(0)
    else:
        em = float(eps) * float(mass)
        plus = 0.0
        minus = 0.0
    for r in sorted(hist.counts):
        count = hist.counts[r]
        term = count * em**r
        if r % 2 == 0:
            plus += term if r % 4 == 0 else -term
        else:
            minus += term if r % 4 == 1 else -term
    if not exact and not (np.isfinite(plus) and np.isfinite(minus)):
        raise OverflowError("corner sum overflowed double precision; use exact=True")
    return KernelValue(phi_plus=plus, phi_minus=minus)


def _transfer_float(problem: ChessboardProblem) -> KernelValue:
    n = problem.n_steps
    w = 1j * problem.step_size * problem.mass
    width = 2 * n + 1
    psi = np.zeros((width, 2), dtype=np.complex128)
    init = 0 if problem.initial_direction == RIGHT else 1
    psi[n, init] = 1.0
    for step in range(n):
        allow_flip = problem.incoming_corner or step > 0
        new = np.zeros_like(psi)
        new[1:, 0] = psi[:-1, 0] + (w * psi[:-1, 1] if allow_flip else 0.0)
        new[:-1, 1] = psi[1:, 1] + (w * psi[1:, 0] if allow_flip else 0.0)
        psi = new
    idx = n + problem.displacement
    if not (0 <= idx < width):
        return KernelValue(0.0, 0.0)
    if problem.final_direction == ANY:
        k = psi[idx, 0] + psi[idx, 1]
    else:
        k = psi[idx, 0 if problem.final_direction == RIGHT else 1]
    return KernelValue(float(k.real), float(k.imag))


def _transfer_exact(problem: ChessboardProblem) -> KernelValue:
    n = problem.n_steps
    q = Fraction(problem.step_size) * Fraction(problem.mass)
    zero = (Fraction(0), Fraction(0))

    def mul_iq(value):  # multiply (re, im) by i*q
        re, im = value
        return (-im * q, re * q)

    def add(a, b):
        return (a[0] + b[0], a[1] + b[1])

    init = 0 if problem.initial_direction == RIGHT else 1
    psi: dict[tuple[int, int], tuple[Fraction, Fraction]] = {(0, init): (Fraction(1), Fraction(0))}
    for step in range(n):
        allow_flip = problem.incoming_corner or step > 0
        new: dict[tuple[int, int], tuple[Fraction, Fraction]] = {}
        for (pos, d), amp in psi.items():
            move = 1 if d == 0 else -1
            key = (pos + move, d)
            new[key] = add(new.get(key, zero), amp)
            if allow_flip:
                flip = 1 - d
                move = 1 if flip == 0 else -1
                key = (pos + move, flip)
                new[key] = add(new.get(key, zero), mul_iq(amp))
        psi = new
    if problem.final_direction == ANY:
        dirs: Iterable[int] = (0, 1)
    else:
        dirs = (0,) if problem.final_direction == RIGHT else (1,)
    re = Fraction(0)
    im = Fraction(0)
    for d in dirs:
        amp = psi.get((problem.displacement, d))
        if amp:
            re += amp[0]
            im += amp[1]
    return KernelValue(phi_plus=re, phi_minus=im)


def kernel_transfer_matrix(problem: ChessboardProblem, exact: bool = False) -> KernelValue:
    """Kernel via n_steps applications of the per-step 2x2 transfer operator.

    The state is one complex amplitude per (position, direction) pair: a
    step moves a cell along its direction with weight 1, or reverses with
    weight ``i*eps*mass``.  Agrees with enumeration + corner sum exactly
    and scales to step counts far past the enumeration cap.
    """
    if exact:
        return _transfer_exact(problem)
    return _transfer_float(problem)


def kernel_phase_series(t_max: float, eps: float, mass: float,
                        initial_direction: str = RIGHT, final_direction: str = ANY,
                        incoming_corner: bool = False) -> list[tuple[float, KernelValue]]:
    """Return-to-origin kernel K(0, t) for t = eps, 2*eps, ..., t_max.

    One transfer evolution is run and the displacement-0 amplitude read off
    after every step (odd step counts have no returning path and yield 0).
    Used to watch the carrier phase build up; requires ``eps*mass < 1``.
    """
    if not (eps > 0):
        raise ValueError("eps must be positive")
    if eps * mass >= 1.0:
        raise ValueError(f"eps*mass must be < 1 (got {eps * mass})")
    n = int(np.floor(t_max / eps + 1e-9))
    if n < 1:
        raise ValueError("t_max is smaller than one step")
    w = 1j * eps * mass
    width = 2 * n + 1
    psi = np.zeros((width, 2), dtype=np.complex128)
    init = 0 if initial_direction == RIGHT else 1
    psi[n, init] = 1.0
    out: list[tuple[float, KernelValue]] = []
    for step in range(n):
        allow_flip = incoming_corner or step > 0
        new = np.zeros_like(psi)
        new[1:, 0] = psi[:-1, 0] + (w * psi[:-1, 1] if allow_flip else 0.0)
        new[:-1, 1] = psi[1:, 1] + (w * psi[1:, 0] if allow_flip else 0.0)
        psi = new
        if final_direction == ANY:
            k = psi[n, 0] + psi[n, 1]
        else:
            k = psi[n, 0 if final_direction == RIGHT else 1]
        out.append(((step + 1) * eps, KernelValue(float(k.real), float(k.imag))))
    return out

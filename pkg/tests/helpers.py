"""Independent oracles used across the test suite.

These deliberately avoid the library's path/accumulation machinery: the
chessboard oracle walks explicit step tuples, and the profile oracle stamps
the closed-form single-loop density directly onto cell arrays.
"""

from itertools import product

import numpy as np


def brute_histogram(n_steps, displacement, initial="right", final="any", incoming=False):
    """Corner histogram by explicit enumeration of +-1 step tuples."""
    init = +1 if initial == "right" else -1
    hist = {}
    firsts = [+1, -1] if incoming else [init]
    for first in firsts:
        for rest in product((+1, -1), repeat=n_steps - 1):
            seq = (first,) + rest
            if sum(seq) != displacement:
                continue
            if final == "right" and seq[-1] != +1:
                continue
            if final == "left" and seq[-1] != -1:
                continue
            corners = sum(1 for a, b in zip(seq, seq[1:]) if a != b)
            if incoming and first != init:
                corners += 1
            hist[corners] = hist.get(corners, 0) + 1
    return hist


def brute_kernel(n_steps, displacement, eps, mass, initial="right", final="any", incoming=False):
    """Kernel directly as sum over paths of (i*eps*mass)**corners."""
    init = +1 if initial == "right" else -1
    total = 0j
    firsts = [+1, -1] if incoming else [init]
    for first in firsts:
        for rest in product((+1, -1), repeat=n_steps - 1):
            seq = (first,) + rest
            if sum(seq) != displacement:
                continue
            if final == "right" and seq[-1] != +1:
                continue
            if final == "left" and seq[-1] != -1:
                continue
            corners = sum(1 for a, b in zip(seq, seq[1:]) if a != b)
            if incoming and first != init:
                corners += 1
            total += (1j * eps * mass) ** corners
    return total


def loop_cells(n):
    """Per-cell right-mover counts of one loop over its own period (2n cells)."""
    col = np.zeros(2 * n, dtype=np.int64)
    col[0 : n // 2] = 1
    col[n : 3 * n // 2] = -1
    return col


def profile_oracle(n, fiber_offsets_cells, t_cells, lagged=False):
    """Stamp loop_cells at each (offset_cells, weight) pair onto a profile.

    ``fiber_offsets_cells`` is an iterable of (offset_in_cells, weight).
    With ``lagged=True`` the left-mover channel (delayed a quarter period)
    is produced instead.
    """
    base = loop_cells(n)
    if lagged:
        base = np.roll(np.concatenate([base, np.zeros(n // 2, dtype=np.int64)]), n // 2)
    prof = np.zeros(t_cells, dtype=np.int64)
    for off, weight in fiber_offsets_cells:
        lo = off
        hi = min(off + len(base), t_cells)
        if lo >= t_cells or hi <= lo:
            continue
        prof[lo:hi] += weight * base[: hi - lo]
    return prof


def cord_fiber_offsets(n, origin_cells=0, repeats=1):
    """Fiber offsets (in cells) of a cord train: quartets one period apart."""
    quartet = [0, n // 2, n + 1, 3 * n // 2 + 1]
    out = []
    for r in range(repeats):
        out.extend(origin_cells + q + 2 * n * r for q in quartet)
    return out

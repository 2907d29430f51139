"""Upper concave envelope of a sampled extended-real profile on a uniform grid.

A profile holds one value per abscissa i/N; BOTTOM (-inf) marks points where
no finite value is achievable yet.  The envelope is the least concave
majorant of the finite points, evaluated back on the grid: a single
monotone-chain upper hull over the finite points followed by linear
interpolation at the grid abscissae.  Outside the integer interval spanned
by the finite points the output stays BOTTOM: mixtures of achievable
marginals can only produce marginals inside their convex hull, so no
extrapolation is ever performed.

Hull construction and interpolation use integer abscissae (the index i
rather than i/N); the two are affinely equivalent and integer arithmetic
keeps the hull tests free of grid-step rounding.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

BOTTOM = float("-inf")


def upper_concave_envelope(profile) -> np.ndarray:
    """Least concave majorant of the finite points of a 1D profile.

    Accepts any 1D sequence of floats (BOTTOM = -inf allowed) and returns a
    float array of the same length.  Values at the finite points' hull
    vertices are returned exactly; interior points are chord interpolations;
    indices outside [min finite, max finite] are BOTTOM.
    """
    arr = np.asarray(profile, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("profile must be one-dimensional")
    return np.asarray(_envelope_line(arr.tolist()), dtype=np.float64)


def _envelope_line(v: list) -> list:
    """Envelope of one line, as Python floats for speed in the sweep loop."""
    n = len(v)
    xs = [i for i in range(n) if v[i] != BOTTOM]
    if len(xs) <= 1:
        return list(v)
    a, b = xs[0], xs[-1]

    # Monotone-chain upper hull over (index, value); collinear middles are
    # dropped (evaluated envelope is identical either way).
    hx: list = []
    hy: list = []
    for j in xs:
        y = v[j]
        while len(hx) >= 2:
            x1 = hx[-1]
            x0 = hx[-2]
            y0 = hy[-2]
            if (x1 - x0) * (y - y0) - (hy[-1] - y0) * (j - x0) >= 0.0:
                hx.pop()
                hy.pop()
            else:
                break
        hx.append(j)
        hy.append(y)

    out = [BOTTOM] * n
    seg = 1
    x0, y0 = hx[0], hy[0]
    x1, y1 = hx[1], hy[1]
    for i in range(a, b + 1):
        while i > x1:
            seg += 1
            x0, y0 = x1, y1
            x1, y1 = hx[seg], hy[seg]
        if i == x0:
            out[i] = y0
        elif i == x1:
            out[i] = y1
        else:
            out[i] = y0 + (y1 - y0) * (i - x0) / (x1 - x0)
    return out


def envelope_batch(lines: np.ndarray, threads: int = 1) -> np.ndarray:
    """Envelope of every row of a 2D array, row-independently.

    Rows are disjoint, so any chunking across threads produces bit-identical
    results; the thread count is a throughput knob only.
    """
    if lines.ndim != 2:
        raise ValueError("lines must be two-dimensional")
    rows, _ = lines.shape
    out = np.empty_like(lines)

    def work(lo: int, hi: int) -> None:
        for r in range(lo, hi):
            out[r] = _envelope_line(lines[r].tolist())

    if threads <= 1 or rows < 2 * threads:
        work(0, rows)
        return out
    chunk = (rows + threads - 1) // threads
    bounds = [(lo, min(lo + chunk, rows)) for lo in range(0, rows, chunk)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(lambda be: work(*be), bounds))
    return out


def is_concave(profile, tol: float = 1e-9) -> bool:
    """Discrete concavity with contiguous finite support.

    True iff the finite entries occupy one contiguous index interval and
    every interior triple satisfies v[i-1] + v[i+1] <= 2 v[i] + tol.  An
    extended-real concave function is finite on an interval, so a support
    gap is a concavity failure, not a separate condition.
    """
    arr = np.asarray(profile, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("profile must be one-dimensional")
    finite = np.isfinite(arr)
    k = int(np.count_nonzero(finite))
    if k <= 1:
        return True
    idx = np.flatnonzero(finite)
    if idx[-1] - idx[0] + 1 != k:
        return False
    seg = arr[idx[0] : idx[-1] + 1]
    if len(seg) < 3:
        return True
    return bool(np.all(seg[:-2] + seg[2:] <= 2.0 * seg[1:-1] + tol))


def concavity_violation(profile, tol: float = 1e-9) -> tuple[float, int]:
    """Worst concavity defect of one line and the interior index at fault.

    Returns (violation, index) where violation = max over interior triples of
    v[i-1] + v[i+1] - 2 v[i]; a support gap reports (+inf, gap index).  A
    line that passes is_concave at tol reports violation <= tol.
    """
    arr = np.asarray(profile, dtype=np.float64)
    finite = np.isfinite(arr)
    k = int(np.count_nonzero(finite))
    if k <= 1:
        return (BOTTOM, -1)
    idx = np.flatnonzero(finite)
    lo, hi = int(idx[0]), int(idx[-1])
    if hi - lo + 1 != k:
        inner = np.flatnonzero(~finite[lo : hi + 1])
        return (float("inf"), lo + int(inner[0]))
    seg = arr[lo : hi + 1]
    if len(seg) < 3:
        return (BOTTOM, -1)
    defects = seg[:-2] + seg[2:] - 2.0 * seg[1:-1]
    j = int(np.argmax(defects))
    return (float(defects[j]), lo + j + 1)

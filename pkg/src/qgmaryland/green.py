"""Lattice Green's function of the discrete Laplacian on Z^n.

``green_diag`` evaluates the diagonal matrix element of (Delta_n - lambda)^{-1}
as an equal-weight (periodic trapezoid) average of 1/(Delta_n(k) - lambda)
over a uniform torus grid.  Off the spectrum [-2n, 2n] the integrand is
analytic and periodic, so the rule converges exponentially in the number of
nodes per axis; no adaptivity is needed and results are deterministic.

Two independent oracles back the quadrature:

* the d=1 closed form -sgn(lambda)/sqrt(lambda^2-4), and
* the closed-walk moment series -sum_k m_{2k}/lambda^{2k+1}, whose integer
  coefficients m_{2k} count closed 2k-step walks at the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InsideSpectrumError

SPECTRUM_MARGIN = 1e-6
MAX_WALK_ORDER = 64


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid on the n-torus with N nodes per axis (phases 2*pi*j/N)."""

    dimension: int
    points_per_axis: int
    max_nodes: int = 1 << 24

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.points_per_axis < 4:
            raise ValueError("need at least 4 points per axis")
        if self.points_per_axis ** self.dimension > self.max_nodes:
            raise ValueError(
                f"{self.points_per_axis}^{self.dimension} nodes exceed the "
                f"budget of {self.max_nodes}")

    def axis_phases(self) -> np.ndarray:
        n = self.points_per_axis
        return 2.0 * math.pi * np.arange(n) / n

    @property
    def node_count(self) -> int:
        return self.points_per_axis ** self.dimension


def default_grid(dimension: int) -> TorusGrid:
    """512 points per axis up to dimension 2, 128 for dimension 3."""
    return TorusGrid(dimension, 512 if dimension <= 2 else 128)


def symbol_delta(k) -> float:
    """Symbol of the discrete Laplacian: sum_j 2 cos(k_j), range [-2n, 2n]."""
    arr = np.asarray(k, dtype=float)
    return float(np.sum(2.0 * np.cos(arr)))


@lru_cache(maxsize=32)
def _delta_mesh(grid: TorusGrid) -> np.ndarray:
    """Flattened symbol values over all grid nodes (cached per grid)."""
    c = 2.0 * np.cos(grid.axis_phases())
    total = c
    for _ in range(grid.dimension - 1):
        total = total[..., None] + c
    out = np.ascontiguousarray(total.reshape(-1))
    out.setflags(write=False)
    return out


def _check_off_spectrum(n: int, lams: np.ndarray, margin: float) -> None:
    dist = np.abs(lams) - 2.0 * n
    bad = dist < margin
    if np.any(bad):
        worst = lams[bad][0]
        raise InsideSpectrumError(
            f"lambda={worst!r} is within {margin} of the spectrum [-{2*n}, {2*n}]")


def green_diag_array(n: int, lams: np.ndarray, grid: TorusGrid,
                     margin: float = SPECTRUM_MARGIN) -> np.ndarray:
    """Vectorized `green_diag` over an array of spectral parameters.

    Same quadrature and summation order as the scalar form.  Real input
    must stay `margin` away from [-2n, 2n]; complex input only needs a
    nonzero imaginary part.
    """
    if grid.dimension != n:
        raise ValueError(f"grid dimension {grid.dimension} != n={n}")
    lams = np.asarray(lams)
    if np.iscomplexobj(lams):
        real_mask = lams.imag == 0.0
        if np.any(real_mask):
            _check_off_spectrum(n, lams.real[real_mask], margin)
    else:
        _check_off_spectrum(n, lams, margin)
    mesh = _delta_mesh(grid)
    flat = lams.reshape(-1)
    out = np.empty(flat.shape, dtype=complex if np.iscomplexobj(lams) else float)
    chunk = max(1, (1 << 22) // mesh.size)
    for i in range(0, flat.size, chunk):
        block = flat[i:i + chunk]
        out[i:i + chunk] = np.mean(1.0 / (mesh[:, None] - block[None, :]), axis=0)
    return out.reshape(lams.shape)


def green_diag(n: int, lam, grid: TorusGrid | None = None,
               margin: float = SPECTRUM_MARGIN):
    """Diagonal Green's function G_n(0; lambda) of Delta_n on Z^n.

    Returns a float for real lambda (negative for lambda > 2n, positive for
    lambda < -2n) and a complex number otherwise.  Raises InsideSpectrumError
    for real lambda within `margin` of [-2n, 2n], where the integrand has a
    non-integrable singularity.
    """
    if n > 3:
        raise ValueError("grid quadrature supported for n <= 3")
    if grid is None:
        grid = default_grid(n)
    if isinstance(lam, complex) and lam.imag != 0.0:
        arr = np.asarray([lam])
    else:
        arr = np.asarray([float(lam.real if isinstance(lam, complex) else lam)])
    value = green_diag_array(n, arr, grid, margin)[0]
    return complex(value) if np.iscomplexobj(value) else float(value)


def green_diag_1d_closed(lam: float) -> float:
    """Closed form for n=1: -sgn(lambda)/sqrt(lambda^2 - 4), |lambda| > 2."""
    lam = float(lam)
    if abs(lam) <= 2.0:
        raise InsideSpectrumError(f"|lambda|={abs(lam)} <= 2: inside the 1d spectrum")
    return -math.copysign(1.0 / math.sqrt(lam * lam - 4.0), lam)


@lru_cache(maxsize=64)
def walk_moments(n: int, k_max: int) -> tuple[int, ...]:
    """Exact moments m_0, m_2, ..., m_{k_max} of Delta_n.

    m_{2k} counts closed 2k-step nearest-neighbor walks at the origin of
    Z^n, computed by repeated convolution of the step kernel with exact
    integer arithmetic.  Odd moments vanish and are omitted.
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    if k_max < 0 or k_max % 2 != 0:
        raise ValueError("k_max must be a nonnegative even integer")
    if k_max > MAX_WALK_ORDER:
        raise ValueError(f"k_max={k_max} exceeds the cost cap {MAX_WALK_ORDER}")
    origin = (0,) * n
    counts: dict[tuple[int, ...], int] = {origin: 1}
    moments = [1]
    for step in range(1, k_max + 1):
        new: dict[tuple[int, ...], int] = {}
        for pos, cnt in counts.items():
            for axis in range(n):
                for delta in (1, -1):
                    nxt = pos[:axis] + (pos[axis] + delta,) + pos[axis + 1:]
                    new[nxt] = new.get(nxt, 0) + cnt
        counts = new
        if step % 2 == 0:
            moments.append(counts.get(origin, 0))
    return tuple(moments)


def moment_series_oracle(n: int, lam: float, order: int) -> float:
    """Resolvent moment series -sum_{k<=order/2} m_{2k}/lambda^{2k+1}.

    Valid for |lambda| > 2n+1; the omitted tail is bounded by
    (2n/|lambda|)^(order+2) / (|lambda| - 2n).
    """
    lam = float(lam)
    if abs(lam) <= 2.0 * n + 1.0:
        raise ValueError(f"|lambda|={abs(lam)} <= 2n+1: series not comfortably convergent")
    moments = walk_moments(n, order)
    terms = [float(m) / lam ** (2 * k + 1) for k, m in enumerate(moments)]
    return -math.fsum(terms)


def moment_series_tail_bound(n: int, lam: float, order: int) -> float:
    """Upper bound for the truncation error of `moment_series_oracle`."""
    ratio = 2.0 * n / abs(lam)
    return ratio ** (order + 2) / (abs(lam) - 2.0 * n)

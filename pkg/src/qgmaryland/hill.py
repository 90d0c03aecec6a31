"""Edge Schrodinger problem on [0,1] and the Hill band structure.

The edge equation is -y'' + q y = z y with a real piecewise-constant
potential q.  The two fundamental solutions s and c are pinned by
s(0)=c'(0)=0 and s'(0)=c(0)=1; everything the lattice reduction needs is
their boundary data at t=1.  For piecewise-constant q the propagation
across each piece is an exact 2x2 matrix with cos/cosh entries, so there
is no ODE stepping and the Wronskian is conserved to rounding.

The discriminant eta(z) = c(1;z) + s'(1;z) is the monodromy trace of the
periodized potential; the band set of the Hill operator is
{lambda : |eta(lambda)| <= 2} and the Dirichlet spectrum is the zero set
of s(1;.).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import DirichletPointError, OutOfRangeError

DEFAULT_SCAN_STEP = 0.01
DEFAULT_ROOT_TOL = 1e-10
# below this |s(1;z)|, 1/s(1;z) has no significant digits at double precision
DIRICHLET_THRESHOLD = 1e-10


@dataclass(frozen=True)
class Potential:
    """Piecewise-constant potential on [0,1].

    ``breakpoints`` are strictly increasing with first 0 and last 1;
    ``values`` holds one real energy per piece.  Use the classmethods
    rather than the raw constructor.
    """

    kind: str
    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        bp, vals = self.breakpoints, self.values
        if len(bp) < 2 or len(vals) != len(bp) - 1:
            raise ValueError("need n+1 breakpoints for n pieces")
        if bp[0] != 0.0 or bp[-1] != 1.0:
            raise ValueError("breakpoints must start at 0 and end at 1")
        if any(b1 <= b0 for b0, b1 in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("potential values must be finite reals")

    @classmethod
    def zero(cls) -> "Potential":
        return cls("zero", (0.0, 1.0), (0.0,))

    @classmethod
    def constant(cls, v0: float) -> "Potential":
        return cls("constant", (0.0, 1.0), (float(v0),))

    @classmethod
    def piecewise_constant(cls, breakpoints: Sequence[float], values: Sequence[float]) -> "Potential":
        return cls("piecewise_constant",
                   tuple(float(b) for b in breakpoints),
                   tuple(float(v) for v in values))

    def pieces(self) -> list[tuple[float, float]]:
        """(length, value) of each piece, left to right."""
        return [(b1 - b0, v) for b0, b1, v in
                zip(self.breakpoints, self.breakpoints[1:], self.values)]


@dataclass(frozen=True)
class TransferData:
    """Boundary values of the fundamental solutions at t=1."""

    z: complex
    s1: complex
    ds1: complex
    c1: complex
    dc1: complex

    @property
    def wronskian_defect(self) -> float:
        return abs(self.c1 * self.ds1 - self.dc1 * self.s1 - 1.0)

    @property
    def discriminant(self) -> complex:
        return self.c1 + self.ds1


@dataclass(frozen=True)
class Band:
    """One closed band interval [lo, hi] of the Hill operator."""

    lo: float
    hi: float


def _cos_sin_scaled(w, h):
    """cos(sqrt(w) h) and sin(sqrt(w) h)/sqrt(w), both entire in w.

    Real input stays real (cosh/sinh branch for w < 0); the small-|w|
    series keeps full accuracy across the branch point.
    """
    wh2 = w * h * h
    if abs(wh2) < 1e-6:
        # relative truncation error ~ |wh2|^3/5040 < 2e-22
        cos_part = 1.0 - wh2 / 2.0 + wh2 * wh2 / 24.0 - wh2**3 / 720.0
        sin_part = h * (1.0 - wh2 / 6.0 + wh2 * wh2 / 120.0 - wh2**3 / 5040.0)
        return cos_part, sin_part
    if isinstance(w, complex):
        rt = cmath.sqrt(w)
        return cmath.cos(rt * h), cmath.sin(rt * h) / rt
    if w > 0.0:
        rt = math.sqrt(w)
        return math.cos(rt * h), math.sin(rt * h) / rt
    kap = math.sqrt(-w)
    return math.cosh(kap * h), math.sinh(kap * h) / kap


def integrate_fundamental(q: Potential, z: complex, tol: float = 1e-9) -> TransferData:
    """Boundary data of s(.;z), c(.;z) at t=1 by exact per-piece propagation.

    The per-piece matrices are exact, so ``tol`` only gates the Wronskian
    defect check: the result is rejected if |c1*ds1 - dc1*s1 - 1| > 10*tol.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    c, dc = 1.0, 0.0
    s, ds = 0.0, 1.0
    try:
        for h, v in q.pieces():
            w = z - v
            C, S = _cos_sin_scaled(w, h)
            c, dc = C * c + S * dc, -w * S * c + C * dc
            s, ds = C * s + S * ds, -w * S * s + C * ds
    except OverflowError as exc:
        raise OutOfRangeError(f"transfer matrix overflow at z={z!r}") from exc
    values = (s, ds, c, dc)
    if not all(_isfinite(v) for v in values):
        raise OutOfRangeError(f"non-finite transfer data at z={z!r}")
    data = TransferData(z=z, s1=s, ds1=ds, c1=c, dc1=dc)
    if data.wronskian_defect > 10.0 * tol:
        raise OutOfRangeError(
            f"Wronskian defect {data.wronskian_defect:.3e} exceeds 10*tol at z={z!r}")
    return data


def _isfinite(v) -> bool:
    if isinstance(v, complex):
        return math.isfinite(v.real) and math.isfinite(v.imag)
    return math.isfinite(v)


def discriminant(q: Potential, z: complex, tol: float = 1e-9) -> complex:
    """Hill discriminant eta(z) = c(1;z) + s'(1;z); real on the real axis."""
    return integrate_fundamental(q, z, tol).discriminant


def a_coeff(q: Potential, z: complex, tol: float = 1e-9) -> complex:
    """Vertex coefficient a(z) = 1/s(1;z).

    Raises DirichletPointError when |s(1;z)| < 1e-10, i.e. z is numerically
    on the Dirichlet spectrum where the vertex reduction degenerates.
    """
    data = integrate_fundamental(q, z, tol)
    if abs(data.s1) < DIRICHLET_THRESHOLD:
        raise DirichletPointError(f"z={z!r} is a Dirichlet point (|s(1;z)|={abs(data.s1):.2e})")
    return 1.0 / data.s1


def _bisect(f: Callable[[float], float], a: float, b: float, tol: float,
            max_iter: int = 50) -> float:
    """Locate a sign change of f in [a, b] to interval width <= tol."""
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0.0) == (fb > 0.0):
        raise ValueError("bisection endpoints do not bracket a sign change")
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fa > 0.0) == (fm > 0.0):
            a, fa = mid, fm
        else:
            b = mid
        if b - a <= tol:
            break
    return 0.5 * (a + b)


def hill_bands(q: Potential, window: tuple[float, float],
               scan_step: float = DEFAULT_SCAN_STEP,
               root_tol: float = DEFAULT_ROOT_TOL) -> list[Band]:
    """Connected components of {|eta| <= 2} inside the window.

    The window is scanned uniformly; each inside/outside transition is
    refined by bisection on eta -/+ 2.  Bands reaching the window ends are
    clipped there.  The scan step must be small enough to separate bands
    (caller's responsibility).
    """
    lam_min, lam_max = float(window[0]), float(window[1])
    if not lam_min < lam_max:
        raise ValueError("window must satisfy lam_min < lam_max")
    n_steps = max(2, int(math.ceil((lam_max - lam_min) / scan_step)))
    grid = [lam_min + (lam_max - lam_min) * i / n_steps for i in range(n_steps + 1)]
    etas = [discriminant(q, lam).real for lam in grid]
    inside = [abs(e) <= 2.0 for e in etas]

    def edge(i_out: int, i_in: int) -> float:
        level = 2.0 if etas[i_out] > 2.0 else -2.0
        f = lambda lam: discriminant(q, lam).real - level
        return _bisect(f, min(grid[i_out], grid[i_in]), max(grid[i_out], grid[i_in]), root_tol)

    bands: list[Band] = []
    i = 0
    while i <= n_steps:
        if inside[i]:
            j = i
            while j + 1 <= n_steps and inside[j + 1]:
                j += 1
            lo = grid[0] if i == 0 else edge(i - 1, i)
            hi = grid[n_steps] if j == n_steps else edge(j + 1, j)
            if hi > lo:
                bands.append(Band(lo=lo, hi=hi))
            i = j + 1
        else:
            i += 1
    return bands


def dirichlet_points(q: Potential, window: tuple[float, float],
                     root_tol: float = DEFAULT_ROOT_TOL,
                     scan_step: float = DEFAULT_SCAN_STEP) -> list[float]:
    """Zeros of lambda -> s(1;lambda) in the window, sorted ascending."""
    lam_min, lam_max = float(window[0]), float(window[1])
    if not lam_min < lam_max:
        raise ValueError("window must satisfy lam_min < lam_max")
    n_steps = max(2, int(math.ceil((lam_max - lam_min) / scan_step)))
    grid = [lam_min + (lam_max - lam_min) * i / n_steps for i in range(n_steps + 1)]
    vals = [float(integrate_fundamental(q, lam).s1) for lam in grid]
    zeros: list[float] = []
    for i in range(n_steps):
        v0, v1 = vals[i], vals[i + 1]
        if v0 == 0.0:
            zeros.append(grid[i])
            continue
        if (v0 > 0.0) != (v1 > 0.0):
            f = lambda lam: float(integrate_fundamental(q, lam).s1)
            zeros.append(_bisect(f, grid[i], grid[i + 1], root_tol))
    if vals[-1] == 0.0:
        zeros.append(grid[-1])
    return sorted(zeros)

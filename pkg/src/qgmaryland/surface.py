"""Weyl-function layer of the surface reduction.

The quantum-graph Hamiltonian enters lattice computations through
M(z) = a(z) (Delta_d - d eta(z)) on l^2(Z^d).  Off the Hill bands the
problem reduces to the surface lattice Z^{d2}, where the reduced Weyl
operator is the multiplication (in Fourier variables) by

    N(k2; z) = -a(z)^{-1} G_{d1}(0; d eta(z) - Delta_{d2}(k2)).

This module evaluates that symbol, its Fourier/matrix elements, the
Cayley contraction b = (gN - i)/(gN + i), the rotation number

    sigma(lambda) = average over the d2-torus of arctan(N/g),

and its analytic companion f0(z) = average of log C with
C = -(N - ig)(N + ig)^{-1}, which satisfies f0(lambda) = 2 i sigma(lambda)
on the real axis and Re f0 < 0 in the upper half-plane.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import InitVar, dataclass
from typing import Mapping

import numpy as np

from .errors import BranchViolationError, DirichletPointError, GapViolationError
from .green import TorusGrid, default_grid, green_diag_array, _delta_mesh
from .hill import DIRICHLET_THRESHOLD, Potential, integrate_fundamental

PHASE_CHECK_RANGE = 200
PHASE_CHECK_MIN_DIST = 1e-9


def _phase_distances(omega: tuple[float, ...], phi: float, m_range: int) -> float:
    """min over |m|_inf <= m_range of dist(omega.m + phi, Z/2)."""
    d2 = len(omega)
    axis = np.arange(-m_range, m_range + 1, dtype=float)

    def min_dist(values: np.ndarray) -> float:
        frac = np.remainder(values + phi, 0.5)
        return float(np.min(np.minimum(frac, 0.5 - frac)))

    inner = axis * omega[-1]
    for j in range(d2 - 2, 0, -1):
        inner = (axis * omega[j])[:, None] + inner.reshape(-1)
    if d2 == 1:
        return min_dist(inner)
    # chunk over the first axis to keep memory flat in higher dimensions
    return min(min_dist(m0 * omega[0] + inner.reshape(-1)) for m0 in axis)


@dataclass(frozen=True)
class ModelParams:
    """Surface Maryland model data (d1, d2, g, omega, phi).

    Angles are in turns: the vertex coupling on the surface sublattice
    {m1 = 0} is alpha(m2) = g tan(pi (omega.m2 + phi)).  Construction
    verifies g != 0 and the finite-range phase condition
    dist(omega.m2 + phi, Z/2) >= 1e-9 for |m2|_inf <= phase_check_range
    (default 200), which keeps every tan finite and every target phase
    away from +-pi/2.  In higher surface dimensions the default box is
    very demanding; pass a smaller range (the config's M_check) there.
    """

    d1: int
    d2: int
    g: float
    omega: tuple[float, ...]
    phi: float
    phase_check_range: InitVar[int] = PHASE_CHECK_RANGE

    def __post_init__(self, phase_check_range: int) -> None:
        if self.d1 < 1 or self.d2 < 1:
            raise ValueError("d1 and d2 must be positive integers")
        if self.g == 0.0:
            raise ValueError("coupling g must be nonzero")
        object.__setattr__(self, "omega", tuple(float(w) for w in self.omega))
        object.__setattr__(self, "g", float(self.g))
        object.__setattr__(self, "phi", float(self.phi))
        if len(self.omega) != self.d2:
            raise ValueError(f"omega must have length d2={self.d2}")
        if phase_check_range > 0:
            worst = _phase_distances(self.omega, self.phi, phase_check_range)
            if worst < PHASE_CHECK_MIN_DIST:
                raise ValueError(
                    f"phase condition violated: dist(omega.m+phi, Z/2)={worst:.2e} "
                    f"< {PHASE_CHECK_MIN_DIST} within |m|<={phase_check_range}")

    @property
    def d(self) -> int:
        return self.d1 + self.d2

    @property
    def chi(self) -> complex:
        return cmath.exp(-2j * math.pi * self.phi)

    def alpha(self, m2) -> float:
        """Vertex coupling g tan(pi (omega.m2 + phi)) at surface index m2."""
        theta = math.fsum(w * int(m) for w, m in zip(self.omega, m2)) + self.phi
        return self.g * math.tan(math.pi * theta)

    def surface_coupling(self, m2) -> float:
        """Diagonal of the reduced surface operator: -(1/g) cot(pi (omega.m2 + phi))."""
        theta = math.fsum(w * int(m) for w, m in zip(self.omega, m2)) + self.phi
        return -1.0 / (self.g * math.tan(math.pi * theta))


@dataclass(frozen=True)
class SigmaTable:
    """Sampled rotation number on an interval inside one spectral gap."""

    lo: float
    hi: float
    lambdas: tuple[float, ...]
    sigmas: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.lambdas) != len(self.sigmas) or len(self.lambdas) < 2:
            raise ValueError("need matching lambda/sigma samples (>= 2)")
        if any(l1 <= l0 for l0, l1 in zip(self.lambdas, self.lambdas[1:])):
            raise ValueError("lambda samples must be strictly increasing")
        if any(s1 <= s0 for s0, s1 in zip(self.sigmas, self.sigmas[1:])):
            raise ValueError("sigma samples must be strictly increasing")
        half_pi = 0.5 * math.pi
        if any(not -half_pi < s < half_pi for s in self.sigmas):
            raise ValueError("sigma values must lie in (-pi/2, pi/2)")


def _transfer_quantities(q: Potential, z, ode_tol: float = 1e-9):
    """(s1, eta) at z with the Dirichlet-point guard."""
    data = integrate_fundamental(q, z, ode_tol)
    if abs(data.s1) < DIRICHLET_THRESHOLD:
        raise DirichletPointError(f"z={z!r} is a Dirichlet point of the edge problem")
    return data.s1, data.discriminant


def weyl_apply(params: ModelParams, q: Potential, z,
               xi: Mapping[tuple[int, ...], complex]) -> dict[tuple[int, ...], complex]:
    """Apply M(z) = a(z) (Delta_d - d eta(z)) to a finitely supported sequence.

    ``xi`` maps lattice points of Z^d (tuples of length d1+d2) to values;
    the support of the result grows by one shell of neighbors.
    """
    s1, eta = _transfer_quantities(q, z)
    a = 1.0 / s1
    d = params.d
    out: dict[tuple[int, ...], complex] = {}
    for m, v in xi.items():
        if len(m) != d:
            raise ValueError(f"support point {m!r} does not have length d={d}")
        if v == 0:
            continue
        out[m] = out.get(m, 0.0) - d * eta * v
        for axis in range(d):
            for delta in (1, -1):
                nbr = m[:axis] + (m[axis] + delta,) + m[axis + 1:]
                out[nbr] = out.get(nbr, 0.0) + v
    return {m: a * v for m, v in out.items()}


def _symbol_values(params: ModelParams, q: Potential, z, grid: TorusGrid,
                   green_grid: TorusGrid | None = None,
                   ode_tol: float = 1e-9) -> np.ndarray:
    """N(k2; z) on every node of the d2-torus grid (flattened)."""
    if grid.dimension != params.d2:
        raise ValueError(f"grid dimension {grid.dimension} != d2={params.d2}")
    if green_grid is None:
        green_grid = default_grid(params.d1)
    s1, eta = _transfer_quantities(q, z, ode_tol)
    w = params.d * eta - _delta_mesh(grid)
    greens = green_diag_array(params.d1, w, green_grid)
    return -s1 * greens


def n_symbol(params: ModelParams, q: Potential, k2, z,
             green_grid: TorusGrid | None = None):
    """Surface Weyl symbol N(k2; z) = -a(z)^{-1} G_{d1}(0; d eta(z) - Delta_{d2}(k2)).

    Returns a float for real z in a gap (all inputs real there), complex
    otherwise.  Raises InsideSpectrumError if the Green argument comes too
    close to [-2 d1, 2 d1], and DirichletPointError at Dirichlet points.
    """
    k2 = np.atleast_1d(np.asarray(k2, dtype=float))
    if k2.size != params.d2:
        raise ValueError(f"k2 must have length d2={params.d2}")
    if green_grid is None:
        green_grid = default_grid(params.d1)
    s1, eta = _transfer_quantities(q, z)
    w = params.d * eta - float(np.sum(2.0 * np.cos(k2)))
    arr = np.asarray([w])
    value = green_diag_array(params.d1, arr, green_grid)[0]
    result = -s1 * value
    return complex(result) if isinstance(result, complex) or np.iscomplexobj(result) else float(result)


def n_matrix_element(params: ModelParams, q: Potential, offset, z, grid: TorusGrid,
                     green_grid: TorusGrid | None = None) -> complex:
    """Matrix element N(m2 - m2'; z), the Fourier coefficient of the symbol.

    Computed with the same torus quadrature that samples the symbol, so it
    agrees with the FFT of the sampled symbol to rounding.
    """
    offset = tuple(int(o) for o in np.atleast_1d(offset))
    if len(offset) != params.d2:
        raise ValueError(f"offset must have length d2={params.d2}")
    vals = _symbol_values(params, q, z, grid, green_grid)
    phases = grid.axis_phases()
    mesh = offset[0] * phases
    for o in offset[1:]:
        mesh = (mesh[..., None] + o * phases).reshape(-1)
    weights = np.exp(-1j * mesh)
    return complex(np.mean(vals * weights))


def b_symbol(params: ModelParams, q: Potential, k2, z,
             green_grid: TorusGrid | None = None) -> complex:
    """Cayley symbol b = (g N - i)/(g N + i); |b| = 1 for real N, < 1 if Im(gN) > 0."""
    value = n_symbol(params, q, k2, z, green_grid)
    gn = params.g * value
    return (gn - 1j) / (gn + 1j)


def _require_gap(q: Potential, lam: float) -> float:
    data = integrate_fundamental(q, lam)
    eta = float(data.discriminant)
    if abs(eta) <= 2.0:
        raise GapViolationError(f"lambda={lam} has |eta|={abs(eta):.6f} <= 2 (inside a band)")
    return eta


def sigma(params: ModelParams, q: Potential, lam: float, grid: TorusGrid | None = None,
          green_grid: TorusGrid | None = None) -> float:
    """Rotation number: average of arctan(N(k2, lambda)/g) over the d2-torus.

    Requires lambda in a spectral gap (|eta| > 2) and positive coupling;
    callers working with the original model pass normalized (primed)
    parameters.  Strictly increasing in lambda on each gap, with values in
    (-pi/2, pi/2).
    """
    if params.g <= 0.0:
        raise ValueError("sigma requires a positive (normalized) coupling")
    lam = float(lam)
    _require_gap(q, lam)
    if grid is None:
        grid = default_grid(params.d2)
    vals = _symbol_values(params, q, lam, grid, green_grid)
    return float(np.mean(np.arctan(vals / params.g)))


def sigma_table(params: ModelParams, q: Potential, lo: float, hi: float, steps: int,
                grid: TorusGrid | None = None,
                green_grid: TorusGrid | None = None) -> SigmaTable:
    """Sample sigma on [lo, hi] at steps+1 uniform points (validates monotonicity)."""
    if steps < 1:
        raise ValueError("need at least one step")
    lams = [lo + (hi - lo) * i / steps for i in range(steps + 1)]
    sigmas = [sigma(params, q, lam, grid, green_grid) for lam in lams]
    return SigmaTable(lo=lo, hi=hi, lambdas=tuple(lams), sigmas=tuple(sigmas))


def sigma_derivative_quadrature(params: ModelParams, q: Potential, lam: float,
                                step: float, grid: TorusGrid | None = None,
                                green_grid: TorusGrid | None = None) -> float:
    """sigma'(lambda) via the derivative-form quadrature.

    Averages g N'/(N^2 + g^2) over the torus, with N' from central finite
    differences of the symbol at lambda +- step.
    """
    if params.g <= 0.0:
        raise ValueError("requires a positive (normalized) coupling")
    if grid is None:
        grid = default_grid(params.d2)
    n_mid = _symbol_values(params, q, lam, grid, green_grid)
    n_plus = _symbol_values(params, q, lam + step, grid, green_grid)
    n_minus = _symbol_values(params, q, lam - step, grid, green_grid)
    n_prime = (n_plus - n_minus) / (2.0 * step)
    g = params.g
    return float(np.mean(g * n_prime / (n_mid * n_mid + g * g)))


def f0(params: ModelParams, q: Potential, z, grid: TorusGrid | None = None,
       green_grid: TorusGrid | None = None) -> complex:
    """Torus average of log C(k2, z) with C = -(N - ig)(N + ig)^{-1}.

    On the real axis f0(lambda) = 2 i sigma(lambda); for Im z > 0 the
    Herglotz property of N gives |C| < 1, hence Re f0 < 0.  The strip
    condition |Im N| <= g/2 is enforced; outside it (or if any C lands on
    the logarithm's branch cut) BranchViolationError is raised.
    """
    if params.g <= 0.0:
        raise ValueError("f0 requires a positive (normalized) coupling")
    if grid is None:
        grid = default_grid(params.d2)
    g = params.g
    if (isinstance(z, complex) and z.imag == 0.0) or not isinstance(z, complex):
        lam = float(z.real if isinstance(z, complex) else z)
        _require_gap(q, lam)
        z = lam
    vals = np.asarray(_symbol_values(params, q, z, grid, green_grid), dtype=complex)
    im_max = float(np.max(np.abs(vals.imag)))
    if im_max > 0.5 * g:
        raise BranchViolationError(
            f"strip condition failed: max |Im N| = {im_max:.3e} > g/2 = {0.5*g:.3e}")
    c_vals = -(vals - 1j * g) / (vals + 1j * g)
    on_cut = (c_vals.real <= 0.0) & (c_vals.imag == 0.0)
    if np.any(on_cut):
        raise BranchViolationError("Cayley value on (-inf, 0]: logarithm branch cut hit")
    return complex(np.mean(np.log(c_vals)))

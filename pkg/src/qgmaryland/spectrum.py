"""Point-spectrum enumeration and finite-truncation oracles.

Eigenvalues of the surface Maryland quantum graph outside the Hill bands
solve sigma(lambda) = pi (omega'.m + phi') mod pi, with sigma evaluated at
the normalized surface parameters produced by `primed_params`.  Each root
is found by bisection (sigma is strictly increasing on every gap) and can
be cross-checked by two independent finite matrices:

* `truncated_surface_matrix` restricts the reduced surface operator
  N(lambda) - B to a box in Z^{d2}; a near-kernel witnesses the eigenvalue.
* `truncated_full_matrix` restricts M(lambda) - A to a box in Z^d with the
  tan coupling on the surface sublattice {m1 = 0}; its smallest singular
  value collapsing witnesses spectrum, mid-band points included.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as sparse_linalg

from .errors import ArithmeticClashError, DirichletPointError, GapViolationError
from .green import TorusGrid, default_grid
from .hill import (DIRICHLET_THRESHOLD, Band, Potential, dirichlet_points,
                   hill_bands, integrate_fundamental)
from .surface import ModelParams, _symbol_values, sigma

DENSE_EIG_LIMIT = 4096
GAP_EDGE_MARGIN = 1e-3
TARGET_CLASH_TOL = 1e-12


@dataclass(frozen=True)
class Numerics:
    """Numerical knobs shared by the solver and the CLI."""

    ode_tol: float = 1e-9
    quad_points_per_axis: int | None = None
    bisect_tol: float = 1e-10
    box_sizes: tuple[int, ...] = (32, 64, 128)
    M_max: int = 8
    M_check: int = 200
    beta: float = 1.0


@dataclass
class EigenvalueRecord:
    """One solved point eigenvalue lambda(m) with its oracle witnesses."""

    m: tuple[int, ...]
    target_phase: float
    lam: float
    residual: float
    oracle_gaps: dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class DiophantineReport:
    """Result of the exhaustive finite Diophantine scan."""

    beta: float
    C_estimate: float
    worst_m: tuple[int, ...]
    M_max: int

    @property
    def passed(self) -> bool:
        return self.C_estimate > 0.0


@dataclass
class SpectralReport:
    """Composite answer: bands, Dirichlet points, and point spectrum."""

    params: ModelParams
    potential: Potential
    window: tuple[float, float]
    M_max: int
    numerics: Numerics
    bands: list[Band]
    dirichlet: list[float]
    gap_subintervals: list[tuple[float, float]]
    eigenvalues: list[EigenvalueRecord]
    unresolved: list[tuple[tuple[int, ...], float]]


def primed_params(params: ModelParams) -> ModelParams:
    """Normalized parameters of the reduced surface operator.

    The reduction inverts the vertex coupling: the surface diagonal is
    B(m) = -(1/g) cot(pi (omega.m + phi)) = g' tan(pi (omega'.m + phi'))
    with positive g'.  For g > 0 this is (1/g, omega, phi + 1/2); for
    g < 0 the signs of omega and phi flip as well.  Applying the map twice
    reproduces the original coupling diagonal (tan has period 1 in phi).
    """
    # the map permutes the phase lattice, so the already-validated phase
    # condition transfers verbatim; skip re-scanning
    if params.g > 0.0:
        return ModelParams(params.d1, params.d2, 1.0 / params.g,
                           params.omega, params.phi + 0.5, phase_check_range=0)
    return ModelParams(params.d1, params.d2, -1.0 / params.g,
                       tuple(-w for w in params.omega), -params.phi - 0.5,
                       phase_check_range=0)


def surface_diagonal(params_primed: ModelParams, m2) -> float:
    """Surface-operator diagonal B(m2) = g' tan(pi (omega'.m2 + phi'))."""
    theta = math.fsum(w * int(m) for w, m in zip(params_primed.omega, m2)) + params_primed.phi
    return params_primed.g * math.tan(math.pi * theta)


def _box_points(d: int, radius: int) -> list[tuple[int, ...]]:
    rng = range(-radius, radius + 1)
    return list(itertools.product(rng, repeat=d))


def enumerate_targets(params_primed: ModelParams, M_max: int) -> list[tuple[tuple[int, ...], float]]:
    """Target phases pi (omega.m + phi) mod pi in (-pi/2, pi/2) for |m|_inf <= M_max.

    Raises ArithmeticClashError if two targets coincide within 1e-12 on the
    mod-pi circle (rational resonance: the model's distinctness hypothesis
    fails on this box).
    """
    if M_max < 0:
        raise ValueError("M_max must be nonnegative")
    out: list[tuple[tuple[int, ...], float]] = []
    for m in _box_points(params_primed.d2, M_max):
        theta = math.fsum(w * mi for w, mi in zip(params_primed.omega, m)) + params_primed.phi
        target = math.remainder(math.pi * theta, math.pi)
        out.append((m, target))
    ranked = sorted(out, key=lambda it: it[1])
    for (m0, t0), (m1, t1) in zip(ranked, ranked[1:]):
        if t1 - t0 < TARGET_CLASH_TOL:
            raise ArithmeticClashError(
                f"targets for m={m0} and m={m1} coincide within {TARGET_CLASH_TOL}")
    if len(ranked) > 1:
        wrap = (ranked[0][1] + math.pi) - ranked[-1][1]
        if wrap < TARGET_CLASH_TOL:
            raise ArithmeticClashError(
                f"targets for m={ranked[-1][0]} and m={ranked[0][0]} coincide mod pi")
    return out


def solve_eigenvalue(params: ModelParams, q: Potential, gap: tuple[float, float],
                     target: float, tol: float,
                     grid: TorusGrid | None = None,
                     green_grid: TorusGrid | None = None,
                     m: tuple[int, ...] | None = None,
                     max_iter: int = 200) -> EigenvalueRecord | None:
    """Bisect sigma(lambda) = target on a subinterval of one spectral gap.

    Takes the original model parameters and normalizes them internally.
    Returns None (NoRoot) when the target is outside [sigma(a), sigma(b)];
    by strict monotonicity there is at most one root.
    """
    if not -0.5 * math.pi < target < 0.5 * math.pi:
        raise ValueError("target phase must lie in (-pi/2, pi/2)")
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    p = primed_params(params)
    a, b = float(gap[0]), float(gap[1])
    if not a < b:
        raise ValueError("gap interval must satisfy a < b")
    fa = sigma(p, q, a, grid, green_grid) - target
    fb = sigma(p, q, b, grid, green_grid) - target
    if abs(fa) <= tol:
        return EigenvalueRecord(m=m, target_phase=target, lam=a, residual=abs(fa))
    if abs(fb) <= tol:
        return EigenvalueRecord(m=m, target_phase=target, lam=b, residual=abs(fb))
    if (fa > 0.0) == (fb > 0.0):
        return None
    fm = fa
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        fm = sigma(p, q, mid, grid, green_grid) - target
        if abs(fm) <= tol:
            return EigenvalueRecord(m=m, target_phase=target, lam=mid, residual=abs(fm))
        if (fa > 0.0) == (fm > 0.0):
            a, fa = mid, fm
        else:
            b = mid
    raise RuntimeError(
        f"bisection failed to reach residual {tol} (last {abs(fm):.3e}); "
        "sigma may be under-resolved at this quadrature grid")


def diophantine_check(omega, beta: float, M_max: int) -> DiophantineReport:
    """Exhaustive scan of |omega.m - round(omega.m)| |m|^beta over 0 < |m|_inf <= M_max."""
    omega = tuple(float(w) for w in np.atleast_1d(omega))
    if M_max < 1:
        raise ValueError("M_max must be >= 1")
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    best: float | None = None
    worst_m: tuple[int, ...] = ()
    # smallest boxes first so ties report the minimal resonant index
    points = sorted(_box_points(len(omega), M_max),
                    key=lambda m: (max(abs(mi) for mi in m), m))
    for m in points:
        if all(mi == 0 for mi in m):
            continue
        val = math.fsum(w * mi for w, mi in zip(omega, m))
        dist = abs(val - round(val))
        norm = math.sqrt(sum(mi * mi for mi in m))
        quality = dist * norm ** beta
        if best is None or quality < best:
            best, worst_m = quality, m
    assert best is not None
    return DiophantineReport(beta=beta, C_estimate=best, worst_m=worst_m, M_max=M_max)


def _symbol_fourier_table(params: ModelParams, q: Potential, lam: float,
                          grid: TorusGrid, green_grid: TorusGrid | None):
    """All Fourier coefficients of the sampled symbol via FFT (real part)."""
    d2 = params.d2
    n = grid.points_per_axis
    vals = _symbol_values(params, q, lam, grid, green_grid).reshape((n,) * d2)
    coeffs = np.fft.fftn(vals) / vals.size
    return coeffs.real


def truncated_surface_matrix(params: ModelParams, q: Potential, lam: float, L: int,
                             grid: TorusGrid | None = None,
                             green_grid: TorusGrid | None = None):
    """Hermitian surface matrix [N(m-m'; lambda)] - diag(B) on |m|_inf <= L.

    Returns (matrix, smallest absolute eigenvalue).  A small eigenvalue
    flags proximity of lambda to the point spectrum.  Toeplitz entries come
    from the same quadrature as `n_matrix_element`; the diagonal uses the
    normalized surface coupling.
    """
    p = primed_params(params)
    if grid is None:
        grid = default_grid(params.d2)
    dim = (2 * L + 1) ** params.d2
    if dim > DENSE_EIG_LIMIT:
        raise ValueError(f"box dimension {dim} exceeds the dense cap {DENSE_EIG_LIMIT}")
    lam = float(lam)
    eta = float(integrate_fundamental(q, lam).discriminant)
    if abs(eta) <= 2.0:
        raise GapViolationError(f"lambda={lam} is inside a band (|eta| <= 2)")
    coeffs = _symbol_fourier_table(params, q, lam, grid, green_grid)
    points = np.asarray(_box_points(params.d2, L))
    n = grid.points_per_axis
    if 4 * L > n:
        raise ValueError("torus grid too coarse for this box (need points_per_axis >= 4L)")
    diff = points[:, None, :] - points[None, :, :]
    idx = tuple(np.mod(diff[..., ax], n) for ax in range(params.d2))
    matrix = coeffs[idx]
    diag = np.array([surface_diagonal(p, m) for m in map(tuple, points)])
    matrix = matrix - np.diag(diag)
    matrix = 0.5 * (matrix + matrix.T)
    eigs = np.linalg.eigvalsh(matrix)
    return matrix, float(np.min(np.abs(eigs)))


def _lattice_laplacian(side: int, d: int) -> sparse.csr_matrix:
    ones = np.ones(side - 1)
    path = sparse.diags([ones, ones], [-1, 1], format="csr")
    eye = sparse.identity(side, format="csr")
    total = None
    for axis in range(d):
        factors = [path if j == axis else eye for j in range(d)]
        term = factors[0]
        for f in factors[1:]:
            term = sparse.kron(term, f, format="csr")
        total = term if total is None else total + term
    return total.tocsr()


def truncated_full_matrix(params: ModelParams, q: Potential, lam: float, L: int) -> float:
    """Smallest singular value of M(lambda) - A restricted to the box |m|_inf <= L.

    The box lives in Z^d with plain (Dirichlet) truncation; A carries the
    tan coupling on the surface sublattice {m1 = 0} and zero elsewhere.
    The matrix is real symmetric for real lambda, so the smallest singular
    value is the smallest |eigenvalue|; boxes beyond the dense cap use
    shift-invert Lanczos with a fixed deterministic start vector.
    """
    lam = float(lam)
    data = integrate_fundamental(q, lam)
    if abs(data.s1) < DIRICHLET_THRESHOLD:
        raise DirichletPointError(f"lambda={lam} is a Dirichlet point")
    a = 1.0 / float(data.s1)
    eta = float(data.discriminant)
    d, d1, d2 = params.d, params.d1, params.d2
    side = 2 * L + 1
    dim = side ** d
    lap = _lattice_laplacian(side, d)
    axis = np.arange(-L, L + 1)
    coords = np.meshgrid(*([axis] * d), indexing="ij")
    on_surface = np.ones((side,) * d, dtype=bool)
    for j in range(d1):
        on_surface &= coords[j] == 0
    theta = np.zeros((side,) * d, dtype=float)
    for j in range(d2):
        theta += params.omega[j] * coords[d1 + j]
    alpha = np.where(on_surface, params.g * np.tan(math.pi * (theta + params.phi)), 0.0)
    operator = (a * (lap - d * eta * sparse.identity(dim, format="csr"))
                - sparse.diags(alpha.reshape(-1)))
    if dim <= DENSE_EIG_LIMIT:
        eigs = np.linalg.eigvalsh(operator.toarray())
        return float(np.min(np.abs(eigs)))
    v0 = np.ones(dim) / math.sqrt(dim)
    try:
        vals = sparse_linalg.eigsh(operator.tocsc(), k=1, sigma=0.0, which="LM",
                                   v0=v0, return_eigenvectors=False)
    except RuntimeError:
        # exactly singular shift: retry with a tiny offset
        vals = sparse_linalg.eigsh(operator.tocsc(), k=1, sigma=1e-10, which="LM",
                                   v0=v0, return_eigenvectors=False)
    return float(abs(vals[0]))


def gap_subintervals(bands: list[Band], dirichlet: list[float],
                     window: tuple[float, float],
                     edge_margin: float = GAP_EDGE_MARGIN) -> list[tuple[float, float]]:
    """Maximal gap subintervals of the window, split at Dirichlet points.

    Ends that touch band edges or Dirichlet points are pulled inward by
    `edge_margin` (sigma and the Green quadrature degenerate there); ends
    given by the window itself are kept.
    """
    w0, w1 = float(window[0]), float(window[1])
    # (lo, lo_needs_margin, hi, hi_needs_margin); margins apply to band edges
    # and Dirichlet points, never to the window ends themselves
    cuts: list[tuple[float, bool, float, bool]] = []
    position, position_is_edge = w0, False
    for band in sorted(bands, key=lambda b: b.lo):
        if band.lo > position:
            hi_is_edge = band.lo <= w1
            cuts.append((position, position_is_edge, min(band.lo, w1), hi_is_edge))
        position, position_is_edge = max(position, band.hi), True
    if position < w1:
        cuts.append((position, position_is_edge, w1, False))

    pieces = cuts
    for point in sorted(dirichlet):
        next_pieces = []
        for lo, lo_edge, hi, hi_edge in pieces:
            if lo < point < hi:
                next_pieces.append((lo, lo_edge, point, True))
                next_pieces.append((point, True, hi, hi_edge))
            else:
                next_pieces.append((lo, lo_edge, hi, hi_edge))
        pieces = next_pieces

    out: list[tuple[float, float]] = []
    for lo, lo_edge, hi, hi_edge in pieces:
        lo = lo + edge_margin if lo_edge else lo
        hi = hi - edge_margin if hi_edge else hi
        if lo < hi:
            out.append((lo, hi))
    return out


def spectral_report(params: ModelParams, q: Potential, window: tuple[float, float],
                    M_max: int | None = None, numerics: Numerics = Numerics(),
                    threads: int = 1) -> SpectralReport:
    """Full spectral answer on a window: bands, Dirichlet points, eigenvalues.

    Composes the band scan, the gap subdivision, the target enumeration and
    the per-target bisections, then attaches surface-matrix oracle gaps for
    every solved eigenvalue and asserts the interlacing invariant (no point
    eigenvalue inside a band).
    """
    if M_max is None:
        M_max = numerics.M_max
    quad = numerics.quad_points_per_axis
    grid = TorusGrid(params.d2, quad) if quad else default_grid(params.d2)
    green_grid = TorusGrid(params.d1, quad) if quad else default_grid(params.d1)
    bands = hill_bands(q, window, root_tol=numerics.bisect_tol)
    dirichlet = dirichlet_points(q, window, root_tol=numerics.bisect_tol)
    gaps = gap_subintervals(bands, dirichlet, window)
    targets = enumerate_targets(primed_params(params), M_max)

    def solve_target(item: tuple[tuple[int, ...], float]) -> list[EigenvalueRecord]:
        m, target = item
        found = []
        for gap in gaps:
            record = solve_eigenvalue(params, q, gap, target, numerics.bisect_tol,
                                      grid, green_grid, m=m)
            if record is not None:
                found.append(record)
        return found

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_target = list(pool.map(solve_target, targets))
    else:
        per_target = [solve_target(item) for item in targets]

    eigenvalues: list[EigenvalueRecord] = []
    unresolved: list[tuple[tuple[int, ...], float]] = []
    for (m, target), records in zip(targets, per_target):
        if records:
            eigenvalues.extend(records)
        else:
            unresolved.append((m, target))

    for record in eigenvalues:
        for L in numerics.box_sizes:
            _, gap_value = truncated_surface_matrix(params, q, record.lam, L,
                                                    grid, green_grid)
            record.oracle_gaps[L] = gap_value

    for record in eigenvalues:
        eta = abs(float(integrate_fundamental(q, record.lam).discriminant))
        if eta <= 2.0 or any(band.lo <= record.lam <= band.hi for band in bands):
            raise RuntimeError(
                f"interlacing violated: eigenvalue {record.lam} lies in a band")

    eigenvalues.sort(key=lambda r: (r.m, r.lam))
    return SpectralReport(params=params, potential=q, window=(float(window[0]), float(window[1])),
                          M_max=M_max, numerics=numerics, bands=bands, dirichlet=dirichlet,
                          gap_subintervals=gaps, eigenvalues=eigenvalues, unresolved=unresolved)

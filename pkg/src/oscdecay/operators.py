"""Discretized oscillatory integral operators, norms, and decay sweeps.

The operator  T f(x) = int e^{i lambda S(x,y)} w(x,y) phi(x,y) f(y) dy  is
discretized by midpoint quadrature on a uniform grid over the cutoff square.
Grid sizes come from an oversampling guard (at least 8 points per shortest
oscillation period); the x and y axes get coprime point counts (n and n+1)
so that the zero sets of damping factors -- the axes and curves through
lattice diagonals like y = x -- are never sampled exactly.

Norms: the L^2->L^2 norm is sqrt(hx*hy) times the top singular value of the
kernel matrix (power iteration on K*K); L^p norms are certified lower
bounds from a dual power iteration with random restarts.  A sweep estimates
norms over a log-spaced lambda grid and fits the decay slope by ordinary
least squares on (log lambda, log norm).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .damping import DampingFactor
from .errors import EmptyPiece, GridBudgetExceeded
from .poly import BivariatePolynomial, max_gradient

OVERSAMPLING = 8.0

# --- cutoffs ---------------------------------------------------------------


def _smoothstep(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        g = np.where(u > 0.0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
        h = np.where(u < 1.0, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
    return g / (g + h)


def bump_profile(t, half_width: float):
    """Smooth bump: 1 on |t| <= w/2, 0 on |t| >= w."""
    u = (np.abs(np.asarray(t, dtype=float)) / half_width) * 2.0 - 1.0
    return _smoothstep(1.0 - u)


def dyadic_window(t):
    """Phi supported in [1/2, 2] with sum_j Phi(t / 2^j) = 1 for t > 0."""
    t = np.asarray(t, dtype=float)
    eta = lambda u: _smoothstep(2.0 - np.abs(u))  # 1 on |u|<=1, 0 on |u|>=2
    return np.where(t > 0.0, eta(t) - eta(2.0 * t), 0.0)


def dyadic_index_range(half_width: float, spacing: float) -> range:
    """j-range whose windows cover every grid magnitude in (0, half_width)."""
    j_hi = math.ceil(math.log2(half_width)) + 1
    j_lo = math.floor(math.log2(spacing / 2.0)) - 1
    return range(j_lo, j_hi + 1)


@dataclass(frozen=True)
class CutoffSpec:
    """Cutoff phi: a bump (1 on the inner half of the square) or a box,
    optionally multiplied by a dyadic window pair Phi(x/2^j) Phi(y/2^k).

    ``band`` widens the x-side window to the sum of the 2*band+1 windows
    centred at j (a dyadic band |j' - j| <= band); 0 selects one piece.
    """

    half_width: float = 0.5
    profile: str = "bump"  # "bump" | "box"
    dyadic: tuple[int, int] | None = None
    band: int = 0

    def values(self, x, y):
        X = np.asarray(x, dtype=float)
        Y = np.asarray(y, dtype=float)
        if self.profile == "box":
            v = np.ones(np.broadcast_shapes(X.shape, Y.shape))
            v = v * (np.abs(X) <= self.half_width) * (np.abs(Y) <= self.half_width)
        elif self.profile == "bump":
            v = bump_profile(X, self.half_width) * bump_profile(Y, self.half_width)
        else:
            raise ValueError(f"unknown cutoff profile {self.profile!r}")
        if self.dyadic is not None:
            j, k = self.dyadic
            mx = sum(
                dyadic_window(X / 2.0**jj) for jj in range(j - self.band, j + self.band + 1)
            )
            v = v * mx * dyadic_window(Y / 2.0**k)
        return v


# --- discretization ---------------------------------------------------------


@dataclass
class DiscretizedOperator:
    """Matrix-backed kernel applier  f |-> hy * K @ f  on midpoint grids."""

    lam: float
    x: np.ndarray
    y: np.ndarray
    hx: float
    hy: float
    kernel: np.ndarray  # K(x_i, y_j), cutoff and damping weight included
    sampling_ratio: float
    phase: BivariatePolynomial | None = None
    cutoff: CutoffSpec | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.kernel.shape

    def apply(self, f: np.ndarray) -> np.ndarray:
        return self.hy * (self.kernel @ f)

    def apply_adjoint(self, g: np.ndarray) -> np.ndarray:
        return self.hx * (self.kernel.conj().T @ g)

    def masked(self, row_mask: np.ndarray, col_mask: np.ndarray) -> "DiscretizedOperator":
        kernel = self.kernel * row_mask[:, None] * col_mask[None, :]
        return replace(self, kernel=kernel)


def grid_size_for(
    lam: float,
    half_width: float,
    grad_max: float,
    grid_budget: int = 4096,
    min_points: int = 128,
) -> int:
    """x-axis point count from the oversampling guard, or raise.

    The count is rounded up to a multiple of 4 and the y axis gets two more
    points: both counts even (no node at 0) and (2j+1) n_x = (2i+1) n_y has
    no integer solutions, so the diagonals y = +-x are never sampled either.
    """
    if grad_max > 0 and lam != 0:
        n_osc = math.ceil(
            2.0 * half_width * OVERSAMPLING * abs(lam) * grad_max / (2.0 * math.pi)
        )
    else:
        n_osc = 0
    n = max(min_points, n_osc)
    n += (-n) % 4
    if n + 2 > grid_budget:
        lam_cap = (
            (grid_budget - 2)
            * 2.0
            * math.pi
            / (OVERSAMPLING * 2.0 * half_width * grad_max)
        )
        raise GridBudgetExceeded(
            f"lambda={lam:g} needs {n} points/axis, budget {grid_budget} "
            f"(lambda cap ~ {lam_cap:.6g})",
            lambda_cap=lam_cap,
        )
    return n


def _midpoints(half_width: float, n: int) -> tuple[np.ndarray, float]:
    h = 2.0 * half_width / n
    return -half_width + (np.arange(n) + 0.5) * h, h


def discretize(
    S: BivariatePolynomial,
    cutoff: CutoffSpec,
    lam: float,
    damping: DampingFactor | None = None,
    grid_budget: int = 4096,
    min_points: int = 128,
    _grad_max: float | None = None,
) -> DiscretizedOperator:
    """Build the kernel applier for e^{i lam S} [|D|^z] phi on auto-sized grids."""
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    w = cutoff.half_width
    grad_max = max_gradient(S, w, cutoff=cutoff) if _grad_max is None else _grad_max
    n = grid_size_for(lam, w, grad_max, grid_budget, min_points)
    x, hx = _midpoints(w, n)
    y, hy = _midpoints(w, n + 2)
    kernel = np.empty((n, n + 2), dtype=complex)
    chunk = max(1, int(2**22 // (n + 2)))
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        X = x[lo:hi, None]
        Y = y[None, :]
        block = np.exp(1j * lam * S.eval(X, Y)) * cutoff.values(X, Y)
        if damping is not None:
            block = block * damping.weight(X, Y)
        kernel[lo:hi] = block
    if not np.all(np.isfinite(kernel)):
        raise ValueError(
            "non-finite kernel entries: damping weight singular on the grid"
        )
    ratio = (
        2.0 * math.pi / (hx * abs(lam) * grad_max) if grad_max > 0 else math.inf
    )
    return DiscretizedOperator(
        lam=lam,
        x=x,
        y=y,
        hx=hx,
        hy=hy,
        kernel=kernel,
        sampling_ratio=ratio,
        phase=S,
        cutoff=cutoff,
    )


def from_kernel_matrix(
    kernel: np.ndarray, hx: float = 1.0, hy: float = 1.0, lam: float = 1.0
) -> DiscretizedOperator:
    """Wrap an explicit kernel matrix (mostly for tests and diagnostics)."""
    kernel = np.asarray(kernel, dtype=complex)
    nx, ny = kernel.shape
    return DiscretizedOperator(
        lam=lam,
        x=np.arange(nx, dtype=float),
        y=np.arange(ny, dtype=float),
        hx=hx,
        hy=hy,
        kernel=kernel,
        sampling_ratio=math.inf,
    )


# --- dyadic pieces -----------------------------------------------------------


def dyadic_piece(
    op: DiscretizedOperator, j: int, k: int, sign1: int = 1, sign2: int = 1
) -> DiscretizedOperator:
    """Kernel multiplied by Phi(sign1 x / 2^j) Phi(sign2 y / 2^k)."""
    mx = dyadic_window(sign1 * op.x / 2.0**j)
    my = dyadic_window(sign2 * op.y / 2.0**k)
    if not mx.any() or not my.any():
        raise EmptyPiece(f"piece (j={j}, k={k}, signs=({sign1},{sign2})) misses the grid")
    piece = op.masked(mx, my)
    if not np.any(piece.kernel):
        raise EmptyPiece(f"piece (j={j}, k={k}) has identically zero kernel")
    return piece


def dyadic_cover(op: DiscretizedOperator):
    """All (j, k, sign1, sign2) whose windows can touch the grid."""
    w = float(np.max(np.abs(op.x)) + op.hx)
    js = dyadic_index_range(w, op.hx)
    ks = dyadic_index_range(w, op.hy)
    for j in js:
        for k in ks:
            for s1 in (1, -1):
                for s2 in (1, -1):
                    yield j, k, s1, s2


# --- norms -------------------------------------------------------------------


@dataclass(frozen=True)
class NormEstimate:
    value: float
    converged: bool
    iterations: int
    p: float = 2.0
    monotone: bool = True

    @property
    def status(self) -> str:
        return "ok" if self.converged else "unconverged"


def _projected_gap(diff: float, diff_old: float) -> float:
    """Aitken-style bound on the remaining distance to the limit.

    Successive power-iteration increments decay geometrically; the sum of
    remaining increments is diff * rho / (1 - rho) with rho estimated from
    the last two increments.
    """
    if diff_old <= 0.0 or diff <= 0.0:
        return diff
    rho = min(diff / diff_old, 0.9999)
    return diff * rho / (1.0 - rho)


def l2_norm(
    op: DiscretizedOperator,
    tol: float = 1e-6,
    max_iter: int = 500,
    seed: int = 0,
) -> NormEstimate:
    """Largest singular value of the scaled kernel via power iteration.

    Stops when the projected remaining gap (not merely the last increment)
    falls below the relative tolerance, which matters for near-flat spectra.
    """
    K = op.kernel
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(K.shape[1]) + 1j * rng.standard_normal(K.shape[1])
    nv = np.linalg.norm(v)
    if nv == 0 or not np.any(K):
        return NormEstimate(0.0, True, 0)
    v /= nv
    sigma_old = 0.0
    diff_old = math.inf
    sigma = 0.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        u = K @ v
        sigma = float(np.linalg.norm(u))
        if sigma == 0.0:
            return NormEstimate(0.0, True, it)
        w = K.conj().T @ u
        v = w / np.linalg.norm(w)
        diff = abs(sigma - sigma_old)
        at_roundoff = diff <= 64.0 * np.finfo(float).eps * sigma
        if it > 1 and (at_roundoff or _projected_gap(diff, diff_old) <= tol * sigma):
            converged = True
            break
        sigma_old = sigma
        diff_old = diff
    return NormEstimate(math.sqrt(op.hx * op.hy) * sigma, converged, it)


def _signed_power(v: np.ndarray, q: float) -> np.ndarray:
    mag = np.abs(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(mag > 0, mag ** q * (v / np.where(mag > 0, mag, 1.0)), 0.0)
    return out


def _lp_norm(v: np.ndarray, p: float) -> float:
    return float(np.sum(np.abs(v) ** p) ** (1.0 / p))


def _lp_norm_cols(V: np.ndarray, p: float) -> np.ndarray:
    return np.sum(np.abs(V) ** p, axis=0) ** (1.0 / p)


def lp_norm_estimate(
    op: DiscretizedOperator,
    p: float,
    restarts: int = 8,
    tol: float = 1e-6,
    max_iter: int = 150,
    seed: int = 0,
) -> NormEstimate:
    """Certified lower bound on the L^p -> L^p norm via dual power iteration.

    Every iterate gamma = ||K x||_p with ||x||_p = 1 is a valid lower bound
    and the per-restart sequence is nondecreasing; the best value over the
    random restarts is returned.  Restarts run as one blocked iteration
    (matrix-matrix products); a restart counts as converged after two
    consecutive relative increments below the tolerance.  Exact for p = 2
    up to the iteration tolerance.
    """
    if not 1.0 < p < math.inf:
        raise ValueError(f"p must lie in (1, inf), got {p}")
    K = op.kernel
    if not np.any(K):
        return NormEstimate(0.0, True, 0, p=p)
    q = p / (p - 1.0)
    scale = op.hx ** (1.0 / p) * op.hy ** (1.0 / q)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((K.shape[1], restarts)) + 1j * rng.standard_normal(
        (K.shape[1], restarts)
    )
    X /= _lp_norm_cols(X, p)[None, :]
    gamma_old = np.zeros(restarts)
    small_steps = np.zeros(restarts, dtype=int)
    done = np.zeros(restarts, dtype=bool)
    best = 0.0
    monotone = True
    it = 0
    for it in range(1, max_iter + 1):
        Y = K @ X
        gamma = _lp_norm_cols(Y, p)
        if np.any(gamma < gamma_old * (1.0 - 1e-12)):
            monotone = False
        best = max(best, float(gamma.max()))
        diff = gamma - gamma_old
        small = (np.abs(diff) <= tol * np.maximum(gamma, 1e-300)) | (gamma == 0.0)
        small_steps = np.where(small, small_steps + 1, 0)
        done |= (small_steps >= 2) & (it > 1)
        if done.all():
            break
        gamma_old = gamma
        Z = K.conj().T @ _signed_power(Y, p - 1.0)
        X = _signed_power(Z, q - 1.0)
        norms = _lp_norm_cols(X, p)
        X /= np.where(norms > 0, norms, 1.0)[None, :]
    return NormEstimate(
        scale * best, bool(done.all()), it, p=p, monotone=monotone
    )


def composed_norm(
    op1: DiscretizedOperator,
    op2: DiscretizedOperator,
    tol: float = 1e-6,
    max_iter: int = 500,
    seed: int = 0,
) -> NormEstimate:
    """||T1 T2*|| on L^2, via power iteration on the composed applier."""
    rng = np.random.default_rng(seed)
    n = op1.shape[0]
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)

    def fwd(g):
        return op1.apply(op2.apply_adjoint(g))

    def adj(g):
        return op2.apply(op1.apply_adjoint(g))

    sigma_old = 0.0
    diff_old = math.inf
    sigma = 0.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        u = fwd(v)
        sigma = float(np.linalg.norm(u))
        if sigma == 0.0:
            return NormEstimate(0.0, True, it)
        w = adj(u)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return NormEstimate(0.0, True, it)
        v = w / nw
        diff = abs(sigma - sigma_old)
        if it > 1 and _projected_gap(diff, diff_old) <= tol * sigma:
            converged = True
            break
        sigma_old = sigma
        diff_old = diff
    return NormEstimate(sigma, converged, it)


# --- sweeps ------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSample:
    lam: float
    norm: float | None
    p: float
    status: str


@dataclass(frozen=True)
class SweepResult:
    samples: tuple[SweepSample, ...]
    fitted_slope: float | None
    slope_stderr: float | None
    fit_window: tuple[float, float] | None

    @property
    def n_valid(self) -> int:
        return sum(1 for s in self.samples if s.norm is not None)

    def to_json_dict(self) -> dict:
        return {
            "slope": self.fitted_slope,
            "stderr": self.slope_stderr,
            "window": list(self.fit_window) if self.fit_window else None,
            "n_samples": self.n_valid,
        }


def loglog_slope(lams: Sequence[float], norms: Sequence[float]) -> tuple[float, float]:
    """OLS slope and its standard error for log(norm) vs log(lambda)."""
    lx = np.log(np.asarray(lams, dtype=float))
    ly = np.log(np.asarray(norms, dtype=float))
    n = len(lx)
    xbar = lx.mean()
    sxx = float(np.sum((lx - xbar) ** 2))
    slope = float(np.sum((lx - xbar) * (ly - ly.mean())) / sxx)
    intercept = float(ly.mean() - slope * xbar)
    resid = ly - (slope * lx + intercept)
    stderr = math.sqrt(float(np.sum(resid**2)) / max(n - 2, 1) / sxx)
    return slope, stderr


def log_spaced(lam_min: float, lam_max: float, count: int) -> list[float]:
    grid = list(np.exp(np.linspace(math.log(lam_min), math.log(lam_max), count)))
    grid[0], grid[-1] = lam_min, lam_max
    return grid


def sweep(
    S: BivariatePolynomial,
    cutoff: CutoffSpec,
    damping: DampingFactor | Callable[[float], DampingFactor] | None,
    p: float,
    lam_grid: Sequence[float],
    grid_budget: int = 4096,
    min_points: int = 128,
    restarts: int = 8,
    seed: int = 0,
    min_samples: int = 6,
) -> SweepResult:
    """Norm estimates over a lambda grid plus the fitted decay slope.

    Samples whose grid budget is exceeded are kept with a status and
    excluded from the fit; the fit requires at least ``min_samples`` points.
    """
    grad_max = max_gradient(S, cutoff.half_width, cutoff=cutoff)
    samples = []
    for lam in lam_grid:
        try:
            op = discretize(
                S,
                cutoff,
                lam,
                damping=damping(lam) if callable(damping) else damping,
                grid_budget=grid_budget,
                min_points=min_points,
                _grad_max=grad_max,
            )
        except GridBudgetExceeded:
            samples.append(SweepSample(lam, None, p, "budget_exceeded"))
            continue
        if p == 2.0:
            est = l2_norm(op, seed=seed)
            status = est.status
        else:
            est = lp_norm_estimate(op, p, restarts=restarts, seed=seed)
            status = "ok_lower_bound" if est.converged else "unconverged_lower_bound"
        samples.append(SweepSample(lam, est.value, p, status))
    valid = [(s.lam, s.norm) for s in samples if s.norm is not None and s.norm > 0]
    if len(valid) >= min_samples:
        slope, stderr = loglog_slope([v[0] for v in valid], [v[1] for v in valid])
        window = (min(v[0] for v in valid), max(v[0] for v in valid))
    else:
        slope, stderr, window = None, None, None
    return SweepResult(tuple(samples), slope, stderr, window)

"""Numerical checks of the structural estimates behind the decay predictions.

Four families:

* van der Corput: on a region where the mixed Hessian has magnitude in
  [mu, A mu], the L^2 norm should be O((|lambda| mu)^(-1/2)); the check
  sweeps lambda and reports the empirical constant.
* almost orthogonality: for two dyadic pieces T1, T2 with comparable
  Hessian size mu on an expanded neighbourhood, ||T1 T2*|| should be
  O((|lambda| mu)^(-1)); pieces with y-supports two dyadic steps apart
  compose to zero exactly.
* critical-exponent slice integrals: with the damping exponent at
  Re z = -1/A_r, sup over y-slices of int |D(x,y)|^(-1/A_r) phi dx over
  each scale-comparison region must be finite and stable under refinement;
  the innermost region carries a pointwise |x|^(-1)-type kernel bound
  instead (constant exactly 1 for the pure x^m factor).
* atom uniformity: for the single-root damping form, L^infinity-normalized
  atoms whose oscillatory mean along the root's probe line vanishes should
  have uniformly bounded L^1 images under the floor-regularized operator,
  with no growth in lambda.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .damping import DampingFactor, build_modified_damping
from .errors import (
    DegenerateAtomInterval,
    DivergentSliceIntegral,
    HessianOutOfWindow,
)
from .operators import (
    CutoffSpec,
    DiscretizedOperator,
    composed_norm,
    discretize,
    dyadic_piece,
    dyadic_window,
    l2_norm,
)
from .poly import BivariatePolynomial, mixed_hessian
from .puiseux import PuiseuxSeries, RootClusterTree, invert_linear_root


# --- van der Corput ----------------------------------------------------------


@dataclass(frozen=True)
class VanDerCorputReport:
    mu_low: float
    mu_high: float
    samples: tuple[tuple[float, float, float], ...]  # (lambda, norm, product)
    constant: float

    def to_json_dict(self) -> dict:
        return {
            "mu_low": self.mu_low,
            "mu_high": self.mu_high,
            "constant": self.constant,
            "samples": [list(s) for s in self.samples],
        }


def _scan_hessian(H: BivariatePolynomial, cutoff: CutoffSpec, n: int = 201):
    w = cutoff.half_width
    t = np.linspace(-w, w, n)
    X, Y = np.meshgrid(t, t, indexing="ij")
    mask = cutoff.values(X, Y) > 1e-12
    vals = H.eval(X, Y)
    return vals, mask


def van_der_corput_check(
    S: BivariatePolynomial,
    cutoff: CutoffSpec,
    mu_window: tuple[float, float],
    lam_grid: Sequence[float],
    grid_budget: int = 4096,
    seed: int = 0,
) -> VanDerCorputReport:
    """Report sup over lambda of norm * (|lambda| mu_low)^(1/2).

    Requires |S''_xy| within [mu_low, mu_high] wherever the cutoff lives.
    """
    mu_low, mu_high = mu_window
    H = mixed_hessian(S)
    vals, mask = _scan_hessian(H, cutoff)
    inside = np.abs(vals[mask])
    if inside.size == 0 or inside.min() < mu_low * (1 - 1e-9) or inside.max() > mu_high * (1 + 1e-9):
        raise HessianOutOfWindow(
            f"|S''_xy| in [{inside.min():.3g}, {inside.max():.3g}] on the support, "
            f"outside the window [{mu_low:g}, {mu_high:g}]"
        )
    samples = []
    for lam in lam_grid:
        op = discretize(S, cutoff, lam, grid_budget=grid_budget)
        nrm = l2_norm(op, seed=seed).value
        samples.append((float(lam), nrm, nrm * math.sqrt(abs(lam) * mu_low)))
    constant = max(s[2] for s in samples)
    return VanDerCorputReport(mu_low, mu_high, tuple(samples), constant)


# --- almost orthogonality -----------------------------------------------------


@dataclass(frozen=True)
class AlmostOrthogonalityReport:
    mu: float
    comparability: float  # A such that |H| <= A mu on the scanned region
    composed_norm: float
    ratio: float  # composed_norm * |lambda| * mu

    def to_json_dict(self) -> dict:
        return {
            "mu": self.mu,
            "comparability": self.comparability,
            "composed_norm": self.composed_norm,
            "ratio": self.ratio,
        }


def almost_orthogonality_check(
    S: BivariatePolynomial,
    piece1: tuple[int, int],
    piece2: tuple[int, int],
    lam: float,
    cutoff: CutoffSpec | None = None,
    grid_budget: int = 4096,
    expansion: float = math.sqrt(2.0),
    seed: int = 0,
) -> AlmostOrthogonalityReport:
    """||T1 T2*|| against (|lambda| mu)^(-1) for two positive-quadrant pieces.

    mu is the minimum of |S''_xy| over the expanded bounding box of the two
    dyadic supports; a sign change or vanishing Hessian there raises
    HessianOutOfWindow.
    """
    cutoff = cutoff or CutoffSpec()
    j1, k1 = piece1
    j2, k2 = piece2
    H = mixed_hessian(S)
    # expanded neighbourhood of [2^(j-1), 2^(j+1)] x [2^(k-1), 2^(k+1)]
    x_lo = min(2.0 ** (j1 - 1), 2.0 ** (j2 - 1)) / expansion
    x_hi = max(2.0 ** (j1 + 1), 2.0 ** (j2 + 1)) * expansion
    y_lo = min(2.0 ** (k1 - 1), 2.0 ** (k2 - 1)) / expansion
    y_hi = max(2.0 ** (k1 + 1), 2.0 ** (k2 + 1)) * expansion
    xs = np.linspace(x_lo, x_hi, 201)[:, None]
    ys = np.linspace(y_lo, y_hi, 201)[None, :]
    vals = H.eval(xs, ys)
    lo = float(np.min(np.abs(vals)))
    hi = float(np.max(np.abs(vals)))
    if lo <= 0.0 or np.min(vals) * np.max(vals) < 0:
        raise HessianOutOfWindow(
            "Hessian vanishes or changes sign on the expanded piece neighbourhood"
        )
    mu = lo
    op = discretize(S, cutoff, lam, grid_budget=grid_budget)
    t1 = dyadic_piece(op, j1, k1)
    t2 = dyadic_piece(op, j2, k2)
    if abs(k1 - k2) >= 2:
        comp = composed_norm(t1, t2, seed=seed).value
        return AlmostOrthogonalityReport(mu, hi / lo, comp, comp * abs(lam) * mu)
    comp = composed_norm(t1, t2, seed=seed).value
    return AlmostOrthogonalityReport(mu, hi / lo, comp, comp * abs(lam) * mu)


# --- critical-exponent slice integrals ----------------------------------------


@dataclass(frozen=True)
class RegionCheck:
    name: str
    sup_coarse: float
    sup_fine: float

    @property
    def growth(self) -> float:
        if self.sup_coarse == 0.0:
            return 1.0
        return self.sup_fine / self.sup_coarse

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "sup_coarse": self.sup_coarse,
            "sup_fine": self.sup_fine,
            "growth": self.growth,
        }


@dataclass(frozen=True)
class CriticalExponentReport:
    exponent: float
    pointwise_constant: float | None
    regions: tuple[RegionCheck, ...]
    stable: bool

    def to_json_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "pointwise_constant": self.pointwise_constant,
            "regions": [r.to_json_dict() for r in self.regions],
            "stable": self.stable,
        }


def _slice_sup(
    weight_fn,
    cutoff: CutoffSpec,
    region_fn,
    y_slices: np.ndarray,
    n_x: int,
) -> float:
    """sup over y of the masked x-integral of the weight times the cutoff."""
    w = cutoff.half_width
    sup = 0.0
    x, step = np.linspace(-w, w, n_x, endpoint=False, retstep=True)
    x = x + step / 2.0
    for yv in y_slices:
        mask = region_fn(np.abs(x), abs(yv))
        if not mask.any():
            continue
        xm = x[mask]
        vals = weight_fn(xm, np.full_like(xm, yv)) * cutoff.values(xm, np.full_like(xm, yv))
        total = float(np.sum(vals) * step)
        if not math.isfinite(total):
            raise DivergentSliceIntegral(f"slice at y={yv:g} is non-finite")
        sup = max(sup, total)
    return sup


def critical_exponent_l1_check(
    damping: DampingFactor,
    cutoff: CutoffSpec,
    n0: int = 3,
    n_x: int = 4000,
    refine: int = 4,
    y_min: float = 2.0**-12,
    n_slices: int = 60,
    growth_limit: float = 2.0,
) -> CriticalExponentReport:
    """Slice-integral boundedness at the critical negative exponent.

    The damping must be the plain variant with Re z = -1/A_r.  Regions are
    the scale comparisons |y| vs |x|^{a_l} with threshold 2^{n0}; on the
    innermost region (|y| well below the largest selected scale) the kernel
    bound is pointwise, and for a pure monomial factor x^m its constant is
    exactly 1.
    """
    if damping.variant != "plain":
        raise ValueError("critical exponent check needs the plain damping variant")
    exponents = list(damping.selected_levels)
    z = damping.z
    w = cutoff.half_width
    weight_fn = lambda X, Y: np.abs(
        np.abs(damping.factor_values(X, Y)) ** z.real
    )

    # pointwise bound on the innermost region: sup |x| * |D|^{Re z}
    if not damping.roots:
        # D = x^m and Re z = -1/m: |x| |x|^{m Re z} = 1 identically
        pointwise = 1.0
        regions: tuple[RegionCheck, ...] = ()
        return CriticalExponentReport(z.real, pointwise, regions, True)

    thresh = 2.0**n0
    a_list = [float(a) for a in exponents]
    a_r = a_list[-1]

    def region_outer(ax, ay):  # |y| >> |x|^{a_1}
        return ay >= thresh * ax ** a_list[0]

    def region_between(t0):
        def fn(ax, ay):
            return (ay >= thresh * ax ** a_list[t0 + 1]) & (
                ay <= ax ** a_list[t0] / thresh
            )

        return fn

    def region_comparable(t0):
        def fn(ax, ay):
            return (ay >= ax ** a_list[t0] / thresh) & (ay <= thresh * ax ** a_list[t0])

        return fn

    region_fns = [("above_first_scale", region_outer)]
    for t0 in range(len(a_list) - 1):
        region_fns.append((f"between_scales_{t0 + 1}_{t0 + 2}", region_between(t0)))
    for t0 in range(len(a_list)):
        region_fns.append((f"comparable_scale_{t0 + 1}", region_comparable(t0)))

    y_slices = np.exp(np.linspace(math.log(y_min), math.log(w), n_slices))
    y_slices = np.concatenate([y_slices, -y_slices])
    checks = []
    stable = True
    for name, fn in region_fns:
        coarse = _slice_sup(weight_fn, cutoff, fn, y_slices, n_x)
        fine = _slice_sup(weight_fn, cutoff, fn, y_slices, refine * n_x)
        chk = RegionCheck(name, coarse, fine)
        checks.append(chk)
        if chk.growth > growth_limit or not math.isfinite(fine):
            stable = False

    # innermost pointwise bound: sup over the region |y| << |x|^{a_r}
    xs = np.exp(np.linspace(math.log(2.0**-12), math.log(w), 400))
    sup_pt = 0.0
    for xv in xs:
        ys = np.exp(
            np.linspace(math.log(2.0**-14), math.log(max(xv**a_r / thresh, 2.0**-13)), 50)
        )
        vals = np.abs(xv) * weight_fn(np.full_like(ys, xv), ys)
        sup_pt = max(sup_pt, float(np.max(vals)))
    return CriticalExponentReport(z.real, sup_pt, tuple(checks), stable)


# --- atoms ---------------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    """Discrete atom on the operator's y-grid: values plus its interval."""

    values: np.ndarray
    center: float
    half_length: float
    cancellation_residual: float


def sample_interval(
    rng: np.random.Generator, lo: float, hi: float, min_half: float
) -> tuple[float, float]:
    """Random subinterval (center, half-length) of [lo, hi]."""
    span = hi - lo
    d = max(rng.uniform(0.05, 0.25) * span, min_half)
    c = rng.uniform(lo + d, hi - d)
    return c, d


def build_atom(
    op: DiscretizedOperator,
    root: PuiseuxSeries,
    center: float,
    half_length: float,
    bounds: tuple[float, float] | None = None,
    max_resample: int = 50,
    rng: np.random.Generator | None = None,
    window: float | None = None,
) -> tuple[Atom, int]:
    """Two-half atom with vanishing oscillatory mean along the probe line.

    a = alpha (chi_left - gamma chi_right) with gamma chosen so that
    sum_j e^{i lambda S(x*, y_j)} a_j = 0 exactly on the grid, where
    x* = root^{-1}(center), and alpha normalizes ||a||_inf <= 1/(2 half_length).
    Degenerate intervals (too few grid points, or a vanishing denominator)
    are resampled inside ``bounds``; the resample count is returned.
    """
    rng = rng or np.random.default_rng(0)
    w = window if window is not None else float(np.max(np.abs(op.x))) * 1.001
    if bounds is None:
        bounds = (center - 2.0 * half_length, center + 2.0 * half_length)
    resamples = 0
    c, d = center, half_length
    for _ in range(max_resample + 1):
        x_star = invert_linear_root(root, c, window=w)
        sel = (op.y >= c - d) & (op.y <= c + d)
        left = sel & (op.y < c)
        right = sel & (op.y >= c)
        if left.sum() >= 4 and right.sum() >= 4:
            phase_vals = np.exp(
                1j * op.lam * op.phase.eval(np.full(op.y.shape, x_star), op.y)
            )
            denom = np.sum(phase_vals[right])
            if abs(denom) >= 1e-8 * right.sum():
                gamma = np.sum(phase_vals[left]) / denom
                alpha = 1.0 / (2.0 * d * max(1.0, abs(gamma)))
                values = np.zeros(op.y.shape, dtype=complex)
                values[left] = alpha
                values[right] = -alpha * gamma
                resid = abs(np.sum(phase_vals * values)) * op.hy
                return Atom(values, c, d, resid), resamples
        c, d = sample_interval(rng, bounds[0], bounds[1], min_half=6.0 * op.hy)
        resamples += 1
    raise DegenerateAtomInterval(
        f"no usable atom interval near {center:g} after {max_resample} resamples"
    )


@dataclass(frozen=True)
class AtomCheckReport:
    lam_maxima: tuple[tuple[float, float], ...]  # (lambda, max L1 image)
    growth_ratio: float
    trials: int
    resamples: int
    max_cancellation_residual: float

    def to_json_dict(self) -> dict:
        return {
            "lam_maxima": [list(t) for t in self.lam_maxima],
            "growth_ratio": self.growth_ratio,
            "trials": self.trials,
            "resamples": self.resamples,
            "max_cancellation_residual": self.max_cancellation_residual,
        }


def h1e_atom_check(
    S: BivariatePolynomial,
    root: PuiseuxSeries,
    tree: RootClusterTree,
    lam_grid: Sequence[float],
    trials: int = 50,
    k: int = -2,
    n0: int = 3,
    re_z: float | None = None,
    cutoff: CutoffSpec | None = None,
    grid_budget: int = 4096,
    seed: int = 0,
) -> AtomCheckReport:
    """Uniformity of ||W_z a||_L1 over random atoms and a lambda grid.

    W_z uses the floor-regularized damping with Re z = -1/A_1 on the
    middle-regime band of pieces |j - k| <= n0 (y restricted to the k-th
    window); atoms live in intervals inside [2^(k-1), 2^(k+1)].  The same
    seeded interval sample is reused for every lambda so the per-lambda
    maxima are comparable.
    """
    cutoff = cutoff or CutoffSpec()
    counts = tree.counts_by_exponent()
    n1 = counts[0][1]
    if re_z is None:
        re_z = -1.0 / n1  # A_1 = N[./1] for the special form (m = 0, a_1 = 1)
    rng = np.random.default_rng(seed)
    lo, hi = 2.0 ** (k - 1), 2.0 ** (k + 1)
    intervals = [sample_interval(rng, lo, hi, min_half=0.02 * (hi - lo)) for _ in range(trials)]
    maxima = []
    total_resamples = 0
    max_resid = 0.0
    piece_cutoff = CutoffSpec(cutoff.half_width, cutoff.profile, dyadic=(k, k), band=n0)
    for lam in lam_grid:
        damping = build_modified_damping(tree, lam=lam, k=k, z=complex(re_z))
        op = discretize(
            S, piece_cutoff, lam, damping=damping, grid_budget=grid_budget, min_points=512
        )
        worst = 0.0
        for c, d in intervals:
            atom, res = build_atom(op, root, c, d, bounds=(lo, hi), rng=rng)
            total_resamples += res
            max_resid = max(max_resid, atom.cancellation_residual)
            image = op.apply(atom.values)
            worst = max(worst, float(np.sum(np.abs(image)) * op.hx))
        maxima.append((float(lam), worst))
    growth = maxima[-1][1] / maxima[0][1] if maxima[0][1] > 0 else math.inf
    return AtomCheckReport(
        tuple(maxima), growth, trials, total_resamples, max_resid
    )

"""Damping factors built from root clusters.

The plain factor selects the first r exponent levels of a cluster tree:

    D(x, y) = x^m * prod_{l<=r} prod_{nu in level l} (y - r_nu(x))^mult.

Conjugation-closed clusters make D real on real grids; conjugate series
pairs are multiplied together first to suppress imaginary round-off where
the pairing is exact (x > 0).  The modified variant adds a positive floor
to the modulus product of the first level,

    D~(x, y) = (|lambda| 2^{k B_1})^(-N1/(N1+2)) + prod_{level 1} |y - r_nu(x)|,

which is strictly positive, so negative exponents stay bounded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .puiseux import PuiseuxSeries, RootClusterTree


@dataclass(frozen=True)
class ModifiedParams:
    lam: float
    k: int
    B1: Fraction
    N1: int

    @property
    def floor(self) -> float:
        n1 = self.N1
        return (abs(self.lam) * 2.0 ** (self.k * float(self.B1))) ** (-n1 / (n1 + 2))


@dataclass(frozen=True)
class DampingFactor:
    """Evaluable |D(x, y)|^z weight."""

    m: int
    roots: tuple[PuiseuxSeries, ...]
    z: complex
    variant: str = "plain"  # "plain" | "modified"
    modified_params: ModifiedParams | None = None
    selected_levels: tuple[Fraction, ...] = ()
    quadrant: str = "all"  # "all" | "first"

    def factor_values(self, x, y):
        """D(x, y) on broadcastable arrays; complex for the plain variant."""
        X = np.asarray(x, dtype=float)
        Y = np.asarray(y, dtype=float)
        if self.variant == "modified":
            prod = np.ones(np.broadcast_shapes(X.shape, Y.shape))
            for r in self.roots:
                prod = prod * np.abs(Y - r.evaluate(X)) ** r.multiplicity
            return self.modified_params.floor + prod
        prod = np.ones(np.broadcast_shapes(X.shape, Y.shape), dtype=complex)
        paired = _conjugate_pairs(self.roots)
        for r, partner in paired:
            rv = r.evaluate(X)
            if partner is None:
                prod = prod * (Y - rv) ** r.multiplicity
            else:
                # (y - r)(y - conj r) real wherever the values are conjugate
                pv = partner.evaluate(X)
                pair = (Y - rv) * (Y - pv)
                exact = np.abs(pv - np.conj(rv)) <= 1e-9 * (1.0 + np.abs(rv))
                pair = np.where(exact, pair.real.astype(complex), pair)
                prod = prod * pair ** r.multiplicity
        if self.m:
            prod = prod * X.astype(complex) ** self.m
        return prod

    def weight(self, x, y):
        """|D|^z with the convention 0^z = 0 for Re z > 0; +inf otherwise.

        Real output for real z, complex for complex z.
        """
        mag = np.abs(self.factor_values(x, y))
        return eval_damped_weight_from_magnitude(mag, self.z)

    def with_z(self, z: complex) -> "DampingFactor":
        return DampingFactor(
            m=self.m,
            roots=self.roots,
            z=z,
            variant=self.variant,
            modified_params=self.modified_params,
            selected_levels=self.selected_levels,
            quadrant=self.quadrant,
        )


def _conjugate_pairs(roots):
    """Pair each series with its coefficient-conjugate partner, if present."""
    remaining = list(roots)
    out = []
    while remaining:
        r = remaining.pop(0)
        if r.is_real(1e-9):
            out.append((r, None))
            continue
        conj = r.conjugate()
        partner = None
        for idx, cand in enumerate(remaining):
            if cand.multiplicity != r.multiplicity or len(cand.terms) != len(r.terms):
                continue
            if all(
                ec == ecc and abs(cc - ccc) <= 1e-9 * (1.0 + abs(cc))
                for (ec, cc), (ecc, ccc) in zip(conj.terms, cand.terms)
            ):
                partner = remaining.pop(idx)
                break
        out.append((r, partner))
    return out


def eval_damped_weight_from_magnitude(mag, z: complex):
    z = complex(z)
    mag = np.asarray(mag, dtype=float)
    zero = mag == 0.0
    safe = np.where(zero, 1.0, mag)
    if z.imag == 0.0:
        w = np.exp(z.real * np.log(safe))
    else:
        w = np.exp(z * np.log(safe))
    if z.real > 0:
        w = np.where(zero, 0.0, w)
    else:
        # 0^z undefined for Re z <= 0: flag with +inf
        w = np.where(zero, np.inf, w)
    if np.ndim(w) == 0:
        return w.item()
    return w


def eval_damped_weight(damping: DampingFactor, x, y):
    """|D(x, y)|^z; scalar in, scalar out."""
    return damping.weight(x, y)


def build_damping(tree: RootClusterTree, r: int, z: complex) -> DampingFactor:
    """Plain damping factor from the first r exponent levels of the tree.

    r = 0 selects no roots: D(x, y) = x^m.
    """
    if r < 0 or r > len(tree.groups):
        raise ValueError(f"vertex index r={r} outside 0..{len(tree.groups)}")
    selected = tree.roots_up_to_level(r)
    return DampingFactor(
        m=tree.m,
        roots=tuple(selected),
        z=complex(z),
        variant="plain",
        selected_levels=tuple(g.exponent for g in tree.groups[:r]),
    )


def detect_special_form(tree: RootClusterTree, r: int):
    """Detect D = (y - r_nu(x))^d with r_nu = C1 x + o(x), C1 real nonzero.

    Returns (series, d) when the first r levels consist of exactly one
    distinct series with that shape and m = 0; otherwise None.
    """
    if tree.m != 0 or r < 1:
        return None
    selected = tree.roots_up_to_level(r)
    if len(selected) != 1:
        return None
    root = selected[0]
    if root.leading_exponent != 1:
        return None
    c1 = root.leading_coefficient
    if c1.real == 0 or abs(c1.imag) > 1e-9 * abs(c1):
        return None
    return root, root.multiplicity


def build_modified_damping(
    tree: RootClusterTree, lam: float, k: int, z: complex
) -> DampingFactor:
    """Floor-regularized factor for the special single-root form.

    The floor (|lambda| 2^{k B_1})^(-N1/(N1+2)) uses the first-level count
    N1 and the vertex coordinate B_1 = s + sum_{l>1} N[./l].
    """
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    if detect_special_form(tree, 1) is None:
        raise ValueError("modified damping requires the single-root special form")
    counts = tree.counts_by_exponent()
    n1 = counts[0][1]
    b1 = Fraction(tree.s) + sum(cnt for _, cnt in counts[1:])
    level1 = tree.roots_up_to_level(1)
    return DampingFactor(
        m=0,
        roots=tuple(level1),
        z=complex(z),
        variant="modified",
        modified_params=ModifiedParams(lam=float(lam), k=int(k), B1=b1, N1=int(n1)),
        selected_levels=(counts[0][0],),
    )

"""Newton-Puiseux resolution of bivariate polynomials and root clustering.

Given a nonzero polynomial H, factor it as

    H(x, y) = U(x, y) * x^m * y^s * prod_nu (y - r_nu(x)),

where U(0,0) != 0 and each nontrivial root r_nu is a fractional-power series
with strictly positive valuation.  The algorithm is the classical one: strip
the trivial x^m, y^s factors, build the Newton polygon of the remainder over
coefficient polynomials in x, solve each lower edge's characteristic
polynomial numerically for leading coefficients, substitute
y = x^a (c + y'), and recurse until the requested truncation order.

Exponents are taken exactly (rationals from polygon slopes); only the
coefficients are numeric.  This keeps the vertex identities

    A_r = m + sum_{l<=r} N[./l] * a_l,     B_r = s + sum_{l>r} N[./l]

exact, so they can be crosschecked against the convex hull of N(H) with
rational equality.  Roots are then organized into the cluster hierarchy:
grouped by leading exponent, then by leading-coefficient class, recursively.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    AmbiguousCluster,
    CrosscheckMismatch,
    NoConvergence,
    NumericalRootFailure,
    TruncationTooCoarse,
    ZeroPolynomial,
)
from .newton import polyhedron
from .poly import BivariatePolynomial

# relative tolerances; see the clustering notes below
COEFF_CLUSTER_TOL = 1e-9
_CHAR_ROOT_TOL = 1e-8
_DIRT_TOL = 1e-12


@dataclass(frozen=True)
class PuiseuxSeries:
    """Truncated fractional-power series root y = sum_t c_t x^{E_t}.

    Exponents are exact positive rationals, strictly increasing; the leading
    coefficient is nonzero.  ``polydromy`` is the common denominator of the
    exponents and ``truncation_order`` the valuation beyond which terms are
    unknown.
    """

    terms: tuple[tuple[Fraction, complex], ...]
    truncation_order: Fraction
    multiplicity: int = 1

    @property
    def polydromy(self) -> int:
        d = 1
        for e, _ in self.terms:
            d = d * e.denominator // math.gcd(d, e.denominator)
        return d

    @property
    def leading_exponent(self) -> Fraction:
        return self.terms[0][0]

    @property
    def leading_coefficient(self) -> complex:
        return self.terms[0][1]

    def is_real(self, tol: float = 1e-10) -> bool:
        scale = max(abs(c) for _, c in self.terms)
        return all(abs(c.imag) <= tol * scale for _, c in self.terms)

    def conjugate(self) -> "PuiseuxSeries":
        return PuiseuxSeries(
            tuple((e, c.conjugate()) for e, c in self.terms),
            self.truncation_order,
            self.multiplicity,
        )

    def evaluate(self, x):
        """Series value at x (scalar or array); principal branch for x < 0."""
        xc = np.asarray(x, dtype=complex)
        total = np.zeros_like(xc)
        for e, c in self.terms:
            total = total + c * np.power(xc, float(e))
        if np.isscalar(x) or np.asarray(x).ndim == 0:
            return complex(total)
        return total

    def evaluate_real(self, x: float) -> float:
        """Value for real-coefficient series at x > 0."""
        return sum(c.real * x ** float(e) for e, c in self.terms)

    def derivative_real(self, x: float) -> float:
        return sum(c.real * float(e) * x ** (float(e) - 1.0) for e, c in self.terms)

    def to_json_dict(self) -> dict:
        return {
            "terms": [
                {"exponent": str(e), "coefficient": [c.real, c.imag]}
                for e, c in self.terms
            ],
            "polydromy": self.polydromy,
            "multiplicity": self.multiplicity,
            "truncation_order": str(self.truncation_order),
        }


class PuiseuxFactorization(NamedTuple):
    m: int
    s: int
    roots: list[PuiseuxSeries]


# ---------------------------------------------------------------------------
# core recursion on sparse {(x_exponent, y_degree): coefficient} maps
# ---------------------------------------------------------------------------


def _valuation_points(G: dict) -> list[tuple[int, Fraction]]:
    vals: dict[int, Fraction] = {}
    for (e, j), _ in G.items():
        if j not in vals or e < vals[j]:
            vals[j] = e
    return sorted(vals.items())


def _lower_hull(pts: list[tuple[int, Fraction]]) -> list[tuple[int, Fraction]]:
    hull: list[tuple[int, Fraction]] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _cluster_complex(values: Sequence[complex], tol_abs: float) -> list[tuple[complex, list[int]]]:
    """Single-linkage clustering; returns (mean value, member indices)."""
    order = sorted(range(len(values)), key=lambda i: (values[i].real, values[i].imag))
    groups: list[list[int]] = []
    for idx in order:
        for g in groups:
            if any(abs(values[idx] - values[j]) <= tol_abs for j in g):
                g.append(idx)
                break
        else:
            groups.append([idx])
    out = []
    for g in groups:
        rep = sum(values[j] for j in g) / len(g)
        out.append((rep, g))
    out.sort(key=lambda t: (t[0].real, t[0].imag))
    return out


def _polish(coeffs: np.ndarray, rep: complex, mu: int) -> complex:
    """One Newton step on the (mu-1)-th derivative of the edge polynomial."""
    der = coeffs
    for _ in range(mu - 1):
        der = np.polyder(der)
    fval = np.polyval(der, rep)
    dval = np.polyval(np.polyder(der), rep)
    if abs(dval) > 1e-30:
        step = fval / dval
        if abs(step) <= 0.5 * max(abs(rep), 1e-30):
            rep = rep - step
    return complex(rep)


def _char_roots(gamma: list[complex]) -> list[tuple[complex, int]]:
    """Nonzero roots of the edge polynomial, clustered into multiplicities.

    Companion-matrix eigenvalues scatter a mu-fold root over a disc of
    radius ~ eps^(1/mu), so the clustering threshold must grow with the
    candidate multiplicity; a merge is accepted only when the polished
    representative actually annihilates the polynomial, otherwise the
    members are kept as separate simple roots.
    """
    coeffs = np.array(gamma[::-1], dtype=complex)  # highest degree first
    deg = len(coeffs) - 1
    try:
        roots = np.roots(coeffs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalRootFailure(f"companion eigensolve failed: {exc}")
    if not np.all(np.isfinite(roots)):
        raise NumericalRootFailure("non-finite characteristic roots")
    scale = float(max(np.max(np.abs(roots)), 1e-300))
    tol = max(_CHAR_ROOT_TOL, 50.0 * float(np.finfo(float).eps) ** (1.0 / max(deg, 1)))
    clusters = _cluster_complex([complex(r) for r in roots], tol * scale)
    coeff_scale = float(np.max(np.abs(coeffs)))
    polished: list[tuple[complex, int]] = []
    for rep, members in clusters:
        mu = len(members)
        rep = _polish(coeffs, rep, mu)
        if mu > 1:
            resid = abs(np.polyval(coeffs, rep))
            if resid > 1e-8 * coeff_scale * max(1.0, abs(rep)) ** deg:
                # merged genuinely distinct roots: keep them separate
                for j in members:
                    polished.append((_polish(coeffs, complex(roots[j]), 1), 1))
                continue
        polished.append((rep, mu))
    polished.sort(key=lambda t: (t[0].real, t[0].imag))
    return polished


def _substitute(G: dict, a: Fraction, c: complex) -> dict:
    """Replace y -> x^a (c + y), normalize the x-valuation, drop dirt."""
    out: dict[tuple[Fraction, int], complex] = {}
    for (e, j), coef in G.items():
        shift = e + a * j
        pw = 1.0 + 0.0j
        # binomial expansion of (c + y)^j from the y^j side
        for i in range(j, -1, -1):
            key = (shift, i)
            out[key] = out.get(key, 0.0) + coef * math.comb(j, i) * pw
            pw *= c
    maxabs = max(abs(v) for v in out.values())
    out = {k: v for k, v in out.items() if abs(v) > _DIRT_TOL * maxabs}
    vmin = min(e for e, _ in out)
    return {(e - vmin, j): v for (e, j), v in out.items()}


def _negative_edges(G: dict):
    """Yield (a, gamma) for each lower-polygon edge of slope -a < 0."""
    hull = _lower_hull(_valuation_points(G))
    for (j1, v1), (j2, v2) in zip(hull, hull[1:]):
        if v2 >= v1:
            continue
        a = Fraction(v1 - v2, j2 - j1)
        gamma = [G.get((v1 - a * (j - j1), j), 0.0) for j in range(j1, j2 + 1)]
        yield a, gamma


def _expand(G: dict, prefix: list, order: Fraction, out: list) -> None:
    """Recursive branch expansion; emits (term list, multiplicity) into out."""
    min_j = min(j for _, j in G.keys())
    if min_j > 0:
        if prefix:
            out.append((list(prefix), min_j))  # series terminates exactly
        G = {(e, j - min_j): v for (e, j), v in G.items()}
    if max(j for _, j in G.keys()) == 0:
        return
    base = prefix[-1][0] if prefix else Fraction(0)
    for a, gamma in _negative_edges(G):
        exponent = base + a
        if exponent > order:
            croots = _char_roots(gamma)
            if len(croots) > 1 or not prefix:
                raise TruncationTooCoarse(
                    f"distinct branches split at exponent {exponent} beyond the "
                    f"requested truncation order {order}"
                )
            out.append((list(prefix), sum(mu for _, mu in croots)))
            continue
        for c, mu in _char_roots(gamma):
            _expand(_substitute(G, a, c), prefix + [(exponent, c)], order, out)


def default_truncation_order(H: BivariatePolynomial) -> Fraction:
    """Max vertex A-coordinate of N(H) plus two; separates desk-scale clusters."""
    hull = polyhedron(H)
    return Fraction(hull.vertices[-1][0]) + 2


def puiseux_roots(
    H: BivariatePolynomial, order: Fraction | int | None = None
) -> PuiseuxFactorization:
    """Factor H = U x^m y^s prod (y - r_nu(x)) up to the truncation order.

    Returns (m, s, roots); each root carries its multiplicity and truncated
    terms.  Roots are sorted by (leading exponent, Re, Im of coefficients).
    """
    if H.is_zero():
        raise ZeroPolynomial("cannot factor the zero polynomial")
    if order is None:
        order = default_truncation_order(H)
    order = Fraction(order)
    if order <= 0:
        raise ValueError("truncation order must be positive")
    s = H.min_degree_y()
    m = H.min_degree_x()
    G = {(Fraction(k - m), l - s): complex(c) for (k, l), c in H.terms.items()}
    raw: list[tuple[list, int]] = []
    _expand(G, [], order, raw)
    roots = [
        PuiseuxSeries(tuple(terms), truncation_order=order, multiplicity=mu)
        for terms, mu in raw
    ]
    roots.sort(
        key=lambda r: (
            r.leading_exponent,
            round(r.leading_coefficient.real, 9),
            round(r.leading_coefficient.imag, 9),
            len(r.terms),
        )
    )
    return PuiseuxFactorization(m=m, s=s, roots=roots)


# ---------------------------------------------------------------------------
# cluster hierarchy
# ---------------------------------------------------------------------------


@dataclass
class CoefficientClass:
    """Roots sharing a coefficient value at the parent exponent."""

    exponent: Fraction
    coefficient: complex
    count: int
    members: list[PuiseuxSeries]
    children: list["ExponentGroup"] = field(default_factory=list)
    terminal_count: int = 0

    def to_json_dict(self) -> dict:
        return {
            "coefficient": [self.coefficient.real, self.coefficient.imag],
            "count": self.count,
            "terminal_count": self.terminal_count,
            "roots": [r.to_json_dict() for r in self.members],
            "subgroups": [g.to_json_dict() for g in self.children],
        }


@dataclass
class ExponentGroup:
    """Roots sharing the exponent at one depth of the hierarchy."""

    depth: int
    exponent: Fraction
    count: int
    classes: list[CoefficientClass]

    def to_json_dict(self) -> dict:
        return {
            "exponent": str(self.exponent),
            "count": self.count,
            "classes": [c.to_json_dict() for c in self.classes],
        }


@dataclass
class RootClusterTree:
    """Full classification of the nontrivial roots of a polynomial.

    ``groups`` is the top level: one entry per leading exponent a_l,
    ascending, each holding its coefficient classes and, recursively, the
    deeper splits.  Counts are multiplicity-weighted throughout.
    """

    m: int
    s: int
    groups: list[ExponentGroup]
    roots: list[PuiseuxSeries]
    coeff_tol: float = COEFF_CLUSTER_TOL

    @property
    def total_count(self) -> int:
        return sum(g.count for g in self.groups)

    def counts_by_exponent(self) -> list[tuple[Fraction, int]]:
        return [(g.exponent, g.count) for g in self.groups]

    def roots_up_to_level(self, r: int) -> list[PuiseuxSeries]:
        """All roots in the first r top-level exponent groups."""
        out: list[PuiseuxSeries] = []
        for g in self.groups[:r]:
            for cls in g.classes:
                out.extend(cls.members)
        return out

    def to_json_dict(self) -> dict:
        return {
            "m": self.m,
            "s": self.s,
            "total_nontrivial": self.total_count,
            "groups": [g.to_json_dict() for g in self.groups],
        }


def _group_members(
    members: list[PuiseuxSeries], depth: int, tol: float
) -> tuple[list[ExponentGroup], int]:
    """Group series by their term at ``depth``; returns (groups, terminal count)."""
    terminal = sum(r.multiplicity for r in members if len(r.terms) <= depth)
    living = [r for r in members if len(r.terms) > depth]
    by_exp: dict[Fraction, list[PuiseuxSeries]] = {}
    for r in living:
        by_exp.setdefault(r.terms[depth][0], []).append(r)
    groups = []
    for exponent in sorted(by_exp):
        bucket = by_exp[exponent]
        values = [r.terms[depth][1] for r in bucket]
        scale = max(abs(v) for v in values)
        tol_abs = tol * scale
        clusters = _cluster_complex(values, tol_abs)
        # gray zone: distinct classes closer than 10x the tolerance
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                gap = abs(clusters[i][0] - clusters[j][0])
                if gap < 10 * tol_abs:
                    raise AmbiguousCluster(
                        f"coefficient gap {gap:.3e} within 10x of tolerance "
                        f"{tol_abs:.3e} at exponent {exponent}"
                    )
        classes = []
        for rep, idxs in clusters:
            sub = [bucket[i] for i in idxs]
            children, term_count = _group_members(sub, depth + 1, tol)
            classes.append(
                CoefficientClass(
                    exponent=exponent,
                    coefficient=rep,
                    count=sum(r.multiplicity for r in sub),
                    members=sub,
                    children=children,
                    terminal_count=term_count,
                )
            )
        groups.append(
            ExponentGroup(
                depth=depth,
                exponent=exponent,
                count=sum(c.count for c in classes),
                classes=classes,
            )
        )
    return groups, terminal


def classify_roots(
    factorization: PuiseuxFactorization, coeff_tol: float = COEFF_CLUSTER_TOL
) -> RootClusterTree:
    """Build the nested exponent/coefficient cluster hierarchy."""
    m, s, roots = factorization
    groups, _ = _group_members(list(roots), 0, coeff_tol)
    return RootClusterTree(m=m, s=s, groups=groups, roots=list(roots), coeff_tol=coeff_tol)


@dataclass(frozen=True)
class CrosscheckReport:
    formula_vertices: tuple[tuple[Fraction, Fraction], ...]
    hull_vertices: tuple[tuple[Fraction, Fraction], ...]
    ok: bool

    def to_json_dict(self) -> dict:
        return {
            "formula_vertices": [[str(a), str(b)] for a, b in self.formula_vertices],
            "hull_vertices": [[str(a), str(b)] for a, b in self.hull_vertices],
            "ok": self.ok,
        }


def vertex_crosscheck(H: BivariatePolynomial, tree: RootClusterTree) -> CrosscheckReport:
    """Check the bookkeeping identities against the convex hull, exactly.

    A_r = m + sum_{l<=r} N[./l] a_l and B_r = s + sum_{l>r} N[./l] must
    reproduce the vertices of the Newton polyhedron of H.  Raises
    CrosscheckMismatch on any discrepancy.
    """
    counts = tree.counts_by_exponent()
    n = len(counts)
    formula = []
    for r in range(n + 1):
        A = Fraction(tree.m) + sum((cnt * a for a, cnt in counts[:r]), Fraction(0))
        B = Fraction(tree.s) + sum(cnt for _, cnt in counts[r:])
        formula.append((A, B))
    hull = polyhedron(H).vertices
    report = CrosscheckReport(tuple(formula), tuple(hull), tuple(formula) == tuple(hull))
    if not report.ok:
        raise CrosscheckMismatch(
            f"bookkeeping vertices {formula} != hull vertices {list(hull)}"
        )
    return report


def invert_linear_root(
    series: PuiseuxSeries,
    c: float,
    window: float = 0.1,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> float:
    """Solve r(x*) = c for a real series with leading term C1 * x.

    Damped Newton iteration seeded at c / C1; ``window`` bounds the x-range
    in which the truncated series is trusted.
    """
    lead_e, lead_c = series.terms[0]
    if lead_e != 1:
        raise ValueError(f"leading exponent must be 1, got {lead_e}")
    if abs(lead_c.imag) > 1e-9 * abs(lead_c) or lead_c.real == 0:
        raise ValueError("leading coefficient must be real and nonzero")
    if not series.is_real(1e-9):
        raise ValueError("series must have real coefficients")
    x = c / lead_c.real
    if abs(x) > window * (1 + 1e-9):
        raise NoConvergence(
            f"seed {x:.3g} outside the numeric convergence window {window}"
        )
    scale = max(abs(c), 1.0)
    fx = series.evaluate_real(x) - c
    for _ in range(max_iter):
        if abs(fx) <= tol * scale:
            return x
        d = series.derivative_real(x)
        if d == 0 or not math.isfinite(d):
            raise NoConvergence("vanishing derivative in Newton iteration")
        step = fx / d
        for _ in range(60):
            x_new = x - step
            if x_new <= 0 and c / lead_c.real > 0:
                step /= 2
                continue
            f_new = series.evaluate_real(x_new) - c
            if abs(f_new) < abs(fx):
                break
            step /= 2
        else:
            raise NoConvergence("damped Newton step stalled")
        x, fx = x_new, f_new
    raise NoConvergence(f"no convergence after {max_iter} iterations")

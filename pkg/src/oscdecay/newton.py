"""Newton polyhedra and the decay exponents they predict.

The Newton polyhedron N(P) is the convex hull of the union of upper-right
quadrants anchored at the exponent pairs of P's monomials.  Its boundary
vertices (A_r, B_r), ordered with A strictly increasing and B strictly
decreasing, drive every exponent formula: the sharp L^p pair at a vertex,
the damped-L^2 rate, and the critical negative exponent.  Everything here
is exact rational arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import DegeneratePhase, NotInSupport, ZeroPolynomial
from .poly import BivariatePolynomial, mixed_hessian

Point = tuple[Fraction, Fraction]


def staircase_vertices(points: Sequence[tuple]) -> list[Point]:
    """Vertices of the hull of union of quadrants {(u,v): u>=a, v>=b}.

    Keeps the Pareto-minimal points, then prunes points that are not extreme
    (collinear with their staircase neighbours).  Exact over rationals.
    """
    pts = sorted({(Fraction(a), Fraction(b)) for a, b in points})
    if not pts:
        raise ZeroPolynomial("no support points")
    # Pareto-minimal sweep: ascending a, keep strictly decreasing b envelope.
    minimal: list[Point] = []
    best_b = None
    for a, b in pts:  # ties in a: smallest b first, others dominated
        if best_b is None or b < best_b:
            minimal.append((a, b))
            best_b = b
    # prune non-extreme points: keep only strict corners of the lower hull
    # (cross <= 0 means the middle point lies on or above the chord)
    hull: list[Point] = []
    for p in minimal:
        while len(hull) >= 2:
            (a1, b1), (a2, b2) = hull[-2], hull[-1]
            if (a2 - a1) * (p[1] - b1) - (b2 - b1) * (p[0] - a1) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


@dataclass(frozen=True)
class NewtonPolyhedron:
    """Vertex list (A_r, B_r) with A_0 < ... < A_n and B_0 > ... > B_n."""

    vertices: tuple[Point, ...]

    @property
    def n(self) -> int:
        return len(self.vertices) - 1

    @property
    def edges(self) -> list[tuple[Point, Point, Fraction]]:
        out = []
        for (a1, b1), (a2, b2) in zip(self.vertices, self.vertices[1:]):
            out.append(((a1, b1), (a2, b2), (b2 - b1) / (a2 - a1)))
        return out

    def boundary_height(self, u) -> Fraction | None:
        """Height of the lower boundary above u, None left of the polyhedron."""
        u = Fraction(u)
        verts = self.vertices
        if u < verts[0][0]:
            return None
        if u >= verts[-1][0]:
            return verts[-1][1]
        for (a1, b1), (a2, b2) in zip(verts, verts[1:]):
            if a1 <= u <= a2:
                return b1 + (b2 - b1) * (u - a1) / (a2 - a1)
        return None  # unreachable

    def contains(self, u, v) -> bool:
        u, v = Fraction(u), Fraction(v)
        h = self.boundary_height(u)
        return h is not None and v >= h

    def on_boundary(self, u, v) -> bool:
        u, v = Fraction(u), Fraction(v)
        verts = self.vertices
        if u == verts[0][0] and v >= verts[0][1]:
            return True
        if v == verts[-1][1] and u >= verts[-1][0]:
            return True
        h = self.boundary_height(u)
        return h is not None and v == h and u <= verts[-1][0]


def polyhedron(P: BivariatePolynomial) -> NewtonPolyhedron:
    """Exact Newton polyhedron of a nonzero polynomial."""
    if P.is_zero():
        raise ZeroPolynomial("Newton polyhedron of the zero polynomial")
    return NewtonPolyhedron(tuple(staircase_vertices(list(P.support()))))


@dataclass(frozen=True)
class SharpPair:
    decay: Fraction
    p: Fraction
    on_boundary: bool


def sharp_pair_estimate(S: BivariatePolynomial, k: int, l: int) -> SharpPair:
    """Decay/exponent pair (1/(k+l), (k+l)/k) for a mixed support point.

    The estimate is sharp only when (k, l) lies on the boundary of N(S);
    the returned flag reports exact boundary membership.
    """
    if k < 1 or l < 1:
        raise NotInSupport(f"need k,l >= 1, got ({k},{l})")
    if (k, l) not in S.terms:
        raise NotInSupport(f"({k},{l}) is not in the support of the phase")
    hull = polyhedron(S)
    return SharpPair(
        decay=Fraction(1, k + l),
        p=Fraction(k + l, k),
        on_boundary=hull.on_boundary(k, l),
    )


@dataclass(frozen=True)
class VertexReport:
    """Predicted exponents at one vertex (A_r, B_r) of N(S''_xy).

    p and decay give the sharp L^p estimate; damped_sigma and damped_re_z
    the damped-L^2 rate and the exponent that achieves it; critical_neg_re_z
    the negative exponent at which endpoint L^1-type bounds are tested.
    The last two are undefined (None) when A_r = 0.
    """

    r: int
    A: Fraction
    B: Fraction
    p: Fraction
    decay: Fraction
    damped_sigma: Fraction
    damped_re_z: Fraction | None
    critical_neg_re_z: Fraction | None

    def to_json_dict(self) -> dict:
        def frac(v):
            return None if v is None else str(v)

        return {
            "r": self.r,
            "A_r": frac(self.A),
            "B_r": frac(self.B),
            "p_r": frac(self.p),
            "decay_r": frac(self.decay),
            "damped_sigma": frac(self.damped_sigma),
            "damped_re_z": frac(self.damped_re_z),
            "critical_neg_re_z": frac(self.critical_neg_re_z),
        }


def bisectrix_coordinate(hull: NewtonPolyhedron) -> Fraction:
    """The t with (t, t) on the boundary of the polyhedron, exactly.

    For the polyhedron of the mixed Hessian this gives the predicted sharp
    L^2 decay exponent 1/(2(1+t)).
    """
    verts = hull.vertices
    if verts[0][0] >= verts[0][1]:  # diagonal hits the vertical ray
        return verts[0][0]
    if verts[-1][1] >= verts[-1][0]:  # diagonal hits the horizontal ray
        return verts[-1][1]
    for (a1, b1), (a2, b2) in zip(verts, verts[1:]):
        if a1 - b1 <= 0 <= a2 - b2:
            theta = (b1 - a1) / ((a2 - a1) - (b2 - b1))
            return a1 + theta * (a2 - a1)
    raise RuntimeError("bisectrix does not meet the boundary")  # pragma: no cover


def vertex_reports(S: BivariatePolynomial) -> list[VertexReport]:
    """One report per vertex of the Newton polyhedron of the mixed Hessian.

    Raises DegeneratePhase for split phases (Hessian identically zero),
    which have no power decay at all.
    """
    H = mixed_hessian(S)
    if H.is_zero():
        raise DegeneratePhase(
            "phase splits as P(x) + Q(y); no power decay exists"
        )
    hull = polyhedron(H)
    reports = []
    for r, (A, B) in enumerate(hull.vertices):
        reports.append(
            VertexReport(
                r=r,
                A=A,
                B=B,
                p=(A + B + 2) / (A + 1),
                decay=Fraction(1) / (A + B + 2),
                damped_sigma=Fraction(1) / (2 * (1 + B)),
                damped_re_z=None if A == 0 else (A - B) / (2 * A * (1 + B)),
                critical_neg_re_z=None if A == 0 else Fraction(-1) / A,
            )
        )
    return reports

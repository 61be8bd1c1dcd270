"""Newton polyhedron geometry and vertex exponent formulas."""
from fractions import Fraction

import numpy as np
import pytest

from oscdecay.errors import DegeneratePhase, NotInSupport, ZeroPolynomial
from oscdecay.newton import (
    NewtonPolyhedron,
    bisectrix_coordinate,
    polyhedron,
    sharp_pair_estimate,
    staircase_vertices,
    vertex_reports,
)
from oscdecay.phase import parse_phase
from oscdecay.poly import BivariatePolynomial


def P(text):
    return parse_phase(text)


def hull_vertices(text):
    return [(int(a), int(b)) for a, b in polyhedron(P(text)).vertices]


def brute_force_vertices(points):
    """Oracle: unique minimizers of a*u + b*v over integer directions.

    A staircase vertex is the unique minimizer for some strictly positive
    direction; directions with entries up to twice the coordinate spread
    separate every corner (mediant of adjacent edge slopes).
    """
    pts = sorted(set(points))
    spread = max(max(u for u, _ in pts) - min(u for u, _ in pts),
                 max(v for _, v in pts) - min(v for _, v in pts), 1)
    D = 2 * spread + 2
    found = set()
    for a in range(1, D + 1):
        for b in range(1, D + 1):
            vals = [a * u + b * v for u, v in pts]
            lo = min(vals)
            if vals.count(lo) == 1:
                found.add(pts[vals.index(lo)])
    return sorted(found)


def test_hull_examples():
    assert hull_vertices("x*y") == [(1, 1)]
    assert hull_vertices("3*x^2 + 3*y^2") == [(0, 2), (2, 0)]
    assert hull_vertices("x^2*y^2 + x^5") == [(2, 2), (5, 0)]


def test_hull_zero_polynomial():
    with pytest.raises(ZeroPolynomial):
        polyhedron(BivariatePolynomial.zero())


def test_hull_against_brute_force():
    rng = np.random.default_rng(42)
    for _ in range(60):
        n = rng.integers(1, 9)
        pts = {(int(rng.integers(0, 9)), int(rng.integers(0, 9))) for _ in range(n)}
        expected = brute_force_vertices(pts)
        got = [(int(a), int(b)) for a, b in staircase_vertices(pts)]
        assert got == expected, f"support {sorted(pts)}"


def test_hull_idempotent():
    rng = np.random.default_rng(3)
    for _ in range(20):
        pts = {(int(rng.integers(0, 7)), int(rng.integers(0, 7))) for _ in range(5)}
        verts = staircase_vertices(pts)
        assert staircase_vertices(verts) == verts


def test_edge_slopes_negative_increasing():
    hull = polyhedron(P("y^4 + x*y^2 + x^3*y + x^7"))
    slopes = [s for _, _, s in hull.edges]
    assert all(s < 0 for s in slopes)
    assert slopes == sorted(slopes)
    assert all(s1 < s2 for s1, s2 in zip(slopes, slopes[1:]))


def test_membership_and_boundary():
    hull = polyhedron(P("3*x^2 + 3*y^2"))
    assert hull.contains(1, 1)
    assert hull.on_boundary(1, 1)  # on the edge between (0,2) and (2,0)
    assert hull.contains(2, 2) and not hull.on_boundary(2, 2)
    assert not hull.contains(0, 1)
    assert hull.on_boundary(0, 5)  # vertical ray
    assert hull.on_boundary(7, 0)  # horizontal ray


def test_sharp_pair_examples():
    sp = sharp_pair_estimate(P("x*y"), 1, 1)
    assert (sp.decay, sp.p, sp.on_boundary) == (Fraction(1, 2), Fraction(2), True)
    sp = sharp_pair_estimate(P("x^2*y"), 2, 1)
    assert (sp.decay, sp.p, sp.on_boundary) == (Fraction(1, 3), Fraction(3, 2), True)
    sp = sharp_pair_estimate(P("x^3*y + x*y^3"), 3, 1)
    assert (sp.decay, sp.p, sp.on_boundary) == (Fraction(1, 4), Fraction(4, 3), True)


def test_sharp_pair_interior_point():
    # (2,2) lies strictly inside N(x*y + x^2*y^2)
    sp = sharp_pair_estimate(P("x*y + x^2*y^2"), 2, 2)
    assert not sp.on_boundary


def test_sharp_pair_requires_support():
    with pytest.raises(NotInSupport):
        sharp_pair_estimate(P("x*y"), 2, 1)
    with pytest.raises(NotInSupport):
        sharp_pair_estimate(P("x^2 + x*y"), 2, 0)


def brute_force_boundary(points, k, l):
    """(k,l) on the boundary iff no convex combination of quadrant points
    lies strictly below-left through it; checked by enumerating pairs."""
    verts = brute_force_vertices(points)
    # below the lower envelope?
    for (a1, b1), (a2, b2) in zip(verts, verts[1:]):
        if a1 <= k <= a2:
            height = Fraction(b1) + Fraction(b2 - b1, a2 - a1) * (k - a1)
            if Fraction(l) < height:
                return False
            if Fraction(l) == height:
                return True
    if k == verts[0][0] and l >= verts[0][1]:
        return True
    if l == verts[-1][1] and k >= verts[-1][0]:
        return True
    if k < verts[0][0]:
        return False
    return False


def test_boundary_against_brute_force():
    rng = np.random.default_rng(9)
    for _ in range(40):
        pts = {(int(rng.integers(1, 6)), int(rng.integers(1, 6))) for _ in range(4)}
        terms = {t: 1 for t in pts}
        S = BivariatePolynomial(terms)
        hull = polyhedron(S)
        for k, l in pts:
            assert hull.on_boundary(k, l) == brute_force_boundary(pts, k, l)


def test_vertex_reports_x2y2():
    reports = vertex_reports(P("x^2*y^2"))
    assert len(reports) == 1
    r = reports[0]
    assert (r.A, r.B) == (1, 1)
    assert r.p == 2 and r.decay == Fraction(1, 4)
    assert r.damped_sigma == Fraction(1, 4) and r.damped_re_z == 0


def test_vertex_reports_x3y_xy3():
    r0, r1 = vertex_reports(P("x^3*y + x*y^3"))
    assert (r0.A, r0.B, r0.p, r0.decay) == (0, 2, 4, Fraction(1, 4))
    assert r0.critical_neg_re_z is None and r0.damped_re_z is None
    assert (r1.A, r1.B, r1.p, r1.decay) == (2, 0, Fraction(4, 3), Fraction(1, 4))
    assert r1.damped_re_z == Fraction(1, 2)
    assert r1.damped_sigma == Fraction(1, 2)
    assert r1.critical_neg_re_z == Fraction(-1, 2)


def test_vertex_reports_xy():
    (r,) = vertex_reports(P("x*y"))
    assert (r.A, r.B) == (0, 0)
    assert r.p == 2 and r.decay == Fraction(1, 2)


def test_vertex_reports_split_phase():
    with pytest.raises(DegeneratePhase):
        vertex_reports(P("x^3 + y^2"))


def test_report_ranges_and_balanced_vertices():
    rng = np.random.default_rng(11)
    for _ in range(25):
        pts = {(int(rng.integers(1, 6)), int(rng.integers(1, 6))) for _ in range(4)}
        S = BivariatePolynomial({t: 1 for t in pts})
        for r in vertex_reports(S):
            assert r.p > 1
            assert 0 < r.decay <= Fraction(1, 2)
            if r.A == r.B and r.A > 0:
                assert r.damped_re_z == 0
                assert r.damped_sigma == r.decay


def test_duality_transpose():
    rng = np.random.default_rng(5)
    for _ in range(20):
        pts = {(int(rng.integers(0, 6)), int(rng.integers(0, 6))) for _ in range(5)}
        S = BivariatePolynomial({t: 1 for t in pts})
        direct = polyhedron(S.transpose()).vertices
        swapped = sorted(((b, a) for a, b in polyhedron(S).vertices))
        assert list(direct) == [tuple(v) for v in swapped]


def test_bisectrix_examples():
    assert bisectrix_coordinate(polyhedron(P("1"))) == 0
    assert bisectrix_coordinate(polyhedron(P("4*x*y"))) == 1
    assert bisectrix_coordinate(polyhedron(P("3*x^2 + 3*y^2"))) == 1
    assert bisectrix_coordinate(polyhedron(P("x^3"))) == 3

"""Exact bivariate polynomials over the rationals.

A polynomial in x, y is a sparse map from exponent pairs (deg_x, deg_y) to
Fraction coefficients.  All symbolic stages (hull geometry, root bookkeeping,
vertex formulas) stay exact; coefficients are promoted to doubles exactly
once, when a numeric grid is evaluated.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import ZeroPolynomial

Term = tuple[int, int]


class BivariatePolynomial:
    """Sparse exact-rational polynomial in two variables.

    ``terms`` maps (deg_x, deg_y) to a nonzero Fraction; the zero polynomial
    is the empty map.  Instances are treated as immutable values.
    """

    __slots__ = ("terms", "_coeff_matrix")

    def __init__(self, terms: Mapping[Term, object] | None = None):
        clean: dict[Term, Fraction] = {}
        if terms:
            for (k, l), c in terms.items():
                if k < 0 or l < 0:
                    raise ValueError(f"negative exponent in term ({k},{l})")
                c = Fraction(c)
                if c != 0:
                    clean[(int(k), int(l))] = clean.get((int(k), int(l)), Fraction(0)) + c
            clean = {t: c for t, c in clean.items() if c != 0}
        self.terms = clean
        self._coeff_matrix = None

    # --- constructors ----------------------------------------------------

    @classmethod
    def zero(cls) -> "BivariatePolynomial":
        return cls({})

    @classmethod
    def constant(cls, c) -> "BivariatePolynomial":
        return cls({(0, 0): Fraction(c)})

    @classmethod
    def monomial(cls, k: int, l: int, c=1) -> "BivariatePolynomial":
        return cls({(k, l): Fraction(c)})

    @classmethod
    def var_x(cls) -> "BivariatePolynomial":
        return cls({(1, 0): Fraction(1)})

    @classmethod
    def var_y(cls) -> "BivariatePolynomial":
        return cls({(0, 1): Fraction(1)})

    # --- ring operations --------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        out = dict(self.terms)
        for t, c in other.terms.items():
            out[t] = out.get(t, Fraction(0)) + c
        return BivariatePolynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return BivariatePolynomial({t: -c for t, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        out: dict[Term, Fraction] = {}
        for (k1, l1), c1 in self.terms.items():
            for (k2, l2), c2 in other.terms.items():
                t = (k1 + k2, l1 + l2)
                out[t] = out.get(t, Fraction(0)) + c1 * c2
        return BivariatePolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative polynomial power")
        result = BivariatePolynomial.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, BivariatePolynomial):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        from .phase import format_phase

        return f"BivariatePolynomial({format_phase(self)!r})"

    # --- structure ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def support(self) -> set[Term]:
        return set(self.terms)

    def degree_x(self) -> int:
        if not self.terms:
            raise ZeroPolynomial("degree of the zero polynomial")
        return max(k for k, _ in self.terms)

    def degree_y(self) -> int:
        if not self.terms:
            raise ZeroPolynomial("degree of the zero polynomial")
        return max(l for _, l in self.terms)

    def min_degree_x(self) -> int:
        if not self.terms:
            raise ZeroPolynomial("valuation of the zero polynomial")
        return min(k for k, _ in self.terms)

    def min_degree_y(self) -> int:
        if not self.terms:
            raise ZeroPolynomial("valuation of the zero polynomial")
        return min(l for _, l in self.terms)

    def transpose(self) -> "BivariatePolynomial":
        """Swap the roles of x and y."""
        return BivariatePolynomial({(l, k): c for (k, l), c in self.terms.items()})

    # --- calculus ----------------------------------------------------------

    def diff_x(self) -> "BivariatePolynomial":
        return BivariatePolynomial(
            {(k - 1, l): c * k for (k, l), c in self.terms.items() if k > 0}
        )

    def diff_y(self) -> "BivariatePolynomial":
        return BivariatePolynomial(
            {(k, l - 1): c * l for (k, l), c in self.terms.items() if l > 0}
        )

    # --- evaluation ---------------------------------------------------------

    def eval_exact(self, x, y) -> Fraction:
        """Exact evaluation at rational (or integer) arguments."""
        x = Fraction(x)
        y = Fraction(y)
        total = Fraction(0)
        for (k, l), c in self.terms.items():
            total += c * x**k * y**l
        return total

    def _floats(self) -> np.ndarray:
        # (deg_x+1, deg_y+1) dense coefficient matrix; built once per value
        if self._coeff_matrix is None:
            if not self.terms:
                mat = np.zeros((1, 1))
            else:
                mat = np.zeros((self.degree_x() + 1, self.degree_y() + 1))
                for (k, l), c in self.terms.items():
                    mat[k, l] = float(c)
            self._coeff_matrix = mat
        return self._coeff_matrix

    def __call__(self, x, y):
        return self.eval(x, y)

    def eval(self, x, y):
        """Horner-style numeric evaluation; accepts scalars or numpy arrays.

        Rational/integer scalar inputs go through the exact path.
        """
        if isinstance(x, Rational) and isinstance(y, Rational):
            return self.eval_exact(x, y)
        X, Y = np.broadcast_arrays(np.asarray(x), np.asarray(y))
        return npoly.polyval2d(X, Y, self._floats())


def _coerce(value) -> BivariatePolynomial:
    if isinstance(value, BivariatePolynomial):
        return value
    if isinstance(value, (int, Fraction)):
        return BivariatePolynomial.constant(value)
    raise TypeError(f"cannot interpret {value!r} as a polynomial")


def mixed_hessian(S: BivariatePolynomial) -> BivariatePolynomial:
    """Mixed second derivative d^2 S / dx dy, exactly."""
    return S.diff_x().diff_y()


def degenerate_split_check(S: BivariatePolynomial) -> bool:
    """True iff S = P(x) + Q(y), i.e. S carries no mixed monomial.

    Equivalent to the mixed Hessian being identically zero.
    """
    return not any(k >= 1 and l >= 1 for (k, l) in S.terms)


def max_gradient(S: BivariatePolynomial, half_width: float, n: int = 201, cutoff=None) -> float:
    """Max of |grad S| over [-w, w]^2, restricted to where the cutoff lives."""
    sx = S.diff_x()
    sy = S.diff_y()
    t = np.linspace(-half_width, half_width, n)
    X, Y = np.meshgrid(t, t, indexing="ij")
    g = np.hypot(sx.eval(X, Y), sy.eval(X, Y))
    if cutoff is not None:
        mask = cutoff.values(X, Y) > 1e-12
        if mask.any():
            g = g[mask]
    return float(g.max())

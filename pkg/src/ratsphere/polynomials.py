"""Exact homogeneous polynomials and the monomial moment inner product on spheres."""

from __future__ import annotations

import json
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from math import lcm, prod
from numbers import Rational

import numpy as np


def monomials(nvars: int, degree: int) -> list[tuple[int, ...]]:
    """Exponent tuples of the given total degree, in a fixed (reverse-lex) order."""
    out = []
    for combo in combinations_with_replacement(range(nvars), degree):
        e = [0] * nvars
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return sorted(out, reverse=True)


def _as_exact(c):
    if isinstance(c, (int, Fraction)):
        return Fraction(c)
    if isinstance(c, Rational):
        return Fraction(c.numerator, c.denominator)
    return c


class HomogeneousPoly:
    """Homogeneous polynomial in ``nvars`` variables.

    Coefficients are exact ``Fraction`` values unless floats are supplied;
    zero coefficients are dropped.
    """

    def __init__(self, terms: dict, nvars: int = 3, degree: int | None = None):
        clean = {}
        for exps, c in terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars:
                raise ValueError(f"exponent {exps} does not have {nvars} entries")
            c = _as_exact(c)
            if c != 0:
                clean[exps] = clean.get(exps, 0) + c
        clean = {e: c for e, c in clean.items() if c != 0}
        degs = {sum(e) for e in clean}
        if len(degs) > 1:
            raise ValueError(f"polynomial is not homogeneous (degrees {sorted(degs)})")
        if degree is None:
            degree = degs.pop() if degs else 0
        elif degs and degs != {degree}:
            raise ValueError("declared degree disagrees with the terms")
        self.terms = clean
        self.nvars = nvars
        self.degree = degree

    @property
    def d(self) -> int:
        return self.nvars - 1

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.terms.values())

    def _like(self, terms, cls=None):
        cls = cls or type(self)
        return cls(terms, self.nvars, self.degree)

    def __repr__(self):
        names = "xyzwuv"
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(f"{names[i]}^{k}" if k > 1 else names[i] for i, k in enumerate(e) if k)
            parts.append(f"{c}*{mono}" if mono else f"{c}")
        return f"{type(self).__name__}({' + '.join(parts) or '0'})"

    def __eq__(self, other):
        if not isinstance(other, HomogeneousPoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms and (
            self.degree == other.degree or not self.terms
        )

    def __hash__(self):
        return hash((self.nvars, self.degree, frozenset(self.terms.items())))

    def __add__(self, other):
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return self._like(out)

    def __neg__(self):
        return self._like({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        scalar = _as_exact(scalar)
        return self._like({e: c * scalar for e, c in self.terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        scalar = _as_exact(scalar)
        return self._like({e: c / scalar for e, c in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def __call__(self, x):
        """Evaluate at one point; exact when point and coefficients are exact."""
        total = 0
        for e, c in self.terms.items():
            term = c
            for xi, k in zip(x, e):
                if k:
                    term = term * xi**k
            total = total + term
        return total

    def evaluate_many(self, X) -> np.ndarray:
        """Float evaluation at the rows of ``X``."""
        X = np.asarray(X, dtype=float)
        out = np.zeros(len(X))
        for e, c in self.terms.items():
            out += float(c) * np.prod(X ** np.asarray(e), axis=1)
        return out

    def laplacian(self) -> HomogeneousPoly:
        out: dict = {}
        for e, c in self.terms.items():
            for i, k in enumerate(e):
                if k >= 2:
                    f = list(e)
                    f[i] -= 2
                    f = tuple(f)
                    out[f] = out.get(f, 0) + c * k * (k - 1)
        return HomogeneousPoly(out, self.nvars, max(self.degree - 2, 0))

    def is_harmonic(self) -> bool:
        return self.laplacian().is_zero()

    def integer_form(self) -> tuple[int, dict]:
        """(D, terms) with integer terms such that self = terms / D."""
        if not self.is_exact:
            raise TypeError("integer_form needs exact coefficients")
        D = lcm(*(c.denominator for c in self.terms.values())) if self.terms else 1
        return D, {e: int(c * D) for e, c in self.terms.items()}

    def to_float(self):
        return self._like({e: float(c) for e, c in self.terms.items()})

    def coefficient_vector(self, basis: list[tuple[int, ...]]) -> list:
        return [self.terms.get(e, 0) for e in basis]

    def to_json(self) -> str:
        terms = []
        for e, c in sorted(self.terms.items(), reverse=True):
            if isinstance(c, Fraction):
                terms.append({"exponents": list(e), "numerator": c.numerator, "denominator": c.denominator})
            else:
                terms.append({"exponents": list(e), "value": float(c)})
        return json.dumps({"degree": self.degree, "nvars": self.nvars, "terms": terms})

    @classmethod
    def from_json(cls, text: str):
        obj = json.loads(text)
        terms = {}
        for t in obj["terms"]:
            if "value" in t:
                terms[tuple(t["exponents"])] = float(t["value"])
            else:
                terms[tuple(t["exponents"])] = Fraction(t["numerator"], t["denominator"])
        return cls(terms, obj.get("nvars", 3), obj["degree"])


class HarmonicPoly(HomogeneousPoly):
    """Homogeneous polynomial annihilated by the Laplacian (checked exactly for exact input)."""

    def __init__(self, terms: dict, nvars: int = 3, degree: int | None = None, check: bool = True):
        super().__init__(terms, nvars, degree)
        if check and self.is_exact and not self.is_harmonic():
            raise ValueError("polynomial is not harmonic")

    def _like(self, terms, cls=None):
        # linear combinations of harmonic polys stay harmonic
        if cls is None:
            return HarmonicPoly(terms, self.nvars, self.degree, check=False)
        return super()._like(terms, cls)


@lru_cache(maxsize=None)
def _double_factorial(k: int) -> int:
    return prod(range(k, 0, -2)) if k > 0 else 1


@lru_cache(maxsize=None)
def sphere_moment(exps: tuple[int, ...]) -> Fraction:
    """Integral of x^exps against the normalized surface measure on S^{len(exps)-1}."""
    if any(e % 2 for e in exps):
        return Fraction(0)
    n = len(exps)
    half = sum(exps) // 2
    num = prod(_double_factorial(e - 1) for e in exps)
    den = prod(n + 2 * i for i in range(half))
    return Fraction(num, den)


def l2_inner(P: HomogeneousPoly, Q: HomogeneousPoly):
    """L^2(S^d, mu) inner product computed from monomial moments."""
    if P.nvars != Q.nvars:
        raise ValueError("variable counts differ")
    total = 0
    for e1, c1 in P.terms.items():
        for e2, c2 in Q.terms.items():
            m = sphere_moment(tuple(a + b for a, b in zip(e1, e2)))
            if m:
                total = total + c1 * c2 * m
    return total


def l2_norm_sq(P: HomogeneousPoly):
    return l2_inner(P, P)

"""Theta coefficients of Z^3 and of the lattice Lambda, the weight 2+2nu lift, and exact
checks of the Eichler commutation relation and the p-neighbor count."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import sqrt

import numpy as np

from .lattice_points import representations
from .number_theory import chi4, divisor_count, divisors, is_prime, legendre_symbol, mobius
from .polynomials import HomogeneousPoly, monomials
from .quaternion_hecke import _hamilton, hecke_apply, norm_reps
from .sphere_harmonics import fibonacci_sphere

# |A(1)| below this counts as a vanishing first coefficient for float polynomials
A1_ZERO_TOL = 1e-9


class VanishingFirstCoefficient(ArithmeticError):
    """A(1) = 0: the normalized eigenvalues are undefined."""


@dataclass
class CoeffSeries:
    label: str
    values: dict[int, Fraction] = field(default_factory=dict)

    def __getitem__(self, n: int):
        return self.values[n]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "numerator", "denominator"])
        for n in sorted(self.values):
            v = Fraction(self.values[n])
            w.writerow([n, v.numerator, v.denominator])
        return buf.getvalue()


def in_lambda(v) -> bool:
    return v[0] % 2 == v[1] % 2 == v[2] % 2


def lambda_vectors(n: int) -> np.ndarray:
    """R(n, Lambda): same-parity integer vectors of squared length n."""
    # norms of Lambda are 0 mod 4 (even vectors) or 3 mod 8 (odd vectors)
    if n % 4 != 0 and n % 8 != 3:
        return np.zeros((0, 3), dtype=np.int64)
    reps = representations(n, 3)
    par = reps % 2
    return reps[(par[:, 0] == par[:, 1]) & (par[:, 1] == par[:, 2])]


@lru_cache(maxsize=8192)
def _power_sums(n: int, degree: int, lattice: str) -> dict[tuple[int, int, int], int]:
    """Exact sums of every degree-``degree`` monomial over the vectors of norm n."""
    if n == 0:
        vecs = np.zeros((1, 3), dtype=np.int64)
    elif lattice == "Z3":
        vecs = representations(n, 3)
    else:
        vecs = lambda_vectors(n)
    out = {}
    if len(vecs) == 0:
        return out
    cols = [vecs[:, i].astype(object) for i in range(3)]
    pows = [[np.ones(len(vecs), dtype=object)] for _ in range(3)]
    for i in range(3):
        for _ in range(degree):
            pows[i].append(pows[i][-1] * cols[i])
    for e in monomials(3, degree):
        # both lattices are closed under sign changes of single coordinates
        if any(k % 2 for k in e):
            continue
        out[e] = int((pows[0][e[0]] * pows[1][e[1]] * pows[2][e[2]]).sum())
    return out


def _theta_coeff(P: HomogeneousPoly, n: int, lattice: str):
    if P.nvars != 3:
        raise ValueError("theta coefficients need polynomials in 3 variables")
    if n < 0:
        raise ValueError("n must be nonnegative")
    sums = _power_sums(n, P.degree, lattice)
    total = Fraction(0) if P.is_exact else 0.0
    for e, c in P.terms.items():
        s = sums.get(e)
        if s:
            total += c * s
    return total


def r_P(P: HomogeneousPoly, n: int):
    """Sum of P over m in Z^3 with |m|^2 = n (exact for exact P)."""
    return _theta_coeff(P, n, "Z3")


def r_lambda_P(P: HomogeneousPoly, n: int):
    """Sum of P over v in Lambda with |v|^2 = n."""
    return _theta_coeff(P, n, "Lambda")


def theta_series(P: HomogeneousPoly, n_max: int, lattice: str = "Z3") -> CoeffSeries:
    f = r_P if lattice == "Z3" else r_lambda_P
    label = f"r_P[{lattice}]"
    return CoeffSeries(label, {n: f(P, n) for n in range(1, n_max + 1)})


def kohnen_lift_A(P: HomogeneousPoly, n: int):
    """A(n) = 2^nu sum_{d | n} chi4(d) d^nu r_P(n^2 / d^2), n odd."""
    if n < 1 or n % 2 == 0:
        raise ValueError("A(n) is defined here for odd n >= 1")
    nu = P.degree
    total = 0
    for d in divisors(n):
        c = chi4(d)
        if c:
            total += c * d**nu * r_P(P, (n // d) ** 2)
    return 2**nu * total


def _first_coefficient(P: HomogeneousPoly):
    A1 = kohnen_lift_A(P, 1)
    if (P.is_exact and A1 == 0) or (not P.is_exact and abs(A1) < A1_ZERO_TOL):
        raise VanishingFirstCoefficient("A(1) vanishes for this polynomial")
    return A1


def hecke_lambda(P: HomogeneousPoly, n: int) -> float:
    """Normalized eigenvalue A(n) / (A(1) n^{nu + 1/2})."""
    A1 = _first_coefficient(P)
    return float(kohnen_lift_A(P, n)) / float(A1) / n ** (P.degree + 0.5)


def mobius_inversion_identity_check(P: HomogeneousPoly, n: int) -> float:
    """Relative residual of r_P(n^2) = r_P(1) n^nu sum_{q | n} mu(n/q) chi4(n/q) sqrt(q) lambda(q)."""
    if n < 1 or n % 2 == 0:
        raise ValueError("n must be odd")
    _first_coefficient(P)
    nu = P.degree
    lhs = float(r_P(P, n * n))
    acc = 0.0
    for q in divisors(n):
        k = n // q
        w = mobius(k) * chi4(k)
        if w:
            acc += w * sqrt(q) * hecke_lambda(P, q)
    rhs = float(r_P(P, 1)) * n**nu * acc
    return abs(lhs - rhs) / max(1.0, abs(lhs))


@dataclass
class EichlerRow:
    n: int
    lhs: Fraction
    rhs: Fraction

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs


@dataclass
class EichlerReport:
    p: int
    nu: int
    n_max: int
    rows: list[EichlerRow]

    @property
    def failures(self) -> list[EichlerRow]:
        return [r for r in self.rows if not r.equal]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> str:
        return json.dumps(
            {
                "p": self.p,
                "nu": self.nu,
                "N_max": self.n_max,
                "checked": len(self.rows),
                "failures": [{"n": r.n, "lhs": str(r.lhs), "rhs": str(r.rhs)} for r in self.failures],
            },
            sort_keys=True,
        )


def eichler_rhs(p: int, P: HomogeneousPoly, n: int) -> Fraction:
    """Coefficient n of T_{p^2} applied to the Lambda theta series of P (weight 3/2 + nu)."""
    nu = P.degree
    out = r_lambda_P(P, p * p * n) + p**nu * legendre_symbol(-n, p) * r_lambda_P(P, n)
    if n % (p * p) == 0:
        out += p ** (1 + 2 * nu) * r_lambda_P(P, n // (p * p))
    return out


def eichler_verify(p: int, P: HomogeneousPoly, n_max: int) -> EichlerReport:
    """Exact check, for every n <= n_max, of

        p^nu r_{Lambda, T_p P}(n) = r(p^2 n) + p^nu (-n/p) r(n) + p^{1+2nu} r(n/p^2)

    with r = r_{Lambda, P}.  The factor p^nu on the left comes from T_p
    rotating by z x conj(z)/p rather than z x conj(z).
    """
    if not is_prime(p) or p == 2 or p > 20:
        raise ValueError("p must be an odd prime <= 20")
    if not P.is_exact:
        raise TypeError("the Eichler check needs an exact polynomial")
    if P.degree > 6:
        raise ValueError("degree must be <= 6")
    if n_max > 500:
        raise ValueError("n_max must be <= 500")
    TP = hecke_apply(p, P)
    nu = P.degree
    rows = []
    for n in range(1, n_max + 1):
        lhs = p**nu * r_lambda_P(TP, n)
        rows.append(EichlerRow(n, Fraction(lhs), Fraction(eichler_rhs(p, P, n))))
    return EichlerReport(p, nu, n_max, rows)


def _conj_mul_sandwich(z, v) -> tuple[int, int, int, int]:
    """8 * conj(z) v z in plain coordinates, for z in twice-coordinates and integer v."""
    V = (0, 2 * v[0], 2 * v[1], 2 * v[2])
    return _hamilton(_hamilton(z.conj().twice, V), z.twice)


def neighbor_count(v, p: int) -> int:
    """Number of neighbors K = g Lambda g^{-1} (nr g = p, g up to units) with v/p in K.

    v/p lies in g Lambda g^{-1} iff conj(g) v g / p^2 lies in Lambda.
    """
    v = tuple(int(t) for t in v)
    if not in_lambda(v):
        raise ValueError(f"{v} is not in Lambda")
    if p > 20:
        raise ValueError("p must be <= 20")
    reps = norm_reps(p)
    den = 8 * p * p
    count = 0
    for g in reps.classes:
        w = _conj_mul_sandwich(g, v)
        if any(t % den for t in w):
            continue
        if in_lambda([t // den for t in w[1:]]):
            count += 1
    return count


def neighbor_count_formula(v, p: int) -> int:
    """Three-case count for v with p^2 | nr(v); 0 when p^2 does not divide nr(v)."""
    v = tuple(int(t) for t in v)
    k = sum(t * t for t in v)
    if k % (p * p):
        return 0
    n = k // (p * p)

    def in_scaled(q):
        return all(t % q == 0 for t in v) and in_lambda([t // q for t in v])

    if in_scaled(p * p):
        return p + 1
    if in_scaled(p):
        return 1 + legendre_symbol(-n, p)
    return 1


def neighbor_sum(P: HomogeneousPoly, p: int, n: int):
    """Sum of P(v) * neighbor_count(v, p) over v in R(p^2 n, Lambda)."""
    total = Fraction(0)
    for v in lambda_vectors(p * p * n).tolist():
        c = neighbor_count(v, p)
        if c:
            total += c * P(v)
    return total


def sup_norm(P: HomogeneousPoly, grid: int = 20000) -> float:
    """Approximate max |P| on S^2: Fibonacci grid plus one local refinement."""
    from scipy.optimize import minimize

    X = fibonacci_sphere(grid)
    vals = np.abs(P.evaluate_many(X))
    x0 = X[int(np.argmax(vals))]
    best = float(vals.max())

    def neg(ang):
        th, ph = ang
        x = np.array([[np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)]])
        return -abs(P.evaluate_many(x)[0])

    th0 = float(np.arccos(np.clip(x0[2], -1, 1)))
    ph0 = float(np.arctan2(x0[1], x0[0]))
    res = minimize(neg, [th0, ph0], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14})
    return max(best, -float(res.fun))


def growth_ratios(P: HomogeneousPoly, n_max: int = 300) -> dict[int, float]:
    """|r_P(n^2)| / (n^{nu+1/2} d(n) ||P||_inf) over odd n."""
    norm = sup_norm(P)
    nu = P.degree
    return {n: abs(float(r_P(P, n * n))) / (n ** (nu + 0.5) * divisor_count(n) * norm) for n in range(1, n_max + 1, 2)}

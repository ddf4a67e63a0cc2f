"""Gegenbauer polynomials, zonal harmonics, cap geometry and harmonic bases on S^2."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from math import asin, comb, exp, lgamma, pi, sqrt

import numpy as np
from scipy import integrate

from .polynomials import HarmonicPoly, l2_inner

MAX_BASIS_DEGREE = 12
_UNIT_TOL = 1e-12


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class CapSpec:
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        if abs(np.linalg.norm(c) - 1.0) > _UNIT_TOL:
            raise ValueError("cap center must be a unit vector")
        if not 0 < self.radius <= 2:
            raise ValueError("cap radius must lie in (0, 2]")
        object.__setattr__(self, "center", tuple(float(t) for t in c))

    @property
    def d(self) -> int:
        return len(self.center) - 1


@dataclass(frozen=True)
class AnnulusSpec:
    center: tuple[float, ...]
    r_inner: float
    r_outer: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        if abs(np.linalg.norm(c) - 1.0) > _UNIT_TOL:
            raise ValueError("annulus center must be a unit vector")
        # r_inner == r_outer is accepted as the degenerate (empty) annulus
        if not 0 <= self.r_inner <= self.r_outer <= 2:
            raise ValueError("need 0 <= r_inner <= r_outer <= 2")
        object.__setattr__(self, "center", tuple(float(t) for t in c))


@dataclass(frozen=True)
class GegenbauerParams:
    d: int

    @property
    def lam(self) -> float:
        return (self.d - 1) / 2

    def c(self, nu: int) -> float:
        return (nu + self.lam) / self.lam


def gegenbauer(nu: int, lam: float, t):
    """C_nu^lam(t) by the three-term recurrence; accepts scalars or arrays."""
    if nu < 0 or lam <= 0:
        raise ValueError("need nu >= 0 and lam > 0")
    t_arr = np.asarray(t, dtype=float)
    if np.any(np.abs(t_arr) > 1 + 1e-9):
        raise ValueError("t must lie in [-1, 1]")
    prev = np.ones_like(t_arr)
    if nu == 0:
        return prev if t_arr.ndim else float(prev)
    cur = 2 * lam * t_arr
    for k in range(2, nu + 1):
        prev, cur = cur, (2 * (k + lam - 1) * t_arr * cur - (k + 2 * lam - 2) * prev) / k
    return cur if t_arr.ndim else float(cur)


def dim_H(nu: int, d: int) -> int:
    if nu < 0 or d < 2:
        raise ValueError("need nu >= 0 and d >= 2")
    if nu < 2:
        return 1 if nu == 0 else d + 1
    return comb(d + nu, nu) - comb(d + nu - 2, nu - 2)


def zonal(nu: int, d: int, x, y) -> float:
    """Z_nu(x, y) = c_nu C_nu^{(d-1)/2}(<x, y>)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if abs(np.linalg.norm(x) - 1) > 1e-9 or abs(np.linalg.norm(y) - 1) > 1e-9:
        raise ValueError("zonal harmonics take unit vectors")
    par = GegenbauerParams(d)
    t = float(np.clip(x @ y, -1.0, 1.0))
    return par.c(nu) * gegenbauer(nu, par.lam, t)


def area_ratio(d: int) -> float:
    """omega_{d-1} / omega_d."""
    return exp(lgamma((d + 1) / 2) - lgamma(d / 2)) / sqrt(pi)


def angular_radius(R: float) -> float:
    return 2 * asin(min(R / 2, 1.0))


def cap_measure(R: float, d: int = 2) -> float:
    """Normalized surface measure of a cap of Euclidean radius R on S^d."""
    if not 0 < R <= 2:
        raise ValueError("cap radius must lie in (0, 2]")
    if d == 2:
        return R * R / 4
    r = angular_radius(R)
    val, _ = integrate.quad(lambda th: np.sin(th) ** (d - 1), 0.0, r, epsabs=1e-14, epsrel=1e-12, limit=200)
    return min(1.0, area_ratio(d) * val)


def cap_measure_leading(R: float, d: int) -> float:
    return area_ratio(d) * R**d / d


def _gl_integral(f, a: float, b: float, nodes: int) -> float:
    x, w = np.polynomial.legendre.leggauss(nodes)
    mid, half = (a + b) / 2, (b - a) / 2
    return half * float(w @ f(mid + half * x))


def cap_gegenbauer_coeff(nu: int, R: float, d: int = 2) -> float:
    """Gegenbauer coefficient of the normalized cap indicator 1_{C_R}/mu(C_R)."""
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    if not 0 < R <= 2:
        raise ValueError("cap radius must lie in (0, 2]")
    if nu == 0:
        return 1.0
    par = GegenbauerParams(d)
    r = angular_radius(R)

    def integrand(theta):
        return gegenbauer(nu, par.lam, np.cos(theta)) * np.sin(theta) ** (d - 1)

    nodes = nu + d + 16
    prev = _gl_integral(integrand, 0.0, r, nodes)
    for _ in range(2):
        nodes *= 2
        cur = _gl_integral(integrand, 0.0, r, nodes)
        converged = abs(cur - prev) <= 1e-10 * max(abs(cur), 1.0)
        prev = cur
        if converged:
            break
    else:
        raise QuadratureError(f"no convergence for nu={nu}, R={R}, d={d}")
    return area_ratio(d) * par.c(nu) / dim_H(nu, d) * prev / cap_measure(R, d)


def cap_gegenbauer_coeffs(N: int, R: float, d: int = 2) -> np.ndarray:
    """All coefficients for nu = 0..N from one recurrence pass over shared quadrature nodes."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    if not 0 < R <= 2:
        raise ValueError("cap radius must lie in (0, 2]")
    par = GegenbauerParams(d)
    r = angular_radius(R)

    def integrals(nodes):
        x, w = np.polynomial.legendre.leggauss(nodes)
        theta = r / 2 * (x + 1)
        t = np.cos(theta)
        wt = r / 2 * w * np.sin(theta) ** (d - 1)
        out = np.empty(N + 1)
        prev, cur = np.ones_like(t), 2 * par.lam * t
        out[0] = wt @ prev
        if N >= 1:
            out[1] = wt @ cur
        for k in range(2, N + 1):
            prev, cur = cur, (2 * (k + par.lam - 1) * t * cur - (k + 2 * par.lam - 2) * prev) / k
            out[k] = wt @ cur
        return out

    nodes = N + d + 16
    prev = integrals(nodes)
    for _ in range(2):
        nodes *= 2
        cur = integrals(nodes)
        converged = np.all(np.abs(cur - prev) <= 1e-10 * np.maximum(np.abs(cur), 1.0))
        prev = cur
        if converged:
            break
    else:
        raise QuadratureError(f"no convergence for N={N}, R={R}, d={d}")
    nus = np.arange(N + 1)
    c = np.array([par.c(int(k)) for k in nus])
    dims = np.array([dim_H(int(k), d) for k in nus], dtype=float)
    out = area_ratio(d) * c / dims * prev / cap_measure(R, d)
    out[0] = 1.0
    return out


def parseval_partial_sum(N: int, R: float, d: int = 2) -> float:
    """sum_{nu <= N} f_hat(nu)^2 dim H_nu, which increases to 1/mu(C_R)."""
    coeffs = cap_gegenbauer_coeffs(N, R, d)
    dims = np.array([dim_H(k, d) for k in range(N + 1)], dtype=float)
    return float(coeffs**2 @ dims)


# --- harmonic bases on S^2 -------------------------------------------------

def _lap_xy(f: dict) -> dict:
    out: dict = {}
    for (a, b), c in f.items():
        if a >= 2:
            out[(a - 2, b)] = out.get((a - 2, b), 0) + c * a * (a - 1)
        if b >= 2:
            out[(a, b - 2)] = out.get((a, b - 2), 0) + c * b * (b - 1)
    return {k: v for k, v in out.items() if v}


def _lift_seed(seed: tuple[int, int], zdeg: int, nu: int) -> HarmonicPoly:
    """Unique harmonic poly whose z^0 (or z^1) slice is x^a y^b and other seed slice vanishes."""
    terms = {}
    f = {seed: Fraction(1)}
    k = zdeg
    while f and k <= nu:
        for (a, b), c in f.items():
            terms[(a, b, k)] = c
        lap = _lap_xy(f)
        f = {e: -c / ((k + 1) * (k + 2)) for e, c in lap.items()}
        k += 2
    return HarmonicPoly(terms, 3, nu)


def _spanning_harmonics(nu: int) -> list[HarmonicPoly]:
    seeds = [((nu - j, j), 0) for j in range(nu + 1)]
    seeds += [((nu - 1 - j, j), 1) for j in range(nu)]
    return [_lift_seed(s, z, nu) for s, z in seeds]


_basis_lock = threading.Lock()
_orth_cache: dict[int, tuple[list[HarmonicPoly], list[Fraction]]] = {}


def orthogonal_harmonic_basis(nu: int) -> tuple[list[HarmonicPoly], list[Fraction]]:
    """Exact L^2(S^2)-orthogonal basis of H_nu with its exact squared norms (Gram-Schmidt)."""
    if not 0 <= nu <= MAX_BASIS_DEGREE:
        raise ValueError(f"basis degree must lie in [0, {MAX_BASIS_DEGREE}]")
    with _basis_lock:
        if nu not in _orth_cache:
            basis: list[HarmonicPoly] = []
            norms: list[Fraction] = []
            for P in _spanning_harmonics(nu):
                for B, nb in zip(basis, norms):
                    P = P - B * (l2_inner(P, B) / nb)
                nrm = l2_inner(P, P)
                if nrm == 0:
                    raise ArithmeticError("dependent spanning set")
                basis.append(P)
                norms.append(nrm)
            _orth_cache[nu] = (basis, norms)
        basis, norms = _orth_cache[nu]
    return list(basis), list(norms)


def harmonic_basis(nu: int, d: int = 2) -> list[HarmonicPoly]:
    """Orthonormal basis of H_nu on S^2 with float coefficients."""
    if d != 2:
        raise ValueError("explicit bases are only provided for S^2")
    basis, norms = orthogonal_harmonic_basis(nu)
    out = []
    for P, nrm in zip(basis, norms):
        s = 1.0 / sqrt(nrm)
        out.append(HarmonicPoly({e: float(c) * s for e, c in P.terms.items()}, 3, nu, check=False))
    return out


def basis_values(nu: int, X) -> np.ndarray:
    """Matrix of orthonormal basis values, shape (len(X), 2nu+1)."""
    return np.column_stack([P.evaluate_many(X) for P in harmonic_basis(nu)])


def sphere_product_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights (summing to 1) integrating polynomials up to ``degree`` exactly on S^2."""
    m = degree // 2 + 1
    t, wt = np.polynomial.legendre.leggauss(m)
    k = degree + 1
    phi = 2 * pi * np.arange(k) / k
    T, PHI = np.meshgrid(t, phi, indexing="ij")
    s = np.sqrt(1 - T**2)
    nodes = np.column_stack([(s * np.cos(PHI)).ravel(), (s * np.sin(PHI)).ravel(), T.ravel()])
    weights = np.repeat(wt / 2, k) / k
    return nodes, weights


def uniform_sphere(rng: np.random.Generator, count: int, dim: int = 3) -> np.ndarray:
    """Uniform points on S^{dim-1} by normalizing Gaussian vectors."""
    g = rng.standard_normal((count, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def fibonacci_sphere(K: int) -> np.ndarray:
    """K-point Fibonacci lattice on S^2."""
    i = np.arange(K, dtype=float)
    z = 1 - (2 * i + 1) / K
    golden = pi * (3 - sqrt(5))
    phi = golden * i
    s = np.sqrt(1 - z * z)
    return np.column_stack([s * np.cos(phi), s * np.sin(phi), z])


"""Hurwitz quaternions, norm-p elements and the Hecke operators T_p on harmonic polynomials.

Quaternions are stored by twice their coordinates, (A, B, C, D) standing for
(A + Bi + Cj + Dk)/2 with A, B, C, D of equal parity.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import isqrt

import numpy as np

from .number_theory import is_prime
from .polynomials import HarmonicPoly, HomogeneousPoly, l2_inner, monomials
from .sphere_harmonics import harmonic_basis, orthogonal_harmonic_basis


def _hamilton(x, y):
    a1, b1, c1, d1 = x
    a2, b2, c2, d2 = y
    return (
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    )


@dataclass(frozen=True, order=True)
class HurwitzQuaternion:
    A: int
    B: int
    C: int
    D: int

    def __post_init__(self):
        if len({self.A % 2, self.B % 2, self.C % 2, self.D % 2}) != 1:
            raise ValueError("twice-coordinates must share parity")

    @classmethod
    def from_coords(cls, a, b, c, d) -> HurwitzQuaternion:
        vals = [Fraction(t) * 2 for t in (a, b, c, d)]
        if any(v.denominator != 1 for v in vals):
            raise ValueError("coordinates must be integers or half-integers")
        return cls(*(int(v) for v in vals))

    @property
    def twice(self) -> tuple[int, int, int, int]:
        return (self.A, self.B, self.C, self.D)

    def coords(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(t, 2) for t in self.twice)

    def __mul__(self, other: HurwitzQuaternion) -> HurwitzQuaternion:
        prod = _hamilton(self.twice, other.twice)
        if any(t % 2 for t in prod):
            raise ArithmeticError("product left the Hurwitz order")
        return HurwitzQuaternion(*(t // 2 for t in prod))

    def __neg__(self):
        return HurwitzQuaternion(-self.A, -self.B, -self.C, -self.D)

    def conj(self) -> HurwitzQuaternion:
        return HurwitzQuaternion(self.A, -self.B, -self.C, -self.D)

    def nr(self) -> int:
        return (self.A**2 + self.B**2 + self.C**2 + self.D**2) // 4

    def trace(self) -> int:
        return self.A

    def rotation_matrix(self) -> np.ndarray:
        """Integer matrix M with z v conj(z) = M v for pure quaternions v."""
        cols = []
        for e in ((0, 2, 0, 0), (0, 0, 2, 0), (0, 0, 0, 2)):
            w = _hamilton(_hamilton(self.twice, e), self.conj().twice)
            # w holds 8 * (z e conj z) in plain coordinates
            cols.append([t // 8 for t in w[1:]])
        return np.array(cols, dtype=np.int64).T


def quat_mul(x: HurwitzQuaternion, y: HurwitzQuaternion) -> HurwitzQuaternion:
    return x * y


def quat_conj(x: HurwitzQuaternion) -> HurwitzQuaternion:
    return x.conj()


def quat_nr(x: HurwitzQuaternion) -> int:
    return x.nr()


def units() -> list[HurwitzQuaternion]:
    out = []
    for i in range(4):
        for s in (2, -2):
            t = [0, 0, 0, 0]
            t[i] = s
            out.append(HurwitzQuaternion(*t))
    for a in (1, -1):
        for b in (1, -1):
            for c in (1, -1):
                for d in (1, -1):
                    out.append(HurwitzQuaternion(a, b, c, d))
    return out


@dataclass
class NormPReps:
    p: int
    reps: list[HurwitzQuaternion]
    classes: list[HurwitzQuaternion] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {
                "p": self.p,
                "count": len(self.reps),
                "reps": [list(z.twice) for z in self.reps],
                "classes": [list(z.twice) for z in self.classes],
            }
        )


_reps_lock = threading.Lock()
_reps_cache: dict[int, NormPReps] = {}


def _check_odd_prime(p: int, bound: int) -> None:
    if p < 3 or p % 2 == 0 or not is_prime(p):
        raise ValueError(f"need an odd prime, got {p}")
    if p > bound:
        raise ValueError(f"p={p} exceeds the supported bound {bound}")


def norm_reps(p: int) -> NormPReps:
    """All 24(p+1) Hurwitz quaternions of reduced norm p, plus one representative per class z O^x.

    The class representative is the lexicographically smallest element z*u.
    """
    _check_odd_prime(p, 200)
    with _reps_lock:
        if p in _reps_cache:
            return _reps_cache[p]
        target = 4 * p
        bound = isqrt(target)
        reps = []
        for A in range(-bound, bound + 1):
            for B in range(-bound, bound + 1):
                for C in range(-bound, bound + 1):
                    rest = target - A * A - B * B - C * C
                    if rest < 0:
                        continue
                    D = isqrt(rest)
                    if D * D != rest:
                        continue
                    for DD in sorted({D, -D}):
                        if len({A % 2, B % 2, C % 2, DD % 2}) == 1:
                            reps.append(HurwitzQuaternion(A, B, C, DD))
        us = units()
        classes = sorted({min(z * u for u in us) for z in reps})
        out = NormPReps(p, reps, classes)
        _reps_cache[p] = out
        return out


def rotate(z: HurwitzQuaternion, v) -> tuple[Fraction, Fraction, Fraction]:
    """z v conj(z) / nr(z) for a pure quaternion v = (b, c, d) with rational entries."""
    n = z.nr()
    if n <= 0:
        raise ValueError("rotation needs nonzero z")
    v = [Fraction(t) for t in v]
    M = z.rotation_matrix()
    return tuple(sum(int(M[i, j]) * v[j] for j in range(3)) / n for i in range(3))


@lru_cache(maxsize=None)
def _distinct_rotations(p: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """Rotation matrices of z and -z coincide; keep one per pair (multiplicity 2)."""
    seen = {}
    for z in norm_reps(p).reps:
        M = tuple(map(tuple, z.rotation_matrix().tolist()))
        seen[M] = seen.get(M, 0) + 1
    if set(seen.values()) != {2}:
        raise ArithmeticError("unexpected rotation multiplicities")
    return tuple(sorted(seen))


def _interp_points(nu: int) -> list[tuple[int, int, int]]:
    # principal lattice, unisolvent for homogeneous polynomials of degree nu
    return [(i, j, 1) for j in range(nu + 1) for i in range(nu + 1 - j)]


def _mono_eval(x, exps) -> int:
    return x[0] ** exps[0] * x[1] ** exps[1] * x[2] ** exps[2]


def _solve_exact(E: list[list], V: list[list]) -> list[list[Fraction]]:
    """Solve E X = V by Gauss-Jordan over the rationals."""
    n = len(E)
    m = len(V[0])
    aug = [[Fraction(x) for x in E[i]] + [Fraction(x) for x in V[i]] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        row = [x / pv for x in aug[col]]
        aug[col] = row
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], row)]
    return [row[n : n + m] for row in aug]


@lru_cache(maxsize=None)
def _substitution_operator(p: int, nu: int) -> tuple[tuple[tuple[int, ...], ...], tuple[tuple[Fraction, ...], ...]]:
    """Exact matrix S with coeffs(sum_z P(M_z x)) = S coeffs(P), over monomials of degree nu."""
    monos = monomials(3, nu)
    pts = _interp_points(nu)
    rots = [np.array(M, dtype=object) for M in _distinct_rotations(p)]
    E = [[_mono_eval(x, e) for e in monos] for x in pts]
    V = []
    for x in pts:
        xv = np.array(x, dtype=object)
        images = [tuple(M.dot(xv)) for M in rots]
        V.append([2 * sum(_mono_eval(y, e) for y in images) for e in monos])
    S = _solve_exact(E, V)
    return tuple(monos), tuple(tuple(r) for r in S)


def hecke_apply(p: int, P: HomogeneousPoly) -> HarmonicPoly:
    """(T_p P)(x) = (1/24) sum over nr(z) = p of P(z x conj(z) / p), as an exact polynomial."""
    _check_odd_prime(p, 50)
    if P.nvars != 3:
        raise ValueError("Hecke operators act on polynomials in 3 variables")
    nu = P.degree
    if nu > 8:
        raise ValueError("degree above 8 is not supported")
    monos, S = _substitution_operator(p, nu)
    c = P.coefficient_vector(list(monos))
    scale = Fraction(1, 24 * p**nu) if P.is_exact else 1.0 / (24 * p**nu)
    terms = {}
    for e, row in zip(monos, S):
        val = sum(s * ci for s, ci in zip(row, c) if ci)
        if val:
            terms[e] = (val * scale) if P.is_exact else float(val) * scale
    return HarmonicPoly(terms, 3, nu, check=P.is_exact and isinstance(P, HarmonicPoly))


def hecke_matrix(p: int, nu: int) -> list[list[Fraction]]:
    """Exact matrix of T_p in the orthogonal basis of H_nu (column j holds T_p B_j)."""
    if nu > 8:
        raise ValueError("degree above 8 is not supported")
    basis, norms = orthogonal_harmonic_basis(nu)
    cols = []
    for B in basis:
        TB = hecke_apply(p, B)
        cols.append([l2_inner(TB, Bi) / ni for Bi, ni in zip(basis, norms)])
    size = len(basis)
    return [[cols[j][i] for j in range(size)] for i in range(size)]


def symmetric_hecke_matrix(p: int, nu: int) -> np.ndarray:
    """T_p in the orthonormal basis (float, symmetric)."""
    M = hecke_matrix(p, nu)
    _, norms = orthogonal_harmonic_basis(nu)
    s = np.sqrt(np.array([float(n) for n in norms]))
    A = np.array([[float(x) for x in row] for row in M])
    return A * s[:, None] / s[None, :]


def matmul_exact(X: list[list], Y: list[list]) -> list[list]:
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*Y)] for row in X]


def commutator_is_zero(p: int, q: int, nu: int) -> bool:
    A = hecke_matrix(p, nu)
    B = hecke_matrix(q, nu)
    return matmul_exact(A, B) == matmul_exact(B, A)


def hecke_matrix_csv(M: list[list[Fraction]]) -> str:
    return "\n".join(",".join(str(x) for x in row) for row in M) + "\n"


class EigenbasisError(RuntimeError):
    pass


@dataclass
class HeckeEigenfunction:
    poly: HarmonicPoly
    eigenvalues: dict[int, float]
    coeffs: np.ndarray
    block: int
    residuals: dict[int, float]


@dataclass
class HeckeEigenbasis:
    nu: int
    primes: list[int]
    seed: int
    functions: list[HeckeEigenfunction]
    block_dims: list[int]

    def __iter__(self):
        return iter(self.functions)

    def __len__(self):
        return len(self.functions)

    def metadata(self) -> dict:
        return {"nu": self.nu, "primes": self.primes, "seed": self.seed, "block_dims": self.block_dims}


def _group_eigenvalues(w: np.ndarray, tol: float) -> list[list[int]]:
    groups = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[groups[-1][-1]] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def hecke_eigenbasis(nu: int, primes: list[int], seed: int = 20240601, tol: float = 1e-8) -> HeckeEigenbasis:
    """Joint eigenbasis of the commuting symmetric matrices T_p on H_nu.

    A seeded random combination of the T_p is diagonalized; clusters of equal
    eigenvalues are kept together as one block.
    """
    if not primes:
        raise ValueError("need at least one prime")
    for p in primes:
        _check_odd_prime(p, 50)
    mats = {p: symmetric_hecke_matrix(p, nu) for p in primes}
    scale = max(1.0, max(np.abs(A).max() for A in mats.values()))
    onb = harmonic_basis(nu)
    rng = np.random.Generator(np.random.Philox(key=seed))
    for _ in range(3):
        weights = rng.uniform(0.5, 1.5, size=len(primes))
        C = sum(w * mats[p] for w, p in zip(weights, primes))
        evals, evecs = np.linalg.eigh(C)
        groups = _group_eigenvalues(evals, 1e-7 * scale)
        funcs = []
        ok = True
        for b, idx in enumerate(groups):
            for i in idx:
                v = evecs[:, i]
                k = int(np.argmax(np.abs(v)))
                v = v * np.sign(v[k])
                lam = {p: float(v @ mats[p] @ v) for p in primes}
                res = {p: float(np.linalg.norm(mats[p] @ v - lam[p] * v)) for p in primes}
                if max(res.values()) > tol:
                    ok = False
                terms: dict = {}
                for coef, B in zip(v, onb):
                    for e, c in B.terms.items():
                        terms[e] = terms.get(e, 0.0) + coef * c
                poly = HarmonicPoly(terms, 3, nu, check=False)
                funcs.append(HeckeEigenfunction(poly, lam, v, b, res))
        if ok:
            return HeckeEigenbasis(nu, list(primes), seed, funcs, [len(g) for g in groups])
    raise EigenbasisError(f"joint diagonalization failed for nu={nu}, primes={primes}")

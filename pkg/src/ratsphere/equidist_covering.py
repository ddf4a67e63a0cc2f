"""Cap and annulus statistics, Weyl sums, variance Monte Carlo, covering radii and the
minimal-|z| search for primitive sums of three squares."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt, log

import numpy as np
from scipy.spatial import cKDTree

from .lattice_points import PointSet, omega_n, omega_n_count_exact
from .number_theory import divisor_count, divisors, has_prime_factor_3_mod_4, mobius
from .polynomials import HomogeneousPoly
from .sphere_harmonics import AnnulusSpec, CapSpec, cap_measure, fibonacci_sphere, uniform_sphere
from .theta_modular import r_P

GUARD = 1e-12
_CHUNK = 1 << 22


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator; the seed is mandatory everywhere randomness is used."""
    return np.random.Generator(np.random.Philox(key=int(seed)))


# --- exact-guarded distance tests ----------------------------------------

def _exact_dist2(m, h: int, center) -> Fraction:
    a = [Fraction(float(t)) for t in center]
    dot = sum(Fraction(int(mi)) * ai for mi, ai in zip(m, a)) / h
    return 1 + sum(ai * ai for ai in a) - 2 * dot


def _dist2(points: PointSet, center: np.ndarray) -> np.ndarray:
    X = points.coords()
    return 1.0 + float(center @ center) - 2.0 * (X @ center)


def _strictly_less(points: PointSet, center, radius: float, dist2: np.ndarray) -> np.ndarray:
    """Mask of |x - center| < radius, with exact rational recheck inside the guard band."""
    R2 = radius * radius
    mask = dist2 < R2
    near = np.nonzero(np.abs(dist2 - R2) <= GUARD)[0]
    if len(near):
        R2x = Fraction(float(radius)) ** 2
        for i in near:
            mask[i] = _exact_dist2(points.numerators[i], int(points.heights[i]), center) < R2x
    return mask


def _strictly_greater(points: PointSet, center, radius: float, dist2: np.ndarray) -> np.ndarray:
    R2 = radius * radius
    mask = dist2 > R2
    near = np.nonzero(np.abs(dist2 - R2) <= GUARD)[0]
    if len(near):
        R2x = Fraction(float(radius)) ** 2
        for i in near:
            mask[i] = _exact_dist2(points.numerators[i], int(points.heights[i]), center) > R2x
    return mask


@dataclass
class CapCountResult:
    n: int
    R: float
    alpha: tuple[float, ...]
    count: int
    expected: float
    ratio: float

    def as_dict(self) -> dict:
        return asdict(self)


def cap_count(points: PointSet, cap: CapSpec) -> CapCountResult:
    center = np.asarray(cap.center)
    mask = _strictly_less(points, center, cap.radius, _dist2(points, center))
    count = int(mask.sum())
    expected = len(points) * cap_measure(cap.radius, points.d)
    ratio = count / expected if expected > 0 else float("nan")
    return CapCountResult(points.label[1], cap.radius, cap.center, count, expected, ratio)


def annulus_count(points: PointSet, annulus: AnnulusSpec) -> int:
    center = np.asarray(annulus.center)
    dist2 = _dist2(points, center)
    inside = _strictly_less(points, center, annulus.r_outer, dist2)
    outside = _strictly_greater(points, center, annulus.r_inner, dist2)
    return int((inside & outside).sum())


def equatorial_annulus(n: int, delta: float) -> AnnulusSpec:
    """Annulus about the north pole with R^2, r^2 = 2(1 +- n^-delta)."""
    w = n ** (-delta)
    return AnnulusSpec((0.0, 0.0, 1.0), (2 * (1 - w)) ** 0.5, min(2.0, (2 * (1 + w)) ** 0.5))


# --- Weyl sums ------------------------------------------------------------

def _weyl_numerator(n: int, P: HomogeneousPoly):
    return sum(mobius(q) * q**P.degree * r_P(P, (n // q) ** 2) for q in divisors(n))


def weyl_sum_exact(n: int, P: HomogeneousPoly) -> Fraction:
    """Sum of P over Omega_n via sum_{q | n} mu(q) q^nu r_P(n^2/q^2), divided by n^nu."""
    if not P.is_exact:
        raise TypeError("the exact Weyl sum needs an exact polynomial")
    return Fraction(_weyl_numerator(n, P)) / n**P.degree


def weyl_sum(n: int, P: HomogeneousPoly) -> float:
    return float(_weyl_numerator(n, P)) / n**P.degree


def weyl_sum_direct(points: PointSet, P: HomogeneousPoly):
    """Direct summation of P(m/n) over the points, exact for exact P."""
    total = Fraction(0) if P.is_exact else 0.0
    for m, h in zip(points.numerators.tolist(), points.heights.tolist()):
        total += P([Fraction(t, h) for t in m]) if P.is_exact else P([t / h for t in m])
    return total


# --- variance -------------------------------------------------------------

@dataclass
class VarianceEstimate:
    n: int
    R: float
    num_samples: int
    seed: int
    mean_ratio: float
    variance: float
    std_error: float
    bound: float

    def as_dict(self) -> dict:
        return asdict(self)


def cap_counts(points: PointSet, centers: np.ndarray, R: float) -> np.ndarray:
    """Counts |points in C_R(alpha)| for many centers, chunked."""
    X = points.coords()
    out = np.empty(len(centers), dtype=np.int64)
    rows = max(1, _CHUNK // max(1, len(X)))
    R2 = R * R
    for s in range(0, len(centers), rows):
        C = centers[s : s + rows]
        dist2 = 1.0 + np.einsum("ij,ij->i", C, C)[:, None] - 2.0 * (C @ X.T)
        mask = dist2 < R2
        bi, bj = np.nonzero(np.abs(dist2 - R2) <= GUARD)
        for i, j in zip(bi, bj):
            mask[i, j] = _exact_dist2(points.numerators[j], int(points.heights[j]), C[i]) < Fraction(float(R)) ** 2
        out[s : s + rows] = mask.sum(axis=1)
    return out


def variance_mc(n: int, R: float, num_samples: int, seed: int) -> VarianceEstimate:
    """Monte-Carlo estimate of the integral over alpha of (count/(|Omega_n| mu(C_R)) - 1)^2."""
    if num_samples < 100:
        raise ValueError("need at least 100 samples")
    pts = omega_n(n, 2)
    if len(pts) == 0:
        raise ValueError(f"Omega_{n} is empty")
    expected = len(pts) * cap_measure(R, 2)
    alphas = uniform_sphere(make_rng(seed), num_samples)
    ratios = cap_counts(pts, alphas, R) / expected
    sq = (ratios - 1.0) ** 2
    return VarianceEstimate(
        n=n,
        R=float(R),
        num_samples=num_samples,
        seed=int(seed),
        mean_ratio=float(ratios.mean()),
        variance=float(sq.mean()),
        std_error=float(sq.std(ddof=1) / np.sqrt(num_samples)),
        bound=divisor_count(n) / expected,
    )


def random_cap_ratios(n: int, R: float, num_caps: int, rng: np.random.Generator) -> np.ndarray:
    pts = omega_n(n, 2)
    alphas = uniform_sphere(rng, num_caps)
    return cap_counts(pts, alphas, R) / (len(pts) * cap_measure(R, 2))


@dataclass
class TrendRow:
    n: int
    R: float
    median: float
    iqr: float


def equidistribution_trend(ns, exponent: float, num_caps: int, seed: int) -> tuple[list[TrendRow], float]:
    """Median and interquartile range of count/expected over random caps of radius n^exponent.

    Each n gets its own stream spawned from the master seed.  Returns the rows and the
    least-squares slope of log IQR against log n.
    """
    ns = list(ns)
    streams = np.random.SeedSequence(seed).spawn(len(ns))
    rows = []
    for n, ss in zip(ns, streams):
        R = n**exponent
        r = random_cap_ratios(n, R, num_caps, np.random.Generator(np.random.Philox(ss)))
        q1, med, q3 = np.percentile(r, [25, 50, 75])
        rows.append(TrendRow(n, R, float(med), float(q3 - q1)))
    slope = float(np.polyfit(np.log(ns), np.log([r.iqr for r in rows]), 1)[0]) if len(ns) > 1 else float("nan")
    return rows, slope


# --- covering -------------------------------------------------------------

@dataclass
class CoveringReport:
    label: str
    size: int
    covering_radius: float
    method: str
    grid_size: int
    resolution_error_bound: float

    def as_dict(self) -> dict:
        return asdict(self)


@lru_cache(maxsize=8)
def _grid(K: int) -> tuple[np.ndarray, float]:
    G = fibonacci_sphere(K)
    dist, _ = cKDTree(G).query(G, k=2)
    return G, float(dist[:, 1].max())


def _coords(points) -> np.ndarray:
    return points.coords() if isinstance(points, PointSet) else np.asarray(points, dtype=float)


def _label(points) -> str:
    if isinstance(points, PointSet):
        kind, v = points.label
        return f"Omega_n={v}" if kind == "fixed" else f"Omega_T={v}"
    return "points"


def grid_distances(points, K: int) -> np.ndarray:
    X = _coords(points)
    if len(X) == 0:
        raise ValueError("empty point set")
    G, _ = _grid(K)
    dist, _ = cKDTree(X).query(G, k=1)
    return dist


def covering_radius(points, K: int = 200_000) -> CoveringReport:
    """Largest grid-point distance to the set; the true radius is at most this plus the mesh bound."""
    if K < 1000:
        raise ValueError("grid size must be at least 1000")
    dist = grid_distances(points, K)
    _, mesh = _grid(K)
    return CoveringReport(_label(points), len(_coords(points)), float(dist.max()), "grid", K, mesh)


def uncovered_fraction(points, R: float, K: int = 200_000) -> float:
    """Grid estimate of mu(S^2 minus the union of open caps C_R(x))."""
    return float((grid_distances(points, K) >= R).mean())


def generic_covering_radius(points, epsilon: float, K: int = 200_000) -> float:
    """Least R (to 1e-4) with grid-estimated uncovered fraction <= epsilon."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    dist = grid_distances(points, K)
    lo, hi = 0.0, 2.0
    while hi - lo > 1e-4:
        mid = (lo + hi) / 2
        if (dist >= mid).mean() <= epsilon:
            hi = mid
        else:
            lo = mid
    return hi


def covering_exponent_estimate(reports: list[CoveringReport], d: int = 2) -> tuple[float, float]:
    """Least-squares slope of log|X_N| against -log mu(C_{R_N}), with the RMS residual."""
    if len(reports) < 3:
        raise ValueError("need at least three configurations")
    sizes = [r.size for r in reports]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must increase")
    x = np.array([-log(cap_measure(min(r.covering_radius, 2.0), d)) for r in reports])
    y = np.log(np.array(sizes, dtype=float))
    if np.var(x) == 0:
        raise ValueError("degenerate regression: covering radii do not vary")
    slope, icpt = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
    return float(slope), resid


# --- repulsion ------------------------------------------------------------

def min_repulsion_gap(points: PointSet) -> int:
    """min over distinct pairs of h h' - <m, m'>; |x - x'|^2 = 2 * gap / (h h')."""
    M = points.numerators.astype(np.int64)
    H = points.heights.astype(np.int64)
    gap = H[:, None] * H[None, :] - M @ M.T
    np.fill_diagonal(gap, np.iinfo(np.int64).max)
    return int(gap.min())


# --- Linnik -----------------------------------------------------------------

@dataclass
class LinnikResult:
    n: int
    z_min: int | None
    witness: tuple[int, int, int] | None
    exists: bool


def _primitive_two_squares(m: int, z: int) -> tuple[int, int] | None:
    """First (x, y), x ascending from 1, with x^2 + y^2 = m and gcd(x, y, z) = 1."""
    if m == 0:
        return (0, 0) if abs(z) == 1 else None
    xs = np.arange(1, isqrt(m) + 1, dtype=np.int64)
    rem = m - xs * xs
    ys = np.sqrt(rem.astype(np.float64)).astype(np.int64)
    ys += ((ys + 1) * (ys + 1) <= rem).astype(np.int64)
    ys -= (ys * ys > rem).astype(np.int64)
    hits = np.nonzero(ys * ys == rem)[0]
    for i in hits:
        x, y = int(xs[i]), int(ys[i])
        if gcd(gcd(x, y), z) == 1:
            return x, y
    return None


def linnik_min_z(n: int) -> LinnikResult:
    """Least |z| over primitive solutions of x^2 + y^2 + z^2 = n."""
    if n < 1:
        raise ValueError("n must be positive")
    for z in range(isqrt(n) + 1):
        xy = _primitive_two_squares(n - z * z, z)
        if xy is not None:
            return LinnikResult(n, z, (xy[0], xy[1], z), True)
    return LinnikResult(n, None, None, False)


def linnik_exponent_scan(l_max: int) -> list[dict]:
    if not 3 <= l_max <= 2001:
        raise ValueError("l_max must lie in [3, 2001]")
    rows = []
    for ell in range(3, l_max + 1, 2):
        res = linnik_min_z(ell * ell)
        z = res.z_min
        expo = log(z) / log(ell * ell) if z and z > 0 else (0.0 if z == 1 else None)
        rows.append(
            {
                "ell": ell,
                "n": ell * ell,
                "z_min": z,
                "exponent": expo,
                "trivial": not has_prime_factor_3_mod_4(ell),
                "witness": list(res.witness) if res.witness else None,
            }
        )
    return rows


def dyadic_max_exponent(rows: list[dict]) -> tuple[float, list[tuple[int, int, int]]]:
    """Fit log(max z_min) against log n over dyadic ell-ranges; returns (slope, [(lo, n_at_max, zmax)])."""
    buckets: dict[int, tuple[int, int]] = {}
    for r in rows:
        if not r["z_min"]:
            continue
        k = r["ell"].bit_length() - 1
        best = buckets.get(k)
        if best is None or r["z_min"] > best[1]:
            buckets[k] = (r["n"], r["z_min"])
    pts = [(2**k, n, z) for k, (n, z) in sorted(buckets.items()) if z > 1]
    if len(pts) < 2:
        raise ValueError("not enough dyadic ranges")
    x = np.log([n for _, n, _ in pts])
    y = np.log([z for _, _, z in pts])
    slope = float(np.polyfit(x, y, 1)[0])
    return slope, pts


# --- Diophantine approximation constant --------------------------------------

def diophantine_constant_scan(tau: float, c: float, n_values, num_alpha: int, seed: int) -> dict:
    """Average of |Omega_n cap C_psi(alpha)| / (n^{1-2tau} prod_{p|n}(1 - chi(p)/p)) with psi = c n^-tau."""
    alphas = uniform_sphere(make_rng(seed), num_alpha)
    per_n = {}
    for n in n_values:
        if n % 2 == 0:
            continue
        pts = omega_n(n, 2)
        R = c * n ** (-tau)
        if R > 2:
            continue
        norm = omega_n_count_exact(n) / (6 * n) * n ** (1 - 2 * tau)
        per_n[n] = float(cap_counts(pts, alphas, R).mean() / norm)
    vals = np.array(list(per_n.values()))
    return {
        "tau": tau,
        "c": c,
        "seed": int(seed),
        "num_alpha": num_alpha,
        "empirical_constant": float(vals.mean()),
        "candidate_area_formula": 1.5 * c * c,
        "candidate_stated": 3 * c * c / (2 * np.sqrt(np.pi)),
        "per_n": per_n,
    }

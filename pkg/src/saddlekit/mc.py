"""Monte Carlo estimators over torus moduli and local stratum patches.

Torus sampling draws from the modular fundamental domain (density 1/y^2,
cusp truncated at y_max with the removed mass reported analytically) plus a
uniform rotation.  Stratum sampling perturbs a free set of period
coordinates on a dyadic grid and rejects invalid surfaces; it is a local
Lebesgue patch, never a claim about the global measure.  All estimators are
bit-deterministic for a fixed seed and thread count independent: values are
computed into an index-ordered array and reduced by numpy's fixed pairwise
summation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import kernels
from .errors import AcceptanceRateError, InputError
from .exactplane import ExactVector, FloatMatrix, to_fraction
from .geodesic import enumerate_connections
from .oracle import TorusPoint, siegel_constant_torus
from .surface import TranslationSurface, Triangle, area
from .sv import (
    AnnulusIndicator,
    DiscIndicator,
    ProductPair,
    SectorIndicator,
    TestFunction,
)

RNG_ALGORITHM = "pcg64"

_FUNDAMENTAL_AREA = math.pi / 3  # hyperbolic area of the modular domain


@dataclass(frozen=True)
class HaarSample:
    points: Tuple[TorusPoint, ...]
    seed: int
    y_max: float
    truncated_mass: float
    algorithm: str = RNG_ALGORITHM

    def __len__(self):
        return len(self.points)


def sample_torus_haar(n: int, seed: int, y_max: float = 50.0) -> HaarSample:
    """Unit-covolume lattices distributed per the truncated invariant measure.

    x is uniform on [-1/2, 1/2]; y follows 1/y^2 on [sqrt(3)/2, y_max] by
    CDF inversion; pairs with x^2 + y^2 < 1 are rejected; the frame is spun
    by a uniform rotation.  The mass removed above y_max is (1/y_max) / (pi/3).
    """
    if n < 0:
        raise InputError("sample count must be nonnegative")
    if y_max < 2:
        raise InputError("y_max must be at least 2")
    rng = np.random.default_rng(seed)
    lo = math.sqrt(3.0) / 2.0
    points: List[TorusPoint] = []
    while len(points) < n:
        batch = max(16, int((n - len(points)) * 1.2))
        xs = rng.uniform(-0.5, 0.5, batch)
        us = rng.uniform(0.0, 1.0, batch)
        ys = 1.0 / (1.0 / lo - us * (1.0 / lo - 1.0 / y_max))
        ths = rng.uniform(0.0, 2.0 * math.pi, batch)
        for x, y, th in zip(xs, ys, ths):
            if x * x + y * y < 1.0:
                continue
            if len(points) >= n:
                break
            sy = math.sqrt(y)
            base = FloatMatrix(1.0 / sy, x / sy, 0.0, sy)
            points.append(TorusPoint(FloatMatrix.rotation(th).compose(base)))
    truncated = (1.0 / y_max) / _FUNDAMENTAL_AREA
    return HaarSample(tuple(points), seed, y_max, truncated)


# --- local stratum sampling -------------------------------------------------


def _period_solver(base: TranslationSurface):
    """Free/dependent split of the edge-pair vectors under triangle-sum
    relations, solved once over the rationals.

    Returns (pairs, slot_sign, free_idx, dep_rows) where dep_rows maps each
    dependent pair index to its rational combination of free pairs.
    """
    base.validate()
    pairs = []
    slot_sign = {}
    for slot in base.slots():
        other = base.opposite(slot)
        canon = min(slot, other)
        if canon == slot:
            idx = len(pairs)
            pairs.append(slot)
            slot_sign[slot] = (idx, 1)
    for slot in base.slots():
        if slot not in slot_sign:
            idx, _ = slot_sign[base.opposite(slot)]
            slot_sign[slot] = (idx, -1)
    n_pairs = len(pairs)
    rows = []
    for t in range(base.n_triangles()):
        row = [Fraction(0)] * n_pairs
        for i in range(3):
            idx, sign = slot_sign[(t, i)]
            row[idx] += sign
        rows.append(row)
    # Row reduce; record pivot -> expression in free columns.
    pivots = []
    r = 0
    for col in range(n_pairs):
        pr = None
        for k in range(r, len(rows)):
            if rows[k][col] != 0:
                pr = k
                break
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        pv = rows[r][col]
        rows[r] = [x / pv for x in rows[r]]
        for k in range(len(rows)):
            if k != r and rows[k][col] != 0:
                f = rows[k][col]
                rows[k] = [x - f * y for x, y in zip(rows[k], rows[r])]
        pivots.append((col, r))
        r += 1
        if r == len(rows):
            break
    pivot_cols = {col for col, _ in pivots}
    free_idx = [i for i in range(n_pairs) if i not in pivot_cols]
    dep_rows = {}
    for col, rr in pivots:
        combo = [(j, -rows[rr][j]) for j in free_idx if rows[rr][j] != 0]
        dep_rows[col] = combo
    return pairs, slot_sign, free_idx, dep_rows


@dataclass(frozen=True)
class StratumSample:
    surfaces: Tuple[TranslationSurface, ...]
    seed: int
    spread: Fraction
    attempts: int

    def __len__(self):
        return len(self.surfaces)


def sample_stratum_local(
    base: TranslationSurface,
    spread,
    n: int,
    seed: int,
    grid: int = 1 << 12,
    min_acceptance: float = 0.10,
) -> StratumSample:
    """Perturb free period coordinates by dyadic-grid noise in
    [-spread, spread]^2, rebuild dependent edges, and keep surfaces that
    validate to the base signature."""
    spread = to_fraction(spread)
    if spread < 0:
        raise InputError("spread must be nonnegative")
    signature = base.validate()
    pairs, slot_sign, free_idx, dep_rows = _period_solver(base)
    if len(free_idx) != signature.dim_relative_homology:
        raise InputError(
            f"free period count {len(free_idx)} does not match homology dimension"
        )
    base_vals = [base.edge_vector(slot) for slot in pairs]
    rng = np.random.default_rng(seed)
    out = []
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > max(64, 4 * n) and len(out) < min_acceptance * attempts:
            raise AcceptanceRateError(
                f"acceptance rate {len(out)}/{attempts} below {min_acceptance}",
                accepted=len(out),
                attempts=attempts,
            )
        ks = rng.integers(-grid, grid + 1, size=(len(free_idx), 2))
        vals: List[Optional[ExactVector]] = [None] * len(pairs)
        for j, idx in enumerate(free_idx):
            delta = ExactVector(
                spread * Fraction(int(ks[j, 0]), grid),
                spread * Fraction(int(ks[j, 1]), grid),
            )
            vals[idx] = base_vals[idx] + delta
        for idx, combo in dep_rows.items():
            acc = ExactVector(Fraction(0), Fraction(0))
            for j, coeff in combo:
                acc = acc + vals[j].scale(coeff)
            vals[idx] = acc
        tris = []
        for t in range(base.n_triangles()):
            edges = []
            for i in range(3):
                idx, sign = slot_sign[(t, i)]
                edges.append(vals[idx] if sign > 0 else -vals[idx])
            tris.append(Triangle(tuple(edges)))
        cand = TranslationSurface(tris, dict(base.gluings))
        try:
            sig = cand.validate()
        except Exception:
            continue
        if sig != signature:
            continue
        out.append(cand)
    return StratumSample(tuple(out), seed, spread, attempts)


# --- transform evaluation ---------------------------------------------------


def cusp_disc_integral(radius: float, y_max: float) -> float:
    """Exact integral of the primitive count over the cusp y > y_max.

    For y > max(y_max, 1) the fundamental domain has full unit x-width and
    the lattice rows at heights k sqrt(y) contribute, averaged over the
    uniform x-shift, exactly 2 phi(k)/k sqrt(y (R^2 - k^2 y)) primitive
    points per sign of k.  Integrating rows against dy/y^2 gives the closed
    form below; the central row contributes its two shortest vectors
    whenever y >= 1/R^2.
    """
    from .exactplane import euler_phi

    if y_max <= 1:
        raise InputError("cusp integral needs y_max > 1")
    r = float(radius)
    total = 2.0 * min(r * r, 1.0 / y_max)
    kmax = int(math.floor(r / math.sqrt(y_max)))
    for k in range(1, kmax + 1):
        x = k * math.sqrt(y_max) / r
        if x >= 1.0:
            continue
        total += 4.0 * euler_phi(k) * (
            2.0 * math.sqrt(1.0 - x * x) / x + 2.0 * math.asin(x) - math.pi
        )
    return total


def _cusp_correction_for(f: TestFunction, y_max: float) -> Optional[float]:
    """Analytic cusp integral of the transform for the supported indicator
    shapes, using the rotation-averaged sector fraction."""
    if isinstance(f, DiscIndicator):
        return cusp_disc_integral(float(f.r), y_max)
    if isinstance(f, AnnulusIndicator):
        return cusp_disc_integral(float(f.r2), y_max) - cusp_disc_integral(
            float(f.r1), y_max
        )
    if isinstance(f, SectorIndicator):
        fraction = f.half_angle / math.pi
        return fraction * cusp_disc_integral(float(f.r), y_max)
    return None


def _torus_value(point: TorusPoint, f: TestFunction) -> float:
    g = point.g
    a, b, c, d = (float(x) for x in g.entries())
    if isinstance(f, DiscIndicator):
        return float(kernels.count_primitive_in_disc(a, b, c, d, float(f.r)))
    if isinstance(f, AnnulusIndicator):
        hi = kernels.count_primitive_in_disc(a, b, c, d, float(f.r2))
        lo = kernels.count_primitive_in_disc(a, b, c, d, float(f.r1))
        return float(hi - lo)
    if isinstance(f, SectorIndicator):
        pts = _torus_points_in_disc(a, b, c, d, float(f.support_radius()))
        if pts.shape[0] == 0:
            return 0.0
        vals, amb = f.evaluate_batch(pts[:, 0], pts[:, 1], 1e-12)
        return float(vals[~amb].sum())
    if isinstance(f, ProductPair):
        return _torus_value(point, f.f) * _torus_value(point, f.g)
    raise InputError(f"unsupported test function {type(f).__name__} on torus samples")


def _torus_points_in_disc(a, b, c, d, radius):
    fr = a * a + b * b + c * c + d * d
    det = abs(a * d - b * c)
    bound = int(math.floor(radius * math.sqrt(fr) / det)) + 1
    rng = np.arange(-bound, bound + 1, dtype=np.int64)
    px, py = np.meshgrid(rng, rng, indexing="ij")
    px = px.ravel()
    py = py.ravel()
    prim = np.gcd(np.abs(px), np.abs(py)) == 1
    px, py = px[prim], py[prim]
    ix = a * px + b * py
    iy = c * px + d * py
    keep = ix * ix + iy * iy <= radius * radius
    return np.stack([ix[keep], iy[keep]], axis=1)


def _surface_value(s: TranslationSurface, f: TestFunction, budget=None) -> float:
    """Transform on the area-normalized surface, computed analytically:
    vectors scale by 1/sqrt(area), so membership tests are rescaled
    exactly instead of rescaling the surface."""
    a = area(s)
    if isinstance(f, ProductPair):
        return _surface_value(s, f.f, budget) * _surface_value(s, f.g, budget)
    support_sq = f.support_radius() ** 2 * a
    hs = enumerate_connections(s, radius_sq=support_sq, budget=budget)
    vectors = hs.vectors()
    if isinstance(f, DiscIndicator):
        r_sq = f.r * f.r * a
        return float(sum(1 for v in vectors if v.norm_sq() <= r_sq))
    if isinstance(f, AnnulusIndicator):
        lo_sq = f.r1 * f.r1 * a
        hi_sq = f.r2 * f.r2 * a
        return float(sum(1 for v in vectors if lo_sq < v.norm_sq() <= hi_sq))
    if isinstance(f, SectorIndicator):
        r_sq = f.r * f.r * a
        total = 0
        for v in vectors:
            if v.norm_sq() > r_sq:
                continue
            inside, amb = f.angular_inside(v)  # scale-free
            if inside and not amb:
                total += 1
        return float(total)
    raise InputError(f"unsupported test function {type(f).__name__} on surfaces")


def _values(samples, f: TestFunction, threads: int = 1, budget=None) -> np.ndarray:
    if isinstance(samples, HaarSample):
        items = samples.points
    elif isinstance(samples, StratumSample):
        items = samples.surfaces
    else:
        items = tuple(samples)

    def eval_one(item):
        if isinstance(item, TorusPoint):
            return _torus_value(item, f)
        if isinstance(item, TranslationSurface):
            return _surface_value(item, f, budget)
        raise InputError(f"unsupported sample type {type(item).__name__}")

    out = np.zeros(len(items))
    if threads <= 1 or len(items) < 4:
        for i, item in enumerate(items):
            out[i] = eval_one(item)
        return out
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for i, val in enumerate(pool.map(eval_one, items, chunksize=64)):
            out[i] = val
    return out


def torus_count_values(samples, radius: float, threads: int = 1) -> np.ndarray:
    return _values(samples, DiscIndicator(to_fraction(radius)), threads=threads)


# --- reports -----------------------------------------------------------------


@dataclass(frozen=True)
class SampleReport:
    n_samples: int
    mean: float
    second_moment: float
    variance: float
    ci_radius: float
    seed: Optional[int]
    parameters: Dict[str, object] = field(default_factory=dict)
    algorithm: str = RNG_ALGORITHM

    def to_json_dict(self):
        return {
            "n_samples": self.n_samples,
            "mean": self.mean,
            "second_moment": self.second_moment,
            "variance": self.variance,
            "ci_radius": self.ci_radius,
            "seed": self.seed,
            "algorithm": self.algorithm,
            "parameters": dict(sorted(self.parameters.items())),
        }


def _report_from_values(values: np.ndarray, seed, params) -> SampleReport:
    n = len(values)
    if n == 0:
        return SampleReport(0, 0.0, 0.0, 0.0, 0.0, seed, params)
    mean = float(values.mean())
    second = float((values * values).mean())
    variance = max(second - mean * mean, 0.0)
    ci = 1.96 * math.sqrt(variance / n) if n else 0.0
    return SampleReport(n, mean, second, variance, ci, seed, params)


def estimate_mean_transform(
    samples, f: TestFunction, threads: int = 1, budget=None
) -> SampleReport:
    """Sample mean of the transform.

    For Haar torus samples the reported mean is corrected for the cusp
    truncation: the removed region's contribution has an exact closed form
    (cusp_disc_integral), so mean = [(T - m) mean_trunc + cusp] / T with T
    the full domain mass and m the truncated mass.  The raw truncated mean
    and the correction are echoed in the parameters.
    """
    values = _values(samples, f, threads=threads, budget=budget)
    seed = getattr(samples, "seed", None)
    report = _report_from_values(values, seed, {"f": f.to_json_dict()})
    if isinstance(samples, HaarSample):
        cusp = _cusp_correction_for(f, samples.y_max)
        if cusp is not None:
            total = _FUNDAMENTAL_AREA
            removed = 1.0 / samples.y_max
            corrected = ((total - removed) * report.mean + cusp) / total
            params = dict(report.parameters)
            params.update(
                {
                    "mean_truncated": report.mean,
                    "cusp_integral": cusp,
                    "truncated_mass": samples.truncated_mass,
                }
            )
            report = SampleReport(
                n_samples=report.n_samples,
                mean=corrected,
                second_moment=report.second_moment,
                variance=report.variance,
                ci_radius=report.ci_radius,
                seed=report.seed,
                parameters=params,
            )
    return report


@dataclass(frozen=True)
class VarianceReport:
    radius: float
    l2_hat: float  # second moment of the count
    variance_hat: float  # L(R) - (c pi R^2)^2
    c_sv: float
    count_report: SampleReport

    def to_json_dict(self):
        return {
            "radius": self.radius,
            "l2_hat": self.l2_hat,
            "variance_hat": self.variance_hat,
            "c_sv": self.c_sv,
            "count_report": self.count_report.to_json_dict(),
        }


def estimate_L2_and_variance(
    samples, radius: float, c_sv: Optional[float] = None, threads: int = 1
) -> VarianceReport:
    """Second moment of the counting function and its excess over the
    squared analytic mean c pi R^2."""
    if c_sv is None:
        c_sv = siegel_constant_torus()
    values = torus_count_values(samples, radius, threads=threads)
    rep = _report_from_values(values, getattr(samples, "seed", None), {"radius": radius})
    l_hat = rep.second_moment
    v_hat = l_hat - (c_sv * math.pi * radius * radius) ** 2
    return VarianceReport(radius, l_hat, v_hat, c_sv, rep)


@dataclass(frozen=True)
class TailHistogram:
    thresholds: Tuple[float, ...]  # sqrt(k), k = 1..K
    fractions: Tuple[float, ...]  # empirical exceedance of each threshold
    q_hat: Optional[float]
    fit_residual: Optional[float]
    degenerate: bool
    n_fit_points: int

    def to_json_dict(self):
        return {
            "thresholds": list(self.thresholds),
            "fractions": list(self.fractions),
            "q_hat": self.q_hat,
            "fit_residual": self.fit_residual,
            "degenerate": self.degenerate,
            "n_fit_points": self.n_fit_points,
        }


def tail_histogram(samples, f: TestFunction, k_max: int, threads: int = 1) -> TailHistogram:
    """Exceedance fractions of the transform over sqrt(k) thresholds with a
    power-law fit: slope of log-exceedance against log sqrt(k) over the
    resolvable range (fractions strictly inside (0, 1) with at least 5
    hits)."""
    if k_max < 1:
        raise InputError("k_max must be positive")
    values = _values(samples, f, threads=threads)
    n = len(values)
    thresholds = [math.sqrt(k) for k in range(1, k_max + 1)]
    fractions = [float(np.count_nonzero(values > t)) / n if n else 0.0 for t in thresholds]
    xs = []
    ys = []
    for t, frac in zip(thresholds, fractions):
        if 0.0 < frac < 1.0 and frac * n >= 5:
            xs.append(math.log(t))
            ys.append(math.log(frac))
    if len(xs) < 2 or len(set(ys)) < 2:
        return TailHistogram(tuple(thresholds), tuple(fractions), None, None, True, len(xs))
    A = np.stack([np.array(xs), np.ones(len(xs))], axis=1)
    coeffs, residuals, _, _ = np.linalg.lstsq(A, np.array(ys), rcond=None)
    slope = float(coeffs[0])
    resid = math.sqrt(float(residuals[0]) / len(xs)) if len(residuals) else 0.0
    return TailHistogram(
        tuple(thresholds), tuple(fractions), -slope, resid, False, len(xs)
    )


@dataclass(frozen=True)
class BorelCantelliRow:
    radius: float
    variance_hat: float
    ratio: float  # V / e^2
    partial_sum: float
    error_bound: float  # e(R)
    empirical_exceedance: float
    binomial_ci: float

    def to_json_dict(self):
        return {
            "radius": self.radius,
            "variance_hat": self.variance_hat,
            "ratio": self.ratio,
            "partial_sum": self.partial_sum,
            "error_bound": self.error_bound,
            "empirical_exceedance": self.empirical_exceedance,
            "binomial_ci": self.binomial_ci,
        }


def borel_cantelli_table(
    radii: Sequence[float],
    errors: Sequence[float],
    samples,
    c_sv: Optional[float] = None,
    threads: int = 1,
) -> List[BorelCantelliRow]:
    """Per-radius variance versus squared error budget, with the empirical
    exceedance of |N - c pi R^2| > e(R) alongside its Chebyshev bound."""
    if len(radii) != len(errors):
        raise InputError("radii and errors must have the same length")
    if any(e <= 0 for e in errors):
        raise InputError("error terms must be positive")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise InputError("radii must be strictly increasing")
    if c_sv is None:
        c_sv = siegel_constant_torus()
    rows = []
    partial = 0.0
    for radius, err in zip(radii, errors):
        values = torus_count_values(samples, radius, threads=threads)
        n = len(values)
        mean_target = c_sv * math.pi * radius * radius
        v_hat = float((values * values).mean()) - mean_target ** 2
        ratio = v_hat / (err * err)
        partial += ratio
        exceed = float(np.count_nonzero(np.abs(values - mean_target) > err)) / n
        ci = math.sqrt(max(exceed * (1 - exceed), 0.0) / n) + 1.0 / n
        rows.append(
            BorelCantelliRow(
                radius=float(radius),
                variance_hat=v_hat,
                ratio=ratio,
                partial_sum=partial,
                error_bound=float(err),
                empirical_exceedance=exceed,
                binomial_ci=ci,
            )
        )
    return rows

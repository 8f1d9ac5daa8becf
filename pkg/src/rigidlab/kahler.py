"""Kahler-specific quantities: holomorphic sectional curvature, bounded
geometry (curvature bound + metric upper bound against 1/delta), squeezing
lower bounds, model-space ball volumes, the volume-ratio injectivity bound,
and the rigidity thresholds.

A Kahler field is a chart metric on a domain of C^d (real dimension 2d) that
is invariant under the standard complex structure J on the interleaved
coordinates.  Curvature values of models are always measured through the
engine, never hard-coded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from .domain import Domain, as_point, boundary_distance, c2r
from .errors import (
    ChartIncomplete,
    PositiveCurvatureUnsupported,
    RadiusOutOfRange,
    ZeroVector,
)
from .riemann import (
    MetricField,
    bergman_ball,
    christoffel_curvature,
    euclidean,
    poincare_disk,
)

J_INVARIANCE_TOL = 1e-8
COMPLETENESS_LENGTH = 8.0    # ray length treated as "diverging" at desk scale
COMPLETENESS_DEPTH = 1e-7    # how close to the boundary rays are integrated


# ---------------------------------------------------------------------------
# Kahler fields
# ---------------------------------------------------------------------------

def apply_j(v: np.ndarray) -> np.ndarray:
    """Standard complex structure on interleaved real coordinates."""
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    out[0::2] = -v[1::2]
    out[1::2] = v[0::2]
    return out


@dataclass
class KahlerField:
    metric: MetricField
    complex_dim: int
    name: str

    def j_invariance_defect(self, points, rng=None) -> float:
        rng = np.random.default_rng(23) if rng is None else rng
        worst = 0.0
        for x in points:
            gx = self.metric.g(np.asarray(x, dtype=float))
            for _ in range(4):
                v, w = rng.standard_normal((2, 2 * self.complex_dim))
                lhs = float(apply_j(v) @ gx @ apply_j(w))
                rhs = float(v @ gx @ w)
                worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
        return worst


def poincare_kahler() -> KahlerField:
    return KahlerField(metric=poincare_disk(), complex_dim=1, name="poincare")


def flat_kahler(d: int = 1) -> KahlerField:
    return KahlerField(metric=euclidean(2 * d), complex_dim=d, name="flat")


def bergman_kahler(d: int = 2) -> KahlerField:
    return KahlerField(metric=bergman_ball(d), complex_dim=d, name=f"bergman-ball-{d}")


KAHLER_MODELS = {
    "poincare": poincare_kahler,
    "flat": flat_kahler,
    "bergman-ball": bergman_kahler,
}


# ---------------------------------------------------------------------------
# holomorphic sectional curvature
# ---------------------------------------------------------------------------

def hol_sectional(k: KahlerField, z, X) -> float:
    """Sectional curvature of the J-invariant plane spanned by X and JX."""
    X = np.asarray(X, dtype=float)
    if np.linalg.norm(X) == 0:
        raise ZeroVector("holomorphic sectional curvature of the zero vector")
    x = np.asarray(z, dtype=float)
    cd = christoffel_curvature(k.metric, x)
    return cd.sectional(X, apply_j(X))


# ---------------------------------------------------------------------------
# bounded-geometry estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BGReport:
    kappa_est: float   # sup |sectional| over sampled 2-planes
    A_est: float       # sup sqrt(g(v,v)) * delta(z) / |v|
    a_est: float       # inf sqrt(g(v,v)) / |v|
    complete: bool     # ray-length divergence surrogate
    passed: bool
    n_points: int
    n_directions: int


def property_bg_estimate(k: KahlerField, dom: Domain, n_points: int = 40,
                         n_directions: int = 6, seed: int = 31,
                         extra_points=()) -> BGReport:
    """Sampled bounded-geometry constants of an invariant metric.

    PASS means: curvature and upper constant finite, lower constant positive.
    Completeness is a separate flag (rays toward the boundary accumulate at
    least ``COMPLETENESS_LENGTH`` of metric length).
    """
    rng = np.random.default_rng(seed)
    d = k.complex_dim
    m = k.metric

    pts = [np.zeros(2 * d)]
    for p in extra_points:
        pts.append(c2r(as_point(p, d)))
    while len(pts) < n_points:
        w = rng.standard_normal(2 * d)
        x = rng.uniform(0.05, 0.995) * w / np.linalg.norm(w)
        if dom.contains(x[0::2] + 1j * x[1::2]):
            pts.append(x)

    kappa = 0.0
    A_est = 0.0
    a_est = math.inf
    for x in pts:
        if not m.chart_contains(x):
            raise ChartIncomplete(f"sample {x} misses the chart of {m.name}")
        z = x[0::2] + 1j * x[1::2]
        delta = boundary_distance(dom, z)
        cd = christoffel_curvature(m, x)
        gx = cd.gx
        for _ in range(n_directions):
            v = rng.standard_normal(2 * d)
            gnorm = math.sqrt(float(v @ gx @ v))
            vnorm = float(np.linalg.norm(v))
            A_est = max(A_est, gnorm * delta / vnorm)
            a_est = min(a_est, gnorm / vnorm)
            w = rng.standard_normal(2 * d)
            try:
                kappa = max(kappa, abs(cd.sectional(v, w)))
            except ValueError:
                continue
        for i in range(2 * d):
            for j in range(i + 1, 2 * d):
                kappa = max(kappa, abs(cd.sectional(np.eye(2 * d)[i], np.eye(2 * d)[j])))

    complete = _rays_diverge(k, dom, rng)
    passed = bool(math.isfinite(kappa) and math.isfinite(A_est) and a_est > 0)
    return BGReport(kappa_est=kappa, A_est=A_est, a_est=a_est, complete=complete,
                    passed=passed, n_points=len(pts), n_directions=n_directions)


def _rays_diverge(k: KahlerField, dom: Domain, rng, n_rays: int = 4) -> bool:
    """Metric length of straight rays from the center toward the boundary."""
    d = k.complex_dim
    m = k.metric
    for _ in range(n_rays):
        w = rng.standard_normal(2 * d)
        u = w / np.linalg.norm(w)
        # ray hit of the boundary
        lo, hi = 0.0, 2.0 * dom.bounding_radius
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if dom.contains(mid * u[0::2] + 1j * mid * u[1::2]):
                lo = mid
            else:
                hi = mid
        t_max = lo * (1.0 - COMPLETENESS_DEPTH)
        ts = t_max * (1.0 - np.geomspace(1.0, 1e-7, 400))
        length = 0.0
        prev = 0.0
        for t in ts[1:]:
            xm = 0.5 * (t + prev) * u
            seg = (t - prev) * math.sqrt(float(u @ m.g(xm) @ u))
            length += seg
            prev = t
            if length >= COMPLETENESS_LENGTH:
                break
        if length < COMPLETENESS_LENGTH:
            return False
    return True


# ---------------------------------------------------------------------------
# squeezing lower bound
# ---------------------------------------------------------------------------

def circumradius(dom: Domain, z, samples: int = 4096, seed: int = 37) -> float:
    """Max distance from ``z`` to the boundary (attained at an extreme point)."""
    z = dom.require_inside(z)
    kind = dom.kind
    if kind in ("disk", "ball"):
        return 1.0 + float(np.linalg.norm(z))
    if kind == "polydisk":
        return float(np.sqrt(np.sum((1.0 + np.abs(z)) ** 2)))
    if kind == "ellipsoid":
        return _ellipsoid_circumradius(dom, z)
    rng = np.random.default_rng(seed)
    best = 0.0
    d = dom.dimension
    for _ in range(samples):
        w = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        xi = _scaled(dom, w)
        best = max(best, float(np.linalg.norm(xi - z)))
    return best


def _ellipsoid_circumradius(dom, z) -> float:
    """Maximize ``|w - z|`` over the boundary; phases align against ``z``,
    leaving a small real problem over the moduli."""
    from scipy.optimize import minimize

    m = np.asarray(dom.exponents, dtype=float)
    zm = np.abs(np.asarray(z, dtype=complex))

    def negobj(x):
        return -float(np.sum((np.maximum(x, 0.0) + zm) ** 2))

    def constraint(x):
        return float(np.sum(np.maximum(x, 0.0) ** (2 * m)) - 1.0)

    best = 0.0
    for seed_axis in range(len(m)):
        x0 = np.full(len(m), 0.1)
        x0[seed_axis] = 0.9
        res = minimize(negobj, x0, method="SLSQP",
                       bounds=[(0.0, None)] * len(m),
                       constraints=[{"type": "eq", "fun": constraint}],
                       options={"maxiter": 300, "ftol": 1e-14})
        if res.success:
            best = max(best, math.sqrt(-res.fun))
    return best


def _scaled(dom: Domain, w: np.ndarray) -> np.ndarray:
    """Point of the boundary on the ray through ``w`` (for sampling)."""
    u = w / np.linalg.norm(c2r(w))
    lo, hi = 0.0, 2.0 * dom.bounding_radius
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if dom.contains(mid * u):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi) * u


def squeezing_lower_bound(dom: Domain, z) -> float:
    """Inradius over circumradius: a valid lower bound for the squeezing
    function via the affine map scaling ``Omega - z`` into the unit ball."""
    z = dom.require_inside(z)
    rho_in = boundary_distance(dom, z)
    rho_out = circumradius(dom, z)
    return rho_in / rho_out


# ---------------------------------------------------------------------------
# model volumes and the injectivity lower bound
# ---------------------------------------------------------------------------

def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2.0) / gamma_fn(n / 2.0 + 1.0)


def unit_sphere_area(n: int) -> float:
    """Area of S^{n-1} in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / gamma_fn(n / 2.0)


def model_volume(n: int, lam: float, r: float) -> float:
    """Volume of the radius-``r`` ball in the constant-curvature model space."""
    if r <= 0:
        raise RadiusOutOfRange("radius must be positive")
    if lam > 0:
        raise PositiveCurvatureUnsupported("only lambda <= 0 is needed here")
    if lam == 0:
        return unit_ball_volume(n) * r**n
    s = math.sqrt(-lam)
    integrand = lambda t: (math.sinh(s * t) / s) ** (n - 1)
    val, _ = quad(integrand, 0.0, r, epsabs=1e-12, epsrel=1e-12)
    return unit_sphere_area(n) * val


def cgt_inj_lower(vol_ball: float, kappa: float, r: float, d: int) -> float:
    """Volume-ratio lower bound for the injectivity radius:
    ``inj >= (r/2) V / (V + V_{-kappa}^{2d}(2r))`` for ``r < pi/(4 sqrt(kappa))``."""
    if vol_ball <= 0:
        raise RadiusOutOfRange("the metric ball volume must be positive")
    if not r < math.pi / (4.0 * math.sqrt(kappa)):
        raise RadiusOutOfRange(f"need r < pi/(4 sqrt(kappa)) = {math.pi / (4 * math.sqrt(kappa)):.4f}")
    return 0.5 * r * vol_ball / (vol_ball + model_volume(2 * d, -kappa, 2.0 * r))


# ---------------------------------------------------------------------------
# rigidity thresholds
# ---------------------------------------------------------------------------

def rigidity_threshold(d: int, kappa: float, A: float, theta: float,
                       positive_injectivity: bool = False) -> float:
    """Contact-order threshold ``4d + 2 + sqrt(kappa) A / sin(theta)``, or
    ``2 + sqrt(kappa) A / sin(theta)`` when the injectivity radius is positive.

    Invariant under the metric rescaling ``(kappa, A) -> (lam kappa, A / sqrt(lam))``.
    """
    if d < 1 or kappa <= 0 or A <= 0 or not (0 < theta <= math.pi / 2):
        raise ValueError("need d >= 1, kappa > 0, A > 0, theta in (0, pi/2]")
    base = 2.0 + math.sqrt(kappa) * A / math.sin(theta)
    return base if positive_injectivity else 4.0 * d + base

"""Complex geodesics, good left inverses, and boundary-extension probes.

Model constructions:

* disk: Moebius automorphisms (exact isometries);
* ball: affine discs cut out by complex lines, which are totally geodesic;
  their good left inverses are built by conjugating a coordinate projection
  with a ball automorphism, so the fibers are hyperplane slices;
* polydisk: coordinatewise geodesics when one coordinate realizes the max;
* general convex domains: maximally scaled affine chord discs, returned as
  upper-bound candidates together with a measured isometry defect.

The defect of a candidate is the worst gap between the disk distance of the
parameters and the certified distance interval of the images, so exact
geodesics have defect at machine scale while chord candidates report an
honest figure of merit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .domain import (
    BallDomain,
    DiskDomain,
    Domain,
    EllipsoidDomain,
    Hyperplane,
    PolydiskDomain,
    as_point,
    boundary_data,
    c2r,
    herm,
)
from .errors import (
    CoincidentPoints,
    NoConstructiveInverse,
    NoConvergence,
    NumericDefectTooLarge,
)
from .intervals import DistInterval
from .kobayashi import disk_distance, dist_bounds

DEFECT_SAMPLE_PAIRS = 40
DEFECT_SAMPLE_RADIUS = 0.9
MODEL_DEFECT_TOL = 1e-10


# ---------------------------------------------------------------------------
# disk Moebius maps and the hyperbolic translation flow
# ---------------------------------------------------------------------------

def mobius_flow(t: float, z: complex) -> complex:
    """One-parameter hyperbolic translation group of the disk fixing +/-1."""
    ch, sh = math.cosh(t), math.sinh(t)
    return (ch * z + sh) / (sh * z + ch)


def disk_automorphism(center: complex, phase: complex = 1.0) -> Callable[[complex], complex]:
    """z -> (center + phase * z) / (1 + conj(center) * phase * z)."""

    def mob(zeta: complex) -> complex:
        w = phase * zeta
        return (center + w) / (1.0 + np.conj(center) * w)

    return mob


def ball_involution(a: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """The automorphism of the unit ball swapping ``a`` and the origin."""
    a = np.asarray(a, dtype=complex)
    a2 = float(np.sum(np.abs(a) ** 2))
    if a2 >= 1.0:
        raise ValueError("base point must lie in the open ball")
    if a2 == 0.0:
        return lambda z: -np.asarray(z, dtype=complex)
    s = math.sqrt(1.0 - a2)

    def phi(z):
        z = np.asarray(z, dtype=complex)
        pa = (herm(z, a) / a2) * a
        qa = z - pa
        return (a - pa - s * qa) / (1.0 - herm(z, a))

    return phi


# ---------------------------------------------------------------------------
# complex geodesics
# ---------------------------------------------------------------------------

@dataclass
class ComplexGeodesic:
    """Holomorphic disc ``phi : D -> Omega`` with an isometry certificate."""

    dom: Domain
    func: Callable[[complex], np.ndarray]
    tag: str  # DiskAuto | BallAffineSlice | PolydiskMax | ConvexNumeric
    params: dict = field(default_factory=dict)
    defect: float = math.nan

    def __call__(self, zeta: complex) -> np.ndarray:
        return self.func(zeta)

    def measure_defect(self, pairs: int = DEFECT_SAMPLE_PAIRS, seed: int = 5) -> float:
        """Worst containment gap of K_D(a, b) in the image distance interval."""
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(pairs):
            a, b = [
                DEFECT_SAMPLE_RADIUS * math.sqrt(rng.uniform()) * np.exp(2j * math.pi * rng.uniform())
                for _ in range(2)
            ]
            if abs(a - b) < 1e-9:
                continue
            iv = dist_bounds(self.dom, self.func(a), self.func(b))
            worst = max(worst, iv.gap_to(disk_distance(a, b)))
        self.defect = worst
        return worst


def complex_geodesic(dom: Domain, z, w, defect_tol: float = MODEL_DEFECT_TOL) -> ComplexGeodesic:
    """Complex geodesic (or certified candidate) through two points."""
    z = dom.require_inside(z)
    w = dom.require_inside(w)
    if np.allclose(z, w, atol=1e-14, rtol=0):
        raise CoincidentPoints("need two distinct points")

    if isinstance(dom, DiskDomain):
        geo = _disk_geodesic(dom, z[0], w[0])
    elif isinstance(dom, BallDomain):
        geo = _ball_geodesic(dom, z, w)
    elif isinstance(dom, PolydiskDomain):
        geo = _polydisk_geodesic(dom, z, w)
    else:
        geo = _chord_disc_candidate(dom, z, w)

    geo.measure_defect(pairs=12 if geo.tag == "ConvexNumeric" else DEFECT_SAMPLE_PAIRS)
    if geo.tag != "ConvexNumeric" and geo.defect > defect_tol:
        raise NumericDefectTooLarge(f"defect {geo.defect:.2e} on a model geodesic")
    return geo


def _disk_geodesic(dom, z: complex, w: complex) -> ComplexGeodesic:
    t = (w - z) / (1.0 - np.conj(z) * w)
    phase = t / abs(t)
    mob = disk_automorphism(z, phase)
    return ComplexGeodesic(
        dom=dom,
        func=lambda zeta: np.array([mob(zeta)]),
        tag="DiskAuto",
        params={"center": z, "phase": phase, "t_w": abs(t)},
    )


def _ball_geodesic(dom, z: np.ndarray, w: np.ndarray) -> ComplexGeodesic:
    u = w - z
    u = u / np.linalg.norm(u)
    off = herm(z, u)
    a = z - off * u
    rho = math.sqrt(max(0.0, 1.0 - float(np.sum(np.abs(a) ** 2))))

    def phi(zeta):
        return a + rho * zeta * u

    return ComplexGeodesic(
        dom=dom,
        func=phi,
        tag="BallAffineSlice",
        params={"center": a, "radius": rho, "direction": u,
                "zeta_z": off / rho, "zeta_w": herm(w, u) / rho},
    )


def _polydisk_geodesic(dom, z: np.ndarray, w: np.ndarray) -> ComplexGeodesic:
    t = np.array([(wj - zj) / (1.0 - np.conj(zj) * wj) for zj, wj in zip(z, w)])
    mags = np.abs(t)
    jstar = int(np.argmax(mags))
    tstar = mags[jstar]
    mobs = []
    for j in range(dom.dimension):
        phase = t[j] / mags[j] if mags[j] > 0 else 1.0
        scale = mags[j] / tstar
        mobs.append((disk_automorphism(z[j], phase), scale))

    def phi(zeta):
        return np.array([mob(scale * zeta) for mob, scale in mobs])

    return ComplexGeodesic(
        dom=dom,
        func=phi,
        tag="PolydiskMax",
        params={"coordinate": jstar, "t_w": tstar,
                "mobius": mobs, "distinct": bool(np.sum(mags > tstar - 1e-12) == 1)},
    )


def _chord_disc_candidate(dom, z: np.ndarray, w: np.ndarray) -> ComplexGeodesic:
    """Affine disc on the chord line, center optimized for maximal radius."""
    from .kobayashi import line_boundary_distance

    u = w - z
    chord = float(np.linalg.norm(u))
    u = u / chord

    def center_of(s):
        return z + (s[0] + 1j * s[1]) * chord * u

    def objective(s):
        c = center_of(s)
        if not dom.contains(c):
            return 1.0
        rho = line_boundary_distance(dom, c, u)
        # both source parameters must stay well inside the disc
        zz = herm(z - c, u) / rho
        zw = herm(w - c, u) / rho
        if max(abs(zz), abs(zw)) >= 0.999:
            return 1.0 - rho * 1e-3
        return -rho

    best = None
    for s0 in ([0.5, 0.0], [0.25, 0.0], [0.75, 0.0]):
        res = minimize(objective, np.asarray(s0), method="Nelder-Mead",
                       options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": 160})
        if best is None or res.fun < best.fun:
            best = res
    c = center_of(best.x)
    rho = line_boundary_distance(dom, c, u)

    def phi(zeta):
        return c + rho * zeta * u

    return ComplexGeodesic(
        dom=dom,
        func=phi,
        tag="ConvexNumeric",
        params={"center": c, "radius": rho, "direction": u,
                "zeta_z": herm(z - c, u) / rho, "zeta_w": herm(w - c, u) / rho},
    )


# ---------------------------------------------------------------------------
# good left inverses
# ---------------------------------------------------------------------------

@dataclass
class LeftInverse:
    """Holomorphic retraction ``pi : Omega -> D`` with hyperplane fibers."""

    dom: Domain
    func: Callable[[np.ndarray], complex]
    fiber: Callable[[complex], Hyperplane]

    def __call__(self, z) -> complex:
        return self.func(as_point(z, self.dom.dimension))


def left_inverse(geo: ComplexGeodesic, dom: Domain | None = None) -> LeftInverse:
    """Construct a good left inverse of a model geodesic.

    Chord candidates on general convex domains expose no construction, so
    they raise :class:`NoConstructiveInverse`.
    """
    dom = geo.dom if dom is None else dom

    if geo.tag == "DiskAuto":
        center, phase = geo.params["center"], geo.params["phase"]

        def pi(zv):
            zc = zv[0]
            return ((zc - center) / (1.0 - np.conj(center) * zc)) / phase

        def fiber(zeta):
            p = geo(zeta)
            return Hyperplane(anchor=p, normal=np.array([1.0 + 0j]))

        inv = LeftInverse(dom=dom, func=pi, fiber=fiber)

    elif geo.tag == "BallAffineSlice":
        a = geo.params["center"]
        inv = _ball_slice_inverse(dom, geo, a)

    elif geo.tag == "PolydiskMax":
        if not geo.params["distinct"]:
            raise NoConstructiveInverse("polydisk inverse needs a strictly maximal coordinate")
        j = geo.params["coordinate"]
        mobj, _ = geo.params["mobius"][j]

        def pi(zv):
            return _mobius_param(mobj, zv[j])

        def fiber(zeta):
            e = np.zeros(dom.dimension, dtype=complex)
            e[j] = 1.0
            return Hyperplane(anchor=geo(zeta), normal=e)

        inv = LeftInverse(dom=dom, func=pi, fiber=fiber)

    elif geo.tag == "ConvexNumeric" and isinstance(dom, EllipsoidDomain):
        inv = _ellipsoid_axis_inverse(dom, geo)

    else:
        raise NoConstructiveInverse(f"no constructive left inverse for tag {geo.tag!r}")

    return inv


def _mobius_param(mob: Callable[[complex], complex], value: complex) -> complex:
    """Invert ``mob`` (a disk automorphism built by disk_automorphism)."""
    center = mob(0.0)
    # mob(zeta) = (center + phase zeta) / (1 + conj(center) phase zeta)
    phase = (mob(1e-3) - center) / (1e-3 * (1 - np.conj(center) * mob(1e-3)))
    phase = phase / abs(phase)
    return ((value - center) / (1.0 - np.conj(center) * value)) / phase


def _ball_slice_inverse(dom, geo, a):
    phi_a = ball_involution(a)
    # psi = phi_a o geo is a linear geodesic zeta -> zeta e
    e = phi_a(geo(0.5)) / 0.5
    e = e / np.linalg.norm(e)

    def pi(zv):
        return herm(phi_a(zv), e)

    # complex-orthonormal completion of e
    d = dom.dimension
    rng = np.random.default_rng(17)
    cols = [e] + [rng.standard_normal(d) + 1j * rng.standard_normal(d) for _ in range(d - 1)]
    q, _ = np.linalg.qr(np.column_stack(cols))
    comp = [q[:, k] for k in range(1, d)]

    def fiber(zeta):
        anchor = phi_a(zeta * e)
        if d == 1:
            return Hyperplane(anchor=anchor, normal=np.array([1.0 + 0j]))
        # push points of {<w, e> = zeta} through the involution and fit the image hyperplane
        pts = []
        for f in comp:
            for t in (0.05, -0.05, 0.05j):
                pts.append(phi_a(zeta * e + t * f))
        diffs = np.array([p - anchor for p in pts])
        _, _, vh = np.linalg.svd(diffs)
        # rows satisfy diffs @ conj(v) = 0, i.e. <row, v> = 0 for v = vh[-1]
        normal = vh[-1]
        return Hyperplane(anchor=anchor, normal=normal / np.linalg.norm(normal))

    return LeftInverse(dom=dom, func=pi, fiber=fiber)


def _ellipsoid_axis_inverse(dom, geo):
    """Coordinate projection for axis slices of an ellipsoid through 0."""
    c = geo.params["center"]
    u = geo.params["direction"]
    axis = np.argmax(np.abs(u))
    aligned = abs(np.abs(u[axis]) - 1.0) < 1e-9 and np.linalg.norm(c) < 1e-9
    if not aligned:
        raise NoConstructiveInverse("only axis slices through the center are constructive")
    rho = geo.params["radius"]
    phase = u[axis]

    def pi(zv):
        return zv[axis] / (rho * phase)

    def fiber(zeta):
        e = np.zeros(dom.dimension, dtype=complex)
        e[axis] = 1.0
        return Hyperplane(anchor=geo(zeta), normal=e)

    return LeftInverse(dom=dom, func=pi, fiber=fiber)


# ---------------------------------------------------------------------------
# Gromov products
# ---------------------------------------------------------------------------

def gromov_product(dom: Domain, z, w, o) -> DistInterval:
    """Interval for ``(z|w)_o = (K(z,o) + K(o,w) - K(z,w)) / 2``."""
    izo = dist_bounds(dom, z, o)
    iow = dist_bounds(dom, o, w)
    izw = dist_bounds(dom, z, w)
    lower = max(0.0, 0.5 * (izo.lower + iow.lower - izw.upper))
    upper = 0.5 * (izo.upper + iow.upper - izw.lower)
    upper = min(upper, izo.upper, iow.upper)  # triangle inequality cap
    return DistInterval(lower, max(lower, upper))


# ---------------------------------------------------------------------------
# boundary hyperplane probes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProbeResult:
    hyperplane: Hyperplane
    radii: np.ndarray
    residuals: np.ndarray
    normal_angles: np.ndarray  # angle of each step's tangent plane to the limit
    decay_ok: bool


def default_radii_schedule(k_max: int = 20) -> np.ndarray:
    return 1.0 - 2.0 ** (-np.arange(1, k_max + 1, dtype=float))


def boundary_hyperplane_probe(geo: ComplexGeodesic, dom: Domain | None = None,
                              zeta: complex = 1.0, radii: np.ndarray | None = None,
                              tol: float = 1e-7) -> ProbeResult:
    """Estimate the limiting supporting hyperplane of ``phi`` at ``zeta``.

    Evaluates ``phi(r zeta)`` along the schedule, projects to the boundary,
    and averages the tangent hyperplanes of the deepest projections; the
    residual at each step is the distance from ``phi(r zeta)`` to the contact
    set of the estimated hyperplane.
    """
    dom = geo.dom if dom is None else dom
    zeta = complex(zeta)
    zeta = zeta / abs(zeta)
    radii = default_radii_schedule() if radii is None else np.asarray(radii, dtype=float)

    points, planes = [], []
    for r in radii:
        p = geo(r * zeta)
        points.append(p)
        q = dom.project_to_boundary(p)
        planes.append(boundary_data(dom, q, tol=1e-6).tangent_hyperplane)

    # average the outward normals of the deepest tail, phases aligned
    tail = planes[-5:]
    ref = tail[-1].normal
    acc = np.zeros_like(ref)
    for pl in tail:
        c = herm(ref, pl.normal)
        phase = c / abs(c) if abs(c) > 0 else 1.0
        acc = acc + pl.normal * phase
    normal = acc / np.linalg.norm(acc)
    limit = Hyperplane(anchor=tail[-1].anchor, normal=normal)

    residuals = np.array([_distance_to_contact_set(dom, limit, p) for p in points])
    angles = np.array([pl.angle_to(limit) for pl in planes])

    tail_res = residuals[-8:]
    decay_ok = bool(np.all(np.diff(tail_res) <= tol)) and tail_res[-1] <= tail_res[0] + tol
    if not decay_ok and residuals[-1] > 10 * tol:
        raise NoConvergence("probe residuals do not settle")
    return ProbeResult(hyperplane=limit, radii=radii, residuals=residuals,
                       normal_angles=angles, decay_ok=decay_ok)


def _distance_to_contact_set(dom: Domain, plane: Hyperplane, p: np.ndarray) -> float:
    """Distance from ``p`` to ``boundary(Omega) intersect plane``."""
    x0 = c2r(np.asarray(plane.anchor, dtype=complex))
    pr = c2r(np.asarray(p, dtype=complex))

    def offset_parts(x):
        off = plane.offset(np.array(x[0::2]) + 1j * np.array(x[1::2]))
        return [off.real, off.imag]

    res = minimize(
        lambda x: np.sum((x - pr) ** 2),
        x0,
        method="SLSQP",
        constraints=[
            {"type": "eq", "fun": lambda x: dom.defining(x[0::2] + 1j * x[1::2])},
            {"type": "eq", "fun": lambda x: offset_parts(x)[0]},
            {"type": "eq", "fun": lambda x: offset_parts(x)[1]},
        ],
        options={"maxiter": 120, "ftol": 1e-14},
    )
    if res.success:
        return float(np.linalg.norm(res.x - pr))
    return float(np.linalg.norm(c2r(plane.anchor) - pr))

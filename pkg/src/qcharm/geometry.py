"""Jordan curves: arc-length parametrization, tangent angles, chord-arc geometry.

Curves are stored as positively oriented closed sample loops, optionally
backed by an exact analytic parametrization (circle, ellipse, square,
kidney).  ``arclength_parametrize`` produces a unit-speed interpolant
``g(s)`` together with the continuous tangent-angle lift ``theta`` with
``theta(s + L) = theta(s) + 2*pi``.  The chord-arc constant is estimated
by stratified pair sampling: all pairs on a coarse equispaced station
grid, then local refinement around the running maximizer.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import minimize_scalar

TWO_PI = 2.0 * math.pi

# Consecutive tangent change above this marks a corner (non-C1 input).
CORNER_TURN_RAD = math.radians(10.0)


class CurveError(ValueError):
    """Invalid or degenerate curve input."""


class TangentUndefinedError(CurveError):
    """Tangent requested on a non-C1 curve; carries the nearest corner position."""

    def __init__(self, message: str, corner_s: float):
        super().__init__(message)
        self.corner_s = corner_s


def _signed_area(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * float(np.sum(x * yn - xn * y))


def _segments_cross(p1, p2, q1, q2) -> bool:
    d1 = np.cross(p2 - p1, q1 - p1)
    d2 = np.cross(p2 - p1, q2 - p1)
    d3 = np.cross(q2 - q1, p1 - q1)
    d4 = np.cross(q2 - q1, p2 - q1)
    return bool((d1 * d2 < 0) and (d3 * d4 < 0))


def _has_self_intersection(pts: np.ndarray) -> bool:
    """O(n^2) proper-crossing test on a (possibly subsampled) closed polygon."""
    n = len(pts)
    if n > 512:
        step = int(np.ceil(n / 512))
        pts = pts[::step]
        n = len(pts)
    closed = np.vstack([pts, pts[:1]])
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue  # adjacent around the wrap
            if _segments_cross(closed[i], closed[i + 1], closed[j], closed[j + 1]):
                return True
    return False


@dataclass(frozen=True)
class JordanCurve:
    """Closed rectifiable planar curve, traversed once, positively oriented.

    ``samples`` is an open ring (the first point is not repeated).  Named
    analytic curves additionally carry ``position``/``velocity`` callables in
    a 2*pi-periodic parameter u, plus a C1 flag and any corner positions (in
    the u parameter).
    """

    samples: np.ndarray
    param_kind: str  # "analytic-named" | "polyline-samples"
    name: str = ""
    params: dict = field(default_factory=dict)
    c1: bool = False
    position: Optional[Callable] = None
    velocity: Optional[Callable] = None
    corners_u: tuple = ()

    def __post_init__(self):
        pts = np.asarray(self.samples, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
            raise CurveError("curve needs at least 3 planar sample points")
        gaps = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
        scale = float(gaps.sum())
        if not np.isfinite(scale) or scale <= 0:
            raise CurveError("degenerate curve: zero or non-finite length")
        if np.any(gaps < 1e-14 * scale):
            raise CurveError("consecutive samples coincide")
        area = _signed_area(pts)
        if abs(area) < 1e-12 * scale * scale:
            raise CurveError("degenerate curve: vanishing enclosed area (not a Jordan curve)")
        if area < 0:
            warnings.warn("negatively oriented curve input; reversing to positive orientation")
            object.__setattr__(self, "samples", pts[::-1].copy())
        else:
            object.__setattr__(self, "samples", pts)
        if self.param_kind == "polyline-samples" and _has_self_intersection(self.samples):
            raise CurveError("self-intersection detected in curve samples")

    @property
    def length(self) -> float:
        """Polygonal length of the stored sample loop."""
        pts = self.samples
        return float(np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1).sum())

    def as_complex(self) -> np.ndarray:
        return self.samples[:, 0] + 1j * self.samples[:, 1]


def _sampled(position: Callable, n: int) -> np.ndarray:
    u = TWO_PI * np.arange(n) / n
    z = position(u)
    return np.column_stack([z.real, z.imag])


def circle(radius: float = 1.0, center: complex = 0j, n: int = 1024) -> JordanCurve:
    if radius <= 0:
        raise CurveError("radius must be positive")
    pos = lambda u: center + radius * np.exp(1j * np.asarray(u, dtype=float))
    vel = lambda u: 1j * radius * np.exp(1j * np.asarray(u, dtype=float))
    return JordanCurve(_sampled(pos, n), "analytic-named", name="circle",
                       params={"radius": radius, "center": [center.real, center.imag]},
                       c1=True, position=pos, velocity=vel)


def ellipse(a: float = 2.0, b: float = 1.0, n: int = 1024) -> JordanCurve:
    if a <= 0 or b <= 0:
        raise CurveError("semi-axes must be positive")
    pos = lambda u: a * np.cos(np.asarray(u, dtype=float)) + 1j * b * np.sin(np.asarray(u, dtype=float))
    vel = lambda u: -a * np.sin(np.asarray(u, dtype=float)) + 1j * b * np.cos(np.asarray(u, dtype=float))
    return JordanCurve(_sampled(pos, n), "analytic-named", name="ellipse",
                       params={"a": a, "b": b}, c1=True, position=pos, velocity=vel)


def kidney(dimple: float = 0.8, n: int = 1024) -> JordanCurve:
    """Dimpled limacon r(u) = 1 + dimple*cos(u): smooth, non-convex for dimple in (0.5, 1)."""
    if not 0 < dimple < 1:
        raise CurveError("dimple must lie in (0, 1) to stay a Jordan curve")

    def pos(u):
        u = np.asarray(u, dtype=float)
        return (1.0 + dimple * np.cos(u)) * np.exp(1j * u)

    def vel(u):
        u = np.asarray(u, dtype=float)
        return (-dimple * np.sin(u) + 1j * (1.0 + dimple * np.cos(u))) * np.exp(1j * u)

    return JordanCurve(_sampled(pos, n), "analytic-named", name="kidney",
                       params={"dimple": dimple}, c1=True, position=pos, velocity=vel)


def square(side: float = 1.0, corner: complex = 0j, n: int = 1024) -> JordanCurve:
    """Axis-aligned square traversed counterclockwise from its lower-left corner."""
    if side <= 0:
        raise CurveError("side must be positive")
    n = max(8, n - n % 4)

    def pos(u):
        u = np.mod(np.asarray(u, dtype=float), TWO_PI)
        s = 4.0 * side * u / TWO_PI  # arc position in [0, 4*side)
        s = np.atleast_1d(s)
        out = np.empty(s.shape, dtype=complex)
        k = np.floor(s / side).astype(int)
        loc = s - k * side
        out[k == 0] = loc[k == 0]
        out[k == 1] = side + 1j * loc[k == 1]
        out[k == 2] = (side - loc[k == 2]) + 1j * side
        out[k == 3] = 1j * (side - loc[k == 3])
        out = out + corner
        return out if out.size > 1 else out[0]

    return JordanCurve(_sampled(pos, n), "analytic-named", name="square",
                       params={"side": side, "corner": [corner.real, corner.imag]},
                       c1=False, position=pos, velocity=None,
                       corners_u=(0.0, TWO_PI / 4, TWO_PI / 2, 3 * TWO_PI / 4))


def from_points(points, name: str = "") -> JordanCurve:
    pts = np.asarray(points, dtype=float)
    if len(pts) > 3 and np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    return JordanCurve(pts, "polyline-samples", name=name or "samples")


NAMED_CURVES = {"circle": circle, "ellipse": ellipse, "square": square, "kidney": kidney}


def curve_from_json(obj) -> JordanCurve:
    """Curve file schema: {"kind": "named"|"samples", "name": ..., "params": {...}, "points": [[x,y],...]}."""
    if isinstance(obj, (str, bytes)):
        obj = json.loads(obj)
    kind = obj.get("kind")
    if kind == "named":
        name = obj.get("name")
        if name not in NAMED_CURVES:
            raise CurveError(f"unknown named curve {name!r}; known: {sorted(NAMED_CURVES)}")
        params = dict(obj.get("params", {}))
        if "center" in params:
            params["center"] = complex(*params["center"])
        if "corner" in params:
            params["corner"] = complex(*params["corner"])
        return NAMED_CURVES[name](**params)
    if kind == "samples":
        return from_points(obj["points"], name=obj.get("name", ""))
    raise CurveError(f"unknown curve kind {kind!r}")


def load_curve(path) -> JordanCurve:
    with open(path, "r", encoding="utf-8") as fh:
        return curve_from_json(json.load(fh))


def curve_to_json(curve: JordanCurve) -> dict:
    if curve.param_kind == "analytic-named":
        return {"kind": "named", "name": curve.name, "params": curve.params}
    return {"kind": "samples", "name": curve.name, "points": curve.samples.tolist()}


# ---------------------------------------------------------------------------
# Arc-length parametrization


@dataclass
class ArcLengthParam:
    """Unit-speed parametrization of a Jordan curve.

    ``g(s)`` returns positions for any real s (L-periodic); ``theta(s)`` is
    the continuous tangent-angle lift, only available on C1 curves.
    """

    L: float
    n: int
    stations: np.ndarray
    points: np.ndarray  # complex positions at the stations
    c1: bool
    corners: tuple = ()
    _g: Callable = None
    _theta: Callable = None  # lift on [0, L); None on non-C1 curves
    _theta_raw: Callable = None  # staircase fallback, diagnostics only

    def g(self, s):
        s = np.asarray(s, dtype=float)
        return self._g(np.mod(s, self.L))

    def theta(self, s):
        if self._theta is None:
            s0 = float(np.atleast_1d(s)[0])
            corner = self.nearest_corner(s0)
            raise TangentUndefinedError(
                f"tangent undefined: curve has a corner near s = {corner:.6g}", corner)
        s = np.asarray(s, dtype=float)
        wraps = np.floor(s / self.L)
        return self._theta(s - wraps * self.L) + TWO_PI * wraps

    def nearest_corner(self, s: float) -> float:
        if not self.corners:
            return float("nan")
        cs = np.asarray(self.corners)
        d = np.abs(np.mod(cs - s + self.L / 2, self.L) - self.L / 2)
        return float(cs[np.argmin(d)])

    def locate(self, point: complex) -> float:
        """Arc-length position of the closest curve point to ``point``."""
        d = np.abs(self.points - point)
        i = int(np.argmin(d))
        ds = self.L / self.n
        lo, hi = self.stations[i] - ds, self.stations[i] + ds
        res = minimize_scalar(lambda s: abs(self.g(s) - point) ** 2,
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14 * self.L})
        return float(np.mod(res.x, self.L))


def _gauss_segment_lengths(vel: Callable, u_edges: np.ndarray) -> np.ndarray:
    """Arc length of each [u_i, u_{i+1}] segment by 7-point Gauss-Legendre."""
    nodes, wts = np.polynomial.legendre.leggauss(7)
    a, b = u_edges[:-1], u_edges[1:]
    mid, half = (a + b) / 2, (b - a) / 2
    u = mid[:, None] + half[:, None] * nodes[None, :]
    speed = np.abs(vel(u.ravel())).reshape(u.shape)
    return half * (speed @ wts)


def _param_analytic(curve: JordanCurve, n: int) -> ArcLengthParam:
    dense = max(4096, 4 * n)
    u_edges = np.linspace(0.0, TWO_PI, dense + 1)
    seg = _gauss_segment_lengths(curve.velocity, u_edges)
    s_edges = np.concatenate([[0.0], np.cumsum(seg)])
    L = float(s_edges[-1])
    u_of_s = PchipInterpolator(s_edges, u_edges)

    def g(s_mod):
        return curve.position(u_of_s(np.clip(s_mod, 0.0, L)))

    theta_fn = None
    if curve.c1:
        th = np.unwrap(np.angle(curve.velocity(u_edges)))
        lift = PchipInterpolator(s_edges, th)
        theta_fn = lambda s_mod: lift(np.clip(s_mod, 0.0, L))

    stations = np.arange(n) * (L / n)
    pts = np.asarray(g(stations), dtype=complex)
    corners = tuple(float(s_edges[np.searchsorted(u_edges, cu)]) for cu in curve.corners_u)
    return ArcLengthParam(L=L, n=n, stations=stations, points=pts, c1=curve.c1,
                          corners=corners, _g=g, _theta=theta_fn)


def _param_square(curve: JordanCurve, n: int) -> ArcLengthParam:
    side = curve.params["side"]
    corner = complex(*curve.params["corner"]) if isinstance(curve.params.get("corner"), list) \
        else curve.params.get("corner", 0j)
    L = 4.0 * side

    def g(s_mod):
        u = TWO_PI * np.asarray(s_mod) / L
        return curve.position(u)

    def theta_raw(s_mod):
        k = np.floor(np.asarray(s_mod) / side)
        return (math.pi / 2) * k

    stations = np.arange(n) * (L / n)
    pts = np.asarray(g(stations), dtype=complex)
    return ArcLengthParam(L=L, n=n, stations=stations, points=pts, c1=False,
                          corners=(0.0, side, 2 * side, 3 * side),
                          _g=g, _theta=None, _theta_raw=theta_raw)


def _param_polyline(curve: JordanCurve, n: int) -> ArcLengthParam:
    z = curve.as_complex()
    zc = np.concatenate([z, z[:1]])
    seg = np.abs(np.diff(zc))
    s_edges = np.concatenate([[0.0], np.cumsum(seg)])
    L = float(s_edges[-1])

    def g(s_mod):
        s_mod = np.clip(s_mod, 0.0, L)
        i = np.clip(np.searchsorted(s_edges, s_mod, side="right") - 1, 0, len(seg) - 1)
        t = (s_mod - s_edges[i]) / seg[i]
        return zc[i] + t * (zc[i + 1] - zc[i])

    ang = np.unwrap(np.angle(np.diff(zc)))
    turns = np.abs(np.diff(np.concatenate([ang, [ang[0] + TWO_PI]])))
    c1 = bool(np.max(turns) <= CORNER_TURN_RAD)
    theta_fn = None
    corners = ()
    if c1:
        mids = 0.5 * (s_edges[:-1] + s_edges[1:])
        xs = np.concatenate([[mids[0] - seg[0]], mids, [mids[-1] + seg[-1]]])
        ys = np.concatenate([[ang[0] - (ang[0] + TWO_PI - ang[-1])], ang, [ang[-1] + (ang[0] + TWO_PI - ang[-1])]])
        lift = PchipInterpolator(xs, ys)
        theta_fn = lambda s_mod: lift(np.clip(s_mod, xs[0], xs[-1]))
    else:
        corners = tuple(float(s_edges[i + 1]) for i in range(len(seg) - 1) if turns[i] > CORNER_TURN_RAD)

    stations = np.arange(n) * (L / n)
    pts = np.asarray(g(stations), dtype=complex)
    return ArcLengthParam(L=L, n=n, stations=stations, points=pts, c1=c1,
                          corners=corners, _g=g, _theta=theta_fn)


def arclength_parametrize(curve: JordanCurve, n: int = 1024) -> ArcLengthParam:
    """Resample ``curve`` at n equispaced arc-length stations.

    Named analytic curves use their exact parametrization (arc length by
    high-order per-segment quadrature, inverted with a monotone cubic);
    polylines use cumulative chord length.  theta is returned only for C1
    curves; polyline tangents are piecewise constant and flagged non-C1
    when any turn exceeds the corner threshold.
    """
    if n < 16:
        raise CurveError("need at least 16 arc-length stations")
    if curve.param_kind == "analytic-named":
        if curve.name == "square":
            return _param_square(curve, n)
        return _param_analytic(curve, n)
    return _param_polyline(curve, n)


def tangent_angle(param: ArcLengthParam, s) -> float:
    """Continuous tangent-angle lift theta(s); raises on non-C1 curves."""
    out = param.theta(s)
    return float(out) if np.ndim(s) == 0 else out


# ---------------------------------------------------------------------------
# Chord-arc constant


@dataclass(frozen=True)
class ChordArcResult:
    constant: float
    pair: tuple
    pair_s: tuple

    def __float__(self):
        return self.constant


def _best_pair(points: np.ndarray, stations: np.ndarray, L: float):
    ds = np.abs(stations[:, None] - stations[None, :])
    arc = np.minimum(ds, L - ds)
    chord = np.abs(points[:, None] - points[None, :])
    mask = chord > 1e-12 * L
    if not mask.any():
        raise CurveError("all sampled chords degenerate")
    ratio = np.where(mask, arc / np.where(mask, chord, 1.0), 0.0)
    i, j = np.unravel_index(np.argmax(ratio), ratio.shape)
    return float(ratio[i, j]), float(stations[i]), float(stations[j])


def chord_arc_constant(curve: JordanCurve, pair_budget: int = 200_000) -> ChordArcResult:
    """Estimate M = sup (shorter-arc length)/(chord length) by pair sampling.

    Stratified: all pairs on a power-of-two coarse station grid sized from
    ``pair_budget`` (nested grids keep the estimate monotone in the budget),
    then three local refinement rounds around the running maximizer.
    """
    if pair_budget < 1000:
        raise CurveError("pair_budget must be at least 1000")
    n0 = 2 ** int(math.floor(math.log2(math.sqrt(2.0 * pair_budget))))
    n0 = max(32, min(n0, 2048))
    param = arclength_parametrize(curve, max(1024, n0))
    L = param.L
    stations = np.arange(n0) * (L / n0)
    points = np.asarray(param.g(stations), dtype=complex)
    best, si, sj = _best_pair(points, stations, L)

    window = L / n0
    for _ in range(3):
        gi = np.mod(np.linspace(si - window, si + window, 65), L)
        gj = np.mod(np.linspace(sj - window, sj + window, 65), L)
        pi, pj = np.asarray(param.g(gi)), np.asarray(param.g(gj))
        ds = np.abs(gi[:, None] - gj[None, :])
        arc = np.minimum(np.mod(ds, L), L - np.mod(ds, L))
        chord = np.abs(pi[:, None] - pj[None, :])
        mask = chord > 1e-12 * L
        ratio = np.where(mask, arc / np.where(mask, chord, 1.0), 0.0)
        a, b = np.unravel_index(np.argmax(ratio), ratio.shape)
        if ratio[a, b] > best:
            best, si, sj = float(ratio[a, b]), float(gi[a]), float(gj[b])
        window /= 8.0

    return ChordArcResult(constant=max(best, 1.0),
                          pair=(complex(param.g(si)), complex(param.g(sj))),
                          pair_s=(si, sj))


def open_polyline_chord_arc(points: np.ndarray):
    """Chord-arc constant of an open polyline (single arc between each pair)."""
    z = np.asarray(points, dtype=complex)
    seg = np.abs(np.diff(z))
    if np.any(seg < 1e-15 * max(seg.sum(), 1e-300)):
        raise CurveError("degenerate trace: consecutive points coincide")
    s = np.concatenate([[0.0], np.cumsum(seg)])
    arc = np.abs(s[:, None] - s[None, :])
    chord = np.abs(z[:, None] - z[None, :])
    iu = np.triu_indices(len(z), k=1)
    ratio = arc[iu] / chord[iu]
    k = int(np.argmax(ratio))
    return float(ratio[k]), (int(iu[0][k]), int(iu[1][k]))


def is_convex(curve: JordanCurve) -> bool:
    """True iff all consecutive unit-edge cross products share one sign (tol -1e-12)."""
    pts = curve.samples
    e = np.roll(pts, -1, axis=0) - pts
    e = e / np.linalg.norm(e, axis=1)[:, None]
    en = np.roll(e, -1, axis=0)
    cross = e[:, 0] * en[:, 1] - e[:, 1] * en[:, 0]
    return bool(np.all(cross >= -1e-12))

"""Poisson kernel and spectral harmonic maps of the unit disk.

A disk harmonic map is stored through the complex Fourier coefficients
c_n, |n| <= N, of its boundary function f*.  Interior evaluation uses the
spectral form of the Poisson integral,

    f(r e^{i phi}) = sum_n c_n r^{|n|} e^{i n phi},

which splits into the analytic parts a(z) = sum_{n>=0} c_n z^n and
b(z) = sum_{n>=1} conj(c_{-n}) z^n with f = a + conj(b).  Wirtinger
derivatives, the angular derivative, and the boundary-derivative weight
w(t) = |d/dt f*(e^{it})| all come from coefficient multipliers; direct
quadrature of the Poisson integral is kept only as the slow reference
route for cross-checking.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .weights import WeightProfile

TWO_PI = 2.0 * math.pi

#: relative tail-energy threshold for the sampling-adequacy flag
TAIL_ENERGY_TOL = 1e-8


class DomainError(ValueError):
    """Evaluation requested outside the open unit disk."""


@dataclass(frozen=True)
class DiskPoint:
    """Interior point z = r e^{i phi}, 0 <= r < 1."""

    r: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.r < 1.0:
            raise DomainError(f"interior point needs 0 <= r < 1, got r = {self.r}")

    @property
    def z(self) -> complex:
        return self.r * complex(math.cos(self.phi), math.sin(self.phi))


def poisson_kernel(r, x):
    """P(r, x) = (1 - r^2) / (2 pi (1 - 2 r cos x + r^2)); requires 0 <= r < 1."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r >= 1):
        raise DomainError("Poisson kernel needs 0 <= r < 1")
    x = np.asarray(x, dtype=float)
    out = (1.0 - r * r) / (TWO_PI * (1.0 - 2.0 * r * np.cos(x) + r * r))
    return float(out) if out.ndim == 0 else out


def _horner(coeffs_low_to_high: np.ndarray, z: np.ndarray) -> np.ndarray:
    acc = np.full_like(z, coeffs_low_to_high[-1], dtype=complex)
    for c in coeffs_low_to_high[-2::-1]:
        acc = acc * z + c
    return acc


class HarmonicMap:
    """Truncated-spectrum harmonic map of the unit disk.

    coeffs is indexed n = -N..N; ``grid`` caches the 2N boundary samples
    f*(e^{i t_j}), t_j = pi j / N, reconstructed from the coefficients.
    """

    __slots__ = ("coeffs", "N", "grid", "label")

    def __init__(self, coeffs, label: str = ""):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim != 1 or len(coeffs) % 2 != 1 or len(coeffs) < 3:
            raise ValueError("coeffs must be a flat odd-length array indexed n = -N..N")
        self.coeffs = coeffs
        self.N = len(coeffs) // 2
        self.label = label
        self.grid = self._synthesize_grid()

    # -- construction -----------------------------------------------------

    @classmethod
    def from_boundary_samples(cls, samples, label: str = "") -> "HarmonicMap":
        samples = np.asarray(samples, dtype=complex)
        M = len(samples)
        if M < 8 or M & (M - 1):
            raise ValueError("boundary sample count must be a power of two >= 8")
        N = M // 2
        F = np.fft.fft(samples) / M
        coeffs = np.zeros(2 * N + 1, dtype=complex)
        coeffs[N:2 * N] = F[:N]            # n = 0..N-1
        coeffs[1:N] = F[N + 1:]            # n = -(N-1)..-1
        coeffs[0] = coeffs[2 * N] = F[N] / 2.0  # split shared Nyquist bin
        return cls(coeffs, label=label)

    def _synthesize_grid(self) -> np.ndarray:
        M = 2 * self.N
        bins = np.zeros(M, dtype=complex)
        n = np.arange(-self.N, self.N + 1)
        np.add.at(bins, np.mod(n, M), self.coeffs)
        return np.fft.ifft(bins) * M

    # -- coefficient views -------------------------------------------------

    def coef(self, n: int) -> complex:
        if abs(n) > self.N:
            return 0j
        return complex(self.coeffs[self.N + n])

    @property
    def a_coeffs(self) -> np.ndarray:
        """Taylor coefficients of a(z), degree 0..N."""
        return self.coeffs[self.N:]

    @property
    def b_conj_coeffs(self) -> np.ndarray:
        """Coefficients c_{-n}, n = 1..N, of conj(b)(z) = sum c_{-n} conj(z)^n."""
        return self.coeffs[self.N - 1::-1]

    @property
    def tail_energy_ratio(self) -> float:
        e = np.abs(self.coeffs) ** 2
        total = float(e.sum())
        if total == 0:
            return 0.0
        n = np.arange(-self.N, self.N + 1)
        return float(e[np.abs(n) > self.N // 2].sum()) / total

    @property
    def tail_ok(self) -> bool:
        return self.tail_energy_ratio < TAIL_ENERGY_TOL

    # -- pointwise evaluation ----------------------------------------------

    def eval_points(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        a = _horner(self.a_coeffs, z)
        zb = np.conj(z)
        bbar = zb * _horner(self.b_conj_coeffs, zb)
        return a + bbar

    def wirtinger_points(self, z):
        """(f_z, f_zbar) at interior points: a'(z) and conj(b'(z))."""
        z = np.asarray(z, dtype=complex)
        n = np.arange(1, self.N + 1)
        fz = _horner(n * self.a_coeffs[1:], z)
        fzb = _horner(n * self.b_conj_coeffs, np.conj(z))
        return fz, fzb

    def dphi_points(self, z) -> np.ndarray:
        fz, fzb = self.wirtinger_points(z)
        z = np.asarray(z, dtype=complex)
        return 1j * z * fz - 1j * np.conj(z) * fzb

    def dr_points(self, z) -> np.ndarray:
        """d f / d r = e^{i phi} f_z + e^{-i phi} f_zbar (undefined at z = 0)."""
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        if np.any(r == 0):
            raise DomainError("radial derivative undefined at z = 0")
        e = z / r
        fz, fzb = self.wirtinger_points(z)
        return e * fz + np.conj(e) * fzb

    # -- uniform-circle evaluation (exact, via FFT) --------------------------

    def _circle_ifft(self, bins: np.ndarray, n_phi: int | None) -> np.ndarray:
        M = 2 * self.N
        vals = np.fft.ifft(bins) * M
        if n_phi is None or n_phi == M:
            return vals
        if M % n_phi:
            raise ValueError("n_phi must divide the boundary grid size 2N")
        return vals[:: M // n_phi]

    def eval_circle(self, r: float, n_phi: int | None = None) -> np.ndarray:
        """f at the uniform angle grid of size n_phi on radius r (r < 1, or 1 for the grid)."""
        if not 0.0 <= r <= 1.0:
            raise DomainError("radius must lie in [0, 1]")
        M = 2 * self.N
        bins = np.zeros(M, dtype=complex)
        n = np.arange(-self.N, self.N + 1)
        np.add.at(bins, np.mod(n, M), self.coeffs * r ** np.abs(n))
        return self._circle_ifft(bins, n_phi)

    def dphi_circle(self, r: float, n_phi: int | None = None) -> np.ndarray:
        M = 2 * self.N
        bins = np.zeros(M, dtype=complex)
        n = np.arange(-self.N, self.N + 1)
        np.add.at(bins, np.mod(n, M), 1j * n * self.coeffs * r ** np.abs(n))
        return self._circle_ifft(bins, n_phi)

    def wirtinger_circle(self, r: float, n_phi: int | None = None):
        M = 2 * self.N
        n = np.arange(1, self.N + 1)
        bins_z = np.zeros(M, dtype=complex)
        np.add.at(bins_z, np.mod(n - 1, M), n * self.a_coeffs[1:] * r ** (n - 1))
        bins_zb = np.zeros(M, dtype=complex)
        np.add.at(bins_zb, np.mod(-(n - 1), M), n * self.b_conj_coeffs * r ** (n - 1))
        return self._circle_ifft(bins_z, n_phi), self._circle_ifft(bins_zb, n_phi)

    # -- boundary operations -------------------------------------------------

    def boundary_values(self, t) -> np.ndarray:
        """Boundary-limit series sum_n c_n e^{int} at arbitrary angles."""
        t = np.asarray(t, dtype=float)
        e = np.exp(1j * t)
        a = _horner(self.a_coeffs, e)
        bbar = np.conj(e) * _horner(self.b_conj_coeffs, np.conj(e))
        return a + bbar

    def boundary_derivative(self) -> np.ndarray:
        """Samples of d/dt f*(e^{it}) on the boundary grid (Fourier multiplier i*n)."""
        return self.dphi_circle(1.0)

    def boundary_weight(self) -> WeightProfile:
        """Weight w(t_j) = |d/dt f*(e^{i t_j})| on the 2N-point boundary grid."""
        w = np.abs(self.boundary_derivative())
        if np.all(w < 1e-300):
            raise ValueError("degenerate boundary data: weight vanishes identically")
        return WeightProfile(w)

    # -- diagnostics -----------------------------------------------------------

    def parts_residual(self) -> float:
        """max over the grid of |f - (a + conj b)| (coefficient-synthesis consistency)."""
        e = np.exp(1j * TWO_PI * np.arange(2 * self.N) / (2 * self.N))
        recomb = _horner(self.a_coeffs, e) + np.conj(e) * _horner(self.b_conj_coeffs, np.conj(e))
        return float(np.max(np.abs(self.grid - recomb)))

    # -- persistence -------------------------------------------------------------

    def to_json(self) -> dict:
        return {"N": self.N,
                "coeffs": [[c.real, c.imag] for c in self.coeffs],
                "label": self.label}

    @classmethod
    def from_json(cls, obj) -> "HarmonicMap":
        if isinstance(obj, (str, bytes)):
            obj = json.loads(obj)
        pairs = np.asarray(obj["coeffs"], dtype=float)
        coeffs = pairs[:, 0] + 1j * pairs[:, 1]
        if len(coeffs) != 2 * int(obj["N"]) + 1:
            raise ValueError("coefficient file: length must be 2N+1")
        return cls(coeffs, label=obj.get("label", ""))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path) -> "HarmonicMap":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


# ---------------------------------------------------------------------------
# Spec-level operations on (map, point)


def evaluate(fmap: HarmonicMap, p: DiskPoint) -> complex:
    """Interior value of the harmonic extension at p (spectral Poisson form)."""
    return complex(fmap.eval_points(np.asarray(p.z)))


def d_phi(fmap: HarmonicMap, p: DiskPoint) -> complex:
    """Angular derivative d f / d phi at an interior point."""
    return complex(fmap.dphi_points(np.asarray(p.z)))


def d_r(fmap: HarmonicMap, p: DiskPoint) -> complex:
    """Radial derivative d f / d r at an interior point (p.r > 0)."""
    return complex(fmap.dr_points(np.asarray(p.z)))


def wirtinger(fmap: HarmonicMap, p: DiskPoint):
    """(f_z, f_zbar) at an interior point."""
    fz, fzb = fmap.wirtinger_points(np.asarray(p.z))
    return complex(fz), complex(fzb)


def boundary_weight(fmap: HarmonicMap) -> WeightProfile:
    return fmap.boundary_weight()


def poisson_integral_direct(fmap: HarmonicMap, r: float, phi: float) -> complex:
    """Reference route: trapezoid quadrature of the Poisson integral over the grid."""
    if not 0.0 <= r < 1.0:
        raise DomainError("interior evaluation needs r < 1")
    M = 2 * fmap.N
    t = TWO_PI * np.arange(M) / M
    return complex(np.sum(poisson_kernel(r, t - phi) * fmap.grid) * (TWO_PI / M))


def dphi_integral_direct(fmap: HarmonicMap, r: float, phi: float) -> complex:
    """Reference route for d_phi: Poisson quadrature against the boundary derivative."""
    if not 0.0 <= r < 1.0:
        raise DomainError("interior evaluation needs r < 1")
    M = 2 * fmap.N
    t = TWO_PI * np.arange(M) / M
    return complex(np.sum(poisson_kernel(r, t - phi) * fmap.boundary_derivative()) * (TWO_PI / M))


def dist_to_boundary(fmap: HarmonicMap, z, oversample: int = 8):
    """min |f(z) - boundary| against the polygonal image boundary, resampled at 8N points.

    The boundary polyline comes from the map's own grid refined spectrally.
    """
    M = 2 * fmap.N * oversample
    # spectral upsample: zero-pad the coefficient bins to M
    bins = np.zeros(M, dtype=complex)
    n = np.arange(-fmap.N, fmap.N + 1)
    np.add.at(bins, np.mod(n, M), fmap.coeffs)
    boundary = np.fft.ifft(bins) * M
    vals = fmap.eval_points(np.asarray(z, dtype=complex))
    vals = np.atleast_1d(vals)
    out = np.empty(vals.shape, dtype=float)
    for i, v in enumerate(vals.ravel()):
        out.ravel()[i] = np.min(np.abs(boundary - v))
    return float(out) if out.size == 1 else out

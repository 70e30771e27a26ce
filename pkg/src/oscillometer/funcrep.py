"""Function representations shared by all spaces: samples on the circle and
torus, truncated power series on the disc, box grids in R^n, plus the
elementary evaluations (arc averages, derivatives, disc automorphisms,
ambient norms, polar quadrature) everything else is built from.

Grids are uniform with power-of-two size so trapezoid sums double as exact
spectral quadrature and DFT smoothing stays alias-free for band-limited data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, NumericalError

TWO_PI = 2.0 * np.pi


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


# ---------------------------------------------------------------------------
# circle samples and arcs
# ---------------------------------------------------------------------------

class PeriodicSamples:
    """Complex samples of a function on the uniform circle grid theta_j = 2*pi*j/N.

    N must be a power of two, at least 8.  Instances are immutable; arithmetic
    returns new objects.
    """

    def __init__(self, values):
        values = np.asarray(values, dtype=complex)
        if values.ndim != 1:
            raise ConfigError("PeriodicSamples expects a 1-d array")
        n = values.shape[0]
        if n < 8 or not _is_pow2(n):
            raise ConfigError(f"grid size must be a power of two >= 8, got {n}")
        values.setflags(write=False)
        self.values = values
        self.n = n
        self.step = TWO_PI / n
        self._sums: Optional[_CircleSums] = None

    @property
    def thetas(self) -> np.ndarray:
        return np.arange(self.n) * self.step

    def mean(self) -> complex:
        return complex(self.values.mean())

    def sums(self) -> "_CircleSums":
        if self._sums is None:
            self._sums = _CircleSums(self.values)
        return self._sums

    def scaled(self, c) -> "PeriodicSamples":
        return PeriodicSamples(self.values * c)

    def __mul__(self, c) -> "PeriodicSamples":
        return self.scaled(c)

    __rmul__ = __mul__

    def __add__(self, other: "PeriodicSamples") -> "PeriodicSamples":
        self._check_same_grid(other)
        return PeriodicSamples(self.values + other.values)

    def __sub__(self, other: "PeriodicSamples") -> "PeriodicSamples":
        self._check_same_grid(other)
        return PeriodicSamples(self.values - other.values)

    def _check_same_grid(self, other) -> None:
        if not isinstance(other, PeriodicSamples) or other.n != self.n:
            raise ConfigError("circle samples live on different grids")


@dataclass(frozen=True)
class Arc:
    """Arc of the circle given by midpoint angle and length.

    length lies in (0, 2*pi]; all full-circle arcs are identified (their
    midpoint is canonicalised to 0).
    """

    midpoint: float
    length: float

    def __post_init__(self):
        if not (0.0 < self.length <= TWO_PI + 1e-12):
            raise ConfigError(f"arc length must lie in (0, 2*pi], got {self.length}")
        length = min(self.length, TWO_PI)
        midpoint = self.midpoint % TWO_PI
        if length == TWO_PI:
            midpoint = 0.0
        object.__setattr__(self, "length", float(length))
        object.__setattr__(self, "midpoint", float(midpoint))


class _CircleSums:
    """Prefix sums on the doubled circle grid: O(1) trapezoid window sums.

    window(start, ncells) is the trapezoid sum of the stored samples over the
    node range [start, start + ncells] with wrap-around, times the grid step.
    """

    def __init__(self, values: np.ndarray):
        self.n = values.shape[0]
        self.step = TWO_PI / self.n
        cum = np.empty(2 * self.n + 1, dtype=values.dtype)
        cum[0] = 0
        np.cumsum(values, out=cum[1:self.n + 1])
        cum[self.n + 1:] = cum[1:self.n + 1] + cum[self.n]
        self._cum = cum

    def window(self, start, ncells: int):
        """Trapezoid integral over ncells cells starting at node index `start`.

        `start` may be an integer or an integer array; indices are taken mod N.
        """
        start = np.asarray(start, dtype=np.int64) % self.n
        if ncells < 1 or ncells > self.n:
            raise ConfigError(f"window of {ncells} cells outside [1, {self.n}]")
        c = self._cum
        plain = c[start + ncells + 1] - c[start]
        ends = (c[start + 1] - c[start]) + (c[start + ncells + 1] - c[start + ncells])
        return (plain - 0.5 * ends) * self.step


def snap_arc(samples: PeriodicSamples, arc: Arc) -> tuple[int, int]:
    """Snap arc endpoints to the nearest grid nodes.

    Returns (start_node, ncells).  Arcs spanning fewer than 2 cells after
    snapping are rejected.
    """
    h = samples.step
    start = int(np.rint((arc.midpoint - arc.length / 2.0) / h))
    ncells = int(np.rint(arc.length / h))
    ncells = min(ncells, samples.n)
    if ncells < 2:
        raise ConfigError("arc under-resolved")
    return start % samples.n, ncells


def arc_average(f: PeriodicSamples, arc: Arc) -> complex:
    """Trapezoid approximation of the mean of f over the arc.

    Endpoints snap to grid nodes; the mean is taken over the snapped length so
    constants average exactly to themselves.
    """
    start, ncells = snap_arc(f, arc)
    total = f.sums().window(start, ncells)
    return complex(total / (ncells * f.step))


# ---------------------------------------------------------------------------
# torus samples
# ---------------------------------------------------------------------------

class TorusSamples:
    """Complex samples on the uniform N x N grid of the 2-torus."""

    def __init__(self, values):
        values = np.asarray(values, dtype=complex)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ConfigError("TorusSamples expects a square 2-d array")
        n = values.shape[0]
        if n < 8 or not _is_pow2(n):
            raise ConfigError(f"grid size must be a power of two >= 8, got {n}")
        values.setflags(write=False)
        self.values = values
        self.n = n
        self.step = TWO_PI / n

    def scaled(self, c) -> "TorusSamples":
        return TorusSamples(self.values * c)

    def __mul__(self, c) -> "TorusSamples":
        return self.scaled(c)

    __rmul__ = __mul__

    def __sub__(self, other: "TorusSamples") -> "TorusSamples":
        if not isinstance(other, TorusSamples) or other.n != self.n:
            raise ConfigError("torus samples live on different grids")
        return TorusSamples(self.values - other.values)

    def __add__(self, other: "TorusSamples") -> "TorusSamples":
        if not isinstance(other, TorusSamples) or other.n != self.n:
            raise ConfigError("torus samples live on different grids")
        return TorusSamples(self.values + other.values)


# ---------------------------------------------------------------------------
# truncated power series on the unit disc
# ---------------------------------------------------------------------------

def _tail_radius(coeffs: np.ndarray, tol: float = 1e-8) -> float:
    """Largest radius where the geometric tail bound from the last retained
    coefficient stays below tol."""
    mags = np.abs(coeffs)
    c = mags[-1] if mags.size and mags[-1] > 0 else mags.max(initial=0.0)
    if c == 0.0:
        return 1.0
    n = coeffs.size
    lo, hi = 0.0, 1.0 - 1e-15
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if c * mid ** (n + 1) / (1.0 - mid) <= tol:
            lo = mid
        else:
            hi = mid
    return lo


class TaylorFunction:
    """Analytic function on the disc held as truncated Taylor coefficients
    a_1..a_N (no constant term stored in `coeffs`), optionally backed by
    closed-form value/derivative evaluators.

    `const` carries a constant offset for the one space that admits f(0) != 0;
    the analytic-space norms ignore it (they act modulo constants).  Without
    closed forms, evaluation is trusted only up to `radius_cap`, the radius
    where the geometric truncation-tail estimate exceeds 1e-8.
    """

    def __init__(self, coeffs=None, value_fn: Optional[Callable] = None,
                 deriv_fn: Optional[Callable] = None, const: complex = 0.0,
                 radius_cap: Optional[float] = None):
        if coeffs is None and (value_fn is None or deriv_fn is None):
            raise ConfigError("TaylorFunction needs coefficients or closed forms")
        if coeffs is not None:
            coeffs = np.asarray(coeffs, dtype=complex)
            if coeffs.ndim != 1:
                raise ConfigError("coefficients must be a 1-d array")
            coeffs.setflags(write=False)
        self.coeffs = coeffs
        self.value_fn = value_fn
        self.deriv_fn = deriv_fn
        self.const = complex(const)
        if radius_cap is None:
            radius_cap = _tail_radius(coeffs) if coeffs is not None else 1.0
        self.radius_cap = float(radius_cap)

    @classmethod
    def polynomial(cls, coeffs, const: complex = 0.0) -> "TaylorFunction":
        """Exact polynomial: no truncation tail, evaluable everywhere."""
        return cls(coeffs, const=const, radius_cap=np.inf)

    @property
    def has_closed_form(self) -> bool:
        return self.value_fn is not None and self.deriv_fn is not None

    @property
    def evaluable_on_disc(self) -> bool:
        """True when values are trusted on the whole closed disc (closed form
        present, or an exact polynomial with no truncation tail)."""
        return self.has_closed_form or (self.coeffs is not None
                                        and self.radius_cap >= 1.0)

    def _check_radius(self, z: np.ndarray) -> None:
        r = np.abs(z)
        if np.any(r > self.radius_cap + 1e-13):
            raise ConfigError(
                f"evaluation at |z| = {r.max():.6g} beyond trusted radius "
                f"{self.radius_cap:.6g} without closed form")

    def value(self, z):
        """f(z), vectorised; prefers the closed form when present."""
        z = np.asarray(z, dtype=complex)
        if self.value_fn is not None:
            return self.value_fn(z) + 0j
        self._check_radius(z)
        acc = np.zeros_like(z)
        for a in self.coeffs[::-1]:
            acc = (acc + a) * z
        return acc + self.const

    def deriv(self, z):
        """f'(z), vectorised; prefers the closed form when present."""
        z = np.asarray(z, dtype=complex)
        if self.deriv_fn is not None:
            return self.deriv_fn(z) + 0j
        self._check_radius(z)
        acc = np.zeros_like(z)
        for k in range(self.coeffs.size, 0, -1):
            acc = acc * z + k * self.coeffs[k - 1]
        return acc

    def scaled(self, c) -> "TaylorFunction":
        c = complex(c)
        vf = (lambda z, f=self.value_fn: c * f(z)) if self.value_fn else None
        df = (lambda z, f=self.deriv_fn: c * f(z)) if self.deriv_fn else None
        coeffs = None if self.coeffs is None else self.coeffs * c
        return TaylorFunction(coeffs, vf, df, const=c * self.const,
                              radius_cap=self.radius_cap)

    def __mul__(self, c) -> "TaylorFunction":
        return self.scaled(c)

    __rmul__ = __mul__

    def __sub__(self, other: "TaylorFunction") -> "TaylorFunction":
        if not isinstance(other, TaylorFunction):
            return NotImplemented
        coeffs = None
        if self.coeffs is not None and other.coeffs is not None:
            n = max(self.coeffs.size, other.coeffs.size)
            coeffs = np.zeros(n, dtype=complex)
            coeffs[:self.coeffs.size] = self.coeffs
            coeffs[:other.coeffs.size] -= other.coeffs
        vf = df = None
        if self.evaluable_on_disc and other.evaluable_on_disc:
            # route through the methods so exact polynomials mix with closed forms
            vf = lambda z, a=self, b=other: a.value(z) - b.value(z)
            df = lambda z, a=self, b=other: a.deriv(z) - b.deriv(z)
            return TaylorFunction(coeffs, vf, df,
                                  const=self.const - other.const, radius_cap=1.0)
        return TaylorFunction(coeffs, vf, df, const=self.const - other.const,
                              radius_cap=min(self.radius_cap, other.radius_cap))


def eval_deriv(f: TaylorFunction, w) -> complex:
    """f'(w) inside the open unit disc."""
    w = complex(w)
    if abs(w) >= 1.0:
        raise ConfigError("outside unit disc")
    if not f.has_closed_form and abs(w) > f.radius_cap + 1e-13:
        raise ConfigError(
            f"|w| = {abs(w):.6g} beyond trusted radius {f.radius_cap:.6g}")
    return complex(f.deriv(w))


# ---------------------------------------------------------------------------
# box grids in R^n
# ---------------------------------------------------------------------------

class BoxDomain:
    """Axis-aligned box [lo, hi] in R^n (n = 1 or 2) with uniform step h.

    The grid is required to cover the box exactly: (hi - lo)/h integral.
    """

    def __init__(self, lo, hi, step: float):
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1 or lo.size not in (1, 2):
            raise ConfigError("box domain must be 1- or 2-dimensional")
        if step <= 0 or np.any(hi <= lo):
            raise ConfigError("box domain needs hi > lo and step > 0")
        counts = (hi - lo) / step
        if np.any(np.abs(counts - np.rint(counts)) > 1e-9 * np.maximum(1, counts)):
            raise ConfigError("grid step does not cover the box exactly")
        self.lo = lo
        self.hi = hi
        self.step = float(step)
        self.shape = tuple(int(np.rint(c)) + 1 for c in counts)
        self.ndim = lo.size

    def axes(self) -> list[np.ndarray]:
        return [self.lo[d] + self.step * np.arange(self.shape[d])
                for d in range(self.ndim)]

    def coords(self, idx) -> np.ndarray:
        """Coordinates of a grid node given by its integer index (tuple for 2-d)."""
        idx = np.atleast_1d(np.asarray(idx, dtype=np.int64))
        return self.lo + self.step * idx

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.hi - self.lo))


class EuclideanSamples:
    """Real samples of a function over a BoxDomain grid, tagged with the
    Hoelder exponent they are meant to be measured against."""

    def __init__(self, domain: BoxDomain, values, alpha: float):
        values = np.asarray(values, dtype=float)
        if values.shape != domain.shape:
            raise ConfigError(
                f"values of shape {values.shape} do not match grid {domain.shape}")
        if not (0.0 < alpha <= 1.0):
            raise ConfigError(f"alpha must lie in (0, 1], got {alpha}")
        values.setflags(write=False)
        self.domain = domain
        self.values = values
        self.alpha = float(alpha)

    def scaled(self, c) -> "EuclideanSamples":
        return EuclideanSamples(self.domain, self.values * float(c), self.alpha)

    def __mul__(self, c) -> "EuclideanSamples":
        return self.scaled(c)

    __rmul__ = __mul__

    def __sub__(self, other: "EuclideanSamples") -> "EuclideanSamples":
        if not isinstance(other, EuclideanSamples) or other.domain.shape != self.domain.shape:
            raise ConfigError("samples live on different grids")
        return EuclideanSamples(self.domain, self.values - other.values, self.alpha)

    def __add__(self, other: "EuclideanSamples") -> "EuclideanSamples":
        if not isinstance(other, EuclideanSamples) or other.domain.shape != self.domain.shape:
            raise ConfigError("samples live on different grids")
        return EuclideanSamples(self.domain, self.values + other.values, self.alpha)


# ---------------------------------------------------------------------------
# disc automorphisms
# ---------------------------------------------------------------------------

def mobius_apply(a: complex, lam: complex, z):
    """Disc automorphism lam*(a - z)/(1 - conj(a) z) and its derivative.

    Returns (value, derivative); z may be an array.
    """
    a = complex(a)
    lam = complex(lam)
    if abs(a) >= 1.0:
        raise ConfigError("automorphism centre must lie inside the disc")
    if abs(abs(lam) - 1.0) > 1e-12:
        raise ConfigError("rotation factor must be unimodular")
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) > 1.0 + 1e-12):
        raise ConfigError("argument outside the closed disc")
    den = 1.0 - np.conj(a) * z
    value = lam * (a - z) / den
    deriv = lam * (abs(a) ** 2 - 1.0) / den ** 2
    return value, deriv


# ---------------------------------------------------------------------------
# polar quadrature on the disc
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    """Polar product rule: n_r Gauss-Legendre radial nodes mapped to (0, 1)
    (open: no node at r = 0) times n_theta uniform angles."""

    n_r: int = 48
    n_theta: int = 128
    theta_offset: float = 0.0

    def __post_init__(self):
        if self.n_r < 2 or self.n_theta < 4:
            raise ConfigError("quadrature rule too small")

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened complex nodes and dA-weights (weights include the r factor)."""
        x, w = np.polynomial.legendre.leggauss(self.n_r)
        r = 0.5 * (x + 1.0)
        wr = 0.5 * w * r
        th = self.theta_offset + TWO_PI * np.arange(self.n_theta) / self.n_theta
        wt = TWO_PI / self.n_theta
        z = (r[:, None] * np.exp(1j * th)[None, :]).ravel()
        weights = np.broadcast_to((wr * wt)[:, None], (self.n_r, self.n_theta)).ravel()
        return z, weights.copy()

    def rotated(self, offset: float) -> "QuadratureRule":
        return QuadratureRule(self.n_r, self.n_theta, offset)


def disk_quadrature(g: Callable, rule: QuadratureRule = QuadratureRule()) -> float:
    """Approximate the area integral of g over the unit disc.

    g receives an array of complex nodes and must return finite values there;
    the open radial rule keeps the potentially singular point r = 0 node-free.
    """
    z, w = rule.nodes()
    vals = np.asarray(g(z), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NumericalError("singular node")
    return float(np.dot(w, vals))


# ---------------------------------------------------------------------------
# ambient-space norms
# ---------------------------------------------------------------------------

def _l2_circle(f: PeriodicSamples) -> float:
    centred = f.values - f.values.mean()
    return float(np.sqrt(np.sum(np.abs(centred) ** 2) * f.step))


def _l2_torus(f: TorusSamples) -> float:
    centred = f.values - f.values.mean()
    return float(np.sqrt(np.sum(np.abs(centred) ** 2) * f.step ** 2))


def _bergman(f: TaylorFunction) -> float:
    if f.coeffs is None:
        raise ConfigError("Bergman norm needs explicit coefficients")
    k = np.arange(1, f.coeffs.size + 1)
    return float(np.sqrt(np.pi * np.sum(np.abs(f.coeffs) ** 2 / (k + 1))))


def _hardy(f: TaylorFunction) -> float:
    if f.coeffs is None:
        raise ConfigError("Hardy norm needs explicit coefficients")
    return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2)))


def _sup_box(f: EuclideanSamples) -> float:
    return float(np.max(np.abs(f.values)))


def x_norm(space_tag: str, f) -> float:
    """Ambient-space norm used to measure approximation error.

    bmo_circle: L2 of the circle with the mean removed; bloch: Bergman norm
    from coefficients; qk: Hardy norm (the K(t) = t ambient norm up to a
    constant); rect_bmo: mean-removed L2 of the torus; lip: sup over the box
    grid (a recorded proxy for the ambient Sobolev norm).
    """
    try:
        if space_tag == "bmo_circle":
            return _l2_circle(f)
        if space_tag == "bloch":
            return _bergman(f)
        if space_tag == "qk":
            return _hardy(f)
        if space_tag == "rect_bmo":
            return _l2_torus(f)
        if space_tag == "lip":
            return _sup_box(f)
    except AttributeError:
        raise ConfigError(f"representation mismatch for space '{space_tag}'")
    if space_tag == "weighted":
        raise ConfigError("weighted ambient norm requires the space descriptor; "
                          "use spaces.weighted_x_norm")
    raise ConfigError(f"unknown space tag '{space_tag}'")

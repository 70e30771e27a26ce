"""The six concrete space instantiations: local evaluators and family builders.

Each space contributes an evaluation ||L f|| for one operator parameter (an
arc, a disc point, an automorphism centre, a point pair, an arc pair) and a
builder that samples the parameter set on a grid with a remoteness scale
rho > 0 shrinking exactly when the parameter escapes to infinity:

    bmo_circle   arcs, rho = |I|
    bloch        disc points, rho = 1 - |w|
    qk           automorphism centres, rho = 1 - |a|
    weighted     domain points, rho = min(dist to boundary, 1/(1+|z|))
    lip          point pairs, rho = |x - y|
    rect_bmo     arc pairs, rho = min(|I|, |J|)

Disc grids mix a uniform radial fill with dyadic boundary shells: the shells
feed the tail levels while the fill keeps interior maxima resolved.  All
angular grids are rotation-closed (uniform), which several contraction tests
rely on.
"""

from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, NumericalError
from .family import OperatorFamilyGrid, dyadic_scales
from .funcrep import (TWO_PI, Arc, BoxDomain, EuclideanSamples,
                      PeriodicSamples, QuadratureRule, TaylorFunction,
                      TorusSamples, disk_quadrature, mobius_apply, snap_arc)

# ---------------------------------------------------------------------------
# kernels and weights
# ---------------------------------------------------------------------------

class KKernel:
    """Kernel K: (0, inf) -> [0, inf) for the invariant-integral space.

    Construction checks (by sampling) that K is non-negative and
    non-decreasing, and that K(log 1/|z|) has a finite disc integral.
    """

    def __init__(self, eval_fn: Callable, name: str = "custom"):
        self.eval_fn = eval_fn
        self.name = name
        t = np.concatenate([np.logspace(-6, 1, 200), [20.0, 50.0]])
        vals = np.asarray(eval_fn(t), dtype=float)
        if np.any(~np.isfinite(vals)) or np.any(vals < -1e-15):
            raise ConfigError(f"kernel '{name}' must be finite and non-negative")
        if np.any(np.diff(vals) < -1e-12 * np.maximum(1.0, np.abs(vals[:-1]))):
            raise ConfigError(f"kernel '{name}' must be non-decreasing")
        if not np.any(vals > 0):
            raise ConfigError(f"kernel '{name}' must not vanish identically")
        mass = disk_quadrature(lambda z: self(np.log(1.0 / np.abs(z))),
                               QuadratureRule(32, 64))
        if not np.isfinite(mass):
            raise ConfigError(f"kernel '{name}': K(log 1/|z|) not integrable")

    def __call__(self, t):
        return np.asarray(self.eval_fn(np.asarray(t, dtype=float)), dtype=float)


def kernel_from_config(cfg) -> KKernel:
    """{"name": "power", "exponent": s} -> K(t) = t**s;  {"name": "one"} -> 1."""
    if isinstance(cfg, KKernel):
        return cfg
    if cfg is None:
        cfg = {"name": "power", "exponent": 1.0}
    name = cfg.get("name", "power")
    if name == "power":
        s = float(cfg.get("exponent", 1.0))
        if s <= 0:
            raise ConfigError("power kernel needs a positive exponent")
        return KKernel(lambda t, s=s: t ** s, name=f"power[{s}]")
    if name == "one":
        return KKernel(lambda t: np.ones_like(t), name="one")
    if name == "min_t_1":
        return KKernel(lambda t: np.minimum(t, 1.0), name="min_t_1")
    raise ConfigError(f"unknown kernel '{name}'")


class WeightV:
    """Strictly positive continuous weight on a planar domain.

    boundary_remoteness(z) = min(dist(z, boundary), 1/(1+|z|)) so escape both
    toward the boundary and toward infinity drives the scale to zero.
    """

    def __init__(self, eval_fn: Callable, domain: dict, name: str = "custom"):
        self.eval_fn = eval_fn
        self.name = name
        kind = domain.get("kind", "disc")
        if kind not in ("disc", "annulus", "box"):
            raise ConfigError(f"unsupported weighted domain '{kind}'")
        self.domain = dict(domain, kind=kind)

    def __call__(self, z):
        return np.asarray(self.eval_fn(np.asarray(z, dtype=complex)), dtype=float)

    def boundary_distance(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        kind = self.domain["kind"]
        if kind == "disc":
            return 1.0 - np.abs(z)
        if kind == "annulus":
            r0, r1 = self.domain["r0"], self.domain["r1"]
            return np.minimum(np.abs(z) - r0, r1 - np.abs(z))
        x0, x1 = self.domain["x0"], self.domain["x1"]
        y0, y1 = self.domain["y0"], self.domain["y1"]
        return np.minimum(np.minimum(z.real - x0, x1 - z.real),
                          np.minimum(z.imag - y0, y1 - z.imag))

    def boundary_remoteness(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return np.minimum(self.boundary_distance(z), 1.0 / (1.0 + np.abs(z)))


def weight_from_config(cfg) -> WeightV:
    if isinstance(cfg, WeightV):
        return cfg
    if cfg is None:
        cfg = {"name": "one_minus_r2"}
    name = cfg.get("name", "one_minus_r2")
    domain = cfg.get("domain", {"kind": "disc"})
    if name == "one_minus_r2":
        return WeightV(lambda z: 1.0 - np.abs(z) ** 2, domain, name=name)
    if name == "power_dist":
        s = float(cfg.get("exponent", 1.0))
        w = WeightV(lambda z: np.ones(np.shape(z)), domain, name=name)
        return WeightV(lambda z, w=w, s=s: w.boundary_distance(z) ** s, domain, name=name)
    raise ConfigError(f"unknown weight '{name}'")


# ---------------------------------------------------------------------------
# descriptor
# ---------------------------------------------------------------------------

SPACE_TAGS = ("bmo_circle", "bloch", "qk", "weighted", "lip", "rect_bmo")

# declared one-sided grid-resolution allowances (fraction of the estimate):
# the arc-parametrised spaces sample midpoints sparsely, so their suprema
# carry more slack than the densely filled disc and pair grids
_DEFAULT_ALLOWANCE = {
    "bmo_circle": 0.05,
    "rect_bmo": 0.05,
    "bloch": 0.02,
    "qk": 0.02,
    "weighted": 0.02,
    "lip": 0.02,
}

_DEFAULT_RESOLUTION = {
    "bmo_circle": {"n_samples": 131072, "midpoints": 128,
                   "min_len_exp": 2, "max_len_exp": 8},
    "bloch": {"uniform_radii": 128, "shells": 12, "angles": 512},
    "qk": {"shell_from": 2, "shell_to": 7, "extra_radii": (0.25, 0.5),
           "angles": 64, "quad_nr": 48, "quad_ntheta": 256},
    "weighted": {"uniform_radii": 128, "shells": 12, "angles": 512,
                 "box_nodes": 64},
    "lip": {"pair_cap": 1_000_000},
    "rect_bmo": {"n_samples": 1024, "midpoints": 64,
                 "min_len_exp": 1, "max_len_exp": 6},
}


@dataclass
class SpaceDescriptor:
    """Complete recipe for one space: which triple to build and how finely."""

    tag: str
    p: float = 1.0
    alpha: float = 0.5
    kernel: Optional[KKernel] = None
    weight: Optional[WeightV] = None
    lip_domain: Optional[BoxDomain] = None
    resolution: dict = field(default_factory=dict)
    allowance_rel: Optional[float] = None

    def __post_init__(self):
        if self.tag not in SPACE_TAGS:
            raise ConfigError(f"unknown space '{self.tag}'")
        if self.allowance_rel is None:
            self.allowance_rel = _DEFAULT_ALLOWANCE[self.tag]
        if self.tag == "bmo_circle" and not self.p >= 1.0:
            raise ConfigError(f"oscillation exponent p must be >= 1, got {self.p}")
        if self.tag == "lip":
            if not (0.0 < self.alpha <= 1.0):
                raise ConfigError(f"alpha must lie in (0, 1], got {self.alpha}")
            if self.lip_domain is None:
                self.lip_domain = BoxDomain([0.0], [1.0], 0.01)
        if self.tag == "qk" and self.kernel is None:
            self.kernel = kernel_from_config(None)
        if self.tag == "weighted" and self.weight is None:
            self.weight = weight_from_config(None)
        merged = dict(_DEFAULT_RESOLUTION[self.tag])
        merged.update(self.resolution)
        self.resolution = merged

    @classmethod
    def from_config(cls, cfg: dict) -> "SpaceDescriptor":
        if "space" not in cfg:
            raise ConfigError("space config needs a 'space' key")
        tag = cfg["space"]
        kwargs = {"tag": tag, "resolution": dict(cfg.get("resolution", {}))}
        if "p" in cfg:
            kwargs["p"] = float(cfg["p"])
        if "alpha" in cfg:
            kwargs["alpha"] = float(cfg["alpha"])
        if tag == "qk":
            kwargs["kernel"] = kernel_from_config(cfg.get("K"))
        if tag == "weighted":
            kwargs["weight"] = weight_from_config(cfg.get("weight"))
        if tag == "lip" and "domain" in cfg:
            d = cfg["domain"]
            kwargs["lip_domain"] = BoxDomain(d["lo"], d["hi"], float(d["step"]))
        return cls(**kwargs)


# ---------------------------------------------------------------------------
# local evaluators
# ---------------------------------------------------------------------------

def bmo_oscillation(f: PeriodicSamples, arc: Arc, p: float) -> float:
    """p-mean oscillation of f over the arc: (mean_I |f - f_I|^p)^(1/p).

    p = 2 closes via first/second window moments; other exponents use the
    direct trapezoid sum over the arc's samples.  Work happens on globally
    mean-centred samples (the oscillation is exactly translation invariant),
    which keeps the moment cancellation conditioned on the oscillation scale
    rather than the function scale.
    """
    if not p >= 1.0:
        raise ConfigError(f"oscillation exponent p must be >= 1, got {p}")
    start, ncells = snap_arc(f, arc)
    length = ncells * f.step
    centred, sums, sums2 = _centred_sums(f)
    mean = sums.window(start, ncells) / length
    if p == 2.0:
        sq = sums2.window(start, ncells).real / length
        return float(np.sqrt(max(sq - abs(mean) ** 2, 0.0)))
    idx = (start + np.arange(ncells + 1)) % f.n
    w = np.ones(ncells + 1)
    w[0] = w[-1] = 0.5
    dev = np.abs(centred[idx] - mean) ** p
    return float((np.dot(w, dev) * f.step / length) ** (1.0 / p))


def _centred_sums(f: PeriodicSamples):
    """Mean-centred values with their window-sum structures, cached on f."""
    if not hasattr(f, "_centred"):
        from .funcrep import _CircleSums
        centred = f.values - f.values.mean()
        f._centred = (centred, _CircleSums(centred),
                      _CircleSums(np.abs(centred) ** 2))
    return f._centred


def bloch_term(f: TaylorFunction, w: complex) -> float:
    """(1 - |w|^2) |f'(w)| for w in the open disc."""
    from .funcrep import eval_deriv
    return float((1.0 - abs(w) ** 2) * abs(eval_deriv(f, w)))


def qk_local(f: TaylorFunction, a: complex, kernel: KKernel,
             rule: QuadratureRule = QuadratureRule()) -> float:
    """Invariant integral of |f'|^2 against K(log 1/|phi_a|) over the disc.

    Computed in the automorphism-pulled-back form, which pins the kernel
    singularity at the quadrature-free origin; the angular grid is rotated to
    put a node line through arg(a), where the Jacobian concentrates.  The
    unimodular rotation of the automorphism drops out, so only `a` matters.
    Returns the squared-norm quantity (no square root).
    """
    a = complex(a)
    if abs(a) >= 1.0:
        raise ConfigError("automorphism centre must lie inside the disc")
    if a != 0:
        rule = rule.rotated(math.atan2(a.imag, a.real))
    w, wts = rule.nodes()
    phi, dphi = mobius_apply(a, 1.0, w)
    jac = np.abs(dphi) ** 2 * kernel(np.log(1.0 / np.abs(w)))
    vals = np.abs(f.deriv(phi)) ** 2 * jac
    if not np.all(np.isfinite(vals)):
        raise NumericalError("singular node")
    return float(np.dot(wts, vals))


def weighted_term(f: TaylorFunction, v: WeightV, z: complex) -> float:
    """v(z) |f(z)|."""
    return float(v(z) * abs(complex(np.asarray(f.value(z)).item())))


def lip_quotient(f: EuclideanSamples, x, y, alpha: float) -> float:
    """|f(x) - f(y)| / |x - y|^alpha for two distinct grid nodes (by index)."""
    xi = tuple(np.atleast_1d(np.asarray(x, dtype=np.int64)))
    yi = tuple(np.atleast_1d(np.asarray(y, dtype=np.int64)))
    if xi == yi:
        raise ConfigError("the two nodes must differ")
    dist = float(np.linalg.norm(f.domain.coords(xi) - f.domain.coords(yi)))
    return float(abs(f.values[xi] - f.values[yi]) / dist ** alpha)


def compose_mobius(f: TaylorFunction, a: complex, lam: complex = 1.0) -> TaylorFunction:
    """g = f o phi - f(phi(0)) for the automorphism phi with centre a.

    Closed-form only: g'(z) = f'(phi(z)) phi'(z); used by the invariance check.
    """
    a = complex(a)
    lam = complex(lam)
    centre_val = complex(np.asarray(f.value(lam * a)).item())

    def value(z):
        phi, _ = mobius_apply(a, lam, z)
        return f.value(phi) - centre_val

    def deriv(z):
        phi, dphi = mobius_apply(a, lam, z)
        return f.deriv(phi) * dphi

    return TaylorFunction(None, value_fn=value, deriv_fn=deriv)


# ---------------------------------------------------------------------------
# rectangular oscillation
# ---------------------------------------------------------------------------

class _WrapCumsum:
    """Row-wise trapezoid window sums on a periodic axis, via doubled cumsums."""

    def __init__(self, values: np.ndarray, axis: int):
        v = np.moveaxis(values, axis, -1)
        self.n = v.shape[-1]
        shape = list(v.shape)
        shape[-1] = 2 * self.n + 1
        cum = np.empty(shape, dtype=v.dtype)
        cum[..., 0] = 0
        np.cumsum(v, axis=-1, out=cum[..., 1:self.n + 1])
        cum[..., self.n + 1:] = cum[..., 1:self.n + 1] + cum[..., self.n:self.n + 1]
        self._cum = cum

    def window(self, start: int, ncells: int) -> np.ndarray:
        """Trapezoid sum over [start, start+ncells] along the axis, for all rows."""
        start %= self.n
        c = self._cum
        plain = c[..., start + ncells + 1] - c[..., start]
        ends = ((c[..., start + 1] - c[..., start])
                + (c[..., start + ncells + 1] - c[..., start + ncells]))
        return plain - 0.5 * ends


class TorusOscillator:
    """Shared machinery for rectangular oscillations of one torus function."""

    def __init__(self, F: TorusSamples):
        self.F = F
        self.n = F.n
        self.h = F.step
        # the oscillation is exactly invariant under adding any g(zeta) +
        # h(lambda); two-way centring removes that component up front, which
        # conditions the moment cancellation on the oscillation scale and
        # makes one-variable inputs vanish identically
        vals = F.values
        rowm = vals.mean(axis=1, keepdims=True)
        colm = vals.mean(axis=0, keepdims=True)
        centred = (vals - rowm) - (colm - colm.mean())
        # λ-axis windows of F and |F|^2 (per row ζ), ζ-axis windows of F
        self._row_f = _WrapCumsum(centred, axis=1)
        self._row_f2 = _WrapCumsum(np.abs(centred) ** 2, axis=1)
        self._col_f = _WrapCumsum(centred, axis=0)

    def pair(self, I: Arc, J: Arc) -> float:
        """Oscillation for a single arc pair."""
        sI, nI = _snap_torus_arc(self, I)
        sJ, nJ = _snap_torus_arc(self, J)
        return float(self.family_values([(sI, nI)], [(sJ, nJ)])[0])

    def family_values(self, arcs_i, arcs_j) -> np.ndarray:
        """Oscillations over the product family, J-major order.

        Per J-arc the work is O(N) (window averages along lambda and their
        zeta-prefix sums); every I-arc then costs O(1).
        """
        from .funcrep import _CircleSums
        h = self.h
        starts_i = np.array([a[0] for a in arcs_i], dtype=np.int64)
        ncells_i = np.array([a[1] for a in arcs_i], dtype=np.int64)
        # lambda-axis prefix sums of |mean_I F|^2, one row per I-arc
        b2 = np.empty((len(arcs_i), self.n))
        for k, (sI, nI) in enumerate(arcs_i):
            b2[k] = np.abs(self._col_f.window(sI, nI) / nI) ** 2
        b2cum = _WrapCumsum(b2, axis=1)
        out = np.empty((len(arcs_j), len(arcs_i)))
        for j, (sJ, nJ) in enumerate(arcs_j):
            lenJ = nJ * h
            A = self._row_f.window(sJ, nJ) * h / lenJ       # mean over J per zeta
            u = self._row_f2.window(sJ, nJ).real * h / lenJ  # mean of |F|^2 over J
            sums_a = _CircleSums(A)
            sums_a2 = _CircleSums(np.abs(A) ** 2)
            sums_u = _CircleSums(u)
            e_b = b2cum.window(sJ, nJ).real * h / lenJ      # E_J |mean_I F|^2 per I
            for nc in np.unique(ncells_i):
                sel = np.nonzero(ncells_i == nc)[0]
                st = starts_i[sel]
                lenI = nc * h
                m_sq = sums_u.window(st, int(nc)).real / lenI   # E_{IxJ} |F|^2
                c = sums_a.window(st, int(nc)) / lenI           # E_{IxJ} F
                e_a = sums_a2.window(st, int(nc)).real / lenI   # E_I |mean_J F|^2
                q2 = m_sq - e_a - e_b[sel] + np.abs(c) ** 2
                out[j, sel] = np.sqrt(np.maximum(q2, 0.0))
        return out.ravel()


def _snap_torus_arc(osc: TorusOscillator, arc: Arc) -> tuple[int, int]:
    h = osc.h
    start = int(np.rint((arc.midpoint - arc.length / 2.0) / h))
    ncells = min(int(np.rint(arc.length / h)), osc.n)
    if ncells < 2:
        raise ConfigError("arc under-resolved")
    return start % osc.n, ncells


def rect_oscillation(F: TorusSamples, I: Arc, J: Arc) -> float:
    """Rectangular mean oscillation over I x J.

    The squared value is the I x J mean of |F - F_J(zeta) - F_I(lambda) +
    F_{IxJ}|^2, i.e. the displayed supremum quantity; it vanishes identically
    on F(zeta, lambda) = g(zeta) + h(lambda), so this is a seminorm with that
    kernel.  For sweeps over many arc pairs build one TorusOscillator and
    reuse it; this convenience wrapper rebuilds the prefix sums per call.
    """
    return TorusOscillator(F).pair(I, J)


# ---------------------------------------------------------------------------
# family builders
# ---------------------------------------------------------------------------

BmoParam = namedtuple("BmoParam", ["midpoint", "length"])
BlochParam = namedtuple("BlochParam", ["w"])
QkParam = namedtuple("QkParam", ["a"])
WeightedParam = namedtuple("WeightedParam", ["z"])
LipParam = namedtuple("LipParam", ["x", "y"])
RectParam = namedtuple("RectParam", ["mid_zeta", "len_zeta",
                                     "mid_lambda", "len_lambda"])


def build_family(desc: SpaceDescriptor) -> OperatorFamilyGrid:
    """Discretise the space's operator family per the descriptor's resolution."""
    builder = {
        "bmo_circle": _build_bmo,
        "bloch": _build_bloch,
        "qk": _build_qk,
        "weighted": _build_weighted,
        "lip": _build_lip,
        "rect_bmo": _build_rect,
    }[desc.tag]
    return builder(desc)


def _arc_layout(n: int, midpoints: int, kmin: int, kmax: int):
    """Midpoint nodes x dyadic lengths, snapped exactly to the grid."""
    if kmax - kmin + 1 < 6:
        raise ConfigError("family resolution too coarse: fewer than 6 dyadic levels")
    if n % midpoints != 0:
        raise ConfigError("midpoint count must divide the grid size")
    if n * 2 ** -(kmax + 1) < 1:
        raise ConfigError(f"finest arcs under-resolved on a grid of {n}")
    mids = np.arange(midpoints) * (n // midpoints)
    arcs = []
    for k in range(kmin, kmax + 1):
        ncells = n >> k
        half = ncells // 2
        for m in mids:
            arcs.append((int(m - half) % n, ncells, float(m * TWO_PI / n),
                         TWO_PI * 2.0 ** -k))
    return arcs


def _build_bmo(desc: SpaceDescriptor) -> OperatorFamilyGrid:
    res = desc.resolution
    n = int(res["n_samples"])
    mids = res["midpoints"]
    mids = n if mids == "all" else int(mids)
    kmin, kmax = int(res["min_len_exp"]), int(res["max_len_exp"])
    arcs = _arc_layout(n, mids, kmin, kmax)
    params = [BmoParam(a[2], a[3]) for a in arcs]
    remoteness = np.array([a[1] * TWO_PI / n for a in arcs])
    p = desc.p
    starts = np.array([a[0] for a in arcs], dtype=np.int64)
    ncells = np.array([a[1] for a in arcs], dtype=np.int64)

    def eval_all(f: PeriodicSamples, bounds=None) -> np.ndarray:
        if not isinstance(f, PeriodicSamples) or f.n != n:
            raise ConfigError("function does not match the family's circle grid")
        out = np.empty(len(arcs))
        centred, sums, sums2 = _centred_sums(f)
        for nc in np.unique(ncells):
            sel = np.nonzero(ncells == nc)[0]
            st = starts[sel]
            length = nc * f.step
            mean = sums.window(st, int(nc)) / length
            if p == 2.0:
                msq = sums2.window(st, int(nc)).real / length
                out[sel] = np.sqrt(np.maximum(msq - np.abs(mean) ** 2, 0.0))
            else:
                out[sel] = _direct_osc(centred, f.step, st, int(nc), mean, p)
        return out

    scales = TWO_PI * 2.0 ** -np.arange(kmin, kmax + 1, dtype=float)
    return OperatorFamilyGrid("bmo_circle", params, remoteness, eval_all,
                              allowance_rel=desc.allowance_rel,
                              default_scales=scales)


def _direct_osc(centred: np.ndarray, step: float, starts: np.ndarray,
                ncells: int, means: np.ndarray, p: float,
                chunk: int = 1 << 24) -> np.ndarray:
    """Direct trapezoid p-oscillation for many same-length arcs, chunked."""
    n = centred.shape[0]
    out = np.empty(starts.size)
    w = np.ones(ncells + 1)
    w[0] = w[-1] = 0.5
    rows = max(1, chunk // (ncells + 1))
    offs = np.arange(ncells + 1, dtype=np.int64)
    for lo in range(0, starts.size, rows):
        hi = min(lo + rows, starts.size)
        idx = (starts[lo:hi, None] + offs[None, :]) % n
        dev = np.abs(centred[idx] - means[lo:hi, None]) ** p
        out[lo:hi] = (dev @ w) / ncells
    return out ** (1.0 / p)


def _disc_radii(uniform: int, shells: int, shell_from: int = 1,
                extra=()) -> np.ndarray:
    radii = set(float(r) for r in extra)
    if uniform > 0:
        radii.update(np.arange(uniform) / uniform)
    radii.update(1.0 - 2.0 ** -np.arange(shell_from, shells + 1, dtype=float))
    return np.array(sorted(radii))


def _build_bloch(desc: SpaceDescriptor) -> OperatorFamilyGrid:
    res = desc.resolution
    radii = _disc_radii(int(res["uniform_radii"]), int(res["shells"]))
    n_ang = int(res["angles"])
    w, params = _disc_nodes(radii, n_ang, BlochParam)
    remoteness = 1.0 - np.abs(w)

    def eval_all(f: TaylorFunction, bounds=None) -> np.ndarray:
        if not isinstance(f, TaylorFunction):
            raise ConfigError("the analytic family needs a TaylorFunction")
        return (1.0 - np.abs(w) ** 2) * np.abs(f.deriv(w))

    shells = int(res["shells"])
    scales = 2.0 ** -np.arange(0, shells + 1, dtype=float)
    return OperatorFamilyGrid("bloch", params, remoteness, eval_all,
                              allowance_rel=desc.allowance_rel,
                              default_scales=scales)


def _disc_nodes(radii: np.ndarray, n_ang: int, param_cls):
    angles = TWO_PI * np.arange(n_ang) / n_ang
    pts = [np.array([0.0 + 0.0j])] if radii[0] == 0.0 else []
    rest = radii[radii > 0]
    pts.append((rest[:, None] * np.exp(1j * angles)[None, :]).ravel())
    w = np.concatenate(pts)
    params = [param_cls(complex(z)) for z in w]
    return w, params


def _build_qk(desc: SpaceDescriptor) -> OperatorFamilyGrid:
    res = desc.resolution
    n_ang = int(res["angles"])
    rule = QuadratureRule(int(res["quad_nr"]), int(res["quad_ntheta"]))
    if rule.n_theta % n_ang != 0:
        raise ConfigError("quadrature angles must be a multiple of the family angles")
    radii = _disc_radii(0, int(res["shell_to"]), int(res["shell_from"]),
                        extra=(0.0,) + tuple(res["extra_radii"]))
    centres, params = _disc_nodes(radii, n_ang, QkParam)
    remoteness = 1.0 - np.abs(centres)
    kernel = desc.kernel

    # one pulled-back template per radius: with the quadrature's angular grid
    # rotated along arg(a), the nodes for a = rho e^{i beta} are exactly
    # e^{i beta} times the template for rho, with identical weights
    templates = {}
    for rho in radii:
        wn, wts = rule.nodes()
        phi, dphi = mobius_apply(rho, 1.0, wn)
        templates[rho] = (phi, wts * np.abs(dphi) ** 2
                          * kernel(np.log(1.0 / np.abs(wn))))
    rows = []          # (radius, rotations, entry offset)
    offset = 0
    angles = np.exp(1j * TWO_PI * np.arange(n_ang) / n_ang)
    for rho in radii:
        rots = np.array([1.0 + 0.0j]) if rho == 0.0 else angles
        rows.append((float(rho), rots, offset))
        offset += rots.size

    def eval_all(f: TaylorFunction, bounds=None) -> np.ndarray:
        if not isinstance(f, TaylorFunction):
            raise ConfigError("the invariant-integral family needs a TaylorFunction")
        lo, hi = bounds if bounds is not None else (0, centres.size)
        out = np.empty(hi - lo)
        for rho, rots, off in rows:
            r_lo, r_hi = max(lo, off), min(hi, off + rots.size)
            if r_lo >= r_hi:
                continue
            phi, jac = templates[rho]
            sub = rots[r_lo - off:r_hi - off]
            deriv_sq = np.abs(f.deriv(sub[:, None] * phi[None, :])) ** 2
            # row-wise reduction: summation order independent of chunking
            vals = (deriv_sq * jac[None, :]).sum(axis=1)
            if not np.all(np.isfinite(vals)):
                raise NumericalError("singular node")
            out[r_lo - lo:r_hi - lo] = np.sqrt(np.maximum(vals, 0.0))
        return out

    shell_to = int(res["shell_to"])
    scales = 2.0 ** -np.arange(0, shell_to + 1, dtype=float)
    return OperatorFamilyGrid("qk", params, remoteness, eval_all,
                              allowance_rel=desc.allowance_rel,
                              default_scales=scales, parallel_chunks=8)


def _build_weighted(desc: SpaceDescriptor) -> OperatorFamilyGrid:
    res = desc.resolution
    v = desc.weight
    kind = v.domain["kind"]
    if kind == "disc":
        radii = _disc_radii(int(res["uniform_radii"]), int(res["shells"]))
        z, params = _disc_nodes(radii, int(res["angles"]), WeightedParam)
    elif kind == "annulus":
        r0, r1 = v.domain["r0"], v.domain["r1"]
        gap = (r1 - r0) / 2.0
        offs = _disc_radii(int(res["uniform_radii"]), int(res["shells"])) * gap
        radii = np.unique(np.concatenate([r0 + offs[offs > 0], r1 - offs[offs > 0],
                                          [r0 + gap]]))
        z, params = _disc_nodes(radii, int(res["angles"]), WeightedParam)
    else:
        m = int(res["box_nodes"])
        x = np.linspace(v.domain["x0"], v.domain["x1"], m + 2)[1:-1]
        y = np.linspace(v.domain["y0"], v.domain["y1"], m + 2)[1:-1]
        z = (x[:, None] + 1j * y[None, :]).ravel()
        params = [WeightedParam(complex(zz)) for zz in z]
    vv = v(z)
    if np.any(vv <= 0):
        raise ConfigError("weight must be strictly positive on the grid")
    remoteness = v.boundary_remoteness(z)

    def eval_all(f: TaylorFunction, bounds=None) -> np.ndarray:
        if not isinstance(f, TaylorFunction):
            raise ConfigError("the weighted family needs a TaylorFunction")
        return vv * np.abs(f.value(z))

    shells = int(res.get("shells", 12))
    t0 = float(remoteness.max())
    scales = dyadic_scales(t0, max(float(remoteness.min()), t0 * 2.0 ** -shells))
    return OperatorFamilyGrid("weighted", params, remoteness, eval_all,
                              allowance_rel=desc.allowance_rel,
                              default_scales=scales)


def lip_pair_indices(dom: BoxDomain, cap: int = 1_000_000):
    """Flat-index pairs sampling the quotient family: all pairs when they fit
    under the cap, otherwise dyadic-offset strata (see _strata_pairs).

    Returns (ia, ib, dist) with dist the Euclidean node separations.
    """
    flat_coords = _grid_coords(dom)
    n_total = flat_coords.shape[0]
    if n_total * (n_total - 1) // 2 <= cap:
        ia, ib = np.triu_indices(n_total, k=1)
    else:
        ia, ib = _strata_pairs(dom, cap)
    dist = np.linalg.norm(flat_coords[ia] - flat_coords[ib], axis=1)
    return ia, ib, dist


class _LipParams:
    """Lazy parameter view: builds the coordinate pair only when indexed."""

    def __init__(self, coords, ia, ib):
        self._coords = coords
        self._ia = ia
        self._ib = ib

    def __len__(self):
        return self._ia.size

    def __getitem__(self, i):
        return LipParam(tuple(self._coords[self._ia[i]]),
                        tuple(self._coords[self._ib[i]]))


def _build_lip(desc: SpaceDescriptor) -> OperatorFamilyGrid:
    dom = desc.lip_domain
    alpha = desc.alpha
    cap = int(desc.resolution["pair_cap"])
    ia, ib, dist = lip_pair_indices(dom, cap)
    params = _LipParams(_grid_coords(dom), ia, ib)
    denom = dist ** alpha

    def eval_all(f: EuclideanSamples, bounds=None) -> np.ndarray:
        if not isinstance(f, EuclideanSamples) or f.domain.shape != dom.shape:
            raise ConfigError("function does not match the family's box grid")
        flat = f.values.ravel()
        return np.abs(flat[ia] - flat[ib]) / denom

    t0 = float(dist.max())
    scales = dyadic_scales(t0, float(dist.min()))
    return OperatorFamilyGrid("lip", params, dist, eval_all,
                              allowance_rel=desc.allowance_rel,
                              default_scales=scales)


def _grid_coords(dom: BoxDomain) -> np.ndarray:
    axes = dom.axes()
    if dom.ndim == 1:
        return axes[0][:, None]
    xx, yy = np.meshgrid(axes[0], axes[1], indexing="ij")
    return np.stack([xx.ravel(), yy.ravel()], axis=1)


def _strata_pairs(dom: BoxDomain, cap: int):
    """Dyadic-offset pair strata with per-stratum striding under the cap.

    Every stratum keeps the pairs anchored at the node nearest the origin so
    cusp-type extremal quotients survive subsampling.
    """
    shape = dom.shape
    if dom.ndim == 1:
        n = shape[0]
        offsets = [(1 << j,) for j in range(int(math.log2(n - 1)) + 1)]
    else:
        top = int(math.log2(max(shape) - 1)) + 1
        offsets = []
        for j in range(top):
            d = 1 << j
            offsets.extend([(d, 0), (0, d), (d, d)])
        offsets = [o for o in offsets
                   if o[0] < shape[0] and o[1] < shape[1]]
    budget = max(1, cap // len(offsets))
    coords = _grid_coords(dom)
    anchor = int(np.argmin(np.linalg.norm(coords, axis=1)))
    ia_all, ib_all = [], []
    strides = np.empty(0)
    for off in offsets:
        if dom.ndim == 1:
            counts = shape[0] - off[0]
            base = np.arange(counts, dtype=np.int64)
            stride = max(1, int(math.ceil(counts / budget)))
            sel = base[::stride]
            extra = np.array([anchor, anchor - off[0]], dtype=np.int64)
            extra = extra[(extra >= 0) & (extra < counts)]
            sel = np.unique(np.concatenate([sel, extra]))
            ia_all.append(sel)
            ib_all.append(sel + off[0])
        else:
            nx = shape[0] - off[0]
            ny = shape[1] - off[1]
            gx, gy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
            base = (gx * shape[1] + gy).ravel()
            stride = max(1, int(math.ceil(base.size / budget)))
            sel = base[::stride]
            a_row, a_col = divmod(anchor, shape[1])
            extras = []
            for (r, c) in [(a_row, a_col), (a_row - off[0], a_col - off[1])]:
                if 0 <= r < nx and 0 <= c < ny:
                    extras.append(r * shape[1] + c)
            if extras:
                sel = np.unique(np.concatenate([sel, np.array(extras, dtype=np.int64)]))
            ia_all.append(sel.astype(np.int64))
            ib_all.append(sel.astype(np.int64) + off[0] * shape[1] + off[1])
    return np.concatenate(ia_all), np.concatenate(ib_all)


def _build_rect(desc: SpaceDescriptor) -> OperatorFamilyGrid:
    res = desc.resolution
    n = int(res["n_samples"])
    mids = int(res["midpoints"])
    kmin, kmax = int(res["min_len_exp"]), int(res["max_len_exp"])
    arcs = _arc_layout(n, mids, kmin, kmax)
    snapped = [(a[0], a[1]) for a in arcs]
    lengths = np.array([a[1] * TWO_PI / n for a in arcs])
    params = []
    for (mJ, lJ) in [(a[2], a[3]) for a in arcs]:
        for (mI, lI) in [(a[2], a[3]) for a in arcs]:
            params.append(RectParam(mI, lI, mJ, lJ))
    remoteness = np.minimum.outer(lengths, lengths).ravel()

    def eval_all(F: TorusSamples, bounds=None) -> np.ndarray:
        if not isinstance(F, TorusSamples) or F.n != n:
            raise ConfigError("function does not match the family's torus grid")
        return TorusOscillator(F).family_values(snapped, snapped)

    scales = TWO_PI * 2.0 ** -np.arange(kmin, kmax + 1, dtype=float)
    return OperatorFamilyGrid("rect_bmo", params, remoteness, eval_all,
                              allowance_rel=desc.allowance_rel,
                              default_scales=scales)


# ---------------------------------------------------------------------------
# ambient norm for the weighted space
# ---------------------------------------------------------------------------

def weighted_x_norm(desc: SpaceDescriptor, f: TaylorFunction) -> float:
    """Area-weighted L2 norm with density v^2 / pi on the unit disc."""
    if desc.weight.domain["kind"] != "disc":
        raise ConfigError("weighted ambient norm implemented on the disc only")
    val = disk_quadrature(
        lambda z: np.abs(f.value(z)) ** 2 * desc.weight(z) ** 2 / np.pi,
        QuadratureRule(48, 64))
    return float(np.sqrt(val))

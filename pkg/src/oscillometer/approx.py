"""Approximation ladders into the vanishing subspaces, plus the checker that
verifies the norm-controlled approximation property on a concrete family.

Poisson smoothing on the circle and torus is applied as an exact DFT
multiplier (r^|k| per mode), which removes quadrature error from the
contraction comparisons.  Dilations and Cesaro-damped partial sums act on
Taylor coefficients.  The Hoelder smoother extends the function off its box
by inf-convolution (preserving the Hoelder constant exactly), convolves with
a truncated heavy-tailed kernel of unit discrete mass, applies a smooth
cutoff and restricts back to the box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .distance import certification_threshold
from .errors import ConfigError, NumericalError
from .family import limsup_estimate, seminorm_sup, tail_profile
from .funcrep import (BoxDomain, EuclideanSamples, PeriodicSamples,
                      TaylorFunction, TorusSamples, x_norm)
from .spaces import SpaceDescriptor, build_family, lip_pair_indices, weighted_x_norm


# ---------------------------------------------------------------------------
# circle / torus smoothing
# ---------------------------------------------------------------------------

def poisson_circle(f: PeriodicSamples, r: float) -> PeriodicSamples:
    """Convolution with the radius-r Poisson kernel as a Fourier multiplier."""
    if not (0.0 <= r < 1.0):
        raise ConfigError(f"smoothing radius must lie in [0, 1), got {r}")
    k = np.abs(np.fft.fftfreq(f.n, d=1.0 / f.n))
    smoothed = np.fft.ifft(np.fft.fft(f.values) * r ** k)
    return PeriodicSamples(smoothed)


def poisson_torus2(F: TorusSamples, r: float) -> TorusSamples:
    """Double Poisson smoothing on the torus: multiplier r^(|j|+|k|)."""
    if not (0.0 <= r < 1.0):
        raise ConfigError(f"smoothing radius must lie in [0, 1), got {r}")
    k = np.abs(np.fft.fftfreq(F.n, d=1.0 / F.n))
    mult = r ** (k[:, None] + k[None, :])
    return TorusSamples(np.fft.ifft2(np.fft.fft2(F.values) * mult))


# ---------------------------------------------------------------------------
# Taylor-side families
# ---------------------------------------------------------------------------

def dilate(f: TaylorFunction, r: float) -> TaylorFunction:
    """The dilated function z -> f(r z)."""
    if not (0.0 <= r <= 1.0):
        raise ConfigError(f"dilation radius must lie in [0, 1], got {r}")
    if r == 1.0:
        return f
    coeffs = None
    if f.coeffs is not None:
        coeffs = f.coeffs * r ** np.arange(1, f.coeffs.size + 1)
    vf = df = None
    if f.has_closed_form:
        vf = lambda z, g=f.value_fn: g(r * z)
        df = lambda z, g=f.deriv_fn: r * g(r * z)
    if r == 0.0:
        cap = np.inf
    elif np.isinf(f.radius_cap):
        cap = np.inf
    else:
        cap = min(1.0, f.radius_cap / r)
    return TaylorFunction(coeffs, vf, df, const=f.const, radius_cap=cap)


def fejer_taylor(f: TaylorFunction, n: int) -> TaylorFunction:
    """Cesaro-damped partial sum: coefficients (1 - k/(n+1)) a_k up to k = n."""
    if n < 1:
        raise ConfigError(f"order must be a positive integer, got {n}")
    if f.coeffs is None:
        raise ConfigError("coefficients unavailable up to n")
    if f.coeffs.size < n and f.radius_cap < 1.0:
        raise ConfigError("coefficients unavailable up to n")
    m = min(n, f.coeffs.size)
    k = np.arange(1, m + 1)
    damped = (1.0 - k / (n + 1.0)) * f.coeffs[:m]
    return TaylorFunction.polynomial(damped, const=f.const)


# ---------------------------------------------------------------------------
# Hoelder smoothing on box grids
# ---------------------------------------------------------------------------

try:
    from numba import njit as _njit
except ImportError:                                     # pragma: no cover
    _njit = None


def _monotone_argmin(xs, ys, fy, lam, alpha, out):
    """out[i] = min_j fy[j] + lam * (xs[i] - ys[j])**alpha for targets xs
    (ascending) strictly beyond the ascending candidates ys.

    Concavity of t**alpha makes low-index optimality propagate to larger
    targets, so the leftmost minimiser is non-increasing in i; classic
    divide-and-conquer over the target rows with windows split accordingly.
    """
    n = xs.shape[0]
    m = ys.shape[0]
    stack_lo = np.empty(80, dtype=np.int64)
    stack_hi = np.empty(80, dtype=np.int64)
    stack_jlo = np.empty(80, dtype=np.int64)
    stack_jhi = np.empty(80, dtype=np.int64)
    top = 0
    stack_lo[0], stack_hi[0] = 0, n - 1
    stack_jlo[0], stack_jhi[0] = 0, m - 1
    top = 1
    while top > 0:
        top -= 1
        lo, hi = stack_lo[top], stack_hi[top]
        jlo, jhi = stack_jlo[top], stack_jhi[top]
        if lo > hi:
            continue
        mid = (lo + hi) // 2
        x = xs[mid]
        best = 1e300
        bestj = jlo
        for j in range(jlo, jhi + 1):
            d = x - ys[j]
            if d < 0.0:
                d = -d
            val = fy[j] + lam * d ** alpha
            if val < best:
                best = val
                bestj = j
        out[mid] = best
        stack_lo[top], stack_hi[top] = lo, mid - 1
        stack_jlo[top], stack_jhi[top] = bestj, jhi
        top += 1
        stack_lo[top], stack_hi[top] = mid + 1, hi
        stack_jlo[top], stack_jhi[top] = jlo, bestj
        top += 1
    return out


if _njit is not None:
    _monotone_argmin = _njit(cache=True)(_monotone_argmin)


def lip_const(f: EuclideanSamples, cap: int = 1_000_000) -> float:
    """Grid Hoelder constant from the stratified pair set."""
    ia, ib, dist = lip_pair_indices(f.domain, cap)
    flat = f.values.ravel()
    return float(np.max(np.abs(flat[ia] - flat[ib]) / dist ** f.alpha))


def _extend_mcshane(f: EuclideanSamples, lam: float, pad: int) -> np.ndarray:
    """Inf-convolution extension f^(x) = min_y f(y) + lam |x-y|^alpha onto the
    padded grid; equals f on the original grid when lam dominates the grid
    Hoelder constant, and is lam-Hoelder everywhere by construction."""
    dom = f.domain
    alpha = f.alpha
    if dom.ndim == 1:
        n = dom.shape[0]
        ys = dom.axes()[0]
        fy = f.values
        ext = np.empty(n + 2 * pad)
        ext[pad:pad + n] = fy
        right = ys[-1] + dom.step * np.arange(1, pad + 1)
        out = np.empty(pad)
        _monotone_argmin(right, ys, fy, lam, alpha, out)
        ext[pad + n:] = out
        # left side: mirror through x -> -x to reuse the right-side solver
        left = ys[0] - dom.step * np.arange(1, pad + 1)
        out = np.empty(pad)
        _monotone_argmin(-left, (-ys[::-1]).copy(), fy[::-1].copy(), lam, alpha, out)
        ext[:pad] = out[::-1]
        return ext
    # 2-d: brute minimisation over the grid, chunked over exterior nodes
    shape = tuple(s + 2 * pad for s in dom.shape)
    axes = [dom.axes()[d][0] - dom.step * pad + dom.step * np.arange(shape[d])
            for d in range(2)]
    ext = np.empty(shape)
    ext[pad:pad + dom.shape[0], pad:pad + dom.shape[1]] = f.values
    inside = np.zeros(shape, dtype=bool)
    inside[pad:pad + dom.shape[0], pad:pad + dom.shape[1]] = True
    xx, yy = np.meshgrid(axes[0], axes[1], indexing="ij")
    targets = np.stack([xx[~inside], yy[~inside]], axis=1)
    gx, gy = np.meshgrid(dom.axes()[0], dom.axes()[1], indexing="ij")
    sources = np.stack([gx.ravel(), gy.ravel()], axis=1)
    fy = f.values.ravel()
    vals = np.empty(targets.shape[0])
    chunk = max(1, 8_000_000 // max(1, sources.shape[0]))
    for lo in range(0, targets.shape[0], chunk):
        hi = min(lo + chunk, targets.shape[0])
        d2 = ((targets[lo:hi, None, :] - sources[None, :, :]) ** 2).sum(axis=2)
        vals[lo:hi] = np.min(fy[None, :] + lam * d2 ** (alpha / 2.0), axis=1)
    ext[~inside] = vals
    return ext


def _poisson_kernel_nd(ndim: int, t: float, step: float, pad: int):
    """Discrete truncated kernel with unit mass, plus the mass left outside."""
    offs = step * np.arange(-pad, pad + 1)
    if ndim == 1:
        raw = t / (t * t + offs ** 2) / np.pi
        outside = 1.0 - (2.0 / np.pi) * math.atan(pad * step / t)
    else:
        r2 = offs[:, None] ** 2 + offs[None, :] ** 2
        raw = t / (t * t + r2) ** 1.5 / (2.0 * np.pi)
        outside = t / math.sqrt(t * t + (pad * step) ** 2)
    kernel = raw * step ** ndim
    return kernel / kernel.sum(), float(outside)


def _fft_convolve_same(values: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Linear convolution, centre-aligned output of the input's shape."""
    full = [v + k - 1 for v, k in zip(values.shape, kernel.shape)]
    sizes = [1 << int(np.ceil(np.log2(s))) for s in full]
    axes = list(range(values.ndim))
    fv = np.fft.rfftn(values, sizes, axes=axes)
    fk = np.fft.rfftn(kernel, sizes, axes=axes)
    conv = np.fft.irfftn(fv * fk, sizes, axes=axes)
    start = [(k - 1) // 2 for k in kernel.shape]
    sel = tuple(slice(s, s + v) for s, v in zip(start, values.shape))
    return conv[sel]


def _smooth_cutoff(dom: BoxDomain, pad: int) -> np.ndarray:
    """C^2 bump: 1 on the original box, 0 at the padded boundary."""
    ramps = []
    for d in range(dom.ndim):
        n = dom.shape[d]
        u = np.zeros(n + 2 * pad)
        u[:pad] = np.arange(pad, 0, -1) / pad
        u[pad + n:] = np.arange(1, pad + 1) / pad
        s = 1.0 - u
        ramps.append(s * s * (3.0 - 2.0 * s))
    if dom.ndim == 1:
        return ramps[0]
    return ramps[0][:, None] * ramps[1][None, :]


def lip_smooth(f: EuclideanSamples, t: float, *, pad_factor: float = 4.0,
               lip_const_hint: Optional[float] = None) -> EuclideanSamples:
    """Mollified approximant: extend, convolve at scale t, cut off, restrict.

    Refused for alpha = 1 and for kernels finer than the grid step.
    """
    samples, _ = lip_smooth_with_info(f, t, pad_factor=pad_factor,
                                      lip_const_hint=lip_const_hint)
    return samples


def lip_smooth_with_info(f: EuclideanSamples, t: float, *,
                         pad_factor: float = 4.0,
                         lip_const_hint: Optional[float] = None):
    """lip_smooth plus the truncated kernel mass (reported, not hidden)."""
    if f.alpha >= 1.0:
        raise ConfigError("little space may be trivial")
    if t <= 0:
        raise ConfigError(f"kernel scale must be positive, got {t}")
    if t < f.domain.step:
        raise ConfigError("kernel under-resolved")
    dom = f.domain
    pad = int(math.ceil(pad_factor * dom.diameter / dom.step))
    lam = lip_const(f) if lip_const_hint is None else float(lip_const_hint)
    key = (lam, pad)
    cache = getattr(f, "_extension_cache", None)
    if cache is None or cache[0] != key:
        ext = _extend_mcshane(f, lam, pad)
        f._extension_cache = (key, ext)
    else:
        ext = cache[1]
    kernel, outside = _poisson_kernel_nd(dom.ndim, t, dom.step, pad)
    smoothed = _fft_convolve_same(ext, kernel)
    smoothed = smoothed * _smooth_cutoff(dom, pad)
    sel = tuple(slice(pad, pad + s) for s in dom.shape)
    return EuclideanSamples(dom, smoothed[sel], f.alpha), outside


# ---------------------------------------------------------------------------
# ladders
# ---------------------------------------------------------------------------

@dataclass
class ApproxFamily:
    """A generated ladder of approximants in the input's representation."""

    kind: str
    parameters: list
    members: list
    member_info: list = field(default_factory=list)

    def __post_init__(self):
        if not self.members:
            raise ConfigError("approximation family has no members")
        if not self.member_info:
            self.member_info = [{} for _ in self.members]


def poisson_family(f: PeriodicSamples, levels: int = 8) -> ApproxFamily:
    rs = [1.0 - 2.0 ** -m for m in range(1, levels + 1)]
    return ApproxFamily("poisson_circle", rs, [poisson_circle(f, r) for r in rs])


def poisson_torus_family(F: TorusSamples, levels: int = 8) -> ApproxFamily:
    rs = [1.0 - 2.0 ** -m for m in range(1, levels + 1)]
    return ApproxFamily("poisson_torus", rs, [poisson_torus2(F, r) for r in rs])


def dilation_family(f: TaylorFunction, levels: int = 8) -> ApproxFamily:
    rs = [1.0 - 2.0 ** -m for m in range(1, levels + 1)]
    return ApproxFamily("dilation", rs, [dilate(f, r) for r in rs])


def fejer_family(f: TaylorFunction, levels: int = 8) -> ApproxFamily:
    ns = [2 ** m for m in range(1, levels + 1)]
    return ApproxFamily("fejer", ns, [fejer_taylor(f, n) for n in ns])


def lip_smooth_family(f: EuclideanSamples, levels: int = 8, t0: float = 0.1,
                      pad_factor: float = 4.0) -> ApproxFamily:
    lam = lip_const(f)
    ts, members, infos = [], [], []
    for m in range(levels):
        t = t0 * 2.0 ** -m
        if t < f.domain.step:
            break
        g, outside = lip_smooth_with_info(f, t, pad_factor=pad_factor,
                                          lip_const_hint=lam)
        ts.append(t)
        members.append(g)
        infos.append({"kernel_truncation": outside})
    if len(ts) < 3:
        raise ConfigError("kernel under-resolved")
    return ApproxFamily("lip_smooth", ts, members, infos)


_FAMILY_KINDS = {
    "poisson_circle": poisson_family,
    "poisson_torus": poisson_torus_family,
    "dilation": dilation_family,
    "fejer": fejer_family,
    "lip_smooth": lip_smooth_family,
}


def family_from_config(cfg: dict, f) -> ApproxFamily:
    """{"kind": ..., "ladder": {"levels": 8, ...}} -> generated family."""
    kind = cfg.get("kind")
    if kind not in _FAMILY_KINDS:
        raise ConfigError(f"unknown approximation family '{kind}'")
    ladder = cfg.get("ladder", {})
    kwargs = {}
    if "levels" in ladder:
        kwargs["levels"] = int(ladder["levels"])
    if kind == "lip_smooth":
        if "t0" in ladder:
            kwargs["t0"] = float(ladder["t0"])
        if "pad_factor" in ladder:
            kwargs["pad_factor"] = float(ladder["pad_factor"])
    return _FAMILY_KINDS[kind](f, **kwargs)


# ---------------------------------------------------------------------------
# the approximation-property checker
# ---------------------------------------------------------------------------

@dataclass
class AssumptionReport:
    """Outcome of checking the norm-controlled approximation property.

    verdict passes iff no member's grid seminorm exceeds the input's by more
    than the allowed slack and the ambient-space distances end below tolerance,
    non-increasing over the last three members.  Member tail estimates (their
    own vanishing-check) are reported alongside; fine-scale members of a
    coarse grid legitimately fail that flag without spoiling the verdict.
    """

    member_norms: list
    input_norm: float
    x_distances: list
    verdict: bool
    slack_used: float
    slack_allowed: float
    member_tails: list
    little_flags: list
    little_threshold: float
    x_reference: float
    x_tolerance: float
    kernel_truncation: float = 0.0
    notes: str = ""

    def to_dict(self) -> dict:
        return {
            "member_norms": self.member_norms,
            "input_norm": self.input_norm,
            "x_distances": self.x_distances,
            "verdict": "pass" if self.verdict else "fail",
            "slack_used": self.slack_used,
            "slack_allowed": self.slack_allowed,
            "member_tails": self.member_tails,
            "little_flags": self.little_flags,
            "little_threshold": self.little_threshold,
            "x_reference": self.x_reference,
            "x_tolerance": self.x_tolerance,
            "kernel_truncation": self.kernel_truncation,
            "notes": self.notes,
        }


def ambient_distance(desc: SpaceDescriptor, f, g) -> float:
    """||f - g|| in the ambient space backing the descriptor's tag."""
    diff = f - g
    if desc.tag == "weighted":
        return weighted_x_norm(desc, diff)
    return x_norm(desc.tag, diff)


def ambient_norm(desc: SpaceDescriptor, f) -> float:
    if desc.tag == "weighted":
        return weighted_x_norm(desc, f)
    return x_norm(desc.tag, f)


def assumption_check(desc: SpaceDescriptor, f, fam: ApproxFamily,
                     slack: float = 1e-3, x_tol_rel: float = 1e-2,
                     grid=None) -> AssumptionReport:
    """Run the approximation-property check for f against a generated ladder."""
    if grid is None:
        grid = build_family(desc)
    input_norm = float(np.max(grid.evaluate_all(f)))
    threshold = certification_threshold(input_norm)
    truncation = max((info.get("kernel_truncation", 0.0)
                      for info in fam.member_info), default=0.0)
    slack_allowed = slack + truncation
    member_norms, member_tails, little_flags, x_distances = [], [], [], []
    for g in fam.members:
        vals = grid.evaluate_all(g)
        member_norms.append(float(np.max(vals)))
        profile = tail_profile(grid, g, values=vals)
        est, _ = limsup_estimate(profile)
        member_tails.append(est)
        little_flags.append(bool(est <= threshold))
        x_distances.append(ambient_distance(desc, f, g))
    x_ref = ambient_norm(desc, f)
    x_tol = x_tol_rel * x_ref
    norms_ok = max(member_norms) <= input_norm * (1.0 + slack_allowed) + 1e-15
    tail3 = x_distances[-3:]
    decreasing = all(tail3[i] >= tail3[i + 1] - 1e-12 * max(1.0, tail3[i])
                     for i in range(len(tail3) - 1))
    converged = x_distances[-1] <= x_tol + 1e-15
    slack_used = 0.0
    if input_norm > 0:
        slack_used = max(0.0, max(member_norms) / input_norm - 1.0)
    return AssumptionReport(
        member_norms=member_norms,
        input_norm=input_norm,
        x_distances=x_distances,
        verdict=bool(norms_ok and decreasing and converged and len(tail3) == 3),
        slack_used=slack_used,
        slack_allowed=slack_allowed,
        member_tails=member_tails,
        little_flags=little_flags,
        little_threshold=threshold,
        x_reference=x_ref,
        x_tolerance=x_tol,
        kernel_truncation=truncation,
        notes=("ambient distances for box grids use the sup-norm proxy"
               if desc.tag == "lip" else ""),
    )

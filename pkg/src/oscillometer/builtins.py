"""Named test functions covering every representation.

Functions are constructed against a space descriptor so circle/torus builtins
pick up the space's grid size and box builtins its domain.  Analytic builtins
carry closed-form evaluators alongside truncated coefficients: coefficients
with slow decay (e.g. 1/k) make truncated evaluation near the boundary
unreliable, and the family grids probe radii up to 1 - 2^-13.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .funcrep import (TWO_PI, BoxDomain, EuclideanSamples, PeriodicSamples,
                      TaylorFunction, TorusSamples)
from .spaces import SpaceDescriptor


# ---------------------------------------------------------------------------
# circle samples
# ---------------------------------------------------------------------------

def step_half_values(n: int) -> np.ndarray:
    """Indicator of the upper half circle, value 1/2 at the two jump nodes."""
    theta = TWO_PI * np.arange(n) / n
    vals = np.where(theta < np.pi, 1.0, 0.0)
    vals[0] = 0.5
    vals[n // 2] = 0.5
    return vals.astype(complex)


def triangle_values(n: int) -> np.ndarray:
    """Distance to the angle pi: a 1-Lipschitz hat with corners at 0 and pi."""
    theta = TWO_PI * np.arange(n) / n
    return np.abs(theta - np.pi).astype(complex)


def circle_builtin(name: str, n: int, **params) -> PeriodicSamples:
    if name == "step_half":
        return PeriodicSamples(step_half_values(n))
    if name == "triangle":
        return PeriodicSamples(triangle_values(n))
    if name == "cosine":
        freq = int(params.get("freq", 1))
        theta = TWO_PI * np.arange(n) / n
        return PeriodicSamples(np.cos(freq * theta).astype(complex))
    raise ConfigError(f"unknown circle builtin '{name}'")


# ---------------------------------------------------------------------------
# analytic functions on the disc
# ---------------------------------------------------------------------------

def log_singular(n_coeffs: int = 4096) -> TaylorFunction:
    """log(1/(1-z)) = sum z^k / k: the model unbounded function."""
    k = np.arange(1, n_coeffs + 1)
    return TaylorFunction(1.0 / k,
                          value_fn=lambda z: -np.log(1.0 - z),
                          deriv_fn=lambda z: 1.0 / (1.0 - z))


def cauchy_kernel(n_coeffs: int = 4096) -> TaylorFunction:
    """1/(1-z) = 1 + sum z^k; the constant term is carried separately."""
    return TaylorFunction(np.ones(n_coeffs), const=1.0,
                          value_fn=lambda z: 1.0 / (1.0 - z),
                          deriv_fn=lambda z: 1.0 / (1.0 - z) ** 2)


def lacunary(top_exp: int = 10) -> TaylorFunction:
    """sum of z^(2^j) for j = 0..top_exp: bounded coefficients, gap powers."""
    powers = 2 ** np.arange(top_exp + 1)
    coeffs = np.zeros(int(powers[-1]), dtype=complex)
    coeffs[powers - 1] = 1.0

    def value(z):
        z = np.asarray(z, dtype=complex)
        return sum(z ** int(p) for p in powers)

    def deriv(z):
        z = np.asarray(z, dtype=complex)
        return sum(int(p) * z ** (int(p) - 1) for p in powers)

    return TaylorFunction(coeffs, value_fn=value, deriv_fn=deriv, radius_cap=1.0)


def monomial(degree: int) -> TaylorFunction:
    if degree < 1:
        raise ConfigError("monomial degree must be >= 1")
    coeffs = np.zeros(degree, dtype=complex)
    coeffs[-1] = 1.0
    return TaylorFunction.polynomial(coeffs)


def taylor_builtin(name: str, **params) -> TaylorFunction:
    if name == "monomial":
        return monomial(int(params.get("degree", 1)))
    if name == "poly":
        coeffs = [complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
                  for c in params["coeffs"]]
        return TaylorFunction.polynomial(np.asarray(coeffs, dtype=complex))
    if name == "log_singular":
        return log_singular(int(params.get("n_coeffs", 4096)))
    if name == "cauchy_kernel":
        return cauchy_kernel(int(params.get("n_coeffs", 4096)))
    if name == "lacunary":
        return lacunary(int(params.get("top_exp", 10)))
    raise ConfigError(f"unknown analytic builtin '{name}'")


# ---------------------------------------------------------------------------
# torus samples
# ---------------------------------------------------------------------------

def torus_builtin(name: str, n: int, **params) -> TorusSamples:
    if name == "step_tensor":
        g = step_half_values(n)
        return TorusSamples(np.outer(g, g))
    if name == "triangle_tensor":
        g = triangle_values(n)
        return TorusSamples(np.outer(g, g))
    if name == "one_variable":
        g = circle_builtin(params.get("profile", "step_half"), n).values
        return TorusSamples(np.broadcast_to(g[:, None], (n, n)).copy())
    if name == "additive":
        g = circle_builtin(params.get("profile", "step_half"), n).values
        return TorusSamples(g[:, None] + g[None, :])
    raise ConfigError(f"unknown torus builtin '{name}'")


# ---------------------------------------------------------------------------
# box samples
# ---------------------------------------------------------------------------

def box_builtin(name: str, domain: BoxDomain, alpha: float,
                **params) -> EuclideanSamples:
    coords = domain.axes()
    if domain.ndim == 1:
        x = coords[0]
        radius = np.abs(x)
    else:
        xx, yy = np.meshgrid(coords[0], coords[1], indexing="ij")
        radius = np.hypot(xx, yy)
    if name == "holder_cusp":
        expo = float(params.get("exponent", alpha))
        return EuclideanSamples(domain, radius ** expo, alpha)
    if name == "linear":
        vals = coords[0] if domain.ndim == 1 else xx
        return EuclideanSamples(domain, vals.copy(), alpha)
    if name == "square":
        vals = coords[0] ** 2 if domain.ndim == 1 else xx ** 2
        return EuclideanSamples(domain, vals, alpha)
    if name == "cosine":
        vals = np.cos(coords[0]) if domain.ndim == 1 else np.cos(xx + yy)
        return EuclideanSamples(domain, vals, alpha)
    raise ConfigError(f"unknown box builtin '{name}'")


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

_CIRCLE_NAMES = {"step_half", "triangle", "cosine"}
_TAYLOR_NAMES = {"monomial", "poly", "log_singular", "cauchy_kernel", "lacunary"}
_TORUS_NAMES = {"step_tensor", "triangle_tensor", "one_variable", "additive"}
_BOX_NAMES = {"holder_cusp", "linear", "square", "cosine_box"}


def make_function(cfg: dict, desc: SpaceDescriptor):
    """Build a function from a JSON block against the space's grids.

    kinds: {"kind": "builtin", "name": ..., ...params},
           {"kind": "taylor", "coeffs": [[re, im], ...]},
           {"kind": "samples", "values": [[re, im], ...]} (circle or torus).
    """
    kind = cfg.get("kind", "builtin")
    if kind == "taylor":
        return taylor_builtin("poly", coeffs=cfg["coeffs"])
    if kind == "samples":
        values = np.asarray(cfg["values"], dtype=float)
        if values.ndim == 2 and values.shape[-1] == 2 and desc.tag == "bmo_circle":
            return PeriodicSamples(values[:, 0] + 1j * values[:, 1])
        if desc.tag == "rect_bmo":
            return TorusSamples(values[..., 0] + 1j * values[..., 1])
        if desc.tag == "lip":
            return EuclideanSamples(desc.lip_domain, values, desc.alpha)
        raise ConfigError(f"sample input not supported for space '{desc.tag}'")
    if kind != "builtin":
        raise ConfigError(f"unknown function kind '{kind}'")
    name = cfg.get("name")
    params = {k: v for k, v in cfg.items() if k not in ("kind", "name")}
    if desc.tag == "bmo_circle":
        if name not in _CIRCLE_NAMES:
            raise ConfigError(f"builtin '{name}' is not a circle function")
        return circle_builtin(name, int(desc.resolution["n_samples"]), **params)
    if desc.tag in ("bloch", "qk", "weighted"):
        if name not in _TAYLOR_NAMES:
            raise ConfigError(f"builtin '{name}' is not an analytic function")
        return taylor_builtin(name, **params)
    if desc.tag == "rect_bmo":
        if name not in _TORUS_NAMES:
            raise ConfigError(f"builtin '{name}' is not a torus function")
        return torus_builtin(name, int(desc.resolution["n_samples"]), **params)
    if desc.tag == "lip":
        if name == "cosine_box":
            name = "cosine"
        elif name not in _BOX_NAMES:
            raise ConfigError(f"builtin '{name}' is not a box function")
        return box_builtin(name, desc.lip_domain, desc.alpha, **params)
    raise ConfigError(f"unknown space '{desc.tag}'")

"""Discretised operator families: grid suprema and tail-limit estimation.

A family grid holds one entry per sampled operator parameter together with a
remoteness scale rho > 0 that shrinks exactly when the parameter escapes every
compact set.  The seminorm is the exact maximum of the per-entry evaluations
over the grid; the tail profile restricts that maximum to entries with
rho <= t for a shrinking dyadic ladder of scales t, and its last level is the
reported limit estimate.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigError, NumericalError


def thread_budget() -> int:
    """Worker count from OSCILLOMETER_THREADS (0 or unset = auto)."""
    raw = os.environ.get("OSCILLOMETER_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"OSCILLOMETER_THREADS must be an integer, got {raw!r}")
    if n < 0:
        raise ConfigError("OSCILLOMETER_THREADS must be >= 0")
    if n == 0:
        return min(4, os.cpu_count() or 1)
    return n


def dyadic_level_count(remoteness: np.ndarray) -> int:
    """Number of distinct power-of-two bins spanned by the remoteness values."""
    r = np.asarray(remoteness, dtype=float)
    return int(np.unique(np.floor(np.log2(r)).astype(int)).size)


class OperatorFamilyGrid:
    """Sampled operator family for one space.

    entries are exposed as parallel arrays: `params[i]` describes entry i,
    `remoteness[i]` is its scale, and `evaluate_all(f)` returns the vector of
    per-entry values ||L_i f||.  Entries are independent; evaluation may be
    chunked across threads without affecting results.
    """

    def __init__(self, space_tag: str, params: Sequence, remoteness,
                 eval_all: Callable[[object], np.ndarray],
                 allowance_rel: float = 0.02,
                 default_scales: Optional[np.ndarray] = None,
                 parallel_chunks: int = 1):
        remoteness = np.asarray(remoteness, dtype=float)
        if remoteness.ndim != 1 or len(params) != remoteness.size:
            raise ConfigError("family parameters and remoteness lengths differ")
        if remoteness.size == 0:
            raise ConfigError("empty family grid")
        if np.any(remoteness <= 0):
            raise ConfigError("remoteness scales must be positive")
        if dyadic_level_count(remoteness) < 6:
            raise ConfigError("family resolution too coarse: fewer than 6 dyadic levels")
        remoteness.setflags(write=False)
        self.space_tag = space_tag
        self.params = params if hasattr(params, "__getitem__") else list(params)
        self.remoteness = remoteness
        self._eval_all = eval_all
        self.allowance_rel = float(allowance_rel)
        self._parallel_chunks = max(1, int(parallel_chunks))
        if default_scales is None:
            default_scales = dyadic_scales(float(remoteness.max()),
                                           float(remoteness.min()))
        self.default_scales = np.asarray(default_scales, dtype=float)

    def __len__(self) -> int:
        return len(self.params)

    def evaluate_all(self, f) -> np.ndarray:
        workers = thread_budget()
        if workers <= 1 or self._parallel_chunks <= 1:
            vals = np.asarray(self._eval_all(f, None), dtype=float)
        else:
            bounds = np.linspace(0, len(self), self._parallel_chunks + 1).astype(int)
            vals = np.empty(len(self), dtype=float)

            def run(i):
                lo, hi = bounds[i], bounds[i + 1]
                if hi > lo:
                    vals[lo:hi] = self._eval_all(f, (lo, hi))

            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(run, range(self._parallel_chunks)))
        if vals.shape != (len(self),):
            raise NumericalError("family evaluation returned a malformed vector")
        if not np.all(np.isfinite(vals)):
            raise NumericalError("family evaluation produced non-finite values")
        if np.any(vals < 0):
            raise NumericalError("family evaluation produced negative values")
        return vals


def dyadic_scales(t0: float, t_min: float, max_levels: int = 24) -> np.ndarray:
    """Ladder t0, t0/2, ... down to the last level >= t_min (at most max_levels)."""
    if t0 <= 0 or t_min <= 0 or t_min > t0:
        raise ConfigError("invalid scale ladder bounds")
    k = min(int(np.floor(np.log2(t0 / t_min) + 1e-9)), max_levels - 1)
    return t0 * 0.5 ** np.arange(k + 1)


@dataclass(frozen=True)
class SeminormReport:
    """Exact grid supremum with the first parameter attaining it."""

    value: float
    argmax_param: object
    grid_size: int

    def to_dict(self) -> dict:
        return {"value": self.value, "argmax_param": _param_dict(self.argmax_param),
                "grid_size": self.grid_size}


def _param_dict(param) -> object:
    if hasattr(param, "_asdict"):
        return {k: _jsonable(v) for k, v in param._asdict().items()}
    return _jsonable(param)


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    return v


class TailProfile:
    """Non-increasing tail suprema S(t_k) = max{ ||Lf|| : rho(L) <= t_k }.

    Levels with no qualifying entries are marked empty (NaN), not errors.
    """

    def __init__(self, scales, tail_sups, allowance_rel: float = 0.02):
        scales = np.asarray(scales, dtype=float)
        tail_sups = np.asarray(tail_sups, dtype=float)
        if scales.shape != tail_sups.shape or scales.ndim != 1:
            raise ConfigError("scales and tail sups must be parallel vectors")
        if np.any(np.diff(scales) >= 0):
            raise ConfigError("scales must be strictly decreasing")
        filled = tail_sups[~np.isnan(tail_sups)]
        if np.any(np.diff(filled) > 1e-12 * np.maximum(1.0, filled[:-1])):
            raise NumericalError("tail suprema must be non-increasing")
        self.scales = scales
        self.tail_sups = tail_sups
        self.allowance_rel = float(allowance_rel)

    def nonempty(self) -> tuple[np.ndarray, np.ndarray]:
        mask = ~np.isnan(self.tail_sups)
        return self.scales[mask], self.tail_sups[mask]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["scale", "tail_sup"])
        for t, s in zip(self.scales, self.tail_sups):
            writer.writerow([repr(float(t)), "" if np.isnan(s) else repr(float(s))])
        return buf.getvalue()

    def to_rows(self) -> list:
        return [[float(t), None if np.isnan(s) else float(s)]
                for t, s in zip(self.scales, self.tail_sups)]


def seminorm_sup(fam: OperatorFamilyGrid, f,
                 values: Optional[np.ndarray] = None) -> SeminormReport:
    """Exact maximum of the family evaluations over the grid.

    Ties resolve to the first entry in grid order.  A precomputed value vector
    may be passed to share work with tail_profile.
    """
    if len(fam) == 0:
        raise ConfigError("empty family grid")
    vals = fam.evaluate_all(f) if values is None else values
    idx = int(np.argmax(vals))
    return SeminormReport(float(vals[idx]), fam.params[idx], len(fam))


def tail_profile(fam: OperatorFamilyGrid, f, scales=None,
                 values: Optional[np.ndarray] = None) -> TailProfile:
    """Tail suprema of the family evaluations over the declining scale ladder."""
    if scales is None:
        scales = fam.default_scales
    scales = np.asarray(scales, dtype=float)
    if scales.ndim != 1 or scales.size == 0 or np.any(scales <= 0):
        raise ConfigError("scale ladder must be a positive vector")
    ratios = scales[1:] / scales[:-1]
    if np.any(np.abs(ratios - 0.5) > 1e-9):
        raise ConfigError("scale ladder must be dyadic (each level half the last)")
    vals = fam.evaluate_all(f) if values is None else values
    sups = np.full(scales.size, np.nan)
    order = np.argsort(fam.remoteness)
    sorted_rho = fam.remoteness[order]
    # running max over entries sorted by remoteness: prefix maxima give each
    # level's sup in one pass
    prefix_max = np.maximum.accumulate(vals[order])
    counts = np.searchsorted(sorted_rho, scales * (1 + 1e-12), side="right")
    nonzero = counts > 0
    sups[nonzero] = prefix_max[counts[nonzero] - 1]
    return TailProfile(scales, sups, allowance_rel=fam.allowance_rel)


def limsup_estimate(profile: TailProfile) -> tuple[float, float]:
    """Last-level tail sup plus a one-sided uncertainty.

    The estimate is the sup at the finest non-empty scale; the uncertainty adds
    the gap to the previous level and the grid-resolution allowance.  The pair
    is always reported together.
    """
    _, sups = profile.nonempty()
    if sups.size < 3:
        raise ConfigError("insufficient tail")
    estimate = float(sups[-1])
    uncertainty = float(abs(sups[-1] - sups[-2])) + profile.allowance_rel * estimate
    return estimate, uncertainty

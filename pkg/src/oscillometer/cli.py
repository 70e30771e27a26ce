"""Batch front end: configure a space, pick a function, run a task, emit
reports.

    oscillometer <norm|distance|check> --config path.json [--out dir] [--seed n]

Exit codes: 0 success, 2 configuration error, 4 failed check (a tail estimate
exceeding a certified upper bound signals an implementation bug, never a
mathematical possibility), 3 numerical failure.  Reports are JSON with sorted
keys, tail profiles additionally CSV; all writes go through a temp file and an
atomic rename so failures never leave partial output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import approx, builtins as fn_registry, distance as dist_mod
from .errors import ConfigError, NumericalError
from .family import seminorm_sup, tail_profile, limsup_estimate
from .spaces import SpaceDescriptor, build_family, compose_mobius

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CHECK_FAILED = 4


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


class RunConfig:
    """Validated run configuration."""

    def __init__(self, raw: dict, out_dir: str, seed: int):
        if "space" not in raw:
            raise ConfigError("config needs a 'space' block")
        if "function" not in raw:
            raise ConfigError("config needs a 'function' block")
        space_block = raw["space"]
        if isinstance(space_block, str):
            space_block = {"space": space_block}
        self.desc = SpaceDescriptor.from_config(space_block)
        self.function_cfg = raw["function"]
        self.task = raw.get("task")
        self.family_cfg = raw.get("family")
        self.approximants_cfg = raw.get("approximants")
        self.phi_cfg = raw.get("phi")
        self.tolerance = float(raw.get("tolerance", 0.02))
        self.slack = float(raw.get("slack", 1e-3))
        self.x_tol_rel = float(raw.get("x_tol_rel", 1e-2))
        output = raw.get("output", {})
        self.report_path = os.path.join(out_dir, output.get("report", "report.json"))
        self.profile_path = os.path.join(out_dir, output.get("profile", "profile.csv"))
        self.seed = int(raw.get("seed", seed))

    def make_function(self):
        return fn_registry.make_function(self.function_cfg, self.desc)


def _load_config(args) -> RunConfig:
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    return RunConfig(raw, args.out, args.seed)


def _check_task(cfg: RunConfig, expected: str) -> None:
    if cfg.task is not None and cfg.task != expected:
        raise ConfigError(f"config task '{cfg.task}' does not match "
                          f"subcommand '{expected}'")


def cmd_norm(cfg: RunConfig) -> int:
    _check_task(cfg, "norm")
    f = cfg.make_function()
    grid = build_family(cfg.desc)
    report = seminorm_sup(grid, f)
    payload = report.to_dict()
    payload["space"] = cfg.desc.tag
    payload["seed"] = cfg.seed
    _atomic_write(cfg.report_path, _dump_json(payload))
    return EXIT_OK


def cmd_distance(cfg: RunConfig) -> int:
    _check_task(cfg, "distance")
    f = cfg.make_function()
    grid = build_family(cfg.desc)
    if cfg.approximants_cfg:
        fam = approx.family_from_config(cfg.approximants_cfg, f)
        ids = [f"{fam.kind}[{p}]" for p in fam.parameters]
        report = dist_mod.sandwich_check(cfg.desc, f, fam.members, ids=ids,
                                         slack=cfg.slack, grid=grid)
        payload = report.to_dict()
        profile = report.tail_profile
        ok = report.sandwich_ok
    else:
        estimate, uncertainty, profile = dist_mod.distance_estimate(
            cfg.desc, f, grid=grid)
        payload = {"limsup_estimate": estimate, "uncertainty": uncertainty,
                   "tail_profile": profile.to_rows()}
        ok = True
    payload["space"] = cfg.desc.tag
    payload["seed"] = cfg.seed
    _atomic_write(cfg.report_path, _dump_json(payload))
    _atomic_write(cfg.profile_path, profile.to_csv())
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_check(cfg: RunConfig) -> int:
    if cfg.task == "assumption-check":
        return _run_assumption(cfg)
    if cfg.task == "invariance-check":
        return _run_invariance(cfg)
    raise ConfigError("check needs task 'assumption-check' or 'invariance-check'")


def _run_assumption(cfg: RunConfig) -> int:
    if not cfg.family_cfg:
        raise ConfigError("assumption-check needs a 'family' block")
    f = cfg.make_function()
    fam = approx.family_from_config(cfg.family_cfg, f)
    report = approx.assumption_check(cfg.desc, f, fam, slack=cfg.slack,
                                     x_tol_rel=cfg.x_tol_rel)
    payload = report.to_dict()
    payload["space"] = cfg.desc.tag
    payload["family"] = fam.kind
    payload["parameters"] = [float(p) for p in fam.parameters]
    payload["seed"] = cfg.seed
    _atomic_write(cfg.report_path, _dump_json(payload))
    return EXIT_OK if report.verdict else EXIT_CHECK_FAILED


def _run_invariance(cfg: RunConfig) -> int:
    if cfg.desc.tag != "qk":
        raise ConfigError("invariance-check runs on the invariant-integral space")
    if not cfg.phi_cfg:
        raise ConfigError("invariance-check needs a 'phi' block")
    a = complex(*cfg.phi_cfg.get("a", [0.0, 0.0]))
    lam_re, lam_im = cfg.phi_cfg.get("lambda", [1.0, 0.0])
    f = cfg.make_function()
    grid = build_family(cfg.desc)
    base = seminorm_sup(grid, f).value
    composed = compose_mobius(f, a, complex(lam_re, lam_im))
    moved = seminorm_sup(grid, composed).value
    deviation = abs(moved - base) / base if base > 0 else abs(moved)
    payload = {
        "space": cfg.desc.tag,
        "sup_original": base,
        "sup_composed": moved,
        "relative_deviation": deviation,
        "tolerance": cfg.tolerance,
        "phi": {"a": [a.real, a.imag], "lambda": [lam_re, lam_im]},
        "seed": cfg.seed,
    }
    _atomic_write(cfg.report_path, _dump_json(payload))
    return EXIT_OK if deviation <= cfg.tolerance else EXIT_CHECK_FAILED


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="oscillometer",
        description="grid seminorms, tail-limit distances and approximation "
                    "checks for oscillation-type function spaces")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [("norm", "grid seminorm of a function"),
                            ("distance", "tail-limit distance estimate"),
                            ("check", "assumption or invariance check")]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=0,
                       help="seed recorded in reports and used by randomized suites")
    args = parser.parse_args(argv)
    handler = {"norm": cmd_norm, "distance": cmd_distance, "check": cmd_check}
    try:
        cfg = _load_config(args)
        return handler[args.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except KeyError as exc:
        print(f"configuration error: missing key {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

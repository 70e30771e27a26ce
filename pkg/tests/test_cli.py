import json

import pytest

from oscillometer.cli import main

BLOCH_LIGHT = {"space": "bloch",
               "resolution": {"uniform_radii": 64, "shells": 8, "angles": 128}}
QK_LIGHT = {"space": "qk",
            "resolution": {"shell_from": 2, "shell_to": 7,
                           "extra_radii": [0.25, 0.5], "angles": 32,
                           "quad_nr": 24, "quad_ntheta": 64}}


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def run(tmp_path, command, payload, seed=0):
    cfg = write_config(tmp_path, f"{command}.json", payload)
    return main([command, "--config", cfg, "--out", str(tmp_path),
                 "--seed", str(seed)])


class TestNorm:
    def test_bloch_monomial(self, tmp_path):
        code = run(tmp_path, "norm", {
            "space": BLOCH_LIGHT,
            "function": {"kind": "builtin", "name": "monomial", "degree": 1},
            "output": {"report": "r.json"},
        })
        assert code == 0
        report = json.loads((tmp_path / "r.json").read_text())
        assert report["value"] == pytest.approx(1.0)
        assert report["grid_size"] > 0

    def test_deterministic_bytes(self, tmp_path):
        payload = {
            "space": QK_LIGHT,
            "function": {"kind": "builtin", "name": "poly",
                         "coeffs": [[1, 0], [0, 0], [0.5, -0.5]]},
            "output": {"report": "r.json"},
        }
        run(tmp_path, "norm", payload, seed=3)
        first = (tmp_path / "r.json").read_bytes()
        run(tmp_path, "norm", payload, seed=3)
        assert (tmp_path / "r.json").read_bytes() == first

    def test_missing_config(self, tmp_path):
        assert main(["norm", "--config", str(tmp_path / "nope.json")]) == 2

    def test_task_mismatch(self, tmp_path):
        code = run(tmp_path, "norm", {
            "space": BLOCH_LIGHT,
            "function": {"kind": "builtin", "name": "monomial", "degree": 1},
            "task": "distance",
        })
        assert code == 2

    def test_bad_function_name(self, tmp_path):
        code = run(tmp_path, "norm", {
            "space": BLOCH_LIGHT,
            "function": {"kind": "builtin", "name": "step_half"},
        })
        assert code == 2


class TestDistance:
    def test_bloch_log_singular_with_sandwich(self, tmp_path):
        code = run(tmp_path, "distance", {
            "space": {"space": "bloch"},
            "function": {"kind": "builtin", "name": "log_singular"},
            "approximants": {"kind": "dilation", "ladder": {"levels": 4}},
            "output": {"report": "d.json", "profile": "d.csv"},
        })
        assert code == 0
        report = json.loads((tmp_path / "d.json").read_text())
        assert report["sandwich_ok"] is True
        assert 1.95 <= report["limsup_estimate"] <= 2.02
        csv_text = (tmp_path / "d.csv").read_text()
        assert csv_text.splitlines()[0] == "scale,tail_sup"

    def test_estimate_only(self, tmp_path):
        code = run(tmp_path, "distance", {
            "space": BLOCH_LIGHT,
            "function": {"kind": "builtin", "name": "monomial", "degree": 2},
            "output": {"report": "d.json", "profile": "d.csv"},
        })
        assert code == 0
        report = json.loads((tmp_path / "d.json").read_text())
        assert report["limsup_estimate"] <= 0.05


class TestCheck:
    def test_assumption_check_passes(self, tmp_path):
        code = run(tmp_path, "check", {
            "space": {"space": "bmo_circle", "p": 1,
                      "resolution": {"n_samples": 4096, "midpoints": 128,
                                     "min_len_exp": 2, "max_len_exp": 8}},
            "function": {"kind": "builtin", "name": "triangle"},
            "task": "assumption-check",
            "family": {"kind": "poisson_circle", "ladder": {"levels": 8}},
            "output": {"report": "a.json"},
        })
        assert code == 0
        report = json.loads((tmp_path / "a.json").read_text())
        assert report["verdict"] == "pass"

    def test_lip_alpha_one_refused(self, tmp_path):
        code = run(tmp_path, "check", {
            "space": {"space": "lip", "alpha": 1.0,
                      "domain": {"lo": [-1.0], "hi": [1.0], "step": 0.01}},
            "function": {"kind": "builtin", "name": "holder_cusp",
                         "exponent": 1.0},
            "task": "assumption-check",
            "family": {"kind": "lip_smooth", "ladder": {"levels": 5}},
        })
        assert code == 2

    def test_invariance_check(self, tmp_path):
        code = run(tmp_path, "check", {
            "space": {"space": "qk"},
            "function": {"kind": "builtin", "name": "monomial", "degree": 2},
            "task": "invariance-check",
            "phi": {"a": [0.3, 0.2], "lambda": [1.0, 0.0]},
            "tolerance": 0.02,
            "output": {"report": "i.json"},
        })
        assert code == 0
        report = json.loads((tmp_path / "i.json").read_text())
        assert report["relative_deviation"] <= 0.02

    def test_invariance_failure_exit_code(self, tmp_path):
        # an absurdly tight tolerance forces the failure path
        code = run(tmp_path, "check", {
            "space": QK_LIGHT,
            "function": {"kind": "builtin", "name": "monomial", "degree": 2},
            "task": "invariance-check",
            "phi": {"a": [0.3, 0.2], "lambda": [1.0, 0.0]},
            "tolerance": 1e-12,
        })
        assert code == 4

    def test_check_requires_task(self, tmp_path):
        code = run(tmp_path, "check", {
            "space": BLOCH_LIGHT,
            "function": {"kind": "builtin", "name": "monomial", "degree": 1},
        })
        assert code == 2

    def test_no_partial_files_on_failure(self, tmp_path):
        code = run(tmp_path, "check", {
            "space": {"space": "lip", "alpha": 1.0},
            "function": {"kind": "builtin", "name": "linear"},
            "task": "assumption-check",
            "family": {"kind": "lip_smooth", "ladder": {"levels": 5}},
            "output": {"report": "never.json"},
        })
        assert code == 2
        assert not (tmp_path / "never.json").exists()
        assert not list(tmp_path.glob("*.tmp"))

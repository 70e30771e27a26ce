import numpy as np
import pytest

from oscillometer.approx import (ApproxFamily, assumption_check, dilate,
                                 dilation_family, family_from_config,
                                 fejer_family, fejer_taylor, lip_const,
                                 lip_smooth, lip_smooth_family,
                                 lip_smooth_with_info, poisson_circle,
                                 poisson_family, poisson_torus2,
                                 _extend_mcshane)
from oscillometer.builtins import (box_builtin, circle_builtin, log_singular,
                                   step_half_values, taylor_builtin,
                                   torus_builtin)
from oscillometer.errors import ConfigError
from oscillometer.family import seminorm_sup
from oscillometer.funcrep import (BoxDomain, EuclideanSamples,
                                  PeriodicSamples, TaylorFunction,
                                  TorusSamples)
from oscillometer.spaces import SpaceDescriptor, build_family


class TestPoissonCircle:
    def test_single_mode_multiplier(self):
        n = 64
        theta = 2 * np.pi * np.arange(n) / n
        f = PeriodicSamples(np.cos(theta))
        g = poisson_circle(f, 0.5)
        assert np.allclose(g.values, 0.5 * np.cos(theta), atol=1e-13)

    def test_constant_fixed(self):
        f = PeriodicSamples(np.full(32, 2.0 - 1.0j))
        g = poisson_circle(f, 0.7)
        assert np.allclose(g.values, f.values, atol=1e-13)

    def test_r_zero_returns_mean(self):
        rng = np.random.default_rng(8)
        f = PeriodicSamples(rng.normal(size=64))
        g = poisson_circle(f, 0.0)
        assert np.allclose(g.values, f.values.mean(), atol=1e-13)

    def test_radius_validation(self):
        f = PeriodicSamples(np.ones(8))
        with pytest.raises(ConfigError):
            poisson_circle(f, 1.0)


class TestPoissonTorus:
    def test_constant_fixed(self):
        F = TorusSamples(np.full((16, 16), 3.0))
        assert np.allclose(poisson_torus2(F, 0.6).values, 3.0)

    def test_single_mode(self):
        n = 32
        theta = 2 * np.pi * np.arange(n) / n
        F = TorusSamples(np.cos(theta)[:, None] * np.ones(n)[None, :])
        G = poisson_torus2(F, 0.5)
        assert np.allclose(G.values, 0.5 * np.cos(theta)[:, None], atol=1e-13)

    def test_multiplier_factorises_over_tensor_products(self):
        rng = np.random.default_rng(9)
        n = 32
        g = rng.normal(size=n)
        h = rng.normal(size=n)
        F = TorusSamples(np.outer(g, h))
        left = poisson_torus2(F, 0.6).values
        gs = poisson_circle(PeriodicSamples(g), 0.6).values
        hs = poisson_circle(PeriodicSamples(h), 0.6).values
        assert np.allclose(left, np.outer(gs, hs), atol=1e-12)


class TestDilate:
    def test_coefficients(self):
        f = taylor_builtin("monomial", degree=2)
        assert np.allclose(dilate(f, 0.5).coeffs, [0.0, 0.25])

    def test_identity_and_zero(self):
        f = taylor_builtin("poly", coeffs=[[1, 0], [2, 0]])
        assert dilate(f, 1.0) is f
        z = dilate(f, 0.0)
        assert np.allclose(z.coeffs, 0.0)

    def test_closed_form_composition(self):
        f = log_singular()
        g = dilate(f, 0.5)
        assert g.value(0.8) == pytest.approx(-np.log(1 - 0.4))
        assert g.deriv(0.8) == pytest.approx(0.5 / (1 - 0.4))


class TestFejer:
    # coefficient damping follows the Cesaro formula (1 - k/(n+1)) a_k
    def test_monomial_within_range(self):
        for k, n in [(1, 1), (2, 4), (3, 8)]:
            f = taylor_builtin("monomial", degree=k)
            g = fejer_taylor(f, n)
            assert g.coeffs[k - 1] == pytest.approx(1 - k / (n + 1))

    def test_monomial_beyond_range_truncates_to_zero(self):
        f = taylor_builtin("monomial", degree=5)
        g = fejer_taylor(f, 3)
        assert np.allclose(g.coeffs, 0.0)

    def test_z_order_one(self):
        g = fejer_taylor(taylor_builtin("monomial", degree=1), 1)
        assert g.coeffs[0] == pytest.approx(0.5)

    def test_coefficientwise_convergence(self):
        f = taylor_builtin("poly", coeffs=[[0.3, 0.1], [0, 0], [-0.7, 0.2]])
        for k in (1, 3):
            a_k = f.coeffs[k - 1]
            for n in (10, 100, 1000):
                g = fejer_taylor(f, n)
                assert abs(g.coeffs[k - 1] - a_k) == pytest.approx(
                    abs(a_k) * k / (n + 1))

    def test_truncated_coefficients_refused(self):
        f = TaylorFunction(1.0 / np.arange(1, 9))  # truncated, no closed form
        with pytest.raises(ConfigError, match="unavailable"):
            fejer_taylor(f, 20)


class TestLipSmooth:
    def test_alpha_one_refused(self):
        dom = BoxDomain([0.0], [1.0], 0.01)
        f = EuclideanSamples(dom, dom.axes()[0], 1.0)
        with pytest.raises(ConfigError, match="little space may be trivial"):
            lip_smooth(f, 0.1)

    def test_kernel_under_resolved(self):
        dom = BoxDomain([0.0], [1.0], 0.01)
        f = EuclideanSamples(dom, dom.axes()[0] ** 2, 0.5)
        with pytest.raises(ConfigError, match="kernel under-resolved"):
            lip_smooth(f, 0.001)

    def test_constant_preserved(self):
        dom = BoxDomain([0.0], [1.0], 0.01)
        f = EuclideanSamples(dom, np.full(101, 4.2), 0.5)
        g = lip_smooth(f, 0.05)
        assert np.allclose(g.values, 4.2, atol=1e-10)

    def test_zero_preserved(self):
        dom = BoxDomain([0.0], [1.0], 0.01)
        f = EuclideanSamples(dom, np.zeros(101), 0.5)
        assert np.allclose(lip_smooth(f, 0.05).values, 0.0, atol=1e-12)

    def test_cosine_eigenfunction(self):
        # the scale-t kernel damps frequency-1 content by e^{-t}; the grid
        # value differs by the extension mismatch in the kernel tails
        dom = BoxDomain([-1.0], [1.0], 2e-3)
        x = dom.axes()[0]
        f = EuclideanSamples(dom, np.cos(x), 0.9)
        g, trunc = lip_smooth_with_info(f, 0.01)
        inner = np.abs(x) <= 0.25
        err = np.max(np.abs(g.values[inner] - np.exp(-0.01) * np.cos(x[inner])))
        assert err < 0.03
        assert trunc < 1e-2

    def test_contractivity_of_discrete_kernel(self):
        # unit-mass positive kernel: quotients never grow past the extension
        # constant
        dom = BoxDomain([-1.0], [1.0], 1e-3)
        f = box_builtin("holder_cusp", dom, 0.5)
        lam = lip_const(f)
        desc = SpaceDescriptor("lip", alpha=0.5, lip_domain=dom)
        fam = build_family(desc)
        base = seminorm_sup(fam, f).value
        for t in (0.1, 0.01, 0.002):
            g = lip_smooth(f, t)
            assert seminorm_sup(fam, g).value <= base * (1 + 1e-12)
        assert base == pytest.approx(lam)

    def test_mcshane_extension_matches_bruteforce(self):
        dom = BoxDomain([-1.0], [1.0], 0.01)
        rng = np.random.default_rng(10)
        f = EuclideanSamples(dom, np.cumsum(rng.normal(size=201)) * 0.05, 0.5)
        lam = lip_const(f)
        pad = 40
        ext = _extend_mcshane(f, lam, pad)
        ys = dom.axes()[0]
        for side, xs in [("left", ys[0] - 0.01 * np.arange(pad, 0, -1)),
                         ("right", ys[-1] + 0.01 * np.arange(1, pad + 1))]:
            want = np.min(f.values[None, :]
                          + lam * np.abs(xs[:, None] - ys[None, :]) ** 0.5, axis=1)
            got = ext[:pad] if side == "left" else ext[-pad:]
            assert np.allclose(got, want, atol=1e-12), side

    def test_mcshane_2d(self):
        dom = BoxDomain([0.0, 0.0], [1.0, 1.0], 1.0 / 16)
        xx, yy = np.meshgrid(dom.axes()[0], dom.axes()[1], indexing="ij")
        f = EuclideanSamples(dom, np.hypot(xx - 0.5, yy - 0.5) ** 0.5, 0.5)
        g = lip_smooth(f, 0.25, pad_factor=1.0)
        assert g.values.shape == dom.shape
        assert np.all(np.isfinite(g.values))


class TestLadders:
    def test_family_from_config(self):
        f = PeriodicSamples(step_half_values(1024))
        fam = family_from_config({"kind": "poisson_circle",
                                  "ladder": {"levels": 4}}, f)
        assert fam.kind == "poisson_circle"
        assert fam.parameters == [0.5, 0.75, 0.875, 0.9375]
        assert len(fam.members) == 4

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            family_from_config({"kind": "nope"}, None)

    def test_lip_ladder_stops_at_grid_step(self):
        dom = BoxDomain([-1.0], [1.0], 1e-3)
        f = box_builtin("holder_cusp", dom, 0.5)
        fam = lip_smooth_family(f, levels=12, t0=0.1)
        assert all(t >= 1e-3 for t in fam.parameters)
        assert len(fam.members) < 12


class TestPoissonContractivity:
    def test_random_trig_polynomials(self):
        # dense midpoints and p = 2: the smoothed arcs stay inside the family,
        # so the grid comparison inherits the continuum contraction
        n = 4096
        res = {"n_samples": n, "midpoints": "all", "min_len_exp": 2,
               "max_len_exp": 8}
        desc = SpaceDescriptor("bmo_circle", p=2.0, resolution=res)
        grid = build_family(desc)
        rng = np.random.default_rng(11)
        theta = 2 * np.pi * np.arange(n) / n
        for _ in range(20):
            deg = int(rng.integers(1, 30))
            vals = np.zeros(n, dtype=complex)
            for k in range(1, deg + 1):
                c = rng.normal() + 1j * rng.normal()
                vals += c * np.exp(1j * k * theta)
            f = PeriodicSamples(vals)
            base = seminorm_sup(grid, f).value
            for r in (0.5, 0.9, 0.99):
                val = seminorm_sup(grid, poisson_circle(f, r)).value
                assert val <= base * (1 + 1e-3)


class TestDilationLittleness:
    def test_dilated_members_have_vanishing_tails(self):
        from oscillometer.family import limsup_estimate, tail_profile
        desc = SpaceDescriptor("bloch")
        grid = build_family(desc)
        f = log_singular()
        prof_f = tail_profile(grid, f)
        for r in (0.5, 0.75, 0.875):
            g = dilate(f, r)
            est, _ = limsup_estimate(tail_profile(grid, g))
            # the dilated tail at the finest level is controlled by f's
            # profile near scale 1 - r, and vanishes as the tail refines
            scales, sups = prof_f.nonempty()
            level = np.searchsorted(-scales, -(1 - r))
            assert est <= sups[min(level, len(sups) - 1)] + 1e-9
            assert est < 0.05


class TestAssumptionCheck:
    def test_bmo_triangle_poisson_passes(self):
        # spectrum ~ k^-2, so the dyadic ladder converges in the ambient norm
        # well before the multiplier hits grid Nyquist effects; the step
        # function needs the acceptance-scale grid and is checked there
        res = {"n_samples": 4096, "midpoints": 128, "min_len_exp": 2,
               "max_len_exp": 8}
        desc = SpaceDescriptor("bmo_circle", p=1.0, resolution=res)
        f = circle_builtin("triangle", 4096)
        fam = poisson_family(f, levels=8)
        rep = assumption_check(desc, f, fam)
        assert rep.verdict
        assert max(rep.member_norms) <= rep.input_norm * (1 + 1e-3)
        assert rep.x_distances[-1] <= rep.x_tolerance

    def test_bloch_polynomial_dilation_passes(self):
        desc = SpaceDescriptor("bloch")
        f = taylor_builtin("poly", coeffs=[[1, 0], [0, 0], [1, 0]])
        fam = dilation_family(f, levels=8)
        rep = assumption_check(desc, f, fam)
        assert rep.verdict
        assert rep.slack_used == 0.0

    def test_zero_function_passes(self):
        desc = SpaceDescriptor("bloch")
        f = TaylorFunction.polynomial([0.0])
        fam = dilation_family(f, levels=6)
        rep = assumption_check(desc, f, fam)
        assert rep.verdict
        assert rep.input_norm == 0.0

    def test_report_serialises(self):
        desc = SpaceDescriptor("bloch")
        f = taylor_builtin("monomial", degree=1)
        rep = assumption_check(desc, f, dilation_family(f, levels=8))
        d = rep.to_dict()
        assert d["verdict"] == "pass"
        assert len(d["member_norms"]) == 8

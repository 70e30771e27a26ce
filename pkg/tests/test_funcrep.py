import numpy as np
import pytest

from oscillometer.errors import ConfigError, NumericalError
from oscillometer.funcrep import (Arc, BoxDomain, EuclideanSamples,
                                  PeriodicSamples, QuadratureRule,
                                  TaylorFunction, TorusSamples, arc_average,
                                  disk_quadrature, eval_deriv, mobius_apply,
                                  snap_arc, x_norm)
from oscillometer.builtins import log_singular, step_half_values


def direct_arc_average(values, start, ncells):
    """Independent trapezoid oracle: explicit loop over the window."""
    n = values.shape[0]
    h = 2 * np.pi / n
    total = 0.0
    for j in range(ncells + 1):
        w = 0.5 if j in (0, ncells) else 1.0
        total += w * values[(start + j) % n]
    return total * h / (ncells * h)


class TestPeriodicSamples:
    def test_grid_validation(self):
        with pytest.raises(ConfigError):
            PeriodicSamples(np.ones(7))
        with pytest.raises(ConfigError):
            PeriodicSamples(np.ones(48))  # not a power of two

    def test_immutable(self):
        f = PeriodicSamples(np.ones(8))
        with pytest.raises(ValueError):
            f.values[0] = 2.0

    def test_arithmetic(self):
        f = PeriodicSamples(np.arange(8, dtype=float))
        g = (2.0 * f) - f
        assert np.allclose(g.values, f.values)


class TestArcAverage:
    def test_constant(self):
        f = PeriodicSamples(np.full(64, 3.5 + 1j))
        assert arc_average(f, Arc(1.3, 0.7)) == pytest.approx(3.5 + 1j)

    def test_zero_mean_full_circle(self):
        n = 64
        theta = 2 * np.pi * np.arange(n) / n
        f = PeriodicSamples(np.cos(theta))
        assert abs(arc_average(f, Arc(0.0, 2 * np.pi))) < 1e-14

    def test_step_half_on_symmetric_arc(self):
        # oracle: direct sum over samples
        n = 256
        f = PeriodicSamples(step_half_values(n))
        arc = Arc(0.0, np.pi)  # [-pi/2, pi/2)
        start, ncells = snap_arc(f, arc)
        oracle = direct_arc_average(f.values, start, ncells)
        assert oracle == pytest.approx(0.5, abs=1e-15)
        assert arc_average(f, arc) == pytest.approx(oracle, abs=1e-14)

    def test_prefix_matches_direct_on_random_arcs(self):
        rng = np.random.default_rng(1)
        n = 1024
        f = PeriodicSamples(rng.normal(size=n) + 1j * rng.normal(size=n))
        for _ in range(100):
            mid = rng.uniform(0, 2 * np.pi)
            length = rng.uniform(4 * 2 * np.pi / n, 2 * np.pi)
            arc = Arc(mid, length)
            start, ncells = snap_arc(f, arc)
            want = direct_arc_average(f.values, start, ncells)
            got = arc_average(f, arc)
            assert abs(got - want) <= 1e-12 * max(1.0, abs(want))

    def test_under_resolved(self):
        f = PeriodicSamples(np.ones(64))
        with pytest.raises(ConfigError, match="under-resolved"):
            arc_average(f, Arc(0.0, 2 * np.pi / 64))

    def test_full_circle_arcs_identified(self):
        a = Arc(1.0, 2 * np.pi)
        b = Arc(2.0, 2 * np.pi)
        assert a == b


class TestEvalDeriv:
    def test_linear(self):
        f = TaylorFunction.polynomial([1.0])
        assert eval_deriv(f, 0.3 + 0.1j) == pytest.approx(1.0)

    def test_square(self):
        f = TaylorFunction.polynomial([0.0, 1.0])
        assert eval_deriv(f, 0.5) == pytest.approx(1.0)

    def test_log_closed_form(self):
        f = log_singular()
        assert eval_deriv(f, 0.9) == pytest.approx(10.0)

    def test_outside_disc(self):
        f = TaylorFunction.polynomial([1.0])
        with pytest.raises(ConfigError, match="outside unit disc"):
            eval_deriv(f, 1.0)

    def test_truncated_radius_guard(self):
        # slowly decaying coefficients without closed forms: reject near the rim
        f = TaylorFunction(1.0 / np.arange(1, 257))
        assert f.radius_cap < 1.0
        with pytest.raises(ConfigError):
            eval_deriv(f, 0.999999)

    def test_polynomial_evaluable_everywhere(self):
        f = TaylorFunction.polynomial(np.ones(8))
        assert np.isfinite(eval_deriv(f, 0.999999))


class TestTaylorFunction:
    def test_needs_data(self):
        with pytest.raises(ConfigError):
            TaylorFunction()

    def test_subtraction_merges_closed_forms_with_polynomials(self):
        f = log_singular()
        g = TaylorFunction.polynomial([0.5])
        d = f - g
        z = 0.999
        assert d.value(z) == pytest.approx(-np.log(1 - z) - 0.5 * z)
        assert d.deriv(z) == pytest.approx(1 / (1 - z) - 0.5)

    def test_scaling(self):
        f = log_singular()
        g = f * 2.0
        assert g.value(0.5) == pytest.approx(2 * f.value(0.5))
        assert np.allclose(g.coeffs, 2 * f.coeffs)


class TestMobius:
    def test_basic_values(self):
        val, _ = mobius_apply(0.0, 1.0, 0.5)
        assert val == pytest.approx(-0.5)
        a = 0.3 + 0.2j
        val, _ = mobius_apply(a, 1j, a)
        assert abs(val) < 1e-15
        val, _ = mobius_apply(a, 1j, 0.0)
        assert val == pytest.approx(1j * a)

    def test_involution_on_random_points(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            a = (rng.uniform(0, 0.95) * np.exp(1j * rng.uniform(0, 2 * np.pi)))
            z = (rng.uniform(0, 1.0) * np.exp(1j * rng.uniform(0, 2 * np.pi)))
            w, _ = mobius_apply(a, 1.0, z)
            back, _ = mobius_apply(a, 1.0, w)
            assert abs(back - z) < 1e-12

    def test_derivative_formula(self):
        a, z = 0.4 - 0.1j, 0.2 + 0.3j
        _, d = mobius_apply(a, 1.0, z)
        eps = 1e-7
        v1, _ = mobius_apply(a, 1.0, z + eps)
        v0, _ = mobius_apply(a, 1.0, z - eps)
        assert d == pytest.approx((v1 - v0) / (2 * eps), rel=1e-6)

    def test_preconditions(self):
        with pytest.raises(ConfigError):
            mobius_apply(1.0, 1.0, 0.0)
        with pytest.raises(ConfigError):
            mobius_apply(0.5, 2.0, 0.0)
        with pytest.raises(ConfigError):
            mobius_apply(0.5, 1.0, 1.5)


class TestXNorm:
    def test_bergman_of_z(self):
        # oracle: the area integral of |z|^2 over the disc is pi/2
        f = TaylorFunction.polynomial([1.0])
        assert x_norm("bloch", f) == pytest.approx(np.sqrt(np.pi / 2))

    def test_hardy_of_z(self):
        f = TaylorFunction.polynomial([1.0])
        assert x_norm("qk", f) == pytest.approx(1.0)

    def test_l2_circle_of_sin(self):
        # oracle: integral of sin^2 over the circle is pi
        n = 512
        theta = 2 * np.pi * np.arange(n) / n
        f = PeriodicSamples(np.sin(theta))
        assert x_norm("bmo_circle", f) == pytest.approx(np.sqrt(np.pi))

    def test_parseval_for_trig_polynomials(self):
        rng = np.random.default_rng(3)
        n = 256
        theta = 2 * np.pi * np.arange(n) / n
        coeffs = rng.normal(size=10) + 1j * rng.normal(size=10)
        vals = np.zeros(n, dtype=complex)
        for k, c in enumerate(coeffs, start=1):
            vals += c * np.exp(1j * k * theta)
        f = PeriodicSamples(vals + 7.7)  # constant removed by the norm
        want = np.sqrt(2 * np.pi * np.sum(np.abs(coeffs) ** 2))
        assert abs(x_norm("bmo_circle", f) - want) < 1e-10 * want

    def test_mismatch(self):
        with pytest.raises(ConfigError):
            x_norm("bloch", PeriodicSamples(np.ones(8)))
        with pytest.raises(ConfigError):
            x_norm("nope", None)


class TestDiskQuadrature:
    def test_area(self):
        assert disk_quadrature(lambda z: np.ones_like(z, dtype=float)) == \
            pytest.approx(np.pi)

    def test_log_kernel(self):
        # oracle: 2 pi * int_0^1 r log(1/r) dr = pi/2
        got = disk_quadrature(lambda z: np.log(1.0 / np.abs(z)))
        assert got == pytest.approx(np.pi / 2, abs=1e-5)

    def test_abs_square(self):
        got = disk_quadrature(lambda z: np.abs(z) ** 2)
        assert got == pytest.approx(np.pi / 2, rel=1e-12)

    @pytest.mark.parametrize("m", range(7))
    def test_even_monomials_exact(self, m):
        rule = QuadratureRule(32, 64)
        got = disk_quadrature(lambda z: np.abs(z) ** (2 * m), rule)
        want = np.pi / (m + 1)  # 2 pi int r^(2m+1) dr
        assert abs(got - want) < 1e-8

    def test_singular_node(self):
        with pytest.raises(NumericalError, match="singular node"):
            disk_quadrature(lambda z: 1.0 / (np.abs(z) - np.abs(z)))


class TestBoxDomain:
    def test_exact_cover(self):
        with pytest.raises(ConfigError):
            BoxDomain([0.0], [1.0], 0.3)
        dom = BoxDomain([0.0], [1.0], 0.01)
        assert dom.shape == (101,)

    def test_2d(self):
        dom = BoxDomain([0.0, 0.0], [1.0, 2.0], 0.25)
        assert dom.shape == (5, 9)
        assert dom.diameter == pytest.approx(np.sqrt(5))

    def test_samples_shape_check(self):
        dom = BoxDomain([0.0], [1.0], 0.5)
        with pytest.raises(ConfigError):
            EuclideanSamples(dom, np.ones(5), 0.5)
        with pytest.raises(ConfigError):
            EuclideanSamples(dom, np.ones(3), 1.5)


class TestTorusSamples:
    def test_validation(self):
        with pytest.raises(ConfigError):
            TorusSamples(np.ones((8, 16)))
        with pytest.raises(ConfigError):
            TorusSamples(np.ones((6, 6)))

import json
import math

import numpy as np
import pytest
from numpy.polynomial import chebyshev as _cheb

from tracebounds.approx import (
    ApproxTarget,
    inv_poly,
    inv_sqrt_poly,
    monomial_cheb_approx,
    sup_error,
    taylor_truncation_length,
)
from tracebounds.chebyshev import ChebPoly, cheb_grid, eval_cheb
from tracebounds.rng import RngState


class TestChebPoly:
    def test_t3_value(self):
        p = ChebPoly((-1.0, 1.0), [0.0, 0.0, 0.0, 1.0])
        assert eval_cheb(p, 0.5) == pytest.approx(-1.0)  # T_3 = 4x^3 - 3x

    def test_affine_map(self):
        p = ChebPoly((0.0, 2.0), [0.0, 1.0])
        assert eval_cheb(p, 1.5) == pytest.approx(0.5)

    def test_matches_power_basis_oracle(self):
        g = RngState(31).generator()
        coeffs = g.standard_normal(7)
        p = ChebPoly((-1.0, 1.0), coeffs)
        power = _cheb.cheb2poly(coeffs)
        xs = g.uniform(-1, 1, size=50)
        expected = np.polyval(power[::-1], xs)
        np.testing.assert_allclose(p.evaluate(xs), expected, atol=1e-12)

    def test_outside_interval_warns(self):
        p = ChebPoly((0.0, 1.0), [1.0, 0.5])
        with pytest.warns(RuntimeWarning):
            p.evaluate(2.0)

    def test_json_round_trip_exact(self):
        g = RngState(32).generator()
        p = ChebPoly((1.0, 16.0), g.standard_normal(9))
        q = ChebPoly.from_json(p.to_json())
        assert q.interval == p.interval
        assert np.array_equal(q.coeffs, p.coeffs)  # bit-exact via repr

    def test_serialized_form(self):
        obj = json.loads(ChebPoly((0.0, 2.0), [0.25, 0.5]).to_json())
        assert obj == {"interval": [0.0, 2.0], "coeffs": [0.25, 0.5]}


class TestMonomialApprox:
    def test_square_exact(self):
        p = monomial_cheb_approx(2, 0.1)
        np.testing.assert_allclose(p.coeffs, [0.5, 0.0, 0.5])

    def test_linear_exact(self):
        p = monomial_cheb_approx(1, 0.3)
        np.testing.assert_allclose(p.coeffs, [0.0, 1.0])

    def test_s8_exact_and_s50_compressed(self):
        p8 = monomial_cheb_approx(8, 0.01)
        assert p8.degree() == 8  # cap 10 >= 8, expansion kept in full
        err = sup_error(p8, ApproxTarget("monomial", s=8), 4096)
        assert err <= 1e-12
        p50 = monomial_cheb_approx(50, 0.1)
        assert p50.degree() == 18
        err = sup_error(p50, ApproxTarget("monomial", s=50), 4096)
        assert err <= 0.1

    @pytest.mark.parametrize("s", list(range(1, 13)) + [25, 50])
    @pytest.mark.parametrize("delta", [0.1, 0.01])
    def test_compression_lattice(self, s, delta):
        p = monomial_cheb_approx(s, delta)
        assert p.degree() <= min(s, math.ceil(math.sqrt(2 * s * math.log(2 / delta))))
        assert sup_error(p, ApproxTarget("monomial", s=s), 4096) <= delta


class TestTaylorTruncationLength:
    def test_hand_case(self):
        assert taylor_truncation_length(2.0, 0.25) == 2

    def test_immediately_satisfied(self):
        assert taylor_truncation_length(2.0, 2.0) == 0

    def test_matches_linear_scan_oracle(self):
        kappa, delta_half = 16.0, 0.05
        t = 0
        while kappa * (1 - 1 / kappa) ** (t + 1) > delta_half:
            t += 1
        assert taylor_truncation_length(kappa, delta_half) == t

    def test_upper_bound(self):
        for kappa in (2.0, 7.0, 64.0):
            for dh in (0.3, 0.01):
                t = taylor_truncation_length(kappa, dh)
                assert t <= math.ceil(kappa * math.log(2 * kappa / dh)) + 1


class TestInvSqrtPoly:
    def test_value_at_one(self):
        q = inv_sqrt_poly(2.0, 0.4)
        assert abs(q.evaluate(1.0) - 1.0) <= 0.4 / math.sqrt(2)

    def test_value_at_kappa(self):
        q = inv_sqrt_poly(4.0, 0.1)
        assert abs(q.evaluate(4.0) - 0.5) <= 0.05

    def test_certificate_and_sqrt_kappa_degree_growth(self):
        q16 = inv_sqrt_poly(16.0, 0.1)
        err = sup_error(q16, ApproxTarget("inv_sqrt", kappa=16.0, delta=0.1), 4096)
        assert err <= 0.025
        q64 = inv_sqrt_poly(64.0, 0.1)
        # doubling sqrt(kappa) should roughly double the degree; allow the
        # documented 1.6x slack for the log factor
        assert q64.degree() / q16.degree() <= 2 * 1.6

    def test_rejects_bad_params(self):
        with pytest.raises(ValueError):
            inv_sqrt_poly(1.5, 0.1)
        with pytest.raises(ValueError):
            inv_sqrt_poly(4.0, 0.6)


class TestInvPoly:
    def test_value_at_one(self):
        r = inv_poly(2.0, 0.4)
        assert abs(r.evaluate(1.0) - 1.0) <= 0.2

    def test_value_mid_interval(self):
        r = inv_poly(4.0, 0.1)
        assert abs(r.evaluate(2.0) - 0.5) <= 0.025

    def test_kappa_64_certificate(self):
        r = inv_poly(64.0, 0.1)
        assert r.degree() <= 4.0 * math.sqrt(64) * math.log(640)
        err = sup_error(r, ApproxTarget("inv", kappa=64.0, delta=0.1), 4096)
        assert err <= 0.1 / 64


@pytest.mark.parametrize("kappa", [2.0, 4.0, 16.0, 64.0])
@pytest.mark.parametrize("delta", [0.4, 0.1, 0.01])
def test_certificate_lattice(kappa, delta):
    q = inv_sqrt_poly(kappa, delta)
    assert sup_error(q, ApproxTarget("inv_sqrt", kappa=kappa, delta=delta), 4096) \
        <= delta / math.sqrt(kappa)
    r = inv_poly(kappa, delta)
    assert sup_error(r, ApproxTarget("inv", kappa=kappa, delta=delta), 4096) \
        <= delta / kappa


def test_degree_law_single_constant():
    ratios = []
    for kappa in (4.0, 16.0, 64.0, 256.0):
        p = inv_sqrt_poly(kappa, 0.1)
        ratios.append(p.degree() / (math.sqrt(kappa) * math.log(kappa / 0.1)))
    assert all(0.05 <= r <= 10 for r in ratios)


class TestSupError:
    def test_exact_representation(self):
        p = monomial_cheb_approx(2, 0.1)
        assert sup_error(p, ApproxTarget("monomial", s=2), 4096) <= 1e-14

    def test_zero_poly_vs_inverse(self):
        p = ChebPoly((1.0, 2.0), [0.0])
        assert sup_error(p, ApproxTarget("inv", kappa=2.0), 4096) \
            == pytest.approx(1.0, abs=1e-6)

    def test_recertification(self):
        q = inv_sqrt_poly(16.0, 0.1)
        assert sup_error(q, ApproxTarget("inv_sqrt", kappa=16.0, delta=0.1), 8192) \
            <= 0.025

    def test_grid_size_floor(self):
        p = ChebPoly((-1.0, 1.0), np.ones(200))
        with pytest.raises(ValueError):
            sup_error(p, ApproxTarget("monomial", s=2), 1024)


def test_series_triangle_inequality_audit():
    # Rebuild the inverse-square-root series independently and check that
    # the measured total error on the reference interval is bounded by the
    # measured truncation error plus the weighted per-term certified errors.
    kappa, delta = 16.0, 0.1
    big_t = taylor_truncation_length(kappa, delta / 2)
    coeffs = [1.0]
    for t in range(1, big_t + 1):
        coeffs.append(coeffs[-1] * (-0.5 - t + 1) / t)
    subpolys = [None] + [
        monomial_cheb_approx(t, delta / (4 * t * t)) for t in range(1, big_t + 1)
    ]
    ys = np.linspace(-(1 - 1 / kappa), 0.0, 4001)
    truth = (1.0 + ys) ** -0.5
    series = sum(coeffs[t] * ys ** t for t in range(big_t + 1))
    approx = coeffs[0] * np.ones_like(ys)
    per_term_budget = 0.0
    for t in range(1, big_t + 1):
        approx = approx + coeffs[t] * subpolys[t].evaluate(ys)
        grid = cheb_grid((-1.0, 1.0), max(1024, 10 * subpolys[t].degree()))
        cert = float(np.max(np.abs(subpolys[t].evaluate(grid) - grid ** t)))
        per_term_budget += abs(coeffs[t]) * cert
    total = float(np.max(np.abs(truth - approx)))
    truncation = float(np.max(np.abs(truth - series)))
    assert total <= truncation + per_term_budget + 1e-12

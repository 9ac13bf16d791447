import math

import numpy as np
import pytest

from scdp.analytics import default_spec
from scdp.geometry import make_linear_network
from scdp.rates import (
    AoSettings,
    ao_solve_ot_rates,
    make_jt_problem,
    make_ot_problem,
    omega_batch,
    omega_partial,
    omega_value,
    q_derivative,
    q_value,
    scdp_jt,
    scdp_jt_batch,
    scdp_ot,
    solve_cm_rate,
    solve_jt_rate,
    solve_ot_uniform_rate,
)

from conftest import paper_default_net


def jt_problem(lambda_e=0.01, r_s=1.0, x_u=3.0, **spec_kw):
    net = paper_default_net(lambda_e=lambda_e, x_u=x_u)
    params = dict(n_r=128, n_theta=96)
    params.update(spec_kw)
    return make_jt_problem(net, r_s, default_spec(net, **params))


def ot_problem(lambda_e=0.01, r_s=1.0, k=2, x_u=0.5, **spec_kw):
    net = make_linear_network(k, 1.0, x_u, alpha=4.0, rho=10.0, lambda_e=lambda_e)
    params = dict(n_r=128, n_theta=96)
    params.update(spec_kw)
    return make_ot_problem(net, r_s, default_spec(net, **params))


class TestJtSolver:
    def test_no_eavesdroppers(self):
        sol = solve_jt_rate(jt_problem(lambda_e=0.0))
        assert sol.beta_e == 0.0

    def test_matches_grid_argmax(self):
        p = jt_problem()
        sol = solve_jt_rate(p)
        grid = np.linspace(0.0, 4.0 * sol.beta_e + 1.0, 10_000)
        vals = scdp_jt_batch(p, grid)
        best = grid[int(np.argmax(vals))]
        assert abs(best - sol.beta_e) <= grid[1] - grid[0]

    def test_root_matches_objective_grid_argmin(self):
        # the derivative zero found by bisection minimizes Q on a fine grid
        p = jt_problem()
        sol = solve_jt_rate(p)
        grid = np.linspace(max(sol.beta_e - 0.5, 1e-3), sol.beta_e + 0.5, 10_000)
        q_vals = [q_value(p, float(b)) for b in grid[:: len(grid) // 100]]
        coarse = grid[:: len(grid) // 100]
        assert abs(coarse[int(np.argmin(q_vals))] - sol.beta_e) <= coarse[1] - coarse[0]

    def test_derivative_sign_structure(self):
        p = jt_problem()
        assert q_derivative(p, 1e-4) < 0
        assert q_derivative(p, 1e4) > 0

    def test_derivative_nondecreasing(self):
        p = jt_problem()
        grid = np.linspace(0.05, 8.0, 30)
        d = [q_derivative(p, float(b)) for b in grid]
        assert all(b >= a - 1e-10 for a, b in zip(d, d[1:]))

    def test_derivative_matches_finite_difference(self):
        p = jt_problem()
        for b in (0.5, 1.5, 4.0):
            h = 1e-5
            fd = (q_value(p, b + h) - q_value(p, b - h)) / (2 * h)
            assert q_derivative(p, b) == pytest.approx(fd, rel=1e-4)

    def test_density_direction(self):
        lo = solve_jt_rate(jt_problem(lambda_e=0.01))
        hi = solve_jt_rate(jt_problem(lambda_e=0.03))
        assert hi.beta_e > lo.beta_e

    def test_secrecy_rate_direction(self):
        lo = solve_jt_rate(jt_problem(r_s=0.5))
        hi = solve_jt_rate(jt_problem(r_s=2.0))
        assert hi.beta_e < lo.beta_e

    def test_distance_direction_on_scaled_geometry(self):
        near = solve_jt_rate(jt_problem(x_u=1.0))
        far = solve_jt_rate(jt_problem(x_u=4.0))
        assert far.beta_e < near.beta_e

    def test_cm_variant(self):
        p = jt_problem()
        jt = solve_jt_rate(p)
        cm = solve_cm_rate(p, 2.0)
        assert cm.beta_e < jt.beta_e
        assert cm.scdp < jt.scdp
        # delta -> 1+ recovers the base solution
        close = solve_cm_rate(p, 1.0 + 1e-9)
        assert close.beta_e == pytest.approx(jt.beta_e, rel=1e-5)
        with pytest.raises(ValueError):
            solve_cm_rate(p, 1.0)

    def test_delta_two_equals_doubled_rate(self):
        p = jt_problem(r_s=1.0)
        cm = solve_cm_rate(p, 2.0)
        jt2 = solve_jt_rate(jt_problem(r_s=2.0))
        assert cm.beta_e == pytest.approx(jt2.beta_e, rel=1e-9)

    def test_optimal_envelope_increases_with_secrecy_threshold(self):
        # W(beta_s) = A*beta_s + Q(beta_e*(beta_s)) grows, so the optimized
        # SCDP can only drop as the secrecy rate rises
        values = [solve_jt_rate(jt_problem(r_s=r)).scdp for r in (0.5, 1.0, 1.5, 2.0)]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_scdp_consistency(self):
        p = jt_problem()
        sol = solve_jt_rate(p)
        assert sol.scdp == pytest.approx(scdp_jt(p, sol.beta_e), rel=1e-7)


class TestAoSolver:
    def test_single_coordinate_reduces_to_jt(self):
        pj = jt_problem(x_u=0.0)
        po = make_ot_problem(pj.net, 1.0, pj.spec)
        assert pj.net.k == 3
        net1 = make_linear_network(1, 1.0, 0.0, alpha=4.0, rho=10.0, lambda_e=0.01)
        spec = default_spec(net1, n_r=128, n_theta=96)
        jt = solve_jt_rate(make_jt_problem(net1, 1.0, spec))
        ao = ao_solve_ot_rates(make_ot_problem(net1, 1.0, spec))
        assert float(ao.beta_e[0]) == pytest.approx(jt.beta_e, abs=1e-6)

    def test_symmetric_geometry_equal_coordinates(self):
        res = ao_solve_ot_rates(ot_problem())
        assert res.converged
        assert abs(res.beta_e[0] - res.beta_e[1]) < 1e-6

    def test_symmetric_matches_uniform(self):
        p = ot_problem()
        res = ao_solve_ot_rates(p)
        uni = solve_ot_uniform_rate(p)
        assert abs(uni.beta_e - res.beta_e[0]) < 1e-6

    def test_uniform_is_a_restriction(self):
        p = ot_problem(x_u=1.5)
        res = ao_solve_ot_rates(p)
        uni = solve_ot_uniform_rate(p)
        assert uni.objective >= res.omega - 1e-12

    def test_descent_and_kkt(self):
        res = ao_solve_ot_rates(ot_problem(x_u=0.8))
        hist = np.array(res.omega_history)
        assert np.all(np.diff(hist) <= 1e-12)
        assert res.kkt_residual < 1e-6
        assert np.all(res.beta_e >= 0)

    def test_remote_sbs_gets_zero_rate(self):
        res = ao_solve_ot_rates(ot_problem(x_u=1.5))
        assert res.converged
        # r_b = [1.58, 0.71]: far SBS silent, near SBS interior
        assert res.beta_e[0] == 0.0
        assert res.beta_e[1] > 0.1

    def test_sweep_order_immaterial(self):
        p = ot_problem(x_u=0.8)
        a = ao_solve_ot_rates(p)
        b = ao_solve_ot_rates(p, sweep_order=[1, 0])
        assert abs(a.omega - b.omega) < 1e-8
        with pytest.raises(ValueError):
            ao_solve_ot_rates(p, sweep_order=[0, 0])

    def test_grid_argmin_agreement(self):
        p = ot_problem(x_u=0.8)
        res = ao_solve_ot_rates(p)
        hi = 2.5 * float(res.beta_e.max()) + 0.5
        g = np.linspace(0.0, hi, 120)
        grid = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
        vals = omega_batch(p, grid)
        best = grid[int(np.argmin(vals))]
        step = g[1] - g[0]
        assert np.all(np.abs(best - res.beta_e) <= step + 1e-12)

    def test_no_eavesdroppers(self):
        res = ao_solve_ot_rates(ot_problem(lambda_e=0.0))
        assert res.converged
        assert np.all(res.beta_e == 0.0)

    def test_partial_matches_finite_difference(self):
        p = ot_problem(x_u=0.8)
        beta = np.array([0.7, 1.3])
        h = 1e-5
        for k in range(2):
            up = beta.copy()
            up[k] += h
            dn = beta.copy()
            dn[k] -= h
            fd = (omega_value(p, up) - omega_value(p, dn)) / (2 * h)
            assert omega_partial(p, beta, k) == pytest.approx(fd, rel=1e-4)

    def test_kernel_path_matches_quadrature_path(self):
        p = ot_problem(x_u=0.8)
        res = ao_solve_ot_rates(p)
        assert omega_value(p, res.beta_e) == pytest.approx(res.omega, rel=1e-8)
        assert scdp_ot(p, res.beta_e) == pytest.approx(
            math.exp(
                -p.beta_s * float(p.rb_alpha.sum()) / (p.net.k * p.net.rho) - res.omega
            ),
            rel=1e-8,
        )

    def test_settings_validation(self):
        with pytest.raises(ValueError):
            AoSettings(epsilon=0.0)
        with pytest.raises(ValueError):
            AoSettings(beta_init=-1.0)

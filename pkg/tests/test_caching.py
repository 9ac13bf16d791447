import numpy as np
import pytest

from scdp.analytics import default_spec
from scdp.caching import (
    ScdpTriple,
    best_integer_split,
    end_to_end_design,
    grid_optimal_phi,
    optimal_phi,
    scdp_overall,
    scdp_overall_curve,
)
from scdp.content import ContentConfig
from scdp.geometry import make_linear_network

from conftest import paper_default_net


def content(gamma=1.2, phi=0.5, delta=3.0, n=100, length=20):
    return ContentConfig(n, length, gamma, phi, delta)


class TestOptimalPhi:
    def test_hand_computed_interior(self):
        triple = ScdpTriple(0.8, 0.7, 0.5)  # diffs 0.1 and 0.2
        assert optimal_phi(triple, content(gamma=1.0), 2) == pytest.approx(2.0 / 3.0, rel=1e-9)

    def test_ot_below_miss_forces_full_replication(self):
        triple = ScdpTriple(0.8, 0.3, 0.5)
        assert optimal_phi(triple, content(), 3) == 1.0

    def test_ot_above_hit_forces_subfiles(self):
        triple = ScdpTriple(0.6, 0.9, 0.5)
        assert optimal_phi(triple, content(), 3) == 0.0

    def test_boundary_ties(self):
        # diff_jo == (K-1)*diff_oc lands on the interior-formula limit 1
        triple = ScdpTriple(0.9, 0.7, 0.6)
        assert optimal_phi(triple, content(), 3) == 1.0
        # diff_jo == 0 with positive diff_oc lands on 0
        triple0 = ScdpTriple(0.8, 0.8, 0.5)
        assert optimal_phi(triple0, content(), 3) == 0.0

    def test_uniform_popularity_is_affine(self):
        up = ScdpTriple(0.9, 0.65, 0.6)  # diff_jo=0.25 > (K-1)*0.05=0.1
        assert optimal_phi(up, content(gamma=0.0), 3) == 1.0
        down = ScdpTriple(0.75, 0.7, 0.5)  # diff_jo=0.05 < 2*0.2
        assert optimal_phi(down, content(gamma=0.0), 3) == 0.0

    def test_matches_grid_on_random_triples(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            p_cm = rng.uniform(0.0, 0.9)
            p_jt = rng.uniform(p_cm + 1e-6, 1.0)
            p_ot = rng.uniform(0.0, 1.0)
            gamma = float(rng.choice([0.6, 0.9, 1.2, 2.0]))
            k = int(rng.integers(2, 6))
            c = content(gamma=gamma, length=15)
            triple = ScdpTriple(p_jt, p_ot, p_cm)
            formula = optimal_phi(triple, c, k)
            grid, _ = grid_optimal_phi(triple, c, k, 2001)
            assert abs(formula - grid) < 5e-4

    def test_nondecreasing_in_gamma(self):
        triple = ScdpTriple(0.8, 0.75, 0.4)
        values = [optimal_phi(triple, content(gamma=g), 3) for g in (0.6, 0.9, 1.2, 2.0)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_interior_concavity(self):
        triple = ScdpTriple(0.8, 0.75, 0.4)
        c = content(gamma=1.2)
        phis = np.linspace(0.05, 1.0, 400)
        vals = scdp_overall_curve(triple, c, 3, phis)
        second = vals[:-2] - 2 * vals[1:-1] + vals[2:]
        assert np.all(second < 1e-12)


class TestOverall:
    def test_equal_metrics_collapse(self):
        triple = ScdpTriple(0.7, 0.7, 0.7)
        for phi in (0.0, 0.3, 1.0):
            for mode in ("exact", "approx"):
                got = scdp_overall(triple, content(), 3, mode, phi)
                assert got == pytest.approx(0.7, abs=1e-9)

    def test_full_replication_composition(self):
        triple = ScdpTriple(0.8, 0.6, 0.5)
        c = content(phi=1.0)
        from scdp.content import zipf_head_sum

        head = zipf_head_sum(c, 20, "exact")
        want = head * 0.8 + (1 - head) * 0.5
        assert scdp_overall(triple, c, 3, "exact") == pytest.approx(want, rel=1e-12)

    def test_modes_agree_moderately(self):
        triple = ScdpTriple(0.85, 0.8, 0.7)
        for phi in np.linspace(0.2, 1.0, 9):
            a = scdp_overall(triple, content(), 3, "exact", float(phi))
            b = scdp_overall(triple, content(), 3, "approx", float(phi))
            assert abs(a - b) < 0.02

    def test_triple_warns_when_miss_beats_hit(self):
        with pytest.warns(UserWarning, match="cache-miss"):
            ScdpTriple(0.5, 0.6, 0.7)

    def test_integer_split_maximum(self):
        from scdp.content import scheme_probabilities_from_split

        triple = ScdpTriple(0.9, 0.6, 0.2)
        c = content()
        m, v = best_integer_split(triple, c, 3)
        sweep = []
        for m_i in range(21):
            p = scheme_probabilities_from_split(c, 3, m_i)
            sweep.append(p[0] * 0.9 + p[1] * 0.6 + p[2] * 0.2)
        assert m == int(np.argmax(sweep))
        assert v == pytest.approx(max(sweep), rel=1e-12)
        # the integer optimum sits beside the continuous one
        assert abs(m / 20.0 - optimal_phi(triple, c, 3)) <= 0.1


class TestEndToEnd:
    def test_no_eavesdroppers_favors_replication(self):
        net = paper_default_net(lambda_e=0.0)
        report = end_to_end_design(net, content(), 1.0, spec=default_spec(net, n_r=128, n_theta=96))
        assert report.jt.beta_e == 0.0
        assert np.all(report.ot.beta_e == 0.0)
        assert report.cm.beta_e == 0.0
        assert report.phi_star == 1.0

    def test_hybrid_dominates_endpoints(self):
        net = paper_default_net()
        report = end_to_end_design(net, content(), 1.0, spec=default_spec(net, n_r=128, n_theta=96))
        assert report.ot.converged
        assert report.scdp_at_phi_star >= report.scdp_mpf_only - 1e-9
        assert report.scdp_at_phi_star >= report.scdp_dsf_only - 1e-9
        assert report.scdp_at_phi_star >= report.scdp_no_cache - 1e-9
        assert report.phi_grid_gap < 5e-4
        assert report.triple.p_jt > report.triple.p_cm

    def test_skewness_direction(self):
        net = paper_default_net()
        spec = default_spec(net, n_r=128, n_theta=96)
        lo = end_to_end_design(net, content(gamma=0.6), 1.0, spec=spec)
        hi = end_to_end_design(net, content(gamma=3.0), 1.0, spec=spec)
        assert hi.phi_star >= lo.phi_star

    def test_rate_accessors(self):
        net = paper_default_net()
        report = end_to_end_design(net, content(), 1.0, spec=default_spec(net, n_r=128, n_theta=96))
        assert report.jt_redundant_rate == pytest.approx(
            np.log2(1 + report.jt.beta_e), rel=1e-12
        )
        assert len(report.ot_redundant_rates) == 3

    def test_rejects_collusion_model(self):
        with pytest.raises(ValueError):
            end_to_end_design(paper_default_net(), content(), 1.0, eve_model="CE")

    def test_capacity_enforced(self):
        net = make_linear_network(5, 1.0, 0.5, alpha=4.0, rho=10.0, lambda_e=0.01)
        with pytest.raises(ValueError):
            end_to_end_design(net, content(n=100, length=20), 1.0)

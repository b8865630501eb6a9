"""Certification checks on maps near the perturbed doubling map."""

import math

import numpy as np
import pytest

from lyapmin.circle_map import expansion_profile
from lyapmin.conjugacy import continue_orbit
from lyapmin.errors import HorizonExceeded
from lyapmin.verifier import (birkhoff_averages, c11_distance, certify_unique_minimizer,
                              check_far_region, check_sum_positivity, excursions_from,
                              lipschitz_audit, normalized_F, sample_perturbation_ball,
                              two_map_difference, verify)


@pytest.fixture(scope="module")
def samples(doubling_plan):
    return sample_perturbation_ball(doubling_plan.perturbed_map, doubling_plan.ledger.eps_tilde,
                                    4, seed=7)


@pytest.fixture(scope="module")
def S(samples):
    return samples[0]


@pytest.fixture(scope="module")
def gamma_S(doubling_plan, S):
    return continue_orbit(doubling_plan.orbit, S, doubling_plan.perturbed_map)


class TestSampling:
    def test_zero_radius(self, doubling_plan):
        S0 = doubling_plan.perturbed_map
        maps = sample_perturbation_ball(S0, 0.0, 3, seed=1)
        assert len(maps) == 3 and all(m is S0 for m in maps)

    def test_inside_ball(self, doubling_plan, samples):
        S0, eps = doubling_plan.perturbed_map, doubling_plan.ledger.eps_tilde
        for m in samples:
            assert 0 < c11_distance(m, S0) < eps
            assert expansion_profile(m).min_deriv > 1

    def test_seeded(self, doubling_plan, samples):
        again = sample_perturbation_ball(doubling_plan.perturbed_map,
                                         doubling_plan.ledger.eps_tilde, 4, seed=7)
        assert [m.map_id for m in again] == [m.map_id for m in samples]
        other = sample_perturbation_ball(doubling_plan.perturbed_map,
                                         doubling_plan.ledger.eps_tilde, 4, seed=8)
        assert other[0].map_id != samples[0].map_id

    @pytest.mark.parametrize("args", [(-1.0, 2), (1e-3, 0)])
    def test_rejects(self, doubling_plan, args):
        with pytest.raises(ValueError):
            sample_perturbation_ball(doubling_plan.perturbed_map, args[0], args[1], seed=0)


class TestFarRegion:
    def test_perturbed_map(self, doubling_plan):
        margin = check_far_region(doubling_plan.perturbed_map, doubling_plan, 2 ** 14)
        assert margin > 0
        assert margin >= doubling_plan.ledger.positivity_constant

    def test_sample(self, doubling_plan, S, gamma_S):
        assert check_far_region(S, doubling_plan, 2 ** 14, gamma_S) > 0

    def test_unperturbed_is_flat(self, doubling_plan):
        m = doubling_plan.base_map
        margin = check_far_region(m, doubling_plan, 2 ** 12, doubling_plan.orbit)
        assert margin == pytest.approx(0.0, abs=1e-15)

    def test_orbit_average_is_zero(self, doubling_plan, S, gamma_S):
        Ft, A = normalized_F(S, doubling_plan.subaction.f, gamma_S)
        assert abs(np.mean(Ft(gamma_S.as_array()))) < 1e-15
        assert A == pytest.approx(math.log(2) - doubling_plan.ledger.t, abs=1e-8)


class TestSumPositivity:
    def test_near_orbit_point(self, doubling_plan, S, gamma_S):
        led = doubling_plan.ledger
        Ft, _ = normalized_F(S, doubling_plan.subaction.f, gamma_S)
        x0 = gamma_S.points[0] + 1e-6
        (exc,) = excursions_from(S, Ft, gamma_S, [x0], led.r_inner, led.r_outer)
        # direct iteration oracle
        x, total, i, m = x0, 0.0, 0, None
        while True:
            d = np.min(np.abs((x - gamma_S.as_array() + 0.5) % 1.0 - 0.5))
            if m is None and d > led.r_inner:
                m = i
            if m is not None and d > led.r_outer:
                break
            total += float(Ft(np.array([x]))[0])
            x, i = float(S(x)), i + 1
        assert (exc.m, exc.N) == (m, i)
        assert exc.partial_sum == pytest.approx(total, rel=1e-12)
        assert exc.partial_sum > 0

    def test_far_region_point(self, doubling_plan, S, gamma_S):
        led = doubling_plan.ledger
        Ft, _ = normalized_F(S, doubling_plan.subaction.f, gamma_S)
        (exc,) = excursions_from(S, Ft, gamma_S, [0.3], led.r_inner, led.r_outer)
        assert exc.N == 1
        assert exc.partial_sum == pytest.approx(float(Ft(np.array([0.3]))[0]))
        assert exc.partial_sum > 0

    def test_on_orbit_never_escapes(self, doubling_plan, S, gamma_S):
        led = doubling_plan.ledger
        Ft, _ = normalized_F(S, doubling_plan.subaction.f, gamma_S)
        with pytest.raises(HorizonExceeded):
            excursions_from(S, Ft, gamma_S, [gamma_S.points[0]], led.r_inner, led.r_outer,
                            horizon=1000)

    def test_seeded_samples(self, doubling_plan, S, gamma_S):
        exc = check_sum_positivity(S, doubling_plan, samples=50, seed=3, gamma_S=gamma_S)
        assert len(exc) == 50
        assert all(e.partial_sum > 0 and e.N >= 1 for e in exc)


class TestCertificate:
    def test_unperturbed_fails(self, doubling_plan):
        cert = certify_unique_minimizer(doubling_plan.base_map, doubling_plan.orbit, 12)
        assert cert.margin == pytest.approx(0.0, abs=1e-15)
        assert not cert.unique

    def test_perturbed_unique(self, doubling_plan):
        cert = certify_unique_minimizer(doubling_plan.perturbed_map, doubling_plan.orbit, 12)
        assert cert.unique and cert.margin > 0
        # orbits of period <= 12 of a degree-2 map
        assert cert.n_orbits == 746

    def test_sample_with_birkhoff(self, doubling_plan, S, gamma_S):
        cert = certify_unique_minimizer(S, gamma_S, 10, doubling_plan, n_starts=8,
                                        steps=10 ** 4, seed=2)
        assert cert.margin > 0
        assert len(cert.birkhoff) == 8 and cert.birkhoff_min > 0
        assert 0.9 < cert.F1_frequency <= 1.0
        direct = birkhoff_averages(S, doubling_plan.subaction.f, gamma_S,
                                   cert.birkhoff_starts, 10 ** 4)
        assert np.allclose(direct, cert.birkhoff, rtol=0, atol=1e-15)

    def test_orbit_must_be_in_catalog(self, doubling_plan):
        from lyapmin.orbits import PeriodicOrbit
        with pytest.raises(ValueError):
            certify_unique_minimizer(doubling_plan.base_map, PeriodicOrbit((0.1,), (0,)), 4)


class TestAudits:
    def test_lipschitz(self, doubling_plan, S, gamma_S):
        measured, bound = lipschitz_audit(S, doubling_plan, gamma_S, 2 ** 14)
        assert measured <= bound

    def test_two_map_difference(self, doubling_plan, S):
        f = doubling_plan.subaction.f
        S0 = doubling_plan.perturbed_map
        diff = two_map_difference(S, S0, f)
        prof = expansion_profile(S)
        bound = (f.lip() + 1.0 / prof.min_deriv) * doubling_plan.ledger.eps_tilde
        assert 0 < diff <= bound


class TestVerify:
    @pytest.fixture(scope="class")
    @classmethod
    def report(cls, doubling_plan, S):
        return verify(doubling_plan, S, samples=20, seed=0, max_period=8, grid_n=2 ** 14,
                      n_starts=4, steps=10 ** 4, conjugacy_samples=200)

    def test_passes(self, report):
        assert report.passed
        assert report.symbols_preserved
        assert report.orbit_average_residual < 1e-15
        assert report.conjugacy["residual"] < 1e-8

    def test_dict(self, report):
        d = report.to_dict()
        assert d["pass"] is True
        assert d["min_partial_sum"] == report.min_partial_sum
        assert len(d["sum_positivity"]) == 20

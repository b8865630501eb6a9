import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lyapmin.circle_map import (BumpLayer, ExpandingMap, TrigLift, circle_distance,
                                evaluate, expansion_profile, fixed_point_anchor,
                                inverse_branch, preimages, solve_lift, trig_map, wrap)
from lyapmin.errors import NotExpanding, SupportOverlap

unit = st.floats(min_value=0.0, max_value=1.0, exclude_max=True, allow_nan=False)


class TestEvaluate:
    @pytest.mark.parametrize("x, image, deriv", [(0.3, 0.6, 2.0), (0.75, 0.5, 2.0),
                                                 (0.0, 0.0, 2.0)])
    def test_doubling(self, doubling, x, image, deriv):
        ev = evaluate(doubling, x)
        assert ev.image == pytest.approx(image, abs=1e-15)
        assert ev.deriv == deriv
        assert ev.second_deriv_or_bound == 0.0

    def test_sine_closed_form(self, sin_map):
        ev = evaluate(sin_map, 0.25)
        assert ev.image == pytest.approx(0.6, abs=1e-15)
        assert ev.lift_value == pytest.approx(0.6, abs=1e-15)
        assert ev.deriv == pytest.approx(2.0 + 0.2 * math.pi * math.cos(math.pi / 2), abs=1e-14)
        assert ev.second_deriv_or_bound == pytest.approx(-0.4 * math.pi ** 2, rel=1e-14)

    def test_vectorized_matches_scalar(self, cubic_map, rng):
        x = rng.uniform(0, 1, 50)
        ev = evaluate(cubic_map, x)
        for i in (0, 17, 49):
            one = evaluate(cubic_map, float(x[i]))
            assert one.image == pytest.approx(ev.image[i], abs=1e-14)
            assert one.deriv == pytest.approx(ev.deriv[i], rel=1e-14)

    def test_knot_reports_one_sided_maximum(self, bumped_map):
        layer = bumped_map.layers[0]
        p, w = layer.centers[0], layer.half_width
        amp = layer.amplitude_scale * layer.gammas[0]
        base = TrigLift(2, (0.05,)).derivs(np.array([p]), 2)[2][0]
        ev = evaluate(bumped_map, p)
        # one-sided values of D²h at the centre are ±4 amp w
        assert abs(ev.second_deriv_or_bound) == pytest.approx(abs(base) + 4 * amp * w, rel=1e-6)

    @pytest.mark.parametrize("name", ["sin_map", "cubic_map", "bumped_map"])
    def test_periodicity(self, request, name):
        m = request.getfixturevalue(name)
        x = np.linspace(0, 1, 101)[:-1]
        a, b = m.derivs(x, 1), m.derivs(x + 1.0, 1)
        assert np.allclose(b[0] - a[0], m.degree, atol=1e-12)
        assert np.allclose(b[1], a[1], atol=1e-12)

    @pytest.mark.parametrize("name", ["sin_map", "cubic_map", "bumped_map"])
    def test_derivative_matches_finite_difference(self, request, name, rng):
        m = request.getfixturevalue(name)
        x = rng.uniform(0, 1, 1000)
        knots = np.asarray(m.knots())
        if knots.size:
            x = x[np.min(circle_distance(x[:, None], knots[None, :]), axis=1) > 1e-4]
        h = 1e-6
        fd = (m.lift(x + h) - m.lift(x - h)) / (2 * h)
        assert np.max(np.abs(fd - m.deriv(x)) / np.abs(m.deriv(x))) < 1e-5

    def test_second_derivative_matches_finite_difference(self, cubic_map, rng):
        x = rng.uniform(0, 1, 200)
        h = 1e-6
        fd = (cubic_map.deriv(x + h) - cubic_map.deriv(x - h)) / (2 * h)
        assert np.allclose(fd, cubic_map.derivs(x, 2)[2], rtol=1e-5, atol=1e-6)


class TestExpansionProfile:
    def test_doubling(self, doubling):
        prof = expansion_profile(doubling)
        assert (prof.min_deriv, prof.max_deriv, prof.lip_deriv) == (2.0, 2.0, 0.0)

    def test_sine_extrema(self, sin_map):
        prof = expansion_profile(sin_map)
        assert prof.min_deriv == pytest.approx(2 - 0.2 * math.pi, abs=1e-12)
        assert prof.max_deriv == pytest.approx(2 + 0.2 * math.pi, abs=1e-12)
        assert prof.argmin == pytest.approx(0.5, abs=1e-6)
        assert prof.lip_deriv == pytest.approx(0.4 * math.pi ** 2, rel=1e-6)

    def test_not_expanding(self):
        assert 2 - 0.4 * math.pi < 1
        with pytest.raises(NotExpanding) as exc:
            expansion_profile(trig_map(2, [0.2]))
        assert exc.value.details["min_deriv"] == pytest.approx(2 - 0.4 * math.pi, abs=1e-9)

    def test_small_grid_rejected(self, doubling):
        with pytest.raises(ValueError):
            expansion_profile(doubling, grid_n=512)

    def test_bump_lipschitz_bound_included(self, bumped_map):
        prof = expansion_profile(bumped_map)
        layer = bumped_map.layers[0]
        assert prof.lip_deriv >= layer.bounds()[2]
        assert prof.min_deriv <= prof.max_deriv


class TestPreimages:
    @pytest.mark.parametrize("y, expected", [(0.5, [0.25, 0.75]), (0.0, [0.0, 0.5])])
    def test_doubling(self, doubling, y, expected):
        assert np.allclose(preimages(doubling, y), expected, atol=1e-15)

    def test_sine_contains_quarter(self, sin_map):
        pre = preimages(sin_map, 0.6)
        assert pre.shape == (2,)
        assert np.min(np.abs(pre - 0.25)) < 1e-12
        assert np.max(circle_distance(sin_map(pre), 0.6)) < 1e-12

    @pytest.mark.parametrize("name", ["doubling", "sin_map", "cubic_map", "bumped_map"])
    def test_grid_property(self, request, name):
        m = request.getfixturevalue(name)
        y = np.arange(10 ** 4) / 10 ** 4
        pre = preimages(m, y)
        assert pre.shape == (y.size, m.degree)
        assert np.all(np.diff(pre, axis=1) > 0)
        assert np.max(circle_distance(m(pre), y[:, None])) < 1e-12

    @given(y=unit)
    @settings(max_examples=50, deadline=None)
    def test_inverse_branches_cover(self, y):
        m = trig_map(3, [0.05, 0.02], [0.03], 0.1)
        pre = preimages(m, y)
        assert len(set(np.round(pre, 9))) == 3
        assert np.all((pre >= 0) & (pre < 1))


class TestLiftSolvers:
    @given(t=st.floats(min_value=-50, max_value=50, allow_nan=False))
    @settings(max_examples=50, deadline=None)
    def test_solve_lift_inverts(self, t):
        m = trig_map(2, [0.1], [0.05])
        x = solve_lift(m, t)
        assert abs(m.lift(x) - t) < 1e-12

    @pytest.mark.parametrize("m, p", [(trig_map(2, [0.1]), 0.0), (trig_map(2, (), [0.05]), None)])
    def test_fixed_point_anchor(self, m, p):
        x, k = fixed_point_anchor(m)
        assert abs(m.lift(x) - x - k) < 1e-12
        if p is not None:
            assert x == p

    def test_inverse_branch_maps_window(self, sin_map):
        p, k = fixed_point_anchor(sin_map)
        y = np.linspace(p, p + 1, 11)
        for j in range(2):
            x = inverse_branch(sin_map, j, y)
            assert np.all((x >= p - 1e-15) & (x <= p + 1 + 1e-15))


class TestCircleDistance:
    @pytest.mark.parametrize("x, y, d", [(0.1, 0.9, 0.2), (0.25, 0.25, 0.0), (0.0, 0.5, 0.5)])
    def test_examples(self, x, y, d):
        assert circle_distance(x, y) == pytest.approx(d, abs=1e-15)

    @given(x=unit, y=unit, z=unit)
    @settings(max_examples=300)
    def test_metric(self, x, y, z):
        dxy = circle_distance(x, y)
        assert 0.0 <= dxy <= 0.5
        assert dxy == circle_distance(y, x)
        assert circle_distance(x, z) <= dxy + circle_distance(y, z) + 1e-15

    def test_random_triples(self, rng):
        x, y, z = rng.uniform(0, 1, (3, 1000))
        assert np.all(circle_distance(x, z) <= circle_distance(x, y) + circle_distance(y, z) + 1e-15)

    def test_wrap_edge(self):
        assert wrap(-1e-20) < 1.0
        assert wrap(1.0) == 0.0


class TestBumpLayerAndSerialization:
    def test_overlap_rejected(self):
        with pytest.raises(SupportOverlap):
            BumpLayer((0.1, 0.15), 0.03, (1.0, 1.0), 1.0)

    def test_wraparound_overlap_rejected(self):
        with pytest.raises(SupportOverlap):
            BumpLayer((0.01, 0.98), 0.02, (1.0, 1.0), 1.0)

    @pytest.mark.parametrize("kwargs", [dict(kind="smooth"), dict(mollify_delta=0.01),
                                        dict(kind="mollified")])
    def test_invalid_layers(self, kwargs):
        with pytest.raises(ValueError):
            BumpLayer((0.5,), 0.1, (1.0,), 1.0, **kwargs)

    def test_layer_vanishes_with_derivative_at_edges(self, bumped_map):
        layer = bumped_map.layers[0]
        edges = np.array([c + s * layer.half_width for c in layer.centers for s in (-1, 1)])
        v = layer.derivs(edges, 1)
        assert np.max(np.abs(v[0])) < 1e-15 and np.max(np.abs(v[1])) < 1e-15

    def test_json_roundtrip(self, bumped_map):
        d = json.loads(json.dumps(bumped_map.to_dict()))
        again = ExpandingMap.from_dict(d)
        assert again == bumped_map
        assert again.map_id == bumped_map.map_id

    def test_map_id_distinguishes(self, sin_map, doubling):
        assert sin_map.map_id != doubling.map_id
        assert len(doubling.map_id) == 16

    def test_add_trig(self, doubling):
        m = doubling.add_trig([0.01], [0.0, 0.02], 0.003)
        x = np.linspace(0, 1, 7)
        g = 0.01 * np.sin(2 * np.pi * x) + 0.02 * np.cos(4 * np.pi * x) + 0.003
        assert np.allclose(m.lift(x) - doubling.lift(x), g, atol=1e-15)

    def test_degree_validation(self):
        with pytest.raises(ValueError):
            TrigLift(1)

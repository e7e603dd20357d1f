import math
import warnings
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from srkinetics import yields as Y
from srkinetics.errors import UnsupportedGraphError, ValidationError
from srkinetics.model import (RateSet, build_independent_graph, build_three_emitter_graph,
                              build_two_emitter_graph, superradiant_graph)
from srkinetics.pump import build_pumped_two_emitter_graph
from srkinetics.yields import (Method, baseline_yield, expected_firings, maximize_rqe, rqe,
                               scan_rqe, yield_closed_form_two, yield_markov,
                               yield_time_integral)

from oracles import R3_ARGMAX, R3_AT_161, R3_MAX, q_two, r_two, rqe3_oracle

SQRT2 = math.sqrt(2)
R2_MAX = (8 + 7 * SQRT2) / (8 + 6 * SQRT2)
RATIOS = [0.1, 0.5, 1.0, SQRT2, 2.0, 5.0, 10.0]


class TestClosedForm:
    def test_lossless(self):
        r = yield_closed_form_two(RateSet(1, 0))
        assert (r.q_photon, r.q_baseline, r.rqe) == (2, 2, 1)

    def test_equal_rates(self):
        r = yield_closed_form_two(RateSet(1, 1))
        assert r.q_photon == pytest.approx(13 / 12)
        assert r.q_baseline == 1
        assert r.rqe == pytest.approx(13 / 12)

    def test_optimum_value(self):
        assert yield_closed_form_two(RateSet.from_ratio(SQRT2)).rqe == pytest.approx(R2_MAX, rel=1e-14)
        assert R2_MAX == pytest.approx(1.0858, abs=1e-4)

    def test_prose_range_versus_formula(self):
        # the closed-form maximum is an 8.58 % gain
        assert 100 * (R2_MAX - 1) == pytest.approx(8.58, abs=0.005)


class TestMarkov:
    @given(st.floats(0, 100))
    def test_single_emitter(self, x):
        r = yield_markov(superradiant_graph(1, RateSet.from_ratio(x)))
        assert r.q_photon == pytest.approx(1 / (1 + x), rel=1e-14)
        assert r.rqe == pytest.approx(1, rel=1e-14)

    @given(st.floats(0, 100))
    def test_two_emitter_yield_formula(self, x):
        r = yield_markov(build_two_emitter_graph(RateSet.from_ratio(x)))
        assert r.q_photon == pytest.approx(q_two(x), rel=1e-12)
        assert r.rqe == pytest.approx(r_two(x), rel=1e-12)
        assert r.method is Method.MARKOV

    def test_rational_rates_give_exact_fractions(self):
        for x, q in ((F(1), F(13, 12)), (F(2), F(4 + 14 + 8, 9 * 4)), (F(0), F(2))):
            g = build_two_emitter_graph(RateSet(F(1), x))
            r = yield_markov(g)
            assert r.q_photon == q
            assert r.q_photon + r.q_phonon == 2

    def test_expected_firings_of_lossless_ladder(self):
        fire = expected_firings(build_two_emitter_graph(RateSet(1, 0)))
        assert sum(v for (_, _, k), v in fire.items() if k.value == "RADIATIVE") == 2

    def test_pumped_graph_rejected(self):
        g = build_pumped_two_emitter_graph(RateSet(1, 1, 1))
        with pytest.raises(UnsupportedGraphError):
            yield_markov(g)
        with pytest.raises(UnsupportedGraphError):
            yield_time_integral(g)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_quanta_conserved_exactly(self, n):
        r = yield_markov(superradiant_graph(n, RateSet(F(1), F(3, 7))))
        assert r.q_photon + r.q_phonon == n


class TestBaseline:
    def test_values(self):
        assert baseline_yield(2, RateSet(1, 1)).q_photon == 1
        assert baseline_yield(3, RateSet(1, 0)).q_photon == 3
        assert baseline_yield(3, RateSet.from_ratio(1.61)).q_photon == pytest.approx(1.1494, abs=1e-4)

    @pytest.mark.parametrize("n", [1, 2, 4, 7])
    def test_equals_independent_graph(self, n):
        rates = RateSet(F(1), F(5, 3))
        assert yield_markov(build_independent_graph(n, rates)).q_photon == \
            baseline_yield(n, rates).q_photon

    def test_bad_n(self):
        with pytest.raises(ValidationError):
            baseline_yield(0, RateSet())


class TestRqe:
    def test_two_at_ratio_two(self):
        assert rqe(2, RateSet.from_ratio(2)).rqe == pytest.approx(13 / 12, rel=1e-14)
        assert rqe(2, RateSet(F(1), F(2))).rqe == F(13, 12)

    def test_three_lossless(self):
        assert rqe(3, RateSet(1, 0)).rqe == 1

    @pytest.mark.parametrize("x", RATIOS)
    def test_three_way_agreement(self, x):
        g = build_two_emitter_graph(RateSet.from_ratio(x))
        markov = yield_markov(g)
        closed = yield_closed_form_two(g.rates)
        integral = yield_time_integral(g)
        assert markov.q_photon == pytest.approx(float(closed.q_photon), abs=1e-12)
        assert markov.rqe == pytest.approx(float(closed.rqe), abs=1e-12)
        assert integral.q_photon == pytest.approx(markov.q_photon, abs=1e-6)
        assert integral.q_photon + integral.q_phonon == pytest.approx(2, abs=1e-6)

    @pytest.mark.parametrize("x", RATIOS)
    def test_three_emitter_routes_agree(self, x):
        g = build_three_emitter_graph(RateSet.from_ratio(x))
        assert yield_time_integral(g).q_photon == pytest.approx(yield_markov(g).q_photon, abs=1e-6)

    @pytest.mark.parametrize("x", [0.0, 0.3, 1.0, 1.61, 4.0, 25.0])
    def test_three_emitter_against_linear_solve(self, x):
        assert rqe(3, RateSet.from_ratio(x)).rqe == pytest.approx(rqe3_oracle(x), rel=1e-13)

    def test_three_emitter_frozen_value(self):
        assert rqe(3, RateSet.from_ratio(1.61)).rqe == pytest.approx(R3_AT_161, rel=1e-13)

    @pytest.mark.xfail(strict=True, reason="the rate equations give 1.16692 at 1.61, "
                       "not the expected 1.164")
    def test_three_emitter_expected_value(self):
        assert rqe(3, RateSet.from_ratio(1.61)).rqe == pytest.approx(1.164, abs=1e-3)

    @pytest.mark.parametrize("n", [2, 3])
    def test_limits(self, n):
        assert rqe(n, RateSet.from_ratio(1e-7)).rqe == pytest.approx(1, abs=1e-6)
        assert rqe(n, RateSet.from_ratio(1e7)).rqe == pytest.approx(1, abs=1e-6)

    @pytest.mark.parametrize("n", [2, 3])
    def test_at_least_independent(self, n):
        xs = np.concatenate([[0], np.geomspace(1e-4, 1e4, 400)])
        rs = np.array([r.rqe for r in scan_rqe(n, xs)])
        assert np.all(rs >= 1 - 1e-14)
        assert len(Y._local_maxima(rs)) == 1

    @settings(max_examples=30, deadline=None)
    @given(n=st.integers(2, 6), x=st.floats(0, 50))
    def test_general_graph_never_worse(self, n, x):
        assert rqe(n, RateSet.from_ratio(x), "general").rqe >= 1 - 1e-12

    def test_general_matches_explicit_graphs(self):
        for n in (2, 3):
            for x in (0.4, 1.61, 3.0):
                a = rqe(n, RateSet.from_ratio(x)).rqe
                b = rqe(n, RateSet.from_ratio(x), "general").rqe
                assert a == pytest.approx(b, rel=1e-13)


class TestMaximize:
    def test_two(self):
        opt = maximize_rqe(2)
        assert opt.ratio == pytest.approx(SQRT2, abs=1e-5)
        assert opt.rqe == pytest.approx(R2_MAX, abs=1e-6)
        assert opt.unimodal and not opt.flat

    def test_three_against_oracle(self):
        opt = maximize_rqe(3)
        assert opt.ratio == pytest.approx(R3_ARGMAX, abs=1e-5)
        assert opt.rqe == pytest.approx(R3_MAX, abs=1e-9)

    @pytest.mark.xfail(strict=True, reason="the rate equations peak at 1.16692")
    def test_three_expected(self):
        opt = maximize_rqe(3)
        assert opt.ratio == pytest.approx(1.61, abs=0.02)
        assert opt.rqe == pytest.approx(1.164, abs=0.002)

    def test_single_emitter_is_flat(self):
        opt = maximize_rqe(1)
        assert opt.flat and math.isnan(opt.ratio) and opt.rqe == pytest.approx(1)

    def test_bracket_expansion(self):
        assert maximize_rqe(2, bracket=(3, 10)).ratio == pytest.approx(SQRT2, abs=1e-5)
        assert maximize_rqe(2, bracket=(0.01, 0.5)).ratio == pytest.approx(SQRT2, abs=1e-5)

    def test_bad_bracket(self):
        with pytest.raises(ValidationError):
            maximize_rqe(2, bracket=(2, 1))

    def test_multiple_maxima_warn(self, monkeypatch):
        def bumpy(n, rates, kind="explicit"):
            x = rates.ratio
            r = 1 + math.exp(-(x - 0.5) ** 2 * 20) + 2 * math.exp(-(x - 5) ** 2)
            return Y.YieldReport(n, x, r, 0.0, 1.0, r, Method.MARKOV)

        monkeypatch.setattr(Y, "rqe", bumpy)
        with pytest.warns(RuntimeWarning, match="local maxima"):
            opt = maximize_rqe(2)
        assert not opt.unimodal and opt.n_local_maxima == 2
        assert opt.ratio == pytest.approx(5, rel=0.1)

    def test_unimodal_case_is_quiet(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            maximize_rqe(3)

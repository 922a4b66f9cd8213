from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphpurify.analysis import (
    RING,
    STRATEGIES,
    AnalysisError,
    StrategyOptions,
    StrategyOutcome,
    bisect_predicate,
    fixed_point_fmax,
    fmax_ordered,
    fmin_inverted,
    lne,
    merge_pieces,
    mepp_aux_fixed_points,
    min_required_fidelity,
    periodic_fixed_point,
    run_strategy,
    split_pieces,
    yield_bound_ring,
)
from graphpurify.diag import NoiseParams, depolarize_vertices, perfect_state, white_noise_state
from graphpurify.graphs import derive_gj, color_graph


class TestFixedPoints:
    @pytest.mark.parametrize("strategy", STRATEGIES)
    def test_ideal_fmax_is_one(self, strategy):
        res = fixed_point_fmax(strategy, 1.0)
        assert res.converged
        assert res.fidelity == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("strategy", ["MEPP", "BEPP", "SPLIT-5-2"])
    def test_fmax_monotone_in_pl(self, strategy):
        f = [fixed_point_fmax(strategy, p).fidelity for p in (0.96, 0.97, 0.98, 0.99, 1.0)]
        assert all(b >= a - 1e-12 for a, b in zip(f, f[1:]))

    def test_fmax_independent_of_start(self):
        a = fixed_point_fmax("MEPP", 0.98, start=0.999).fidelity
        b = fixed_point_fmax("MEPP", 0.98, start=0.95).fidelity
        assert a == pytest.approx(b, abs=1e-9)

    def test_fmax_scenarios_agree(self):
        for s in STRATEGIES:
            a = fixed_point_fmax(s, 0.98, "static").fidelity
            b = fixed_point_fmax(s, 0.98, "communication").fidelity
            assert a == pytest.approx(b, abs=1e-6)

    def test_ordering_at_099(self):
        rows = [
            StrategyOutcome(s, "communication", 0.99, fixed_point_fmax(s, 0.99).fidelity, None, None, None, None, 0, True)
            for s in STRATEGIES
        ]
        assert fmax_ordered(rows)

    def test_aux_fixed_points_graphs(self):
        c = color_graph(RING)
        noise = NoiseParams(p_l=0.99)
        starts = {j: white_noise_state(derive_gj(RING, c, j), 0.95) for j in range(c.k)}
        aux = mepp_aux_fixed_points(starts, noise)
        for j, run in aux.items():
            assert run.converged
            assert run.state.graph == derive_gj(RING, c, j)
            assert 0.9 < run.fidelity < 1.0

    def test_periodic_picks_best_phase(self):
        s = white_noise_state(RING, 0.9)
        down = lambda x: white_noise_state(RING, 0.5)
        up = lambda x: white_noise_state(RING, 0.8)
        res = periodic_fixed_point([down, up], s)
        assert res.converged and res.fidelity == pytest.approx(0.8)

    def test_split_merge_ideal(self):
        for strategy in ("SPLIT-5-2", "SPLIT-4-3"):
            pieces, residual = split_pieces(strategy)
            parts = [(p, perfect_state(p.graph)) for p in pieces + [residual]]
            ring_state = merge_pieces(parts)
            assert ring_state.graph == RING
            assert ring_state.fidelity == pytest.approx(1.0, abs=1e-12)

    def test_unknown_names(self):
        with pytest.raises(AnalysisError):
            run_strategy("HASHING", "static", 0.9, NoiseParams())
        with pytest.raises(AnalysisError):
            run_strategy("MEPP", "orbital", 0.9, NoiseParams())
        with pytest.raises(AnalysisError):
            fixed_point_fmax("MEPP", 0.0)

    def test_noisy_merge_option_lowers_split(self):
        a = fixed_point_fmax("SPLIT-5-2", 0.98).fidelity
        b = fixed_point_fmax("SPLIT-5-2", 0.98, opts=StrategyOptions(noisy_merge=True)).fidelity
        assert b < a


class TestFmin:
    def test_communication_bracketed(self):
        f_max = fixed_point_fmax("MEPP", 0.99).fidelity
        f_min, q = min_required_fidelity("MEPP", "communication", 0.99, f_max)
        assert 0 < f_min < f_max
        assert lne(f_min) == pytest.approx(q, abs=1e-5)

    def test_bisect_bracket_checks(self):
        assert bisect_predicate(lambda x: x > 0.3, 0.0, 1.0, 1e-6) == pytest.approx(0.3, abs=1e-6)
        assert bisect_predicate(lambda x: False, 0.0, 1.0, 1e-6) is None
        assert bisect_predicate(lambda x: True, 0.0, 1.0, 1e-6) is None

    def test_inverted_helper(self):
        def row(s, fmin):
            return StrategyOutcome(s, "communication", 0.99, 0.9, fmin, None, None, None, 0, True)

        assert fmin_inverted([row(s, f) for s, f in zip(STRATEGIES, (0.4, 0.3, 0.2, 0.1))])
        assert not fmin_inverted([row(s, f) for s, f in zip(STRATEGIES, (0.1, 0.3, 0.2, 0.1))])

    def test_outcome_invariants(self):
        with pytest.raises(AnalysisError):
            StrategyOutcome("MEPP", "static", 0.99, 0.5, 0.6, None, None, None, 0, True)
        with pytest.raises(AnalysisError):
            StrategyOutcome("MEPP", "static", 0.99, 1.5, None, None, None, None, 0, True)


class TestLNE:
    def test_endpoints(self):
        assert lne(1.0) == 1.0
        floor = depolarize_vertices(perfect_state(RING), [1, 2, 3, 4], 0.0).fidelity
        assert lne(floor) == 0.0
        with pytest.raises(AnalysisError):
            lne(floor - 0.01)

    @settings(max_examples=30)
    @given(st.floats(0.0, 1.0))
    def test_inverts_forward_map(self, p):
        F = depolarize_vertices(perfect_state(RING), [1, 2, 3, 4], p).fidelity
        assert lne(F) == pytest.approx(p, abs=1e-5)

    def test_strictly_increasing(self):
        floor = depolarize_vertices(perfect_state(RING), [1, 2, 3, 4], 0.0).fidelity
        grid = np.linspace(floor + 1e-3, 1.0, 40)
        ps = [lne(F) for F in grid]
        assert all(b > a for a, b in zip(ps, ps[1:]))


class TestYieldBound:
    def test_report(self):
        rep = yield_bound_ring()
        assert len(rep.cut_entropies) == 10
        assert all(abs(v - 2.0) < 1e-10 for v in rep.cut_entropies.values())
        assert rep.neighbor_decomposition_error <= 1e-12
        assert rep.non_neighbor_decomposition_error <= 1e-12
        # the Hadamard-dressed form does not reproduce the reduced state
        assert rep.non_neighbor_hadamard_form_error > 0.1
        assert (rep.crossing_count, rep.inside_count, rep.n_cuts) == (6, 3, 10)
        assert rep.bound == Fraction(2, 3)

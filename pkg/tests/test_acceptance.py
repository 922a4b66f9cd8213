"""Acceptance gate.

Run with ``pytest tests/test_acceptance.py`` (add ``-s`` to see progress);
the terminal summary ends with one PASS/FAIL line per criterion.
"""
import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from graphpurify import analysis, oracle
from graphpurify.bipartite import extract_pair_from_ring
from graphpurify.breeding import ring_yield_curve, yield_crossing
from graphpurify.cli import ExperimentConfig, run
from graphpurify.diag import IDEAL, NoiseParams, perfect_state, white_noise_state
from graphpurify.graphs import color_graph, derive_gj, ring
from graphpurify.purification import cycle_schedule, merge_states, prepare_auxiliary, run_schedule, subprotocol_pj

from conftest import diag_states, graphs, note

RING = ring(5)
ORACLE_TOL = 1e-10
N_EXAMPLES = 200

oracle_settings = settings(
    max_examples=N_EXAMPLES,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
# the 5-ring gets a fixed share of the draws, the rest are random graphs
test_graphs = st.one_of(st.just(RING), graphs(2, 5, connected=False), graphs(2, 5, connected=True))
noise_params = st.tuples(st.sampled_from([1.0, 0.97, 0.9]), st.sampled_from([1.0, 0.95]))

COUNTS: dict[str, int] = {}


def _count(key):
    COUNTS[key] = COUNTS.get(key, 0) + 1


def _pj_case(draw_graph=test_graphs):
    return draw_graph.flatmap(lambda g: st.tuples(st.just(g), diag_states(g), st.data(), noise_params))


# ---------------------------------------------------------------------------
# 1. oracle equivalence


@pytest.mark.criterion(1)
@oracle_settings
@given(_pj_case())
def test_c1_subprotocol_vs_oracle(case):
    g, s, data, (p_l, p_m) = case
    c = color_graph(g)
    j = data.draw(st.integers(0, c.k - 1))
    aux = data.draw(diag_states(derive_gj(g, c, j)))
    rep = subprotocol_pj(s, aux, c, j, NoiseParams(p_l=p_l, p_m=p_m))
    ref, p, off = oracle.subprotocol_circuit(s, aux, c, j, p_l, p_m)
    assert np.abs(rep.out.lam - ref.lam).max() <= ORACLE_TOL
    assert abs(rep.p_success - p) <= ORACLE_TOL
    assert off <= ORACLE_TOL
    _count("P_j")


@pytest.mark.criterion(1)
@pytest.mark.parametrize("variant", ["plain", "purifying"])
@oracle_settings
@given(case=_pj_case())
def test_c1_prepare_auxiliary_vs_oracle(variant, case):
    g, s, data, (p_l, p_m) = case
    c = color_graph(g)
    j = data.draw(st.integers(0, c.k - 1))
    s2 = data.draw(diag_states(g))
    rep = prepare_auxiliary(s, s2, c, j, variant, NoiseParams(p_l=p_l, p_m=p_m))
    ref, p, off = oracle.prepare_auxiliary_circuit(s, s2, c, j, derive_gj(g, c, j), variant == "purifying", p_l, p_m)
    assert np.abs(rep.out.lam - ref.lam).max() <= ORACLE_TOL
    assert abs(rep.p_success - p) <= ORACLE_TOL
    assert off <= ORACLE_TOL
    _count(f"aux:{variant}")


@pytest.mark.criterion(1)
@oracle_settings
@given(diag_states(RING))
def test_c1_extract_pair_vs_oracle(s):
    pair = extract_pair_from_ring(s)
    ref, off, _ = oracle.z_measure_circuit(s, [1, 2, 3])
    assert np.abs(pair.lam - ref.lam).max() <= ORACLE_TOL
    assert off <= ORACLE_TOL
    _count("extract")


@pytest.mark.criterion(1)
@oracle_settings
@given(test_graphs, graphs(1, 5, connected=True), st.data(), st.sampled_from([1.0, 0.95]))
def test_c1_merge_vs_oracle(g1, g2, data, p_l):
    s1 = data.draw(diag_states(g1))
    s2 = data.draw(diag_states(g2))
    v1 = data.draw(st.integers(0, g1.n - 1))
    v2 = data.draw(st.integers(0, g2.n - 1))
    rep = merge_states(s1, v1, s2, v2, NoiseParams(p_l=p_l))
    ref, off = oracle.merge_circuit(s1, v1, s2, v2, p_l)
    assert np.abs(rep.out.lam - ref.lam).max() <= ORACLE_TOL
    assert rep.p_success == 1.0
    assert off <= ORACLE_TOL
    _count("merge")


@pytest.mark.criterion(1)
def test_c1_example_counts():
    keys = ["P_j", "aux:plain", "aux:purifying", "extract", "merge"]
    note(1, "examples per operation: " + ", ".join(f"{k}={COUNTS.get(k, 0)}" for k in keys))
    assert all(COUNTS.get(k, 0) >= N_EXAMPLES for k in keys)


# ---------------------------------------------------------------------------
# 2. ideal fixed point


@pytest.mark.criterion(2)
def test_c2_mepp_static_pipeline():
    res = analysis.run_mepp("static", 1.0, IDEAL, base=white_noise_state(RING, 0.9))
    note(2, f"static pipeline from f=0.9: F={res.fidelity!r} after {res.rounds} rounds")
    assert res.converged
    assert abs(res.fidelity - 1.0) <= 1e-9


@pytest.mark.criterion(2)
def test_c2_perfect_aux_schedule():
    res = run_schedule(white_noise_state(RING, 0.9), cycle_schedule(3, "fresh"), color_graph(RING))
    f = res.fidelities
    note(2, f"fresh perfect auxiliaries: F={f[-1]!r} after {len(res.reports)} sub-protocols")
    assert abs(f[-1] - 1.0) <= 1e-9
    assert all(b >= a - 1e-12 for a, b in zip(f, f[1:]))


# ---------------------------------------------------------------------------
# 3. breeding


@pytest.mark.criterion(3)
def test_c3_breeding_curve():
    grid = [round(0.8 + 0.005 * i, 10) for i in range(41)]
    ys = [r["Y"] for r in ring_yield_curve(grid)]
    f_star = yield_crossing()
    note(3, f"Y(1)={ys[-1]!r}, Y crosses 2/3 at f={f_star:.6f}")
    assert ys[-1] == 1.0
    assert 0.987 <= f_star <= 0.989
    assert all(b > a for a, b in zip(ys, ys[1:]))


# ---------------------------------------------------------------------------
# 4. thresholds


@pytest.mark.criterion(4)
def test_c4_mepp_ideal_threshold():
    x = analysis.ideal_threshold_mepp()
    alt = analysis.ideal_threshold_mepp(opts=analysis.StrategyOptions(skip_idle=True))
    note(4, f"MEPP x* = {x:.5f} (target 0.200 +- 0.005); with idle parties skipping P_j: x* = {alt:.5f} (informational)")
    assert x is not None
    assert abs(x - 0.200) <= 0.005


@pytest.mark.criterion(4)
def test_c4_bepp_ppt_threshold():
    x = analysis.ideal_threshold_bepp()
    note(4, f"BEPP x* = {x!r} (target 1/3)")
    assert abs(x - 1.0 / 3.0) <= 1e-10
    assert analysis.extracted_pair_ppt(1 / 3 + 1e-6) < 0 < analysis.extracted_pair_ppt(1 / 3 - 1e-6)


# ---------------------------------------------------------------------------
# 5. yield bound


@pytest.mark.criterion(5)
def test_c5_yield_bound():
    rep = analysis.yield_bound_ring()
    worst = max(abs(v - 2.0) for v in rep.cut_entropies.values())
    note(
        5,
        f"max |S-2| = {worst:.1e}; decomposition errors {rep.neighbor_decomposition_error:.1e} (neighbours), "
        f"{rep.non_neighbor_decomposition_error:.1e} (non-neighbours); bound = {rep.bound}",
    )
    assert len(rep.cut_entropies) == 10 and worst <= 1e-10
    assert rep.neighbor_decomposition_error <= 1e-12
    assert rep.non_neighbor_decomposition_error <= 1e-12
    assert rep.bound == Fraction(2, 3)


# ---------------------------------------------------------------------------
# 6. noisy orderings

P_LS = (0.97, 0.98, 0.99, 0.995)


@pytest.mark.criterion(6)
def test_c6_orderings():
    t0 = time.perf_counter()
    bad = []
    for p_l in P_LS:
        rows = analysis.compare_strategies("communication", p_l)
        fmax = [r.F_max for r in rows]
        fmin = [r.F_min for r in rows]
        note(6, f"p_l={p_l}: F_max {[round(v, 5) for v in fmax]}, F_min {[round(v, 5) if v else v for v in fmin]}")
        if not (all(r.converged for r in rows) and analysis.fmax_ordered(rows) and analysis.fmin_inverted(rows)):
            bad.append(p_l)
        for s in analysis.STRATEGIES:
            fs = analysis.fixed_point_fmax(s, p_l, "static").fidelity
            fc = analysis.fixed_point_fmax(s, p_l, "communication").fidelity
            if abs(fs - fc) > 1e-6:
                bad.append((p_l, s))
    elapsed = time.perf_counter() - t0
    note(6, f"elapsed {elapsed:.1f} s")
    assert not bad, bad
    assert elapsed < 300


@pytest.mark.criterion(6)
def test_c6_soft_static_fmin():
    # soft check, reported but not gating: static MEPP F_min close to the communication value
    comm, _ = analysis.min_required_fidelity("MEPP", "communication", 0.97)
    stat, _ = analysis.min_required_fidelity("MEPP", "static", 0.97)
    gap = abs(comm - stat)
    note(6, f"soft: MEPP F_min communication {comm:.4f} vs static {stat:.4f} (gap {gap:.4f}, tolerance 0.01)"
            + ("" if gap <= 0.01 else " -> WARNING"))
    assert 0 < stat < 1 and 0 < comm < 1


# ---------------------------------------------------------------------------
# 7. determinism

CONFIGS = [
    ("breed-yield", {}),
    ("purify", {"p_l": [1.0, 0.99], "q": [0.95]}),
    ("fixed-point", {"strategy": "MEPP", "p_l": [0.98, 0.99], "workers": 2}),
    ("compare", {"p_l": [0.99], "scenario": "communication"}),
    ("threshold", {"strategy": "BEPP", "ideal": True}),
    ("oracle-check", {"samples": 2, "seed": 3}),
]


@pytest.mark.criterion(7)
@pytest.mark.parametrize("command,cfg", CONFIGS, ids=[c for c, _ in CONFIGS])
def test_c7_byte_identical(command, cfg, tmp_path):
    outs = []
    for i in range(2):
        text, _ = run(command, ExperimentConfig.from_dict(dict(cfg)))
        path = tmp_path / f"{i}.csv"
        path.write_text(text)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert len(outs[0]) > 0

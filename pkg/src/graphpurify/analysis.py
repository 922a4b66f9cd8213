"""Fixed points, thresholds and strategy comparisons on the 5-vertex ring.

Every strategy is run on an infinite ensemble, so each step is a
deterministic map on graph-diagonal coefficients.  A strategy run returns
the final ring state; :func:`fixed_point_fmax` and
:func:`min_required_fidelity` are built on top of that.

Strategies
----------
MEPP
    Purify the three auxiliary states ``g_j`` with their own two-colorable
    recurrence, then cycle ``P_0, P_1, P_2`` on the ring with those states.
SPLIT-5-2, SPLIT-4-3
    Purify the two-colorable pieces of the ring separately, then merge.
BEPP
    Purify pairs with the DEJMPS-style step and teleport a locally created
    ring through four of them.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import oracle
from .bipartite import BellDiagState, bell_recurrence_step, channel_pair, extract_pair_from_ring, teleport_ring_through_pairs
from .diag import IDEAL, DiagState, NoiseParams, depolarize_vertices, perfect_state, white_noise_from_x, white_noise_state
from .graphs import Coloring, Graph, build_graph, color_graph, derive_gj, derive_split_subgraphs, ring, subgraph_coloring, two_coloring
from .purification import (
    MAX_ROUNDS,
    PurificationError,
    channel_state,
    measure_out,
    merge_states,
    merge_within,
    prepare_auxiliary,
    relabel,
    subprotocol_pj,
)

STRATEGIES = ("MEPP", "SPLIT-5-2", "SPLIT-4-3", "BEPP")
SCENARIOS = ("static", "communication")
SPLIT_ORDERS = {"SPLIT-5-2": (0, 1, 2), "SPLIT-4-3": (2, 0, 1)}
RING = ring(5)
RING_COLORING = color_graph(RING)
NOISY_VERTICES = (1, 2, 3, 4)
CREATOR = 0

FP_TOL = 1e-12
SUCCESS_TOL = 1e-4
KNOB_TOL = 1e-4
START_KNOB = 0.999
BEPP_STEP = "dejmps"
BEPP_NOTES = "local ring at A; 4 pairs; noiseless teleportation"


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class RunResult:
    state: DiagState
    rounds: int
    converged: bool

    @property
    def fidelity(self) -> float:
        return self.state.fidelity


def iterate_map(step: Callable[[DiagState], DiagState], s: DiagState, tol: float = FP_TOL, max_rounds: int = MAX_ROUNDS):
    """Apply ``step`` until no coefficient moves by more than ``tol``."""
    for i in range(1, max_rounds + 1):
        nxt = step(s)
        if np.abs(nxt.lam - s.lam).max() < tol:
            return nxt, i, True
        s = nxt
    return s, max_rounds, False


def periodic_fixed_point(steps, s: DiagState, tol: float = FP_TOL, max_rounds: int = MAX_ROUNDS) -> RunResult:
    """Fixed point of a cycle of maps, read off at its highest-fidelity phase.

    The cycle ``steps`` is iterated until a whole cycle moves no coefficient
    by more than ``tol``; the states after each step of one further cycle
    are compared and the one with the largest fidelity is returned.
    """

    def cycle(x):
        for f in steps:
            x = f(x)
        return x

    x, rounds, conv = iterate_map(cycle, s, tol, max_rounds)
    best = x
    for f in steps[:-1]:
        x = f(x)
        if x.fidelity > best.fidelity:
            best = x
    return RunResult(best, rounds, conv)


@dataclass(frozen=True)
class StrategyOptions:
    """Modeling switches shared by all strategy runs.

    Parameters
    ----------
    noisy_merge
        Apply gate noise ``p_l`` to the two qubits of every merge.  Off by
        default, so that re-assembling the ring is as noiseless for the split
        strategies as teleportation is for BEPP.
    skip_idle
        Let parties whose auxiliary qubit is isolated sit out a
        sub-protocol (no gate, no noise).
    """

    noisy_merge: bool = False
    skip_idle: bool = False


DEFAULT_OPTIONS = StrategyOptions()


def _pj(s, aux, c, j, noise, opts):
    return subprotocol_pj(s, aux, c, j, noise, skip_idle=opts.skip_idle).out


def two_colorable_fixed_point(
    s: DiagState, noise: NoiseParams, order=None, c2: Coloring | None = None, opts: StrategyOptions = DEFAULT_OPTIONS
) -> RunResult:
    """Fixed point of the two-colorable recurrence using copies of ``s`` as auxiliary states."""
    c2 = two_coloring(s.graph) if c2 is None else c2
    if c2 is None:
        raise AnalysisError(f"{s.graph} is not two-colorable")
    if c2.k == 1:
        raise AnalysisError("graph has no edges")
    order = (0, 1) if order is None else order
    steps = [(lambda x, j=j: _pj(x, x, c2, j, noise, opts)) for j in order]
    return periodic_fixed_point(steps, s)


# ---------------------------------------------------------------------------
# starting states


def static_ring(p: float) -> DiagState:
    """Distributed ring with ``E_p`` on every party except A."""
    return depolarize_vertices(perfect_state(RING), NOISY_VERTICES, p)


def ring_fidelity_for_knob(p: float) -> float:
    return static_ring(p).fidelity


def _creator(piece_vertices) -> int | None:
    """Local label of party A in a piece, or ``None`` when A holds no qubit of it."""
    return piece_vertices.index(CREATOR) if CREATOR in piece_vertices else None


# ---------------------------------------------------------------------------
# strategies


def _mepp_aux_starts(scenario: str, knob: float, noise: NoiseParams, base: DiagState | None):
    starts = {}
    for j in range(RING_COLORING.k):
        if scenario == "static":
            starts[j] = prepare_auxiliary(base, base, RING_COLORING, j, "purifying", noise).out
        else:
            starts[j] = channel_state(derive_gj(RING, RING_COLORING, j), knob, CREATOR)
    return starts


def mepp_aux_fixed_points(
    starts: dict[int, DiagState], noise: NoiseParams, opts: StrategyOptions = DEFAULT_OPTIONS
) -> dict[int, RunResult]:
    """Purify each ``g_j`` state; rounds take the complement class first, then ``A_j``."""
    return {
        j: two_colorable_fixed_point(s, noise, (1, 0), subgraph_coloring(RING_COLORING, j), opts)
        for j, s in starts.items()
    }


def mepp_ring_fixed_point(
    start: DiagState, aux: dict[int, DiagState], noise: NoiseParams, opts: StrategyOptions = DEFAULT_OPTIONS
) -> RunResult:
    steps = [(lambda s, j=j: _pj(s, aux[j], RING_COLORING, j, noise, opts)) for j in range(RING_COLORING.k)]
    return periodic_fixed_point(steps, start)


def run_mepp(scenario, knob, noise, base=None, opts: StrategyOptions = DEFAULT_OPTIONS) -> RunResult:
    if scenario == "static":
        base = static_ring(knob) if base is None else base
        start = base
    else:
        start = channel_state(RING, knob, CREATOR) if base is None else base
    aux_runs = mepp_aux_fixed_points(_mepp_aux_starts(scenario, knob, noise, base), noise, opts)
    ring_run = mepp_ring_fixed_point(start, {j: r.state for j, r in aux_runs.items()}, noise, opts)
    rounds = sum(r.rounds for r in aux_runs.values()) + ring_run.rounds
    conv = ring_run.converged and all(r.converged for r in aux_runs.values())
    return RunResult(ring_run.state, rounds, conv)


def split_pieces(strategy: str):
    return derive_split_subgraphs(RING, RING_COLORING, SPLIT_ORDERS[strategy])


def merge_pieces(parts, noise: NoiseParams = IDEAL) -> DiagState:
    """Fuse ``[(Piece, DiagState), ...]`` along shared labels and relabel onto the ring."""
    (p0, s), rest = parts[0], parts[1:]
    labels = list(p0.vertices)
    for piece, t in rest:
        shared = [v for v in piece.vertices if v in labels]
        if not shared:
            raise AnalysisError(f"piece {piece.vertices} shares no vertex")
        v = shared[0]
        s = merge_states(s, labels.index(v), t, piece.local(v), noise).out
        labels = labels + [w for w in piece.vertices if w != v]
        for w in shared[1:]:
            a = labels.index(w)
            b = len(labels) - 1 - labels[::-1].index(w)
            s = merge_within(s, a, b, noise).out
            del labels[b]
    s = relabel(s, [labels.index(i) for i in range(RING.n)])
    if s.graph != RING:
        raise AnalysisError(f"merged graph {s.graph} is not the ring")
    return s


def _split_starts(strategy: str, scenario: str, knob: float, noise: NoiseParams, base: DiagState | None):
    pieces, residual = split_pieces(strategy)
    order = SPLIT_ORDERS[strategy]
    parts = list(pieces) + [residual]
    starts = []
    for i, piece in enumerate(parts):
        if scenario == "communication":
            starts.append(channel_state(piece.graph, knob, _creator(piece.vertices)))
            continue
        ring_state = static_ring(knob) if base is None else base
        if i < len(pieces):
            s = prepare_auxiliary(ring_state, ring_state, RING_COLORING, order[i], "purifying", noise).out
        else:
            s = ring_state
        drop = [v for v in range(RING.n) if v not in piece.vertices]
        s, _ = measure_out(s, drop)
        if s.graph != piece.graph:
            raise AnalysisError(f"measured state {s.graph} does not match piece {piece.graph}")
        starts.append(s)
    return parts, starts


def run_split(strategy, scenario, knob, noise, base=None, opts: StrategyOptions = DEFAULT_OPTIONS) -> RunResult:
    parts, starts = _split_starts(strategy, scenario, knob, noise, base)
    runs = [two_colorable_fixed_point(s, noise, opts=opts) for s in starts]
    merge_noise = noise if opts.noisy_merge else IDEAL
    merged = merge_pieces([(p, r.state) for p, r in zip(parts, runs)], merge_noise)
    return RunResult(merged, sum(r.rounds for r in runs), all(r.converged for r in runs))


def bepp_pair_fixed_point(pair: BellDiagState, noise: NoiseParams):
    st, rounds, conv = iterate_map(
        lambda s: bell_recurrence_step(BellDiagState(s.lam), BellDiagState(s.lam), noise)[0].as_diag(),
        pair.as_diag(),
    )
    return BellDiagState(st.lam), rounds, conv


def run_bepp(scenario, knob, noise, base=None, opts: StrategyOptions = DEFAULT_OPTIONS) -> RunResult:
    if scenario == "static":
        pair = extract_pair_from_ring(static_ring(knob) if base is None else base)
    else:
        pair = channel_pair(knob)
    fp, rounds, conv = bepp_pair_fixed_point(pair, noise)
    out = teleport_ring_through_pairs(perfect_state(RING), [fp] * len(NOISY_VERTICES), NOISY_VERTICES)
    return RunResult(out, rounds, conv)


def run_strategy(
    strategy: str,
    scenario: str,
    knob: float,
    noise: NoiseParams,
    base: DiagState | None = None,
    opts: StrategyOptions = DEFAULT_OPTIONS,
) -> RunResult:
    """Run ``strategy`` from the starting states the scenario's noise ``knob`` produces.

    ``knob`` is the channel reliability ``q`` in the communication scenario
    and the reliability of ``E_p`` on parties B..E of the given rings in the
    static one.  ``base`` overrides the static ring ensemble.
    """
    if scenario not in SCENARIOS:
        raise AnalysisError(f"unknown scenario {scenario!r}")
    runners = {"MEPP": run_mepp, "BEPP": run_bepp}
    if strategy in SPLIT_ORDERS:
        return run_split(strategy, scenario, knob, noise, base, opts)
    if strategy not in runners:
        raise AnalysisError(f"unknown strategy {strategy!r}")
    return runners[strategy](scenario, knob, noise, base, opts)


# ---------------------------------------------------------------------------
# F_max, F_min, LNE


def fixed_point_fmax(
    strategy: str,
    p_l: float,
    scenario: str = "communication",
    start: float = START_KNOB,
    opts: StrategyOptions = DEFAULT_OPTIONS,
) -> RunResult:
    """Fixed point of the strategy reached from a high-fidelity start."""
    if not 0.0 < p_l <= 1.0:
        raise AnalysisError(f"p_l={p_l} outside (0, 1]")
    return run_strategy(strategy, scenario, start, NoiseParams(p_l=p_l), opts=opts)


def _succeeds(strategy, scenario, knob, noise, f_max, opts) -> bool:
    try:
        res = run_strategy(strategy, scenario, knob, noise, opts=opts)
    except PurificationError:
        return False
    return abs(res.fidelity - f_max) < SUCCESS_TOL


def bisect_predicate(ok: Callable[[float], bool], lo: float, hi: float, tol: float) -> float | None:
    """Smallest value where ``ok`` holds, assuming it is monotone on ``[lo, hi]``.

    Returns ``None`` when ``ok(hi)`` fails or ``ok(lo)`` already holds
    (nothing to locate).
    """
    if not ok(hi) or ok(lo):
        return None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def min_required_fidelity(
    strategy: str,
    scenario: str,
    p_l: float,
    f_max: float | None = None,
    tol: float = KNOB_TOL,
    opts: StrategyOptions = DEFAULT_OPTIONS,
):
    """Bisect the scenario's noise knob for the weakest input still reaching ``F_max``.

    Returns ``(F_min, knob_min)`` or ``(None, None)`` when no knob value in
    ``(0, 1]`` separates success from failure.  ``F_min`` is the fidelity of
    the ring with ``E_knob`` on parties B..E.
    """
    noise = NoiseParams(p_l=p_l)
    if f_max is None:
        f_max = fixed_point_fmax(strategy, p_l, scenario, opts=opts).fidelity
    knob = bisect_predicate(lambda k: _succeeds(strategy, scenario, k, noise, f_max, opts), 0.0, 1.0, tol)
    if knob is None:
        return None, None
    return ring_fidelity_for_knob(knob), knob


def lne(F: float, g: Graph = RING, noisy_vertices=NOISY_VERTICES, tol: float = 1e-6) -> float:
    """Reliability ``p`` of ``E_p`` on ``noisy_vertices`` that leaves the perfect state at fidelity ``F``."""
    perfect = perfect_state(g)

    def f(p):
        return depolarize_vertices(perfect, noisy_vertices, p).fidelity - F

    floor = f(0.0) + F
    if F < floor - 1e-12 or F > 1.0 + 1e-12:
        raise AnalysisError(f"fidelity {F} outside the reachable range [{floor}, 1]")
    if F <= floor:
        return 0.0
    if F >= 1.0:
        return 1.0
    return float(brentq(f, 0.0, 1.0, xtol=tol))


@dataclass
class StrategyOutcome:
    strategy: str
    scenario: str
    p_l: float
    F_max: float | None
    F_min: float | None
    LNE_Fmax: float | None
    LNE_Fmin: float | None
    q_min: float | None
    iterations: int
    converged: bool
    knob_min: float | None = None
    notes: str = ""

    def __post_init__(self):
        for name in ("F_max", "F_min"):
            v = getattr(self, name)
            if v is not None and not -1e-12 <= v <= 1 + 1e-12:
                raise AnalysisError(f"{name}={v} outside [0, 1]")
        if self.F_max is not None and self.F_min is not None and self.F_min > self.F_max + 1e-12:
            raise AnalysisError(f"F_min={self.F_min} exceeds F_max={self.F_max}")

    def row(self) -> dict:
        d = asdict(self)
        d["bepp_step"] = BEPP_STEP
        return d


def strategy_outcome(
    strategy: str, scenario: str, p_l: float, with_fmin: bool = True, opts: StrategyOptions = DEFAULT_OPTIONS
) -> StrategyOutcome:
    """One comparison row.  ``F_max`` is reported as undefined when no input purifies."""
    fp = fixed_point_fmax(strategy, p_l, scenario, opts=opts)
    f_max = fp.fidelity
    f_min = knob = None
    if with_fmin:
        f_min, knob = min_required_fidelity(strategy, scenario, p_l, f_max, opts=opts)
    return StrategyOutcome(
        strategy=strategy,
        scenario=scenario,
        p_l=p_l,
        F_max=f_max if f_min is not None or not with_fmin else None,
        F_min=f_min,
        LNE_Fmax=lne(f_max),
        LNE_Fmin=lne(f_min) if f_min is not None else None,
        q_min=knob if scenario == "communication" else None,
        iterations=fp.rounds,
        converged=fp.converged,
        knob_min=knob,
        notes=BEPP_NOTES if strategy == "BEPP" else "",
    )


def compare_strategies(
    scenario: str, p_l: float, strategies=STRATEGIES, with_fmin: bool = True, opts: StrategyOptions = DEFAULT_OPTIONS
) -> list[StrategyOutcome]:
    return [strategy_outcome(s, scenario, p_l, with_fmin, opts) for s in strategies]


def fmax_ordered(rows: list[StrategyOutcome], tol: float = 1e-12) -> bool:
    """``F_max`` non-increasing in the order MEPP, 5-2, 4-3, BEPP."""
    f = [r.F_max for r in sorted(rows, key=lambda r: STRATEGIES.index(r.strategy))]
    return None not in f and all(a >= b - tol for a, b in zip(f, f[1:]))


def fmin_inverted(rows: list[StrategyOutcome], tol: float = 1e-12) -> bool:
    f = [r.F_min for r in sorted(rows, key=lambda r: STRATEGIES.index(r.strategy))]
    return None not in f and all(a >= b - tol for a, b in zip(f, f[1:]))


# ---------------------------------------------------------------------------
# ideal-operation thresholds


def mepp_static_success_x(x: float, tol: float = SUCCESS_TOL, opts: StrategyOptions = DEFAULT_OPTIONS) -> bool:
    """Whether the ideal static MEPP pipeline purifies the white-noise ring with parameter ``x``."""
    try:
        res = run_mepp("static", 1.0, NoiseParams(), base=white_noise_from_x(RING, x), opts=opts)
    except PurificationError:
        return False
    return res.fidelity > 1.0 - tol


def ideal_threshold_mepp(tol: float = KNOB_TOL, opts: StrategyOptions = DEFAULT_OPTIONS) -> float | None:
    """Smallest white-noise parameter ``x`` the ideal MEPP pipeline purifies."""
    return bisect_predicate(lambda x: mepp_static_success_x(x, opts=opts), 0.0, 1.0, tol)


def extracted_pair_ppt(x: float) -> float:
    """Minimum partial-transpose eigenvalue of the pair cut from a white-noise ring (dense)."""
    pair, _, _ = oracle.z_measure_circuit(white_noise_from_x(RING, x), [1, 2, 3])
    return oracle.ppt_min_eigenvalue(oracle.density_from_diag(pair))


def ideal_threshold_bepp(xtol: float = 1e-14) -> float:
    """White-noise ``x`` where the extracted pair stops being PPT."""
    return float(brentq(extracted_pair_ppt, 0.05, 0.9, xtol=xtol))


# ---------------------------------------------------------------------------
# yield bound for ring -> pairs -> ring


@dataclass
class YieldBoundReport:
    cut_entropies: dict[tuple[int, int], float]
    neighbor_decomposition_error: float
    non_neighbor_decomposition_error: float
    non_neighbor_hadamard_form_error: float
    crossing_count: int
    inside_count: int
    n_cuts: int
    entropy_per_ring: int
    bound: Fraction
    notes: list[str] = field(default_factory=list)


def _ket(letters: str) -> np.ndarray:
    """Product ket from '+'/'-' letters; letter ``i`` is qubit ``i``."""
    plus = np.array([1, 1], dtype=complex) / math.sqrt(2)
    minus = np.array([1, -1], dtype=complex) / math.sqrt(2)
    v = np.array([1.0 + 0j])
    for ch in letters:
        v = np.kron({"+": plus, "-": minus}[ch], v)
    return v


def _separable_rho_prime() -> np.ndarray:
    return sum(oracle.to_density(_ket(s)) for s in ("+++", "--+", "-+-", "+--")) / 4.0


def _local(ops) -> np.ndarray:
    u = np.array([[1.0 + 0j]])
    for op in ops:
        u = np.kron(op, u)
    return u


def yield_bound_ring() -> YieldBoundReport:
    """Recompute the ingredients of ``M~ <= 2/3 M`` for the 5-vertex ring from dense states."""
    rho = oracle.density_from_diag(perfect_state(RING))
    n = RING.n
    cuts = list(combinations(range(n), 2))
    ent = {}
    for a in cuts:
        ent[a] = oracle.von_neumann_entropy(oracle.partial_trace(rho, a))

    r_prime = _separable_rho_prime()
    h, one = oracle.HAD, oracle.I2
    phase = one + 1j * oracle.Z

    # neighbors {0, 1} traced out; the rest carries the star graph centered on 3
    t_nb = oracle.partial_trace(rho, [2, 3, 4])
    star = build_graph(3, [(0, 1), (1, 2)])
    proj = sum(oracle.to_density(oracle.graph_basis_state(star, mu)) for mu in (0b000, 0b100, 0b001, 0b101)) / 4.0
    u = _local([h, one, h])
    err_nb = max(np.abs(t_nb - proj).max(), np.abs(t_nb - u.conj().T @ r_prime @ u).max())

    # non-neighbors {0, 2} traced out: the remaining stabilizer is X1 Y3 Y4,
    # which the phase gates (1 + i Z) on qubits 3 and 4 turn into X X X
    t_nn = oracle.partial_trace(rho, [1, 3, 4])
    v = _local([one, phase, phase])
    lhs = v.conj().T @ t_nn @ v / 4.0
    err_nn = float(np.abs(lhs - r_prime).max())
    w = _local([one, h, h])
    err_nn_hadamard = float(np.abs(lhs - w.conj().T @ r_prime @ w).max())

    # counts over the ten 2-vs-3 cuts
    pairs = list(combinations(range(n), 2))
    crossing = sum(1 for a in cuts for p in pairs if len(set(a) & set(p)) == 1) // len(pairs)
    inside = sum(1 for a in cuts for p in pairs if not set(a) & set(p)) // len(pairs)
    s_ring = round(min(ent.values()))
    # crossing * sum(m) >= n_cuts * S * M~   and   (crossing + inside) * sum(m) <= n_cuts * S * M
    bound = Fraction(crossing, len(cuts) * s_ring) * Fraction(len(cuts) * s_ring, crossing + inside)
    return YieldBoundReport(
        cut_entropies=ent,
        neighbor_decomposition_error=float(err_nb),
        non_neighbor_decomposition_error=err_nn,
        non_neighbor_hadamard_form_error=err_nn_hadamard,
        crossing_count=crossing,
        inside_count=inside,
        n_cuts=len(cuts),
        entropy_per_ring=s_ring,
        bound=bound,
    )

"""Recurrence protocol steps as exact maps on graph-diagonal states.

All maps work on the coefficient arrays directly.  A pair of states
``(mu, nu)`` is handled as a ``2^n x 2^n`` joint table; the multilateral
CNOT only permutes that table, and a readout keeps or discards entries
according to a parity pattern.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .diag import IDEAL, DiagState, NoiseParams, depolarize_array, depolarize_vertices, marginal_over, perfect_state
from .graphs import (
    Coloring,
    Graph,
    build_graph,
    derive_gj,
    merged_graph,
    merged_within_graph,
)

CONVERGE_TOL = 1e-9
MAX_ROUNDS = 10_000


class PurificationError(ValueError):
    pass


@dataclass(frozen=True)
class StepReport:
    out: DiagState
    p_success: float
    label: str = ""

    @property
    def fidelity(self) -> float:
        return self.out.fidelity


def multilateral_cnot_map(g: Graph, c: Coloring, j: int, active: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Index permutation of a (G, g_j) pair under the multilateral CNOT.

    Returns arrays ``(mu_out, nu_out)`` with ``[mu, nu]`` entries:
    class-``j`` bits of the second index absorb those of the first, the
    other bits of the first index absorb those of the second.  Vertices
    outside the ``active`` bitmask apply no gate.
    """
    full = (1 << g.n) - 1
    active = full if active is None else active
    jm = c.mask(j) & active
    bar = full ^ c.mask(j)
    mu = np.arange(1 << g.n)[:, None]
    nu = np.arange(1 << g.n)[None, :]
    shape = (1 << g.n,) * 2
    return np.broadcast_to(mu ^ (nu & bar & active), shape), np.broadcast_to(nu ^ (mu & jm), shape)


def idle_vertices(gj: Graph, c: Coloring, j: int) -> list[int]:
    """Vertices outside class ``j`` that are isolated in ``g_j``.

    Their auxiliary qubit is a lone ``|+>`` carrying no information about
    the class-``j`` stabilizers, so these parties can sit the step out.
    """
    jm = c.mask(j)
    return [v for v in range(gj.n) if not (jm >> v) & 1 and gj.adj[v] == 0]


def _flip_distribution(n: int, masks: Sequence[int], eps: float) -> np.ndarray:
    """Distribution of the XOR of independently flipped masks."""
    dist = np.zeros(1 << n)
    dist[0] = 1.0
    if eps == 0.0:
        return dist
    idx = np.arange(1 << n)
    for m in masks:
        if m:
            dist = (1 - eps) * dist + eps * dist[idx ^ m]
    return dist


def _readout_errors(g: Graph, neighbors_graph: Graph, jm: int, p_m: float, syndrome: bool, correct: bool) -> np.ndarray:
    """Effective error word caused by readout bit flips on the second copy.

    Bits inside ``jm`` of the error word are wrong parity readings; bits
    outside are wrongly applied Z corrections on the kept state.
    """
    eps = (1.0 - p_m) / 2.0
    n = g.n
    masks = []
    for v in range(n):
        m = 0
        if (jm >> v) & 1:
            if syndrome:
                m |= 1 << v
        else:
            if syndrome:
                m |= neighbors_graph.adj[v] & jm
            if correct:
                m |= g.adj[v] & ~jm & ((1 << n) - 1)
        masks.append(m)
    return _flip_distribution(n, masks, eps)


def _combine(joint: np.ndarray, mu_out: np.ndarray, syn: np.ndarray | None, errors: np.ndarray, jm: int, n: int):
    """Sum the joint table into the kept first-copy index, averaging over readout errors."""
    out = np.zeros(1 << n)
    bar = ((1 << n) - 1) ^ jm
    for e in np.nonzero(errors)[0]:
        w = errors[e]
        if syn is None:
            target = mu_out ^ (e & bar)
            out += w * np.bincount(target.ravel(), weights=joint.ravel(), minlength=1 << n)
        else:
            sel = syn == (e & jm)
            target = (mu_out ^ (e & bar))[sel]
            out += w * np.bincount(target, weights=joint[sel], minlength=1 << n)
    return out


def subprotocol_pj(
    rho: DiagState, aux: DiagState, c: Coloring, j: int, noise: NoiseParams = IDEAL, skip_idle: bool = False
) -> StepReport:
    """Purify the class-``j`` bits of ``rho`` using an auxiliary ``g_j`` state.

    Every acting party's two qubits are depolarized with ``noise.p_l``
    before its CNOT.  With ``skip_idle`` the parties listed by
    :func:`idle_vertices` do nothing (no gate, no noise); otherwise every
    qubit of both copies takes part.  The first copy is kept iff all
    class-``j`` parities read from the second copy are zero.
    """
    g = rho.graph
    gj = derive_gj(g, c, j)
    if aux.graph != gj:
        raise PurificationError(f"auxiliary graph {aux.graph} does not match g_{j} = {gj}")
    n = g.n
    jm = c.mask(j)
    idle = idle_vertices(gj, c, j) if skip_idle else []
    acting = [v for v in range(n) if v not in idle]
    active = sum(1 << v for v in acting)
    lam = depolarize_array(rho.lam, g, acting, noise.p_l)
    lt = depolarize_array(aux.lam, gj, acting, noise.p_l)
    joint = np.outer(lam, lt)
    mu_out, nu_out = multilateral_cnot_map(g, c, j, active)
    syn = nu_out & jm
    errors = _readout_errors(g, gj, jm, noise.p_m, syndrome=True, correct=False)
    out = _combine(joint, mu_out, syn, errors, jm, n)
    p = float(out.sum())
    if p <= 0.0:
        raise PurificationError("all weight rejected")
    return StepReport(DiagState(g, out / p), min(p, 1.0), f"P_{j}")


def prepare_auxiliary(
    rho1: DiagState,
    rho2: DiagState,
    c: Coloring,
    j: int,
    variant: str = "purifying",
    noise: NoiseParams = IDEAL,
) -> StepReport:
    """Turn two copies over ``G`` into one ``g_j`` state.

    ``variant="plain"`` reads every second-copy qubit in Z and always keeps
    the result; ``"purifying"`` reads class ``j`` in X instead and keeps
    only when the class-``j`` parities vanish.
    """
    if variant not in ("plain", "purifying"):
        raise ValueError(f"unknown variant {variant!r}")
    g = rho1.graph
    if rho2.graph != g:
        raise PurificationError("both copies must live on the same graph")
    n = g.n
    gj = derive_gj(g, c, j)
    jm = c.mask(j)
    lam1 = depolarize_array(rho1.lam, g, range(n), noise.p_l)
    lam2 = depolarize_array(rho2.lam, g, range(n), noise.p_l)
    joint = np.outer(lam1, lam2)
    mu_out, nu_out = multilateral_cnot_map(g, c, j)
    purifying = variant == "purifying"
    errors = _readout_errors(g, g, jm, noise.p_m, syndrome=purifying, correct=True)
    out = _combine(joint, mu_out, (nu_out & jm) if purifying else None, errors, jm, n)
    p = float(out.sum())
    if p <= 0.0:
        raise PurificationError("all weight rejected")
    return StepReport(DiagState(gj, out / p), min(p, 1.0), f"aux_{j}:{variant}")


def measure_out(s: DiagState, vertices: Sequence[int]) -> tuple[DiagState, list[int]]:
    """Z-measure and remove ``vertices`` (neighbors corrected by Z).

    Returns the state on the induced subgraph together with the original
    labels of its vertices.
    """
    g = s.graph
    drop = sorted(set(vertices))
    keep = [v for v in range(g.n) if v not in drop]
    if not keep:
        raise PurificationError("cannot measure out every vertex")
    index = {v: i for i, v in enumerate(keep)}
    sub = build_graph(len(keep), [(index[a], index[b]) for a, b in g.edges if a in index and b in index])
    return DiagState(sub, marginal_over(np.asarray(s.lam), g.n, drop)), keep


def merge_states(s1: DiagState, v1: int, s2: DiagState, v2: int, noise: NoiseParams = IDEAL) -> StepReport:
    """Fuse vertex ``v2`` of ``s2`` into vertex ``v1`` of ``s1``.

    Both outcomes of the fusion measurement are kept; either one leaves the
    merged vertex with sign bit ``mu[v1] ^ nu[v2]``.  Vertex labels follow
    :func:`~graphpurify.graphs.merged_graph`.
    """
    n1, n2 = s1.n, s2.n
    lam1 = depolarize_array(s1.lam, s1.graph, [v1], noise.p_l)
    lam2 = depolarize_array(s2.lam, s2.graph, [v2], noise.p_l)
    g = merged_graph(s1.graph, v1, s2.graph, v2)
    mu = np.arange(1 << n1)[:, None]
    nu = np.arange(1 << n2)[None, :]
    bit = (nu >> v2) & 1
    low = nu & ((1 << v2) - 1)
    high = nu >> (v2 + 1)
    rest = low | (high << v2)
    target = (mu ^ (bit << v1)) | (rest << n1)
    out = np.bincount(target.ravel(), weights=np.outer(lam1, lam2).ravel(), minlength=1 << g.n)
    return StepReport(DiagState(g, out), 1.0, f"merge({v1},{v2})")


def merge_within(s: DiagState, v1: int, v2: int, noise: NoiseParams = IDEAL) -> StepReport:
    """Fuse two non-adjacent vertices of the same state."""
    g = s.graph
    if g.has_edge(v1, v2) or v1 == v2:
        raise PurificationError(f"cannot fuse vertices {v1} and {v2}")
    lam = depolarize_array(s.lam, g, [v1, v2], noise.p_l)
    mu = np.arange(1 << g.n)
    bit = (mu >> v2) & 1
    flipped = mu ^ (bit << v1)
    target = (flipped & ((1 << v2) - 1)) | ((flipped >> (v2 + 1)) << v2)
    new_g = merged_within_graph(g, v1, v2)
    out = np.bincount(target, weights=lam, minlength=1 << new_g.n)
    return StepReport(DiagState(new_g, out), 1.0, f"fuse({v1},{v2})")


def relabel(s: DiagState, order: Sequence[int]) -> DiagState:
    """State whose new vertex ``i`` is old vertex ``order[i]``."""
    n = s.n
    inv = [0] * n
    for i, v in enumerate(order):
        inv[v] = i
    edges = [(inv[a], inv[b]) for a, b in s.graph.edges]
    mu = np.arange(1 << n)
    new = np.zeros(1 << n, dtype=int)
    for v in range(n):
        new |= ((mu >> v) & 1) << inv[v]
    lam = np.zeros(1 << n)
    lam[new] = s.lam
    return DiagState(build_graph(n, edges), lam)


# ---------------------------------------------------------------------------
# schedules


@dataclass(frozen=True)
class Step:
    color: int
    aux: str = "fixed"
    rounds: int | str = 1

    def __post_init__(self):
        if self.aux not in ("fresh", "recycle", "fixed"):
            raise ValueError(f"unknown aux source {self.aux!r}")
        if not (self.rounds == "converge" or (isinstance(self.rounds, int) and self.rounds >= 0)):
            raise ValueError(f"bad rounds {self.rounds!r}")


@dataclass(frozen=True)
class Schedule:
    steps: tuple[Step, ...]
    cycles: int | str = 1

    def validate(self, c: Coloring) -> None:
        if not self.steps:
            raise PurificationError("schedule is empty")
        for st in self.steps:
            if not 0 <= st.color < c.k:
                raise PurificationError(f"color {st.color} out of range for k={c.k}")


def schedule_from_json(obj) -> Schedule:
    """Accept a bare step list or ``{"steps": [...], "cycles": N | "converge"}``."""
    if isinstance(obj, dict):
        steps, cycles = obj["steps"], obj.get("cycles", 1)
    else:
        steps, cycles = obj, 1
    return Schedule(tuple(Step(int(s["color"]), s.get("aux", "fixed"), s.get("rounds", 1)) for s in steps), cycles)


def load_schedule(path) -> Schedule:
    with open(path) as fh:
        return schedule_from_json(json.load(fh))


def cycle_schedule(k: int, aux: str, cycles: int | str = "converge") -> Schedule:
    return Schedule(tuple(Step(j, aux, 1) for j in range(k)), cycles)


def channel_state(g: Graph, q: float, creator: int | None = 0) -> DiagState:
    """Perfect graph state created at ``creator`` and distributed through E_q.

    ``creator=None`` means the state is made by a party holding none of its
    qubits, so every qubit travels.  Qubits without edges are prepared
    locally by their owners and see no channel.
    """
    sent = [v for v in range(g.n) if v != creator and g.adj[v]]
    return depolarize_vertices(perfect_state(g), sent, q)


@dataclass
class ScheduleResult:
    reports: list[StepReport] = field(default_factory=list)
    initial: DiagState | None = None

    @property
    def final(self) -> DiagState:
        return self.reports[-1].out if self.reports else self.initial

    @property
    def fidelities(self) -> list[float]:
        return [self.initial.fidelity] + [r.fidelity for r in self.reports]

    @property
    def cumulative_success(self) -> float:
        return float(np.prod([r.p_success for r in self.reports])) if self.reports else 1.0

    @property
    def converged(self) -> bool:
        f = self.fidelities
        return len(f) > 1 and abs(f[-1] - f[-2]) < CONVERGE_TOL


def run_schedule(
    rho: DiagState,
    sched: Schedule,
    c: Coloring,
    noise: NoiseParams = IDEAL,
    fixed_aux: dict[int, DiagState] | None = None,
    creator: int = 0,
) -> ScheduleResult:
    """Run a schedule on an infinite ensemble of copies of ``rho``.

    Aux sources: ``fresh`` distributes a perfect ``g_j`` through channels of
    reliability ``noise.q``; ``recycle`` fuses two copies of the current
    ensemble with the purifying preparation; ``fixed`` takes
    ``fixed_aux[j]``.  ``rounds="converge"`` (per step or per cycle) repeats
    until the fidelity changes by less than 1e-9, at most 10^4 times.
    """
    sched.validate(c)
    fixed_aux = fixed_aux or {}
    res = ScheduleResult(initial=rho)
    state = rho

    def aux_for(step: Step, cur: DiagState) -> DiagState:
        gj = derive_gj(cur.graph, c, step.color)
        if step.aux == "fresh":
            return channel_state(gj, noise.q, creator)
        if step.aux == "recycle":
            return prepare_auxiliary(cur, cur, c, step.color, "purifying", noise).out
        if step.color not in fixed_aux:
            raise PurificationError(f"no fixed auxiliary state for color {step.color}")
        return fixed_aux[step.color]

    def one(step: Step, cur: DiagState) -> DiagState:
        rep = subprotocol_pj(cur, aux_for(step, cur), c, step.color, noise)
        res.reports.append(rep)
        return rep.out

    def run_step(step: Step, cur: DiagState) -> DiagState:
        if step.rounds == "converge":
            for _ in range(MAX_ROUNDS):
                nxt = one(step, cur)
                if abs(nxt.fidelity - cur.fidelity) < CONVERGE_TOL:
                    return nxt
                cur = nxt
            return cur
        for _ in range(step.rounds):
            cur = one(step, cur)
        return cur

    if sched.cycles == "converge":
        for _ in range(MAX_ROUNDS):
            before = state
            for st in sched.steps:
                state = run_step(st, state)
            if abs(state.fidelity - before.fidelity) < CONVERGE_TOL:
                break
    else:
        for _ in range(int(sched.cycles)):
            for st in sched.steps:
                state = run_step(st, state)
    return res

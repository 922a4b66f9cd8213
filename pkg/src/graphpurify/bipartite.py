"""Bipartite baseline: pairs cut out of rings, pair recurrence, teleportation.

A pair is a graph-diagonal state on the two-vertex graph.  Index bit 0
belongs to the vertex held by the sending party (party A in the ring
strategies), bit 1 to the receiver.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .diag import IDEAL, DiagState, NoiseParams, depolarize_array, pauli_channel, pauli_index_action
from .graphs import Coloring, edge_graph, ring
from .purification import PurificationError, measure_out, subprotocol_pj

EDGE = edge_graph()
PAIR_COLORING = Coloring(((0,), (1,)))


@dataclass(frozen=True, eq=False)
class BellDiagState:
    """Four graph-basis probabilities of a two-qubit pair, little-endian index."""

    lam: np.ndarray

    def __post_init__(self):
        d = DiagState(EDGE, self.lam)
        object.__setattr__(self, "lam", d.lam)

    @property
    def fidelity(self) -> float:
        return float(self.lam[0])

    def as_diag(self) -> DiagState:
        return DiagState(EDGE, self.lam)

    @classmethod
    def from_diag(cls, s: DiagState) -> "BellDiagState":
        if s.graph != EDGE:
            raise ValueError("not a two-vertex edge state")
        return cls(s.lam)

    @classmethod
    def werner(cls, F: float) -> "BellDiagState":
        e = (1.0 - F) / 3.0
        return cls(np.array([F, e, e, e]))

    @classmethod
    def from_x(cls, x: float) -> "BellDiagState":
        return cls.werner((3.0 * x + 1.0) / 4.0)

    def pauli_weights(self) -> tuple[float, float, float, float]:
        """Weights of (I, Z, X, Y) acting on a qubit teleported through this pair."""
        l = self.lam
        return float(l[0]), float(l[1]), float(l[2]), float(l[3])

    def __repr__(self) -> str:
        return f"BellDiagState(F={self.fidelity:.6f})"


def extract_pair_from_ring(s: DiagState, measured: Sequence[int] = (1, 2, 3)) -> BellDiagState:
    """Z-measure three consecutive ring qubits, keep the outer two as a pair."""
    n = s.n
    if s.graph != ring(n):
        raise ValueError("extract_pair_from_ring expects a ring state")
    measured = sorted(measured)
    keep = [v for v in range(n) if v not in measured]
    if len(keep) != 2:
        raise ValueError("exactly two vertices must remain")
    pair, _ = measure_out(s, measured)
    if pair.graph != EDGE:
        raise ValueError(f"remaining vertices {keep} are not adjacent")
    return BellDiagState(pair.lam)


def _dejmps_relabel(lam: np.ndarray) -> np.ndarray:
    # local rotation S^dag (x) Rx(pi/2): K1K2 -> K1, K2 -> K2
    return lam[[0, 1, 3, 2]]


def bell_recurrence_step(a: BellDiagState, b: BellDiagState, noise: NoiseParams = IDEAL) -> tuple[BellDiagState, float]:
    """One DEJMPS-style round: bilateral CNOT, parity check on vertex 0's bit, local rotation.

    Both qubits of both pairs are depolarized with ``noise.p_l`` first.
    """
    rep = subprotocol_pj(a.as_diag(), b.as_diag(), PAIR_COLORING, 0, noise)
    return BellDiagState(_dejmps_relabel(np.asarray(rep.out.lam))), rep.p_success


def bell_fixed_point(
    start: BellDiagState, noise: NoiseParams = IDEAL, tol: float = 1e-12, max_rounds: int = 10_000
) -> tuple[BellDiagState, int, bool]:
    """Iterate the recurrence on an ensemble of identical pairs.

    Returns ``(state, rounds, converged)``; convergence means the largest
    coefficient change dropped below ``tol``.
    """
    s = start
    for i in range(1, max_rounds + 1):
        try:
            nxt, _ = bell_recurrence_step(s, s, noise)
        except PurificationError:
            return s, i, False
        if np.abs(nxt.lam - s.lam).max() < tol:
            return nxt, i, True
        s = nxt
    return s, max_rounds, False


def teleport_ring_through_pairs(ring_state: DiagState, pairs: Sequence[BellDiagState], targets: Sequence[int] | None = None) -> DiagState:
    """Send ring qubits ``targets`` (default 1..n-1) through one pair each.

    Each pair acts on its qubit as the Pauli channel given by
    :meth:`BellDiagState.pauli_weights`; the teleportation itself is noiseless.
    """
    n = ring_state.n
    targets = list(range(1, n)) if targets is None else list(targets)
    if len(pairs) != len(targets):
        raise ValueError(f"need {len(targets)} pairs, got {len(pairs)}")
    g = ring_state.graph
    lam = np.asarray(ring_state.lam)
    for v, pr in zip(targets, pairs):
        masks = tuple(pauli_index_action(g, letter, v) for letter in "ZXY")
        lam = pauli_channel(lam, masks, pr.pauli_weights())
    return DiagState(g, lam)


def channel_pair(q: float) -> BellDiagState:
    """Perfect pair whose receiver qubit went through a reliability-``q`` channel."""
    lam = np.array([1.0, 0.0, 0.0, 0.0])
    return BellDiagState(depolarize_array(lam, EDGE, [1], q))

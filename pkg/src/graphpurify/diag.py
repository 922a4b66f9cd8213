"""Mixed states diagonal in a graph-state basis.

A :class:`DiagState` stores the probabilities ``lam[mu]`` of the basis
states ``|mu>_G``.  Bit ``a`` of the integer index ``mu`` is the sign bit of
the correlation operator of vertex ``a``.  Pauli noise acts on these states
by permuting indices, so every channel here is an XOR-convolution.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .graphs import Graph, graph_from_json

NORM_RENORMALIZE = 1e-9
NORM_FAIL = 1e-6
NEG_TOL = 1e-12


class StateError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseParams:
    """Reliabilities; 1 means noiseless.

    p_l: local gate reliability, q: channel reliability,
    p_m: measurement reliability (readout bit flip probability ``(1 - p_m) / 2``).
    """

    p_l: float = 1.0
    q: float = 1.0
    p_m: float = 1.0

    def __post_init__(self):
        for name in ("p_l", "q", "p_m"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")

    @property
    def ideal(self) -> bool:
        return self.p_l == 1.0 and self.p_m == 1.0


IDEAL = NoiseParams()


def _normalized(lam: np.ndarray) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if lam.min(initial=0.0) < -NEG_TOL:
        raise StateError(f"negative coefficient {lam.min():.3e}")
    lam = np.clip(lam, 0.0, None)
    total = lam.sum()
    if abs(total - 1.0) > NORM_FAIL:
        raise StateError(f"coefficients sum to {total!r}")
    if abs(total - 1.0) > NORM_RENORMALIZE:
        lam = lam / total
    return lam


@dataclass(frozen=True, eq=False)
class DiagState:
    graph: Graph
    lam: np.ndarray

    def __post_init__(self):
        lam = _normalized(self.lam)
        if lam.shape != (1 << self.graph.n,):
            raise StateError(f"expected {1 << self.graph.n} coefficients, got {lam.shape}")
        lam = lam.copy()
        lam.flags.writeable = False
        object.__setattr__(self, "lam", lam)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def fidelity(self) -> float:
        return float(self.lam[0])

    def allclose(self, other: "DiagState", atol: float = 1e-12) -> bool:
        return self.graph == other.graph and bool(np.allclose(self.lam, other.lam, rtol=0, atol=atol))

    def to_json(self) -> dict:
        return {"graph": self.graph.to_json(), "lam": [float(x) for x in self.lam]}

    def __repr__(self) -> str:
        return f"DiagState(n={self.n}, F={self.fidelity:.6f})"


def diag_from_json(obj: dict) -> DiagState:
    return DiagState(graph_from_json(obj["graph"]), np.asarray(obj["lam"], dtype=float))


def save_state(s: DiagState, path) -> None:
    with open(path, "w") as fh:
        json.dump(s.to_json(), fh)


def load_state(path) -> DiagState:
    with open(path) as fh:
        return diag_from_json(json.load(fh))


def perfect_state(g: Graph) -> DiagState:
    lam = np.zeros(1 << g.n)
    lam[0] = 1.0
    return DiagState(g, lam)


def uniform_state(g: Graph) -> DiagState:
    return DiagState(g, np.full(1 << g.n, 1.0 / (1 << g.n)))


def white_noise_state(g: Graph, f: float) -> DiagState:
    """Fidelity ``f`` on ``|0>_G``, remaining weight spread evenly."""
    if not 0.0 <= f <= 1.0:
        raise StateError(f"fidelity {f} outside [0, 1]")
    dim = 1 << g.n
    if dim == 1:
        return perfect_state(g)
    lam = np.full(dim, (1.0 - f) / (dim - 1))
    lam[0] = f
    return DiagState(g, lam)


def x_to_fidelity(x: float, n: int) -> float:
    """Fidelity of ``x |0><0| + (1 - x) 1 / 2^n``."""
    return x + (1.0 - x) / (1 << n)


def fidelity_to_x(f: float, n: int) -> float:
    return f - (1.0 - f) / ((1 << n) - 1)


def white_noise_from_x(g: Graph, x: float) -> DiagState:
    return white_noise_state(g, x_to_fidelity(x, g.n))


def fidelity(s: DiagState) -> float:
    return s.fidelity


def pauli_index_action(g: Graph, letter: str, a: int) -> int:
    """Index flip mask of conjugating by a single-qubit Pauli on vertex ``a``.

    Z anticommutes only with K_a; X anticommutes with K_b for each neighbor b.
    """
    if not 0 <= a < g.n:
        raise StateError(f"vertex {a} out of range")
    if letter == "Z":
        return 1 << a
    if letter == "X":
        return g.adj[a]
    if letter == "Y":
        return g.adj[a] ^ (1 << a)
    raise ValueError(f"unknown Pauli letter {letter!r}")


def pauli_channel(lam: np.ndarray, masks: tuple[int, int, int], weights) -> np.ndarray:
    """Apply I/Z/X/Y with the given weights to a coefficient array.

    ``masks`` are the flip masks of (Z, X, Y); ``weights`` are the
    probabilities of (I, Z, X, Y).
    """
    idx = np.arange(lam.shape[-1])
    w_i, w_z, w_x, w_y = weights
    out = w_i * lam
    for m, w in zip(masks, (w_z, w_x, w_y)):
        if w:
            out = out + w * lam[..., idx ^ m]
    return out


def depolarize_array(lam: np.ndarray, g: Graph, vertices, p: float) -> np.ndarray:
    if p == 1.0:
        return lam
    e = (1.0 - p) / 4.0
    for a in vertices:
        masks = (pauli_index_action(g, "Z", a), pauli_index_action(g, "X", a), pauli_index_action(g, "Y", a))
        lam = pauli_channel(lam, masks, (p + e, e, e, e))
    return lam


def apply_depolarizing(s: DiagState, a: int, p: float) -> DiagState:
    """Depolarizing channel with reliability ``p`` on vertex ``a``."""
    if not 0.0 <= p <= 1.0:
        raise StateError(f"reliability {p} outside [0, 1]")
    return DiagState(s.graph, depolarize_array(s.lam, s.graph, [a], p))


def depolarize_vertices(s: DiagState, vertices, p: float) -> DiagState:
    if not 0.0 <= p <= 1.0:
        raise StateError(f"reliability {p} outside [0, 1]")
    return DiagState(s.graph, depolarize_array(s.lam, s.graph, list(vertices), p))


def depolarize_all(s: DiagState, p: float) -> DiagState:
    return depolarize_vertices(s, range(s.n), p)


def marginal_over(lam: np.ndarray, n: int, drop: list[int]) -> np.ndarray:
    """Sum out the bits in ``drop``; remaining bits keep their relative order."""
    t = lam.reshape((2,) * n)
    # reshape puts bit n-1 on axis 0
    axes = tuple(n - 1 - b for b in drop)
    return t.sum(axis=axes).reshape(-1) if drop else lam.copy()

"""Asymptotic breeding yield for graph-diagonal ensembles."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .diag import DiagState, white_noise_state
from .graphs import Coloring, color_graph, ring


@dataclass(frozen=True)
class BitMarginal:
    a0: float
    a1: float


def bit_marginal(s: DiagState, i: int) -> BitMarginal:
    if not 0 <= i < s.n:
        raise ValueError(f"bit {i} out of range")
    mu = np.arange(1 << s.n)
    a0 = float(s.lam[((mu >> i) & 1) == 0].sum())
    return BitMarginal(a0, 1.0 - a0)


def binary_entropy(m: BitMarginal) -> float:
    return -sum(p * math.log2(p) for p in (m.a0, m.a1) if p > 0.0)


def color_entropies(s: DiagState, c: Coloring) -> list[float]:
    """Largest single-bit entropy within each color class."""
    return [max(binary_entropy(bit_marginal(s, i)) for i in cls) for cls in c.classes]


def breeding_yield(s: DiagState, c: Coloring) -> float:
    """Lower bound ``1 - 2 * sum_j max_{i in A_j} S(a_i)``; may be negative."""
    return 1.0 - 2.0 * sum(color_entropies(s, c))


def ring_yield_curve(f_grid, n: int = 5) -> list[dict]:
    """Yield of white-noise ring states for each fidelity in ``f_grid``."""
    g = ring(n)
    c = color_graph(g)
    rows = []
    for f in f_grid:
        s = white_noise_state(g, float(f))
        ent = color_entropies(s, c)
        row = {"f": float(f)}
        for j, e in enumerate(ent):
            row[f"S_max_{j}"] = e
        row["Y"] = 1.0 - 2.0 * sum(ent)
        rows.append(row)
    return rows


def yield_crossing(target: float = 2.0 / 3.0, n: int = 5, lo: float = 0.9, hi: float = 1.0, tol: float = 1e-10) -> float:
    """Fidelity at which the white-noise ring yield reaches ``target``."""
    g = ring(n)
    c = color_graph(g)

    def y(f):
        return breeding_yield(white_noise_state(g, f), c) - target

    if y(lo) > 0 or y(hi) < 0:
        raise ValueError("target yield is not bracketed")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if y(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return hi

"""Graphs, colorings and the two-colorable subgraphs used by the protocols.

Vertices are 0-based.  Adjacency is stored as one integer bitmask per
vertex, so bit ``b`` of ``adj[a]`` is set iff ``{a, b}`` is an edge.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence


class GraphError(ValueError):
    """Invalid graph or coloring input."""


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset[tuple[int, int]]
    adj: tuple[int, ...]

    def neighbors(self, a: int) -> list[int]:
        return [b for b in range(self.n) if self.adj[a] >> b & 1]

    def has_edge(self, a: int, b: int) -> bool:
        return bool(self.adj[a] >> b & 1)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def degree(self, a: int) -> int:
        return bin(self.adj[a]).count("1")

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.sorted_edges()], "one_based": False}

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.sorted_edges()})"


def build_graph(n: int, edges: Iterable[Sequence[int]]) -> Graph:
    """Build a simple undirected graph on vertices ``0..n-1``.

    Duplicate and reversed pairs are merged.  Raises :class:`GraphError` on
    out-of-range vertices or self-loops.
    """
    if n < 1:
        raise GraphError(f"vertex count must be positive, got {n}")
    es = set()
    adj = [0] * n
    for pair in edges:
        a, b = (int(v) for v in pair)
        if not (0 <= a < n and 0 <= b < n):
            raise GraphError(f"edge ({a},{b}) out of range for n={n}")
        if a == b:
            raise GraphError(f"self-loop at vertex {a}")
        a, b = min(a, b), max(a, b)
        es.add((a, b))
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    return Graph(n, frozenset(es), tuple(adj))


def graph_from_json(obj: dict) -> Graph:
    """Parse ``{"n": int, "edges": [[a, b], ...], "one_based": bool}``."""
    n = int(obj["n"])
    shift = 1 if obj.get("one_based", False) else 0
    return build_graph(n, [(a - shift, b - shift) for a, b in obj.get("edges", [])])


def load_graph(path) -> Graph:
    with open(path) as fh:
        return graph_from_json(json.load(fh))


def ring(n: int) -> Graph:
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)])


def path(n: int) -> Graph:
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def edge_graph() -> Graph:
    """The two-vertex graph with a single edge."""
    return path(2)


def wheel(n_rim: int) -> Graph:
    """Ring on ``0..n_rim-1`` plus a hub vertex ``n_rim`` joined to every rim vertex."""
    hub = n_rim
    return build_graph(n_rim + 1, [(i, (i + 1) % n_rim) for i in range(n_rim)] + [(i, hub) for i in range(n_rim)])


@dataclass(frozen=True)
class Coloring:
    """Ordered partition of the vertices into independent sets."""

    classes: tuple[tuple[int, ...], ...]

    @property
    def k(self) -> int:
        return len(self.classes)

    def mask(self, j: int) -> int:
        m = 0
        for v in self.classes[j]:
            m |= 1 << v
        return m

    def color_of(self, v: int) -> int:
        for j, cls in enumerate(self.classes):
            if v in cls:
                return j
        raise KeyError(v)

    def to_json(self) -> list[list[int]]:
        return [list(c) for c in self.classes]


def validate_coloring(g: Graph, classes: Iterable[Iterable[int]]) -> Coloring:
    """Check that ``classes`` is a disjoint, exhaustive, independent partition."""
    cls = tuple(tuple(sorted(int(v) for v in c)) for c in classes)
    cls = tuple(c for c in cls if c)
    seen: set[int] = set()
    for c in cls:
        for v in c:
            if not 0 <= v < g.n:
                raise GraphError(f"vertex {v} out of range for n={g.n}")
            if v in seen:
                raise GraphError(f"vertex {v} appears in more than one class")
            seen.add(v)
        for a, b in combinations(c, 2):
            if g.has_edge(a, b):
                raise GraphError(f"class {list(c)} is not independent: edge ({a},{b})")
    missing = set(range(g.n)) - seen
    if missing:
        raise GraphError(f"vertices {sorted(missing)} are not colored")
    return Coloring(cls)


def color_graph(g: Graph, hint: Iterable[Iterable[int]] | Coloring | None = None) -> Coloring:
    """Return ``hint`` if it is a valid coloring, else a greedy coloring.

    The greedy pass visits vertices in ascending order and assigns the
    smallest color unused by already colored neighbors.  The result is not
    guaranteed to use the minimal number of colors.
    """
    if hint is not None:
        classes = hint.classes if isinstance(hint, Coloring) else hint
        return validate_coloring(g, classes)
    color = [-1] * g.n
    for v in range(g.n):
        used = {color[b] for b in g.neighbors(v) if color[b] >= 0}
        c = 0
        while c in used:
            c += 1
        color[v] = c
    k = max(color) + 1
    return Coloring(tuple(tuple(v for v in range(g.n) if color[v] == c) for c in range(k)))


def two_coloring(g: Graph) -> Coloring | None:
    """BFS bipartition of ``g``, or ``None`` if it has an odd cycle.

    Each connected component puts its smallest vertex in the first class.
    """
    side = [-1] * g.n
    for s in range(g.n):
        if side[s] >= 0:
            continue
        side[s] = 0
        queue = [s]
        while queue:
            a = queue.pop()
            for b in g.neighbors(a):
                if side[b] < 0:
                    side[b] = 1 - side[a]
                    queue.append(b)
                elif side[b] == side[a]:
                    return None
    first = tuple(v for v in range(g.n) if side[v] == 0)
    second = tuple(v for v in range(g.n) if side[v] == 1)
    return Coloring(tuple(c for c in (first, second) if c))


def is_two_colorable(g: Graph) -> bool:
    return two_coloring(g) is not None


def derive_gj(g: Graph, c: Coloring, j: int) -> Graph:
    """Subgraph on the same vertices keeping only edges with one end in class ``j``."""
    if not 0 <= j < c.k:
        raise GraphError(f"color index {j} out of range for k={c.k}")
    m = c.mask(j)
    return build_graph(g.n, [(a, b) for a, b in g.edges if ((m >> a) & 1) ^ ((m >> b) & 1)])


def subgraph_coloring(c: Coloring, j: int) -> Coloring:
    """The bipartition ``(A_j, V \\ A_j)`` that makes ``derive_gj`` two-colorable."""
    rest = tuple(sorted(v for i, cls in enumerate(c.classes) if i != j for v in cls))
    return Coloring(tuple(x for x in (c.classes[j], rest) if x))


@dataclass(frozen=True)
class Piece:
    """A subgraph relabeled onto its own vertices.

    ``vertices[i]`` is the original label of local vertex ``i``.
    """

    vertices: tuple[int, ...]
    graph: Graph

    def local(self, v: int) -> int:
        return self.vertices.index(v)


def induced_piece(g: Graph, edges: Iterable[tuple[int, int]], vertices: Iterable[int] | None = None) -> Piece:
    edges = sorted(edges)
    vs = set(vertices) if vertices is not None else set()
    for a, b in edges:
        vs.update((a, b))
    order = tuple(sorted(vs))
    index = {v: i for i, v in enumerate(order)}
    return Piece(order, build_graph(len(order), [(index[a], index[b]) for a, b in edges]))


def derive_split_subgraphs(g: Graph, c: Coloring, order: Sequence[int]) -> tuple[list[Piece], Piece]:
    """Cut ``g`` into edge-disjoint two-colorable pieces.

    Classes are taken in ``order``.  At each step the piece keeps the edges
    between the chosen class and the remaining, not yet chosen classes; the
    loop stops as soon as the leftover edges form a two-colorable graph,
    which is returned as the residual.  Pieces carry only the vertices
    touched by their edges; the residual also keeps vertices no piece covers.
    """
    if sorted(order) != list(range(c.k)):
        raise GraphError(f"order {list(order)} is not a permutation of 0..{c.k - 1}")
    remaining = set(g.edges)
    removed_mask = 0
    pieces: list[Piece] = []
    for j in order:
        if is_two_colorable(build_graph(g.n, remaining)):
            break
        m = c.mask(j)
        chosen = {
            (a, b)
            for a, b in remaining
            if (((m >> a) & 1) ^ ((m >> b) & 1)) and not ((removed_mask >> a) & 1 or (removed_mask >> b) & 1)
        }
        pieces.append(induced_piece(g, chosen))
        remaining -= chosen
        removed_mask |= m
    covered = set()
    for p in pieces:
        covered.update(p.vertices)
    uncovered = set(range(g.n)) - covered
    return pieces, induced_piece(g, remaining, uncovered)


def merged_graph(g1: Graph, v1: int, g2: Graph, v2: int) -> Graph:
    """Disjoint union with ``v2`` removed and its neighbors attached to ``v1``.

    Labels: ``g1`` keeps ``0..n1-1``; ``g2`` vertices other than ``v2``
    follow in ascending order.
    """
    n1 = g1.n
    new = {}
    nxt = n1
    for v in range(g2.n):
        if v == v2:
            new[v] = v1
        else:
            new[v] = nxt
            nxt += 1
    edges = list(g1.edges) + [(new[a], new[b]) for a, b in g2.edges]
    return build_graph(n1 + g2.n - 1, edges)


def merged_within_graph(g: Graph, v1: int, v2: int) -> Graph:
    """Fuse ``v2`` into ``v1`` (neighborhood becomes the symmetric difference)."""
    adj1 = g.adj[v1] ^ g.adj[v2]
    keep = [v for v in range(g.n) if v != v2]
    index = {v: i for i, v in enumerate(keep)}
    edges = [(index[a], index[b]) for a, b in g.edges if v1 not in (a, b) and v2 not in (a, b)]
    edges += [(index[v1], index[b]) for b in keep if (adj1 >> b) & 1]
    return build_graph(len(keep), edges)


class PauliString:
    """Pauli operator on ``n`` qubits with a phase in ``{1, -1, 1j, -1j}``."""

    __slots__ = ("letters", "sign")

    def __init__(self, letters: str, sign: complex = 1):
        if any(ch not in "IXYZ" for ch in letters):
            raise ValueError(f"bad Pauli letters {letters!r}")
        if sign not in (1, -1, 1j, -1j):
            raise ValueError(f"bad sign {sign}")
        self.letters = letters
        self.sign = sign

    @property
    def n(self) -> int:
        return len(self.letters)

    def symplectic(self) -> tuple[int, int]:
        """(x-mask, z-mask) with bit ``a`` for qubit ``a``."""
        x = z = 0
        for a, ch in enumerate(self.letters):
            if ch in "XY":
                x |= 1 << a
            if ch in "ZY":
                z |= 1 << a
        return x, z

    def commutes_with(self, other: "PauliString") -> bool:
        x1, z1 = self.symplectic()
        x2, z2 = other.symplectic()
        return bin((x1 & z2) ^ (z1 & x2)).count("1") % 2 == 0

    def __eq__(self, other) -> bool:
        return isinstance(other, PauliString) and self.letters == other.letters and self.sign == other.sign

    def __hash__(self) -> int:
        return hash((self.letters, self.sign))

    def __repr__(self) -> str:
        s = {1: "+", -1: "-", 1j: "+i", -1j: "-i"}[self.sign]
        return f"{s}{self.letters}"


def correlation_operator(g: Graph, a: int) -> PauliString:
    """X on ``a`` and Z on each neighbor of ``a``."""
    if not 0 <= a < g.n:
        raise GraphError(f"vertex {a} out of range")
    letters = ["I"] * g.n
    letters[a] = "X"
    for b in g.neighbors(a):
        letters[b] = "Z"
    return PauliString("".join(letters))

"""Dense complex-matrix simulator used to cross-check every diagonal map.

Qubit ``q`` is bit ``q`` of a computational basis index (little-endian),
matching the bit convention of :class:`~graphpurify.diag.DiagState`.
Tensor products put the first factor on the lowest qubits.  Density
matrices are plain ``numpy`` arrays; nothing here is fast, everything here
is written from gates, projectors and partial traces only.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .diag import DiagState
from .graphs import Coloring, Graph, build_graph, merged_graph, merged_within_graph

MAX_QUBITS = 12

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
HAD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


class OracleError(ValueError):
    pass


def _nqubits(rho: np.ndarray) -> int:
    m = rho.shape[0].bit_length() - 1
    if rho.shape != (1 << m, 1 << m):
        raise OracleError(f"not a qubit density matrix: shape {rho.shape}")
    return m


def _check_size(m: int) -> None:
    if m > MAX_QUBITS:
        raise OracleError(f"{m} qubits exceeds oracle limit {MAX_QUBITS}")


@lru_cache(maxsize=64)
def _basis_cached(n: int, edges: frozenset) -> np.ndarray:
    x = np.arange(1 << n)
    bits = (x[:, None] >> np.arange(n)) & 1
    phase = np.zeros(1 << n, dtype=int)
    for a, b in edges:
        phase ^= bits[:, a] & bits[:, b]
    base = (-1.0) ** phase / np.sqrt(1 << n)
    mu = np.arange(1 << n)
    overlap = np.array([bin(v).count("1") & 1 for v in range(1 << n)])
    # column mu: Z^mu applied to the graph state
    signs = (-1.0) ** overlap[x[:, None] & mu[None, :]]
    out = base[:, None] * signs
    out.flags.writeable = False
    return out


def basis_matrix(g: Graph) -> np.ndarray:
    """Unitary whose column ``mu`` is the graph basis state ``|mu>_G``."""
    _check_size(g.n)
    return _basis_cached(g.n, g.edges)


def graph_basis_state(g: Graph, mu: int) -> np.ndarray:
    """Amplitude vector of ``prod Z^mu prod CZ |+>^n``."""
    _check_size(g.n)
    x = np.arange(1 << g.n)
    amp = np.ones(1 << g.n, dtype=complex)
    for a, b in g.edges:
        amp *= np.where((x >> a) & (x >> b) & 1, -1.0, 1.0)
    amp *= np.where(np.array([bin(v & mu).count("1") & 1 for v in x]), -1.0, 1.0)
    return amp / np.sqrt(1 << g.n)


def operator_on(op: np.ndarray, qubit: int, m: int) -> np.ndarray:
    """Embed a one-qubit operator acting on ``qubit`` of ``m`` qubits."""
    out = np.array([[1.0 + 0j]])
    for q in reversed(range(m)):
        out = np.kron(out, op if q == qubit else I2)
    return out


def pauli_matrix(letters: str) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for ch in reversed(letters):
        out = np.kron(out, PAULI[ch])
    return out


def to_density(psi: np.ndarray) -> np.ndarray:
    return np.outer(psi, psi.conj())


def density_from_diag(s: DiagState) -> np.ndarray:
    u = basis_matrix(s.graph)
    return (u * s.lam) @ u.conj().T


def tensor(*rhos: np.ndarray) -> np.ndarray:
    """Tensor product with the first factor on the lowest qubits."""
    out = np.array([[1.0 + 0j]])
    for r in rhos:
        out = np.kron(r, out)
    _check_size(_nqubits(out))
    return out


def apply_1q(rho: np.ndarray, u: np.ndarray, q: int) -> np.ndarray:
    m = _nqubits(rho)
    t = rho.reshape((2,) * (2 * m))
    ax = m - 1 - q
    t = np.moveaxis(np.tensordot(u, t, axes=([1], [ax])), 0, ax)
    t = np.moveaxis(np.tensordot(t, u.conj().T, axes=([m + ax], [0])), -1, m + ax)
    return t.reshape(rho.shape)


def _permute(rho: np.ndarray, perm: np.ndarray) -> np.ndarray:
    return rho[np.ix_(perm, perm)]


def cnot(rho: np.ndarray, control: int, target: int) -> np.ndarray:
    idx = np.arange(rho.shape[0])
    perm = idx ^ (((idx >> control) & 1) << target)
    return _permute(rho, perm)


def cz(rho: np.ndarray, a: int, b: int) -> np.ndarray:
    idx = np.arange(rho.shape[0])
    d = np.where((idx >> a) & (idx >> b) & 1, -1.0, 1.0)
    return d[:, None] * rho * d[None, :]


def _conj_pauli(rho: np.ndarray, letter: str, q: int) -> np.ndarray:
    # P rho P^dag for a Pauli on qubit q, written as a signed index permutation
    dim = rho.shape[0]
    idx = np.arange(dim)
    bit = (idx >> q) & 1
    if letter == "Z":
        d = 1.0 - 2.0 * bit
        return d[:, None] * rho * d[None, :]
    hi, lo = dim >> (q + 1), 1 << q
    flipped = rho.reshape(hi, 2, lo, hi, 2, lo)[:, ::-1, :, :, ::-1, :].reshape(dim, dim)
    if letter == "X":
        return flipped
    # Y = i X Z, the phases i and -i cancel between both sides
    d = 1.0 - 2.0 * (1 - bit)
    return d[:, None] * flipped * d[None, :]


def pauli_channel(rho: np.ndarray, q: int, weights) -> np.ndarray:
    """Weights of (I, Z, X, Y) on qubit ``q``."""
    out = weights[0] * rho
    for w, letter in zip(weights[1:], "ZXY"):
        if w:
            out = out + w * _conj_pauli(rho, letter, q)
    return out


def depolarize(rho: np.ndarray, q: int, p: float) -> np.ndarray:
    """Reliability-``p`` depolarizing channel written out as four Kraus terms."""
    if p == 1.0:
        return rho
    e = (1.0 - p) / 4.0
    return pauli_channel(rho, q, (p + e, e, e, e))


def apply_channel_or_gate(rho: np.ndarray, op) -> np.ndarray:
    """Apply ``op`` given as a full unitary matrix or a ``(name, *args)`` tuple.

    Names: ``cnot``, ``cz``, ``h``, ``x``, ``y``, ``z``, ``depolarize``.
    """
    if isinstance(op, np.ndarray):
        if op.shape != rho.shape:
            raise OracleError(f"operator shape {op.shape} does not match state {rho.shape}")
        return op @ rho @ op.conj().T
    name, *args = op
    m = _nqubits(rho)
    for q in args[:2] if name in ("cnot", "cz") else args[:1]:
        if not 0 <= q < m:
            raise OracleError(f"qubit {q} out of range for {m} qubits")
    if name == "cnot":
        return cnot(rho, *args)
    if name == "cz":
        return cz(rho, *args)
    if name == "depolarize":
        return depolarize(rho, *args)
    gate = {"h": HAD, "x": X, "y": Y, "z": Z}.get(name)
    if gate is None:
        raise OracleError(f"unknown operation {name!r}")
    return apply_1q(rho, gate, args[0])


def measurement_blocks(rho: np.ndarray, qubits) -> tuple[np.ndarray, list[int]]:
    """Computational-basis measurement of ``qubits``.

    Returns ``(blocks, keep)`` where ``blocks[s]`` is the unnormalized state
    of the unmeasured qubits ``keep`` (ascending) for outcome ``s``; bit ``i``
    of ``s`` is the result on ``qubits[i]``.
    """
    m = _nqubits(rho)
    qubits = list(qubits)
    keep = [q for q in range(m) if q not in qubits]
    k, r = len(qubits), len(keep)
    rows = [m - 1 - q for q in reversed(qubits)] + [m - 1 - q for q in reversed(keep)]
    t = rho.reshape((2,) * (2 * m)).transpose(rows + [m + a for a in rows])
    t = t.reshape(1 << k, 1 << r, 1 << k, 1 << r)
    s = np.arange(1 << k)
    return t[s, :, s, :], keep


def partial_trace(rho: np.ndarray, keep) -> np.ndarray:
    """Reduced state on ``keep``, ordered by ascending qubit index."""
    m = _nqubits(rho)
    keep = sorted(keep)
    blocks, _ = measurement_blocks(rho, [q for q in range(m) if q not in keep])
    return blocks.sum(axis=0)


def permute_qubits(rho: np.ndarray, order) -> np.ndarray:
    """Relabel so that new qubit ``i`` is old qubit ``order[i]``."""
    m = _nqubits(rho)
    rows = [m - 1 - order[i] for i in reversed(range(m))]
    t = rho.reshape((2,) * (2 * m)).transpose(rows + [m + a for a in rows])
    return t.reshape(rho.shape)


def partial_transpose(rho: np.ndarray, q: int) -> np.ndarray:
    m = _nqubits(rho)
    ax = m - 1 - q
    t = rho.reshape((2,) * (2 * m))
    t = np.swapaxes(t, ax, m + ax)
    return t.reshape(rho.shape)


def ppt_min_eigenvalue(rho: np.ndarray) -> float:
    """Smallest eigenvalue of the partial transpose of a two-qubit state."""
    if _nqubits(rho) != 2:
        raise OracleError("ppt_min_eigenvalue expects a two-qubit state")
    return float(np.linalg.eigvalsh(partial_transpose(rho, 1)).min())


def von_neumann_entropy(rho: np.ndarray) -> float:
    ev = np.linalg.eigvalsh(rho)
    ev = ev[ev > 1e-14]
    return float(-(ev * np.log2(ev)).sum())


def graph_diagonal_extract(rho: np.ndarray, g: Graph) -> tuple[DiagState, float]:
    """Graph-basis diagonal of ``rho`` and its largest off-diagonal magnitude."""
    if _nqubits(rho) != g.n:
        raise OracleError(f"state has {_nqubits(rho)} qubits, graph has {g.n}")
    u = basis_matrix(g)
    r = u.conj().T @ rho @ u
    d = np.real(np.diag(r)).copy()
    if abs(d.sum() - 1.0) > 1e-9:
        raise OracleError(f"diagonal sums to {d.sum()}")
    off = r - np.diag(np.diag(r))
    worst = float(np.abs(off).max()) if off.size > 1 else 0.0
    d[np.abs(d) < 1e-15] = 0.0
    return DiagState(g, np.clip(d, 0.0, None) / d.sum()), worst


# ---------------------------------------------------------------------------
# circuits for the protocol maps


def _readout_flip_patterns(nbits: int, p_m: float):
    if p_m == 1.0:
        yield 0, 1.0
        return
    eps = (1.0 - p_m) / 2.0
    for pattern in range(1 << nbits):
        w = bin(pattern).count("1")
        yield pattern, eps**w * (1 - eps) ** (nbits - w)


def _noisy(rho: np.ndarray, qubits, p_l: float) -> np.ndarray:
    for q in qubits:
        rho = depolarize(rho, q, p_l)
    return rho


def subprotocol_circuit(
    rho: DiagState, aux: DiagState, c: Coloring, j: int, p_l: float = 1.0, p_m: float = 1.0, skip_idle: bool = False
):
    """Multilateral CNOT, X/Z readout of the auxiliary copy, post-selection.

    With ``skip_idle``, parties whose auxiliary qubit is isolated and outside
    class ``j`` apply no gate and see no gate noise.
    Returns ``(output DiagState over G, success probability, max off-diagonal)``.
    """
    g, n = rho.graph, rho.n
    aj = set(c.classes[j])
    idle = {v for v in range(n) if v not in aj and aux.graph.adj[v] == 0} if skip_idle else set()
    acting = [v for v in range(n) if v not in idle]
    # gate noise precedes every gate, so it can act on each copy before the tensor product
    state = tensor(_noisy(density_from_diag(rho), acting, p_l), _noisy(density_from_diag(aux), acting, p_l))
    for v in acting:
        state = cnot(state, n + v, v) if v in aj else cnot(state, v, n + v)
    for a in aj:
        state = apply_1q(state, HAD, n + a)
    blocks, _ = measurement_blocks(state, [n + v for v in range(n)])
    kept = np.zeros((1 << n, 1 << n), dtype=complex)
    for s in range(1 << n):
        for flip, w in _readout_flip_patterns(n, p_m):
            r = s ^ flip
            if all(((r >> a) & 1) ^ (bin(r & aux.graph.adj[a]).count("1") & 1) == 0 for a in aj):
                kept += w * blocks[s]
    p = float(np.real(np.trace(kept)))
    out, off = graph_diagonal_extract(kept / p, g)
    return out, p, off


def prepare_auxiliary_circuit(
    rho1: DiagState, rho2: DiagState, c: Coloring, j: int, gj: Graph, purifying: bool, p_l: float = 1.0, p_m: float = 1.0
):
    """Fuse two copies into one ``g_j`` state by CNOTs and readout of copy two.

    Copy-two qubits of the other classes are read in Z, class ``j`` in Z
    (plain) or X (purifying, with post-selection on the stabilizer parity).
    The class-complement qubits of copy one receive Z corrections from the
    Z results of their class-complement neighbors.
    """
    g, n = rho1.graph, rho1.n
    aj = set(c.classes[j])
    bar = [v for v in range(n) if v not in aj]
    state = tensor(_noisy(density_from_diag(rho1), range(n), p_l), _noisy(density_from_diag(rho2), range(n), p_l))
    for v in range(n):
        state = cnot(state, n + v, v) if v in aj else cnot(state, v, n + v)
    if purifying:
        for a in aj:
            state = apply_1q(state, HAD, n + a)
    blocks, _ = measurement_blocks(state, [n + v for v in range(n)])
    corrections = {}
    for b in bar:
        corrections[b] = [bp for bp in bar if g.has_edge(b, bp)]
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for s in range(1 << n):
        block = blocks[s]
        if not np.any(block):
            continue
        for flip, w in _readout_flip_patterns(n, p_m):
            r = s ^ flip
            if purifying and any(((r >> a) & 1) ^ (bin(r & g.adj[a]).count("1") & 1) for a in aj):
                continue
            fixed = block
            for b in bar:
                if sum((r >> bp) & 1 for bp in corrections[b]) & 1:
                    fixed = apply_1q(fixed, Z, b)
            out += w * fixed
    p = float(np.real(np.trace(out)))
    res, off = graph_diagonal_extract(out / p, gj)
    return res, p, off


def _merge_dense(state: np.ndarray, a1: int, a2: int, corr: list[int], p_l: float) -> np.ndarray:
    state = depolarize(depolarize(state, a1, p_l), a2, p_l)
    # CNOT a1 -> a2 followed by a Z readout of a2 realizes P_0 / P_1
    state = cnot(state, a1, a2)
    blocks, _ = measurement_blocks(state, [a2])
    b0, b1 = blocks[0], blocks[1]
    # after dropping a2 the labels above it shift down by one
    for b in corr:
        b1 = apply_1q(b1, Z, b if b < a2 else b - 1)
    return b0 + b1


def merge_circuit(s1: DiagState, v1: int, s2: DiagState, v2: int, p_l: float = 1.0):
    n1 = s1.n
    state = tensor(density_from_diag(s1), density_from_diag(s2))
    corr = [n1 + b for b in s2.graph.neighbors(v2)]
    out = _merge_dense(state, v1, n1 + v2, corr, p_l)
    return graph_diagonal_extract(out, merged_graph(s1.graph, v1, s2.graph, v2))


def merge_within_circuit(s: DiagState, v1: int, v2: int, p_l: float = 1.0):
    state = density_from_diag(s)
    out = _merge_dense(state, v1, v2, s.graph.neighbors(v2), p_l)
    return graph_diagonal_extract(out, merged_within_graph(s.graph, v1, v2))


def z_measure_circuit(s: DiagState, vertices) -> tuple[DiagState, float, Graph]:
    """Z-measure ``vertices`` and apply Z to each surviving neighbor of a 1 outcome."""
    g = s.graph
    vertices = list(vertices)
    rho = density_from_diag(s)
    blocks, keep = measurement_blocks(rho, vertices)
    index = {v: i for i, v in enumerate(keep)}
    out = np.zeros_like(blocks[0])
    for r in range(1 << len(vertices)):
        fixed = blocks[r]
        for i, v in enumerate(vertices):
            if (r >> i) & 1:
                for b in g.neighbors(v):
                    if b in index:
                        fixed = apply_1q(fixed, Z, index[b])
        out = out + fixed
    sub = build_graph(len(keep), [(index[a], index[b]) for a, b in g.edges if a in index and b in index])
    res, off = graph_diagonal_extract(out, sub)
    return res, off, sub


def teleport_circuit(ring: DiagState, r: int, pair: DiagState) -> tuple[DiagState, float]:
    """Teleport qubit ``r`` of ``ring`` using a two-vertex graph-state pair.

    Pair vertex 0 sits with the sender, vertex 1 with the receiver.  The
    receiver first rotates the pair to a Bell pair with a Hadamard.
    """
    n = ring.n
    s, t = n, n + 1
    state = tensor(density_from_diag(ring), density_from_diag(pair))
    state = apply_1q(state, HAD, t)
    state = cnot(state, r, s)
    state = apply_1q(state, HAD, r)
    blocks, keep = measurement_blocks(state, [r, s])
    t_local = keep.index(t)
    out = np.zeros_like(blocks[0])
    for outcome in range(4):
        m_r, m_s = outcome & 1, outcome >> 1
        fixed = blocks[outcome]
        if m_s:
            fixed = apply_1q(fixed, X, t_local)
        if m_r:
            fixed = apply_1q(fixed, Z, t_local)
        out = out + fixed
    # put the receiver qubit back at position r
    order = [keep.index(v) for v in range(n) if v != r]
    order.insert(r, t_local)
    out = permute_qubits(out, order)
    return graph_diagonal_extract(out, ring.graph)


def bell_step_circuit(a: DiagState, b: DiagState, p_l: float = 1.0):
    """Bilateral recurrence step on two edge pairs, then S^dag on qubit 0 and Rx(pi/2) on qubit 1."""
    c = Coloring(((0,), (1,)))
    out, p, off = subprotocol_circuit(a, b, c, 0, p_l)
    rho = density_from_diag(out)
    sdag = np.diag([1.0, -1j])
    rx = (I2 - 1j * X) / np.sqrt(2)
    rho = apply_1q(apply_1q(rho, sdag, 0), rx, 1)
    rotated, off2 = graph_diagonal_extract(rho, a.graph)
    return rotated, p, max(off, off2)

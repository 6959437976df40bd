"""Hardware-shaped QAOA circuits for heavy-hex Ising instances.

Every quadratic term becomes ``CNOT, RZ, CNOT`` with the control on the V3
endpoint and the target on the V2 endpoint. Edges are split into three colour
classes, and each round opens all classes in colour order, then closes them
in the same order, giving six CNOT layers. While two CNOTs are open on a
degree-2 node ``l`` its qubit carries ``z_l z_n1 z_n2``, so the cubic term
costs a single extra RZ on ``l``.

RZ(theta) = diag(exp(-i theta/2), exp(+i theta/2)); a term with coefficient
``d`` gets ``theta = 2 gamma d``. The mixer is RX(2 beta) on every qubit.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .angles import QaoaAngles
from .model import HeavyHexGraph, IsingInstance


class ColoringError(RuntimeError):
    pass


@dataclass(frozen=True)
class EdgeColoring:
    color: dict[tuple[int, int], int]

    def classes(self) -> list[list[tuple[int, int]]]:
        out: list[list[tuple[int, int]]] = [[] for _ in range(max(self.color.values(), default=-1) + 1)]
        for e in sorted(self.color):
            out[self.color[e]].append(e)
        return out

    def is_proper(self) -> bool:
        seen: dict[tuple[int, int], tuple[int, int]] = {}
        for (i, j), c in self.color.items():
            if not 0 <= c <= 2:
                return False
            for v in (i, j):
                if (v, c) in seen:
                    return False
                seen[(v, c)] = (i, j)
        return True


def _kempe_recolor(color, incident, u, v) -> int:
    """Free a common colour at u and v by flipping an alternating path (bipartite graphs)."""
    used_u = {color[e] for e in incident[u] if e in color}
    used_v = {color[e] for e in incident[v] if e in color}
    a = min(c for c in range(3) if c not in used_u)
    b = min(c for c in range(3) if c not in used_v)
    if a not in used_v:
        return a
    # walk the a/b path starting at v; in a bipartite graph it never reaches u
    path = []
    node, want = v, a
    while True:
        nxt = [e for e in incident[node] if color.get(e) == want]
        if not nxt:
            break
        e = nxt[0]
        path.append(e)
        node = e[0] if e[1] == node else e[1]
        want = b if want == a else a
    for e in path:
        color[e] = b if color[e] == a else a
    return a


def three_edge_coloring(graph: HeavyHexGraph) -> EdgeColoring:
    """Greedy BFS edge colouring from the lowest node id, smallest free colour first.

    If the greedy choice gets stuck, an alternating-path swap frees a colour;
    König's theorem guarantees three colours suffice for bipartite graphs of
    maximum degree 3.
    """
    adj = graph.neighbors()
    incident: list[list[tuple[int, int]]] = [[] for _ in range(graph.n)]
    for i, j in graph.edges:
        incident[i].append((i, j))
        incident[j].append((i, j))
    color: dict[tuple[int, int], int] = {}
    visited = [False] * graph.n
    for root in range(graph.n):
        if visited[root]:
            continue
        visited[root] = True
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                e = (min(u, w), max(u, w))
                if e not in color:
                    used = {color[f] for f in incident[u] + incident[w] if f in color}
                    free = [c for c in range(3) if c not in used]
                    color[e] = free[0] if free else _kempe_recolor(color, incident, u, w)
                if not visited[w]:
                    visited[w] = True
                    queue.append(w)
    coloring = EdgeColoring(color)
    if not coloring.is_proper():
        raise ColoringError("could not find a proper 3-edge-colouring")
    return coloring


class Gate(NamedTuple):
    name: str  # "h", "cx", "rz", "rx", "measure"
    qubits: tuple[int, ...]
    angle: float | None = None


@dataclass(frozen=True)
class QaoaCircuit:
    n: int
    gates: tuple[Gate, ...]
    round_boundaries: tuple[int, ...]  # index of the first gate of each round


class DepthStats(NamedTuple):
    cnot_count: int
    cnot_depth: int
    total_gates: int


def build_qaoa_circuit(
    instance: IsingInstance, angles: QaoaAngles, coloring: EdgeColoring | None = None
) -> QaoaCircuit:
    if angles.p < 1:
        raise ValueError("circuits need p >= 1; use the statevector |+> state for p = 0")
    g = instance.graph
    if coloring is None:
        coloring = three_edge_coloring(g)
    classes = coloring.classes()
    cubic = {w.l: instance.cubic[w] for w in g.w_set}

    def orient(e):
        i, j = e
        return (i, j) if i in g.v3 else (j, i)  # (control, target)

    # edges on each V2 target, ordered by colour
    at_target: dict[int, list[tuple[int, int]]] = {}
    for e in sorted(g.edges, key=lambda e: (coloring.color[e], e)):
        at_target.setdefault(orient(e)[1], []).append(e)

    gates: list[Gate] = [Gate("h", (q,)) for q in range(g.n)]
    bounds = []
    for beta, gamma in zip(angles.beta, angles.gamma):
        bounds.append(len(gates))
        open_edges: dict[int, list[tuple[int, int]]] = {}
        for cls in classes:  # opening layers
            rz = []
            for e in cls:
                c, t = orient(e)
                gates.append(Gate("cx", (c, t)))
                open_edges.setdefault(t, []).append(e)
                if len(open_edges[t]) == 1:
                    rz.append(Gate("rz", (t,), 2 * gamma * instance.quadratic[e]))
                else:
                    rz.append(Gate("rz", (t,), 2 * gamma * cubic[t]))
            gates.extend(rz)
        for cls in classes:  # closing layers
            rz = []
            for e in cls:
                c, t = orient(e)
                gates.append(Gate("cx", (c, t)))
                open_edges[t].remove(e)
                for other in open_edges[t]:
                    rz.append(Gate("rz", (t,), 2 * gamma * instance.quadratic[other]))
            gates.extend(rz)
        for v in g.nodes:
            gates.append(Gate("rz", (v,), 2 * gamma * instance.linear[v]))
        for q in range(g.n):
            gates.append(Gate("rx", (q,), 2 * beta))
    gates.append(Gate("measure", tuple(range(g.n))))
    return QaoaCircuit(g.n, tuple(gates), tuple(bounds))


def circuit_depth_stats(circuit: QaoaCircuit) -> DepthStats:
    """CNOT count and as-soon-as-possible CNOT depth (single-qubit gates are free)."""
    level = [0] * circuit.n
    count = 0
    for gate in circuit.gates:
        if gate.name == "cx":
            a, b = gate.qubits
            lv = max(level[a], level[b]) + 1
            level[a] = level[b] = lv
            count += 1
    return DepthStats(count, max(level, default=0), len(circuit.gates))


# --- dense gate-level simulation (small n) ----------------------------------------

_H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def _one_qubit(psi: np.ndarray, n: int, q: int, op: np.ndarray) -> np.ndarray:
    v = psi.reshape(1 << (n - q - 1), 2, 1 << q)
    return np.einsum("st,atb->asb", op, v).reshape(-1)


def simulate_circuit(circuit: QaoaCircuit) -> np.ndarray:
    """Apply every unitary gate to |0...0>; measurement is ignored."""
    n = circuit.n
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    idx = np.arange(1 << n)
    for gate in circuit.gates:
        if gate.name == "h":
            psi = _one_qubit(psi, n, gate.qubits[0], _H)
        elif gate.name == "rz":
            t = gate.angle / 2
            psi = _one_qubit(psi, n, gate.qubits[0], np.diag([np.exp(-1j * t), np.exp(1j * t)]))
        elif gate.name == "rx":
            t = gate.angle / 2
            op = np.array([[np.cos(t), -1j * np.sin(t)], [-1j * np.sin(t), np.cos(t)]])
            psi = _one_qubit(psi, n, gate.qubits[0], op)
        elif gate.name == "cx":
            c, t = gate.qubits
            src = np.where((idx >> c) & 1, idx ^ (1 << t), idx)
            psi = psi[src]
        elif gate.name != "measure":
            raise ValueError(f"unknown gate {gate.name}")
    return psi


# --- OPENQASM 2 text ------------------------------------------------------------------

def circuit_to_qasm(circuit: QaoaCircuit) -> str:
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{circuit.n}];", f"creg c[{circuit.n}];"]
    starts = {b: k + 1 for k, b in enumerate(circuit.round_boundaries)}
    for i, gate in enumerate(circuit.gates):
        if i in starts:
            lines.append(f"// round {starts[i]}")
        if gate.name in ("h", "rz", "rx"):
            arg = "" if gate.angle is None else f"({gate.angle:.17g})"
            lines.append(f"{gate.name}{arg} q[{gate.qubits[0]}];")
        elif gate.name == "cx":
            lines.append(f"cx q[{gate.qubits[0]}],q[{gate.qubits[1]}];")
        elif gate.name == "measure":
            lines.append("measure q -> c;")
    return "\n".join(lines) + "\n"


def export_circuit_text(circuit: QaoaCircuit, path) -> None:
    Path(path).write_text(circuit_to_qasm(circuit))


_QREG = re.compile(r"qreg\s+q\[(\d+)\];")
_ONE = re.compile(r"(h|rz|rx)(?:\(([^)]*)\))?\s+q\[(\d+)\];")
_CX = re.compile(r"cx\s+q\[(\d+)\],\s*q\[(\d+)\];")


def parse_qasm(text: str) -> QaoaCircuit:
    """Parse the subset written by :func:`circuit_to_qasm`."""
    n = None
    gates: list[Gate] = []
    bounds = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith(("OPENQASM", "include", "creg")):
            continue
        if line.startswith("//"):
            if line.startswith("// round"):
                bounds.append(len(gates))
            continue
        if m := _QREG.fullmatch(line):
            n = int(m.group(1))
        elif m := _ONE.fullmatch(line):
            angle = float(m.group(2)) if m.group(2) is not None else None
            gates.append(Gate(m.group(1), (int(m.group(3)),), angle))
        elif m := _CX.fullmatch(line):
            gates.append(Gate("cx", (int(m.group(1)), int(m.group(2)))))
        elif line == "measure q -> c;":
            if n is None:
                raise ValueError("measure before qreg declaration")
            gates.append(Gate("measure", tuple(range(n))))
        else:
            raise ValueError(f"unsupported line: {raw!r}")
    if n is None:
        raise ValueError("no qreg declaration")
    return QaoaCircuit(n, tuple(gates), tuple(bounds))

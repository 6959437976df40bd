import numpy as np
import pytest
from hypothesis import given, strategies as st

from hhqaoa.angles import QaoaAngles
from hhqaoa.circuit import (
    EdgeColoring,
    Gate,
    QaoaCircuit,
    build_qaoa_circuit,
    circuit_depth_stats,
    circuit_to_qasm,
    export_circuit_text,
    parse_qasm,
    simulate_circuit,
    three_edge_coloring,
)
from hhqaoa.coupling_maps import BUILTIN_MAPS
from hhqaoa.model import generate_instance, load_coupling_map, make_graph
from oracles import dense_qaoa_state, random_angles, small_graphs, small_instances

MAPS = sorted(BUILTIN_MAPS)


@pytest.mark.parametrize("name", MAPS)
def test_builtin_colorings_are_proper(name):
    g = load_coupling_map(name)
    col = three_edge_coloring(g)
    assert set(col.color) == set(g.edges)
    assert col.is_proper()


@given(small_graphs(min_n=2, max_n=16))
def test_random_subgraph_colorings_are_proper(g):
    col = three_edge_coloring(g)
    assert set(col.color) == set(g.edges) and col.is_proper()


def test_coloring_repairs_greedy_dead_end(monkeypatch):
    from hhqaoa import circuit

    calls = []
    original = circuit._kempe_recolor
    monkeypatch.setattr(circuit, "_kempe_recolor", lambda *a: calls.append(1) or original(*a))
    edges = [(2, 7), (2, 8), (3, 5), (3, 6), (3, 7), (4, 5), (4, 6), (4, 8)]
    col = three_edge_coloring(make_graph(10, edges))
    assert calls and col.is_proper()


@st.composite
def bipartite_graphs(draw):
    a, b = draw(st.integers(1, 6)), draw(st.integers(1, 9))
    pairs = draw(st.lists(st.tuples(st.integers(0, a - 1), st.integers(0, b - 1)), max_size=20))
    deg = [0] * (a + b)
    edges = set()
    for u, v in pairs:
        v += a
        if deg[u] < 3 and deg[v] < 2 and (u, v) not in edges:
            edges.add((u, v))
            deg[u] += 1
            deg[v] += 1
    return make_graph(a + b, edges)


@given(bipartite_graphs())
def test_bipartite_colorings_are_proper(g):
    col = three_edge_coloring(g)
    assert set(col.color) == set(g.edges) and col.is_proper()


def test_improper_coloring_detected():
    assert not EdgeColoring({(0, 1): 0, (1, 2): 0}).is_proper()
    assert not EdgeColoring({(0, 1): 3}).is_proper()


@pytest.mark.parametrize("name", MAPS)
@pytest.mark.parametrize("p", [1, 2, 5])
def test_cnot_count_and_depth(name, p):
    inst = generate_instance(load_coupling_map(name), 0)
    stats = circuit_depth_stats(build_qaoa_circuit(inst, QaoaAngles((0.1,) * p, (0.2,) * p)))
    assert stats.cnot_count == 2 * len(inst.graph.edges) * p
    assert stats.cnot_depth == 6 * p


def test_cnot_orientation_and_round_boundaries():
    inst = generate_instance(load_coupling_map("guadalupe-16"), 2)
    circ = build_qaoa_circuit(inst, QaoaAngles((0.3, 0.2), (0.5, 0.4)))
    v3 = inst.graph.v3
    for gate in circ.gates:
        if gate.name == "cx":
            assert gate.qubits[0] in v3 and gate.qubits[1] not in v3
    assert len(circ.round_boundaries) == 2
    assert circ.gates[-1].name == "measure"
    assert all(g.name == "h" for g in circ.gates[: inst.n])


def test_rz_angles_are_twice_gamma_times_coefficient():
    inst = generate_instance(load_coupling_map("guadalupe-16"), 4)
    gamma = 0.37
    circ = build_qaoa_circuit(inst, QaoaAngles((0.1,), (gamma,)))
    rz = [g.angle for g in circ.gates if g.name == "rz"]
    assert len(rz) == len(inst.terms())
    assert sorted(rz) == sorted(2 * gamma * c for _, c in inst.terms())


@given(small_instances(max_n=10), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_gate_level_simulation_matches_dense_oracle(inst, p, seed):
    a = random_angles(np.random.default_rng(seed), p)
    psi = simulate_circuit(build_qaoa_circuit(inst, a))
    ref = dense_qaoa_state(inst, a.beta, a.gamma)
    assert abs(np.vdot(ref, psi)) ** 2 == pytest.approx(1.0, abs=1e-10)


def test_p0_rejected():
    inst = generate_instance(load_coupling_map("guadalupe-16"), 0)
    with pytest.raises(ValueError):
        build_qaoa_circuit(inst, QaoaAngles((), ()))


def test_qasm_roundtrip_exact(tmp_path):
    inst = generate_instance(load_coupling_map("falcon-27"), 9)
    circ = build_qaoa_circuit(inst, QaoaAngles((0.1234567890123456, 1 / 3), (np.pi, np.e)))
    export_circuit_text(circ, tmp_path / "c.qasm")
    back = parse_qasm((tmp_path / "c.qasm").read_text())
    assert back == circ


def test_toy_qasm_text():
    circ = QaoaCircuit(2, (Gate("h", (0,)), Gate("h", (1,)), Gate("cx", (1, 0)), Gate("rz", (0,), 0.5),
                           Gate("measure", (0, 1))), ())
    lines = circuit_to_qasm(circ).splitlines()
    assert lines == ['OPENQASM 2.0;', 'include "qelib1.inc";', "qreg q[2];", "creg c[2];",
                     "h q[0];", "h q[1];", "cx q[1],q[0];", "rz(0.5) q[0];", "measure q -> c;"]
    assert parse_qasm("\n".join(lines)) == circ


@pytest.mark.parametrize("text", ["qreg q[2];\nfoo q[0];", "h q[0];", "measure q -> c;"])
def test_qasm_parser_rejects_unsupported(text):
    with pytest.raises(ValueError):
        parse_qasm(text)

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hhqaoa.model import IsingInstance, generate_instance, load_coupling_map, make_graph, uniform_instance
from hhqaoa.solve import (
    QuadraticBinaryModel,
    auto_penalty,
    brute_force_extrema,
    export_quadratic_model,
    local_search_bound,
    model_minimum,
    parse_lp,
    reduce_order,
)
from hhqaoa.statevector import build_cost_table
from oracles import brute_extrema, direct_cost, small_instances, sub_heavy_hex


@given(small_instances(max_n=10))
def test_extrema_match_direct_enumeration(inst):
    b = brute_force_extrema(inst)
    assert (b.min_energy, b.max_energy) == brute_extrema(inst)
    assert b.exact
    assert direct_cost(inst, b.argmin) == b.min_energy


def test_extrema_match_cost_table_at_16_qubits():
    inst = generate_instance(load_coupling_map("guadalupe-16"), 8)
    b = brute_force_extrema(inst)
    costs = build_cost_table(inst).costs
    assert (b.min_energy, b.max_energy) == (costs.min(), costs.max())


def test_all_plus_instance_bounds():
    inst = uniform_instance(load_coupling_map("guadalupe-16"))
    b = brute_force_extrema(inst)
    assert b.max_energy >= 38 and b.min_energy < 0


def test_single_linear_term():
    inst = IsingInstance(make_graph(1, []), {0: 1}, {}, {})
    b = brute_force_extrema(inst)
    assert (b.min_energy, b.max_energy, b.argmin) == (-1, 1, (-1,))


@given(small_instances(max_n=10))
def test_negation_swaps_extrema(inst):
    a, b = brute_force_extrema(inst), brute_force_extrema(inst.negated())
    assert (b.min_energy, b.max_energy) == (-a.max_energy, -a.min_energy)


def test_enumeration_cap():
    with pytest.raises(ValueError):
        brute_force_extrema(generate_instance(load_coupling_map("eagle-127"), 0))


@given(small_instances(max_n=10))
def test_reduced_model_preserves_minimum(inst):
    model = reduce_order(inst)
    assert len(model.variables) == inst.n + len(inst.cubic)
    assert model_minimum(model) == brute_extrema(inst)[0]


@given(small_instances(max_n=8), st.data())
def test_reduced_model_agrees_on_feasible_assignments(inst, data):
    model = reduce_order(inst, penalty=5)
    z = data.draw(st.lists(st.sampled_from([-1, 1]), min_size=inst.n, max_size=inst.n))
    x = {f"x{v}": (1 - z[v]) // 2 for v in range(inst.n)}
    for w in inst.graph.w_set:
        x[f"y{w.l}_{w.n1}_{w.n2}"] = x[f"x{w.n1}"] * x[f"x{w.n2}"]
    assert model.energy(x) == direct_cost(inst, z)


def test_no_cubic_terms_means_plain_transcription():
    inst = IsingInstance(make_graph(2, [(0, 1)]), {0: 1, 1: -1}, {(0, 1): 1}, {})
    model = reduce_order(inst)
    assert model.variables == ["x0", "x1"]
    # 1 - 2x0 - (1 - 2x1) + (1 - 2x0)(1 - 2x1)
    assert model.offset == 1
    assert model.linear == {"x0": -4}
    assert model.quadratic == {("x0", "x1"): 4}


def test_auto_penalty_guadalupe():
    inst = generate_instance(load_coupling_map("guadalupe-16"), 0)
    assert auto_penalty(inst) == 39
    assert reduce_order(inst).penalty == 39
    with pytest.raises(ValueError):
        reduce_order(inst, penalty=0)


def test_lp_roundtrip_evaluates_identically(tmp_path):
    inst = generate_instance(sub_heavy_hex(10, [True] * 20), 6)
    model = reduce_order(inst)
    export_quadratic_model(model, tmp_path / "m.lp")
    back = parse_lp(tmp_path / "m.lp")
    assert back.variables == model.variables and back.offset == model.offset
    x = np.random.default_rng(0).integers(0, 2, (100, len(model.variables)))
    np.testing.assert_array_equal(back.energies(x), model.energies(x))
    text = (tmp_path / "m.lp").read_text()
    assert "Binaries" in text and text.rstrip().endswith("End")


def test_empty_model_file(tmp_path):
    export_quadratic_model(QuadraticBinaryModel([]), tmp_path / "e.lp")
    back = parse_lp(tmp_path / "e.lp")
    assert back.variables == [] and back.offset == 0 and not back.linear and not back.quadratic


def test_local_search_bounds_are_feasible_and_deterministic():
    inst = generate_instance(load_coupling_map("guadalupe-16"), 3)
    exact = brute_force_extrema(inst)
    h = local_search_bound(inst, restarts=20, seed=1)
    assert not h.exact
    assert exact.min_energy <= h.min_energy <= h.max_energy <= exact.max_energy
    assert direct_cost(inst, h.argmin) == h.min_energy
    assert local_search_bound(inst, restarts=20, seed=1) == h
    with pytest.raises(ValueError):
        local_search_bound(inst, restarts=0)


def test_local_search_finds_ground_state_on_most_16_qubit_instances():
    g = load_coupling_map("guadalupe-16")
    hits = 0
    for seed in range(100):
        inst = generate_instance(g, seed)
        hits += local_search_bound(inst, restarts=100, seed=seed).min_energy == brute_force_extrema(inst).min_energy
    assert hits >= 90

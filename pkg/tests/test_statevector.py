import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from hhqaoa.angles import TRANSFER_ANGLES, QaoaAngles
from hhqaoa.model import generate_instance, load_coupling_map
from hhqaoa.statevector import (
    CapacityError,
    build_cost_table,
    expectation,
    plus_state,
    qaoa_expectation,
    run_qaoa,
    sample,
)
from oracles import cost_vector, dense_expectation, dense_qaoa_state, random_angles, small_instances


@given(small_instances(max_n=10))
def test_cost_table_matches_direct_enumeration(inst):
    table = build_cost_table(inst)
    np.testing.assert_array_equal(table.costs, cost_vector(inst))
    assert table.n == inst.n


def test_cost_table_16_qubits_spot_check():
    inst = generate_instance(load_coupling_map("guadalupe-16"), 12)
    table = build_cost_table(inst)
    rng = np.random.default_rng(0)
    from oracles import direct_cost, spins_of

    for idx in rng.integers(0, 1 << 16, 200):
        assert table.costs[idx] == direct_cost(inst, spins_of(int(idx), 16))


@given(small_instances(max_n=8), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_state_matches_dense_oracle(inst, p, seed):
    a = random_angles(np.random.default_rng(seed), p)
    psi = run_qaoa(inst, a).amplitudes
    np.testing.assert_allclose(psi, dense_qaoa_state(inst, a.beta, a.gamma), atol=1e-11)
    assert qaoa_expectation(inst, a) == pytest.approx(dense_expectation(inst, a.beta, a.gamma), abs=1e-10)


@given(small_instances(max_n=10), st.integers(0, 2**32 - 1))
def test_norm_preserved(inst, seed):
    a = random_angles(np.random.default_rng(seed), 3)
    assert run_qaoa(inst, a).norm() == pytest.approx(1.0, abs=1e-12)


def test_plus_state_expectation_is_zero():
    inst = generate_instance(load_coupling_map("guadalupe-16"), 1)
    assert expectation(plus_state(16), build_cost_table(inst)) == pytest.approx(0.0, abs=1e-12)


def test_transfer_angles_decrease_energy():
    inst = generate_instance(load_coupling_map("guadalupe-16"), 0)
    table = build_cost_table(inst)
    energies = [qaoa_expectation(inst, TRANSFER_ANGLES[p], table) for p in range(1, 6)]
    assert all(b < a for a, b in zip(energies, energies[1:]))


def test_capacity_error():
    inst = generate_instance(load_coupling_map("eagle-127"), 0)
    with pytest.raises(CapacityError):
        build_cost_table(inst)
    with pytest.raises(CapacityError):
        run_qaoa(inst, TRANSFER_ANGLES[1])
    small = generate_instance(load_coupling_map("guadalupe-16"), 0)
    with pytest.raises(CapacityError):
        build_cost_table(small, cap=10)


def test_expectation_dimension_mismatch():
    a = generate_instance(load_coupling_map("guadalupe-16"), 0)
    with pytest.raises(ValueError):
        expectation(plus_state(10), build_cost_table(a))


def test_sampler_goodness_of_fit():
    from oracles import sub_heavy_hex
    from hhqaoa.model import IsingInstance

    g = sub_heavy_hex(8, [True] * 20)
    inst = generate_instance(g, 3)
    state = run_qaoa(inst, QaoaAngles((0.4, 0.3), (2.9, 2.7)))
    s = sample(state, 100_000, seed=1, instance=inst)
    assert s.shots == 100_000
    idx = ((s.spins == -1) * (1 << np.arange(8))).sum(axis=1)
    observed = np.zeros(256)
    observed[idx] = s.counts
    probs = state.probabilities()
    assert stats.chisquare(observed, probs / probs.sum() * 100_000).pvalue > 0.01
    from oracles import direct_cost

    assert all(e == direct_cost(inst, z) for z, e in zip(s.spins.tolist(), s.energies))


def test_sampler_deterministic_and_validates():
    inst = generate_instance(load_coupling_map("guadalupe-16"), 0)
    st_ = run_qaoa(inst, TRANSFER_ANGLES[2])
    a, b = sample(st_, 500, 9, inst), sample(st_, 500, 9, inst)
    np.testing.assert_array_equal(a.spins, b.spins)
    np.testing.assert_array_equal(a.counts, b.counts)
    with pytest.raises(ValueError):
        sample(st_, 0, 9, inst)

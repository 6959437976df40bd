import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from hhqaoa.angles import TRANSFER_ANGLES, QaoaAngles
from hhqaoa.model import Term, generate_instance, load_coupling_map
from hhqaoa.mps import (
    MpsState,
    apply_mixer,
    bond_dimension_error_scan,
    build_gates,
    canonicalize,
    group_gates,
    mps_expectation,
    mps_from_plus_state,
    mps_sample,
    phase_gate_mpo,
    product_state,
    run_qaoa_mps,
)
from hhqaoa.statevector import build_cost_table, expectation, qaoa_expectation, run_qaoa
from oracles import dense_expectation, dense_qaoa_state, random_angles, small_instances, sub_heavy_hex


def span_phase(sites, coeff, gamma):
    first, last = sites[0], sites[-1]
    k = last - first + 1
    out = np.empty(2**k, dtype=complex)
    for b in range(2**k):
        prod = 1
        for s in sites:
            bit = (b >> (last - s)) & 1  # first site most significant
            prod *= 1 - 2 * bit
        out[b] = np.exp(-1j * gamma * coeff * prod)
    return np.diag(out)


@pytest.mark.parametrize("sites", [(3,), (0, 1), (2, 5), (1, 2, 3), (0, 3, 6), (4, 5, 9)])
@pytest.mark.parametrize("coeff", [-1, 1])
def test_phase_gate_mpo_matches_dense_diagonal(sites, coeff):
    mpo = phase_gate_mpo(sites, coeff, 0.731)
    assert (mpo.first, mpo.last) == (sites[0], sites[-1])
    assert mpo.max_bond <= 2
    np.testing.assert_allclose(mpo.to_dense(), span_phase(sites, coeff, 0.731), atol=1e-13)


def test_phase_gate_mpo_validation():
    with pytest.raises(ValueError):
        phase_gate_mpo((2, 1), 1, 0.1)
    with pytest.raises(ValueError):
        phase_gate_mpo((0, 1, 2, 3), 1, 0.1)
    with pytest.raises(ValueError):
        phase_gate_mpo((0, 8), 1, 0.1, n=5)


@pytest.mark.parametrize("bundle", ["none", "triples"])
def test_bundled_gates_have_bond_dimension_two(bundle):
    inst = generate_instance(load_coupling_map("falcon-27"), 4)
    gates = build_gates(inst, bundle)
    for g in gates:
        assert g.mpo(0.9).max_bond <= 2
    covered = sorted(t for g in gates for t in g.terms)
    assert covered == sorted(t for t in inst.terms() if len(t.sites) > 1)


def test_bundled_gate_diagonal_is_product_of_terms():
    inst = generate_instance(load_coupling_map("guadalupe-16"), 2)
    for g in build_gates(inst, "triples"):
        dense = g.mpo(0.4).to_dense()
        first, last = g.sites[0], g.sites[-1]
        ref = np.eye(2 ** (last - first + 1), dtype=complex)
        for t in g.terms:
            shifted = tuple(s - first for s in t.sites)
            ref = ref @ span_phase_on(shifted, t.coeff, 0.4, last - first + 1)
        np.testing.assert_allclose(dense, ref, atol=1e-13)


def span_phase_on(sites, coeff, gamma, k):
    out = np.empty(2**k, dtype=complex)
    for b in range(2**k):
        prod = 1
        for s in sites:
            prod *= 1 - 2 * ((b >> (k - 1 - s)) & 1)
        out[b] = np.exp(-1j * gamma * coeff * prod)
    return np.diag(out)


def test_unknown_bundle_mode():
    inst = generate_instance(load_coupling_map("guadalupe-16"), 2)
    with pytest.raises(ValueError):
        build_gates(inst, "pairs")


@given(st.lists(st.tuples(st.integers(0, 20), st.integers(0, 20), st.integers(0, 20)), max_size=30))
def test_groups_are_disjoint_and_complete(triples):
    terms = [Term(tuple(sorted(set(t))), 1) for t in triples]
    groups = group_gates(terms)
    flat = [g for group in groups for g in group]
    assert sorted(flat) == sorted(terms)
    for group in groups:
        spans = sorted((g.sites[0], g.sites[-1]) for g in group)
        assert all(a[1] < b[0] for a, b in zip(spans, spans[1:]))


def test_plus_and_product_states():
    np.testing.assert_allclose(mps_from_plus_state(4).to_dense(), np.full(16, 0.25))
    psi = product_state([1, -1, 1]).to_dense()
    assert psi[0b010] == 1 and np.count_nonzero(psi) == 1
    with pytest.raises(ValueError):
        mps_from_plus_state(0)


@given(small_instances(min_n=3, max_n=9), st.integers(1, 3), st.sampled_from(["none", "triples"]),
       st.integers(0, 2**32 - 1))
def test_untruncated_mps_matches_dense_oracle(inst, p, bundle, seed):
    a = random_angles(np.random.default_rng(seed), p)
    mps = run_qaoa_mps(inst, a, chi_max=64, bundle=bundle)
    ref = dense_qaoa_state(inst, a.beta, a.gamma)
    assert abs(np.vdot(ref, mps.to_dense())) ** 2 == pytest.approx(1.0, abs=1e-10)
    assert mps_expectation(mps, inst) == pytest.approx(dense_expectation(inst, a.beta, a.gamma), abs=1e-9)
    assert mps.truncation_weight < 1e-20


@given(small_instances(min_n=4, max_n=9), st.integers(0, 2**32 - 1))
def test_truncated_state_stays_normalized_and_bounded(inst, seed):
    a = random_angles(np.random.default_rng(seed), 3)
    mps = run_qaoa_mps(inst, a, chi_max=2)
    assert max(mps.bond_dims()) <= 2
    assert mps.norm() == pytest.approx(1.0, abs=1e-12)
    assert mps.truncation_weight >= 0
    assert mps.truncation_weight == pytest.approx(sum(mps.layer_weights))


def test_mixer_and_canonicalize_preserve_state():
    inst = generate_instance(sub_heavy_hex(8, [True] * 20), 1)
    mps = run_qaoa_mps(inst, QaoaAngles((0.3,), (0.8,)), chi_max=64)
    dense = mps.to_dense()
    moved = canonicalize(mps)
    np.testing.assert_allclose(moved.to_dense(), dense, atol=1e-12)
    mixed = apply_mixer(mps, 0.0)
    np.testing.assert_allclose(mixed.to_dense(), dense, atol=1e-14)


def test_16_qubit_agreement_with_statevector():
    inst = generate_instance(load_coupling_map("guadalupe-16"), 5)
    table = build_cost_table(inst)
    for p in (1, 3):
        a = TRANSFER_ANGLES[p]
        mps = run_qaoa_mps(inst, a, chi_max=256)
        assert mps_expectation(mps, inst) == pytest.approx(expectation(run_qaoa(inst, a, table), table), abs=1e-9)


def test_bond_scan_reference_row_is_zero():
    inst = generate_instance(load_coupling_map("guadalupe-16"), 5)
    rows = bond_dimension_error_scan(inst, TRANSFER_ANGLES[3], [4, 8, 16], chi_ref=16)
    assert rows[-1]["delta_e"] == 0.0
    assert rows[0]["delta_e"] >= rows[-1]["delta_e"]
    assert all(r["reference_energy"] == rows[-1]["energy"] for r in rows)
    with pytest.raises(ValueError):
        bond_dimension_error_scan(inst, TRANSFER_ANGLES[1], [32], chi_ref=16)


def test_run_requires_rounds():
    inst = generate_instance(load_coupling_map("guadalupe-16"), 5)
    with pytest.raises(ValueError):
        run_qaoa_mps(inst, QaoaAngles((), ()), 8)


def test_perfect_sampling_goodness_of_fit():
    inst = generate_instance(sub_heavy_hex(8, [True] * 20), 3)
    a = QaoaAngles((0.4, 0.3), (2.9, 2.7))
    mps = run_qaoa_mps(inst, a, chi_max=16)
    s = mps_sample(mps, 100_000, seed=4, instance=inst)
    idx = ((s.spins == -1) * (1 << np.arange(8))).sum(axis=1)
    observed = np.zeros(256)
    observed[idx] = s.counts
    probs = run_qaoa(inst, a).probabilities()
    assert stats.chisquare(observed, probs / probs.sum() * 100_000).pvalue > 0.01


def test_sampling_product_state_is_deterministic():
    inst = generate_instance(sub_heavy_hex(5, [True] * 20), 0)
    s = mps_sample(product_state([1, -1, -1, 1, 1]), 50, 0, inst)
    assert s.spins.tolist() == [[1, -1, -1, 1, 1]] and s.shots == 50
    with pytest.raises(ValueError):
        mps_sample(product_state([1] * 5), 0, 0, inst)

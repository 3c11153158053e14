import math

import numpy as np
import pytest

from hpsim.cavity import ReflectionPair, reflection_pair, solve_params_for_phase
from hpsim.hybrid_state import (HybridState, apply_channel_loss, apply_cps,
                                closed_form_final_state, env_overlap,
                                env_overlap_matrix, hamming_weights,
                                init_plus_state, make_target, state_from_dict,
                                state_to_dict, target_from_dict, target_to_dict)
from oracles import brute_force_sequential_state

PAIR_I = ReflectionPair(1j, -1j)


def run_gates(n, alpha, pair=None, order=None):
    pair = pair or reflection_pair(solve_params_for_phase(n))
    state = init_plus_state(n, alpha)
    for i in order or range(n):
        state = apply_cps(state, i, pair)
    return state


def test_init_single_qubit():
    st = init_plus_state(1, 2.0)
    b = st.branches()
    assert set(b) == {"0", "1"}
    for rec in b.values():
        assert abs(rec.amp - 1 / math.sqrt(2)) < 1e-15
        assert rec.field == 2.0
        assert rec.env == ()


def test_init_three_qubits_uniform():
    st = init_plus_state(3, 5.0)
    assert st.n_branches == 8
    assert np.allclose(st.amps, 1 / math.sqrt(8))
    assert abs(np.sum(np.abs(st.amps) ** 2) - 1.0) < 1e-12


def test_init_vacuum_pulse():
    st = init_plus_state(2, 0.0)
    assert np.all(st.fields == 0)
    assert abs(np.sum(np.abs(st.amps) ** 2) - 1.0) < 1e-12


def test_init_rejects_bad_inputs():
    with pytest.raises(ValueError):
        init_plus_state(0, 1.0)
    with pytest.raises(ValueError):
        init_plus_state(21, 1.0)
    with pytest.raises(ValueError):
        init_plus_state(2, -1.0)
    with pytest.raises(ValueError):
        init_plus_state(2, 1.0 + 0.5j)


def test_cps_single_qubit_conditioned_phase():
    st = apply_cps(init_plus_state(1, 3.0), 0, PAIR_I)
    assert abs(st.branch("0").field - 3j) < 1e-15
    assert abs(st.branch("1").field + 3j) < 1e-15
    assert st.n_loss_events == 0          # unit-modulus pair appends nothing


def test_cps_identity_pair_is_noop():
    st0 = init_plus_state(2, 1.5)
    st = apply_cps(st0, 1, ReflectionPair(1.0 + 0j, 1.0 + 0j))
    assert np.array_equal(st.fields, st0.fields)
    assert np.array_equal(st.amps, st0.amps)
    assert st.n_loss_events == 0


def test_two_gates_sort_branches_by_parity():
    st = run_gates(2, 1.0, pair=PAIR_I)
    assert abs(st.branch("01").field - 1.0) < 1e-15
    assert abs(st.branch("10").field - 1.0) < 1e-15
    assert abs(st.branch("00").field + 1.0) < 1e-15
    assert abs(st.branch("11").field + 1.0) < 1e-15


def test_cps_index_out_of_range():
    with pytest.raises(ValueError):
        apply_cps(init_plus_state(2, 1.0), 2, PAIR_I)


def test_cps_preserves_amplitudes():
    st = run_gates(3, 2.0)
    assert np.allclose(st.amps, 1 / math.sqrt(8))


def test_channel_loss_lossless_appends_zero_label():
    st0 = init_plus_state(2, 2.0)
    st = apply_channel_loss(st0, 1.0)
    assert np.array_equal(st.fields, st0.fields)
    assert st.n_loss_events == 1
    assert np.all(st.env == 0)


def test_channel_loss_opaque():
    st = apply_channel_loss(init_plus_state(2, 2.0), 0.0)
    assert np.all(st.fields == 0)
    assert np.allclose(np.abs(st.env[:, 0]), 2.0)


def test_channel_loss_scales_post_gate_fields():
    eta = math.sqrt(2 / 3)
    st = apply_channel_loss(run_gates(2, 3.0, pair=PAIR_I), eta)
    assert abs(st.branch("01").field - eta * 3.0) < 1e-14
    assert abs(st.branch("00").field + eta * 3.0) < 1e-14


def test_channel_loss_rejects_bad_eta():
    st = init_plus_state(1, 1.0)
    for eta in (-0.1, 1.1):
        with pytest.raises(ValueError):
            apply_channel_loss(st, eta)


def test_env_overlap_identical_and_conjugate():
    st = apply_channel_loss(run_gates(2, 2.0, pair=PAIR_I), 0.8)
    g = env_overlap(st, "01", "10")
    assert abs(g - 1.0) < 1e-14          # same label: within-bin coherence survives
    g01_00 = env_overlap(st, "01", "00")
    assert abs(env_overlap(st, "00", "01") - g01_00.conjugate()) < 1e-15
    assert abs(g01_00) <= 1.0 + 1e-15
    assert abs(env_overlap(st, "11", "11") - 1.0) < 1e-15


def test_env_overlap_opposite_labels():
    # labels e and -e after one event: |<e|-e>| = exp(-2|e|^2)
    st = apply_channel_loss(run_gates(1, 1.5, pair=PAIR_I), 0.6)
    e = st.branch("0").env[0]
    got = env_overlap(st, "1", "0")
    assert abs(abs(got) - math.exp(-2 * abs(e) ** 2)) < 1e-12


def test_env_overlap_matrix_is_psd_gram():
    pair = ReflectionPair(1j, 0.8j)      # lossy coupled reflection
    st = init_plus_state(3, 2.0)
    st = apply_channel_loss(st, 0.9)
    for i in range(3):
        st = apply_cps(st, i, pair)
    gamma = env_overlap_matrix(st)
    assert np.max(np.abs(gamma - gamma.conj().T)) < 1e-14
    assert np.linalg.eigvalsh(gamma).min() > -1e-10
    assert np.allclose(np.diag(gamma), 1.0)


def test_lossy_cps_keeps_env_lengths_global():
    pair = ReflectionPair(1j, 0.5j)
    st = apply_cps(init_plus_state(2, 1.0), 0, pair)
    assert st.env.shape == (4, 1)
    assert st.branch("00").env[0] == 0.0          # uncoupled branch: zero label
    assert abs(st.branch("10").env[0] - math.sqrt(0.75)) < 1e-14


def test_gate_order_invariance():
    rng = np.random.default_rng(4)
    base = run_gates(4, 1.3)
    for _ in range(5):
        order = rng.permutation(4)
        other = run_gates(4, 1.3, order=list(order))
        assert np.max(np.abs(base.fields - other.fields)) < 1e-13


def test_weight_class_collapse():
    for n in (2, 3, 5):
        st = run_gates(n, 2.0)
        w = hamming_weights(n)
        for k in range(n + 1):
            group = st.fields[w == k]
            assert np.max(np.abs(group - group[0])) < 1e-13


@pytest.mark.parametrize("n", range(2, 9))
def test_closed_form_matches_sequential(n):
    alpha = 1.9
    seq = run_gates(n, alpha)
    cf = closed_form_final_state(n, alpha)
    assert np.max(np.abs(seq.fields - cf.fields)) < 1e-12
    assert np.max(np.abs(seq.amps - cf.amps)) < 1e-12


def test_closed_form_against_brute_force_enumeration():
    n, alpha = 5, 1.1
    pair = reflection_pair(solve_params_for_phase(n))
    brute = brute_force_sequential_state(n, alpha, pair.r0, pair.r1)
    cf = closed_form_final_state(n, alpha)
    assert np.max(np.abs(brute - cf.fields)) < 1e-12


def test_closed_form_fields_small_n():
    st2 = closed_form_final_state(2, 2.0)
    assert abs(st2.branch("00").field + 2.0) < 1e-14
    assert abs(st2.branch("01").field - 2.0) < 1e-14
    assert abs(st2.branch("11").field + 2.0) < 1e-14
    st3 = closed_form_final_state(3, 1.0)
    assert abs(st3.branch("000").field + 1.0) < 1e-14
    assert abs(st3.branch("001").field - np.exp(1j * math.pi / 3)) < 1e-14
    assert abs(st3.branch("011").field - np.exp(-1j * math.pi / 3)) < 1e-14
    assert abs(st3.branch("111").field + 1.0) < 1e-14


def test_weight_group_coefficients_three_qubits():
    st = closed_form_final_state(3, 2.0)
    w = hamming_weights(3)
    ghz = math.sqrt(float(np.sum(np.abs(st.amps[np.isin(w, [0, 3])]) ** 2)))
    w1 = math.sqrt(float(np.sum(np.abs(st.amps[w == 1]) ** 2)))
    w2 = math.sqrt(float(np.sum(np.abs(st.amps[w == 2]) ** 2)))
    assert abs(ghz - 0.5) < 1e-12
    assert abs(w1 - math.sqrt(6) / 4) < 1e-12
    assert abs(w2 - math.sqrt(6) / 4) < 1e-12


# --- targets -----------------------------------------------------------------

def test_ghz_target():
    t = make_target("GHZ", 3)
    assert t.amp_map() == {"000": 1 / math.sqrt(2), "111": 1 / math.sqrt(2)}


def test_dicke_target():
    t = make_target("Dicke", 3, 2)
    m = t.amp_map()
    assert set(m) == {"011", "101", "110"}
    assert all(abs(a - 1 / math.sqrt(3)) < 1e-15 for a in m.values())


def test_w_is_single_excitation_dicke():
    assert np.array_equal(make_target("W", 4).amps, make_target("Dicke", 4, 1).amps)


def test_gsum_balanced_case_is_plain_dicke():
    assert np.allclose(make_target("Gsum", 4, 2).amps, make_target("Dicke", 4, 2).amps)


def test_gsum_unbalanced_case():
    t = make_target("Gsum", 3, 1)
    want = (make_target("Dicke", 3, 1).amps + make_target("Dicke", 3, 2).amps) / math.sqrt(2)
    assert np.allclose(t.amps, want)


def test_gprime_carries_outcome_phase():
    zeta = 0.7
    t = make_target("Gprime", 3, 1, phase=zeta)
    m = t.amp_map()
    assert abs(m["001"] - np.exp(1j * zeta) / math.sqrt(6)) < 1e-15
    assert abs(m["011"] - np.exp(-1j * zeta) / math.sqrt(6)) < 1e-15


def test_bell_targets():
    assert make_target("Bell-phi+").amp_map() == {
        "00": 1 / math.sqrt(2), "11": 1 / math.sqrt(2)}
    assert make_target("Bell-psi+").amp_map() == {
        "01": 1 / math.sqrt(2), "10": 1 / math.sqrt(2)}


def test_target_rejects_bad_inputs():
    with pytest.raises(ValueError):
        make_target("Dicke", 3, 4)
    with pytest.raises(ValueError):
        make_target("Gprime", 4, 2)
    with pytest.raises(ValueError):
        make_target("nonsense", 2)


def test_state_serialization_round_trip():
    st = apply_channel_loss(run_gates(2, 1.4), 0.7)
    d = state_to_dict(st)
    assert d["branches"][1]["bits"] == "01"
    back = state_from_dict(d)
    assert back.n == st.n and back.alpha0 == st.alpha0
    assert np.allclose(back.amps, st.amps)
    assert np.allclose(back.fields, st.fields)
    assert np.allclose(back.env, st.env)


def test_target_serialization_round_trip():
    t = make_target("Gprime", 3, 1, phase=1.2)
    back = target_from_dict(target_to_dict(t))
    assert back.name == t.name
    assert np.allclose(back.amps, t.amps)


def test_state_constructor_enforces_invariants():
    bad_amps = np.full(4, 0.9, dtype=complex)          # not normalized
    with pytest.raises(ValueError):
        HybridState(n=2, alpha0=1.0, amps=bad_amps,
                    fields=np.zeros(4, dtype=complex),
                    env=np.zeros((4, 0), dtype=complex))
    big_fields = np.full(4, 3.0, dtype=complex)        # exceeds alpha0
    with pytest.raises(ValueError):
        HybridState(n=2, alpha0=1.0, amps=np.full(4, 0.5, dtype=complex),
                    fields=big_fields, env=np.zeros((4, 0), dtype=complex))


def test_state_arrays_are_read_only():
    st = init_plus_state(2, 1.0)
    with pytest.raises(ValueError):
        st.fields[0] = 9.0

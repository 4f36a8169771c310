import numpy as np
import pytest

from bellsim.gates import GateOperator, apply, standard_gate
from bellsim.measurement import random_state, random_unitary
from bellsim.nosignal import (
    AuditScenario,
    bob_reduced,
    distinguishability_game,
    mode_change_scenario,
    random_local_program,
    run_audit,
)
from bellsim.protocols import bell_state
from bellsim.statecore import KET_0, KET_MINUS, KET_PLUS, PureState, fidelity, qubit, tensor, to_density

from oracles import dephase, full_operator, partial_trace_loops, random_unit_pair, teleport_matrix_chain

MIXED = np.diag([0.5, 0.5])


def brute_force_after(sc):
    """Bob's averaged state from full-matrix evolution of the joint density matrix."""
    n = sc.joint_state.num_qubits
    psi = sc.joint_state.amplitudes
    rho = np.outer(psi, psi.conj())
    for g, targets in sc.alice_program:
        u = full_operator(g.matrix, list(targets), n)
        rho = u @ rho @ u.conj().T
    if sc.alice_measures:
        rho = dephase(rho, list(sc.alice_qubits), n)
    return partial_trace_loops(rho, list(sc.bob_qubits), n)


class TestBobReduced:
    def test_b1(self):
        assert bob_reduced(bell_state(1), [1]).allclose(MIXED)

    def test_product(self, rng):
        psi = random_state(1, rng)
        assert bob_reduced(tensor(KET_0, psi), [1]).allclose(to_density(psi))

    def test_teleport_post_h(self, rng):
        for _ in range(20):
            a, b = random_unit_pair(rng)
            vec = teleport_matrix_chain(a, b)
            oracle = partial_trace_loops(np.outer(vec, vec.conj()), [2], 3)
            np.testing.assert_allclose(oracle, MIXED, atol=1e-12)
            assert bob_reduced(PureState(vec), [2]).allclose(oracle)

    def test_invalid(self):
        with pytest.raises(ValueError):
            bob_reduced(bell_state(1), [])
        with pytest.raises(ValueError):
            bob_reduced(bell_state(1), [2])


class TestModeChange:
    def test_post_h_state_scenario(self):
        # joint state already after XOR and H; Alice only measures
        vec = teleport_matrix_chain(1 / np.sqrt(2), 1 / np.sqrt(2))
        report = run_audit(AuditScenario(PureState(vec), (0, 1), (), True))
        expected = {"00": KET_PLUS, "01": KET_PLUS, "10": KET_MINUS, "11": KET_MINUS}
        assert [e.outcome for e in report.outcomes] == list(expected)
        for e in report.outcomes:
            assert e.probability == pytest.approx(0.25, abs=1e-12)
            assert e.rho_bob.allclose(to_density(expected[e.outcome]), atol=1e-12)
            assert e.purity == pytest.approx(1.0, abs=1e-12)
        assert report.rho_after.allclose(MIXED, atol=1e-12)
        assert report.distance < 1e-12
        assert report.purity_after == pytest.approx(0.5, abs=1e-12)

    def test_full_program_scenario(self):
        report = run_audit(mode_change_scenario())
        assert report.rho_before.allclose(MIXED, atol=1e-12)
        assert report.distance < 1e-12
        assert report.purity_before == pytest.approx(0.5, abs=1e-12)
        assert all(e.purity == pytest.approx(1.0, abs=1e-12) for e in report.outcomes)

    def test_outcome_average_identity(self):
        report = run_audit(mode_change_scenario(qubit(0.6, 0.8)))
        avg = sum(e.probability * e.rho_bob.entries for e in report.outcomes)
        np.testing.assert_allclose(avg, report.rho_after.entries, atol=1e-12)
        assert sum(e.probability for e in report.outcomes) == pytest.approx(1.0, abs=1e-12)


class TestLocality:
    def test_single_unitary_on_b1(self, rng):
        for _ in range(10):
            sc = AuditScenario(bell_state(1), (0,), ((GateOperator(random_unitary(2, rng)), (0,)),))
            assert run_audit(sc).distance < 1e-12

    def test_rejects_program_on_bob(self):
        sc = AuditScenario(bell_state(3), (0,), ((standard_gate("A"), (1,)),))
        with pytest.raises(ValueError, match="touches Bob"):
            run_audit(sc)

    def test_scenario_validation(self):
        with pytest.raises(ValueError):
            AuditScenario(bell_state(1), ())
        with pytest.raises(ValueError):
            AuditScenario(bell_state(1), (0, 1))
        with pytest.raises(ValueError):
            AuditScenario(bell_state(1), (2,))

    @pytest.mark.parametrize("n,alice", [(2, (0,)), (2, (1,)), (3, (0, 1)), (3, (0,)), (3, (1, 2)), (3, (0, 2))])
    def test_random_programs(self, rng, n, alice):
        worst = 0.0
        for i in range(20):
            psi = random_state(n, rng)
            program = random_local_program(alice, rng, length=int(rng.integers(1, 5)))
            sc = AuditScenario(psi, alice, program, bool(i % 2))
            report = run_audit(sc)
            worst = max(worst, report.distance)
            np.testing.assert_allclose(report.rho_after.entries, brute_force_after(sc), atol=1e-12)
            assert sum(e.probability for e in report.outcomes) == pytest.approx(1.0, abs=1e-12)
        assert worst < 1e-12

    def test_brute_force_oracle_detects_signalling(self):
        # sanity check on the oracle itself: a Bob-side flip on a product state is visible
        sc = AuditScenario(tensor(KET_0, KET_0), (0,), ((standard_gate("A"), (1,)),))
        moved = brute_force_after(sc)
        np.testing.assert_allclose(moved, [[0, 0], [0, 1]], atol=1e-15)


class TestGame:
    def test_measure_vs_idle(self):
        sc = mode_change_scenario()
        idle = AuditScenario(sc.joint_state, sc.alice_qubits)
        assert distinguishability_game(sc, idle) == pytest.approx(0.5, abs=1e-12)

    def test_identical(self):
        sc = mode_change_scenario()
        assert distinguishability_game(sc, sc) == pytest.approx(0.5, abs=1e-12)

    def test_random_pairs(self, rng):
        for _ in range(20):
            psi = random_state(3, rng)
            first = AuditScenario(psi, (0, 1), random_local_program((0, 1), rng), True)
            second = AuditScenario(psi, (0, 1), random_local_program((0, 1), rng), False)
            assert distinguishability_game(first, second) == pytest.approx(0.5, abs=1e-12)

    def test_mismatched_bob(self):
        with pytest.raises(ValueError):
            distinguishability_game(AuditScenario(bell_state(1), (0,)), AuditScenario(bell_state(1), (1,)))
        with pytest.raises(ValueError):
            distinguishability_game(AuditScenario(bell_state(1), (0,)), AuditScenario(bell_state(2), (0,)))

    def test_nonlocal_flip_on_b3(self):
        # the illegal program is refused by the auditor...
        illegal = AuditScenario(bell_state(3), (0,), ((standard_gate("A"), (1,)),))
        idle = AuditScenario(bell_state(3), (0,))
        with pytest.raises(ValueError):
            distinguishability_game(illegal, idle)
        # ...though its Bob marginal happens to stay maximally mixed
        moved = brute_force_after(illegal)
        untouched = brute_force_after(idle)
        diff = np.linalg.eigvalsh(moved - untouched)
        assert 0.5 + 0.25 * np.sum(np.abs(diff)) == pytest.approx(0.5, abs=1e-12)

    def test_local_flip_is_invisible_but_bob_flip_on_product_is_not(self):
        psi = tensor(qubit(0.6, 0.8), KET_0)
        local = AuditScenario(psi, (0,), ((standard_gate("A"), (0,)),))
        assert distinguishability_game(local, AuditScenario(psi, (0,))) == pytest.approx(0.5, abs=1e-12)
        assert fidelity(apply(standard_gate("A"), psi, [1]), psi) == 0.0

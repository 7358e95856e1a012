"""Tests for the teleportation protocol."""

import cmath
import math
from dataclasses import replace

import numpy as np
import pytest

from src.core.errors import (
    ConstraintViolationError,
    DegenerateStateError,
    DimensionError,
    ZeroProbabilityError,
)
from src.core.models import (
    BellLabel,
    BellOutcome,
    Congruence,
    JunctionAmplitudes,
    Mode,
    PhaseSet,
    QubitChoice,
    RingAmplitudes,
    RingConfig,
    RingGeometry,
    RingPhysics,
)
from src.core.states import DOWN, UP, basis_state, fidelity, random_state, spin_state
from src.services.audit import get_audit_service
from src.services.protocol import (
    OutcomeSampler,
    ProtocolService,
    bell_basis,
    bell_bracket,
    bell_measure,
    bob_final_state,
    check_congruence,
    check_constraints,
    coincidence_frame,
    coincidence_label,
    feed_forward_constraints,
    generate_qubit,
    resolve_design_row,
    retune_junctions,
    run_protocol,
    teleport_qubit,
    total_state,
)
from src.services.ring_model import (
    default_geometry,
    geometric_phases,
    random_geometry,
    random_junction,
)

H = 1 / math.sqrt(2)
PHI_PLUS = spin_state(H, 0, 0, H)
PHI_JUNCTIONS = (JunctionAmplitudes(t=H, p=0, f=H), JunctionAmplitudes(t=H, p=0, f=H))
ZERO_PHASES = PhaseSet(*[0.0] * 9)


def _unit_phases(**overrides) -> PhaseSet:
    values = dict.fromkeys(
        ("phi12", "phi15", "phi34", "phi47", "phi136", "phi146", "phi167", "phi246", "phi456"), 0.0
    )
    values.update(overrides)
    return PhaseSet(**values)


class TestGenerateQubit:
    """Test filtering Alice's qubit out of ring A."""

    def test_phi_plus_ring_up(self):
        amplitudes = RingAmplitudes(uu=H, dd=H, du=0, ud=0)
        qubit, probability = generate_qubit(amplitudes, QubitChoice.UP)
        assert np.allclose(qubit.amplitudes, UP.amplitudes)
        assert probability == pytest.approx(0.5)

    def test_phi_plus_ring_down(self):
        amplitudes = RingAmplitudes(uu=H, dd=H, du=0, ud=0)
        qubit, probability = generate_qubit(amplitudes, QubitChoice.DOWN)
        assert np.allclose(qubit.amplitudes, DOWN.amplitudes)
        assert probability == pytest.approx(0.5)

    def test_superposition(self):
        amplitudes = RingAmplitudes(uu=0.6, dd=0, du=0.8j, ud=0)
        qubit, probability = generate_qubit(amplitudes, QubitChoice.UP)
        assert probability == pytest.approx(1.0)
        assert qubit[1] == pytest.approx(0.8j)

    def test_impossible_outcome(self):
        amplitudes = RingAmplitudes(uu=0, dd=0, du=0, ud=1)
        with pytest.raises(DegenerateStateError, match="up"):
            generate_qubit(amplitudes, QubitChoice.UP)


class TestBellMeasurement:
    """Test the total state and Bell-basis projections."""

    def test_total_state_dimensions(self):
        assert total_state(UP, PHI_PLUS).n_spins == 3
        with pytest.raises(DimensionError):
            total_state(PHI_PLUS, PHI_PLUS)

    def test_bell_basis_is_orthonormal(self):
        basis = list(bell_basis().values())
        for i, a in enumerate(basis):
            for j, b in enumerate(basis):
                assert fidelity(a, b) == pytest.approx(1.0 if i == j else 0.0, abs=1e-12)

    def test_coincidence_frames_match_bell_states(self):
        for label, state in bell_basis().items():
            assert np.allclose(coincidence_frame(label).amplitudes, state.amplitudes)
        assert coincidence_label(BellLabel.PSI_PLUS) == "↑̃↓̃"

    def test_phi_plus_channel_brackets(self):
        """With a Φ+ channel each bracket is a Pauli image of q over 2."""
        q = spin_state(0.6, 0.8j)
        q0, q1 = q.amplitudes
        expected = {
            BellLabel.PHI_PLUS: (q0, q1),
            BellLabel.PHI_MINUS: (q0, -q1),
            BellLabel.PSI_PLUS: (q1, q0),
            BellLabel.PSI_MINUS: (-q1, q0),
        }
        for label, amps in expected.items():
            assert np.allclose(bell_bracket(q, PHI_PLUS, label).amplitudes, np.array(amps) / 2)

    def test_measure_matches_bracket(self, rng):
        """Projection and closed-form bracket agree on random inputs."""
        for _ in range(200):
            qubit, channel = random_state(rng, 1), random_state(rng, 2)
            for outcome in bell_measure(total_state(qubit, channel)):
                bracket = bell_bracket(qubit, channel, outcome.label)
                assert np.allclose(outcome.bob_state_raw.amplitudes, bracket.amplitudes, atol=1e-12)
                assert outcome.probability == pytest.approx(bracket.norm_squared, abs=1e-12)

    def test_probabilities_sum_to_one(self, rng):
        for _ in range(200):
            outcomes = bell_measure(total_state(random_state(rng, 1), random_state(rng, 2)))
            assert sum(o.probability for o in outcomes) == pytest.approx(1.0, abs=1e-12)

    def test_maximally_entangled_channel_gives_equal_probabilities(self, rng):
        qubit = random_state(rng, 1)
        outcomes = bell_measure(total_state(qubit, PHI_PLUS))
        assert [o.label for o in outcomes] == list(BellLabel)
        for outcome in outcomes:
            assert outcome.probability == pytest.approx(0.25, abs=1e-12)


class TestFeedForward:
    """Test the feed-forward table, constraint checks and retuning."""

    def test_table_rows(self):
        phi_minus = feed_forward_constraints(BellLabel.PHI_MINUS).to_dict()
        assert phi_minus["flipping"] == "b = -a*"
        assert phi_minus["preserving"] == "a = b = 0"
        assert phi_minus["congruence"] == "CG1"
        psi_plus = feed_forward_constraints(BellLabel.PSI_PLUS).to_dict()
        assert psi_plus["preserving"] == "b = +a*"
        assert psi_plus["congruence"] == "CG2"

    def test_phi_plus_junctions(self):
        results = {label: check_constraints(PHI_JUNCTIONS, label) for label in BellLabel}
        assert results == {
            BellLabel.PHI_PLUS: True,
            BellLabel.PHI_MINUS: False,
            BellLabel.PSI_PLUS: False,
            BellLabel.PSI_MINUS: False,
        }

    def test_tunneling_conjugate(self):
        a = JunctionAmplitudes(t=0.6j, p=0, f=0.8)
        b = JunctionAmplitudes(t=-0.6j, p=0, f=0.8)
        assert check_constraints((a, b), BellLabel.PHI_PLUS)
        assert not check_constraints((a, replace(b, t=0.6j)), BellLabel.PHI_PLUS)

    def test_tolerance(self):
        a, b = PHI_JUNCTIONS
        nudged = JunctionAmplitudes(t=b.t + 1e-6, p=b.p, f=b.f)
        assert not check_constraints((a, nudged), BellLabel.PHI_PLUS, tol=1e-9)
        assert check_constraints((a, nudged), BellLabel.PHI_PLUS, tol=1e-5)

    def test_congruence_modulo_two_pi(self):
        assert check_congruence(ZERO_PHASES, Congruence.CG1)
        assert check_congruence(_unit_phases(phi12=2 * math.pi), Congruence.CG1)
        assert not check_congruence(_unit_phases(phi12=0.1), Congruence.CG1)
        assert check_congruence(_unit_phases(phi15=0.1), Congruence.CG1)
        assert not check_congruence(_unit_phases(phi15=0.1), Congruence.CG2)

    def test_congruences_on_ring_geometries(self):
        """Both congruences hold on the circular ring for any momentum."""
        for k in (0.0, 0.37, -1.2):
            phases = geometric_phases(k, default_geometry())
            assert check_congruence(phases, Congruence.CG1)
            assert check_congruence(phases, Congruence.CG2)
        skewed = geometric_phases(1.0, RingGeometry.from_lengths(range(1, 8)))
        assert not check_congruence(skewed, Congruence.CG1)
        assert not check_congruence(skewed, Congruence.CG2)

    def test_congruence_tolerance_is_absolute(self):
        """A micro-radian miss fails at tol 1e-9 even when the phase sums are large."""
        geometry = RingGeometry(361, 361 + 1e-6, 361, 361, 204, 408, 204)
        phases = geometric_phases(1.0, geometry)
        assert not check_congruence(phases, Congruence.CG1, tol=1e-9)
        assert check_congruence(phases, Congruence.CG1, tol=1e-5)

    def test_congruence_miss_is_reported(self):
        config = RingConfig(
            *PHI_JUNCTIONS,
            RingGeometry(361, 361 + 1e-6, 361, 361, 204, 408, 204),
            RingPhysics(energy=1.0),
        )
        report = teleport_qubit(UP, config)
        assert not any(r.congruence_satisfied for r in report.outcomes)

    def test_resolve_design_row(self):
        assert resolve_design_row(PHI_JUNCTIONS) == BellLabel.PHI_PLUS
        psi = JunctionAmplitudes(t=H, p=H, f=0)
        psi_minus = JunctionAmplitudes(t=H, p=-H, f=0)
        assert resolve_design_row((psi, psi)) == BellLabel.PSI_PLUS
        assert resolve_design_row((psi, psi_minus)) == BellLabel.PSI_MINUS

    def test_resolve_design_row_falls_back_to_family(self):
        """Junctions matching no row pick the dominant family."""
        a = JunctionAmplitudes(t=0.6, p=0, f=0.8)
        b = JunctionAmplitudes(t=0.6j, p=0, f=-0.8)
        assert resolve_design_row((a, b)) == BellLabel.PHI_MINUS

    @pytest.mark.parametrize("target", list(BellLabel))
    def test_retuned_junctions_satisfy_target_row(self, target):
        retuned = retune_junctions(PHI_JUNCTIONS, BellLabel.PHI_PLUS, target)
        assert check_constraints(retuned, target)
        for junction in retuned:
            assert junction.is_unitary()

    def test_retune_round_trip(self):
        retuned = retune_junctions(PHI_JUNCTIONS, BellLabel.PHI_PLUS, BellLabel.PSI_MINUS)
        back = retune_junctions(retuned, BellLabel.PSI_MINUS, BellLabel.PHI_PLUS)
        assert back == PHI_JUNCTIONS


class TestBobFinalState:
    """Test Bob's corrected state in both modes."""

    def test_zero_probability_outcome(self):
        outcome = BellOutcome(BellLabel.PHI_PLUS, 0.0, spin_state(0, 0))
        with pytest.raises(ZeroProbabilityError):
            bob_final_state(outcome, UP, PHI_JUNCTIONS, ZERO_PHASES, Mode.UNITARY)

    def test_unitary_mode_recovers_qubit(self, rng):
        for _ in range(50):
            qubit = random_state(rng, 1)
            for outcome in bell_measure(total_state(qubit, PHI_PLUS)):
                bob = bob_final_state(outcome, qubit, PHI_JUNCTIONS, ZERO_PHASES, Mode.UNITARY)
                assert fidelity(bob, qubit) == pytest.approx(1.0, abs=1e-12)

    def test_constraint_mode_with_retuned_junctions(self, rng):
        qubit = random_state(rng, 1)
        for outcome in bell_measure(total_state(qubit, PHI_PLUS)):
            retuned = retune_junctions(PHI_JUNCTIONS, BellLabel.PHI_PLUS, outcome.label)
            bob = bob_final_state(outcome, qubit, retuned, ZERO_PHASES, Mode.CONSTRAINT)
            assert fidelity(bob, qubit) == pytest.approx(1.0, abs=1e-12)

    def test_constraint_mode_rejects_wrong_row(self):
        outcome = bell_measure(total_state(UP, PHI_PLUS))[1]
        assert outcome.label == BellLabel.PHI_MINUS
        with pytest.raises(ConstraintViolationError, match="phi_minus"):
            bob_final_state(outcome, UP, PHI_JUNCTIONS, ZERO_PHASES, Mode.CONSTRAINT)

    def test_constraint_mode_rejects_broken_congruence(self):
        outcome = bell_measure(total_state(UP, PHI_PLUS))[0]
        with pytest.raises(ConstraintViolationError, match="CG1"):
            bob_final_state(outcome, UP, PHI_JUNCTIONS, _unit_phases(phi12=0.5), Mode.CONSTRAINT)


class TestTeleportQubit:
    """Test teleportation of a given qubit through ring B."""

    @pytest.mark.parametrize("mode", list(Mode))
    def test_phi_ring_teleports_perfectly(self, beam_splitter_config, rng, mode):
        qubit = random_state(rng, 1)
        report = teleport_qubit(qubit, beam_splitter_config, mode)
        assert report.design_row == BellLabel.PHI_PLUS
        assert report.channel_concurrence == pytest.approx(1.0, abs=1e-12)
        for record in report.outcomes:
            assert record.probability == pytest.approx(0.25, abs=1e-12)
            assert record.fidelity == pytest.approx(1.0, abs=1e-12)

    def test_phi_ring_flags(self, beam_splitter_config):
        report = teleport_qubit(UP, beam_splitter_config)
        flags = [r.constraint_satisfied for r in report.outcomes]
        assert flags == [True, False, False, False]
        assert all(r.congruence_satisfied for r in report.outcomes)

    def test_psi_ring(self, psi_config, rng):
        qubit = random_state(rng, 1)
        report = teleport_qubit(qubit, psi_config)
        assert report.design_row == BellLabel.PSI_PLUS
        assert [r.constraint_satisfied for r in report.outcomes] == [False, False, True, False]
        for record in report.outcomes:
            assert record.fidelity == pytest.approx(1.0, abs=1e-12)

    def test_pinned_design_row(self, beam_splitter_config):
        config = replace(beam_splitter_config, design_row=BellLabel.PHI_MINUS)
        assert teleport_qubit(UP, config).design_row == BellLabel.PHI_MINUS
        assert teleport_qubit(UP, beam_splitter_config, design_row=BellLabel.PSI_PLUS).design_row == BellLabel.PSI_PLUS

    def test_maximally_entangled_outcomes_reachable(self, psi_config):
        report = teleport_qubit(UP, psi_config)
        assert all(r.reachable for r in report.outcomes)

    def test_product_channel_has_unreachable_outcomes(self):
        """A |↑↑⟩ channel leaves the Ψ outcomes of a |↑⟩ qubit unreachable."""
        config = RingConfig(
            JunctionAmplitudes(t=1, p=0, f=0),
            JunctionAmplitudes(t=0, p=0, f=1),
            default_geometry(),
        )
        report = teleport_qubit(UP, config)
        assert report.channel_concurrence == pytest.approx(0.0, abs=1e-12)
        probabilities = [r.probability for r in report.outcomes]
        assert probabilities == pytest.approx([0.5, 0.5, 0.0, 0.0], abs=1e-12)
        for record in report.outcomes[2:]:
            assert record.fidelity is None
            assert record.bob_final.is_zero
        for record in report.outcomes[:2]:
            assert record.fidelity == pytest.approx(1.0, abs=1e-12)

    def test_tunneling_only_ring_is_degenerate(self):
        tunnel = JunctionAmplitudes(t=1, p=0, f=0)
        with pytest.raises(DegenerateStateError):
            teleport_qubit(UP, RingConfig(tunnel, tunnel, default_geometry()))

    def test_global_phase_invariance(self, rng):
        config = RingConfig(random_junction(rng), random_junction(rng), random_geometry(rng), RingPhysics(energy=0.2))
        qubit = random_state(rng, 1)
        reference = teleport_qubit(qubit, config)
        for k in range(8):
            rotated = teleport_qubit(qubit.scaled(cmath.exp(1j * k * math.pi / 4)), config)
            for a, b in zip(reference.outcomes, rotated.outcomes):
                assert a.probability == pytest.approx(b.probability, abs=1e-12)
                if a.fidelity is not None:
                    assert a.fidelity == pytest.approx(b.fidelity, abs=1e-9)

    def test_random_rings(self, rng):
        """Probabilities sum to one and fidelities stay in [0, 1] for random rings."""
        for _ in range(100):
            config = RingConfig(
                random_junction(rng),
                random_junction(rng),
                random_geometry(rng),
                RingPhysics(energy=rng.uniform(-1, 1)),
            )
            report = teleport_qubit(random_state(rng, 1), config)
            assert report.total_probability == pytest.approx(1.0, abs=1e-12)
            for record in report.outcomes:
                if record.fidelity is not None:
                    assert 0.0 <= record.fidelity <= 1.0


class TestRunProtocol:
    """Test end-to-end runs from two ring configurations."""

    @pytest.mark.parametrize("choice", list(QubitChoice))
    def test_symmetric_rings(self, beam_splitter_config, choice):
        report = run_protocol(beam_splitter_config, beam_splitter_config, choice)
        expected = UP if choice == QubitChoice.UP else DOWN
        assert np.allclose(report.qubit.amplitudes, expected.amplitudes)
        assert report.qubit_choice == choice
        assert report.qubit_probability == pytest.approx(0.5)
        for record in report.outcomes:
            assert record.probability == pytest.approx(0.25, abs=1e-12)
            assert record.fidelity == pytest.approx(1.0, abs=1e-12)

    def test_degenerate_ring_a(self, beam_splitter_config, audit_service):
        transparent = JunctionAmplitudes(t=0, p=1, f=0)
        config_a = RingConfig(transparent, transparent, default_geometry())
        with pytest.raises(DegenerateStateError, match="ring_a"):
            run_protocol(config_a, beam_splitter_config, audit_service=audit_service)
        assert len(audit_service.entries_for("degenerate_ring")) == 1
        assert get_audit_service().entries_for("degenerate_ring") == []

    def test_degenerate_ring_b(self, beam_splitter_config):
        transparent = JunctionAmplitudes(t=0, p=1, f=0)
        config_b = RingConfig(transparent, transparent, default_geometry())
        with pytest.raises(DegenerateStateError, match="ring_b"):
            run_protocol(beam_splitter_config, config_b)

    def test_report_dict(self, beam_splitter_config):
        data = run_protocol(beam_splitter_config, beam_splitter_config).to_dict()
        assert data["mode"] == "constraint"
        assert data["qubit_choice"] == "up"
        assert [o["label"] for o in data["outcomes"]] == BellLabel.values()


def _row_junctions(rng, label: BellLabel) -> tuple[JunctionAmplitudes, JunctionAmplitudes]:
    """Random complex junction pair satisfying the feed-forward row of ``label``."""
    magnitude = rng.uniform(0.2, 0.9)
    t = magnitude * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
    active = math.sqrt(1 - magnitude ** 2) * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
    partner = label.sign * active.conjugate()
    if label.is_phi:
        return JunctionAmplitudes(t=t, p=0, f=active), JunctionAmplitudes(t=t.conjugate(), p=0, f=partner)
    return JunctionAmplitudes(t=t, p=active, f=0), JunctionAmplitudes(t=t.conjugate(), p=partner, f=0)


class TestFeedForwardRows:
    """Every row of the feed-forward table recovers the qubit for both D2A choices."""

    @pytest.mark.parametrize("choice", list(QubitChoice))
    @pytest.mark.parametrize("label", list(BellLabel))
    def test_random_rings_on_row(self, label, choice, rng):
        for _ in range(50):
            config_a = RingConfig(
                random_junction(rng),
                random_junction(rng),
                random_geometry(rng),
                RingPhysics(energy=rng.uniform(-1, 1)),
            )
            config_b = RingConfig(
                *_row_junctions(rng, label),
                default_geometry(),
                RingPhysics(energy=rng.uniform(0.1, 1.0)),
            )
            report = run_protocol(config_a, config_b, choice)

            assert report.design_row == label
            assert report.total_probability == pytest.approx(1.0, abs=1e-12)
            for record in report.outcomes:
                assert record.constraint_satisfied == (record.label == label)
                assert record.congruence_satisfied
                if record.reachable:
                    assert record.fidelity == pytest.approx(1.0, abs=1e-12)

    def test_down_choice_superposition(self, rng):
        """The ↓ choice leaves Alice a superposition that still teleports exactly."""
        config_a = RingConfig(
            JunctionAmplitudes(t=0.6, p=0.6, f=math.sqrt(0.28)),
            JunctionAmplitudes(t=0.6, p=0.8, f=0),
            default_geometry(),
        )
        config_b = RingConfig(
            *_row_junctions(rng, BellLabel.PSI_MINUS), default_geometry(), RingPhysics(energy=0.4)
        )
        report = run_protocol(config_a, config_b, QubitChoice.DOWN)

        assert 0.01 < abs(report.qubit[0]) ** 2 < 0.99
        assert all(r.fidelity == pytest.approx(1.0, abs=1e-12) for r in report.outcomes if r.reachable)


class TestOutcomeSampler:
    """Test seeded outcome sampling."""

    def test_deterministic(self, beam_splitter_config):
        report = run_protocol(beam_splitter_config, beam_splitter_config)
        first = OutcomeSampler(7).draw(report, 1000)
        second = OutcomeSampler(7).draw(report, 1000)
        assert first == second
        assert sum(first.values()) == 1000
        assert list(first) == list(BellLabel)


class TestProtocolService:
    """Test the protocol service wrapper."""

    def test_run_without_shots(self, run_config, audit_service):
        report = ProtocolService(audit_service).run(run_config)
        assert all(r.sampled_count is None for r in report.outcomes)
        assert len(audit_service.entries_for("outcome_evaluated")) == 4

    def test_run_with_shots(self, run_config, audit_service):
        report = ProtocolService(audit_service).run(replace(run_config, shots=400))
        assert sum(r.sampled_count for r in report.outcomes) == 400

    def test_unitary_mode(self, run_config, audit_service):
        report = ProtocolService(audit_service).run(replace(run_config, mode=Mode.UNITARY))
        assert report.mode == Mode.UNITARY
        assert all(r.fidelity == pytest.approx(1.0, abs=1e-12) for r in report.outcomes)

    def test_basis_qubit_choice(self, run_config, audit_service):
        report = ProtocolService(audit_service).run(replace(run_config, qubit_choice=QubitChoice.DOWN))
        assert fidelity(report.qubit, basis_state("d")) == pytest.approx(1.0)

    def test_degenerate_ring_goes_to_injected_audit(self, run_config, audit_service):
        transparent = JunctionAmplitudes(t=0, p=1, f=0)
        config = replace(run_config, ring_b=RingConfig(transparent, transparent, default_geometry()))
        with pytest.raises(DegenerateStateError, match="ring_b"):
            ProtocolService(audit_service).run(config)
        assert [e.details["ring"] for e in audit_service.entries_for("degenerate_ring")] == ["ring_b"]
        assert get_audit_service().entries_for("degenerate_ring") == []

import numpy as np
import pytest

from cereduce.model import (
    ConditionalEvolution,
    Instrument,
    OutcomeImpossibleError,
    OutputMap,
    condition,
    output_eval,
    step_unnormalized,
    trajectory_probability,
    validate_ce,
)
from cereduce.operators import superop_from_kraus
from cereduce.reduction import random_ce, random_density
from cereduce.zoo import ising_chain, measured_quantum_walk
from conftest import proj


def projective_z_qubit(scale=1.0):
    maps = {
        "0": superop_from_kraus([np.sqrt(scale) * proj(2, 0)]),
        "1": superop_from_kraus([np.sqrt(scale) * proj(2, 1)]),
    }
    return ConditionalEvolution(
        instrument=Instrument(outcomes=("0", "1"), maps=maps),
        output=OutputMap(names=("identity",), observables=(np.eye(2, dtype=complex),)),
    )


def identity_ce(n=2):
    return ConditionalEvolution(
        instrument=Instrument(outcomes=("0",), maps={"0": superop_from_kraus([np.eye(n)])}),
        output=OutputMap(names=("identity",), observables=(np.eye(n, dtype=complex),)),
    )


PLUS = np.full((2, 2), 0.5, dtype=complex)


class TestValidate:
    def test_projective_measurement_passes(self):
        assert validate_ce(projective_z_qubit()).ok

    def test_scaled_instrument_fails_normalization(self):
        rep = validate_ce(projective_z_qubit(scale=0.5))
        assert not rep.ok
        assert rep.normalization_residual == pytest.approx(0.5 * np.sqrt(2))

    def test_ising_model_passes(self):
        assert validate_ce(ising_chain(4, 0.5, 0.3)).ok

    def test_missing_identity_flagged(self, paulis):
        ce = ConditionalEvolution(
            instrument=projective_z_qubit().instrument,
            output=OutputMap(names=("z",), observables=(paulis["z"],)),
        )
        rep = validate_ce(ce)
        assert not rep.identity_present and not rep.ok


class TestStepUnnormalized:
    def test_identity_instrument(self, rng):
        ce = identity_ce()
        rho = random_density(2, rng)
        assert np.allclose(step_unnormalized(ce, rho, "0"), rho)

    def test_hadamard_walk_first_step(self):
        H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        ce = measured_quantum_walk(2, U=H, check_generic=False)
        out = step_unnormalized(ce, proj(2, 0), "0")
        assert np.allclose(out, PLUS)
        assert np.trace(out) == pytest.approx(1.0)

    def test_trace_summation_oracle(self, rng):
        ce = random_ce(3, 3, 2, rng)
        for _ in range(5):
            rho = random_density(3, rng)
            total = sum(np.trace(step_unnormalized(ce, rho, k)).real for k in ce.outcomes)
            assert total == pytest.approx(np.trace(rho).real, abs=1e-12)

    def test_unknown_outcome(self):
        with pytest.raises(ValueError):
            step_unnormalized(identity_ce(), np.eye(2) / 2, "nope")


class TestCondition:
    def test_projective_certain_outcome(self):
        state, p = condition(projective_z_qubit(), proj(2, 0), "0")
        assert p == pytest.approx(1.0)
        assert np.allclose(state, proj(2, 0))

    def test_born_rule_half(self):
        state, p = condition(projective_z_qubit(), PLUS, "1")
        assert p == pytest.approx(0.5)
        assert np.allclose(state, proj(2, 1))

    def test_impossible_outcome(self):
        with pytest.raises(OutcomeImpossibleError):
            condition(projective_z_qubit(), proj(2, 0), "1")


class TestTrajectoryProbability:
    def test_empty_sequence(self, rng):
        ce = random_ce(2, 2, 1, rng)
        assert trajectory_probability(ce, random_density(2, rng), []) == pytest.approx(1.0)

    def test_hadamard_walk(self):
        H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        ce = measured_quantum_walk(2, U=H, check_generic=False)
        assert trajectory_probability(ce, proj(2, 0), ["0", "0"]) == pytest.approx(0.5)

    def test_exhaustive_length2_sum(self, rng):
        import itertools

        ce = random_ce(4, 4, 1, rng)
        rho0 = random_density(4, rng)
        total = sum(
            trajectory_probability(ce, rho0, seq)
            for seq in itertools.product(ce.outcomes, repeat=2)
        )
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_chain_rule(self, rng):
        ce = random_ce(2, 2, 1, rng)
        rho0 = random_density(2, rng)
        s1, s2 = ["0", "1"], ["1", "0"]
        p1 = trajectory_probability(ce, rho0, s1)
        rho_mid = rho0
        for k in s1:
            rho_mid = step_unnormalized(ce, rho_mid, k)
        rho_mid = rho_mid / np.trace(rho_mid)
        assert trajectory_probability(ce, rho0, s1 + s2) == pytest.approx(
            p1 * trajectory_probability(ce, rho_mid, s2), rel=1e-10
        )


class TestOutputEval:
    def test_identity_only(self, rng):
        ce = identity_ce()
        assert output_eval(ce, random_density(2, rng)) == pytest.approx([1.0])

    def test_sigma_z(self, paulis):
        ce = ConditionalEvolution(
            instrument=identity_ce().instrument,
            output=OutputMap(names=("identity", "z"), observables=(np.eye(2, dtype=complex), paulis["z"])),
        )
        assert output_eval(ce, proj(2, 0)) == pytest.approx([1.0, 1.0])

    def test_scaling_linearity(self, paulis):
        ce = ConditionalEvolution(
            instrument=identity_ce().instrument,
            output=OutputMap(names=("identity", "x"), observables=(np.eye(2, dtype=complex), paulis["x"])),
        )
        assert output_eval(ce, 0.3 * PLUS) == pytest.approx([0.3, 0.3])

    def test_linearity_random_combinations(self, rng):
        ce = random_ce(3, 2, 3, rng)
        X = random_density(3, rng)
        Y = random_density(3, rng)
        a, b = 0.7, -1.3
        assert output_eval(ce, a * X + b * Y) == pytest.approx(
            a * output_eval(ce, X) + b * output_eval(ce, Y)
        )


def test_positivity_propagation(rng):
    ce = random_ce(3, 2, 1, rng)
    rho = random_density(3, rng)
    for k in ce.outcomes:
        out = step_unnormalized(ce, rho, k)
        assert np.linalg.eigvalsh((out + out.conj().T) / 2)[0] >= -1e-10


def test_split_residual_checked():
    ce = ising_chain(4, 0.0, 0.3)
    assert ce.split_residual() < 1e-12

"""Propagator accuracy, conservation audits and the integrator cross-check."""

import numpy as np
import pytest

from edgemem.evolution import (
    IntegrationError,
    IntegratorConfig,
    SamplingSchedule,
    evolve_and_sample,
    step,
)
from edgemem.model import (
    LogicalPrep,
    ModelParams,
    build_hamiltonian,
    edge_operators,
    prepare_state,
    sample_disorder,
)
from edgemem.paulis import (
    PLUS,
    UP,
    PauliString,
    StateVector,
    WeightedPauliSum,
)


def dense_propagate(h, v0, t):
    """Independent oracle: dense eigendecomposition propagation."""
    w, u = np.linalg.eigh(h.to_dense())
    return u @ (np.exp(-1j * w * t) * (u.conj().T @ v0.amplitudes))


def model_hamiltonian(n=6, J=0.1, delta=1.0, seed=99, index=0):
    params = ModelParams(n_sites=n, J=J, delta=delta, master_seed=seed)
    return build_hamiltonian(params, sample_disorder(params, index))


def edge_observables(n):
    return [(label, p) for label, _, p in
            edge_operators(n).correlation_observables()]


def random_state(n, seed=1):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return StateVector(n, amps / np.linalg.norm(amps))


class TestStep:
    def test_zero_hamiltonian_is_exact_identity(self):
        h = WeightedPauliSum(((0.0, PauliString.x(3, 1)),))
        v = random_state(3)
        out = step(h, v)
        np.testing.assert_array_equal(out.amplitudes, v.amplitudes)

    def test_single_qubit_rabi_oscillation(self):
        # H = X on one qubit: <Z>(t) = cos(2t), a closed-form two-level check.
        h = WeightedPauliSum(((1.0, PauliString.x(1, 1)),))
        v0 = StateVector.computational(1, 0)
        schedule = SamplingSchedule(t_max=10.0, sample_stride=1)
        series = evolve_and_sample(h, v0, schedule, [("Z", PauliString.z(1, 1))])
        np.testing.assert_allclose(series.values["Z"], np.cos(2.0 * series.times),
                                   atol=1e-8)

    def test_matches_dense_oracle_at_t10(self):
        h = model_hamiltonian()
        v0 = random_state(6, seed=5)
        current = v0
        for _ in range(100):
            current = step(h, current)
        target = dense_propagate(h, v0, 10.0)
        fidelity = abs(np.vdot(target, current.amplitudes)) ** 2
        assert fidelity >= 1.0 - 1e-8

    def test_rk4_reference_agrees_with_krylov(self):
        h = model_hamiltonian()
        v0 = prepare_state(LogicalPrep.from_qubits(PLUS, UP), 6)
        krylov = rk4 = v0
        cfg_rk4 = IntegratorConfig(method="rk4-reference")
        for _ in range(100):
            krylov = step(h, krylov)
            rk4 = step(h, rk4, cfg_rk4)
        assert np.linalg.norm(krylov.amplitudes - rk4.amplitudes) <= 1e-6

    def test_forward_backward_returns_initial(self):
        h = model_hamiltonian()
        reverse = WeightedPauliSum(tuple((-c, p) for c, p in h.terms))
        v0 = random_state(6, seed=8)
        current = v0
        for _ in range(100):
            current = step(h, current)
        for _ in range(100):
            current = step(reverse, current)
        assert np.linalg.norm(current.amplitudes - v0.amplitudes) <= 1e-7

    def test_krylov_exhaustion_raises_with_diagnostics(self):
        h = model_hamiltonian(n=6, delta=3.0)
        cfg = IntegratorConfig(dt=5.0, max_krylov_dim=4)
        with pytest.raises(IntegrationError) as err:
            step(h, random_state(6, seed=2), cfg)
        assert "residual_estimate" in err.value.diagnostics

    def test_rejects_unnormalized_state(self):
        h = model_hamiltonian()
        v = StateVector(6, np.ones(64))
        with pytest.raises(ValueError):
            step(h, v)


class TestEvolveAndSample:
    def test_time_zero_sample_matches_preparation(self):
        n = 6
        h = model_hamiltonian(n=n)
        v0 = prepare_state(LogicalPrep.from_qubits(UP, UP), n)
        series = evolve_and_sample(h, v0, SamplingSchedule(t_max=1.0, sample_stride=10),
                                   edge_observables(n))
        from edgemem.paulis import expectation
        assert series.times[0] == 0.0
        for label, _, p in edge_operators(n).correlation_observables():
            assert series.values[label][0] == expectation(p, v0)

    def test_unperturbed_edge_expectations_constant(self):
        # Zero Ising coupling: every edge-operator trace is conserved.
        n = 6
        h = model_hamiltonian(n=n, J=0.0, delta=2.0)
        v0 = prepare_state(LogicalPrep.from_qubits(PLUS, UP), n)
        series = evolve_and_sample(
            h, v0, SamplingSchedule(t_max=100.0, sample_stride=10),
            edge_observables(n))
        for label in series.values:
            trace = series.values[label]
            assert np.max(np.abs(trace - trace[0])) <= 1e-8, label

    def test_energy_and_norm_conserved(self):
        n = 8
        h = model_hamiltonian(n=n, J=0.1, delta=1.0)
        v0 = prepare_state(LogicalPrep.from_qubits(PLUS, UP), n)
        series = evolve_and_sample(
            h, v0, SamplingSchedule(t_max=100.0, sample_stride=10),
            edge_observables(n))
        assert np.max(np.abs(series.norms - 1.0)) <= 1e-8
        rel_drift = np.max(np.abs(series.energies - series.energies[0])) \
            / abs(series.energies[0])
        assert rel_drift <= 1e-8

    def test_values_stay_bounded(self):
        n = 6
        h = model_hamiltonian(n=n)
        v0 = prepare_state(LogicalPrep.from_qubits(UP, UP), n)
        series = evolve_and_sample(h, v0, SamplingSchedule(t_max=20.0, sample_stride=10),
                                   edge_observables(n))
        for trace in series.values.values():
            assert np.all(np.abs(trace) <= 1.0 + 1e-12)

    def test_sampling_grid(self):
        h = model_hamiltonian()
        v0 = prepare_state(LogicalPrep.from_qubits(UP, UP), 6)
        series = evolve_and_sample(h, v0, SamplingSchedule(t_max=3.0, sample_stride=10),
                                   edge_observables(6))
        np.testing.assert_array_equal(series.times, [0.0, 1.0, 2.0, 3.0])

    def test_incompatible_t_max_raises(self):
        with pytest.raises(ValueError):
            SamplingSchedule(t_max=1.05, sample_stride=10).n_steps(0.1)

    def test_csv_round_trip(self, tmp_path):
        h = model_hamiltonian()
        v0 = prepare_state(LogicalPrep.from_qubits(UP, UP), 6)
        series = evolve_and_sample(h, v0, SamplingSchedule(t_max=2.0, sample_stride=10),
                                   edge_observables(6))
        path = tmp_path / "series.csv"
        series.write_csv(path)
        lines = path.read_text().strip().split("\n")
        header = lines[0].split(",")
        assert header[0] == "t"
        assert header[1:7] == ["X_L", "Y_L", "Z_L", "X_R", "Y_R", "Z_R"]
        assert header[-2:] == ["norm", "energy"]
        assert len(lines) == 1 + 3
        # repr round-trip keeps the values exact
        first = [float(x) for x in lines[1].split(",")]
        assert first[0] == 0.0
        assert first[1] == series.values["X_L"][0]

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from qaccredit import clifford
from qaccredit.accredit import (
    AccreditationReport,
    ExecutionError,
    ProtocolParams,
    achieved_theta,
    apply_qotp,
    assemble_trap,
    count_trap_configurations,
    generate_trap,
    pad_circuit,
    required_traps,
    run_protocol,
    trap_configurations,
)
from qaccredit.analysis import p_inc_exact
from qaccredit.circuit import (
    Circuit,
    EntanglingCycle,
    OneQubitCycle,
    PauliString,
    build_ghz_layout,
    build_qft_layout,
    build_random_layout,
)
from qaccredit.noise import DeviceProfile, NoiseModel, from_device_profile
from qaccredit.statevector import NoisySimulator, ideal_distribution


def test_required_traps_values():
    assert required_traps(0.13, 0.95) == 437
    assert required_traps(0.09, 0.95) == 911
    assert required_traps(0.5, 0.5) == math.ceil(8 * math.log(4))
    v = required_traps(0.2, 0.9)
    assert achieved_theta(v, 0.9) <= 0.2 < achieved_theta(v - 1, 0.9)


@pytest.mark.parametrize("theta,alpha", [(0, 0.95), (1, 0.95), (0.1, 0), (0.1, 1), (-0.2, 0.5)])
def test_required_traps_rejects(theta, alpha):
    with pytest.raises(ValueError):
        required_traps(theta, alpha)


def test_params():
    assert ProtocolParams(0.13, 0.95).traps == 437
    assert ProtocolParams(0.13, 0.95, v=12).traps == 12
    with pytest.raises(ValueError):
        ProtocolParams(0.13, 0.95, v=0)


def test_trap_shape_example():
    target = Circuit.from_layers(3, [OneQubitCycle.identity(3)] * 2, [EntanglingCycle.of((0, 1))])
    trap = assemble_trap(target, ["SHH"], 1)
    assert trap.circuit.entangling_cycles == target.entangling_cycles
    assert clifford.outcome_space(trap.circuit) == (0, [])
    with pytest.raises(ValueError):
        assemble_trap(target, [], 0)
    with pytest.raises(ValueError):
        assemble_trap(target, ["SHH"], 2)


def test_every_configuration_is_deterministic():
    for target in [build_ghz_layout(3), build_random_layout(3, 3, 4)]:
        configs = list(trap_configurations(target))
        assert len(configs) == count_trap_configurations(target)
        for sel, t in configs:
            assert clifford.outcome_space(assemble_trap(target, sel, t).circuit) == (0, [])


def test_selection_frequencies():
    target = build_random_layout(4, 3, 2)
    rng = np.random.default_rng(0)
    counts = np.zeros(2)
    ts = 0
    trials = 10_000
    for _ in range(trials):
        trap = generate_trap(target, rng, qotp=False)
        counts[int(trap.selections[0][0] == "S")] += 1
        ts += trap.t
    sigma = math.sqrt(trials) / 2
    assert abs(counts[0] - trials / 2) <= 4 * sigma
    assert abs(ts - trials / 2) <= 4 * sigma


def test_depth_preserved():
    rng = np.random.default_rng(1)
    for target in [build_ghz_layout(6), build_qft_layout(3), build_random_layout(5, 5, 1)]:
        trap = generate_trap(target, rng)
        assert trap.circuit.depth() == target.depth()
        assert apply_qotp(target, rng).depth() == target.depth()


def test_identity_pad_is_noop():
    target = build_random_layout(3, 3, 9)
    same = pad_circuit(target, [PauliString.identity(3)] * 3)
    assert same == target
    with pytest.raises(ValueError):
        pad_circuit(target, [PauliString.identity(3)] * 2)


def test_padded_traps_all_zero():
    rng = np.random.default_rng(2)
    target = build_random_layout(4, 4, 5)
    for _ in range(1000):
        assert clifford.stabilizer_simulate(generate_trap(target, rng).circuit, rng) == 0


def test_last_pad_is_z_type():
    rng = np.random.default_rng(3)
    for _ in range(100):
        trap = generate_trap(build_ghz_layout(3), rng)
        assert trap.qotp[-1].x == 0
        assert len(trap.metadata()["qotp"]) == trap.circuit.m


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 4), m=st.integers(1, 4), seed=st.integers(0, 10**6))
def test_pad_keeps_distribution(n, m, seed):
    target = build_random_layout(n, m, seed)
    padded = apply_qotp(target, np.random.default_rng(seed))
    assert 0.5 * np.abs(ideal_distribution(target) - ideal_distribution(padded)).sum() <= 1e-10


def _flip_all(circuit, shots, rng):
    return [(1 << circuit.n) - 1] * shots


def test_noiseless_run():
    target = build_ghz_layout(3)
    rep = run_protocol(target, ProtocolParams(0.3, 0.9, v=50, seed=1), NoisySimulator(NoiseModel.noiseless(3, target.m)), 200)
    assert rep.n_inc == 0 and rep.bound == 0 and rep.nontrivial
    assert set(rep.target_samples) <= {"000", "111"} and sum(rep.target_samples.values()) == 200
    assert len(rep.trap_outcomes) == 50


def test_flip_all_executor_is_trivial():
    rep = run_protocol(build_ghz_layout(2), ProtocolParams(0.3, 0.9, v=20), _flip_all)
    assert rep.bound == 2 and not rep.nontrivial
    assert "trivial" in rep.summary()


def test_estimate_close_to_exact():
    cz = EntanglingCycle.of((0, 1))
    target = Circuit.from_layers(2, [OneQubitCycle.identity(2)] * 2, [cz])
    noise = NoiseModel.from_slot_mappings(2, [{"XI": 0.2}, {}, {}])
    exact = p_inc_exact(target, noise)
    assert exact == pytest.approx(0.19999999999999996, abs=1e-12)
    rep = run_protocol(target, ProtocolParams(0.1, 0.95, v=2000, seed=4), NoisySimulator(noise))
    assert abs(rep.p_inc_estimate - exact) <= 0.05


def test_parallel_matches_sequential():
    target = build_random_layout(3, 3, 1)
    sim = NoisySimulator(from_device_profile(DeviceProfile(0.01, 0.05, 0.02), target))
    params = ProtocolParams(0.3, 0.9, v=60, seed=7)
    a = run_protocol(target, params, sim, 50)
    b = run_protocol(target, params, sim, 50, max_workers=4)
    assert a.to_dict() == b.to_dict()
    assert a.trap_outputs == b.trap_outputs


def test_execution_error_carries_index():
    calls = []

    def flaky(circuit, shots, rng):
        calls.append(1)
        if len(calls) == 3:
            raise RuntimeError("device offline")
        return [0] * shots

    with pytest.raises(ExecutionError) as info:
        run_protocol(build_ghz_layout(2), ProtocolParams(0.3, 0.9, v=5), flaky)
    assert info.value.index == 2
    assert "device offline" in str(info.value)


def test_target_position_uniform():
    target = Circuit.from_layers(1, [OneQubitCycle.identity(1)], [])
    zero = lambda c, shots, rng: [0] * shots
    v = 4
    counts = np.zeros(v + 1)
    for seed in range(2000):
        counts[run_protocol(target, ProtocolParams(0.5, 0.5, v=v, seed=seed), zero).target_position] += 1
    assert chisquare(counts).pvalue > 1e-3


def test_report_key_order_and_summary():
    rep = AccreditationReport(0.13, 0.95, 100, 3, 7, {"00": 5}, [0, 1] * 50, n=2)
    assert list(rep.to_dict()) == [
        "theta", "alpha", "v", "n_inc", "bound", "nontrivial", "target_position", "target_samples", "trap_outcomes",
    ]
    assert rep.bound == pytest.approx(0.06)
    assert "warning" in rep.summary()
    assert "warning" not in AccreditationReport(0.13, 0.95, 437, 0, 0, {}, [0] * 437).summary()

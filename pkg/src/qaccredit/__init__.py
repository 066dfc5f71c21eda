"""Trap-based accreditation of noisy quantum circuit outputs."""

from .accredit import (
    AccreditationReport,
    ProtocolParams,
    TrapCircuit,
    apply_qotp,
    generate_trap,
    required_traps,
    run_protocol,
)
from .circuit import (
    Circuit,
    EntanglingCycle,
    Gate1Q,
    OneQubitCycle,
    PauliString,
    build_ghz_layout,
    build_qft_layout,
    build_random_layout,
)
from .noise import CyclePauliNoise, DeviceProfile, NoiseModel, from_device_profile
from .statevector import NoisySimulator

__all__ = [
    "AccreditationReport",
    "Circuit",
    "CyclePauliNoise",
    "DeviceProfile",
    "EntanglingCycle",
    "Gate1Q",
    "NoiseModel",
    "NoisySimulator",
    "OneQubitCycle",
    "PauliString",
    "ProtocolParams",
    "TrapCircuit",
    "apply_qotp",
    "build_ghz_layout",
    "build_qft_layout",
    "build_random_layout",
    "from_device_profile",
    "generate_trap",
    "required_traps",
    "run_protocol",
]

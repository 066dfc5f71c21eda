"""Seeded circuits and sparse noise models shared by the test modules."""

from __future__ import annotations

import numpy as np

from qaccredit import clifford
from qaccredit.accredit import assemble_trap, trap_configurations
from qaccredit.circuit import Circuit, Gate1Q, OneQubitCycle, PauliString, haar_su2, random_entangling_cycle
from qaccredit.noise import CyclePauliNoise, NoiseModel


def random_target(rng: np.random.Generator, n: int, m: int) -> Circuit:
    u = [OneQubitCycle(tuple(Gate1Q.generic(haar_su2(rng)) for _ in range(n))) for _ in range(m)]
    cz = [random_entangling_cycle(n, rng) for _ in range(m - 1)]
    return Circuit.from_layers(n, u, cz)


def random_pauli(rng: np.random.Generator, n: int) -> PauliString:
    while True:
        p = PauliString(n, int(rng.integers(0, 1 << n)), int(rng.integers(0, 1 << n)))
        if not p.is_identity():
            return p


def sparse_noise(rng: np.random.Generator, circuit: Circuit, max_terms: int = 2, q_max: float = 0.08, flips: bool = True) -> NoiseModel:
    n, m = circuit.n, circuit.m
    slots = []
    for _ in range(m + 1):
        k = int(rng.integers(0, max_terms + 1))
        slots.append(CyclePauliNoise(n, tuple((random_pauli(rng, n), float(rng.uniform(0, q_max))) for _ in range(k))))
    prep = tuple(float(x) for x in rng.uniform(0, 0.03, n)) if flips and rng.random() < 0.3 else ()
    meas = tuple(float(x) for x in rng.uniform(0, 0.03, n)) if flips and rng.random() < 0.5 else ()
    return NoiseModel(n, tuple(slots), prep, meas)


def exact_instances(count: int = 100, seed: int = 2024):
    """(target, noise) pairs with n <= 3 and m <= 3."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n, m = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        target = random_target(rng, n, m)
        out.append((target, sparse_noise(rng, target)))
    return out


def aligned_noise(rng: np.random.Generator, layout: Circuit, q_max: float = 0.1) -> NoiseModel:
    """Noise whose slot j+1 undoes slot j for one trap configuration, so cancellations occur."""
    n, m = layout.n, layout.m
    configs = list(trap_configurations(layout))
    sel, t = configs[int(rng.integers(0, len(configs)))]
    trap = assemble_trap(layout, sel, t).circuit
    j = int(rng.integers(0, m))
    p = random_pauli(rng, n)
    img = clifford.conjugate(trap.one_qubit_cycles[j], p)
    if j < m - 1:
        img = clifford.conjugate(trap.entangling_cycles[j], img)
    slots = [CyclePauliNoise(n) for _ in range(m + 1)]
    slots[j] = CyclePauliNoise(n, ((p, float(rng.uniform(0.01, q_max))),))
    slots[j + 1] = CyclePauliNoise(n, ((img, float(rng.uniform(0.01, q_max))),))
    return NoiseModel(n, tuple(slots))

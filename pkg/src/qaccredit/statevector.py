"""Dense reference engines.

Statevector simulation gives ideal output distributions of arbitrary circuits
up to ``STATEVECTOR_CAP`` qubits.  The density-matrix engine (``DENSITY_CAP``
qubits) is the exact oracle for noisy runs and for Pauli twirling.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import unitary_group

from . import clifford
from .circuit import Circuit, EntanglingCycle, OneQubitCycle, PauliString, all_paulis, bitstring
from .noise import NoiseModel

STATEVECTOR_CAP = 14
DENSITY_CAP = 4
NORM_TOL = 1e-10


class ScaleError(ValueError):
    pass


def _bit_table(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    return (idx[:, None] >> np.arange(n)[None, :]) & 1


def _cz_signs(n: int, cycle: EntanglingCycle) -> np.ndarray:
    bits = _bit_table(n)
    parity = np.zeros(1 << n, dtype=np.int64)
    for a, b in cycle.pairs:
        parity ^= bits[:, a] & bits[:, b]
    return 1 - 2 * parity


def _apply_1q(psi: np.ndarray, n: int, q: int, u: np.ndarray) -> np.ndarray:
    t = psi.reshape((2,) * n)
    ax = n - 1 - q
    t = np.moveaxis(np.tensordot(u, t, axes=([1], [ax])), 0, ax)
    return t.reshape(-1)


def apply_cycle(psi: np.ndarray, n: int, cycle: OneQubitCycle | EntanglingCycle) -> np.ndarray:
    if isinstance(cycle, OneQubitCycle):
        for q, g in enumerate(cycle.gates):
            if not g.is_identity:
                psi = _apply_1q(psi, n, q, g.matrix)
    else:
        psi = psi * _cz_signs(n, cycle)
    return psi


def apply_pauli(psi: np.ndarray, n: int, p: PauliString) -> np.ndarray:
    if p.is_identity():
        return psi
    idx = np.arange(1 << n)
    zpar = np.array([bin(v).count("1") & 1 for v in (idx & p.z)])
    psi = psi * (1 - 2 * zpar)
    return psi[idx ^ p.x]


def final_state(circuit: Circuit, faults: Mapping[int, PauliString] | None = None) -> np.ndarray:
    """Statevector before measurement, optionally with Paulis inserted at fault slots."""
    n = circuit.n
    if n > STATEVECTOR_CAP:
        raise ScaleError(f"n={n} exceeds the statevector cap {STATEVECTOR_CAP}; use sampling instead")
    circuit.require_canonical()
    faults = faults or {}
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    psi = apply_pauli(psi, n, faults.get(0, PauliString.identity(n)))
    m = circuit.m
    u, cz = circuit.one_qubit_cycles, circuit.entangling_cycles
    for j in range(m):
        psi = apply_cycle(psi, n, u[j])
        if j < m - 1:
            psi = apply_cycle(psi, n, cz[j])
        if j + 1 in faults:
            psi = apply_pauli(psi, n, faults[j + 1])
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > NORM_TOL:
            raise ArithmeticError(f"state norm drifted to {norm} after cycle {j}")
    return psi


def ideal_distribution(circuit: Circuit) -> np.ndarray:
    """Born-rule probabilities indexed by outcome integer (qubit 0 = LSB)."""
    probs = np.abs(final_state(circuit)) ** 2
    return probs / probs.sum()


def distribution_to_csv(probs: Sequence[float], n: int) -> str:
    lines = ["bitstring,probability"]
    for k, p in enumerate(probs):
        lines.append(f"{bitstring(k, n)},{float(p)!r}")
    return "\n".join(lines) + "\n"


def apply_flips(probs: np.ndarray, n: int, flips: Sequence[float]) -> np.ndarray:
    """Classical independent bit flips on an outcome distribution."""
    out = np.asarray(probs, dtype=float).copy()
    idx = np.arange(1 << n)
    for q, p in enumerate(flips):
        if p:
            out = (1 - p) * out + p * out[idx ^ (1 << q)]
    return out


# ------------------------------------------------------------ density matrix


@dataclass
class DensityResult:
    rho: np.ndarray
    probs: np.ndarray


def _full_1q(n: int, cycle: OneQubitCycle) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for q in reversed(range(n)):
        out = np.kron(out, cycle.gates[q].matrix)
    return out


def _check_density(rho: np.ndarray, where: str) -> None:
    if np.max(np.abs(rho - rho.conj().T)) > NORM_TOL:
        raise ArithmeticError(f"density matrix lost hermiticity {where}")
    if abs(np.trace(rho).real - 1.0) > NORM_TOL:
        raise ArithmeticError(f"density matrix trace drifted {where}")


def _pauli_channel(rho: np.ndarray, dist, n: int) -> np.ndarray:
    out = dist.identity_prob * rho
    for p, q in dist.entries:
        pm = p.matrix()
        out = out + q * (pm @ rho @ pm.conj().T)
    return out


def noisy_density_evolution(circuit: Circuit, noise: NoiseModel) -> DensityResult:
    """Exact noisy run: prep flips, slot Pauli channels between cycles, measurement flips."""
    n = circuit.n
    if n > DENSITY_CAP:
        raise ScaleError(f"n={n} exceeds the density-matrix cap {DENSITY_CAP}")
    noise.check_circuit(circuit)
    dim = 1 << n
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    for q, p in enumerate(noise.prep_flip):
        if p:
            xm = PauliString.single(n, q, "X").matrix()
            rho = (1 - p) * rho + p * (xm @ rho @ xm)
    rho = _pauli_channel(rho, noise.slot_for(circuit, 0), n)
    m = circuit.m
    u, cz = circuit.one_qubit_cycles, circuit.entangling_cycles
    for j in range(m):
        full = _full_1q(n, u[j])
        rho = full @ rho @ full.conj().T
        if j < m - 1:
            d = _cz_signs(n, cz[j])
            rho = rho * np.outer(d, d)
        rho = _pauli_channel(rho, noise.slot_for(circuit, j + 1), n)
        _check_density(rho, f"after cycle {j}")
    if np.min(np.linalg.eigvalsh(rho)) < -1e-8:
        raise ArithmeticError("density matrix is not positive semidefinite")
    probs = np.clip(np.diag(rho).real, 0.0, None)
    probs = apply_flips(probs / probs.sum(), n, noise.meas_flip)
    return DensityResult(rho, probs)


# ------------------------------------------------------------------ sampling


def _sample_slot(dist, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Index per shot into ``dist.support()``; 0 is the identity."""
    if not dist.entries:
        return np.zeros(shots, dtype=np.int64)
    _, probs = dist.support()
    return rng.choice(len(probs), size=shots, p=probs)


def _flip_masks(rates: Sequence[float], shots: int, rng: np.random.Generator) -> np.ndarray:
    out = np.zeros(shots, dtype=np.int64)
    for q, p in enumerate(rates):
        if p:
            out |= (rng.random(shots) < p).astype(np.int64) << q
    return out


def sample_noisy(circuit: Circuit, noise: NoiseModel, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Shot outcomes (integers) with one Pauli per slot per shot and classical flips.

    Clifford circuits use Pauli-frame propagation on top of the exact
    stabilizer outcome space; other circuits group shots by sampled fault
    pattern and use the statevector engine once per distinct pattern.
    """
    n = circuit.n
    noise.check_circuit(circuit)
    if shots == 0:
        return np.zeros(0, dtype=np.int64)
    m = circuit.m
    dists = [noise.slot_for(circuit, j) for j in range(m + 1)]
    draws = [_sample_slot(d, shots, rng) for d in dists]
    prep = _flip_masks(noise.prep_flip, shots, rng)

    if circuit.is_clifford:
        prop = clifford.PauliPropagator(circuit)
        offset, basis = clifford.outcome_space(circuit)
        out = clifford.sample_outcome_space(offset, basis, shots, rng)
        for j, (d, idx) in enumerate(zip(dists, draws)):
            if not d.entries:
                continue
            paulis, _ = d.support()
            xm = np.array([prop.push_masks(p.x, p.z, j)[0] for p in paulis], dtype=np.int64)
            out ^= xm[idx]
        if prep.any():
            # a flipped preparation is an X before slot 0
            xs = np.array([prop.push_masks(1 << q, 0, 0)[0] for q in range(n)], dtype=np.int64)
            for q in range(n):
                out ^= ((prep >> q) & 1) * xs[q]
    else:
        if n > STATEVECTOR_CAP:
            raise ScaleError(f"n={n} exceeds the statevector cap {STATEVECTOR_CAP}")
        supports = [d.support()[0] for d in dists]
        keys = np.stack(draws + [prep], axis=1)
        out = np.zeros(shots, dtype=np.int64)
        uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        for k, key in enumerate(uniq):
            faults = {j: supports[j][key[j]] for j in range(m + 1)}
            faults[0] = faults[0] * PauliString(n, int(key[-1]), 0)
            probs = np.abs(final_state(circuit, faults)) ** 2
            sel = np.nonzero(inverse == k)[0]
            out[sel] = rng.choice(1 << n, size=len(sel), p=probs / probs.sum())
    return out ^ _flip_masks(noise.meas_flip, shots, rng)


class NoisySimulator:
    """Executor running circuits under a fixed noise model: ``sim(circuit, shots, rng)``."""

    def __init__(self, noise: NoiseModel):
        self.noise = noise

    def __call__(self, circuit: Circuit, shots: int, rng: np.random.Generator) -> np.ndarray:
        return sample_noisy(circuit, self.noise, shots, rng)


def empirical_distribution(samples: Sequence[int], n: int) -> np.ndarray:
    counts = np.bincount(np.asarray(samples, dtype=np.int64), minlength=1 << n).astype(float)
    return counts / max(counts.sum(), 1.0)


def counts_by_bitstring(samples: Sequence[int], n: int) -> dict[str, int]:
    c = Counter(int(s) for s in samples)
    return {bitstring(k, n): c[k] for k in sorted(c)}


# ------------------------------------------------------------------ twirling


@dataclass(frozen=True)
class CptpChannel:
    """Kraus representation on ``len(qubits)`` qubits."""

    kraus: tuple[np.ndarray, ...]
    qubits: tuple[int, ...] = (0,)

    def __post_init__(self):
        ks = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        d = 1 << len(self.qubits)
        if not ks or any(k.shape != (d, d) for k in ks):
            raise ValueError(f"Kraus operators must be {d}x{d}")
        total = sum(k.conj().T @ k for k in ks)
        if np.max(np.abs(total - np.eye(d))) > NORM_TOL:
            raise ValueError("Kraus operators are not trace preserving")
        object.__setattr__(self, "kraus", ks)

    @property
    def k(self) -> int:
        return len(self.qubits)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.kraus)


def amplitude_damping(gamma: float) -> CptpChannel:
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]])
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]])
    return CptpChannel((k0, k1))


def random_channel(k: int, rank: int, rng: np.random.Generator) -> CptpChannel:
    """Random CPTP map from a Haar isometry into ``rank`` Kraus operators."""
    d = 1 << k
    v = unitary_group.rvs(d * rank, random_state=rng)[:, :d]
    return CptpChannel(tuple(v[i * d:(i + 1) * d] for i in range(rank)), tuple(range(k)))


def pauli_transfer_matrix(channel) -> np.ndarray:
    """R[a, b] = Tr(P_a E(P_b)) / d over the Pauli basis of ``all_paulis(k)``."""
    k = channel.k
    basis = [p.matrix() for p in all_paulis(k)]
    d = 1 << k
    return np.array([[np.trace(pa @ channel(pb)).real / d for pb in basis] for pa in basis])


@dataclass(frozen=True)
class _Twirled:
    inner: CptpChannel

    @property
    def k(self) -> int:
        return self.inner.k

    def __call__(self, rho):
        frames = [p.matrix() for p in all_paulis(self.k)]
        return sum(f @ self.inner(f @ rho @ f) @ f for f in frames) / len(frames)


@dataclass
class TwirlReport:
    max_offdiag: float
    pauli_probs: dict[str, float]
    ptm: np.ndarray


def twirl_check(channel: CptpChannel) -> TwirlReport:
    """Average over all Pauli frames and read off the resulting Pauli channel."""
    if channel.k > 2:
        raise ScaleError("twirl check supports one- and two-qubit channels")
    ptm = pauli_transfer_matrix(_Twirled(channel))
    off = ptm - np.diag(np.diag(ptm))
    paulis = all_paulis(channel.k)
    lam = np.diag(ptm)
    probs = {}
    for pb in paulis:
        signs = np.array([1.0 if pa.commutes_with(pb) else -1.0 for pa in paulis])
        probs[pb.label()] = float(signs @ lam) / len(paulis)
    return TwirlReport(float(np.max(np.abs(off))), probs, ptm)

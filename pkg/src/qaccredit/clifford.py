"""Clifford-only engine: Pauli propagation and stabilizer simulation.

Conjugation discards Pauli phases; stochastic Pauli noise and Z-basis
statistics do not depend on them.  The stabilizer tableau, on the other hand,
tracks signs, since those fix the measured bit values.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .circuit import (
    CLIFFORD_PAULI_ACTION,
    CLIFFORD_WORDS,
    Circuit,
    EntanglingCycle,
    Gate1Q,
    OneQubitCycle,
    PauliString,
)


class NonCliffordError(ValueError):
    pass


def _cycle_indices(cycle: OneQubitCycle) -> list[int]:
    idx = [g.clifford_index for g in cycle.gates]
    if any(i is None for i in idx):
        raise NonCliffordError("cycle contains a non-Clifford gate")
    return idx  # type: ignore[return-value]


def _conj_1q_masks(indices: Sequence[int], x: int, z: int) -> tuple[int, int]:
    support = x | z
    q = 0
    while support >> q:
        if (support >> q) & 1:
            code = ((x >> q) & 1) | (((z >> q) & 1) << 1)
            img = CLIFFORD_PAULI_ACTION[indices[q], code]
            bit = 1 << q
            x = (x & ~bit) | ((img & 1) << q)
            z = (z & ~bit) | (((img >> 1) & 1) << q)
        q += 1
    return x, z


def _conj_cz_masks(pairs, x: int, z: int) -> tuple[int, int]:
    for a, b in pairs:
        z ^= (((x >> a) & 1) << b) | (((x >> b) & 1) << a)
    return x, z


def conjugate(op: Gate1Q | OneQubitCycle | EntanglingCycle, p: PauliString) -> PauliString:
    """Return ``C P C^dagger`` with the phase dropped."""
    if isinstance(op, Gate1Q):
        if p.n != 1:
            raise ValueError("a single gate conjugates one-qubit Paulis")
        if op.clifford_index is None:
            raise NonCliffordError(f"{op.kind} gate is not Clifford")
        x, z = _conj_1q_masks([op.clifford_index], p.x, p.z)
    elif isinstance(op, OneQubitCycle):
        if len(op.gates) != p.n:
            raise ValueError("qubit count mismatch")
        x, z = _conj_1q_masks(_cycle_indices(op), p.x, p.z)
    elif isinstance(op, EntanglingCycle):
        x, z = _conj_cz_masks(op.pairs, p.x, p.z)
    else:
        raise TypeError(f"cannot conjugate by {op!r}")
    return PauliString(p.n, x, z)


class PauliPropagator:
    """Pushes Paulis from a fault slot to just before measurement.

    Slot 0 sits after preparation, slot ``j`` (1 <= j < m) after the j-th cZ
    cycle and slot ``m`` after the last one-qubit cycle.  Propagation is linear
    over GF(2), so each slot is summarised by the images of its 2n generators.
    """

    def __init__(self, circuit: Circuit):
        circuit.require_canonical()
        self.n = circuit.n
        self.m = circuit.m
        self._u = [_cycle_indices(u) for u in circuit.one_qubit_cycles]
        self._cz = [c.pairs for c in circuit.entangling_cycles]
        self._images: list[list[tuple[int, int]]] | None = None

    def _walk(self, x: int, z: int, slot: int) -> tuple[int, int]:
        for j in range(slot, self.m):
            x, z = _conj_1q_masks(self._u[j], x, z)
            if j < self.m - 1:
                x, z = _conj_cz_masks(self._cz[j], x, z)
        return x, z

    @property
    def images(self) -> list[list[tuple[int, int]]]:
        if self._images is None:
            imgs = []
            for slot in range(self.m + 1):
                row = [self._walk(1 << q, 0, slot) for q in range(self.n)]
                row += [self._walk(0, 1 << q, slot) for q in range(self.n)]
                imgs.append(row)
            self._images = imgs
        return self._images

    def push_masks(self, x: int, z: int, slot: int) -> tuple[int, int]:
        row = self.images[slot]
        ox = oz = 0
        for q in range(self.n):
            if (x >> q) & 1:
                ox ^= row[q][0]
                oz ^= row[q][1]
            if (z >> q) & 1:
                ox ^= row[self.n + q][0]
                oz ^= row[self.n + q][1]
        return ox, oz

    def push(self, p: PauliString, slot: int) -> PauliString:
        if not 0 <= slot <= self.m:
            raise ValueError(f"slot {slot} outside 0..{self.m}")
        return PauliString(self.n, *self.push_masks(p.x, p.z, slot))


def merge_fault_pattern(circuit: Circuit, pattern: Sequence[PauliString]) -> PauliString:
    """Merge a fault pattern P_0..P_m into one Pauli acting right before measurement."""
    m = circuit.m
    if len(pattern) != m + 1:
        raise ValueError(f"pattern needs {m + 1} slots, got {len(pattern)}")
    prop = PauliPropagator(circuit)
    x = z = 0
    for slot, p in enumerate(pattern):
        if p.n != circuit.n:
            raise ValueError("qubit count mismatch")
        px, pz = prop.push_masks(p.x, p.z, slot)
        x ^= px
        z ^= pz
    return PauliString(circuit.n, x, z)


# ------------------------------------------------------------ stabilizer sim


def _g(x1, z1, x2, z2):
    """Aaronson-Gottesman phase exponent of multiplying single-qubit Paulis."""
    return np.where(
        (x1 == 0) & (z1 == 0),
        0,
        np.where(
            (x1 == 1) & (z1 == 1),
            z2 - x2,
            np.where(x1 == 1, z2 * (2 * x2 - 1), x2 * (1 - 2 * z2)),
        ),
    )


class StabilizerTableau:
    """Stabilizer generators of an n-qubit state, starting from |0...0>."""

    def __init__(self, n: int):
        self.n = n
        self.x = np.zeros((n, n), dtype=np.int64)
        self.z = np.eye(n, dtype=np.int64)
        self.r = np.zeros(n, dtype=np.int64)

    def h(self, q: int) -> None:
        self.r ^= self.x[:, q] & self.z[:, q]
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def s(self, q: int) -> None:
        self.r ^= self.x[:, q] & self.z[:, q]
        self.z[:, q] ^= self.x[:, q]

    def cz(self, a: int, b: int) -> None:
        xa, xb = self.x[:, a], self.x[:, b]
        self.r ^= xa & xb & (self.z[:, a] ^ self.z[:, b])
        self.z[:, a] ^= xb
        self.z[:, b] ^= xa

    def apply_gate(self, gate: Gate1Q, q: int) -> None:
        idx = gate.clifford_index
        if idx is None:
            raise NonCliffordError(f"{gate.kind} gate is not Clifford")
        for w in CLIFFORD_WORDS[idx]:
            self.h(q) if w == "H" else self.s(q)

    def apply_circuit(self, circuit: Circuit) -> "StabilizerTableau":
        for c in circuit.cycles:
            if isinstance(c, OneQubitCycle):
                for q, g in enumerate(c.gates):
                    if not g.is_identity:
                        self.apply_gate(g, q)
            else:
                for a, b in c.pairs:
                    self.cz(a, b)
        return self

    def _rowsum(self, h: int, i: int) -> None:
        total = 2 * self.r[h] + 2 * self.r[i] + int(
            np.sum(_g(self.x[i], self.z[i], self.x[h], self.z[h]))
        )
        self.r[h] = (total % 4) // 2
        self.x[h] ^= self.x[i]
        self.z[h] ^= self.z[i]

    def outcome_space(self) -> tuple[int, list[int]]:
        """Z-basis outcomes are uniform over ``offset + span(basis)`` (integers, qubit 0 = LSB)."""
        n = self.n
        rank = 0
        for q in range(n):
            piv = next((k for k in range(rank, n) if self.x[k, q]), None)
            if piv is None:
                continue
            if piv != rank:
                for arr in (self.x, self.z):
                    arr[[rank, piv]] = arr[[piv, rank]]
                self.r[[rank, piv]] = self.r[[piv, rank]]
            for k in range(n):
                if k != rank and self.x[k, q]:
                    self._rowsum(k, rank)
            rank += 1
        rows = [(self.z[k].copy(), int(self.r[k])) for k in range(rank, n)]
        return _solve_gf2(rows, n)


def _solve_gf2(rows, n: int) -> tuple[int, list[int]]:
    """Solve z_k . s = r_k over GF(2); return a particular solution and a null-space basis."""
    mat = [(sum(int(b) << q for q, b in enumerate(z)), r) for z, r in rows]
    pivots: list[tuple[int, int, int]] = []
    for coef, rhs in mat:
        for pc, pcoef, prhs in pivots:
            if (coef >> pc) & 1:
                coef ^= pcoef
                rhs ^= prhs
        if coef == 0:
            if rhs:
                raise ArithmeticError("inconsistent stabilizer constraints")
            continue
        col = (coef & -coef).bit_length() - 1
        # keep reduced form: clear the new pivot column from earlier rows
        pivots = [
            (pc, pcoef ^ coef, prhs ^ rhs) if (pcoef >> col) & 1 else (pc, pcoef, prhs)
            for pc, pcoef, prhs in pivots
        ]
        pivots.append((col, coef, rhs))
    pivot_cols = {pc for pc, _, _ in pivots}
    offset = 0
    for pc, _, rhs in pivots:
        if rhs:
            offset |= 1 << pc
    basis = []
    for f in range(n):
        if f in pivot_cols:
            continue
        vec = 1 << f
        for pc, pcoef, _ in pivots:
            if (pcoef >> f) & 1:
                vec |= 1 << pc
        basis.append(vec)
    return offset, basis


def outcome_space(circuit: Circuit) -> tuple[int, list[int]]:
    return StabilizerTableau(circuit.n).apply_circuit(circuit).outcome_space()


def sample_outcome_space(offset: int, basis: Sequence[int], shots: int, rng: np.random.Generator) -> np.ndarray:
    out = np.full(shots, offset, dtype=np.int64)
    if shots and basis:
        coins = rng.integers(0, 2, size=(shots, len(basis)), dtype=np.int64)
        for k, vec in enumerate(basis):
            out ^= coins[:, k] * vec
    return out


def stabilizer_simulate(circuit: Circuit, rng: np.random.Generator) -> int:
    """One noiseless Z-basis sample from |0...0> (the unique outcome for a trap)."""
    offset, basis = outcome_space(circuit)
    return int(sample_outcome_space(offset, basis, 1, rng)[0])


def stabilizer_distribution(circuit: Circuit) -> np.ndarray:
    offset, basis = outcome_space(circuit)
    probs = np.zeros(1 << circuit.n)
    support = {offset}
    for vec in basis:
        support |= {s ^ vec for s in support}
    probs[list(support)] = 1.0 / len(support)
    return probs


def trap_output_under_fault(trap, pattern: Sequence[PauliString]) -> int:
    """Measured outcome of a (noiseless-dynamics) trap with a Pauli fault pattern inserted.

    ``trap`` is a TrapCircuit or a plain Clifford Circuit with a deterministic
    ideal output.  Returns the outcome as an integer (qubit 0 = LSB).
    """
    circuit = getattr(trap, "circuit", trap)
    offset, basis = outcome_space(circuit)
    if basis:
        raise ValueError("circuit output is not deterministic")
    return offset ^ merge_fault_pattern(circuit, pattern).x

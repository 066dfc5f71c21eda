"""Circuits in alternating one-qubit / cZ cycle form.

A canonical circuit on ``n`` qubits is ``U_1, cZ_1, U_2, ..., cZ_{m-1}, U_m``
followed by a Z-basis measurement of every qubit, so its depth is ``2m - 1``.
Qubits are 0-indexed; in integer encodings of bitstrings qubit 0 is the least
significant bit.  Text labels (Pauli labels, bitstrings) list qubit 0 first.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import unitary_group

UNITARY_TOL = 1e-12

_S2 = 1.0 / math.sqrt(2.0)

NAMED_MATRICES: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "Sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
}

# Pauli codes used throughout: bit 0 = X component, bit 1 = Z component.
PAULI_CODES = {"I": 0, "X": 1, "Z": 2, "Y": 3}
PAULI_LETTERS = "IXZY"
_PAULI_BY_CODE = [NAMED_MATRICES["I"], NAMED_MATRICES["X"], NAMED_MATRICES["Z"], NAMED_MATRICES["Y"]]


def _same_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    return abs(abs(np.trace(a.conj().T @ b)) - 2.0) < tol


def _build_clifford_group():
    """Enumerate the 24 one-qubit Cliffords (mod phase) by BFS over H and S words."""
    mats = [NAMED_MATRICES["I"]]
    words: list[tuple[str, ...]] = [()]
    frontier = [0]
    while frontier:
        nxt = []
        for idx in frontier:
            for g in ("H", "S"):
                cand = NAMED_MATRICES[g] @ mats[idx]
                if not any(_same_up_to_phase(cand, m) for m in mats):
                    mats.append(cand)
                    words.append(words[idx] + (g,))
                    nxt.append(len(mats) - 1)
        frontier = nxt
    assert len(mats) == 24
    n = len(mats)
    mul = np.zeros((n, n), dtype=np.int64)
    for a in range(n):
        for b in range(n):
            prod = mats[a] @ mats[b]
            mul[a, b] = next(k for k in range(n) if _same_up_to_phase(prod, mats[k]))
    action = np.zeros((n, 4), dtype=np.int64)
    for c in range(n):
        for p in range(4):
            img = mats[c] @ _PAULI_BY_CODE[p] @ mats[c].conj().T
            action[c, p] = next(q for q in range(4) if _same_up_to_phase(img, _PAULI_BY_CODE[q]))
    return mats, words, mul, action


CLIFFORD_MATRICES, CLIFFORD_WORDS, CLIFFORD_MUL, CLIFFORD_PAULI_ACTION = _build_clifford_group()


def clifford_index_of(u: np.ndarray) -> int | None:
    """Index of ``u`` in the 24-element Clifford table (mod phase), or None."""
    for k, c in enumerate(CLIFFORD_MATRICES):
        if _same_up_to_phase(u, c):
            return k
    return None


_NAMED_INDEX = {name: clifford_index_of(mat) for name, mat in NAMED_MATRICES.items()}
_INDEX_TO_NAME: dict[int, str] = {}
for _name, _idx in _NAMED_INDEX.items():
    _INDEX_TO_NAME.setdefault(_idx, _name)


_CLIFFORD_GATES: dict[int, "Gate1Q"] = {}


@dataclass(frozen=True)
class Gate1Q:
    """A one-qubit gate: one of the named Cliffords or a generic unitary ("G")."""

    kind: str
    u: tuple[complex, complex, complex, complex] | None = None

    def __post_init__(self):
        if self.kind == "G":
            if self.u is None or len(self.u) != 4:
                raise ValueError("generic gate needs a 2x2 matrix")
            m = np.array(self.u, dtype=complex).reshape(2, 2)
            if np.max(np.abs(m.conj().T @ m - np.eye(2))) > UNITARY_TOL:
                raise ValueError("generic gate matrix is not unitary")
        elif self.kind not in NAMED_MATRICES:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        elif self.u is not None:
            raise ValueError("named gates carry no matrix")

    @classmethod
    def generic(cls, matrix) -> "Gate1Q":
        m = np.asarray(matrix, dtype=complex).reshape(2, 2)
        return cls("G", tuple(complex(v) for v in m.ravel()))

    @classmethod
    def from_clifford_index(cls, idx: int) -> "Gate1Q":
        gate = _CLIFFORD_GATES.get(idx)
        if gate is None:
            name = _INDEX_TO_NAME.get(idx)
            gate = cls(name) if name is not None else cls.generic(CLIFFORD_MATRICES[idx])
            gate.__dict__["clifford_index"] = idx  # skip the table scan
            _CLIFFORD_GATES[idx] = gate
        return gate

    @cached_property
    def matrix(self) -> np.ndarray:
        if self.kind == "G":
            return np.array(self.u, dtype=complex).reshape(2, 2)
        return NAMED_MATRICES[self.kind]

    @cached_property
    def clifford_index(self) -> int | None:
        if self.kind != "G":
            return _NAMED_INDEX[self.kind]
        return clifford_index_of(self.matrix)

    @property
    def is_clifford(self) -> bool:
        return self.clifford_index is not None

    @property
    def is_identity(self) -> bool:
        return self.clifford_index == _NAMED_INDEX["I"]

    def then(self, later: "Gate1Q") -> "Gate1Q":
        """The gate obtained by applying ``self`` first and ``later`` second."""
        a, b = later.clifford_index, self.clifford_index
        if a is not None and b is not None:
            return Gate1Q.from_clifford_index(int(CLIFFORD_MUL[a, b]))
        return Gate1Q.generic(later.matrix @ self.matrix)

    def to_spec(self) -> dict:
        if self.kind == "G":
            return {"k": "G", "u": [[v.real, v.imag] for v in self.u]}
        return {"k": self.kind}

    @classmethod
    def from_spec(cls, spec: dict) -> "Gate1Q":
        k = spec["k"]
        if k == "G":
            u = spec["u"]
            if len(u) != 4:
                raise ValueError("generic gate spec needs 4 [re, im] entries")
            return cls("G", tuple(complex(float(re), float(im)) for re, im in u))
        return cls(k)


IDENTITY = Gate1Q("I")


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli operator without phase, as X and Z bit masks."""

    n: int
    x: int = 0
    z: int = 0

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        x = z = 0
        for q, ch in enumerate(label.upper()):
            code = PAULI_CODES.get(ch)
            if code is None:
                raise ValueError(f"bad Pauli label {label!r}")
            x |= (code & 1) << q
            z |= (code >> 1) << q
        return cls(len(label), x, z)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliString":
        code = PAULI_CODES[letter]
        return cls(n, (code & 1) << qubit, (code >> 1) << qubit)

    def code(self, qubit: int) -> int:
        return ((self.x >> qubit) & 1) | (((self.z >> qubit) & 1) << 1)

    def label(self) -> str:
        return "".join(PAULI_LETTERS[self.code(q)] for q in range(self.n))

    def weight(self) -> int:
        return bin(self.x | self.z).count("1")

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        if other.n != self.n:
            raise ValueError("qubit count mismatch")
        return PauliString(self.n, self.x ^ other.x, self.z ^ other.z)

    def commutes_with(self, other: "PauliString") -> bool:
        return (bin(self.x & other.z).count("1") + bin(self.z & other.x).count("1")) % 2 == 0

    def matrix(self) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for q in reversed(range(self.n)):
            out = np.kron(out, _PAULI_BY_CODE[self.code(q)])
        return out

    def __repr__(self) -> str:
        return f"PauliString({self.label()!r})"


def all_paulis(n: int) -> list[PauliString]:
    return [PauliString(n, x, z) for z in range(1 << n) for x in range(1 << n)]


@dataclass(frozen=True)
class OneQubitCycle:
    gates: tuple[Gate1Q, ...]

    @classmethod
    def identity(cls, n: int) -> "OneQubitCycle":
        return cls((IDENTITY,) * n)

    @classmethod
    def of(cls, names: Iterable[str | Gate1Q]) -> "OneQubitCycle":
        return cls(tuple(g if isinstance(g, Gate1Q) else Gate1Q(g) for g in names))

    @property
    def is_clifford(self) -> bool:
        return all(g.is_clifford for g in self.gates)

    def then(self, later: "OneQubitCycle") -> "OneQubitCycle":
        return OneQubitCycle(tuple(a.then(b) for a, b in zip(self.gates, later.gates)))

    def to_spec(self) -> dict:
        return {"type": "u1", "gates": [g.to_spec() for g in self.gates]}


@dataclass(frozen=True)
class EntanglingCycle:
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        norm = tuple(sorted(tuple(sorted((int(a), int(b)))) for a, b in self.pairs))
        seen: set[int] = set()
        for a, b in norm:
            if a == b or a in seen or b in seen:
                raise ValueError(f"cZ pairs must be disjoint: {self.pairs}")
            seen.update((a, b))
        object.__setattr__(self, "pairs", norm)

    @classmethod
    def of(cls, *pairs: tuple[int, int]) -> "EntanglingCycle":
        return cls(tuple(pairs))

    @property
    def qubits(self) -> set[int]:
        return {q for p in self.pairs for q in p}

    def partner(self, q: int) -> int | None:
        for a, b in self.pairs:
            if a == q:
                return b
            if b == q:
                return a
        return None

    def to_spec(self) -> dict:
        return {"type": "cz", "pairs": [list(p) for p in self.pairs]}


Cycle = OneQubitCycle | EntanglingCycle


@dataclass(frozen=True)
class Circuit:
    """A sequence of cycles on ``n`` qubits ending in Z measurement of all qubits."""

    n: int
    cycles: tuple[Cycle, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one qubit")
        object.__setattr__(self, "cycles", tuple(self.cycles))
        for c in self.cycles:
            if isinstance(c, OneQubitCycle):
                if len(c.gates) != self.n:
                    raise ValueError("one-qubit cycle length must equal n")
            elif isinstance(c, EntanglingCycle):
                if any(q >= self.n or q < 0 for q in c.qubits):
                    raise ValueError("cZ index out of range")
            else:
                raise TypeError(f"not a cycle: {c!r}")

    @classmethod
    def from_layers(cls, n: int, u_cycles: Sequence, cz_cycles: Sequence) -> "Circuit":
        if len(u_cycles) != len(cz_cycles) + 1:
            raise ValueError("need exactly one more one-qubit cycle than cZ cycles")
        cycles: list[Cycle] = []
        for j, u in enumerate(u_cycles):
            cycles.append(u if isinstance(u, OneQubitCycle) else OneQubitCycle.of(u))
            if j < len(cz_cycles):
                cz = cz_cycles[j]
                cycles.append(cz if isinstance(cz, EntanglingCycle) else EntanglingCycle(tuple(cz)))
        return cls(n, tuple(cycles))

    @property
    def is_canonical(self) -> bool:
        if not self.cycles or len(self.cycles) % 2 == 0:
            return False
        return all(
            isinstance(c, OneQubitCycle if k % 2 == 0 else EntanglingCycle)
            for k, c in enumerate(self.cycles)
        )

    def require_canonical(self) -> None:
        if not self.is_canonical:
            raise ValueError("circuit is not in alternating U/cZ form")

    @property
    def m(self) -> int:
        self.require_canonical()
        return (len(self.cycles) + 1) // 2

    def depth(self) -> int:
        return 2 * self.m - 1

    @property
    def one_qubit_cycles(self) -> tuple[OneQubitCycle, ...]:
        self.require_canonical()
        return self.cycles[0::2]

    @property
    def entangling_cycles(self) -> tuple[EntanglingCycle, ...]:
        self.require_canonical()
        return self.cycles[1::2]

    @property
    def is_clifford(self) -> bool:
        return all(c.is_clifford for c in self.cycles if isinstance(c, OneQubitCycle))

    def to_dict(self) -> dict:
        return {"n": self.n, "cycles": [c.to_spec() for c in self.cycles]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "Circuit":
        n = int(data["n"])
        cycles: list[Cycle] = []
        for spec in data["cycles"]:
            if spec["type"] == "u1":
                cycles.append(OneQubitCycle(tuple(Gate1Q.from_spec(g) for g in spec["gates"])))
            elif spec["type"] == "cz":
                cycles.append(EntanglingCycle(tuple(tuple(p) for p in spec["pairs"])))
            else:
                raise ValueError(f"unknown cycle type {spec['type']!r}")
        return cls(n, tuple(cycles))

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))


def bitstring(value: int, n: int) -> str:
    """Render an integer outcome as text, qubit 0 first."""
    return "".join("1" if (value >> q) & 1 else "0" for q in range(n))


def parse_bitstring(text: str) -> int:
    text = text.strip()
    if not text or set(text) - {"0", "1"}:
        raise ValueError(f"not a bitstring: {text!r}")
    return sum(1 << q for q, ch in enumerate(text) if ch == "1")


# ---------------------------------------------------------------- transforms


def merge_adjacent_1q_cycles(circuit: Circuit) -> Circuit:
    """Multiply every run of one-qubit cycles into a single cycle.

    Identity cycles are inserted between adjacent cZ cycles and at the ends so
    the result is always in alternating form.
    """
    n = circuit.n
    out: list[Cycle] = []
    pending: OneQubitCycle | None = None
    for c in circuit.cycles:
        if isinstance(c, OneQubitCycle):
            pending = c if pending is None else pending.then(c)
        else:
            out.append(pending if pending is not None else OneQubitCycle.identity(n))
            out.append(c)
            pending = None
    out.append(pending if pending is not None else OneQubitCycle.identity(n))
    return Circuit(n, tuple(out))


@dataclass(frozen=True)
class CxCircuit:
    """Alternating form with cX entanglers; ``cx_cycles[j]`` holds (control, target) pairs."""

    n: int
    u_cycles: tuple[OneQubitCycle, ...]
    cx_cycles: tuple[tuple[tuple[int, int], ...], ...]

    def depth(self) -> int:
        return len(self.u_cycles) + len(self.cx_cycles)


def recompile_cx_to_cz(circuit: CxCircuit) -> Circuit:
    """Rewrite each cX(c, t) as H(t) cZ(c, t) H(t), folding the H gates into neighbours."""
    if len(circuit.u_cycles) != len(circuit.cx_cycles) + 1:
        raise ValueError("need exactly one more one-qubit cycle than cX cycles")
    n = circuit.n
    h = Gate1Q("H")
    gates = [list(u.gates) for u in circuit.u_cycles]
    cz_cycles = []
    for j, cx in enumerate(circuit.cx_cycles):
        for _, t in cx:
            gates[j][t] = gates[j][t].then(h)
            gates[j + 1][t] = h.then(gates[j + 1][t])
        cz_cycles.append(EntanglingCycle(tuple((c, t) for c, t in cx)))
    return Circuit.from_layers(n, [OneQubitCycle(tuple(g)) for g in gates], cz_cycles)


# ------------------------------------------------------------------ builders

# Row order of the ten-qubit GHZ figure (device labels 5, 10, 0, 15, 1, 6, 11, 16, 2, 7).
GHZ10_TOPOLOGY: tuple[EntanglingCycle, ...] = (
    EntanglingCycle.of((0, 1)),
    EntanglingCycle.of((0, 2), (1, 3)),
    EntanglingCycle.of((2, 4), (0, 5), (1, 6), (3, 7)),
    EntanglingCycle.of((4, 8), (5, 9)),
)


def doubling_topology(n: int) -> tuple[EntanglingCycle, ...]:
    """Cascade where every entangled qubit recruits a fresh one each cycle."""
    members = [0]
    cycles = []
    nxt = 1
    while nxt < n:
        pairs = []
        for a in list(members):
            if nxt >= n:
                break
            pairs.append((a, nxt))
            members.append(nxt)
            nxt += 1
        cycles.append(EntanglingCycle(tuple(pairs)))
    return tuple(cycles)


def _ghz_recruits(n: int, topology: Sequence[EntanglingCycle]) -> list[list[int]]:
    members = {0}
    recruits = []
    for cyc in topology:
        new = []
        for a, b in cyc.pairs:
            if max(a, b) >= n:
                raise ValueError("topology index out of range")
            if (a in members) == (b in members):
                raise ValueError(f"pair {(a, b)} does not join one new qubit to the GHZ register")
            new.append(b if a in members else a)
        members.update(new)
        recruits.append(new)
    if len(members) != n:
        raise ValueError("topology does not reach every qubit")
    return recruits


def build_ghz_layout(n: int, topology: Sequence[EntanglingCycle] | None = None) -> Circuit:
    """GHZ preparation: Hadamards on all qubits, then cZ + H on each recruited qubit."""
    if topology is None:
        topology = doubling_topology(n)
    recruits = _ghz_recruits(n, topology)
    u_cycles = [OneQubitCycle.of(["H"] * n)]
    for new in recruits:
        u_cycles.append(OneQubitCycle.of(["H" if q in new else "I" for q in range(n)]))
    return Circuit.from_layers(n, u_cycles, list(topology))


def ghz_cx_form(n: int, topology: Sequence[EntanglingCycle] | None = None) -> CxCircuit:
    """The same GHZ preparation written with cX gates (control already entangled)."""
    if topology is None:
        topology = doubling_topology(n)
    recruits = _ghz_recruits(n, topology)
    first = OneQubitCycle.of(["H" if q == 0 else "I" for q in range(n)])
    cx_cycles = []
    for cyc, new in zip(topology, recruits):
        cx_cycles.append(tuple((a if b in new else b, b if b in new else a) for a, b in cyc.pairs))
    idle = [OneQubitCycle.identity(n) for _ in topology]
    return CxCircuit(n, (first, *idle), tuple(cx_cycles))


def _phase(phi: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * phi)])


def build_qft_layout(n: int) -> Circuit:
    """QFT applied to |+>^n, with each controlled phase split into two cZ gates.

    CP(phi) on (a, b) is implemented as H_b, cZ, H_b P(-phi/2) H_b, cZ, then
    P(phi/2) on both qubits after H_b.  Controlled phases sharing a qubit keep
    their program order; disjoint ones share a two-cZ layer.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    program: list[tuple] = []
    for a in range(n):
        program.append(("H", a))
        for k, b in enumerate(range(a + 1, n), start=1):
            program.append(("CP", a, b, math.pi / 2**k))

    ready = [0] * n  # earliest free layer per qubit
    layer_busy: dict[int, set[int]] = {}
    h_layer: dict[int, int] = {}
    placed: list[tuple[int, int, int, float]] = []
    last_cp = [-1] * n
    for op in program:
        if op[0] == "H":
            q = op[1]
            h_layer[q] = last_cp[q] + 1
            ready[q] = max(ready[q], h_layer[q])
            continue
        _, a, b, phi = op
        lay = max(ready[a], ready[b])
        while a in layer_busy.get(lay, set()) or b in layer_busy.get(lay, set()):
            lay += 1
        layer_busy.setdefault(lay, set()).update((a, b))
        placed.append((lay, a, b, phi))
        ready[a] = ready[b] = lay + 1
        last_cp[a] = max(last_cp[a], lay)
        last_cp[b] = max(last_cp[b], lay)

    layers = 1 + max((p[0] for p in placed), default=-1)
    m = 2 * layers + 1
    # per-cycle, per-qubit gate lists in application order
    slots: list[list[list[np.ndarray]]] = [[[] for _ in range(n)] for _ in range(m)]
    H = NAMED_MATRICES["H"]
    for q in range(n):
        slots[0][q].append(H)  # |+> preparation
    by_layer: dict[int, list] = {}
    for lay, a, b, phi in placed:
        by_layer.setdefault(lay, []).append((a, b, phi))
    # post-gates of layer L land in cycle 2L+2 before H gates scheduled there
    for lay in range(layers):
        for a, b, phi in by_layer.get(lay, []):
            slots[2 * lay + 2][b] += [H, _phase(phi / 2)]
            slots[2 * lay + 2][a].append(_phase(phi / 2))
    for q, lay in h_layer.items():
        slots[2 * lay][q].append(H)
    for lay in range(layers):
        for a, b, phi in by_layer.get(lay, []):
            slots[2 * lay][b].append(H)
            slots[2 * lay + 1][b].append(H @ _phase(-phi / 2) @ H)

    u_cycles = []
    for j in range(m):
        gates = []
        for q in range(n):
            g = IDENTITY
            for mat in slots[j][q]:
                g = g.then(_as_gate(mat))
            gates.append(g)
        u_cycles.append(OneQubitCycle(tuple(gates)))
    cz_cycles = []
    for lay in range(layers):
        pairs = tuple((a, b) for a, b, _ in by_layer.get(lay, []))
        cz_cycles += [EntanglingCycle(pairs), EntanglingCycle(pairs)]
    return Circuit.from_layers(n, u_cycles, cz_cycles)


def _as_gate(mat: np.ndarray) -> Gate1Q:
    for name in ("I", "H", "S", "Sdg", "X", "Y", "Z"):
        if np.allclose(mat, NAMED_MATRICES[name], atol=1e-14):
            return Gate1Q(name)
    return Gate1Q.generic(mat)


def brick_pattern(n: int, m: int) -> tuple[EntanglingCycle, ...]:
    """Alternate (0,1),(2,3),... with (1,2),(3,4),...; the six-qubit random-circuit layout."""
    even = EntanglingCycle(tuple((q, q + 1) for q in range(0, n - 1, 2)))
    odd = EntanglingCycle(tuple((q, q + 1) for q in range(1, n - 1, 2)))
    return tuple(even if j % 2 == 0 else odd for j in range(m - 1))


def haar_su2(rng: np.random.Generator) -> np.ndarray:
    u = unitary_group.rvs(2, random_state=rng)
    return u / np.sqrt(np.linalg.det(u))


def build_random_layout(
    n: int,
    m: int,
    rng_seed: int,
    entangler_pattern: Sequence[EntanglingCycle] | str = "brick",
) -> Circuit:
    """Haar-random SU(2) gates at every position, interleaved with the given cZ cycles."""
    if m < 1:
        raise ValueError("need m >= 1")
    if isinstance(entangler_pattern, str):
        if entangler_pattern != "brick":
            raise ValueError(f"unknown entangler pattern {entangler_pattern!r}")
        entangler_pattern = brick_pattern(n, m)
    pattern = list(entangler_pattern)
    if len(pattern) != m - 1:
        raise ValueError(f"pattern must supply {m - 1} entangling cycles, got {len(pattern)}")
    rng = np.random.default_rng(rng_seed)
    u_cycles = [
        OneQubitCycle(tuple(Gate1Q.generic(haar_su2(rng)) for _ in range(n))) for _ in range(m)
    ]
    return Circuit.from_layers(n, u_cycles, pattern)


def random_entangling_cycle(n: int, rng: np.random.Generator) -> EntanglingCycle:
    """A random set of disjoint pairs (possibly empty)."""
    order = list(rng.permutation(n))
    pairs = []
    while len(order) >= 2:
        if rng.random() < 0.7:
            pairs.append((int(order.pop()), int(order.pop())))
        else:
            order.pop()
    return EntanglingCycle(tuple(pairs))

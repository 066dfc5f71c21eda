"""Trap generation, one-time-pad twirling and the accreditation run itself."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from . import clifford
from .circuit import Circuit, EntanglingCycle, OneQubitCycle, PauliString, bitstring

Executor = Callable[[Circuit, int, np.random.Generator], Sequence[int]]

_UNDO = {"S": "Sdg", "H": "H"}


def required_traps(theta: float, alpha: float) -> int:
    """Smallest v with 2 exp(-v theta^2 / 2) <= 1 - alpha."""
    if not 0 < theta < 1 or not 0 < alpha < 1:
        raise ValueError("theta and alpha must lie in (0, 1)")
    return math.ceil(2.0 * math.log(2.0 / (1.0 - alpha)) / theta**2)


def achieved_theta(v: int, alpha: float) -> float:
    """Accuracy that ``v`` traps buy at confidence ``alpha``."""
    return math.sqrt(2.0 * math.log(2.0 / (1.0 - alpha)) / v)


@dataclass(frozen=True)
class ProtocolParams:
    theta: float
    alpha: float
    v: int | None = None
    seed: int = 0

    def __post_init__(self):
        required_traps(self.theta, self.alpha)
        if self.v is not None and self.v < 1:
            raise ValueError("v must be a positive trap count")

    @property
    def traps(self) -> int:
        return self.v if self.v is not None else required_traps(self.theta, self.alpha)


# --------------------------------------------------------------------- traps


@dataclass(frozen=True)
class TrapCircuit:
    """A trap with the random choices that produced it.

    ``selections[j]`` holds one letter ('S' or 'H') per qubit for cycle j+1;
    ``qotp`` lists the pad Paulis (one per one-qubit cycle) or is empty.
    """

    circuit: Circuit
    t: int
    selections: tuple[str, ...]
    qotp: tuple[PauliString, ...] = ()

    def metadata(self) -> dict:
        return {
            "t": self.t,
            "selections": list(self.selections),
            "qotp": [p.label() for p in self.qotp],
        }


def _require_target(target: Circuit) -> None:
    target.require_canonical()


def selection_options(cycle: EntanglingCycle, n: int) -> list[tuple[int, ...]]:
    """Independent binary choices in a cycle: one per pair, then one per idle qubit."""
    idle = [q for q in range(n) if cycle.partner(q) is None]
    return [pair for pair in cycle.pairs] + [(q,) for q in idle]


def _letters_from_bits(cycle: EntanglingCycle, n: int, bits: Sequence[int]) -> str:
    out = ["?"] * n
    for group, b in zip(selection_options(cycle, n), bits):
        if len(group) == 2:
            a, c = group
            out[a], out[c] = ("S", "H") if b == 0 else ("H", "S")
        else:
            out[group[0]] = "H" if b == 0 else "S"
    return "".join(out)


def assemble_trap(target: Circuit, selections: Sequence[str], t: int) -> TrapCircuit:
    """Build the merged trap from explicit choices (no one-time pad)."""
    _require_target(target)
    n, m = target.n, target.m
    if len(selections) != m - 1:
        raise ValueError(f"need {m - 1} selection strings, got {len(selections)}")
    if t not in (0, 1):
        raise ValueError("t must be 0 or 1")
    h_t = OneQubitCycle.of(["H" if t else "I"] * n)
    sel = [OneQubitCycle.of(list(s)) for s in selections]
    undo = [OneQubitCycle.of([_UNDO[c] for c in s]) for s in selections]
    u: list[OneQubitCycle] = []
    for j in range(m):
        before = h_t if j == 0 else undo[j - 1]
        after = sel[j] if j < m - 1 else h_t
        u.append(before.then(after))
    circuit = Circuit.from_layers(n, u, target.entangling_cycles)
    return TrapCircuit(circuit, t, tuple(selections))


def trap_configurations(target: Circuit) -> Iterator[tuple[tuple[str, ...], int]]:
    """Every (selections, t) a trap for ``target`` can take, each equally likely."""
    n = target.n
    cycles = target.entangling_cycles
    per_cycle = []
    for cyc in cycles:
        k = len(selection_options(cyc, n))
        per_cycle.append([_letters_from_bits(cyc, n, bits) for bits in itertools.product((0, 1), repeat=k)])
    for choice in itertools.product(*per_cycle):
        for t in (0, 1):
            yield tuple(choice), t


def count_trap_configurations(target: Circuit) -> int:
    k = sum(len(selection_options(c, target.n)) for c in target.entangling_cycles)
    return 2 ** (k + 1)


def _random_pauli_cycle(n: int, rng: np.random.Generator, z_only: bool = False) -> PauliString:
    z = int(rng.integers(0, 1 << n))
    x = 0 if z_only else int(rng.integers(0, 1 << n))
    return PauliString(n, x, z)


def _pauli_cycle(p: PauliString) -> OneQubitCycle:
    return OneQubitCycle.of(list(p.label()))


def pad_circuit(circuit: Circuit, paulis: Sequence[PauliString]) -> Circuit:
    """Insert pad Paulis after each one-qubit cycle and their undo after each cZ cycle, then merge."""
    circuit.require_canonical()
    n, m = circuit.n, circuit.m
    if len(paulis) != m:
        raise ValueError(f"need {m} pad Paulis, got {len(paulis)}")
    u = list(circuit.one_qubit_cycles)
    cz = circuit.entangling_cycles
    for j, p in enumerate(paulis):
        if p.is_identity():
            continue
        u[j] = u[j].then(_pauli_cycle(p))
        if j < m - 1:
            undo = clifford.conjugate(cz[j], p)
            u[j + 1] = _pauli_cycle(undo).then(u[j + 1])
    return Circuit.from_layers(n, u, cz)


def draw_pad(circuit: Circuit, rng: np.random.Generator) -> tuple[PauliString, ...]:
    """Random pad Paulis; the last one is Z-type since nothing follows it but the Z measurement."""
    m = circuit.m
    return tuple(_random_pauli_cycle(circuit.n, rng, z_only=(j == m - 1)) for j in range(m))


def apply_qotp(circuit: Circuit, rng: np.random.Generator) -> Circuit:
    return pad_circuit(circuit, draw_pad(circuit, rng))


def generate_trap(target: Circuit, rng: np.random.Generator, qotp: bool = True) -> TrapCircuit:
    _require_target(target)
    n = target.n
    selections = []
    for cyc in target.entangling_cycles:
        bits = rng.integers(0, 2, size=len(selection_options(cyc, n)))
        selections.append(_letters_from_bits(cyc, n, bits))
    t = int(rng.integers(0, 2))
    trap = assemble_trap(target, selections, t)
    if qotp:
        pad = draw_pad(trap.circuit, rng)
        trap = TrapCircuit(pad_circuit(trap.circuit, pad), t, trap.selections, pad)
    offset, basis = clifford.outcome_space(trap.circuit)
    if offset or basis:
        raise AssertionError("generated trap does not return all zeros")
    return trap


# ------------------------------------------------------------------ protocol


class ExecutionError(RuntimeError):
    def __init__(self, index: int, cause: BaseException):
        super().__init__(f"executor failed on circuit {index}: {cause}")
        self.index = index


@dataclass
class AccreditationReport:
    theta: float
    alpha: float
    v: int
    n_inc: int
    target_position: int
    target_samples: dict[str, int]
    trap_outcomes: list[int]
    trap_outputs: list[int] = field(default_factory=list, repr=False)
    n: int = 0

    @property
    def bound(self) -> float:
        return 2.0 * self.n_inc / self.v

    @property
    def p_inc_estimate(self) -> float:
        return self.n_inc / self.v

    @property
    def nontrivial(self) -> bool:
        return self.bound < 1.0

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "alpha": self.alpha,
            "v": self.v,
            "n_inc": self.n_inc,
            "bound": self.bound,
            "nontrivial": self.nontrivial,
            "target_position": self.target_position,
            "target_samples": dict(self.target_samples),
            "trap_outcomes": list(self.trap_outcomes),
        }

    def summary(self) -> str:
        theta_v = achieved_theta(self.v, self.alpha)
        lines = [
            f"traps: {self.v}, failed: {self.n_inc}, p_inc estimate: {self.p_inc_estimate:.4f}",
            f"bound 2*N_inc/v = {self.bound:.4f} ({'nontrivial' if self.nontrivial else 'trivial, exceeds 1'})",
            f"target run at position {self.target_position} with {sum(self.target_samples.values())} shots",
            f"with confidence {self.alpha:g}, |N_inc/v - p_inc| <= {theta_v / 2:.4f},"
            f" so VD <= {self.bound + theta_v:.4f}",
        ]
        if theta_v > self.theta + 1e-15:
            lines.append(f"warning: v={self.v} only achieves theta={theta_v:.4f} > requested {self.theta:g}")
        return "\n".join(lines) + "\n"


def run_protocol(
    target: Circuit,
    params: ProtocolParams,
    executor: Executor,
    target_shots: int = 1,
    max_workers: int | None = None,
) -> AccreditationReport:
    """Run v traps and the target (all padded) in a random order.

    Circuit k draws all of its randomness from its own child of
    ``SeedSequence(params.seed)``, so sequential and threaded runs agree.
    """
    _require_target(target)
    v = params.traps
    children = np.random.SeedSequence(params.seed).spawn(v + 2)
    position = int(np.random.default_rng(children[0]).integers(0, v + 1))

    def job(k: int):
        rng = np.random.default_rng(children[k + 1])
        try:
            if k == position:
                circ = apply_qotp(target, rng)
                return np.asarray(executor(circ, target_shots, rng), dtype=np.int64)
            trap = generate_trap(target, rng)
            return int(np.asarray(executor(trap.circuit, 1, rng))[0])
        except Exception as exc:  # noqa: BLE001 - re-raised with the index
            raise ExecutionError(k, exc) from exc

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(job, range(v + 1)))
    else:
        results = [job(k) for k in range(v + 1)]

    target_out = results[position]
    trap_outputs = [r for k, r in enumerate(results) if k != position]
    outcomes = [int(r != 0) for r in trap_outputs]
    counts = Counter(int(s) for s in target_out)
    samples = {bitstring(k, target.n): counts[k] for k in sorted(counts)}
    return AccreditationReport(
        theta=params.theta,
        alpha=params.alpha,
        v=v,
        n_inc=sum(outcomes),
        target_position=position,
        target_samples=samples,
        trap_outcomes=outcomes,
        trap_outputs=trap_outputs,
        n=target.n,
    )

"""Stochastic Pauli noise models attached to the fault slots of a circuit.

A model has one sparse Pauli distribution per slot (slot 0 after preparation,
slot j after the j-th cZ cycle, slot m after the last one-qubit cycle), plus
independent classical bit flips at preparation and measurement.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .circuit import Circuit, OneQubitCycle, PauliString

PROB_TOL = 1e-12


@dataclass(frozen=True)
class CyclePauliNoise:
    """Sparse distribution over non-identity Paulis; the identity takes the remainder."""

    n: int
    entries: tuple[tuple[PauliString, float], ...] = ()

    def __post_init__(self):
        merged: dict[tuple[int, int], float] = {}
        for p, prob in self.entries:
            if p.n != self.n:
                raise ValueError("Pauli width does not match the noise width")
            prob = float(prob)
            if not prob >= -PROB_TOL:
                raise ValueError(f"negative probability {prob} for {p.label()}")
            if p.is_identity():
                continue
            merged[(p.x, p.z)] = merged.get((p.x, p.z), 0.0) + max(prob, 0.0)
        total = sum(merged.values())
        if total > 1 + PROB_TOL:
            raise ValueError(f"slot probabilities sum to {total} > 1")
        ordered = tuple(
            (PauliString(self.n, x, z), q) for (x, z), q in sorted(merged.items(), key=lambda kv: (kv[0][1], kv[0][0])) if q > 0
        )
        object.__setattr__(self, "entries", ordered)

    @classmethod
    def from_mapping(cls, n: int, mapping: Mapping[str | PauliString, float]) -> "CyclePauliNoise":
        items = []
        for key, prob in mapping.items():
            p = key if isinstance(key, PauliString) else PauliString.from_label(key)
            items.append((p, prob))
        return cls(n, tuple(items))

    @property
    def q_tot(self) -> float:
        return float(sum(q for _, q in self.entries))

    @property
    def identity_prob(self) -> float:
        return max(0.0, 1.0 - self.q_tot)

    def support(self) -> tuple[list[PauliString], np.ndarray]:
        """All outcomes with the identity first, and their probabilities."""
        paulis = [PauliString.identity(self.n)] + [p for p, _ in self.entries]
        probs = np.array([self.identity_prob] + [q for _, q in self.entries])
        return paulis, probs / probs.sum()

    def as_dict(self) -> dict[tuple[int, int], float]:
        out = {(0, 0): self.identity_prob}
        out.update({(p.x, p.z): q for p, q in self.entries})
        return out

    def tv_distance(self, other: "CyclePauliNoise") -> float:
        a, b = self.as_dict(), other.as_dict()
        return 0.5 * sum(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in set(a) | set(b))

    def x_projection(self) -> "CyclePauliNoise":
        """Drop Z components; what remains is all a Z measurement or |0> input can see."""
        return CyclePauliNoise(self.n, tuple((PauliString(self.n, p.x, 0), q) for p, q in self.entries))

    def to_mapping(self) -> dict[str, float]:
        return {p.label(): q for p, q in self.entries}


@dataclass(frozen=True)
class GateDependence:
    epsilon: float
    seed: int


@dataclass(frozen=True)
class DeviceProfile:
    rate_1q: float
    rate_2q: float
    rate_meas: float

    def __post_init__(self):
        for name in ("rate_1q", "rate_2q", "rate_meas"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")


@dataclass(frozen=True)
class NoiseModel:
    n: int
    slots: tuple[CyclePauliNoise, ...]
    prep_flip: tuple[float, ...] = ()
    meas_flip: tuple[float, ...] = ()
    gate_dependence: GateDependence | None = None
    meas_rate_exact: bool = False

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(self.slots))
        if len(self.slots) < 2:
            raise ValueError("a model needs at least two slots (m >= 1)")
        for s in self.slots:
            if s.n != self.n:
                raise ValueError("slot width mismatch")
        for name in ("prep_flip", "meas_flip"):
            vals = tuple(float(v) for v in getattr(self, name)) or (0.0,) * self.n
            if len(vals) != self.n:
                raise ValueError(f"{name} needs one rate per qubit")
            if any(not 0.0 <= v <= 1.0 for v in vals):
                raise ValueError(f"{name} rates must lie in [0, 1]")
            object.__setattr__(self, name, vals)

    @classmethod
    def noiseless(cls, n: int, m: int) -> "NoiseModel":
        return cls(n, tuple(CyclePauliNoise(n) for _ in range(m + 1)))

    @classmethod
    def from_slot_mappings(cls, n: int, mappings: Sequence[Mapping[str, float]], **kw) -> "NoiseModel":
        return cls(n, tuple(CyclePauliNoise.from_mapping(n, mp) for mp in mappings), **kw)

    @property
    def m(self) -> int:
        return len(self.slots) - 1

    def check_circuit(self, circuit: Circuit) -> None:
        if circuit.n != self.n or circuit.m != self.m:
            raise ValueError(
                f"noise model is for n={self.n}, m={self.m}; circuit has n={circuit.n}, m={circuit.m}"
            )

    def slot_for(self, circuit: Circuit, j: int) -> CyclePauliNoise:
        """Distribution at slot j when running ``circuit`` (gate dependence applied)."""
        base = self.slots[j]
        if self.gate_dependence is None or j == 0 or self.gate_dependence.epsilon == 0:
            return base
        cycle = circuit.one_qubit_cycles[j - 1]
        return gate_dependent_variant(base, self.gate_dependence.epsilon, self.gate_dependence.seed, cycle)

    def q_tots(self) -> list[float]:
        return [s.q_tot for s in self.slots]

    def meas_cycle_rate(self) -> float:
        if self.meas_rate_exact:
            return 1.0 - math.prod(1.0 - p for p in self.meas_flip)
        return float(sum(self.meas_flip))

    def with_gate_dependence(self, epsilon: float, seed: int) -> "NoiseModel":
        _check_epsilon(epsilon)
        return NoiseModel(self.n, self.slots, self.prep_flip, self.meas_flip, GateDependence(epsilon, seed), self.meas_rate_exact)


def _uniform_local_paulis(n: int, qubits: Sequence[int], rate: float) -> list[tuple[PauliString, float]]:
    """``rate`` spread evenly over the non-identity Paulis supported on ``qubits``."""
    combos = [c for c in itertools.product(range(4), repeat=len(qubits)) if any(c)]
    out = []
    for combo in combos:
        x = z = 0
        for q, code in zip(qubits, combo):
            x |= (code & 1) << q
            z |= (code >> 1) << q
        out.append((PauliString(n, x, z), rate / len(combos)))
    return out


def from_device_profile(profile: DeviceProfile, circuit: Circuit, meas_rate_exact: bool = False) -> NoiseModel:
    """Slot noise from scalar gate error rates.

    Each one-qubit cycle contributes ``rate_1q`` spread over weight-1 Paulis on
    all qubits; each cZ gate contributes ``rate_2q`` spread over the 15 Paulis
    on its pair.  Rates add within a slot.  Measurement errors are independent
    bit flips at ``rate_meas`` per qubit; preparation is taken to be ideal.
    """
    n, m = circuit.n, circuit.m
    slots = [CyclePauliNoise(n)]
    for j in range(1, m + 1):
        entries: list[tuple[PauliString, float]] = []
        if profile.rate_1q > 0:
            for q in range(n):
                entries += _uniform_local_paulis(n, [q], profile.rate_1q / n)
        if j < m and profile.rate_2q > 0:
            for a, b in circuit.entangling_cycles[j - 1].pairs:
                entries += _uniform_local_paulis(n, [a, b], profile.rate_2q)
        slots.append(CyclePauliNoise(n, tuple(entries)))
    return NoiseModel(n, tuple(slots), meas_flip=(profile.rate_meas,) * n, meas_rate_exact=meas_rate_exact)


def profile_cycle_rates(profile: DeviceProfile, circuit: Circuit, meas_rate_exact: bool = False) -> list[float]:
    """Per-cycle rates in the back-of-envelope style: one-qubit cycles, cZ cycles, measurement round."""
    n = circuit.n
    rates = [profile.rate_1q] * circuit.m
    rates += [profile.rate_2q * len(c.pairs) for c in circuit.entangling_cycles]
    if meas_rate_exact:
        rates.append(1.0 - (1.0 - profile.rate_meas) ** n)
    else:
        rates.append(n * profile.rate_meas)
    return rates


def _check_epsilon(epsilon: float) -> None:
    if not 0.0 <= epsilon <= 0.5:
        raise ValueError(f"epsilon={epsilon} outside [0, 0.5]")


def _cycle_digest(cycle: OneQubitCycle) -> int:
    text = repr([g.to_spec() for g in cycle.gates]).encode()
    return int.from_bytes(hashlib.sha256(text).digest()[:8], "little")


def gate_dependent_variant(base: CyclePauliNoise, epsilon: float, seed: int, one_qubit_cycle: OneQubitCycle) -> CyclePauliNoise:
    """Perturb ``base`` deterministically from (seed, cycle), keeping TV distance <= epsilon.

    Every outcome (identity included) gets a multiplicative factor
    ``1 + lam * (u_k - mean)`` with ``u_k`` uniform in [-1, 1]; ``lam`` is chosen
    so the total-variation shift is at most epsilon and no probability goes negative.
    """
    _check_epsilon(epsilon)
    if epsilon == 0:
        return base
    rng = np.random.default_rng([seed, _cycle_digest(one_qubit_cycle)])
    paulis, probs = base.support()
    u = rng.uniform(-1.0, 1.0, size=len(probs))
    w = probs * u
    w -= probs * w.sum()
    spread = 0.5 * np.abs(w).sum()
    if spread == 0:
        return base
    lam = min(0.5, epsilon / spread)
    new = np.clip(probs + lam * w, 0.0, None)
    new /= new.sum()
    return CyclePauliNoise(base.n, tuple((p, float(q)) for p, q in zip(paulis[1:], new[1:])))


def p_err_total(model: NoiseModel, effective: bool = False) -> float:
    """Probability that any error (slot Pauli or classical flip) occurs in a run.

    With ``effective=True`` the Z components of the first and last slots are
    dropped first: a Z-type Pauli leaves |0...0> unchanged and commutes with the
    final Z measurement, so those events cannot influence any output.
    """
    slots = list(model.slots)
    if effective:
        slots[0] = slots[0].x_projection()
        slots[-1] = slots[-1].x_projection()
    keep = math.prod(1.0 - s.q_tot for s in slots)
    keep *= math.prod(1.0 - p for p in model.prep_flip)
    keep *= math.prod(1.0 - p for p in model.meas_flip)
    return 1.0 - keep


def cancellation_bound_C(model_or_rates: NoiseModel | Iterable[float]) -> float:
    """Sum of q_tot(j) * q_tot(j') over unordered pairs of distinct cycles.

    A model contributes its slot rates (preparation flips folded into slot 0)
    plus the measurement round as one extra cycle.
    """
    if isinstance(model_or_rates, NoiseModel):
        model = model_or_rates
        rates = model.q_tots()
        prep = 1.0 - math.prod(1.0 - p for p in model.prep_flip)
        rates[0] = 1.0 - (1.0 - rates[0]) * (1.0 - prep)
        rates.append(model.meas_cycle_rate())
    else:
        rates = [float(r) for r in model_or_rates]
    s = sum(rates)
    return 0.5 * (s * s - sum(r * r for r in rates))

"""Exact oracles and diagnostics around the accreditation bound.

Exact trap statistics use the fact that a trap is Clifford, so every fault
pattern merges into one Pauli before measurement and only its X part flips
bits.  One-time-pad Paulis commute with Pauli faults up to phase, so they do
not change which patterns are detected; the enumerations below therefore
average over Clifford selections and t only (the tests check this against
explicit pad enumeration on tiny layouts).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import binom

from . import clifford
from .accredit import (
    ProtocolParams,
    assemble_trap,
    count_trap_configurations,
    generate_trap,
    pad_circuit,
    trap_configurations,
)
from .circuit import Circuit, PauliString, all_paulis
from .noise import NoiseModel, cancellation_bound_C, p_err_total
from .statevector import NoisySimulator, empirical_distribution, ideal_distribution, noisy_density_evolution, sample_noisy

EXACT_MAX_QUBITS = 4
EXACT_MAX_CONFIGS = 2**14
NORM_TOL = 1e-9
KAPPA = 1.7


class ExactScaleError(ValueError):
    pass


def variation_distance(p, q) -> float:
    """Half the L1 distance; dicts are compared over the union of their keys."""
    if isinstance(p, Mapping) or isinstance(q, Mapping):
        keys = sorted(set(p) | set(q))
        pa = np.array([p.get(k, 0.0) for k in keys], dtype=float)
        qa = np.array([q.get(k, 0.0) for k in keys], dtype=float)
    else:
        pa, qa = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
        if pa.shape != qa.shape:
            raise ValueError("distributions live on different outcome spaces")
    for name, arr in (("p", pa), ("q", qa)):
        if abs(arr.sum() - 1.0) > NORM_TOL or (arr < -NORM_TOL).any():
            raise ValueError(f"{name} is not a normalised distribution")
    return float(0.5 * np.abs(pa - qa).sum())


# ----------------------------------------------------------- exact trap stats


def _check_exact_scale(target: Circuit) -> int:
    if target.n > EXACT_MAX_QUBITS:
        raise ExactScaleError(f"n={target.n} exceeds the exact ceiling {EXACT_MAX_QUBITS}; use p_inc_monte_carlo")
    count = count_trap_configurations(target)
    if count > EXACT_MAX_CONFIGS:
        raise ExactScaleError(f"{count} trap configurations exceed {EXACT_MAX_CONFIGS}; use p_inc_monte_carlo")
    return count


def _walsh(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    par = np.vectorize(lambda v: bin(v).count("1") & 1)(idx[:, None] & idx[None, :])
    return 1.0 - 2.0 * par


def _event_masks(circuit: Circuit, noise: NoiseModel, full: bool):
    """Independent events as lists of (mask, probability) before measurement.

    ``full`` keeps the Z part (mask = x | z << n); otherwise only X bits.
    """
    n = circuit.n
    prop = clifford.PauliPropagator(circuit)

    def enc(x: int, z: int) -> int:
        return x | (z << n) if full else x

    events = []
    for j in range(noise.m + 1):
        dist = noise.slot_for(circuit, j)
        events.append([(enc(*prop.push_masks(p.x, p.z, j)), q) for p, q in dist.entries])
    for q, rate in enumerate(noise.prep_flip):
        if rate:
            events.append([(enc(*prop.push_masks(1 << q, 0, 0)), rate)])
    for q, rate in enumerate(noise.meas_flip):
        if rate:
            events.append([(enc(1 << q, 0), rate)])
    return events


def _prob_zero(events, bits: int, walsh: np.ndarray) -> float:
    """P(XOR of all event masks = 0) via the Walsh-Hadamard transform."""
    spectrum = np.ones(1 << bits)
    for ev in events:
        if not ev:
            continue
        vec = np.zeros(1 << bits)
        vec[0] = 1.0 - sum(q for _, q in ev)
        for mask, q in ev:
            vec[mask] += q
        spectrum *= walsh @ vec
    return float(spectrum.sum() / (1 << bits))


def _trap_circuits(target: Circuit):
    for selections, t in trap_configurations(target):
        yield assemble_trap(target, selections, t).circuit


def p_inc_exact(target: Circuit, noise: NoiseModel) -> float:
    """Probability that a random trap for ``target`` returns a non-zero string."""
    count = _check_exact_scale(target)
    noise.check_circuit(target)
    n = target.n
    walsh = _walsh(n)
    total = 0.0
    for circ in _trap_circuits(target):
        total += 1.0 - _prob_zero(_event_masks(circ, noise, full=False), n, walsh)
    return total / count


def p_canc_exact(layout: Circuit, noise: NoiseModel) -> float:
    """Probability that at least one error occurs yet everything merges to the identity."""
    count = _check_exact_scale(layout)
    noise.check_circuit(layout)
    n = layout.n
    walsh = _walsh(2 * n)
    total = 0.0
    for circ in _trap_circuits(layout):
        events = _event_masks(circ, noise, full=True)
        none = math.prod(1.0 - sum(q for _, q in ev) for ev in events)
        total += _prob_zero(events, 2 * n, walsh) - none
    p_canc = max(0.0, total / count)
    bound = cancellation_bound_C(noise)
    if p_canc > bound + 1e-12:
        raise AssertionError(f"cancellation probability {p_canc} exceeds C = {bound}")
    return p_canc


def detection_probability(layout: Circuit, pattern: Sequence[PauliString], enumerate_pad: bool = False) -> float:
    """Fraction of trap configurations whose output is flipped by a fixed fault pattern.

    With ``enumerate_pad`` every one-time-pad draw is enumerated explicitly
    as well and each padded trap is run through the stabilizer engine.
    """
    _check_exact_scale(layout)
    hits = total = 0
    for selections, t in trap_configurations(layout):
        trap = assemble_trap(layout, selections, t).circuit
        if not enumerate_pad:
            hits += clifford.trap_output_under_fault(trap, pattern) != 0
            total += 1
            continue
        pads_per_cycle = [all_paulis(layout.n)] * (layout.m - 1)
        pads_per_cycle.append([p for p in all_paulis(layout.n) if p.x == 0])
        for pad in itertools.product(*pads_per_cycle):
            hits += clifford.trap_output_under_fault(pad_circuit(trap, pad), pattern) != 0
            total += 1
    return hits / total


def statement1_verify(layout: Circuit, fault, slot: int | None = None, enumerate_pad: bool = False) -> float:
    """Detection probability of a single-slot fault, asserted to be at least 1/2.

    ``fault`` is either a PauliString placed at ``slot`` or a full pattern
    with exactly one non-identity entry.  Z-type faults at the first or last
    slot are rejected: they act trivially on |0...0> and on the Z readout.
    """
    m = layout.m
    if slot is None:
        pattern = list(fault)
        active = [j for j, p in enumerate(pattern) if not p.is_identity()]
        if len(active) != 1:
            raise ValueError("statement1_verify needs exactly one faulty slot")
        slot = active[0]
    else:
        if not 0 <= slot <= m:
            raise ValueError(f"slot {slot} outside 0..{m}")
        pattern = [PauliString.identity(layout.n)] * (m + 1)
        pattern[slot] = fault
    p = pattern[slot]
    if p.is_identity():
        raise ValueError("identity is not a fault")
    if slot in (0, m) and p.x == 0:
        raise ValueError(f"a Z-type fault at slot {slot} has no physical effect")
    prob = detection_probability(layout, pattern, enumerate_pad)
    if prob < 0.5 - 1e-12:
        raise AssertionError(f"detection probability {prob} below 1/2")
    return prob


def single_slot_catalogue(layout: Circuit, max_weight: int = 2):
    """All (slot, Pauli) single-slot faults of weight <= max_weight with a physical effect."""
    m = layout.m
    for slot in range(m + 1):
        for p in all_paulis(layout.n):
            if p.is_identity() or p.weight() > max_weight:
                continue
            if slot in (0, m) and p.x == 0:
                continue
            yield slot, p


# --------------------------------------------------------- Monte Carlo p_inc


def p_inc_monte_carlo(target: Circuit, noise: NoiseModel, traps: int, rng: np.random.Generator) -> float:
    failed = 0
    for _ in range(traps):
        trap = generate_trap(target, rng)
        failed += int(sample_noisy(trap.circuit, noise, 1, rng)[0] != 0)
    return failed / traps


def simulate_trap_outputs(
    target: Circuit, noise: NoiseModel, traps: int, shots_per_trap: int, rng: np.random.Generator
) -> np.ndarray:
    """Noisy outputs of ``traps`` fresh padded traps, ``shots_per_trap`` shots each."""
    outs = [sample_noisy(generate_trap(target, rng).circuit, noise, shots_per_trap, rng) for _ in range(traps)]
    return np.concatenate(outs) if outs else np.zeros(0, dtype=np.int64)


# ----------------------------------------------------------------- VD bound


@dataclass
class VdBoundResult:
    vd: float
    p_inc: float
    bound: float
    holds: bool
    mode: str
    p_err: float | None = None

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "vd": self.vd,
            "p_inc": self.p_inc,
            "bound": self.bound,
            "holds": self.holds,
            "p_err": self.p_err,
        }


def exact_vd(target: Circuit, noise: NoiseModel) -> float:
    return variation_distance(ideal_distribution(target), noisy_density_evolution(target, noise).probs)


def vd_vs_bound(
    target: Circuit,
    noise: NoiseModel,
    params: ProtocolParams | None = None,
    mode: str = "exact",
    shots: int = 100_000,
) -> VdBoundResult:
    """Compare the variation distance of the noisy target with 2 p_inc.

    Exact mode uses the density-matrix engine and trap enumeration.  Sampled
    mode estimates VD from ``shots`` noisy samples and p_inc from the
    protocol's trap count, and compares with 2 (p_inc + theta/2).
    """
    if mode == "exact":
        if target.n > EXACT_MAX_QUBITS:
            raise ExactScaleError(f"n={target.n} exceeds the exact ceiling {EXACT_MAX_QUBITS}")
        vd = exact_vd(target, noise)
        p_inc = p_inc_exact(target, noise)
        bound = 2.0 * p_inc
        return VdBoundResult(vd, p_inc, bound, vd <= bound + 1e-9, mode, p_err_total(noise, effective=True))
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    params = params or ProtocolParams(0.13, 0.95)
    rng = np.random.default_rng(params.seed)
    samples = NoisySimulator(noise)(target, shots, rng)
    vd = variation_distance(ideal_distribution(target), empirical_distribution(samples, target.n))
    p_inc = p_inc_monte_carlo(target, noise, params.traps, rng)
    bound = 2.0 * p_inc + params.theta
    return VdBoundResult(vd, p_inc, bound, vd <= bound, mode)


# ------------------------------------------------------- accept/reject bound


def _eta(p: float, v: np.ndarray, kappa: float) -> np.ndarray:
    return kappa / ((v + 1.0) * np.exp(v * np.log1p(-p)))


def original_ap_bound(p_inc: float, v_max: int = 10**6, kappa: float = KAPPA) -> tuple[float, int]:
    """Best bound of the accept/reject protocol: min over v of kappa / ((v+1)(1-p)^v).

    The ratio of consecutive terms is (v+1)/((v+2)(1-p)), which exceeds 1
    once v >= (1-2p)/p, so the minimum sits at that integer (clipped to
    [1, v_max]); its neighbours are checked for rounding ties.
    """
    if not 0 < p_inc < 1:
        raise ValueError("p_inc must lie in (0, 1)")
    if v_max < 1:
        raise ValueError("v_max must be at least 1")
    star = max(1, math.ceil((1.0 - 2.0 * p_inc) / p_inc))
    cands = np.array(sorted({min(max(v, 1), v_max) for v in (star - 1, star, star + 1)}), dtype=float)
    vals = _eta(p_inc, cands, kappa)
    k = int(np.argmin(vals))
    return float(vals[k]), int(cands[k])


@dataclass
class BoundComparison:
    p_inc: list[float]
    eta_best: list[float]
    argmin_v: list[int]
    present_bound: list[float]

    @property
    def eta_trivial(self) -> list[bool]:
        return [e > 1.0 for e in self.eta_best]

    @property
    def present_trivial(self) -> list[bool]:
        return [b > 1.0 for b in self.present_bound]

    def to_csv(self) -> str:
        rows = ["p_inc,eta_best,present_bound"]
        rows += [f"{p!r},{e!r},{b!r}" for p, e, b in zip(self.p_inc, self.eta_best, self.present_bound)]
        return "\n".join(rows) + "\n"


def compare_bounds(grid: Sequence[float], v_max: int = 10**6, kappa: float = KAPPA) -> BoundComparison:
    etas, vs = [], []
    for p in grid:
        e, v = original_ap_bound(p, v_max, kappa)
        etas.append(e)
        vs.append(v)
    return BoundComparison(list(map(float, grid)), etas, vs, [2.0 * float(p) for p in grid])


# -------------------------------------------------------- Hamming diagnostic


@dataclass
class HammingReport:
    n: int
    empirical: np.ndarray
    model: np.ndarray
    p_flip: float
    fitted_p_flip: float
    tv: float

    def to_csv(self) -> str:
        rows = ["h,empirical,model"]
        rows += [f"{h},{e!r},{m!r}" for h, (e, m) in enumerate(zip(self.empirical, self.model))]
        return "\n".join(rows) + "\n"


def hamming_diagnostic(trap_outputs: Sequence[int], n: int, p_flip: float | None = None) -> HammingReport:
    """Hamming-weight histogram of trap outputs against independent bit flips.

    Without ``p_flip`` the model uses the fitted rate (mean weight / n).
    """
    outs = np.asarray(trap_outputs, dtype=np.int64)
    if outs.size == 0:
        raise ValueError("no trap outputs to diagnose")
    if (outs < 0).any() or (outs >> n).any():
        raise ValueError(f"outputs must be {n}-bit strings")
    weights = np.array([bin(int(o)).count("1") for o in outs])
    emp = np.bincount(weights, minlength=n + 1).astype(float) / outs.size
    fitted = float(weights.mean() / n)
    rate = fitted if p_flip is None else float(p_flip)
    model = binom.pmf(np.arange(n + 1), n, rate)
    model = model / model.sum()
    return HammingReport(n, emp, model, rate, fitted, float(0.5 * np.abs(emp - model).sum()))


# ------------------------------------------------------ gate dependence harness


@dataclass
class RobustnessRow:
    epsilon: float
    seed: int
    vd: float
    p_inc: float
    vd_reference: float
    slack: float

    @property
    def two_p_inc(self) -> float:
        return 2.0 * self.p_inc

    @property
    def holds(self) -> bool:
        return self.vd <= self.two_p_inc + self.slack + 1e-9

    @property
    def deviation_ok(self) -> bool:
        return abs(self.vd - self.vd_reference) <= self.slack + 1e-12


def robustness_csv(rows: Sequence[RobustnessRow]) -> str:
    out = ["epsilon,seed,vd,two_p_inc,holds"]
    out += [f"{r.epsilon!r},{r.seed},{r.vd!r},{r.two_p_inc!r},{str(r.holds).lower()}" for r in rows]
    return "\n".join(out) + "\n"


def gate_dependence_robustness(
    target: Circuit, base: NoiseModel, epsilons: Sequence[float], seeds: Sequence[int]
) -> list[RobustnessRow]:
    """Exact VD and p_inc when slot noise depends on the one-qubit cycle it follows.

    The perturbation is keyed on the unpadded cycles of the target and of each
    trap configuration.  The allowed slack is m * epsilon.
    """
    if base.gate_dependence is not None:
        raise ValueError("base model already carries gate dependence")
    ref = exact_vd(target, base)
    rows = []
    for eps in epsilons:
        for seed in seeds:
            model = base.with_gate_dependence(eps, seed)
            rows.append(RobustnessRow(float(eps), int(seed), exact_vd(target, model), p_inc_exact(target, model), ref, target.m * eps))
    return rows

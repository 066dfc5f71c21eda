"""HTTP service exposing the accreditation core.

Run with ``uvicorn qaccredit.service:app``; the CLI talks to it either over
HTTP (``--server``) or in process.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import analysis
from .accredit import ProtocolParams, generate_trap, run_protocol
from .circuit import (
    GHZ10_TOPOLOGY,
    Circuit,
    bitstring,
    build_ghz_layout,
    build_qft_layout,
    build_random_layout,
    doubling_topology,
    parse_bitstring,
)
from .noise import CyclePauliNoise, DeviceProfile, NoiseModel, from_device_profile
from .schemas import (
    AccreditRequest,
    AccreditResponse,
    BoundRow,
    CompareBoundsRequest,
    CompareBoundsResponse,
    DiagnoseRequest,
    DiagnoseResponse,
    GenerateTrapsRequest,
    GenerateTrapsResponse,
    HammingRow,
    NoiseSpec,
    OracleRequest,
    OracleResponse,
    ProtocolSpec,
    TargetSpec,
    TrapRecord,
)
from .statevector import NoisySimulator

app = FastAPI(title="qaccredit")


@app.exception_handler(ValueError)
async def _value_error(request: Request, exc: ValueError):
    return JSONResponse(status_code=400, content={"detail": str(exc)})


def build_target(spec: TargetSpec) -> Circuit:
    if spec.circuit is not None:
        circuit = Circuit.from_dict(spec.circuit)
    elif spec.builder == "ghz":
        topo = None
        if spec.topology == "ghz10":
            if spec.n != 10:
                raise ValueError("the ghz10 topology needs n = 10")
            topo = GHZ10_TOPOLOGY
        elif spec.topology == "doubling":
            topo = doubling_topology(spec.n)
        circuit = build_ghz_layout(spec.n, topo)
    elif spec.builder == "qft":
        circuit = build_qft_layout(spec.n)
    else:
        circuit = build_random_layout(spec.n, spec.m, spec.seed)
    circuit.require_canonical()
    return circuit


def build_noise(spec: NoiseSpec, circuit: Circuit) -> NoiseModel:
    n, m = circuit.n, circuit.m
    base = from_device_profile(DeviceProfile(spec.rate_1q, spec.rate_2q, spec.rate_meas), circuit, spec.meas_exact)
    slots = list(base.slots)
    for j, paulis in spec.slots.items():
        if not 0 <= j <= m:
            raise ValueError(f"slot {j} outside 0..{m}")
        extra = CyclePauliNoise.from_mapping(n, paulis)
        slots[j] = CyclePauliNoise(n, slots[j].entries + extra.entries)

    def per_qubit(name, values, default):
        if values is None:
            return default
        if len(values) == 1:
            return tuple(values) * n
        if len(values) != n:
            raise ValueError(f"{name} needs 1 or {n} rates")
        return tuple(values)

    model = NoiseModel(
        n,
        tuple(slots),
        prep_flip=per_qubit("prep_flip", spec.prep_flip, ()),
        meas_flip=per_qubit("meas_flip", spec.meas_flip, base.meas_flip),
        meas_rate_exact=spec.meas_exact,
    )
    if spec.epsilon > 0:
        model = model.with_gate_dependence(spec.epsilon, spec.gd_seed)
    return model


def _params(spec: ProtocolSpec) -> ProtocolParams:
    return ProtocolParams(spec.theta, spec.alpha, spec.v, spec.seed)


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/accredit", response_model=AccreditResponse)
def accredit(req: AccreditRequest):
    target = build_target(req.target)
    noise = build_noise(req.noise, target)
    report = run_protocol(target, _params(req.protocol), NoisySimulator(noise), req.shots, req.max_workers)
    return AccreditResponse(
        report=report.to_dict(),
        summary=report.summary(),
        trap_outputs=[bitstring(o, target.n) for o in report.trap_outputs],
    )


@app.post("/oracle", response_model=OracleResponse)
def oracle(req: OracleRequest):
    target = build_target(req.target)
    noise = build_noise(req.noise, target)
    params = _params(req.protocol) if req.protocol else None
    res = analysis.vd_vs_bound(target, noise, params, req.mode, req.shots)
    return OracleResponse(**res.to_dict())


@app.post("/diagnose", response_model=DiagnoseResponse)
def diagnose(req: DiagnoseRequest):
    if req.trap_outputs is not None:
        if not req.trap_outputs:
            raise ValueError("no trap outputs to diagnose")
        n = req.n or len(req.trap_outputs[0])
        if any(len(s) != n for s in req.trap_outputs):
            raise ValueError(f"trap outputs must all be {n}-bit strings")
        outs = [parse_bitstring(s) for s in req.trap_outputs]
    else:
        target = build_target(req.target)
        noise = build_noise(req.noise or NoiseSpec(), target)
        n = target.n
        rng = np.random.default_rng(req.seed)
        outs = analysis.simulate_trap_outputs(target, noise, req.traps, req.shots_per_trap, rng)
    rep = analysis.hamming_diagnostic(outs, n, req.p_flip)
    rows = [HammingRow(h=h, empirical=float(e), model=float(m)) for h, (e, m) in enumerate(zip(rep.empirical, rep.model))]
    return DiagnoseResponse(n=n, samples=len(outs), p_flip=rep.p_flip, fitted_p_flip=rep.fitted_p_flip, tv=rep.tv, rows=rows)


@app.post("/compare-bounds", response_model=CompareBoundsResponse)
def compare_bounds(req: CompareBoundsRequest):
    cmp = analysis.compare_bounds(req.grid, req.v_max, req.kappa)
    rows = [
        BoundRow(p_inc=p, eta_best=e, argmin_v=v, present_bound=b)
        for p, e, v, b in zip(cmp.p_inc, cmp.eta_best, cmp.argmin_v, cmp.present_bound)
    ]
    return CompareBoundsResponse(rows=rows)


@app.post("/generate-traps", response_model=GenerateTrapsResponse)
def generate_traps(req: GenerateTrapsRequest):
    target = build_target(req.target)
    children = np.random.SeedSequence(req.seed).spawn(req.count)
    records = []
    for k, child in enumerate(children):
        trap = generate_trap(target, np.random.default_rng(child), qotp=req.qotp)
        meta = trap.metadata()
        records.append(TrapRecord(index=k, circuit=trap.circuit.to_dict(), **meta))
    return GenerateTrapsResponse(n=target.n, m=target.m, seed=req.seed, traps=records)

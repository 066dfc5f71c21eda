"""Flat ``key = value`` configuration files.

Experiment file keys::

    target          ghz | qft | random        (or give target_json instead)
    target_n        qubit count
    target_m        one-qubit cycle count (random layouts)
    target_seed     layout seed (random layouts)
    target_topology doubling | ghz10          (ghz layouts)
    target_json     path to a circuit JSON file
    noise           path to a noise file (omitted: noiseless)
    theta, alpha    accuracy and confidence
    v               explicit trap count
    shots           target shots
    seed            protocol seed (mandatory)
    out             output directory

Noise file keys::

    rate_1q, rate_2q, rate_meas   device-profile rates
    meas_exact                    true: exact measurement-cycle rate in C
    prep_flip, meas_flip          one rate, or one per qubit (comma separated)
    slot.J                        extra Paulis at slot J, e.g. ``XI:0.1, ZZ:0.02``
    epsilon, gd_seed              gate-dependent perturbation

``#`` starts a comment.  Relative paths resolve against the file's directory.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

EXPERIMENT_KEYS = {
    "target", "target_n", "target_m", "target_seed", "target_topology", "target_json",
    "noise", "theta", "alpha", "v", "shots", "seed", "out",
}
NOISE_KEYS = {"rate_1q", "rate_2q", "rate_meas", "meas_exact", "prep_flip", "meas_flip", "epsilon", "gd_seed"}


class ConfigError(ValueError):
    pass


@dataclass
class _Entry:
    value: str
    line: int


def parse_kv(text: str, source: str = "<config>") -> dict[str, _Entry]:
    out: dict[str, _Entry] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} (first on line {out[key].line})")
        out[key] = _Entry(value, lineno)
    return out


class _Reader:
    def __init__(self, entries: dict[str, _Entry], source: str):
        self.entries = entries
        self.source = source

    def fail(self, key: str, msg: str):
        line = self.entries[key].line if key in self.entries else 0
        raise ConfigError(f"{self.source}:{line}: {key}: {msg}")

    def get(self, key: str, kind, default=None):
        if key not in self.entries:
            return default
        raw = self.entries[key].value
        try:
            if kind is bool:
                low = raw.lower()
                if low not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError(raw)
                return low in ("true", "1", "yes")
            return kind(raw)
        except ValueError:
            self.fail(key, f"cannot read {raw!r} as {kind.__name__}")

    def floats(self, key: str) -> list[float] | None:
        if key not in self.entries:
            return None
        try:
            return [float(s) for s in self.entries[key].value.split(",") if s.strip()]
        except ValueError:
            self.fail(key, f"expected comma-separated numbers, got {self.entries[key].value!r}")


def _resolve(base_dir: str, path: str | None) -> str | None:
    if path is None or os.path.isabs(path):
        return path
    return os.path.normpath(os.path.join(base_dir, path))


@dataclass
class NoiseConfig:
    rate_1q: float = 0.0
    rate_2q: float = 0.0
    rate_meas: float = 0.0
    meas_exact: bool = False
    prep_flip: list[float] | None = None
    meas_flip: list[float] | None = None
    slots: dict[int, dict[str, float]] = field(default_factory=dict)
    epsilon: float = 0.0
    gd_seed: int = 0


def parse_noise(text: str, source: str = "<noise>") -> NoiseConfig:
    entries = parse_kv(text, source)
    r = _Reader(entries, source)
    cfg = NoiseConfig()
    for key in entries:
        if key.startswith("slot."):
            idx = key[5:]
            if not idx.isdigit():
                r.fail(key, "slot index must be a non-negative integer")
            paulis: dict[str, float] = {}
            for item in entries[key].value.split(","):
                item = item.strip()
                if not item:
                    continue
                label, sep, prob = item.partition(":")
                label = label.strip().upper()
                if not sep or not label or set(label) - set("IXYZ"):
                    r.fail(key, f"bad entry {item!r}; expected LABEL:prob")
                try:
                    paulis[label] = paulis.get(label, 0.0) + float(prob)
                except ValueError:
                    r.fail(key, f"bad probability in {item!r}")
            cfg.slots[int(idx)] = paulis
        elif key not in NOISE_KEYS:
            r.fail(key, "unknown noise key")
    cfg.rate_1q = r.get("rate_1q", float, 0.0)
    cfg.rate_2q = r.get("rate_2q", float, 0.0)
    cfg.rate_meas = r.get("rate_meas", float, 0.0)
    cfg.meas_exact = r.get("meas_exact", bool, False)
    cfg.prep_flip = r.floats("prep_flip")
    cfg.meas_flip = r.floats("meas_flip")
    cfg.epsilon = r.get("epsilon", float, 0.0)
    cfg.gd_seed = r.get("gd_seed", int, 0)
    for key in ("rate_1q", "rate_2q", "rate_meas"):
        if not 0.0 <= getattr(cfg, key) <= 1.0:
            r.fail(key, "rate must lie in [0, 1]")
    if not 0.0 <= cfg.epsilon <= 0.5:
        r.fail("epsilon", "must lie in [0, 0.5]")
    return cfg


@dataclass
class ExperimentConfig:
    seed: int
    target: str | None = None
    target_n: int | None = None
    target_m: int | None = None
    target_seed: int = 0
    target_topology: str | None = None
    target_json: str | None = None
    noise: NoiseConfig | None = None
    theta: float = 0.13
    alpha: float = 0.95
    v: int | None = None
    shots: int = 1000
    out: str = "out"


def parse_experiment(text: str, source: str = "<config>", base_dir: str = ".") -> ExperimentConfig:
    entries = parse_kv(text, source)
    r = _Reader(entries, source)
    for key in entries:
        if key not in EXPERIMENT_KEYS:
            r.fail(key, "unknown key")
    if "seed" not in entries:
        raise ConfigError(f"{source}:0: seed: mandatory key missing")
    target = r.get("target", str)
    target_json = _resolve(base_dir, r.get("target_json", str))
    if (target is None) == (target_json is None):
        raise ConfigError(f"{source}:0: give exactly one of 'target' and 'target_json'")
    if target is not None and target not in ("ghz", "qft", "random"):
        r.fail("target", f"unknown builder {target!r}")
    if target is not None and "target_n" not in entries:
        raise ConfigError(f"{source}:0: target_n: required with a target builder")
    if target == "random" and "target_m" not in entries:
        raise ConfigError(f"{source}:0: target_m: required for random layouts")
    noise = None
    noise_path = _resolve(base_dir, r.get("noise", str))
    if noise_path is not None:
        try:
            with open(noise_path) as fh:
                noise = parse_noise(fh.read(), noise_path)
        except OSError as exc:
            r.fail("noise", f"cannot read {noise_path}: {exc.strerror}")
    cfg = ExperimentConfig(
        seed=r.get("seed", int),
        target=target,
        target_n=r.get("target_n", int),
        target_m=r.get("target_m", int),
        target_seed=r.get("target_seed", int, 0),
        target_topology=r.get("target_topology", str),
        target_json=target_json,
        noise=noise,
        theta=r.get("theta", float, 0.13),
        alpha=r.get("alpha", float, 0.95),
        v=r.get("v", int),
        shots=r.get("shots", int, 1000),
        out=_resolve(base_dir, r.get("out", str, "out")),
    )
    for key in ("theta", "alpha"):
        if not 0.0 < getattr(cfg, key) < 1.0:
            r.fail(key, "must lie in (0, 1)")
    if cfg.v is not None and cfg.v < 1:
        r.fail("v", "must be positive")
    if cfg.shots < 0:
        r.fail("shots", "must be non-negative")
    if cfg.target_topology not in (None, "doubling", "ghz10"):
        r.fail("target_topology", "expected doubling or ghz10")
    return cfg


def load_experiment(path: str) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}:0: cannot read config: {exc.strerror}") from exc
    return parse_experiment(text, path, os.path.dirname(os.path.abspath(path)))

"""System description types and the informative-rate algebra.

A system has ``N`` sensors feeding one exponential server with rate ``mu``.
Sensor ``i`` emits Poisson traffic at ``lam[i]``; each packet carries the
state of process ``j`` with probability ``corr[i, j]``.  When the server is
busy, an arrival from sensor ``i`` replaces the packet in service with
probability ``probs[i]`` and is dropped otherwise.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np


class ModelError(ValueError):
    """Base class for invalid model input."""


class DimensionMismatch(ModelError):
    pass


class NonPositiveRate(ModelError):
    pass


class CorrelationOutOfRange(ModelError):
    pass


class ProbabilityOutOfRange(ModelError):
    pass


class UncoveredProcess(ModelError):
    """No sensor ever reports on process ``j`` (infinite age)."""

    def __init__(self, j: int, message: str | None = None):
        self.j = j
        super().__init__(message or f"process {j} has zero informative arrival rate")


class IndexOutOfRange(ModelError, IndexError):
    pass


class ConfigParseError(ModelError):
    pass


def _frozen(a, ndim: int) -> np.ndarray:
    arr = np.array(a, dtype=float, ndmin=ndim)
    if arr.ndim != ndim:
        raise DimensionMismatch(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SystemConfig:
    """Sensors, processes, rates and the sensor/process correlation matrix.

    ``allow_uncovered`` switches to analysis-only mode: processes nobody
    reports on are accepted and their age evaluates to ``inf``.
    """

    arrival_rates: np.ndarray
    service_rate: float
    correlation: np.ndarray
    allow_uncovered: bool = False

    def __post_init__(self):
        object.__setattr__(self, "arrival_rates", _frozen(self.arrival_rates, 1))
        object.__setattr__(self, "correlation", _frozen(self.correlation, 2))
        object.__setattr__(self, "service_rate", float(self.service_rate))

    @property
    def n_sensors(self) -> int:
        return self.arrival_rates.shape[0]

    @property
    def n_processes(self) -> int:
        return self.correlation.shape[1]

    @property
    def total_rate(self) -> float:
        return float(self.arrival_rates.sum())

    def informative_totals(self) -> np.ndarray:
        """Per-process total informative rate ``sum_i c_ij lam_i``."""
        return self.arrival_rates @ self.correlation

    def replace(self, **changes) -> SystemConfig:
        kw = dict(
            arrival_rates=self.arrival_rates,
            service_rate=self.service_rate,
            correlation=self.correlation,
            allow_uncovered=self.allow_uncovered,
        )
        kw.update(changes)
        return SystemConfig(**kw)


@dataclass(frozen=True)
class PreemptionPolicy:
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _frozen(self.probs, 1))
        p = self.probs
        if not np.all(np.isfinite(p)) or np.any(p < 0.0) or np.any(p > 1.0):
            raise ProbabilityOutOfRange(f"preemption probabilities must lie in [0, 1], got {p.tolist()}")

    @classmethod
    def uniform(cls, n: int, value: float) -> PreemptionPolicy:
        return cls(np.full(n, float(value)))

    def __len__(self):
        return self.probs.shape[0]


@dataclass(frozen=True)
class RateSummary:
    """Per-process informative rates split by preemption ability, plus channel totals."""

    informative_preempting: np.ndarray
    informative_nonpreempting: np.ndarray
    channel_total: float
    channel_preempting: float
    channel_nonpreempting: float

    def for_process(self, j: int) -> tuple[float, float]:
        return float(self.informative_preempting[j]), float(self.informative_nonpreempting[j])


def validate_config(config: SystemConfig) -> SystemConfig:
    """Check every invariant of ``config`` and return it unchanged."""
    lam, C = config.arrival_rates, config.correlation
    if C.shape[0] != lam.shape[0]:
        raise DimensionMismatch(
            f"correlation has {C.shape[0]} rows but there are {lam.shape[0]} arrival rates"
        )
    if lam.shape[0] == 0 or C.shape[1] == 0:
        raise DimensionMismatch("need at least one sensor and one process")
    if not np.all(np.isfinite(lam)) or np.any(lam <= 0.0):
        raise NonPositiveRate(f"arrival rates must be positive, got {lam.tolist()}")
    mu = config.service_rate
    if not np.isfinite(mu) or mu <= 0.0:
        raise NonPositiveRate(f"service rate must be positive, got {mu}")
    if not np.all(np.isfinite(C)) or np.any(C < 0.0) or np.any(C > 1.0):
        raise CorrelationOutOfRange("correlation entries must lie in [0, 1]")
    if not config.allow_uncovered:
        covered = config.informative_totals() > 0.0
        if not covered.all():
            raise UncoveredProcess(int(np.flatnonzero(~covered)[0]))
    return config


def check_policy(config: SystemConfig, policy: PreemptionPolicy) -> None:
    if len(policy) != config.n_sensors:
        raise DimensionMismatch(
            f"policy has {len(policy)} entries for {config.n_sensors} sensors"
        )


def check_process(config: SystemConfig, j: int) -> int:
    if not 0 <= j < config.n_processes:
        raise IndexOutOfRange(f"process index {j} outside [0, {config.n_processes})")
    return int(j)


def informative_rates(config: SystemConfig, policy: PreemptionPolicy) -> RateSummary:
    check_policy(config, policy)
    lam, p, C = config.arrival_rates, policy.probs, config.correlation
    pre = lam * p
    non = lam * (1.0 - p)
    lt_c = float(pre.sum())
    ld_c = float(non.sum())
    return RateSummary(
        informative_preempting=_frozen(pre @ C, 1),
        informative_nonpreempting=_frozen(non @ C, 1),
        channel_total=lt_c + ld_c,
        channel_preempting=lt_c,
        channel_nonpreempting=ld_c,
    )


# -- JSON documents -----------------------------------------------------------

CONFIG_KEYS = {"sensors", "processes", "lambda", "mu", "correlation", "preemption"}


def parse_config(doc: dict[str, Any], extra_keys: frozenset[str] = frozenset()) -> tuple[
    SystemConfig, PreemptionPolicy | None
]:
    """Build a validated config (and optional policy) from a parsed JSON object.

    Unknown keys are rejected unless listed in ``extra_keys``.
    """
    if not isinstance(doc, dict):
        raise ConfigParseError("config document must be a JSON object")
    unknown = set(doc) - CONFIG_KEYS - set(extra_keys)
    if unknown:
        raise ConfigParseError(f"unknown config keys: {sorted(unknown)}")
    missing = {"sensors", "processes", "lambda", "mu", "correlation"} - set(doc)
    if missing:
        raise ConfigParseError(f"missing config keys: {sorted(missing)}")
    n, m = doc["sensors"], doc["processes"]
    if not (isinstance(n, int) and isinstance(m, int)) or isinstance(n, bool) or n < 1 or m < 1:
        raise ConfigParseError("'sensors' and 'processes' must be positive integers")
    try:
        lam = np.asarray(doc["lambda"], dtype=float)
        C = np.asarray(doc["correlation"], dtype=float)
        mu = float(doc["mu"])
    except (TypeError, ValueError) as exc:
        raise ConfigParseError(f"non-numeric config entry: {exc}") from None
    if lam.shape != (n,):
        raise DimensionMismatch(f"'lambda' must have {n} entries, got shape {lam.shape}")
    if C.shape != (n, m):
        raise DimensionMismatch(f"'correlation' must be {n}x{m}, got shape {C.shape}")
    config = validate_config(SystemConfig(lam, mu, C))
    policy = None
    if doc.get("preemption") is not None:
        try:
            p = np.asarray(doc["preemption"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ConfigParseError(f"non-numeric preemption entry: {exc}") from None
        if p.shape != (n,):
            raise DimensionMismatch(f"'preemption' must have {n} entries, got shape {p.shape}")
        policy = PreemptionPolicy(p)
    return config, policy


def load_config(path: str | Path, extra_keys: frozenset[str] = frozenset()):
    """Read a config document; returns ``(config, policy, raw_doc)``."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"{path}: malformed JSON: {exc}") from None
    config, policy = parse_config(doc, extra_keys)
    return config, policy, doc


def config_to_dict(config: SystemConfig, policy: PreemptionPolicy | None = None) -> dict:
    doc = {
        "sensors": config.n_sensors,
        "processes": config.n_processes,
        "lambda": config.arrival_rates.tolist(),
        "mu": config.service_rate,
        "correlation": config.correlation.tolist(),
    }
    if policy is not None:
        doc["preemption"] = policy.probs.tolist()
    return doc

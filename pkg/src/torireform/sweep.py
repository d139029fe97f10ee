"""Run configuration and the epsilon sweep that brackets the chaotic window."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .chaos import (FAN_MOMENTUM_FACTORS, FAN_POSITIONS, DegenerateTangent, RegimeLabel,
                    classify, lyapunov_max, section_array)
from .symplectic import IntegrationBlowup, StepperConfig, TangentVector
from .system import DomainError, OscillatorParams, PhaseState

OUTPUT_DIR_ENV = "TORIREFORM_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "torireform_out"

ONSET_FRACTION = 0.5
REFORM_FRACTION = 0.25

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def job_rng(seed: int, job_index: int) -> np.random.Generator:
    return np.random.default_rng(splitmix64((seed & _MASK64) ^ splitmix64(job_index)))


def _default_fan() -> list[tuple[float, float]]:
    return [(q, f) for q in FAN_POSITIONS for f in FAN_MOMENTUM_FACTORS]


@dataclass
class RunConfig:
    omega0: float = 1.0
    omega: float = 2.0
    epsilon_grid: list = field(default_factory=lambda: [0.5, 10.0, 150.0, 500.0])
    lambda_for_duality: float = 4.0
    # (q, p) pairs; p is multiplied by sqrt(epsilon) when momentum_scaling == "sqrt_epsilon"
    initial_conditions: list = field(default_factory=_default_fan)
    momentum_scaling: str = "sqrt_epsilon"
    stepper: StepperConfig = field(default_factory=lambda: StepperConfig(1e-3))
    horizon: float = 2000.0
    renorm_interval: float = 1.0
    n_periods: int = 500
    seed: int = 0
    jitter: float = 0.0
    output_dir: Optional[str] = None
    workers: int = 1
    # duality-check
    duality_t_end: float = 50.0
    duality_state: list = field(default_factory=lambda: [0.1, 0.0])
    duality_tolerance: float = 1e-4
    # lindstedt-check
    lindstedt_alpha: float = 5.0
    lindstedt_lambdas: list = field(default_factory=lambda: [25.0, 100.0, 400.0])
    lindstedt_q0: float = 0.2
    lindstedt_p0: float = 8.0
    lindstedt_tau_end: float = 2.0
    lindstedt_dt: float = 1e-3

    def __post_init__(self):
        if isinstance(self.stepper, dict):
            self.stepper = StepperConfig(**self.stepper)
        self.epsilon_grid = [float(e) for e in self.epsilon_grid]
        self.lindstedt_lambdas = [float(x) for x in self.lindstedt_lambdas]
        self.initial_conditions = [(float(q), float(p)) for q, p in self.initial_conditions]
        self.duality_state = [float(x) for x in self.duality_state]
        self.validate()

    def validate(self) -> None:
        if not self.epsilon_grid:
            raise DomainError("epsilon_grid must be non-empty")
        if any(b < a for a, b in zip(self.epsilon_grid, self.epsilon_grid[1:])):
            raise DomainError("epsilon_grid must be sorted ascending")
        if any(e < 0 for e in self.epsilon_grid):
            raise DomainError("epsilon values must be non-negative")
        if not self.initial_conditions:
            raise DomainError("initial_conditions must be non-empty")
        if self.momentum_scaling not in ("sqrt_epsilon", "none"):
            raise DomainError(f"momentum_scaling must be 'sqrt_epsilon' or 'none', got {self.momentum_scaling!r}")
        if not self.lindstedt_lambdas or any(b < a for a, b in zip(self.lindstedt_lambdas, self.lindstedt_lambdas[1:])):
            raise DomainError("lindstedt_lambdas must be non-empty and sorted ascending")
        if self.n_periods < 1 or self.workers < 1 or self.seed < 0:
            raise DomainError("n_periods and workers must be >= 1 and seed >= 0")
        if len(self.duality_state) != 2:
            raise DomainError("duality_state must be [q, p]")
        OscillatorParams(self.omega0, self.omega, 0.0)

    def resolved_output_dir(self) -> Path:
        return Path(self.output_dir or os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR)

    def params(self, epsilon: float) -> OscillatorParams:
        return OscillatorParams(self.omega0, self.omega, epsilon)

    def initial_states(self, epsilon: float) -> list[PhaseState]:
        scale = math.sqrt(epsilon) if self.momentum_scaling == "sqrt_epsilon" else 1.0
        return [PhaseState(q, p * scale, 0.0) for q, p in self.initial_conditions]

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["stepper"] = {"dt": self.stepper.dt, "order": self.stepper.order.value}
        d["initial_conditions"] = [list(ic) for ic in self.initial_conditions]
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise DomainError(f"unknown configuration keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return cls.from_dict(data)


@dataclass(frozen=True)
class JobResult:
    epsilon: float
    ic_index: int
    q0: float
    p0: float
    exponent: float
    label: RegimeLabel
    renorm_count: int
    diagnostic: str = ""


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    fraction_chaotic: float
    mean_exponent: float


@dataclass
class SweepReport:
    rows: list[SweepRow]
    jobs: list[JobResult] = field(default_factory=list)

    @property
    def eps_onset(self) -> Optional[float]:
        return detect_thresholds(self.rows)[0]

    @property
    def eps_reform(self) -> Optional[float]:
        return detect_thresholds(self.rows)[1]


def detect_thresholds(rows: Sequence[SweepRow]) -> tuple[Optional[float], Optional[float]]:
    """First epsilon with chaotic fraction > 1/2, then the first later one below 1/4."""
    onset = None
    for i, row in enumerate(rows):
        if row.fraction_chaotic > ONSET_FRACTION:
            onset = row.epsilon
            for later in rows[i + 1:]:
                if later.fraction_chaotic < REFORM_FRACTION:
                    return onset, later.epsilon
            return onset, None
    return None, None


def _job_inputs(cfg: RunConfig):
    jobs = []
    index = 0
    for epsilon in cfg.epsilon_grid:
        for ic_index, state in enumerate(cfg.initial_states(epsilon)):
            rng = job_rng(cfg.seed, index)
            angle = rng.uniform(0.0, 2.0 * math.pi)
            if cfg.jitter > 0:
                dq, dp = rng.normal(0.0, cfg.jitter, size=2)
                state = PhaseState(state.q + dq, state.p + dp, state.t)
            jobs.append((epsilon, ic_index, state, TangentVector(math.cos(angle), math.sin(angle))))
            index += 1
    return jobs


def _run_job(cfg: RunConfig, job) -> JobResult:
    epsilon, ic_index, state, tangent = job
    try:
        est = lyapunov_max(cfg.params(epsilon), state, cfg.horizon, cfg.renorm_interval,
                           cfg.stepper, tangent)
    except (IntegrationBlowup, DegenerateTangent) as exc:
        return JobResult(epsilon, ic_index, state.q, state.p, math.nan, RegimeLabel.UNCERTAIN, 0,
                         diagnostic=str(exc))
    return JobResult(epsilon, ic_index, state.q, state.p, est.exponent, classify(est),
                     est.renorm_count)


def run_sweep(cfg: RunConfig) -> SweepReport:
    """Classify every (epsilon, initial condition) job and aggregate per epsilon.

    Initial tangents (and optional jitter) come from per-job generators derived
    from ``cfg.seed``, so the result does not depend on scheduling.
    """
    jobs = _job_inputs(cfg)
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        results = list(pool.map(lambda j: _run_job(cfg, j), jobs))
    rows = []
    for epsilon in cfg.epsilon_grid:
        mine = [r for r in results if r.epsilon == epsilon]
        chaotic = sum(r.label is RegimeLabel.CHAOTIC for r in mine)
        finite = [r.exponent for r in mine if math.isfinite(r.exponent)]
        mean = float(np.mean(finite)) if finite else math.nan
        rows.append(SweepRow(epsilon, chaotic / len(mine), mean))
    return SweepReport(rows=rows, jobs=results)


@dataclass
class SectionSet:
    """Stroboscopic samples for every initial condition at one epsilon.

    Each orbit is an (n_periods, 4) array of (t, q, p, u).
    """

    epsilon: float
    initial_conditions: list[PhaseState]
    orbits: list[np.ndarray]

    def stacked(self) -> np.ndarray:
        if not self.orbits:
            return np.empty((0, 4))
        return np.vstack(self.orbits)


def compute_sections(cfg: RunConfig, epsilon: float) -> SectionSet:
    params = cfg.params(epsilon)
    states = cfg.initial_states(epsilon)

    def one(state):
        try:
            return section_array(params, state, cfg.n_periods, cfg.stepper)
        except IntegrationBlowup:
            return np.empty((0, 4))

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        orbits = list(pool.map(one, states))
    return SectionSet(epsilon, states, orbits)

"""Seeded simulation of families, as an independent check on the exact results.

Randomness: family ``i`` consumes Philox-4x64 block ``i`` under key ``seed``
(numpy's counter-based generator, advanced directly to the block).  A family's
draws therefore depend only on ``(seed, i)``, so results are identical for any
chunking or worker count.  Each 64-bit word is reduced to a 53-bit integer and
compared with integer thresholds ``floor(cdf * 2**53)`` computed exactly from
the cell probabilities at ``r``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import events as ev
from .events import EventExpr
from .inference import conditional, probability
from .samplespace import (
    FamilyOutcome,
    NameClass,
    Regime,
    RegimeKind,
    build_distribution,
    child_prior,
)

CHUNK = 1 << 16
_BITS = 53
MODES = ("direct", "reject")


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    regime: Regime
    r: Fraction
    n_families: int
    seed: int
    mode: str = "direct"  # "reject": draw shared-name families, then drop (N, N)

    def __post_init__(self):
        if self.n_families < 1:
            raise SimulationError("n_families must be at least 1")
        if self.mode not in MODES:
            raise SimulationError(f"mode must be one of {MODES}")
        if self.mode == "reject" and self.regime.kind is not RegimeKind.I2:
            raise SimulationError("reject mode only applies to the unique-name regime i2")
        object.__setattr__(self, "r", self.regime.check_r(self.r))

    def to_json(self) -> dict:
        return {
            "regime": self.regime.code,
            "r": str(self.r),
            "n": self.n_families,
            "seed": self.seed,
            "mode": self.mode,
        }


def _thresholds(probs) -> np.ndarray:
    """Cumulative integer cut points; the last one (== 2**53) is dropped."""
    acc = Fraction(0)
    cuts = []
    for p in probs[:-1]:
        acc += p
        cuts.append(math.floor(acc * (1 << _BITS)))
    return np.array(cuts, dtype=np.uint64)


def _space(cfg: SimConfig) -> tuple[Regime, list[FamilyOutcome]]:
    """Regime whose cells index the simulated outcomes."""
    space = Regime(RegimeKind.I1, named=cfg.regime.named) if cfg.mode == "reject" else cfg.regime
    return space, list(build_distribution(space).outcomes())


class _Sampler:
    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.space, self.outcomes = _space(cfg)
        key = cfg.seed % (1 << 128)
        self.key = np.array([key & 0xFFFFFFFFFFFFFFFF, key >> 64], dtype=np.uint64)
        if cfg.regime.kind is RegimeKind.I2 and cfg.mode == "direct":
            d = build_distribution(cfg.regime)
            self.joint_cuts = _thresholds([v.eval_at(cfg.r) for v in d.cells.values()])
            self.child_cuts = None
        else:
            prior = child_prior(self.space)
            self.child_cuts = _thresholds([p.eval_at(cfg.r) for p in prior.values()])
            self.k = len(prior)
            self.joint_cuts = None
        if cfg.mode == "reject":
            self.dropped = [
                i for i, o in enumerate(self.outcomes)
                if o.eldest.name_class is NameClass.THE_NAME and o.youngest.name_class is NameClass.THE_NAME
            ]
        else:
            self.dropped = []

    def words(self, start: int, count: int) -> np.ndarray:
        bg = np.random.Philox(key=self.key)
        bg.advance(start)
        return (bg.random_raw(4 * count).reshape(count, 4) >> np.uint64(64 - _BITS))

    def cell_indices(self, start: int, count: int) -> np.ndarray:
        w = self.words(start, count)
        if self.joint_cuts is not None:
            return np.searchsorted(self.joint_cuts, w[:, 0], side="right")
        e = np.searchsorted(self.child_cuts, w[:, 0], side="right")
        y = np.searchsorted(self.child_cuts, w[:, 1], side="right")
        return e * self.k + y

    def counts(self, start: int, count: int) -> np.ndarray:
        return np.bincount(self.cell_indices(start, count), minlength=len(self.outcomes)).astype(np.int64)


def sample_family(cfg: SimConfig, index: int) -> Optional[FamilyOutcome]:
    """Outcome of family ``index``; ``None`` if reject mode discards it."""
    s = _Sampler(cfg)
    i = int(s.cell_indices(index, 1)[0])
    if i in s.dropped:
        return None
    return s.outcomes[i]


@dataclass
class SimCounts:
    config: SimConfig
    outcomes: list[FamilyOutcome]
    counts: list[int]
    rejected: int = 0

    @property
    def kept(self) -> int:
        return sum(self.counts)

    def count(self, e: EventExpr, env=None) -> int:
        space = _space(self.config)[0]
        hit = ev.denotation(e, self.outcomes, space, env)
        return sum(c for o, c in zip(self.outcomes, self.counts) if o in hit)

    def table(self) -> dict[tuple[str, str], int]:
        return {(o.eldest.label, o.youngest.label): c for o, c in zip(self.outcomes, self.counts)}


def simulate(cfg: SimConfig, workers: int = 1) -> SimCounts:
    """Count outcomes over all families; chunks merge by exact addition."""
    s = _Sampler(cfg)
    starts = range(0, cfg.n_families, CHUNK)

    def job(start):
        return s.counts(start, min(CHUNK, cfg.n_families - start))

    if workers <= 1:
        parts = [job(st) for st in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, starts))
    total = np.zeros(len(s.outcomes), dtype=np.int64)
    for p in parts:
        total += p
    counts = [int(x) for x in total]
    rejected = 0
    for i in s.dropped:
        rejected += counts[i]
        counts[i] = 0
    return SimCounts(cfg, s.outcomes, counts, rejected)


@dataclass
class Estimate:
    successes: int
    trials: int
    p_hat: float
    stderr: float
    analytic: Fraction
    z_score: float

    def within(self, sigmas: float = 4.0) -> bool:
        return abs(self.z_score) <= sigmas

    def to_json(self, config: Optional[SimConfig] = None) -> dict:
        out = {
            "successes": self.successes,
            "trials": self.trials,
            "analytic": str(self.analytic),
            "analytic_decimal": float(self.analytic),
            "p_hat": self.p_hat,
            "stderr": self.stderr,
            "z": self.z_score,
        }
        if config is not None:
            out = {"config": config.to_json(), **out}
        return out


def make_estimate(successes: int, trials: int, analytic: Fraction) -> Estimate:
    if trials <= 0:
        raise SimulationError("no simulated family satisfied the condition")
    p = successes / trials
    se = math.sqrt(p * (1 - p) / trials)
    diff = p - float(analytic)
    if se > 0:
        z = diff / se
    else:
        z = 0.0 if Fraction(successes, trials) == analytic else math.copysign(math.inf, diff)
    return Estimate(successes, trials, p, se, Fraction(analytic), z)


def analytic_conditional(cfg: SimConfig, a: EventExpr, b: EventExpr, env=None) -> Fraction:
    d = build_distribution(cfg.regime)
    pb = probability(d, b, env)
    if pb.is_zero() or pb.eval_at(cfg.r) == 0:
        raise SimulationError("the condition has zero probability at this r")
    return conditional(d, a, b, env).eval_at(cfg.r)


def estimate_conditional(cfg: SimConfig, a: EventExpr, b: EventExpr, env=None,
                         workers: int = 1, sim: Optional[SimCounts] = None) -> Estimate:
    """Empirical P(a | b) against the exact value for ``cfg.regime``.

    In reject mode the families come from the shared-name model with
    duplicate names discarded, while ``analytic`` is still the unique-name
    value, so a large ``z`` is the expected outcome there.
    """
    analytic = analytic_conditional(cfg, a, b, env)
    sim = sim or simulate(cfg, workers)
    trials = sim.count(b, env)
    successes = sim.count(ev.And(a, b), env)
    return make_estimate(successes, trials, analytic)


@dataclass
class ExpectedCounts:
    labels: tuple[str, ...]
    analytic: dict[tuple[str, str], int]
    empirical: dict[tuple[str, str], int]
    n: int


def expected_counts(cfg: SimConfig, workers: int = 1) -> ExpectedCounts:
    """Analytic counts (rounded half-even) next to one simulated run."""
    d = build_distribution(cfg.regime)
    analytic = {(o.eldest.label, o.youngest.label): round(v.eval_at(cfg.r) * cfg.n_families)
                for o, v in d.cells.items()}
    sim = simulate(cfg, workers)
    empirical = {k: 0 for k in analytic}
    for k, c in sim.table().items():
        if k in empirical:
            empirical[k] += c
    return ExpectedCounts(tuple(c.label for c in d.children), analytic, empirical, cfg.n_families)


def slot_marginal_estimate(cfg: SimConfig, e: EventExpr, sim: Optional[SimCounts] = None) -> Estimate:
    """Empirical P(e) over kept families against its exact value."""
    sim = sim or simulate(cfg)
    exact = probability(build_distribution(cfg.regime), e).eval_at(cfg.r)
    return make_estimate(sim.count(e), sim.kept, exact)

"""Success statistics: Bayesian success-probability posteriors, the R99
repeat count, residual energies, and the bootstrap distribution of
time-to-solution percentiles.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from typing import NamedTuple, Sequence

import numpy as np

from .decoding import DecodedSet
from .seeds import derive_seed


@dataclass(frozen=True)
class PosteriorSummary:
    """Beta posterior of a success probability under the Jeffreys prior.

    Built from C solver calls of N anneals each with y_c successes per
    call: Beta(0.5 + sum(y), 0.5 + N*C - sum(y)).
    """

    a: float
    b: float
    calls: int
    anneals_per_call: int
    successes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "successes", tuple(int(y) for y in self.successes))
        total = sum(self.successes)
        if self.calls != len(self.successes):
            raise ValueError("call count does not match success list")
        if self.a != 0.5 + total:
            raise ValueError("posterior a inconsistent with successes")
        if self.b != 0.5 + self.anneals_per_call * self.calls - total:
            raise ValueError("posterior b inconsistent with successes")
        if self.a <= 0 or self.b <= 0:
            raise ValueError("Beta parameters must be positive")

    @property
    def mean(self) -> float:
        return self.a / (self.a + self.b)


def posterior(y_per_call: Sequence[int], anneals_per_call: int) -> PosteriorSummary:
    """Jeffreys-prior Beta posterior from per-call success counts."""
    counts = [int(y) for y in y_per_call]
    for y in counts:
        if not 0 <= y <= anneals_per_call:
            raise ValueError(f"success count {y} outside [0, {anneals_per_call}]")
    total = sum(counts)
    calls = len(counts)
    return PosteriorSummary(0.5 + total,
                            0.5 + anneals_per_call * calls - total,
                            calls, anneals_per_call, tuple(counts))


def r99(theta: float) -> float:
    """Expected runs to hit the target at least once with probability 0.99.

    log(1 - 0.99) / log(1 - theta), evaluated in 40-digit decimal so exact
    decimal inputs give exact ratios. By convention theta = 0 gives +inf
    and theta = 1 gives 1.
    """
    if theta < 0 or theta > 1:
        raise ValueError("theta must lie in [0, 1]")
    if theta == 0:
        return math.inf
    if theta == 1:
        return 1.0
    with localcontext() as ctx:
        ctx.prec = 40
        return float(Decimal("0.01").ln() / (1 - Decimal(str(theta))).ln())


def success_probability(decoded, ground_energy: float,
                        tol: float = 1e-9, energies: str = "refined") -> list[int]:
    """Per-call counts of reads whose energy reaches the ground energy.

    Accepts one DecodedSet per solver call (or a single one); energies
    selects the refined or the vote-only series.
    """
    if isinstance(decoded, DecodedSet):
        decoded = [decoded]
    if energies not in ("refined", "mv"):
        raise ValueError(f"unknown energy series {energies!r}")
    counts = []
    for ds in decoded:
        values = ds.refined_energies if energies == "refined" else ds.mv_energies
        counts.append(int(np.sum(values <= ground_energy + tol)))
    return counts


class ResidualEnergy(NamedTuple):
    value: float
    relative: bool


def residual_energy(best: float, ground: float) -> ResidualEnergy:
    """Relative gap to the ground energy, absolute when ground is zero."""
    if ground == 0:
        return ResidualEnergy(best - ground, False)
    return ResidualEnergy((best - ground) / abs(ground), True)


@dataclass(frozen=True)
class TtsDistribution:
    """Bootstrap distribution of the q-th time-to-solution percentile."""

    q: int
    tau_us: float
    values_us: tuple[float, ...]
    mean_us: float
    std_us: float
    clamped_draws: int

    def __post_init__(self):
        if not self.values_us:
            raise ValueError("empty bootstrap distribution")
        if any(v <= 0 for v in self.values_us):
            raise ValueError("TTS values must be positive")


def _nearest_rank(sorted_values: np.ndarray, percentile: float) -> float:
    rank = math.ceil(percentile / 100.0 * len(sorted_values))
    return float(sorted_values[max(rank, 1) - 1])


_CLAMP = 1e-12


def bootstrap_tts(posteriors: Sequence[PosteriorSummary], q: int = 50,
                  b: int = 1000, tau_us: float = 5.0,
                  seed: int = 0) -> TtsDistribution:
    """Bootstrap the q-th percentile of TTS over a population of instances.

    Each iteration resamples the instances with replacement, draws one
    success probability from every sampled posterior, takes the
    (100 - q)-th nearest-rank percentile of the draws (low probability
    corresponds to high TTS), and converts it to a time. Draws are clamped
    away from 0 and 1 so no iteration is infinite; clamps are counted.
    The posterior list is canonically ordered first, so the result depends
    only on the multiset of posteriors and the seed.
    """
    if not posteriors:
        raise ValueError("no posteriors to bootstrap")
    if not 0 < q < 100:
        raise ValueError("percentile must lie strictly between 0 and 100")
    if b < 1:
        raise ValueError("need at least one bootstrap iteration")
    ordered = sorted(posteriors, key=lambda p: (p.a, p.b, p.successes))
    n = len(ordered)
    rng = np.random.default_rng(derive_seed(seed, "bootstrap-tts"))

    values = []
    clamped = 0
    for _ in range(b):
        picks = rng.integers(0, n, size=n)
        draws = np.array([rng.beta(ordered[i].a, ordered[i].b) for i in picks])
        clamped += int(np.sum((draws < _CLAMP) | (draws > 1 - _CLAMP)))
        draws = np.clip(draws, _CLAMP, 1 - _CLAMP)
        p = _nearest_rank(np.sort(draws), 100 - q)
        values.append(tau_us * math.log(0.01) / math.log1p(-p))
    arr = np.asarray(values)
    return TtsDistribution(int(q), float(tau_us), tuple(float(v) for v in values),
                           float(arr.mean()), float(arr.std()), clamped)


def tts_to_json(t: TtsDistribution, indent: int | None = None) -> str:
    doc = {"q": t.q, "tau_us": t.tau_us, "B": len(t.values_us),
           "values_us": list(t.values_us), "mean_us": t.mean_us,
           "std_us": t.std_us, "clamped_draws": t.clamped_draws}
    return json.dumps(doc, indent=indent)


def tts_from_json(text: str) -> TtsDistribution:
    doc = json.loads(text)
    values = tuple(float(v) for v in doc["values_us"])
    if len(values) != int(doc["B"]):
        raise ValueError("B does not match the number of stored values")
    return TtsDistribution(int(doc["q"]), float(doc["tau_us"]), values,
                           float(doc["mean_us"]), float(doc["std_us"]),
                           int(doc["clamped_draws"]))

"""Sampling and exhaustive enumeration of measurement records.

Sampling uses the normalized-state recursion (condition at every step)
so probabilities never underflow on long records; the product of the
per-step conditional probabilities recovers the joint probability of the
record.  Enumeration propagates unnormalized states over the full
outcome tree and is the brute-force oracle the rest of the package is
verified against.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .model import ConditionalEvolution, output_eval, step_unnormalized
from .operators import DEFAULT_TOL

__all__ = [
    "TrajectoryRecord",
    "StateEscapedError",
    "sample_trajectory",
    "enumerate_distribution",
    "total_variation",
]


class StateEscapedError(RuntimeError):
    """Total outcome probability vanished; the instrument is not normalized."""


@dataclass(frozen=True)
class TrajectoryRecord:
    outcomes: tuple[str, ...]
    probabilities: tuple[float, ...]         # per-step conditional probabilities
    states: tuple[np.ndarray, ...]           # per-step normalized densities
    outputs: tuple[np.ndarray, ...]          # per-step conditioned outputs
    clamped_steps: tuple[int, ...]           # steps where roundoff went negative

    @property
    def joint_probability(self) -> float:
        return float(np.prod(self.probabilities))


def sample_trajectory(
    ce: ConditionalEvolution,
    rho0: np.ndarray,
    T: int,
    rng_seed,
    tol: float = DEFAULT_TOL,
) -> TrajectoryRecord:
    """Draw one length-T measurement record, deterministic given the seed.

    ``rng_seed`` may be an integer or a ``numpy.random.SeedSequence`` /
    ``Generator``; trajectory batches should spawn child seeds so streams
    stay independent.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    rho = np.asarray(rho0, dtype=complex)
    outcomes, probs, states, outputs, clamped = [], [], [], [], []
    for t in range(T):
        branch = [step_unnormalized(ce, rho, k) for k in ce.outcomes]
        p = np.array([np.trace(b).real for b in branch])
        if np.any(p < 0):
            if np.min(p) < -tol:
                clamped.append(t)
            p = np.clip(p, 0.0, None)
        mass = p.sum()
        if mass < tol:
            raise StateEscapedError(f"outcome probabilities sum to {mass:.3e} at step {t}")
        idx = int(rng.choice(len(p), p=p / mass))
        rho = branch[idx] / p[idx]
        outcomes.append(ce.outcomes[idx])
        probs.append(float(p[idx]))
        states.append(rho)
        outputs.append(output_eval(ce, rho))
    return TrajectoryRecord(
        outcomes=tuple(outcomes),
        probabilities=tuple(probs),
        states=tuple(states),
        outputs=tuple(outputs),
        clamped_steps=tuple(clamped),
    )


def enumerate_distribution(
    ce: ConditionalEvolution,
    rho0: np.ndarray,
    T: int,
    cap: int = 10**6,
) -> dict[tuple[str, ...], tuple[float, np.ndarray]]:
    """Probability and output vector of every length-T outcome word.

    Propagates the whole outcome tree of unnormalized states, so the
    returned probabilities sum to one for any valid instrument.
    """
    n_words = len(ce.outcomes) ** T
    if n_words > cap:
        raise ValueError(f"{n_words} sequences exceed the cap {cap}; raise it explicitly")
    table: dict[tuple[str, ...], tuple[float, np.ndarray]] = {}
    frontier = [((), np.asarray(rho0, dtype=complex))]
    for _ in range(T):
        nxt = []
        for prefix, rho in frontier:
            for k in ce.outcomes:
                nxt.append((prefix + (k,), step_unnormalized(ce, rho, k)))
        frontier = nxt
    for seq, rho in frontier:
        table[seq] = (float(np.trace(rho).real), output_eval(ce, rho))
    return table


def total_variation(full_table: dict, reduced_table: dict) -> float:
    """Half the L1 distance between two distributions over outcome words."""
    if set(full_table) != set(reduced_table):
        raise ValueError("distribution tables index different sequence sets")
    return 0.5 * sum(
        abs(full_table[s][0] - reduced_table[s][0]) for s in full_table
    )

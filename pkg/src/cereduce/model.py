"""Conditional evolutions: instruments, output maps, state propagation.

A conditional evolution couples a quantum instrument (one CP map per
measurement outcome, normalized in the dual) with a linear output map
reading out expectation values of a fixed set of observables.  States are
propagated unnormalized; the trace of the running state is the joint
probability of the outcome record observed so far.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import (
    DEFAULT_TOL,
    Superoperator,
    channel_checks,
    hs_norm,
    is_hermitian,
)

__all__ = [
    "Instrument",
    "OutputMap",
    "ConditionalEvolution",
    "ValidationReport",
    "OutcomeImpossibleError",
    "validate_ce",
    "step_unnormalized",
    "condition",
    "trajectory_probability",
    "output_eval",
]


class OutcomeImpossibleError(ValueError):
    """Conditioning on an outcome of (numerically) zero probability."""


@dataclass(frozen=True)
class Instrument:
    """A quantum instrument: one CP map per outcome, declaration-ordered."""

    outcomes: tuple[str, ...]
    maps: dict[str, Superoperator]

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(str(k) for k in self.outcomes))
        if set(self.outcomes) != set(self.maps):
            raise ValueError("outcome labels and map keys differ")
        dims = {S.in_dim for S in self.maps.values()} | {S.out_dim for S in self.maps.values()}
        if len(dims) != 1:
            raise ValueError("all instrument maps must share one dimension")

    @property
    def dim(self) -> int:
        return next(iter(self.maps.values())).in_dim

    def map_for(self, k) -> Superoperator:
        k = str(k)
        if k not in self.maps:
            raise ValueError(f"unknown outcome label {k!r}")
        return self.maps[k]

    def normalization_residual(self) -> float:
        eye = np.eye(self.dim, dtype=complex)
        total = sum(self.maps[k].adjoint()(eye) for k in self.outcomes)
        return float(np.linalg.norm(total - eye))


@dataclass(frozen=True)
class OutputMap:
    """Named observables {O_j}; the identity must be among them."""

    names: tuple[str, ...]
    observables: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.names) != len(self.observables):
            raise ValueError("one name per observable required")
        object.__setattr__(
            self, "observables", tuple(np.asarray(O, dtype=complex) for O in self.observables)
        )

    @property
    def dim(self) -> int:
        return self.observables[0].shape[0]

    def identity_index(self, tol: float = DEFAULT_TOL) -> int | None:
        eye = np.eye(self.dim, dtype=complex)
        for j, O in enumerate(self.observables):
            if np.linalg.norm(O - eye) <= tol * np.sqrt(self.dim):
                return j
        return None

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return np.array([np.trace(O @ X) for O in self.observables])

    def matrix(self) -> np.ndarray:
        """(n_obs, n^2) matrix acting on vec'd operators.

        Row j is vec(O_j^T), since tr[O X] = vec(O^T) . vec(X).
        """
        return np.array([O.reshape(-1, order="C") for O in self.observables])


@dataclass(frozen=True)
class ConditionalEvolution:
    """Instrument + output map, optionally split as evolution o effects."""

    instrument: Instrument
    output: OutputMap
    evolution: Superoperator | None = None
    effects: dict[str, Superoperator] | None = None

    def __post_init__(self):
        if self.instrument.dim != self.output.dim:
            raise ValueError("instrument and output map dimensions differ")
        if (self.evolution is None) != (self.effects is None):
            raise ValueError("split requires both an evolution map and effects")

    @property
    def dim(self) -> int:
        return self.instrument.dim

    @property
    def outcomes(self) -> tuple[str, ...]:
        return self.instrument.outcomes

    @property
    def has_split(self) -> bool:
        return self.evolution is not None

    def split_residual(self) -> float:
        """Max deviation between M_k and evolution o effect_k."""
        if not self.has_split:
            raise ValueError("conditional evolution has no split form")
        res = 0.0
        for k in self.outcomes:
            M = self.instrument.maps[k].matrix
            res = max(res, float(np.linalg.norm(M - self.evolution.matrix @ self.effects[k].matrix)))
        return res


@dataclass(frozen=True)
class ValidationReport:
    cp_residuals: dict[str, float]          # negative part of each Choi spectrum
    normalization_residual: float
    hermiticity_residuals: tuple[float, ...]
    identity_present: bool
    split_residual: float | None
    tol: float

    @property
    def ok(self) -> bool:
        checks = [
            all(r <= self.tol for r in self.cp_residuals.values()),
            self.normalization_residual <= self.tol * 10,
            all(r <= self.tol for r in self.hermiticity_residuals),
            self.identity_present,
        ]
        if self.split_residual is not None:
            checks.append(self.split_residual <= self.tol * 10)
        return all(checks)


def validate_ce(ce: ConditionalEvolution, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Check instrument CP maps, dual normalization and observable sanity."""
    cp_res = {}
    for k in ce.outcomes:
        rep = channel_checks(ce.instrument.maps[k], tol)
        cp_res[k] = max(0.0, -rep.min_choi_eig) + rep.choi_herm_residual
    herm = tuple(
        float(np.linalg.norm(O - O.conj().T)) for O in ce.output.observables
    )
    return ValidationReport(
        cp_residuals=cp_res,
        normalization_residual=ce.instrument.normalization_residual(),
        hermiticity_residuals=herm,
        identity_present=ce.output.identity_index(tol) is not None,
        split_residual=ce.split_residual() if ce.has_split else None,
        tol=tol,
    )


def step_unnormalized(ce: ConditionalEvolution, rho_tilde: np.ndarray, k) -> np.ndarray:
    """One instrument step on an unnormalized state: M_k(rho_tilde)."""
    return ce.instrument.map_for(k)(rho_tilde)


def condition(
    ce: ConditionalEvolution, rho: np.ndarray, k, tol: float = DEFAULT_TOL
) -> tuple[np.ndarray, float]:
    """Outcome probability and the renormalized post-measurement state."""
    out = step_unnormalized(ce, rho, k)
    p = float(np.trace(out).real)
    if p <= tol:
        raise OutcomeImpossibleError(f"outcome {k!r} has probability {p:.3e}")
    p = min(max(p, 0.0), 1.0)
    return out / p, p


def trajectory_probability(ce: ConditionalEvolution, rho0: np.ndarray, seq) -> float:
    """Joint probability of an outcome word: trace of the propagated state."""
    rho = np.asarray(rho0, dtype=complex)
    for k in seq:
        rho = step_unnormalized(ce, rho, k)
    return float(np.trace(rho).real)


def output_eval(ce: ConditionalEvolution, rho_tilde: np.ndarray) -> np.ndarray:
    """Output vector tr[O_j rho_tilde], one entry per observable."""
    return ce.output(rho_tilde)

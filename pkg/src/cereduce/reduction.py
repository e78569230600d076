"""End-to-end reduction of a conditional evolution and equivalence checks.

The pipeline projects the model onto the smallest *-algebra containing
the dual orbit of the observables, through the CPTP factorization of the
conditional expectation.  The reduced model is again a valid conditional
evolution (CP maps, dual normalization) on a smaller space and reproduces
every conditioned output and every outcome-word probability exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    CEFactorization,
    StarAlgebra,
    algebra_closure,
    conditional_expectation,
    wedderburn,
)
from .model import ConditionalEvolution, Instrument, OutputMap
from .observability import check_invariance, nonobservable_complement
from .operators import DEFAULT_TOL, OperatorSubspace, Superoperator, vec

__all__ = [
    "ReducedCE",
    "AssumptionReport",
    "SeparableReduction",
    "EquivalenceReport",
    "reduce_ce",
    "check_assumptions",
    "reduce_separably",
    "equivalence_check",
    "random_density",
    "random_ce",
]


def random_density(n: int, rng) -> np.ndarray:
    """Full-rank generic density operator, normalized G G^dag."""
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_ce(n: int, n_outcomes: int, n_obs: int, rng) -> ConditionalEvolution:
    """Random Kraus instrument plus random Hermitian observables (with identity)."""
    raw = [
        rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        for _ in range(n_outcomes)
    ]
    T = sum(K.conj().T @ K for K in raw)
    w, V = np.linalg.eigh(T)
    T_inv_sqrt = V @ np.diag(1 / np.sqrt(w)) @ V.conj().T
    kraus = [K @ T_inv_sqrt for K in raw]
    from .operators import superop_from_kraus

    labels = tuple(str(k) for k in range(n_outcomes))
    maps = {lab: superop_from_kraus([K]) for lab, K in zip(labels, kraus)}
    names = ["identity"]
    obs = [np.eye(n, dtype=complex)]
    for j in range(n_obs - 1):
        G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        obs.append((G + G.conj().T) / 2)
        names.append(f"obs{j}")
    return ConditionalEvolution(
        instrument=Instrument(outcomes=labels, maps=maps),
        output=OutputMap(names=tuple(names), observables=tuple(obs)),
    )


@dataclass(frozen=True)
class ReducedCE:
    """Reduced conditional evolution plus the reduction map that feeds it."""

    model: ConditionalEvolution
    reduction_map: Superoperator            # Phi = R
    factorization: CEFactorization
    nperp: OperatorSubspace
    output_algebra: StarAlgebra
    original_dim: int
    tol: float
    seed: int

    @property
    def reduced_dim(self) -> int:
        return self.factorization.reduced_dim

    @property
    def blocks(self) -> tuple[tuple[int, int], ...]:
        return self.factorization.decomposition.blocks

    def provenance(self) -> dict:
        return {
            "original_operator_dim": self.original_dim**2,
            "reduced_operator_dim": self.reduced_dim,
            "nperp_dim": self.nperp.dim,
            "algebra_dim": self.output_algebra.dim,
            "blocks": [list(b) for b in self.blocks],
            "tol": self.tol,
            "seed": self.seed,
        }


def _reduced_output_map(ce: ConditionalEvolution, fact: CEFactorization) -> OutputMap:
    # C_reduced(X) = C(J(X)); observable rows pull back through J^dag
    Jd = fact.J.adjoint()
    obs = tuple(Jd(O) for O in ce.output.observables)
    return OutputMap(names=ce.output.names, observables=obs)


def reduce_ce(
    ce: ConditionalEvolution,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> ReducedCE:
    """Project a conditional evolution onto its output algebra.

    Computes the observable subspace, closes it to a *-algebra, builds the
    CPTP factorization of the conditional expectation and conjugates every
    instrument map: reduced M_k = R o M_k o J, reduced output = C o J.
    """
    nperp = nonobservable_complement(ce, tol)
    alg = algebra_closure(nperp, tol)
    dec = wedderburn(alg, tol, seed)
    fact = conditional_expectation(dec)

    maps = {k: fact.R @ ce.instrument.maps[k] @ fact.J for k in ce.outcomes}
    inst = Instrument(outcomes=ce.outcomes, maps=maps)
    model = ConditionalEvolution(instrument=inst, output=_reduced_output_map(ce, fact))
    return ReducedCE(
        model=model,
        reduction_map=fact.R,
        factorization=fact,
        nperp=nperp,
        output_algebra=alg,
        original_dim=ce.dim,
        tol=tol,
        seed=seed,
    )


@dataclass(frozen=True)
class AssumptionCheck:
    holds: bool
    residual: float


@dataclass(frozen=True)
class AssumptionReport:
    """Which of the four separability conditions hold, with residuals.

    a1: the evolution map is a linear combination of the instrument maps
        (coefficients in ``lambdas``);
    a2: the non-observable subspace is invariant under the evolution;
    a3: the output algebra is invariant under every measurement effect;
    a4: the output algebra is invariant under the dual of the evolution.
    """

    a1: AssumptionCheck
    a2: AssumptionCheck
    a3: AssumptionCheck
    a4: AssumptionCheck
    lambdas: dict[str, complex]

    @property
    def any_holds(self) -> bool:
        return self.a1.holds or self.a2.holds or self.a3.holds or self.a4.holds


def check_assumptions(
    ce: ConditionalEvolution,
    nperp: OperatorSubspace,
    alg: StarAlgebra,
    tol: float = DEFAULT_TOL,
) -> AssumptionReport:
    """Evaluate the separability assumptions on a split-form model."""
    if not ce.has_split:
        raise ValueError("assumption checks require the split (evolution, effects) form")
    M = np.array([vec(ce.instrument.maps[k].matrix) for k in ce.outcomes]).T
    target = vec(ce.evolution.matrix)
    lam, _, _, _ = np.linalg.lstsq(M, target, rcond=None)
    a1_res = float(np.linalg.norm(M @ lam - target))
    scale = max(float(np.linalg.norm(target)), 1.0)

    nsub = nperp.orthocomplement()
    a2_res = check_invariance(nsub, ce.evolution, dual=False, tol=tol)
    a3_res = max(
        check_invariance(alg.space, ce.effects[k], dual=False, tol=tol)
        for k in ce.outcomes
    )
    a4_res = check_invariance(alg.space, ce.evolution, dual=True, tol=tol)

    a1 = AssumptionCheck(holds=a1_res <= tol * scale, residual=a1_res)
    return AssumptionReport(
        a1=a1,
        a2=AssumptionCheck(holds=a2_res <= tol * 10, residual=a2_res),
        a3=AssumptionCheck(holds=a3_res <= tol * 10, residual=a3_res),
        a4=AssumptionCheck(holds=a4_res <= tol * 10, residual=a4_res),
        lambdas={k: complex(l) for k, l in zip(ce.outcomes, lam)},
    )


@dataclass(frozen=True)
class SeparableReduction:
    """Separately reduced evolution and effects, plus their recomposition."""

    evolution: Superoperator                # R o E o J
    effects: dict[str, Superoperator]       # R o K_k o J
    recomposed: ReducedCE
    assumptions: AssumptionReport


def reduce_separably(
    ce: ConditionalEvolution,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> SeparableReduction:
    """Reduce the evolution map and the measurement effects individually.

    Valid only when at least one of the separability assumptions holds;
    refuses (with the report attached to the exception) otherwise.
    """
    joint = reduce_ce(ce, tol, seed)
    report = check_assumptions(ce, joint.nperp, joint.output_algebra, tol)
    if not report.any_holds:
        exc = ValueError("no separability assumption holds; cannot reduce separably")
        exc.report = report
        raise exc
    fact = joint.factorization
    ev = fact.R @ ce.evolution @ fact.J
    eff = {k: fact.R @ ce.effects[k] @ fact.J for k in ce.outcomes}
    maps = {k: ev @ eff[k] for k in ce.outcomes}
    inst = Instrument(outcomes=ce.outcomes, maps=maps)
    model = ConditionalEvolution(
        instrument=inst,
        output=joint.model.output,
        evolution=ev,
        effects=eff,
    )
    recomposed = ReducedCE(
        model=model,
        reduction_map=fact.R,
        factorization=fact,
        nperp=joint.nperp,
        output_algebra=joint.output_algebra,
        original_dim=ce.dim,
        tol=tol,
        seed=seed,
    )
    return SeparableReduction(
        evolution=ev, effects=eff, recomposed=recomposed, assumptions=report
    )


@dataclass(frozen=True)
class EquivalenceReport:
    max_dev: float
    max_prob_dev: float
    passed: bool
    worst_case: tuple[int, tuple[str, ...]]
    n_sequences: int
    sampled: bool


def _sequences(outcomes, max_len, cap, rng):
    total = sum(len(outcomes) ** t for t in range(1, max_len + 1))
    if total <= cap:
        for t in range(1, max_len + 1):
            yield from itertools.product(outcomes, repeat=t)
        return
    for _ in range(cap):
        t = int(rng.integers(1, max_len + 1))
        yield tuple(rng.choice(outcomes) for _ in range(t))


def equivalence_check(
    full: ConditionalEvolution,
    reduced: ReducedCE,
    max_len: int = 4,
    n_states: int = 25,
    tol: float = 1e-8,
    seed: int = 0,
    sample_cap: int = 10_000,
) -> EquivalenceReport:
    """Compare conditioned outputs of the full and reduced models.

    Walks the outcome tree up to ``max_len`` (exhaustively, or with a
    seeded sample of ``sample_cap`` words when the tree is too large) for
    a batch of random initial densities, and records the worst output and
    probability deviations at every node.
    """
    rng = np.random.default_rng(seed)
    states = [random_density(full.dim, rng) for _ in range(n_states)]
    n_out = len(full.outcomes)
    total = sum(n_out**t for t in range(1, max_len + 1))
    sampled = total > sample_cap

    max_dev = 0.0
    max_prob_dev = 0.0
    worst = (0, ())
    count = 0
    for si, rho0 in enumerate(states):
        tau0 = reduced.reduction_map(rho0)
        if sampled:
            seqs = list(_sequences(full.outcomes, max_len, sample_cap, rng))
        else:
            seqs = None

        def visit(rho, tau, prefix):
            nonlocal max_dev, max_prob_dev, worst, count
            y_full = full.output(rho)
            y_red = reduced.model.output(tau)
            dev = float(np.max(np.abs(y_full - y_red)))
            pdev = abs(np.trace(rho).real - np.trace(tau).real)
            count += 1
            if dev > max_dev or (dev == max_dev and not worst[1]):
                max_dev = dev
                worst = (si, prefix)
            max_prob_dev = max(max_prob_dev, pdev)
            if len(prefix) < max_len:
                for k in full.outcomes:
                    visit(
                        full.instrument.maps[k](rho),
                        reduced.model.instrument.maps[k](tau),
                        prefix + (k,),
                    )

        if not sampled:
            visit(rho0, tau0, ())
        else:
            for seq in seqs:
                rho, tau = rho0, tau0
                for k in seq:
                    rho = full.instrument.maps[k](rho)
                    tau = reduced.model.instrument.maps[k](tau)
                y_full = full.output(rho)
                y_red = reduced.model.output(tau)
                dev = float(np.max(np.abs(y_full - y_red)))
                pdev = abs(np.trace(rho).real - np.trace(tau).real)
                count += 1
                if dev > max_dev:
                    max_dev = dev
                    worst = (si, seq)
                max_prob_dev = max(max_prob_dev, pdev)

    return EquivalenceReport(
        max_dev=max_dev,
        max_prob_dev=max_prob_dev,
        passed=(max_dev <= tol and max_prob_dev <= tol),
        worst_case=worst,
        n_sequences=count,
        sampled=sampled,
    )

"""Witness measures and variational search for the entropy calculus.

``witness_measures`` runs the separated-set construction at a finite horizon:
pull the cover and a finite family of its product refinements ``n`` steps in,
pick a maximal multi-separated word set over ``n**2`` further steps, spread
the uniform measure on it over its admissible completions, and average the
resulting measure along the skew product.  Every counting inequality the
construction is designed to certify is evaluated numerically per fiber and
collected in the returned report; a floor hitting zero makes the bound vacuous
and is marked as such rather than asserted.

``maximize_invariant_entropy`` is the search half: random-restart hill
climbing over the transition family, rows projected back onto their supported
simplices, scored by the exact or certified entropy rate.  It is a best-effort
optimizer; the gap to the topological reference is reported, never asserted.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .base import SymbolicBundle, admissible_tuples
from .covercomb import SolverLimits, cover_count, maximal_multi_separated
from .covers import (
    CoverError,
    PositionedCover,
    PositionedPartition,
    product_partitions_finer,
    pullback,
    range_join,
)
from .entropy import (
    cover_conditional_entropy,
    partition_conditional_entropy,
    topological_cover_entropy,
    _chain_rule_rate,
    shannon,
)
from .measures import (
    MarkovMeasure,
    WordMeasure,
    markov_to_word,
    mix,
    pushforward,
    restrict,
    stationary_starts,
)

__all__ = [
    "HorizonGuardError",
    "SeparationCheck",
    "AveragedCheck",
    "WitnessReport",
    "witness_measures",
    "MaximizeResult",
    "maximize_invariant_entropy",
]


class HorizonGuardError(RuntimeError):
    """The witness construction would exceed the configured horizon."""


@dataclass(frozen=True)
class SeparationCheck:
    """Entropy of the separated-set measure against one pulled partition join.

    ``lhs`` is the fiber entropy of the empirical measure over the atoms of
    the ``shift``-pulled join of refinement ``refinement``; the two right-hand
    sides are the log floors coming from the separated-set cardinality chain.
    ``vacuous`` marks a zero floor (bound trivially true).
    """

    omega: int
    shift: int
    refinement: int
    lhs: float
    rhs_pulled: float
    rhs_submult: float
    vacuous: bool
    ok: bool


@dataclass(frozen=True)
class AveragedCheck:
    """Averaged-measure entropy bound for one refinement and block length."""

    refinement: int
    block: int
    lhs: float
    rhs: float
    vacuous: bool
    ok: bool


@dataclass(frozen=True)
class WitnessReport:
    n: int
    refinement_count: int
    cover_size: int
    horizon: int
    common_horizon: int
    separated_sizes: tuple[int, ...]
    pulled_counts: tuple[int, ...]
    full_counts: tuple[int, ...]
    separation_checks: tuple[SeparationCheck, ...]
    averaged_checks: tuple[AveragedCheck, ...]

    @property
    def all_ok(self) -> bool:
        return all(c.ok for c in self.separation_checks) and all(
            c.ok for c in self.averaged_checks
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "refinement_count": self.refinement_count,
            "cover_size": self.cover_size,
            "horizon": self.horizon,
            "common_horizon": self.common_horizon,
            "separated_sizes": list(self.separated_sizes),
            "pulled_counts": list(self.pulled_counts),
            "full_counts": list(self.full_counts),
            "separation_checks": [vars(c) for c in self.separation_checks],
            "averaged_checks": [vars(c) for c in self.averaged_checks],
            "all_ok": self.all_ok,
        }


def _log_floor(value: int) -> tuple[float, bool]:
    """Natural log of a floor count; zero floors are vacuous lower bounds."""
    if value <= 0:
        return (-math.inf, True)
    return (math.log(value), False)


def witness_measures(
    bundle: SymbolicBundle,
    cover: PositionedCover,
    n: int,
    *,
    tol: float = 1e-9,
    horizon_cap: int = 24,
    limits: SolverLimits = SolverLimits(),
    element_cap: int = 10**6,
    enum_cap: int = 10**5,
) -> tuple[dict[int, tuple], WordMeasure, WordMeasure, WitnessReport]:
    """Separated-set empirical measures and their finite-horizon certificates.

    Returns ``(separated_words_per_fiber, nu, mu, report)`` where ``nu`` is
    the empirical measure spread uniformly over the completions of each
    separated word, and ``mu`` is its skew-product average over
    ``n**2 + n`` steps, materialized at the largest common horizon.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if not cover.product_form:
        raise CoverError("witness construction needs a product-form cover")
    if cover.start != 0:
        raise CoverError("witness construction expects a cover anchored at 0")
    m0 = cover.length
    span = n * n + n
    horizon = span + n + m0 - 1
    if horizon > horizon_cap:
        raise HorizonGuardError(
            f"witness horizon {horizon} exceeds the cap {horizon_cap}"
        )
    enum = product_partitions_finer(cover, enum_cap=enum_cap)
    refinements = list(itertools.islice(iter(enum), min(n, enum.count)))
    if not refinements:
        raise CoverError("no product refinements available")
    k_used = len(refinements)
    d = cover.element_count
    base = bundle.base

    pulled_cover = pullback(cover, n)
    pulled_refs = [pullback(r, n) for r in refinements]

    separated: dict[int, tuple] = {}
    pulled_counts: list[int] = []
    full_counts: list[int] = []
    for omega in range(base.omega_count):
        separated[omega] = maximal_multi_separated(
            bundle,
            omega,
            pulled_refs,
            pulled_cover,
            n * n,
            limits=limits,
            element_cap=element_cap,
        )
        pulled_counts.append(
            cover_count(
                bundle, omega, pulled_cover, n * n, limits=limits, element_cap=element_cap
            )
        )
        full_counts.append(
            cover_count(bundle, omega, cover, span, limits=limits, element_cap=element_cap)
        )

    # empirical measure: uniform over separated words, split uniformly over
    # each word's admissible completions to the full horizon window
    core_start, core_len = n, span + m0 - 1 - n
    tables = []
    for omega in range(base.omega_count):
        core = set(separated[omega])
        groups: dict[tuple, list] = {w: [] for w in core}
        for u in admissible_tuples(bundle, omega, 0, horizon):
            r = u[core_start : core_start + core_len]
            if r in groups:
                groups[r].append(u)
        per: dict[tuple, float] = {}
        share = 1.0 / len(core)
        for w, completions in groups.items():
            # no-dead-symbols guarantees at least one completion
            piece = share / len(completions)
            for u in completions:
                per[u] = per.get(u, 0.0) + piece
        tables.append(per)
    nu = WordMeasure(bundle=bundle, horizon=horizon, weights=tuple(tables))

    separation_checks: list[SeparationCheck] = []
    base_joins = [
        range_join(refinement, 0, span - 1, element_cap=element_cap)
        for refinement in refinements
    ]
    for shift in range(n + 1):
        for l, refinement in enumerate(refinements):
            # the shifted range join is exactly the pullback of the base join
            joined = pullback(base_joins[l], shift)
            for omega in range(base.omega_count):
                cell_of = joined.cell_of(omega)
                masses: dict[int, float] = {}
                for u, x in nu.weights[omega].items():
                    c = cell_of[u[joined.start : joined.stop]]
                    masses[c] = masses.get(c, 0.0) + x
                lhs = shannon(masses.values())
                rhs1, vac1 = _log_floor(pulled_counts[omega] // n)
                rhs2, vac2 = _log_floor(full_counts[omega] // (n * d**n))
                vac = vac1 and vac2
                ok = (vac1 or lhs >= rhs1 - tol) and (vac2 or lhs >= rhs2 - tol)
                separation_checks.append(
                    SeparationCheck(
                        omega=omega,
                        shift=shift,
                        refinement=l,
                        lhs=lhs,
                        rhs_pulled=rhs1,
                        rhs_submult=rhs2,
                        vacuous=vac,
                        ok=ok,
                    )
                )

    common_horizon = horizon - (span - 1)
    pieces = [restrict(nu, common_horizon)]
    pushed = nu
    for _ in range(span - 1):
        pushed = pushforward(pushed)
        pieces.append(restrict(pushed, common_horizon))
    mu = mix(pieces, [1.0 / span] * span)

    averaged_checks: list[AveragedCheck] = []
    logdet = 0.0
    vac_int = False
    for omega in range(base.omega_count):
        term, vac = _log_floor(full_counts[omega] // (n * d**n))
        vac_int = vac_int or vac
        logdet += base.weights[omega] * term
    for l, refinement in enumerate(refinements):
        for m in range(1, n + 1):
            joined = range_join(refinement, 0, m - 1, element_cap=element_cap)
            lhs = partition_conditional_entropy(mu, joined)
            rhs = (m / span) * (logdet - m * math.log(d))
            ok = vac_int or lhs >= rhs - tol
            averaged_checks.append(
                AveragedCheck(
                    refinement=l, block=m, lhs=lhs, rhs=rhs, vacuous=vac_int, ok=ok
                )
            )

    report = WitnessReport(
        n=n,
        refinement_count=k_used,
        cover_size=d,
        horizon=horizon,
        common_horizon=common_horizon,
        separated_sizes=tuple(len(separated[w]) for w in range(base.omega_count)),
        pulled_counts=tuple(pulled_counts),
        full_counts=tuple(full_counts),
        separation_checks=tuple(separation_checks),
        averaged_checks=tuple(averaged_checks),
    )
    return separated, nu, mu, report


# ---------------------------------------------------------------------------
# variational search
# ---------------------------------------------------------------------------


def _project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    rho = 0
    for j in range(len(u)):
        if u[j] + (1.0 - css[j]) / (j + 1) > 0:
            rho = j
    lam = (1.0 - css[rho]) / (rho + 1)
    return np.maximum(v + lam, 0.0)


@dataclass(frozen=True)
class MaximizeResult:
    measure: MarkovMeasure
    value: float
    reference: float
    gap: float
    evaluations: int

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "reference": self.reference,
            "gap": self.gap,
            "evaluations": self.evaluations,
            "transitions": [q.tolist() for q in self.measure.transitions],
            "starts": [p.tolist() for p in self.measure.starts],
        }


def maximize_invariant_entropy(
    bundle: SymbolicBundle,
    target: PositionedCover,
    budget: int,
    seed: int,
    *,
    nmax: int = 4,
    mode: str = "general",
    reference_nmax: int = 8,
    limits: SolverLimits = SolverLimits(),
    element_cap: int = 10**6,
) -> MaximizeResult:
    """Search the invariant Markov family for a high entropy rate on the target.

    Partitions are scored with :func:`partition_entropy_report` (exact chain
    rule when available, certified upper bound otherwise); covers are scored
    with the step-``nmax`` certified conditional-entropy rate.  Hill climbing
    restarts from deterministic seeds derived from ``(seed, restart)``, so
    results do not depend on scheduling.
    """
    if budget < 1:
        raise ValueError("need budget >= 1")
    base = bundle.base
    d = bundle.alphabet_size
    supports = [
        np.flatnonzero(bundle.adjacency[w][a])
        for w in range(base.omega_count)
        for a in range(d)
    ]
    free_rows = [i for i, s in enumerate(supports) if len(s) > 1]

    is_partition = isinstance(target, PositionedPartition)
    joined_targets = None
    if not (is_partition and _singleton_chain(target)):
        joined_targets = [
            range_join(target, 0, k - 1, element_cap=element_cap)
            for k in range(1, nmax + 1)
        ]

    def build(qrows: list[np.ndarray]) -> MarkovMeasure:
        qs = []
        for w in range(base.omega_count):
            m = np.zeros((d, d))
            for a in range(d):
                m[a, supports[w * d + a]] = qrows[w * d + a]
            qs.append(m)
        return stationary_starts(bundle, qs)

    def score(mu: MarkovMeasure) -> float:
        if is_partition:
            exact = _chain_rule_rate(mu, target)
            if exact is not None:
                return exact
        horizon = target.stop + nmax - 1
        nu = markov_to_word(mu, horizon)
        best = math.inf
        for k, joined in enumerate(joined_targets, start=1):
            h = cover_conditional_entropy(nu, joined, mode)
            best = min(best, h / k)
        return best

    def uniform_rows() -> list[np.ndarray]:
        return [np.full(len(s), 1.0 / len(s)) for s in supports]

    evaluations = 0
    best_value = -math.inf
    best_measure = None
    restarts = max(1, min(8, budget // 50)) if free_rows else 1
    per_restart = max(1, budget // restarts)
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence((seed, r)))
        if r == 0:
            qrows = uniform_rows()
        else:
            qrows = [rng.dirichlet(np.ones(len(s))) for s in supports]
        mu = build(qrows)
        cur = score(mu)
        evaluations += 1
        if cur > best_value:
            best_value, best_measure = cur, mu
        if not free_rows:
            break
        steps = per_restart - 1
        for t in range(steps):
            if evaluations >= budget:
                break
            sigma = 0.4 * (0.05 / 0.4) ** (t / max(1, steps - 1))
            i = free_rows[int(rng.integers(len(free_rows)))]
            old = qrows[i]
            proposal = _project_simplex(old + rng.normal(0.0, sigma, len(old)))
            qrows[i] = proposal
            mu_new = build(qrows)
            val = score(mu_new)
            evaluations += 1
            if val > cur:
                cur, mu = val, mu_new
                if val > best_value:
                    best_value, best_measure = val, mu_new
            else:
                qrows[i] = old
        if evaluations >= budget:
            break

    ref_report = topological_cover_entropy(
        bundle, target, reference_nmax, limits=limits, element_cap=element_cap
    )
    reference = (
        ref_report.exact_rate if ref_report.exact_rate is not None else ref_report.certified_upper
    )
    return MaximizeResult(
        measure=best_measure,
        value=best_value,
        reference=reference,
        gap=reference - best_value,
        evaluations=evaluations,
    )


def _singleton_chain(partition: PositionedPartition) -> bool:
    for c in range(partition.length):
        if all(
            len({w[c] for w in sect}) <= 1
            for elem in partition.sections
            for sect in elem
        ):
            return True
    return False

"""Entropy functionals over covers, partitions, and fibered measures.

Conventions used throughout:

* the unit is nats (natural logarithm) and ``0 * ln 0 == 0``;
* no limit is ever asserted: every rate comes back as a finite sequence of
  per-step values, a certified upper bound (the running minimum, valid by
  subadditivity), and, where a closed form exists, an exact rate;
* comparisons use absolute tolerance ``1e-9`` unless an identity is exact by
  construction, in which case ``1e-12``.

Conditional entropy of a cover given the base sigma-algebra is an infimum over
refining partitions.  Two infimum classes are exposed: ``"general"`` allows
fiber-dependent refinements (minimized per fiber, independently) and
``"product"`` restricts to refinements whose cells look the same in every
fiber.  Both reduce to a minimum-entropy assignment problem: each window word
must be handed to one cover element containing it, and the objective (the
P-weighted Shannon entropy of the induced cell masses) is concave in the
assignment masses, so the minimum over all measurable refinements is attained
at such an integral assignment.  The assignment minimum is computed exactly by
component decomposition plus branch and bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .base import SymbolicBundle, admissible_tuples, cycle_growth_rate
from .covercomb import SolverLimits, min_subcover_count
from .covers import (
    CoverError,
    PositionedCover,
    PositionedPartition,
    join,
    product_partitions_finer,
    pullback,
    range_join,
)
from .measures import (
    NORM_TOL,
    MarkovMeasure,
    WordMeasure,
    invariance_residual,
    markov_to_word,
)

__all__ = [
    "EXACT_TOL",
    "VALUE_TOL",
    "EnumerationGuardError",
    "EntropyReport",
    "shannon",
    "MassShiftCheck",
    "mass_shift_entropy_check",
    "cover_complexity",
    "topological_cover_entropy",
    "partition_conditional_entropy",
    "cover_conditional_entropy",
    "h_minus_report",
    "partition_entropy_report",
    "HPlusResult",
    "h_plus_value",
    "PowerSystem",
    "block_power_system",
]

EXACT_TOL = 1e-12
VALUE_TOL = 1e-9

WordTuple = tuple[int, ...]


class EnumerationGuardError(RuntimeError):
    """An exact enumeration exceeded its configured budget."""

    def __init__(self, message: str, partial_minimum: float | None = None):
        if partial_minimum is not None:
            message = f"{message} (partial minimum {partial_minimum:.12g})"
        super().__init__(message)
        self.partial_minimum = partial_minimum


def _xlnx(x: float) -> float:
    return x * math.log(x) if x > 0.0 else 0.0


def shannon(p: Iterable[float]) -> float:
    """Shannon entropy ``-sum p ln p`` in nats, with ``0 ln 0 = 0``."""
    total = 0.0
    for x in p:
        if x < 0:
            raise ValueError(f"negative probability entry {x!r}")
        total -= _xlnx(float(x))
    return total


@dataclass(frozen=True)
class MassShiftCheck:
    """Outcome of the strict entropy-drop check under a mass shift.

    ``hypothesis_errors`` lists violated preconditions field by field; the
    verdict and margin are only present when the hypotheses hold.
    """

    hypothesis_errors: tuple[str, ...]
    holds: bool | None
    margin: float | None
    lhs: float | None
    rhs: float | None


def mass_shift_entropy_check(
    p: Sequence[float], delta: Sequence[float]
) -> MassShiftCheck:
    """Check that removing ``delta[0]`` from the smallest probability and
    distributing it over the others strictly lowers the entropy.

    Hypotheses: ``p`` sorted ascending with entries in (0, 1) summing to at
    most 1; ``0 < delta[0] < p[0]``; for k >= 1, ``delta[k]`` in
    ``[0, 1 - p[k])``; and the distributed mass balances,
    ``sum(delta[1:]) == delta[0]``.
    """
    p = [float(x) for x in p]
    d = [float(x) for x in delta]
    errors: list[str] = []
    k = len(p)
    if k < 2:
        errors.append("need at least two probabilities")
    if len(d) != k:
        errors.append("delta must have the same length as p")
    if any(not 0.0 < x < 1.0 for x in p):
        errors.append("p entries must lie strictly inside (0, 1)")
    if any(p[i] > p[i + 1] for i in range(k - 1)):
        errors.append("p must be sorted ascending")
    if sum(p) > 1.0 + EXACT_TOL:
        errors.append("p must sum to at most 1")
    if d and p and not 0.0 < d[0] < p[0]:
        errors.append("delta[0] must satisfy 0 < delta[0] < p[0] (strictly)")
    if len(d) == k and k >= 2:
        for i in range(1, k):
            if not 0.0 <= d[i] < 1.0 - p[i]:
                errors.append(f"delta[{i}] must lie in [0, 1 - p[{i}])")
        if abs(sum(d[1:]) - d[0]) > EXACT_TOL:
            errors.append("sum(delta[1:]) must equal delta[0]")
    if errors:
        return MassShiftCheck(tuple(errors), None, None, None, None)
    lhs = shannon(p)
    shifted = [p[0] - d[0]] + [p[i] + d[i] for i in range(1, k)]
    rhs = shannon(shifted)
    margin = lhs - rhs
    return MassShiftCheck((), margin > 0.0, margin, lhs, rhs)


@dataclass(frozen=True)
class EntropyReport:
    """Finite-step entropy values with a Fekete-certified upper bound.

    ``sequence`` holds ``(n, value_n)`` pairs where ``value_n`` is the step-n
    average; ``certified_upper`` is their minimum, a true upper bound for the
    limit by subadditivity; ``exact_rate`` is present when a closed form
    (spectral radius or chain rule) applies.
    """

    sequence: tuple[tuple[int, float], ...]
    certified_upper: float
    exact_rate: float | None = None
    tags: tuple[str, ...] = ()

    def prefix_minima(self) -> tuple[float, ...]:
        out: list[float] = []
        cur = math.inf
        for _, v in self.sequence:
            cur = min(cur, v)
            out.append(cur)
        return tuple(out)

    def to_dict(self) -> dict:
        return {
            "sequence": [[n, v] for n, v in self.sequence],
            "certified_upper": self.certified_upper,
            "exact_rate": self.exact_rate,
            "tags": list(self.tags),
        }


def _report(sequence: list[tuple[int, float]], exact_rate, tags) -> EntropyReport:
    certified = min(v for _, v in sequence)
    if exact_rate is not None and exact_rate > certified + VALUE_TOL:
        raise AssertionError(
            f"closed-form rate {exact_rate!r} exceeds the certified bound {certified!r}"
        )
    return EntropyReport(
        sequence=tuple(sequence),
        certified_upper=certified,
        exact_rate=exact_rate,
        tags=tuple(tags),
    )


def cover_complexity(
    bundle: SymbolicBundle,
    cover: PositionedCover,
    n: int,
    *,
    limits: SolverLimits = SolverLimits(),
    element_cap: int = 10**6,
) -> float:
    """P-average of the log minimal subcover count of the n-step join."""
    joined = range_join(cover, 0, n - 1, element_cap=element_cap)
    return sum(
        bundle.base.weights[omega] * math.log(min_subcover_count(joined, omega, limits))
        for omega in range(bundle.base.omega_count)
    )


def _is_singleton_cell_partition(cover: PositionedCover) -> bool:
    if not isinstance(cover, PositionedPartition):
        return False
    return all(
        len(sect) <= 1 for elem in cover.sections for sect in elem
    )


def topological_cover_entropy(
    bundle: SymbolicBundle,
    cover: PositionedCover,
    nmax: int,
    *,
    limits: SolverLimits = SolverLimits(),
    element_cap: int = 10**6,
) -> EntropyReport:
    """Step-averaged cover complexities with their Fekete upper bound.

    For partitions whose cells are single window words, the count of the
    n-step join is an admissible word count, so the exact rate is the
    integrated spectral growth rate of the transition cycle products.
    """
    if nmax < 1:
        raise ValueError("need nmax >= 1")
    seq: list[tuple[int, float]] = []
    joined = None
    for n in range(1, nmax + 1):
        piece = pullback(cover, n - 1)
        joined = piece if joined is None else join(joined, piece)
        if joined.element_count > element_cap:
            raise CoverError(f"join exceeded element cap {element_cap}")
        h = sum(
            bundle.base.weights[omega]
            * math.log(min_subcover_count(joined, omega, limits))
            for omega in range(bundle.base.omega_count)
        )
        seq.append((n, h / n))
    exact = None
    tags = ["fekete"]
    if _is_singleton_cell_partition(cover):
        exact = cycle_growth_rate(bundle).integrated
        tags.append("spectral")
    return _report(seq, exact, tags)


# ---------------------------------------------------------------------------
# minimum-entropy assignments
# ---------------------------------------------------------------------------


def _min_entropy_assignment(
    words: Sequence[tuple[np.ndarray, tuple[int, ...]]],
    element_count: int,
    pvec: np.ndarray,
    *,
    node_cap: int = 10**6,
) -> float:
    """Minimum of ``sum_f pvec[f] * H(cell masses in fiber f)`` over all ways
    of assigning each word's mass vector to one of its candidate elements.

    ``words`` holds ``(mass_vector, candidate_elements)`` pairs; mass vectors
    are indexed by fiber.  Exact: forced words accumulate first, the rest
    decompose into components that share no reachable cell, and each component
    is searched with a concentration lower bound.
    """
    dim = len(pvec)
    if words:
        common = set(words[0][1])
        for _, cands in words[1:]:
            if not common:
                break
            common &= set(cands)
        if common:
            return 0.0
    base: dict[int, np.ndarray] = {}
    grouped: dict[tuple[int, ...], np.ndarray] = {}
    for mass, cands in words:
        if len(cands) == 1:
            e = cands[0]
            if e in base:
                base[e] = base[e] + mass
            else:
                base[e] = mass.copy()
        elif len(cands) == 0:
            raise CoverError("a positive-mass word has no containing element")
        else:
            # words with identical candidate sets move together at some
            # optimum (concavity: a split assignment is an interior point of
            # the merged group's simplex), so merging them is exact
            if cands in grouped:
                grouped[cands] = grouped[cands] + mass
            else:
                grouped[cands] = mass.copy()
    free = [(mass, cands) for cands, mass in grouped.items()]

    def g(vec: np.ndarray) -> float:
        # P-weighted -M ln M summed over fibers
        return -float(
            sum(pvec[f] * _xlnx(float(vec[f])) for f in range(dim))
        )

    if not free:
        return sum(g(v) for v in base.values())

    # components over shared reachable cells
    parent: dict[int, int] = {}

    def find(x: int) -> int:
        while parent.get(x, x) != x:
            parent[x] = parent.get(parent[x], parent[x])
            x = parent[x]
        return x

    def union(a: int, b: int):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for _, cands in free:
        for e in cands[1:]:
            union(cands[0], e)
    comp_words: dict[int, list[tuple[np.ndarray, tuple[int, ...]]]] = {}
    for mass, cands in free:
        comp_words.setdefault(find(cands[0]), []).append((mass, cands))
    comp_elems: dict[int, set[int]] = {}
    for mass, cands in free:
        comp_elems.setdefault(find(cands[0]), set()).update(cands)

    touched = set().union(*comp_elems.values())
    total = sum(g(v) for e, v in base.items() if e not in touched)

    nodes = [0]
    for root, wlist in comp_words.items():
        elems = sorted(comp_elems[root])
        wlist = sorted(
            wlist, key=lambda mc: (-float(pvec @ mc[0]), mc[1])
        )
        masses = {e: base.get(e, np.zeros(dim)).copy() for e in elems}
        # pending[i][e]: total mass of words at depth >= i that can reach e
        pending: list[dict[int, np.ndarray]] = [
            {e: np.zeros(dim) for e in elems} for _ in range(len(wlist) + 1)
        ]
        suffix = [np.zeros(dim) for _ in range(len(wlist) + 1)]
        for i in range(len(wlist) - 1, -1, -1):
            for e in elems:
                pending[i][e] = pending[i + 1][e]
            mass, cands = wlist[i]
            suffix[i] = suffix[i + 1] + mass
            for e in cands:
                pending[i][e] = pending[i][e] + mass

        def comp_value(ms: dict[int, np.ndarray]) -> float:
            return sum(g(v) for v in ms.values())

        # incumbent: greedy concentration, then single-move local search
        choice = []
        trial = {e: v.copy() for e, v in masses.items()}
        for mass, cands in wlist:
            target = max(cands, key=lambda e: float(pvec @ trial[e]))
            trial[target] += mass
            choice.append(target)
        for _ in range(30):
            improved = False
            for j, (mass, cands) in enumerate(wlist):
                here = choice[j]
                trial[here] = trial[here] - mass
                val_here = g(trial[here] + mass) - g(trial[here])
                better, gain = here, val_here
                for e in cands:
                    if e == here:
                        continue
                    v = g(trial[e] + mass) - g(trial[e])
                    if v < gain - 1e-15:
                        better, gain = e, v
                trial[better] = trial[better] + mass
                if better != here:
                    choice[j] = better
                    improved = True
            if not improved:
                break
        best = [comp_value(trial)]

        def lower_bound(i: int, ms: dict[int, np.ndarray], cur: float) -> float:
            """Cheapest-possible completion cost from depth ``i``.

            Three valid relaxations, the largest prunes.  Linearization: every
            final cell mass M_e is at most its reachability cap U_e, so
            ``-M ln M >= -M ln U_e`` bounds the objective by a per-word
            minimum.  Increments: each remaining word pays at least its
            entropy increment evaluated at the cap (the increment decreases
            in the base mass and increments telescope per cell).  Dump: all
            remaining mass of a fiber lands on its heaviest cell.
            """
            caps = {e: ms[e] + pending[i][e] for e in elems}
            neglog = {
                e: [
                    -math.log(c) if 0.0 < c < 1.0 else 0.0
                    for c in (float(x) for x in caps[e])
                ]
                for e in elems
            }
            linear = 0.0
            for e in elems:
                held = ms[e]
                for f in range(dim):
                    if held[f] > 0.0:
                        linear += pvec[f] * float(held[f]) * neglog[e][f]
            by_word = 0.0
            for j in range(i, len(wlist)):
                mass, cands = wlist[j]
                cheapest = math.inf
                cheapest_lin = math.inf
                for e in cands:
                    cap = caps[e]
                    nl = neglog[e]
                    inc = 0.0
                    lin = 0.0
                    for f in range(dim):
                        m = float(mass[f])
                        if m > 0.0:
                            inc -= pvec[f] * (
                                _xlnx(float(cap[f])) - _xlnx(float(cap[f]) - m)
                            )
                            lin += pvec[f] * m * nl[f]
                    if inc < cheapest:
                        cheapest = inc
                    if lin < cheapest_lin:
                        cheapest_lin = lin
                by_word += cheapest
                linear += cheapest_lin
            dump = 0.0
            for f in range(dim):
                r = float(suffix[i][f])
                if r <= 0.0:
                    continue
                mx = max(float(ms[e][f]) for e in elems)
                dump += pvec[f] * (_xlnx(mx) - _xlnx(mx + r))
            return max(cur + by_word, cur + dump, linear)

        def dfs(i: int, ms: dict[int, np.ndarray], cur: float):
            nodes[0] += 1
            if nodes[0] > node_cap:
                raise EnumerationGuardError(
                    "assignment search exceeded node cap",
                    partial_minimum=total + best[0],
                )
            if i == len(wlist):
                if cur < best[0]:
                    best[0] = cur
                return
            # the margin sits at float resolution, far below value tolerances
            if lower_bound(i, ms, cur) >= best[0] - 1e-13:
                return
            mass, cands = wlist[i]
            scored = []
            for e in cands:
                old = ms[e]
                scored.append((g(old + mass) - g(old), e))
            scored.sort()
            for delta, e in scored:
                old = ms[e]
                ms[e] = old + mass
                dfs(i + 1, ms, cur + delta)
                ms[e] = old

        dfs(0, masses, comp_value(masses))
        total += best[0]
    return total


def _measure_at(mu, horizon: int) -> WordMeasure:
    if isinstance(mu, WordMeasure):
        if mu.horizon < horizon:
            raise ValueError(
                f"word measure horizon {mu.horizon} too short for window end {horizon}"
            )
        return mu
    if isinstance(mu, MarkovMeasure):
        return markov_to_word(mu, horizon)
    raise TypeError(f"unsupported measure type {type(mu)!r}")


def partition_conditional_entropy(mu, partition: PositionedPartition) -> float:
    """P-average over fibers of the Shannon entropy of the cell masses."""
    if not isinstance(partition, PositionedPartition):
        raise TypeError("need a partition; use cover_conditional_entropy for covers")
    nu = _measure_at(mu, partition.stop)
    bundle = partition.bundle
    total = 0.0
    for omega in range(bundle.base.omega_count):
        cell_of = partition.cell_of(omega)
        masses: dict[int, float] = {}
        for w, x in nu.window_masses(omega, partition.start, partition.length).items():
            if x == 0.0:
                continue
            c = cell_of[w]
            masses[c] = masses.get(c, 0.0) + x
        total += bundle.base.weights[omega] * shannon(masses.values())
    return total


def cover_conditional_entropy(
    mu,
    cover: PositionedCover,
    mode: str = "general",
    *,
    enum_cap: int = 10**5,
    node_cap: int = 10**6,
) -> float:
    """Infimum of the conditional partition entropy over refinements of the cover.

    ``mode="general"`` minimizes per fiber independently over assignments of
    each window word to a containing element (the full refinement class);
    ``mode="product"`` shares one assignment across fibers (the product-form
    class, enumerable by :func:`product_partitions_finer`).  The general value
    never exceeds the product value.
    """
    if mode not in ("general", "product"):
        raise ValueError(f"unknown mode {mode!r}")
    bundle = cover.bundle
    if isinstance(cover, PositionedPartition):
        return partition_conditional_entropy(mu, cover)
    # an element containing every admissible word in every fiber is free
    for elem in range(cover.element_count):
        if all(
            set(admissible_tuples(bundle, omega, cover.start, cover.length))
            <= cover.sections[elem][omega]
            for omega in range(bundle.base.omega_count)
        ):
            return 0.0
    nu = _measure_at(mu, cover.stop)
    omega_count = bundle.base.omega_count
    if mode == "general":
        total = 0.0
        for omega in range(omega_count):
            member = cover.membership(omega)
            words = []
            for w, x in nu.window_masses(omega, cover.start, cover.length).items():
                if x == 0.0:
                    continue
                words.append((np.array([x]), member[w]))
            total += bundle.base.weights[omega] * _min_entropy_assignment(
                words,
                cover.element_count,
                np.array([1.0]),
                node_cap=node_cap,
            )
        return total
    if not cover.product_form:
        raise CoverError("product mode needs a product-form cover")
    enum = product_partitions_finer(cover, enum_cap=enum_cap)
    if enum.lazy:
        raise EnumerationGuardError(
            f"product refinement family has {enum.count} members (cap {enum_cap})"
        )
    marginals = [
        nu.window_masses(omega, cover.start, cover.length)
        for omega in range(omega_count)
    ]
    words = []
    for i, w in enumerate(enum.words):
        vec = np.array([marginals[omega].get(w, 0.0) for omega in range(omega_count)])
        if vec.any():
            words.append((vec, enum.choices[i]))
    return _min_entropy_assignment(
        words,
        cover.element_count,
        np.array(bundle.base.weights),
        node_cap=node_cap,
    )


def _require_invariant(mu) -> MarkovMeasure:
    if not isinstance(mu, MarkovMeasure):
        raise TypeError("rate estimates need an invariant Markov family")
    res = invariance_residual(mu)
    if res > NORM_TOL:
        raise ValueError(f"measure is not invariant (residual {res:.3e})")
    return mu


def h_minus_report(
    mu,
    cover: PositionedCover,
    nmax: int,
    mode: str = "general",
    *,
    enum_cap: int = 10**5,
    node_cap: int = 10**6,
    element_cap: int = 10**6,
) -> EntropyReport:
    """Step-averaged conditional cover entropies along the joined pullbacks.

    Requires an invariant measure, which makes the raw sequence subadditive
    and the running minimum a certified upper bound for its limit.
    """
    mu = _require_invariant(mu)
    if nmax < 1:
        raise ValueError("need nmax >= 1")
    nu = markov_to_word(mu, cover.stop + nmax - 1)
    seq: list[tuple[int, float]] = []
    joined = None
    for n in range(1, nmax + 1):
        piece = pullback(cover, n - 1)
        joined = piece if joined is None else join(joined, piece)
        if joined.element_count > element_cap:
            raise CoverError(f"join exceeded element cap {element_cap}")
        h = cover_conditional_entropy(
            nu, joined, mode, enum_cap=enum_cap, node_cap=node_cap
        )
        seq.append((n, h / n))
    exact = None
    tags = [f"mode:{mode}"]
    if isinstance(cover, PositionedPartition):
        exact = _chain_rule_rate(mu, cover)
        if exact is not None:
            tags.append("chain-rule")
    return _report(seq, exact, tags)


def _chain_rule_rate(mu: MarkovMeasure, partition: PositionedPartition) -> float | None:
    """Exact word-process entropy rate when the partition pins a coordinate.

    Eligibility: at some window offset, all words of each cell share one
    symbol in every fiber.  Then the joined cells are sandwiched between the
    single-coordinate process and the full word process, whose common rate is
    the chain rule ``sum_w P(w) sum_a p(a) H(Q(w)[a, :])``.
    """
    pins = False
    for c in range(partition.length):
        if all(
            len({w[c] for w in sect}) <= 1
            for elem in partition.sections
            for sect in elem
        ):
            pins = True
            break
    if not pins:
        return None
    bundle = mu.bundle
    rate = 0.0
    for omega in range(bundle.base.omega_count):
        q = mu.transitions[omega]
        p = mu.starts[omega]
        rate += bundle.base.weights[omega] * sum(
            float(p[a]) * shannon(q[a]) for a in range(bundle.alphabet_size)
        )
    return rate


def partition_entropy_report(
    mu,
    partition: PositionedPartition,
    nmax: int,
    *,
    node_cap: int = 10**6,
    element_cap: int = 10**6,
) -> EntropyReport:
    """Finite-step entropy rate of a partition under an invariant measure."""
    if not isinstance(partition, PositionedPartition):
        raise TypeError("need a partition")
    return h_minus_report(
        mu,
        partition,
        nmax,
        "general",
        node_cap=node_cap,
        element_cap=element_cap,
    )


@dataclass(frozen=True)
class HPlusResult:
    """Minimum certified rate over the product refinements of a cover."""

    value: float
    argmin: PositionedPartition
    candidate_values: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "candidate_values": list(self.candidate_values),
            "argmin_cells": [sorted(c) for c in self.argmin.product_sections],
        }


def h_plus_value(
    mu,
    cover: PositionedCover,
    nmax: int,
    *,
    enum_cap: int = 10**5,
    node_cap: int = 10**6,
    element_cap: int = 10**6,
) -> HPlusResult:
    """Minimize the certified partition rate over product refinements.

    The infimum defining this quantity runs over partitions only, so each
    candidate comes from the product refinement family; the reported value
    carries the argmin partition.
    """
    mu = _require_invariant(mu)
    enum = product_partitions_finer(cover, enum_cap=enum_cap)
    if enum.lazy:
        raise EnumerationGuardError(
            f"product refinement family has {enum.count} members (cap {enum_cap})"
        )
    best = math.inf
    best_part = None
    values = []
    for part in enum:
        rep = partition_entropy_report(
            mu, part, nmax, node_cap=node_cap, element_cap=element_cap
        )
        values.append(rep.certified_upper)
        if rep.certified_upper < best:
            best = rep.certified_upper
            best_part = part
    return HPlusResult(value=best, argmin=best_part, candidate_values=tuple(values))


# ---------------------------------------------------------------------------
# block power systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PowerSystem:
    """The M-step system in its non-overlapping block presentation.

    The driving permutation becomes ``theta^M``; the fiber alphabet at a base
    point is its set of admissible M-blocks, with adjacency given by the
    junction transition between consecutive blocks.  A block word of length k
    decodes to a base word of length ``k*M``, so block counts and entropies
    can be cross-checked against the base system at stride M.
    """

    bundle: SymbolicBundle
    cover: PositionedCover
    steps: int
    block_vocab: tuple[tuple[WordTuple, ...], ...]
    junctions: tuple[np.ndarray, ...]

    @property
    def block_window(self) -> int:
        """Blocks needed to see the transported cover window."""
        return -(-(self.steps + self.cover.length - 1) // self.steps)

    def block_alphabet_sizes(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.block_vocab)

    def block_word_count(self, omega: int, k: int) -> int:
        """Number of admissible k-block words starting in fiber ``omega``."""
        if k < 1:
            raise ValueError("need k >= 1")
        base = self.bundle.base
        if k == 1:
            return len(self.block_vocab[omega])
        point = base.apply_theta(omega, (k - 2) * self.steps)
        vec = [1] * len(self.block_vocab[base.apply_theta(point, self.steps)])
        for j in range(k - 2, -1, -1):
            mat = self.junctions[base.apply_theta(omega, j * self.steps)]
            vec = [
                sum(int(mat[a, b]) * vec[b] for b in range(mat.shape[1]))
                for a in range(mat.shape[0])
            ]
        return sum(vec)

    def h_value_sequence(
        self,
        mu,
        kmax: int,
        mode: str = "general",
        *,
        enum_cap: int = 10**5,
        node_cap: int = 10**6,
        element_cap: int = 10**6,
    ) -> EntropyReport:
        """Conditional cover entropies of the power system, per block step.

        Computed at block granularity: the universe at level k is the
        admissible block words of length ``k - 1 + block_window`` (equivalently
        base words of that length times M), each assigned to a containing
        element of the k-step transported join.  The step-k value times
        ``1/(kM)`` matches the base sequence at ``n = kM`` exactly.
        """
        mu = _require_invariant(mu)
        bundle = self.bundle
        base = bundle.base
        seq: list[tuple[int, float]] = []
        for k in range(1, kmax + 1):
            blocks = k - 1 + self.block_window
            granularity = blocks * self.steps
            joined = range_join(
                self.cover, 0, k * self.steps - 1, element_cap=element_cap
            )
            nu = markov_to_word(mu, granularity)
            if mode == "general":
                h = 0.0
                for omega in range(base.omega_count):
                    member = joined.membership(omega, (0, granularity))
                    words = [
                        (np.array([x]), member[w])
                        for w, x in nu.weights[omega].items()
                        if x > 0.0
                    ]
                    h += base.weights[omega] * _min_entropy_assignment(
                        words,
                        joined.element_count,
                        np.array([1.0]),
                        node_cap=node_cap,
                    )
            elif mode == "product":
                if not joined.product_form:
                    raise CoverError("product mode needs a product-form cover")
                lo, hi = joined.start, joined.stop
                index: dict[WordTuple, list] = {}
                for omega in range(base.omega_count):
                    for w, x in nu.weights[omega].items():
                        if x == 0.0:
                            continue
                        vec = index.setdefault(w, [0.0] * base.omega_count)
                        vec[omega] += x
                words = []
                for w, vec in sorted(index.items()):
                    cands = tuple(
                        i
                        for i, d in enumerate(joined.product_sections)
                        if w[lo:hi] in d
                    )
                    words.append((np.array(vec), cands))
                h = _min_entropy_assignment(
                    words,
                    joined.element_count,
                    np.array(base.weights),
                    node_cap=node_cap,
                )
            else:
                raise ValueError(f"unknown mode {mode!r}")
            seq.append((k, h / k))
        return _report(seq, None, [f"mode:{mode}", f"block:{self.steps}"])


def block_power_system(
    bundle: SymbolicBundle,
    cover: PositionedCover,
    steps: int,
    *,
    block_cap: int = 4096,
) -> PowerSystem:
    """Re-block the bundle into its M-step power presentation.

    ``steps == 1`` reproduces the base system verbatim (alphabet per fiber,
    adjacency as junctions).  The cover must start at coordinate 0.
    """
    if steps < 1:
        raise ValueError("need steps >= 1")
    if cover.start != 0:
        raise CoverError("power presentation expects a cover anchored at 0")
    if bundle.alphabet_size**steps > block_cap:
        raise EnumerationGuardError(
            f"block alphabet would have up to {bundle.alphabet_size}**{steps} symbols"
        )
    base = bundle.base
    vocab = tuple(
        admissible_tuples(bundle, omega, 0, steps) for omega in range(base.omega_count)
    )
    junctions = []
    for omega in range(base.omega_count):
        nxt = base.apply_theta(omega, steps)
        glue = bundle.matrix_at(omega, steps - 1)
        mat = np.zeros((len(vocab[omega]), len(vocab[nxt])), dtype=np.int8)
        for i, u in enumerate(vocab[omega]):
            for j, v in enumerate(vocab[nxt]):
                if glue[u[-1], v[0]]:
                    mat[i, j] = 1
        mat.setflags(write=False)
        junctions.append(mat)
    return PowerSystem(
        bundle=bundle,
        cover=cover,
        steps=steps,
        block_vocab=vocab,
        junctions=tuple(junctions),
    )

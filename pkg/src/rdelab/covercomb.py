"""Exact combinatorial kernels: minimal subcovers and multi-separated word sets.

The subcover count is an exact set-cover minimum computed by branch and bound:
forced picks and dominated sets are eliminated up front, a greedy pass seeds
the incumbent, branching runs over the covering sets of the most constrained
uncovered item in decreasing coverage order, and solved subproblem states are
memoized by their uncovered-universe bitmask.  Disjoint families of any size
resolve through forced picks alone, without branching.

Calls are independently parallelizable; every memo table is per-invocation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .base import SymbolicBundle, admissible_tuples
from .covers import PositionedCover, PositionedPartition, is_finer, range_join

__all__ = [
    "UncoveredUniverseError",
    "SetCoverSizeError",
    "SeparationError",
    "SolverLimits",
    "exact_min_cover",
    "min_subcover_count",
    "cover_count",
    "maximal_multi_separated",
]


class UncoveredUniverseError(ValueError):
    """Some universe point is covered by no set (malformed cover)."""


class SetCoverSizeError(RuntimeError):
    """Instance exceeds the configured exactness guarantees."""


class SeparationError(ValueError):
    """The supplied partitions do not refine the reference cover."""


@dataclass(frozen=True)
class SolverLimits:
    """Size box (after reductions) inside which exactness is guaranteed."""

    universe_max: int = 4096
    elems_max: int = 64


def _iter_bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def exact_min_cover(
    universe_size: int,
    masks: Sequence[int],
    limits: SolverLimits = SolverLimits(),
) -> int:
    """Exact minimum number of ``masks`` whose union is the full universe.

    Items are bit positions ``0..universe_size-1``.  The limits apply to the
    instance left after reductions, not to the raw input.
    """
    full = (1 << universe_size) - 1
    union = 0
    for m in masks:
        union |= m
    if union != full:
        missing = (full & ~union)
        item = (missing & -missing).bit_length() - 1
        raise UncoveredUniverseError(f"universe item {item} is uncovered")
    if universe_size == 0:
        return 0

    pool = [m for m in masks if m]
    picked = 0
    uncovered = full
    # forced picks: items covered by exactly one set pin that set
    while uncovered:
        count: dict[int, int] = {}
        owner: dict[int, int] = {}
        for m in pool:
            for b in _iter_bits(m):
                count[b] = count.get(b, 0) + 1
                owner[b] = m
        forced = {owner[b] for b, c in count.items() if c == 1}
        if not forced:
            break
        for m in forced:
            picked += 1
            uncovered &= ~m
        pool = [mm for mm in (m & uncovered for m in pool) if mm]
    if not uncovered:
        return picked

    pool = sorted(set(pool), key=lambda m: (-m.bit_count(), m))
    if len(pool) <= 512:
        kept: list[int] = []
        for m in pool:
            if not any((m | k) == k for k in kept):
                kept.append(m)
        pool = kept

    if uncovered.bit_count() > limits.universe_max or len(pool) > limits.elems_max:
        raise SetCoverSizeError(
            f"reduced instance ({uncovered.bit_count()} items, {len(pool)} sets) "
            f"exceeds limits {limits}"
        )

    def greedy(state: int) -> int:
        out = 0
        while state:
            best = max(pool, key=lambda m: (m & state).bit_count())
            state &= ~best
            out += 1
        return out

    max_gain = max(m.bit_count() for m in pool)
    memo: dict[int, int] = {}

    def solve(state: int, budget: int) -> int:
        """Exact minimum for ``state`` if below ``budget``, else ``budget``."""
        if state == 0:
            return 0
        hit = memo.get(state)
        if hit is not None:
            return hit
        lower = -(-state.bit_count() // max_gain)
        if lower >= budget:
            return budget
        item = min(
            _iter_bits(state), key=lambda x: sum(1 for m in pool if m >> x & 1)
        )
        options = sorted(
            (m for m in pool if m >> item & 1),
            key=lambda m: -(m & state).bit_count(),
        )
        best = budget
        for m in options:
            sub = solve(state & ~m, best - 1)
            if sub + 1 < best:
                best = sub + 1
                if best == lower:
                    break
        if best < budget:
            memo[state] = best
        return best

    return picked + solve(uncovered, greedy(uncovered) + 1)


def min_subcover_count(
    cover: PositionedCover,
    omega: int,
    limits: SolverLimits = SolverLimits(),
) -> int:
    """Exact minimum number of cover elements whose sections cover the fiber.

    The universe is the admissible word set of fiber ``omega`` over the cover
    window.  For a partition this is the number of nonempty sections, since
    disjoint sets admit no smaller subcover.
    """
    if isinstance(cover, PositionedPartition):
        return sum(1 for elem in cover.sections if elem[omega])
    words = admissible_tuples(cover.bundle, omega, cover.start, cover.length)
    index = {w: i for i, w in enumerate(words)}
    masks = []
    for elem in range(cover.element_count):
        m = 0
        for w in cover.sections[elem][omega]:
            m |= 1 << index[w]
        masks.append(m)
    return exact_min_cover(len(words), masks, limits)


def global_min_subcover_count(
    cover: PositionedCover,
    limits: SolverLimits = SolverLimits(),
) -> int:
    """Minimum number of cover elements covering every fiber simultaneously.

    The universe is the disjoint union of the per-fiber admissible word sets;
    one element contributes its section in each fiber.
    """
    bundle = cover.bundle
    offset = 0
    index: dict[tuple[int, tuple[int, ...]], int] = {}
    for omega in range(bundle.base.omega_count):
        for w in admissible_tuples(bundle, omega, cover.start, cover.length):
            index[(omega, w)] = offset
            offset += 1
    masks = []
    for elem in range(cover.element_count):
        m = 0
        for omega in range(bundle.base.omega_count):
            for w in cover.sections[elem][omega]:
                m |= 1 << index[(omega, w)]
        masks.append(m)
    return exact_min_cover(offset, masks, limits)


def cover_count(
    bundle: SymbolicBundle,
    omega: int,
    cover: PositionedCover,
    n: int,
    *,
    limits: SolverLimits = SolverLimits(),
    element_cap: int = 10**6,
) -> int:
    """Minimal subcover cardinality of the ``n``-step joined pullbacks of the
    cover over fiber ``omega``.

    For partitions this equals the number of nonempty joined cells, which for
    singleton-cell partitions equals the admissible word count over the joined
    window.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    joined = range_join(cover, 0, n - 1, element_cap=element_cap)
    return min_subcover_count(joined, omega, limits)


def maximal_multi_separated(
    bundle: SymbolicBundle,
    omega: int,
    partitions: Sequence[PositionedPartition],
    cover: PositionedCover,
    n: int,
    *,
    limits: SolverLimits = SolverLimits(),
    element_cap: int = 10**6,
) -> tuple[tuple[int, ...], ...]:
    """Greedy-maximal word set meeting each joined-partition atom at most once.

    Every supplied partition must refine ``cover``.  Words over the common
    joined window are scanned in lexicographic order and kept whenever, for
    every partition, their joined atom is still unused; after a full scan no
    remaining word can be added, so the set is maximal.  Any maximal set has
    at least ``floor(N / K)`` members, where ``N`` is the joined minimal
    subcover count of ``cover`` and ``K`` the number of partitions; that bound
    is asserted before returning.
    """
    if not partitions:
        raise SeparationError("need at least one partition")
    for l, part in enumerate(partitions):
        if not isinstance(part, PositionedPartition):
            raise SeparationError(f"entry {l} is not a partition")
        if not is_finer(part, cover):
            raise SeparationError(f"partition {l} is not finer than the cover")
    joined_parts = [range_join(p, 0, n - 1, element_cap=element_cap) for p in partitions]
    joined_cover = range_join(cover, 0, n - 1, element_cap=element_cap)
    hs = min(j.start for j in joined_parts + [joined_cover])
    he = max(j.stop for j in joined_parts + [joined_cover])
    universe = admissible_tuples(bundle, omega, hs, he - hs)
    atom_of = [j.cell_of(omega, (hs, he)) for j in joined_parts]
    used: list[set[int]] = [set() for _ in joined_parts]
    chosen: list[tuple[int, ...]] = []
    for w in universe:
        atoms = [atom_of[l][w] for l in range(len(joined_parts))]
        if any(a in used[l] for l, a in enumerate(atoms)):
            continue
        chosen.append(w)
        for l, a in enumerate(atoms):
            used[l].add(a)
    n_count = min_subcover_count(joined_cover, omega, limits)
    bound = n_count // len(partitions)
    if len(chosen) < bound:
        raise AssertionError(
            f"separated set of size {len(chosen)} below floor({n_count}/{len(partitions)})"
        )
    return tuple(chosen)

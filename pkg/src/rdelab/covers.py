"""Positioned covers and partitions of a random subshift bundle.

A cover is a finite indexed family of elements, each element holding one word
set per fiber ("its section") over a common coordinate window.  Sections are
stored canonically as admissible words only, sorted, so cover equality is
decidable bit-exactly.  Empty sections are kept: an element empty in one fiber
may be nonempty in another, and index arithmetic must line up across fibers.

Product-form covers additionally carry one defining word set per element,
shared by all fibers; the per-fiber sections are the defining sets cut down to
the fiber's admissible words.

All values are immutable and all operations pure; iterators returned by the
enumeration below are independent per caller.
"""

from __future__ import annotations

import itertools
from dataclasses import InitVar, dataclass, field
from typing import Iterable, Iterator, Sequence

from .base import SymbolicBundle, admissible_tuples

__all__ = [
    "CoverError",
    "JoinSizeError",
    "PositionedCover",
    "PositionedPartition",
    "product_cover",
    "per_fiber_cover",
    "zero_cylinders",
    "full_word_partition",
    "trivial_cover",
    "is_finer",
    "join",
    "pullback",
    "range_join",
    "PartitionEnumeration",
    "product_partitions_finer",
]

WordTuple = tuple[int, ...]


class CoverError(ValueError):
    """A cover or partition violates covering/disjointness invariants."""


class JoinSizeError(RuntimeError):
    """An iterated join would exceed the configured element cap."""


def _normalize_word(w) -> WordTuple:
    if isinstance(w, int):
        return (w,)
    return tuple(int(s) for s in w)


@dataclass(frozen=True)
class PositionedCover:
    """Indexed family of per-fiber word sets on the window [start, start+length)."""

    bundle: SymbolicBundle
    start: int
    length: int
    sections: tuple[tuple[frozenset, ...], ...]
    product_sections: tuple[frozenset, ...] | None = None
    check: InitVar[bool] = True
    _mcache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self, check: bool):
        if check:
            self._validate()

    def _validate(self):
        if self.start < 0 or self.length < 1:
            raise CoverError("cover window must be nonempty and start at >= 0")
        if not self.sections:
            raise CoverError("cover must have at least one element")
        omega_count = self.bundle.base.omega_count
        for omega in range(omega_count):
            admissible = set(admissible_tuples(self.bundle, omega, self.start, self.length))
            union = set()
            for sect in self.sections:
                union |= sect[omega]
                if not sect[omega] <= admissible:
                    raise CoverError("sections must contain admissible words only")
            missing = admissible - union
            if missing:
                raise CoverError(
                    f"covering fails in fiber {self.bundle.base.labels[omega]}: "
                    f"word {min(missing)} uncovered"
                )
            if not union:
                raise CoverError("every fiber needs at least one nonempty section")
        self._validate_extra()

    def _validate_extra(self):
        pass

    @property
    def stop(self) -> int:
        return self.start + self.length

    @property
    def window(self) -> tuple[int, int]:
        return (self.start, self.stop)

    @property
    def element_count(self) -> int:
        return len(self.sections)

    @property
    def product_form(self) -> bool:
        return self.product_sections is not None

    @property
    def is_partition(self) -> bool:
        return isinstance(self, PositionedPartition)

    def section(self, element: int, omega: int) -> frozenset:
        return self.sections[element][omega]

    def membership(self, omega: int, hull: tuple[int, int] | None = None) -> dict:
        """Map each admissible hull word to the indices of elements containing it.

        With ``hull=None`` the cover's own window is used.  Containment of a
        hull word means its restriction to the cover window lies in the
        element's section.
        """
        hs, he = hull if hull is not None else self.window
        if hs > self.start or he < self.stop:
            raise ValueError("hull must contain the cover window")
        key = (omega, hs, he)
        hit = self._mcache.get(key)
        if hit is not None:
            return hit
        lo = self.start - hs
        hi = lo + self.length
        out: dict[WordTuple, tuple[int, ...]] = {}
        own = hs == self.start and he == self.stop
        for w in admissible_tuples(self.bundle, omega, hs, he - hs):
            r = w if own else w[lo:hi]
            idx = tuple(
                i for i, sect in enumerate(self.sections) if r in sect[omega]
            )
            out[w] = idx
        self._mcache[key] = out
        return out


class PositionedPartition(PositionedCover):
    """A positioned cover whose sections are pairwise disjoint in every fiber."""

    def membership(self, omega: int, hull: tuple[int, int] | None = None) -> dict:
        hs, he = hull if hull is not None else self.window
        key = (omega, hs, he)
        hit = self._mcache.get(key)
        if hit is not None:
            return hit
        out = {w: (e,) for w, e in self.cell_of(omega, hull).items()}
        self._mcache[key] = out
        return out

    def _validate_extra(self):
        for omega in range(self.bundle.base.omega_count):
            seen: set[WordTuple] = set()
            for sect in self.sections:
                overlap = seen & sect[omega]
                if overlap:
                    raise CoverError(
                        f"partition cells overlap in fiber "
                        f"{self.bundle.base.labels[omega]} on word {min(overlap)}"
                    )
                seen |= sect[omega]

    def cell_of(self, omega: int, hull: tuple[int, int] | None = None) -> dict:
        """Map each admissible hull word to the unique cell index containing it.

        Disjointness lets the sections be inverted directly, so the cost is
        the total section size rather than words times elements.
        """
        hs, he = hull if hull is not None else self.window
        if hs > self.start or he < self.stop:
            raise ValueError("hull must contain the cover window")
        key = ("cell", omega, hs, he)
        hit = self._mcache.get(key)
        if hit is not None:
            return hit
        by_word: dict[WordTuple, int] = {}
        for e, elem in enumerate(self.sections):
            for w in elem[omega]:
                by_word[w] = e
        if hs == self.start and he == self.stop:
            out = by_word
        else:
            lo = self.start - hs
            hi = lo + self.length
            out = {
                w: by_word[w[lo:hi]]
                for w in admissible_tuples(self.bundle, omega, hs, he - hs)
            }
        self._mcache[key] = out
        return out


def _canonical_sections(
    bundle: SymbolicBundle,
    start: int,
    length: int,
    raw: Sequence[Sequence[Iterable]],
) -> tuple[tuple[frozenset, ...], ...]:
    omega_count = bundle.base.omega_count
    out = []
    for elem in raw:
        if len(elem) != omega_count:
            raise CoverError("need one section per fiber for every element")
        per = []
        for omega in range(omega_count):
            adm = set(admissible_tuples(bundle, omega, start, length))
            per.append(frozenset(_normalize_word(w) for w in elem[omega]) & adm)
        out.append(tuple(per))
    return tuple(out)


def _somewhere_admissible(bundle: SymbolicBundle, start: int, length: int) -> frozenset:
    u: set[WordTuple] = set()
    for omega in range(bundle.base.omega_count):
        u |= set(admissible_tuples(bundle, omega, start, length))
    return frozenset(u)


def product_cover(
    bundle: SymbolicBundle,
    elements: Sequence[Iterable],
    *,
    start: int = 0,
    partition: bool = False,
) -> PositionedCover:
    """Cover whose every fiber sees the same defining word set per element."""
    defs = [frozenset(_normalize_word(w) for w in elem) for elem in elements]
    lengths = {len(w) for d in defs for w in d}
    if len(lengths) != 1:
        raise CoverError("all cover words must share one window length")
    length = lengths.pop()
    vocab = _somewhere_admissible(bundle, start, length)
    defs = tuple(d & vocab for d in defs)
    raw = [[d for _ in range(bundle.base.omega_count)] for d in defs]
    cls = PositionedPartition if partition else PositionedCover
    return cls(
        bundle=bundle,
        start=start,
        length=length,
        sections=_canonical_sections(bundle, start, length, raw),
        product_sections=defs,
    )


def per_fiber_cover(
    bundle: SymbolicBundle,
    elements: Sequence[Sequence[Iterable]],
    *,
    start: int = 0,
    partition: bool = False,
) -> PositionedCover:
    """Cover with explicitly fiber-dependent sections.

    ``elements[i][omega]`` is the word set of element ``i`` in fiber ``omega``.
    When the defining sets of every element agree across fibers the result is
    flagged product-form automatically.
    """
    norm = [
        [frozenset(_normalize_word(w) for w in per) for per in elem]
        for elem in elements
    ]
    lengths = {len(w) for elem in norm for per in elem for w in per}
    if len(lengths) != 1:
        raise CoverError("all cover words must share one window length")
    length = lengths.pop()
    product_sections = None
    if all(len(set(elem)) == 1 for elem in norm):
        vocab = _somewhere_admissible(bundle, start, length)
        product_sections = tuple(elem[0] & vocab for elem in norm)
    cls = PositionedPartition if partition else PositionedCover
    return cls(
        bundle=bundle,
        start=start,
        length=length,
        sections=_canonical_sections(bundle, start, length, norm),
        product_sections=product_sections,
    )


def zero_cylinders(bundle: SymbolicBundle, coordinate: int = 0) -> PositionedPartition:
    """The single-coordinate partition: one cell per alphabet symbol."""
    return product_cover(
        bundle,
        [[(a,)] for a in range(bundle.alphabet_size)],
        start=coordinate,
        partition=True,
    )


def full_word_partition(
    bundle: SymbolicBundle, start: int, length: int
) -> PositionedPartition:
    """Partition into singleton cells, one per somewhere-admissible window word."""
    vocab = sorted(_somewhere_admissible(bundle, start, length))
    return product_cover(bundle, [[w] for w in vocab], start=start, partition=True)


def trivial_cover(
    bundle: SymbolicBundle, start: int = 0, length: int = 1
) -> PositionedPartition:
    """One-element cover containing every admissible window word."""
    vocab = sorted(_somewhere_admissible(bundle, start, length))
    return product_cover(bundle, [vocab], start=start, partition=True)


def _hull(u: PositionedCover, v: PositionedCover) -> tuple[int, int]:
    return (min(u.start, v.start), max(u.stop, v.stop))


def _expanded_section(
    cover: PositionedCover, element: int, omega: int, hull: tuple[int, int]
) -> frozenset:
    hs, he = hull
    lo = cover.start - hs
    hi = lo + cover.length
    sect = cover.sections[element][omega]
    return frozenset(
        w
        for w in admissible_tuples(cover.bundle, omega, hs, he - hs)
        if w[lo:hi] in sect
    )


def is_finer(u: PositionedCover, v: PositionedCover) -> bool:
    """True when every element of ``u`` sits inside a single element of ``v``.

    Windows may differ; both covers are first lifted to the common window hull
    by intersecting with admissibility, and the containing element must be the
    same one in every fiber.
    """
    if u.bundle is not v.bundle:
        raise ValueError("covers must live on the same bundle")
    hull = _hull(u, v)
    omega_count = u.bundle.base.omega_count
    exp_v = [
        [_expanded_section(v, j, omega, hull) for omega in range(omega_count)]
        for j in range(v.element_count)
    ]
    for i in range(u.element_count):
        exp_u = [_expanded_section(u, i, omega, hull) for omega in range(omega_count)]
        if not any(
            all(exp_u[omega] <= exp_v[j][omega] for omega in range(omega_count))
            for j in range(v.element_count)
        ):
            return False
    return True


def join(u: PositionedCover, v: PositionedCover) -> PositionedCover:
    """Pairwise-intersection cover on the window hull.

    Element ``(i, j)`` of the result is stored at flat index ``i * len(v) + j``;
    all index pairs are kept even when empty in every fiber.  The result is a
    partition whenever both inputs are.
    """
    if u.bundle is not v.bundle:
        raise ValueError("covers must live on the same bundle")
    bundle = u.bundle
    hull = _hull(u, v)
    hs, he = hull
    omega_count = bundle.base.omega_count
    ku, kv = u.element_count, v.element_count
    sections = [[set() for _ in range(omega_count)] for _ in range(ku * kv)]
    for omega in range(omega_count):
        mu = u.membership(omega, hull)
        mv = v.membership(omega, hull)
        for w in admissible_tuples(bundle, omega, hs, he - hs):
            for i in mu[w]:
                row = i * kv
                for j in mv[w]:
                    sections[row + j][omega].add(w)
    product_sections = None
    if u.product_form and v.product_form:
        vocab = sorted(_somewhere_admissible(bundle, hs, he - hs))
        lou, hiu = u.start - hs, u.start - hs + u.length
        lov, hiv = v.start - hs, v.start - hs + v.length
        product_sections = tuple(
            frozenset(
                w
                for w in vocab
                if w[lou:hiu] in u.product_sections[i]
                and w[lov:hiv] in v.product_sections[j]
            )
            for i in range(ku)
            for j in range(kv)
        )
    cls = (
        PositionedPartition
        if isinstance(u, PositionedPartition) and isinstance(v, PositionedPartition)
        else PositionedCover
    )
    return cls(
        bundle=bundle,
        start=hs,
        length=he - hs,
        sections=tuple(
            tuple(frozenset(per) for per in elem) for elem in sections
        ),
        product_sections=product_sections,
    )


def pullback(u: PositionedCover, i: int) -> PositionedCover:
    """Pull the cover back through ``i`` steps of the dynamics.

    The window shifts right by ``i`` and the section of each element at fiber
    ``omega`` becomes its section at ``theta^i(omega)``; admissibility of the
    stored words transports exactly, so no recomputation is needed.
    """
    if i < 0:
        raise ValueError("pullback power must be nonnegative")
    if i == 0:
        return u
    base = u.bundle.base
    perm = [base.apply_theta(omega, i) for omega in range(base.omega_count)]
    sections = tuple(
        tuple(elem[perm[omega]] for omega in range(base.omega_count))
        for elem in u.sections
    )
    return type(u)(
        bundle=u.bundle,
        start=u.start + i,
        length=u.length,
        sections=sections,
        product_sections=u.product_sections,
        check=False,
    )


def range_join(
    u: PositionedCover, m: int, n: int, *, element_cap: int = 10**6
) -> PositionedCover:
    """Join of the pullbacks of ``u`` through steps ``m..n`` inclusive.

    The element count is ``len(u) ** (n - m + 1)`` index tuples (kept even when
    empty); the cap guards that number before any section is materialized.
    """
    if not 0 <= m <= n:
        raise ValueError("need 0 <= m <= n")
    steps = n - m + 1
    if u.element_count**steps > element_cap:
        raise JoinSizeError(
            f"range join would create {u.element_count}^{steps} elements "
            f"(cap {element_cap})"
        )
    out = pullback(u, m)
    for k in range(m + 1, n + 1):
        out = join(out, pullback(u, k))
    return out


@dataclass(frozen=True)
class PartitionEnumeration:
    """Deterministic stream of product partitions refining a product cover.

    ``count`` is the exact number of partitions; when it exceeds the cap the
    stream is flagged lazy and should be consumed incrementally.  Iteration
    order is lexicographic in the assignment vectors, so it is reproducible
    across runs and platforms.
    """

    cover: PositionedCover
    words: tuple[WordTuple, ...]
    choices: tuple[tuple[int, ...], ...]
    count: int
    lazy: bool

    def __iter__(self) -> Iterator[PositionedPartition]:
        bundle = self.cover.bundle
        k = self.cover.element_count
        for assignment in itertools.product(*self.choices):
            cells: list[set] = [set() for _ in range(k)]
            for w, e in zip(self.words, assignment):
                cells[e].add(w)
            yield product_cover(
                bundle,
                [sorted(c) for c in cells],
                start=self.cover.start,
                partition=True,
            )

    def __len__(self) -> int:
        return self.count


def product_partitions_finer(
    u: PositionedCover, *, enum_cap: int = 10**5
) -> PartitionEnumeration:
    """Every product partition obtained by assigning each window word one
    containing element of ``u``.

    The assignment domain is the somewhere-admissible window vocabulary, so the
    enumeration is exhaustive and duplicate-free, and each yielded partition
    keeps the element indexing of ``u`` (empty cells included).
    """
    if not u.product_form:
        raise CoverError("partition enumeration needs a product-form cover")
    words = tuple(sorted(_somewhere_admissible(u.bundle, u.start, u.length)))
    choices = []
    for w in words:
        c = tuple(i for i, d in enumerate(u.product_sections) if w in d)
        if not c:
            raise CoverError(f"word {w} is not contained in any element")
        choices.append(c)
    count = 1
    for c in choices:
        count *= len(c)
    return PartitionEnumeration(
        cover=u,
        words=words,
        choices=tuple(choices),
        count=count,
        lazy=count > enum_cap,
    )

"""Finite driving systems and the random subshift bundles they carry.

The model is a finite probability space with an invertible measure-preserving
permutation ``theta``, together with one 0/1 transition matrix per base point.
Each fiber is the two-sided sequence space whose step-``i`` transitions are
read from the matrix attached to ``theta^i(omega)``; the fiber map is the left
shift, which carries the fiber over ``omega`` bijectively onto the fiber over
``theta(omega)``.  All computations touch only finitely many coordinates.

Every type here is immutable after construction and every operation is a pure
function of its inputs, so concurrent use from multiple threads is safe.
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass

import numpy as np

WEIGHT_TOL = 1e-12

__all__ = [
    "WEIGHT_TOL",
    "BundleError",
    "PowerIterationError",
    "ProbBase",
    "SymbolicBundle",
    "Word",
    "Violation",
    "ValidationReport",
    "validate",
    "admissible_words",
    "word_count",
    "CycleRate",
    "CycleRates",
    "cycle_growth_rate",
    "spectral_radius",
]


class BundleError(ValueError):
    """A driving system or bundle violates a structural invariant."""


class PowerIterationError(RuntimeError):
    """Power iteration failed to reach the requested residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class ProbBase:
    """Finite probability space with an invertible measure-preserving map.

    Parameters
    ----------
    weights : per-point probabilities; strictly positive, summing to one.
    theta : permutation of ``range(len(weights))`` given as an image table.
    labels : optional display names, one per point.
    """

    weights: tuple[float, ...]
    theta: tuple[int, ...]
    labels: tuple[str, ...] = ()
    check: InitVar[bool] = True

    def __post_init__(self, check: bool):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "theta", tuple(int(t) for t in self.theta))
        if not self.labels:
            object.__setattr__(
                self, "labels", tuple(f"w{i}" for i in range(len(self.weights)))
            )
        else:
            object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
        if check:
            problems = _base_violations(self)
            if problems:
                raise BundleError("; ".join(v.message for v in problems))

    @property
    def omega_count(self) -> int:
        return len(self.weights)

    def apply_theta(self, omega: int, power: int = 1) -> int:
        """Image of ``omega`` under ``theta`` iterated ``power`` times (power >= 0)."""
        for _ in range(power):
            omega = self.theta[omega]
        return omega

    def cycles(self) -> tuple[tuple[int, ...], ...]:
        """Orbits of ``theta``, each starting at its smallest member."""
        seen = [False] * self.omega_count
        cycles = []
        for start in range(self.omega_count):
            if seen[start]:
                continue
            cyc = []
            w = start
            while not seen[w]:
                seen[w] = True
                cyc.append(w)
                w = self.theta[w]
            cycles.append(tuple(cyc))
        return tuple(cycles)


@dataclass(frozen=True, eq=False)
class SymbolicBundle:
    """Per-fiber 0/1 transition matrices over a common finite alphabet.

    ``adjacency[omega][a, b] == 1`` allows symbol ``b`` to follow symbol ``a``
    at the step read off at base point ``omega``.  Construction requires every
    row and every column of every matrix to contain a one ("no dead symbols"),
    which makes each fiber nonempty and every admissible finite word the
    restriction of a bi-infinite point of the fiber.  Pass ``check=False`` to
    build a possibly broken bundle for diagnosis with :func:`validate`.
    """

    base: ProbBase
    alphabet: tuple[str, ...]
    adjacency: tuple[np.ndarray, ...]
    check: InitVar[bool] = True

    def __post_init__(self, check: bool):
        mats = []
        for a in self.adjacency:
            m = np.array(a, dtype=np.int8)
            m.setflags(write=False)
            mats.append(m)
        object.__setattr__(self, "adjacency", tuple(mats))
        object.__setattr__(self, "alphabet", tuple(str(s) for s in self.alphabet))
        object.__setattr__(self, "_word_cache", {})
        if check:
            problems = _base_violations(self.base) + _bundle_violations(self)
            if problems:
                raise BundleError("; ".join(v.message for v in problems))

    @property
    def alphabet_size(self) -> int:
        return len(self.alphabet)

    def matrix_at(self, omega: int, coordinate: int) -> np.ndarray:
        """Transition matrix constraining coordinates (c, c+1) in fiber ``omega``."""
        return self.adjacency[self.base.apply_theta(omega, coordinate)]


@dataclass(frozen=True, order=True)
class Word:
    """A finite symbol block positioned on the half-open span [start, stop)."""

    symbols: tuple[int, ...]
    start: int = 0

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))
        if self.start < 0:
            raise ValueError("word span must start at a nonnegative coordinate")

    @property
    def stop(self) -> int:
        return self.start + len(self.symbols)

    @property
    def length(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    omega: int | None = None
    index: int | None = None


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    problems: tuple[Violation, ...]

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "problems": [
                {k: v for k, v in vars(p).items() if v is not None}
                for p in self.problems
            ],
        }


def _base_violations(base: ProbBase) -> list[Violation]:
    out: list[Violation] = []
    n = len(base.weights)
    if n == 0:
        return [Violation("empty-base", "probability base has no points")]
    if sorted(base.theta) != list(range(n)):
        out.append(Violation("theta-not-bijective", "theta is not a permutation"))
        return out
    if any(w <= 0 for w in base.weights):
        out.append(Violation("weight-not-positive", "weights must be strictly positive"))
    if abs(sum(base.weights) - 1.0) > WEIGHT_TOL:
        out.append(
            Violation(
                "weights-not-normalized",
                f"weights sum to {sum(base.weights)!r}, expected 1 within {WEIGHT_TOL}",
            )
        )
    for w in range(n):
        if abs(base.weights[base.theta[w]] - base.weights[w]) > WEIGHT_TOL:
            out.append(
                Violation(
                    "not-theta-invariant",
                    f"P not theta-invariant: weight differs along the orbit of "
                    f"{base.labels[w]}",
                    omega=w,
                )
            )
            break
    return out


def _bundle_violations(bundle: SymbolicBundle) -> list[Violation]:
    out: list[Violation] = []
    d = bundle.alphabet_size
    if d < 1:
        return [Violation("empty-alphabet", "alphabet must be nonempty")]
    if len(bundle.adjacency) != bundle.base.omega_count:
        out.append(
            Violation(
                "adjacency-count",
                "need exactly one adjacency matrix per base point",
            )
        )
        return out
    for omega, mat in enumerate(bundle.adjacency):
        name = bundle.base.labels[omega]
        if mat.shape != (d, d):
            out.append(
                Violation(
                    "bad-shape",
                    f"adjacency of fiber {name} has shape {mat.shape}, expected {(d, d)}",
                    omega=omega,
                )
            )
            continue
        if not np.isin(mat, (0, 1)).all():
            out.append(
                Violation("not-binary", f"adjacency of fiber {name} has entries outside 0/1", omega=omega)
            )
            continue
        for r in range(d):
            if mat[r].sum() == 0:
                out.append(
                    Violation(
                        "dead-row",
                        f"fiber {name}: row {r} (symbol {bundle.alphabet[r]}) has no outgoing edge",
                        omega=omega,
                        index=r,
                    )
                )
        for c in range(d):
            if mat[:, c].sum() == 0:
                out.append(
                    Violation(
                        "dead-column",
                        f"fiber {name}: column {c} (symbol {bundle.alphabet[c]}) has no incoming edge",
                        omega=omega,
                        index=c,
                    )
                )
    return out


def validate(bundle: SymbolicBundle) -> ValidationReport:
    """Run every structural invariant and report violations without raising."""
    problems = tuple(_base_violations(bundle.base) + _bundle_violations(bundle))
    return ValidationReport(ok=not problems, problems=problems)


def admissible_tuples(
    bundle: SymbolicBundle, omega: int, start: int, length: int
) -> tuple[tuple[int, ...], ...]:
    """Sorted tuple of admissible symbol blocks on [start, start+length) in fiber omega.

    A block ``w`` qualifies when every consecutive pair is allowed by the
    matrix read at the pair's left coordinate.  Cached on the bundle.
    """
    if length < 1:
        raise ValueError("span must contain at least one coordinate")
    if start < 0:
        raise ValueError("span must start at a nonnegative coordinate")
    key = (omega, start, length)
    cache = bundle._word_cache
    hit = cache.get(key)
    if hit is not None:
        return hit
    d = bundle.alphabet_size
    words: list[tuple[int, ...]] = [(a,) for a in range(d)]
    for offset in range(length - 1):
        mat = bundle.matrix_at(omega, start + offset)
        words = [w + (b,) for w in words for b in range(d) if mat[w[-1], b]]
    result = tuple(sorted(words))
    cache[key] = result
    return result


def admissible_words(
    bundle: SymbolicBundle, omega: int, span: tuple[int, int]
) -> tuple[Word, ...]:
    """Admissible :class:`Word` objects of fiber ``omega`` on the span [s, e)."""
    s, e = span
    if e <= s:
        raise ValueError(f"empty span {span!r} rejected")
    return tuple(Word(w, s) for w in admissible_tuples(bundle, omega, s, e - s))


def word_count(bundle: SymbolicBundle, omega: int, n: int) -> int:
    """Exact number of admissible length-``n`` blocks starting at coordinate 0.

    Equals the total of all entries of the transfer product
    ``A(omega) A(theta omega) ... A(theta^{n-2} omega)``; for ``n == 1`` it is
    the alphabet size.  Computed in exact integer arithmetic.
    """
    if n < 1:
        raise ValueError("word length must be at least 1")
    d = bundle.alphabet_size
    if n == 1:
        return d
    vec = [1] * d
    # right-to-left products keep the accumulator a vector
    for coordinate in range(n - 2, -1, -1):
        mat = bundle.matrix_at(omega, coordinate)
        vec = [sum(int(mat[a, b]) * vec[b] for b in range(d)) for a in range(d)]
    return sum(vec)


def strongly_connected_components(support: np.ndarray) -> list[list[int]]:
    """Strongly connected components of a boolean adjacency matrix (Tarjan)."""
    d = support.shape[0]
    index = [0] * d
    low = [0] * d
    onstack = [False] * d
    comp = [-1] * d
    stack: list[int] = []
    counter = [1]
    comps: list[list[int]] = []

    def connect(v0: int):
        work = [(v0, 0)]
        while work:
            v, pi = work.pop()
            if pi == 0:
                index[v] = low[v] = counter[0]
                counter[0] += 1
                stack.append(v)
                onstack[v] = True
            advanced = False
            for w in range(pi, d):
                if not support[v, w]:
                    continue
                if index[w] == 0:
                    work.append((v, w + 1))
                    work.append((w, 0))
                    advanced = True
                    break
                if onstack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            if low[v] == index[v]:
                members = []
                while True:
                    w = stack.pop()
                    onstack[w] = False
                    comp[w] = len(comps)
                    members.append(w)
                    if w == v:
                        break
                comps.append(sorted(members))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])

    for v in range(d):
        if index[v] == 0:
            connect(v)
    return comps


def _power_radius_irreducible(
    matrix: np.ndarray, tol: float, max_iterations: int
) -> float:
    """Power iteration on an irreducible nonnegative block.

    Iterates on ``matrix + I`` (same Perron vector, radius shifted by one),
    which is primitive, so convergence is geometric; the Rayleigh quotient is
    returned once the residual drops below ``tol``.
    """
    n = matrix.shape[0]
    if n == 1:
        return float(matrix[0, 0])
    shifted = matrix + np.eye(n)
    scale = shifted.sum()
    shifted = shifted / scale
    vec = np.full(n, 1.0 / math.sqrt(n))
    residual = math.inf
    for _ in range(max_iterations):
        nxt = shifted @ vec
        nxt /= float(np.linalg.norm(nxt))
        lam = float(nxt @ (shifted @ nxt))
        residual = float(np.linalg.norm(shifted @ nxt - lam * nxt))
        vec = nxt
        if residual <= tol:
            return lam * scale - 1.0
    raise PowerIterationError("power iteration did not converge", residual=residual)


def spectral_radius(
    matrix: np.ndarray, tol: float = 1e-12, max_iterations: int = 100_000
) -> float:
    """Spectral radius of a nonnegative matrix by power iteration.

    The matrix is first split into strongly connected components (the radius
    of a nonnegative matrix is the maximum over its irreducible diagonal
    blocks); each block is handled by power iteration, which converges
    geometrically there.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("spectral radius needs a square matrix")
    if (m < 0).any():
        raise ValueError("matrix must be nonnegative")
    best = 0.0
    for comp in strongly_connected_components(m > 0):
        sub = m[np.ix_(comp, comp)]
        best = max(best, _power_radius_irreducible(sub, tol, max_iterations))
    return best


@dataclass(frozen=True)
class CycleRate:
    omegas: tuple[int, ...]
    rate: float
    mass: float


@dataclass(frozen=True)
class CycleRates:
    cycles: tuple[CycleRate, ...]
    integrated: float

    def to_dict(self) -> dict:
        return {
            "integrated": self.integrated,
            "cycles": [
                {"omegas": list(c.omegas), "rate": c.rate, "mass": c.mass}
                for c in self.cycles
            ],
        }


def cycle_growth_rate(
    bundle: SymbolicBundle, tol: float = 1e-12, max_iterations: int = 100_000
) -> CycleRates:
    """Exponential word-growth rate (nats/step) per theta-cycle and integrated.

    For a cycle of length ``L`` through ``omega`` the rate is
    ``(1/L) * ln(spectral radius of A(omega) ... A(theta^{L-1} omega))``; the
    integrated rate weights each cycle by its total probability mass.
    """
    cycles = []
    integrated = 0.0
    for cyc in bundle.base.cycles():
        prod = np.eye(bundle.alphabet_size)
        for w in cyc:
            prod = prod @ bundle.adjacency[w].astype(float)
        rho = spectral_radius(prod, tol=tol, max_iterations=max_iterations)
        rate = math.log(rho) / len(cyc) if rho > 0 else -math.inf
        mass = float(sum(bundle.base.weights[w] for w in cyc))
        cycles.append(CycleRate(omegas=cyc, rate=rate, mass=mass))
        integrated += mass * rate
    return CycleRates(cycles=tuple(cycles), integrated=integrated)

"""Exact invariant measures on SFTs and their entropy/integral/support arithmetic.

Three measure kinds cover everything the witness constructions need:
memory-1 Markov measures (including the maximal-entropy one), periodic-orbit
measures, and finite convex mixtures.  Entropy is affine over mixtures and
integrals are linear, so every derived fact is closed-form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import rng
from .errors import NotAdmissible, NotPrimitive, RangeMismatch
from .shifts import (ShiftSpace, Word, is_admissible, is_cyclically_admissible,
                     iter_words, perron_pair, primitive_cycles,
                     strongly_connected_components)

STATIONARY_TOL = 1e-13
VALIDATION_TOL = 1e-12


@dataclass(frozen=True)
class Potential:
    """Locally constant observable of finite range r, keyed by r-words."""

    range: int
    table: dict[Word, float] = field(compare=False)

    def __post_init__(self):
        if self.range < 1:
            raise ValueError("range >= 1 required")

    def value(self, w: Sequence[int]) -> float:
        key = tuple(w[:self.range])
        try:
            return self.table[key]
        except KeyError:
            raise RangeMismatch(f"word {key} missing from potential table")

    def max_abs(self) -> float:
        return max(abs(v) for v in self.table.values())


def validate_potential(s: ShiftSpace, phi: Potential) -> None:
    """Check the table covers exactly the admissible range-words of s."""
    expected = set(iter_words(s, phi.range))
    got = set(phi.table)
    if got != expected:
        missing = sorted(expected - got)[:3]
        extra = sorted(got - expected)[:3]
        raise RangeMismatch(
            f"potential table mismatch for range {phi.range}: "
            f"missing {missing}, extraneous {extra}")


def indicator_potential(s: ShiftSpace, word: Sequence[int]) -> Potential:
    """1 on the cylinder of `word`, 0 elsewhere; range = len(word)."""
    w = tuple(word)
    if not is_admissible(w, s):
        raise NotAdmissible("indicator word must be admissible")
    table = {u: (1.0 if u == w else 0.0) for u in iter_words(s, len(w))}
    return Potential(range=len(w), table=table)


def constant_potential(s: ShiftSpace, c: float, r: int = 1) -> Potential:
    return Potential(range=r, table={u: float(c) for u in iter_words(s, r)})


@dataclass(frozen=True)
class SupportGraph:
    """Symbols and edges carrying positive probability."""

    symbols: frozenset[int]
    edges: frozenset[tuple[int, int]]

    def union(self, other: "SupportGraph") -> "SupportGraph":
        return SupportGraph(self.symbols | other.symbols, self.edges | other.edges)

    def is_full(self, s: ShiftSpace) -> bool:
        return self.edges == frozenset((i, j) for i in range(s.k)
                                       for j in range(s.k) if s.matrix[i][j])


@dataclass(frozen=True)
class MarkovMeasure:
    """Stationary Markov chain compatible with the ambient transition matrix."""

    shift: ShiftSpace
    P: tuple[tuple[float, ...], ...]
    pi: tuple[float, ...]

    def p_array(self) -> np.ndarray:
        return np.array(self.P)

    def pi_array(self) -> np.ndarray:
        return np.array(self.pi)


@dataclass(frozen=True)
class PeriodicMeasure:
    """Uniform measure on a periodic orbit, given by one admissible cycle."""

    shift: ShiftSpace
    cycle: Word


@dataclass(frozen=True)
class Mixture:
    """Finite convex combination of invariant measures."""

    weights: tuple[float, ...]
    components: tuple["InvariantMeasure", ...]


InvariantMeasure = Union[MarkovMeasure, PeriodicMeasure, Mixture]


def _stationary_by_power(p: np.ndarray) -> np.ndarray:
    k = p.shape[0]
    pt = p.T.copy()
    v = np.full(k, 1.0 / k)
    for _ in range(500000):
        w = pt @ v
        w /= w.sum()
        if np.max(np.abs(w - v)) < STATIONARY_TOL:
            return w
        v = w
    return v


def markov_measure(s: ShiftSpace, p: Sequence[Sequence[float]],
                   pi: Optional[Sequence[float]] = None) -> MarkovMeasure:
    """Validated Markov measure; pi solved by power iteration when omitted."""
    arr = np.array(p, dtype=float)
    if arr.shape != (s.k, s.k):
        raise ValueError(f"P must be {s.k}x{s.k}")
    for i in range(s.k):
        if abs(arr[i].sum() - 1.0) > VALIDATION_TOL:
            raise ValueError(f"row {i} of P sums to {arr[i].sum()}, not 1")
        for j in range(s.k):
            if arr[i, j] > 0 and not s.matrix[i][j]:
                raise ValueError(f"P[{i}][{j}] > 0 on a forbidden transition")
            if arr[i, j] < 0:
                raise ValueError("negative transition probability")
    stat = np.array(pi, dtype=float) if pi is not None else _stationary_by_power(arr)
    if abs(stat.sum() - 1.0) > VALIDATION_TOL:
        raise ValueError("pi must sum to 1")
    if np.max(np.abs(stat @ arr - stat)) > 1e-10:
        raise ValueError("pi is not stationary for P")
    return MarkovMeasure(shift=s, P=tuple(tuple(float(x) for x in row) for row in arr),
                         pi=tuple(float(x) for x in stat))


def periodic_measure(s: ShiftSpace, cycle: Sequence[int]) -> PeriodicMeasure:
    w = tuple(cycle)
    if not is_cyclically_admissible(w, s):
        raise NotAdmissible(f"cycle {w} is not cyclically admissible")
    return PeriodicMeasure(shift=s, cycle=w)


def mixture(weights: Sequence[float], components: Sequence[InvariantMeasure]) -> Mixture:
    w = tuple(float(x) for x in weights)
    if len(w) != len(components) or len(w) == 0:
        raise ValueError("weights and components must align and be nonempty")
    if any(x <= 0 for x in w):
        raise ValueError("weights must be positive")
    if abs(sum(w) - 1.0) > VALIDATION_TOL:
        raise ValueError(f"weights sum to {sum(w)}, not 1")
    return Mixture(weights=w, components=tuple(components))


def parry_measure(s: ShiftSpace) -> MarkovMeasure:
    """The maximal-entropy Markov measure: P_ij = A_ij v_j / (lambda v_i)."""
    if not s.is_primitive:
        raise NotPrimitive("maximal-entropy measure needs a primitive matrix")
    lam, right, left = perron_pair(s)
    a = s.matrix_array()
    p = np.zeros((s.k, s.k))
    for i in range(s.k):
        for j in range(s.k):
            if a[i, j]:
                p[i, j] = right[j] / (lam * right[i])
        p[i] /= p[i].sum()  # scrub rounding so rows sum to 1 exactly
    uv = left * right
    pi = uv / uv.sum()
    return markov_measure(s, p, pi)


def entropy(m: InvariantMeasure) -> float:
    """Metric entropy; affine over mixtures, zero on periodic orbits."""
    if isinstance(m, MarkovMeasure):
        total = 0.0
        for i in range(m.shift.k):
            for j in range(m.shift.k):
                pij = m.P[i][j]
                if pij > 0:
                    total -= m.pi[i] * pij * math.log(pij)
        return total
    if isinstance(m, PeriodicMeasure):
        return 0.0
    return sum(w * entropy(c) for w, c in zip(m.weights, m.components))


def markov_word_probability(m: MarkovMeasure, w: Word) -> float:
    """Stationary probability of the cylinder [w] under (pi, P)."""
    p = m.pi[w[0]]
    for a, b in zip(w, w[1:]):
        p *= m.P[a][b]
    return p


def integrate(m: InvariantMeasure, phi: Potential) -> float:
    """Expectation of phi; linear over mixtures."""
    if isinstance(m, MarkovMeasure):
        total = 0.0
        for w, v in phi.table.items():
            if v != 0.0:
                if any(not 0 <= c < m.shift.k for c in w):
                    raise RangeMismatch(f"table word {w} outside alphabet of size {m.shift.k}")
                total += markov_word_probability(m, w) * v
        return total
    if isinstance(m, PeriodicMeasure):
        cyc = m.cycle
        p = len(cyc)
        ext = cyc * (phi.range // p + 2)
        return sum(phi.value(ext[i:i + phi.range]) for i in range(p)) / p
    return sum(w * integrate(c, phi) for w, c in zip(m.weights, m.components))


def support(m: InvariantMeasure) -> SupportGraph:
    """Symbols/edges of positive probability; union over mixtures."""
    if isinstance(m, MarkovMeasure):
        symbols = frozenset(i for i in range(m.shift.k) if m.pi[i] > 0)
        edges = frozenset((i, j) for i in symbols for j in range(m.shift.k)
                          if m.pi[i] * m.P[i][j] > 0)
        return SupportGraph(symbols, edges)
    if isinstance(m, PeriodicMeasure):
        cyc = m.cycle
        edges = frozenset((cyc[i], cyc[(i + 1) % len(cyc)]) for i in range(len(cyc)))
        return SupportGraph(frozenset(cyc), edges)
    out = support(m.components[0])
    for c in m.components[1:]:
        out = out.union(support(c))
    return out


def support_pieces(m: InvariantMeasure) -> list[SupportGraph]:
    """Supports of the ergodic components, kept separate.

    A union of strongly connected pieces can fill the whole edge set while
    the corresponding closed invariant set stays proper, so properness and
    disjointness questions are answered on pieces, never on the union.
    """
    if isinstance(m, Mixture):
        pieces = []
        for c in m.components:
            pieces.extend(support_pieces(c))
        uniq = []
        for p in pieces:
            if p not in uniq:
                uniq.append(p)
        return uniq
    return [support(m)]


def has_full_support(m: InvariantMeasure, s: ShiftSpace) -> bool:
    """Whether the closed support is the whole shift.

    A periodic orbit is always a proper subset (the ambient is infinite),
    even when its cycle happens to traverse every edge.  A Markov component
    fills the shift exactly when every allowed edge carries probability.
    For a mixing ambient a finite union of proper closed invariant pieces
    stays proper, so a mixture is full iff some component is.
    """
    if isinstance(m, PeriodicMeasure):
        return False
    if isinstance(m, MarkovMeasure):
        return support(m).is_full(s)
    return any(has_full_support(c, s) for c in m.components)


def supports_disjoint(m1: InvariantMeasure, m2: InvariantMeasure) -> bool:
    """Edge-disjointness of supports; implies the subshifts share no point."""
    e1 = support(m1).edges
    e2 = support(m2).edges
    return not (e1 & e2)


def piece_is_single_orbit(p: SupportGraph) -> bool:
    """True when the piece is one cycle, i.e. a minimal finite subshift."""
    outdeg: dict[int, int] = {}
    for i, _ in p.edges:
        outdeg[i] = outdeg.get(i, 0) + 1
    return all(outdeg.get(i, 0) == 1 for i in p.symbols)


def is_ergodic(m: InvariantMeasure) -> bool:
    """Markov: support strongly connected.  Mixtures of distinct parts: no."""
    if isinstance(m, PeriodicMeasure):
        return True
    if isinstance(m, MarkovMeasure):
        g = support(m)
        nodes = sorted(g.symbols)
        mat = [[1 if (i, j) in g.edges else 0 for j in nodes] for i in nodes]
        comps = strongly_connected_components(mat)
        return len(comps) == 1
    if len(m.components) == 1:
        return is_ergodic(m.components[0])
    return False


def periodic_measures_in_cylinder(s: ShiftSpace, w: Sequence[int], bound: int) -> list[PeriodicMeasure]:
    """Every periodic orbit of period <= bound whose orbit meets [w]."""
    word = tuple(w)
    if not is_admissible(word, s):
        raise NotAdmissible(f"cylinder word {word} is not admissible")
    if bound < len(word):
        raise ValueError("bound must be >= len(w)")
    out = []
    for cyc in primitive_cycles(s, bound):
        p = len(cyc)
        reps = cyc * (len(word) // p + 2)
        if any(reps[off:off + len(word)] == word for off in range(p)):
            out.append(PeriodicMeasure(shift=s, cycle=cyc))
    return out


def sample_typical_word(m: InvariantMeasure, n: int, seed: int,
                        start: Optional[int] = None) -> Word:
    """Deterministic n-word typical for the measure.

    Markov chains draw the start symbol from pi (unless fixed) and walk the
    rows of P; periodic measures repeat their cycle.  All randomness comes
    from the documented splitmix64 stream for `seed`.
    """
    if isinstance(m, PeriodicMeasure):
        cyc = m.cycle
        reps = cyc * (n // len(cyc) + 1)
        return tuple(reps[:n])
    if isinstance(m, Mixture):
        raise ValueError("mixtures are realized by scheduling, not direct sampling")
    if n < 1:
        raise ValueError("n >= 1 required")
    us = rng.uniform_stream(seed, n)
    k = m.shift.k
    cum_rows = []
    for i in range(k):
        acc = 0.0
        row = []
        for j in range(k):
            acc += m.P[i][j]
            row.append(acc)
        row[-1] = 1.0 + 1e-15
        cum_rows.append(row)
    if start is None:
        acc = 0.0
        u = float(us[0])
        state = k - 1
        for i in range(k):
            acc += m.pi[i]
            if u < acc:
                state = i
                break
    else:
        state = start
    word = [state]
    for t in range(1, n):
        u = float(us[t])
        row = cum_rows[state]
        for j in range(k):
            if u < row[j]:
                state = j
                break
        word.append(state)
    return tuple(word)

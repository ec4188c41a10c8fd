"""Beta-shifts: digit expansion of 1, lexicographic admissibility, counting.

For non-integer beta > 1 the expansion of 1 is computed greedily with the
remainder recurrence r_1 = beta, a_m = floor(r_m), r_{m+1} = beta*(r_m - a_m),
algebraically the same as a_n = floor(beta^n - sum a_i beta^(n-i)) but without
the catastrophic cancellation.  A word w is admissible iff every suffix is
lexicographically <= the normalized digit stream.

When the greedy expansion terminates (a_1..a_m followed by zeros) the literal
stream would accept words the entropy count rules out — e.g. for the golden
ratio it would admit 11 — so the terminating stream is replaced by the
quasi-greedy periodic stream (a_1..a_{m-1}(a_m - 1)) repeated.  A raw mode
keeps the literal stream for side-by-side comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import mpmath as mp

from .errors import IntegerBeta, PeriodNotDetected, SymbolOutOfRange, ValidityExceeded

#: working precision (bits) for the remainder recurrence
DIGIT_PRECISION_BITS = 256
#: default number of digits computed before giving up on period/termination
DEFAULT_HORIZON = 512
#: a beta within this distance of an integer is treated as that integer
INTEGER_SNAP = mp.mpf("1e-30")
#: a remainder this close to an integer is read as that integer before
#: flooring; decimal literals with >= 30 digits keep the drift far smaller
DIGIT_SNAP_EPS = mp.mpf("1e-25")

BetaLike = Union[str, float, int, "mp.mpf"]


@dataclass(frozen=True)
class BetaShiftSpec:
    """Normalized presentation of a beta-shift.

    digits are stored as (preperiod, period); period == () means the stream
    is a finite-precision truncation only trusted up to validity_length.
    For integer beta the space is the full shift on `alphabet` symbols and
    the dominating stream is (beta-1) repeated.
    """

    beta: float
    alphabet: int
    preperiod: tuple[int, ...]
    period: tuple[int, ...]
    is_integer: bool
    validity_length: int
    raw: bool = False

    def digit(self, i: int) -> int:
        """1-indexed digit of the stream; raises beyond validity."""
        if i < 1:
            raise ValueError("digits are 1-indexed")
        if i <= len(self.preperiod):
            return self.preperiod[i - 1]
        if self.period:
            return self.period[(i - len(self.preperiod) - 1) % len(self.period)]
        raise ValidityExceeded(f"digit {i} beyond validity length {self.validity_length}")

    def digits_prefix(self, n: int) -> tuple[int, ...]:
        if n > self.validity_length:
            raise ValidityExceeded(f"{n} > validity length {self.validity_length}")
        return tuple(self.digit(i) for i in range(1, n + 1))


def _to_mpf(beta: BetaLike) -> mp.mpf:
    if isinstance(beta, float):
        # decimal literals arriving as floats keep their shortest repr
        return mp.mpf(repr(beta))
    return mp.mpf(beta)


def _near_integer(b: mp.mpf) -> Optional[int]:
    nearest = int(mp.nint(b))
    if abs(b - nearest) < INTEGER_SNAP:
        return nearest
    return None


def beta_expansion_of_one(beta: BetaLike, n: int) -> tuple[int, ...]:
    """First n greedy digits of the expansion of 1 in powers of 1/beta."""
    if n < 1:
        raise ValueError("n >= 1 required")
    with mp.workprec(DIGIT_PRECISION_BITS):
        b = _to_mpf(beta)
        if b <= 1:
            raise ValueError("beta > 1 required")
        if _near_integer(b) is not None:
            raise IntegerBeta(f"beta = {b} is an integer; use the full-shift path")
        digits = []
        r = b
        for _ in range(n):
            a = int(mp.floor(r + DIGIT_SNAP_EPS))
            digits.append(a)
            r = b * (r - a)
            if r < 0:
                r = mp.mpf(0)
    return tuple(digits)


def _expand_with_status(b: mp.mpf, horizon: int) -> tuple[list[int], str, int]:
    """Greedy digits until termination, exact remainder repetition, or horizon.

    Returns (digits, status, aux) where status is one of "terminated"
    (aux = index of last nonzero digit), "periodic" (aux = preperiod length;
    digits holds preperiod + one full period), or "truncated" (aux = horizon).
    """
    digits: list[int] = []
    seen: dict = {}
    r = b
    for m in range(1, horizon + 1):
        if r in seen:
            return digits, "periodic", seen[r]
        seen[r] = m - 1
        a = int(mp.floor(r + DIGIT_SNAP_EPS))
        digits.append(a)
        r = b * (r - a)
        if abs(r) < DIGIT_SNAP_EPS:
            return digits, "terminated", m
    return digits, "truncated", horizon


def quasi_greedy_normalize(beta: BetaLike, horizon: int = DEFAULT_HORIZON,
                           raw: bool = False) -> BetaShiftSpec:
    """Digit stream of the expansion of 1, normalized to be self-dominating.

    Terminating expansions a_1..a_m are rewritten to the periodic stream
    (a_1..a_{m-1}(a_m - 1)) repeated, unless raw=True, which keeps the
    literal a_1..a_m followed by zeros.  Streams with no detected period or
    termination within the horizon come back as truncations whose
    validity_length bounds every later query.
    """
    with mp.workprec(DIGIT_PRECISION_BITS):
        b = _to_mpf(beta)
        if b <= 1:
            raise ValueError("beta > 1 required")
        snapped = _near_integer(b)
        if snapped is not None:
            if snapped < 2:
                raise ValueError("integer beta must be >= 2")
            return BetaShiftSpec(beta=float(snapped), alphabet=snapped,
                                 preperiod=(), period=(snapped - 1,),
                                 is_integer=True, validity_length=1 << 62, raw=raw)
        digits, status, aux = _expand_with_status(b, horizon)
        beta_f = float(b)
        alphabet = digits[0] + 1  # a_1 = floor(beta), symbols 0..floor(beta)

    if status == "terminated":
        body = digits[:aux]
        if raw:
            spec = BetaShiftSpec(beta=beta_f, alphabet=alphabet,
                                 preperiod=tuple(body), period=(0,),
                                 is_integer=False, validity_length=1 << 62, raw=True)
            return spec
        if len(body) == 1:
            # 1 = a_1/beta with a_1 = beta would make beta an integer
            raise PeriodNotDetected("terminating expansion of length 1")
        quasi = tuple(body[:-1]) + (body[-1] - 1,)
        spec = BetaShiftSpec(beta=beta_f, alphabet=alphabet,
                             preperiod=(), period=quasi,
                             is_integer=False, validity_length=1 << 62)
    elif status == "periodic":
        pre = tuple(digits[:aux])
        per = tuple(digits[aux:])
        spec = BetaShiftSpec(beta=beta_f, alphabet=alphabet,
                             preperiod=pre, period=per,
                             is_integer=False, validity_length=1 << 62, raw=raw)
    else:
        # representation error of beta grows by a factor beta per step, so
        # digits are only trustworthy while beta^m * 2^-prec stays small
        drift_limit = int(0.75 * DIGIT_PRECISION_BITS * math.log(2) / math.log(beta_f))
        validity = min(horizon, max(drift_limit, 1))
        spec = BetaShiftSpec(beta=beta_f, alphabet=alphabet,
                             preperiod=tuple(digits[:validity]), period=(),
                             is_integer=False, validity_length=validity, raw=raw)

    _check_self_maximal(spec)
    return spec


def _check_self_maximal(spec: BetaShiftSpec) -> None:
    """Verify sigma^n(a) <= a for n up to one full cycle of the presentation."""
    span = len(spec.preperiod) + max(len(spec.period), 1)
    limit = min(2 * span, spec.validity_length)
    ref = spec.digits_prefix(limit)
    for shift in range(1, span):
        if shift + 1 > limit:
            break
        tail = ref[shift:]
        head = ref[:len(tail)]
        if tail > head:
            raise PeriodNotDetected(
                f"stream is not self-dominating at shift {shift}; not a valid presentation")


def beta_admissible(w: Sequence[int], spec: BetaShiftSpec) -> bool:
    """True iff every suffix of w is lexicographically <= the digit stream."""
    for c in w:
        if not 0 <= c < spec.alphabet:
            raise SymbolOutOfRange(f"symbol {c} outside alphabet of size {spec.alphabet}")
    n = len(w)
    if n > spec.validity_length:
        raise ValidityExceeded(f"word length {n} > validity {spec.validity_length}")
    if n == 0:
        return True
    ref = spec.digits_prefix(n)
    for start in range(n):
        suffix = w[start:]
        if tuple(suffix) > ref[:n - start]:
            return False
    return True


def _prefix_function(ref: Sequence[int]) -> list[int]:
    """KMP prefix function of ref (1-indexed semantics, pi[0] unused)."""
    n = len(ref)
    pi = [0] * (n + 1)
    k = 0
    for i in range(2, n + 1):
        while k > 0 and ref[i - 1] != ref[k]:
            k = pi[k]
        if ref[i - 1] == ref[k]:
            k += 1
        pi[i] = k
    return pi


def beta_count_words(spec: BetaShiftSpec, n: int) -> int:
    """Exact number of admissible n-words, by match-length automaton DP.

    State = length of the longest suffix of the word read so far that equals
    a prefix of the digit stream.  Self-domination of the stream makes the
    longest match the binding constraint, so transitions are: symbol equal
    to the next digit extends the match, a smaller symbol falls back through
    the KMP prefix chain, a larger symbol is inadmissible.
    """
    if n < 1:
        raise ValueError("n >= 1 required")
    if n > spec.validity_length:
        raise ValidityExceeded(f"n={n} > validity {spec.validity_length}")
    ref = spec.digits_prefix(n)
    pi = _prefix_function(ref)

    def fallback(state: int, c: int) -> Optional[int]:
        k = state
        while k > 0 and ref[k] != c:
            k = pi[k]
        if ref[k] == c:
            return k + 1
        return None if c > ref[0] else 0

    counts = {0: 1}
    for _ in range(n):
        nxt: dict[int, int] = {}
        for state, mult in counts.items():
            d = ref[state]
            for c in range(spec.alphabet):
                if c > d:
                    break
                if c == d:
                    t = state + 1
                else:
                    t = fallback(state, c)
                    if t is None:
                        continue
                if t is not None:
                    nxt[t] = nxt.get(t, 0) + mult
        counts = nxt
    return sum(counts.values())


def brute_beta_count_words(spec: BetaShiftSpec, n: int) -> int:
    """Direct enumeration with suffix comparisons; cross-check for small n."""
    if n > 14:
        from .errors import BoundExceeded
        raise BoundExceeded("direct beta enumeration capped at n = 14")
    total = 0
    stack: list[tuple[int, ...]] = [()]
    while stack:
        w = stack.pop()
        if len(w) == n:
            total += 1
            continue
        for c in range(spec.alphabet):
            cand = w + (c,)
            if beta_admissible(cand, spec):
                stack.append(cand)
    return total


def beta_entropy_estimate(spec: BetaShiftSpec, n: int) -> float:
    """(1/n) log of the n-word count; decreases toward log beta."""
    return math.log(beta_count_words(spec, n)) / n

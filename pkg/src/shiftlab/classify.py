"""Finite-prefix recurrence and regularity evidence.

Everything here measures a single symbol stream: visit times to cylinders,
windowed lower/upper density estimates, running Birkhoff averages, sliding
empirical word frequencies.  None of it claims asymptotic class membership;
it scores the stream against thresholds a witness certificate declares.

Density estimators are cumulative ratios |visits ∩ [0,n)| / n scanned over
32 geometric checkpoints n in [N/2, N]; the min is the lower estimate and
the max the upper.  These are the stable finite-horizon proxies for
liminf/limsup visit frequencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import TooShort
from .measures import Potential
from .shifts import ShiftSpace, Word, iter_words

DENSITY_CHECKPOINTS = 32
DEFAULT_LADDER = (1, 2, 4, 8, 12)
DEFAULT_TRACE_CHECKPOINTS = 128


@dataclass
class ClassifyConfig:
    ladder: tuple[int, ...] = DEFAULT_LADDER
    horizon: Optional[int] = None
    trace_checkpoints: int = DEFAULT_TRACE_CHECKPOINTS


@dataclass
class VisitStatistics:
    cylinder_len: int
    target: Word
    visit_times: np.ndarray
    lower_density_est: float
    upper_density_est: float
    max_gap: int
    horizon: int


@dataclass
class RecurrenceReport:
    horizon: int
    ladder_stats: dict[int, VisitStatistics]
    trace: list[tuple[int, float]]
    oscillation: tuple[float, float]
    cylinder_coverage: dict[int, float]
    verdicts: list[dict]

    @property
    def all_pass(self) -> bool:
        return all(v["passed"] for v in self.verdicts)


def _as_array(x) -> np.ndarray:
    if isinstance(x, np.ndarray):
        return x.astype(np.int64, copy=False)
    return np.array(x, dtype=np.int64)


def window_codes(x: np.ndarray, ell: int, k: int) -> np.ndarray:
    """Integer code of every length-ell window, big-endian in the symbols."""
    n = len(x) - ell + 1
    if n <= 0:
        raise TooShort(f"stream of length {len(x)} has no {ell}-windows")
    codes = np.zeros(n, dtype=np.int64)
    for j in range(ell):
        codes = codes * k + x[j:j + n]
    return codes


def word_code(w: Sequence[int], k: int) -> int:
    c = 0
    for sym in w:
        c = c * k + sym
    return c


def find_visits(x: np.ndarray, target: Sequence[int], k: int,
                horizon: Optional[int] = None) -> np.ndarray:
    """Times n >= 1 with x_n..x_{n+|target|-1} == target, up to the horizon."""
    ell = len(target)
    n_max = (horizon if horizon is not None else len(x) - ell)
    if n_max > len(x) - ell:
        raise TooShort(f"horizon {n_max} needs stream length >= {n_max + ell}")
    codes = window_codes(x[:n_max + ell], ell, k)
    hits = np.nonzero(codes == word_code(target, k))[0]
    return hits[hits >= 1]


def density_checkpoints(n_max: int, count: int = DENSITY_CHECKPOINTS) -> np.ndarray:
    """Geometric grid of `count` checkpoints spanning [n_max/2, n_max]."""
    lo = max(1, n_max // 2)
    pts = np.unique(np.round(np.geomspace(lo, n_max, count)).astype(np.int64))
    return pts


def windowed_density(visits: np.ndarray, n_max: int) -> tuple[float, float]:
    """(lower, upper) cumulative-ratio estimates over the checkpoint grid."""
    pts = density_checkpoints(n_max)
    counts = np.searchsorted(visits, pts, side="left")
    ratios = counts / pts
    return float(ratios.min()), float(ratios.max())


def visit_statistics(x, ell: int, n_max: Optional[int] = None,
                     target: Optional[Sequence[int]] = None,
                     k: Optional[int] = None) -> VisitStatistics:
    """Visit set of the length-ell self-cylinder (or a given target word).

    max_gap is the largest difference of consecutive visit times, with the
    horizon standing in when fewer than two visits exist.
    """
    arr = _as_array(x)
    if k is None:
        k = int(arr.max()) + 1 if len(arr) else 1
    if n_max is None:
        n_max = len(arr) - ell
    if n_max > len(arr) - ell or n_max < 1:
        raise TooShort(f"need length >= {n_max + ell}, have {len(arr)}")
    tgt = tuple(target) if target is not None else tuple(int(c) for c in arr[:ell])
    visits = find_visits(arr, tgt, k, horizon=n_max)
    lower, upper = windowed_density(visits, n_max)
    if len(visits) >= 2:
        gaps = np.diff(visits)
        max_gap = int(gaps.max())
        if tgt == tuple(int(c) for c in arr[:ell]):
            max_gap = max(max_gap, int(visits[0]))
    elif len(visits) == 1:
        max_gap = int(max(visits[0], n_max - visits[0]))
    else:
        max_gap = n_max
    return VisitStatistics(cylinder_len=ell, target=tgt, visit_times=visits,
                           lower_density_est=lower, upper_density_est=upper,
                           max_gap=max_gap, horizon=n_max)


def birkhoff_trace(x, phi: Potential, checkpoints: Sequence[int],
                   k: Optional[int] = None) -> list[tuple[int, float]]:
    """Exact running averages (1/n) sum phi(window_i) at each checkpoint."""
    arr = _as_array(x)
    if k is None:
        k_data = int(arr.max()) + 1 if len(arr) else 1
        k_phi = 1 + max((max(w) for w in phi.table if w), default=0)
        k = max(k_data, k_phi)
    need = max(checkpoints) + phi.range
    if len(arr) < need:
        raise TooShort(f"need length >= {need}, have {len(arr)}")
    r = phi.range
    codes = window_codes(arr, r, k)
    table = np.zeros(k ** r)
    for w, v in phi.table.items():
        table[word_code(w, k)] = v
    values = table[codes]
    sums = np.cumsum(values)
    return [(int(n), float(sums[n - 1] / n)) for n in checkpoints]


def default_trace_checkpoints(n_max: int, count: int = DEFAULT_TRACE_CHECKPOINTS) -> list[int]:
    pts = np.unique(np.round(np.geomspace(16, n_max, count)).astype(np.int64))
    return [int(p) for p in pts if p >= 1]


def trace_oscillation(trace: list[tuple[int, float]], window: float = 0.5) -> tuple[float, float]:
    """(min, max) of the running average over checkpoints n >= window * N."""
    n_max = trace[-1][0]
    tail = [v for n, v in trace if n >= window * n_max]
    return (min(tail), max(tail))


def empirical_measure(x, ell: int, n_max: Optional[int] = None,
                      k: Optional[int] = None) -> dict[Word, float]:
    """Sliding-window frequency of every length-ell word in x_0..x_{n_max+ell-1}."""
    arr = _as_array(x)
    if k is None:
        k = int(arr.max()) + 1 if len(arr) else 1
    if n_max is None:
        n_max = len(arr) - ell + 1
    if n_max < 1 or n_max > len(arr) - ell + 1:
        raise TooShort(f"need length >= {n_max + ell - 1}, have {len(arr)}")
    codes = window_codes(arr[:n_max + ell - 1], ell, k)
    counts = np.bincount(codes, minlength=k ** ell)
    total = counts.sum()
    out: dict[Word, float] = {}
    for code in np.nonzero(counts)[0]:
        w = []
        c = int(code)
        for _ in range(ell):
            w.append(c % k)
            c //= k
        out[tuple(reversed(w))] = counts[code] / total
    return out


def coverage(x, s: ShiftSpace, ell: int, expected_freq: Optional[dict[Word, float]] = None,
             min_raw_visits: int = 8) -> tuple[float, dict[Word, int]]:
    """Fraction of admissible ell-words visited 'positively', plus raw counts.

    Positive means frequency >= 1/(4 * expected count) under the declared
    full-support measure when given, else >= min_raw_visits raw occurrences.
    """
    arr = _as_array(x)
    emp = empirical_measure(arr, ell, k=s.k)
    n_windows = len(arr) - ell + 1
    admissible = list(iter_words(s, ell))
    hits = 0
    raw: dict[Word, int] = {}
    for w in admissible:
        count = int(round(emp.get(w, 0.0) * n_windows))
        raw[w] = count
        p_w = expected_freq.get(w, 0.0) if expected_freq else 0.0
        needed = math.ceil(1.0 / (4.0 * p_w)) if p_w > 0 else min_raw_visits
        if count >= needed:
            hits += 1
    return hits / len(admissible), raw


# ---------------------------------------------------------------------------
# verdict evaluation against certificate expected_statistics


def _eval_check(check: dict, x: np.ndarray, s: ShiftSpace, phi: Optional[Potential],
                trace: list[tuple[int, float]], n_max: int) -> dict:
    """One expected_statistics entry -> verdict record (pure data)."""
    kind = check["check"]
    out = {"check": kind, "params": {k: v for k, v in check.items() if k != "check"}}

    if kind == "full_horizon_present":
        need = int(check["horizon"])
        out["measured"] = len(x)
        out["passed"] = len(x) >= need

    elif kind == "trace_attains":
        lo_n = check.get("window", 0.5) * trace[-1][0]
        tail = [v for n, v in trace if n >= lo_n]
        tol = check["tol"]
        out["measured"] = [min(abs(v - t) for v in tail) for t in check["targets"]]
        out["passed"] = all(m <= tol for m in out["measured"])

    elif kind == "trace_converges":
        lo_n = (1.0 - check.get("window", 0.25)) * trace[-1][0]
        tail = [v for n, v in trace if n >= lo_n]
        osc = max(tail) - min(tail)
        err = abs(tail[-1] - check["target"])
        out["measured"] = {"oscillation": osc, "final_error": err}
        out["passed"] = osc <= check["osc_tol"] and err <= check["tol"]

    elif kind == "trace_oscillation":
        lo, hi = trace_oscillation(trace, window=check.get("window", 0.5))
        out["measured"] = hi - lo
        out["passed"] = (hi - lo) >= check["min_gap"]

    elif kind == "cylinder_lower_min":
        worst = None
        for ell in check["lengths"]:
            for w in iter_words(s, ell):
                st = visit_statistics(x, ell, n_max=n_max, target=w, k=s.k)
                if worst is None or st.lower_density_est < worst:
                    worst = st.lower_density_est
        out["measured"] = worst
        out["passed"] = worst >= check["threshold"]

    elif kind == "self_lower_max":
        st = visit_statistics(x, check["length"], n_max=n_max, k=s.k)
        out["measured"] = st.lower_density_est
        out["passed"] = st.lower_density_est <= check["max"]

    elif kind == "self_upper_min":
        st = visit_statistics(x, check["length"], n_max=n_max, k=s.k)
        out["measured"] = st.upper_density_est
        out["passed"] = st.upper_density_est >= check["min"]

    elif kind == "self_upper_decreasing":
        uppers = []
        for ell in check["lengths"]:
            st = visit_statistics(x, ell, n_max=n_max, k=s.k)
            uppers.append(st.upper_density_est)
        strict = all(a > b for a, b in zip(uppers, uppers[1:]))
        out["measured"] = uppers
        out["passed"] = strict and uppers[-1] <= check["final_max"]

    elif kind == "coverage_counts":
        _, raw = coverage(x, s, check["length"])
        worst = min(raw.values())
        out["measured"] = worst
        out["passed"] = worst >= check["min_visits"]

    elif kind == "coverage_fraction_of_expected":
        expected = {tuple(w): f for w, f in check["expected"]}
        emp = empirical_measure(x, check["length"], k=s.k)
        ratios = [emp.get(w, 0.0) / f for w, f in expected.items() if f > 0]
        out["measured"] = min(ratios) if ratios else 0.0
        out["passed"] = bool(ratios) and min(ratios) >= check["fraction"]

    elif kind == "max_gap_bounded":
        gaps = {}
        ok = True
        for ell, bound in check["bounds"]:
            st = visit_statistics(x, int(ell), n_max=n_max, k=s.k)
            gaps[int(ell)] = st.max_gap
            ok = ok and st.max_gap <= bound
        out["measured"] = gaps
        out["passed"] = ok

    elif kind == "not_eventually_periodic":
        out["passed"] = not _eventually_periodic(x, check.get("max_period", 1024))
        out["measured"] = out["passed"]

    elif kind == "periodic_density_exact":
        # visit times start at 1, so cumulative self-visit ratios run up to
        # 1/n below the exact rational; allow that on top of the p/horizon grain
        p = int(check["period"])
        ok = True
        measured = {}
        for ell in range(1, p + 1):
            st = visit_statistics(x, ell, n_max=n_max, k=s.k)
            measured[ell] = (st.lower_density_est, st.upper_density_est)
            tol = 3.0 * p / st.horizon
            ok = ok and abs(st.lower_density_est - 1.0 / p) <= tol
            ok = ok and abs(st.upper_density_est - 1.0 / p) <= tol
        out["measured"] = measured
        out["passed"] = ok

    else:
        out["measured"] = None
        out["passed"] = False
        out["error"] = f"unknown check kind {kind}"
    return out


def _eventually_periodic(x: np.ndarray, max_period: int) -> bool:
    """Is some period p <= max_period locked in over the second half?"""
    n = len(x)
    half = n // 2
    for p in range(1, min(max_period, half // 2) + 1):
        if np.array_equal(x[half:n - p], x[half + p:n]):
            return True
    return False


def evaluate_certificate(x, s: ShiftSpace, expected_statistics: list[dict],
                         phi: Optional[Potential] = None,
                         config: Optional[ClassifyConfig] = None) -> RecurrenceReport:
    """Score a stream against its certificate's expected statistics.

    Failures are verdicts, never exceptions: the report is pure data.
    """
    cfg = config or ClassifyConfig()
    arr = _as_array(x)
    max_ell = max(cfg.ladder)
    n_max = cfg.horizon if cfg.horizon is not None else len(arr) - max_ell
    n_max = min(n_max, len(arr) - max_ell)
    if n_max < 16:
        raise TooShort("stream too short for any evidence")

    ladder_stats = {}
    for ell in cfg.ladder:
        ladder_stats[ell] = visit_statistics(arr, ell, n_max=n_max, k=s.k)

    if phi is not None:
        cps = default_trace_checkpoints(min(len(arr) - phi.range, n_max + max_ell))
        trace = birkhoff_trace(arr, phi, cps, k=s.k)
        osc = trace_oscillation(trace)
    else:
        trace = []
        osc = (0.0, 0.0)

    cov = {}
    for ell in (ell for ell in cfg.ladder if ell <= 4):
        frac, _ = coverage(arr, s, ell)
        cov[ell] = frac

    verdicts = [_eval_check(chk, arr, s, phi, trace, n_max) for chk in expected_statistics]
    return RecurrenceReport(horizon=n_max, ladder_stats=ladder_stats, trace=trace,
                            oscillation=osc, cylinder_coverage=cov, verdicts=verdicts)

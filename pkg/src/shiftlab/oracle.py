"""Brute-force references on tiny instances.

Everything here is deliberately naive: depth-first enumeration, dense grid
search, full scans.  These are the ground truth the fast kernels are tested
against, so they must stay independent of the matrix/eigenvalue code paths.
Hard size caps raise BoundExceeded instead of silently crawling.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import BoundExceeded, Infeasible
from .shifts import ShiftSpace

MAX_WORD_LEN = 24
MAX_CYCLE_LEN = 16
MAX_GRID_STEPS = 40
MAX_FREE_PARAMS = 4
MAX_DENSITY_N = 1 << 22


@dataclass
class OracleResult:
    value: float
    enumerated: int
    note: str = ""


def brute_count_words(s: ShiftSpace, n: int) -> int:
    """Count admissible n-words by depth-first extension."""
    if n > MAX_WORD_LEN:
        raise BoundExceeded(f"n={n} > {MAX_WORD_LEN}")
    if n < 1:
        raise ValueError("n >= 1 required")

    def extend(last: int, remaining: int) -> int:
        if remaining == 0:
            return 1
        return sum(extend(j, remaining - 1) for j in range(s.k) if s.matrix[last][j])

    return sum(extend(c, n - 1) for c in range(s.k))


def brute_count_cycles(s: ShiftSpace, n: int) -> int:
    """Count points of period dividing n: admissible n-words with admissible wrap."""
    if n > MAX_CYCLE_LEN:
        raise BoundExceeded(f"n={n} > {MAX_CYCLE_LEN}")
    if n < 1:
        raise ValueError("n >= 1 required")

    def extend(first: int, last: int, remaining: int) -> int:
        if remaining == 0:
            return 1 if s.matrix[last][first] else 0
        return sum(extend(first, j, remaining - 1) for j in range(s.k) if s.matrix[last][j])

    return sum(extend(c, c, n - 1) for c in range(s.k))


def _stationary(p: np.ndarray) -> np.ndarray:
    """Stationary row vector via the linear system pi(P - I) = 0, sum(pi) = 1.

    Direct LU solve; independent of the power-iteration path the measure
    kernels use.  Falls back to a Cesaro average if the system is singular.
    """
    k = p.shape[0]
    m = (p.T - np.eye(k)).copy()
    m[-1, :] = 1.0
    rhs = np.zeros(k)
    rhs[-1] = 1.0
    try:
        pi = np.linalg.solve(m, rhs)
        if np.all(pi > -1e-10):
            pi = np.maximum(pi, 0.0)
            return pi / pi.sum()
    except np.linalg.LinAlgError:
        pass
    pi = np.full(k, 1.0 / k)
    acc = np.zeros(k)
    for _ in range(20000):
        pi = pi @ p
        acc += pi
    acc /= acc.sum()
    return acc


def _entropy_and_integral(p: np.ndarray, phi_edge: np.ndarray) -> tuple[float, float]:
    pi = _stationary(p)
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(p > 0, np.log(np.where(p > 0, p, 1.0)), 0.0)
    h = float(-(pi[:, None] * p * logs).sum())
    integral = float((pi[:, None] * p * phi_edge).sum())
    return h, integral


def _edge_phi(s: ShiftSpace, phi) -> np.ndarray:
    """Potential as a k x k edge table; range-1 tables act on the source symbol."""
    out = np.zeros((s.k, s.k))
    for i in range(s.k):
        for j in range(s.k):
            if not s.matrix[i][j]:
                continue
            if phi.range == 1:
                out[i, j] = phi.table[(i,)]
            else:
                out[i, j] = phi.table[(i, j)]
    return out


def _row_distributions(targets: list[int], steps: int):
    """Grid over probability vectors on `targets` with `steps` subdivisions."""
    m = len(targets)
    if m == 1:
        yield (1.0,)
        return
    for cuts in product(range(steps + 1), repeat=m - 1):
        total = sum(cuts)
        if total > steps:
            continue
        probs = [c / steps for c in cuts] + [(steps - total) / steps]
        yield tuple(probs)


def brute_constrained_entropy(s: ShiftSpace, phi, a: float, grid_steps: int = 40,
                              detailed: bool = False):
    """Max entropy with the integral pinned to a, from a memory-1 grid.

    Dense grid over the stochastic matrices compatible with A, one local
    refinement pass around the best near-constraint cell, then closure
    under two-point mixtures: a pair with integrals straddling a combines
    (entropy and integral are both affine) into a measure meeting the
    constraint exactly.  The result is therefore a certified lower bound
    for the constrained-entropy value at a itself, not just near it.
    """
    if grid_steps > MAX_GRID_STEPS:
        raise BoundExceeded(f"grid_steps={grid_steps} > {MAX_GRID_STEPS}")
    if phi.range > 2:
        raise BoundExceeded("oracle handles potentials of range <= 2 only")
    rows = [[j for j in range(s.k) if s.matrix[i][j]] for i in range(s.k)]
    free = [i for i in range(s.k) if len(rows[i]) > 1]
    if sum(len(rows[i]) - 1 for i in free) > MAX_FREE_PARAMS:
        raise BoundExceeded(f"more than {MAX_FREE_PARAMS} free parameters")
    phi_edge = _edge_phi(s, phi)
    span = float(np.max(np.abs(phi_edge))) if np.max(np.abs(phi_edge)) > 0 else 1.0
    eps = 1e-9  # keep every allowed edge open so the chain stays irreducible

    def assemble(choice: dict[int, tuple[float, ...]]) -> np.ndarray:
        p = np.zeros((s.k, s.k))
        for i in range(s.k):
            if i in choice:
                probs = np.array(choice[i])
                probs = np.maximum(probs, eps)
                probs = probs / probs.sum()
                for t, pr in zip(rows[i], probs):
                    p[i, t] = pr
            else:
                p[i, rows[i][0]] = 1.0
        return p

    evaluated_total = 0

    def scan(grids: dict[int, list[tuple[float, ...]]]):
        nonlocal evaluated_total
        free_rows = sorted(grids)
        out = []
        for combo in product(*(grids[i] for i in free_rows)):
            choice = dict(zip(free_rows, combo))
            h, integral = _entropy_and_integral(assemble(choice), phi_edge)
            out.append((h, integral, choice))
        evaluated_total += len(out)
        return out

    def best_exact(evaluated):
        """Best entropy among straddling mixtures hitting a exactly."""
        below = [(h, g) for h, g, _ in evaluated if g <= a]
        above = [(h, g) for h, g, _ in evaluated if g >= a]
        if not below or not above:
            return None
        below.sort(reverse=True)
        above.sort(reverse=True)
        best = None
        for h1, g1 in above[:60]:
            for h2, g2 in below[:60]:
                if g1 == g2:
                    mixed = max(h1, h2) if g1 == a else None
                else:
                    theta = (a - g2) / (g1 - g2)
                    mixed = theta * h1 + (1 - theta) * h2
                if mixed is not None and (best is None or mixed > best):
                    best = mixed
        return best

    coarse_pts = scan({i: list(_row_distributions(rows[i], grid_steps)) for i in free})
    dmin = min(abs(g - a) for _, g, _ in coarse_pts)
    if best_exact(coarse_pts) is None and dmin > 2.0 * span / grid_steps:
        raise Infeasible(f"nearest attainable integral is {dmin} away from {a}")
    near = min(coarse_pts, key=lambda t: (abs(t[1] - a), -t[0]))
    anchor = max((t for t in coarse_pts if abs(t[1] - a) <= max(dmin * 1.0001, span / (4.0 * grid_steps))),
                 key=lambda t: t[0], default=near)

    # refinement varies only the m-1 free coordinates of each row (the last
    # entry is the residual); the per-axis resolution shrinks with the total
    # dimension so the joint fine grid stays around 2e4 points
    total_dims = sum(len(rows[i]) - 1 for i in free)
    per_axis = min(41, max(7, int(round(24000 ** (1.0 / total_dims)))))
    fine: dict[int, list[tuple[float, ...]]] = {}
    for i in free:
        center = anchor[2][i]
        width = 2.0 / grid_steps
        axes = []
        for c in center[:-1]:
            lo = max(0.0, c - width)
            hi = min(1.0, c + width)
            axes.append([lo + t * (hi - lo) / (per_axis - 1) for t in range(per_axis)])
        pts = []
        for combo in product(*axes):
            head = sum(combo)
            if head > 1.0:
                continue
            pts.append(tuple(combo) + (1.0 - head,))
        fine[i] = pts
    fine_pts = scan(fine)

    value = best_exact(coarse_pts + fine_pts)
    if value is None:
        raise Infeasible(f"no measure pair straddles integral {a}")
    if detailed:
        return OracleResult(value=value, enumerated=evaluated_total,
                            note=f"two-point mixture closure at a={a}")
    return value


def brute_density(visits, n_max: int) -> tuple[float, float]:
    """Exact min/max of |visits ∩ [0,n)|/n over every n in [n_max/2, n_max].

    `visits` is an iterable of visit times or a boolean predicate evaluated
    on range(n_max).  Reference for the checkpointed estimators.
    """
    if n_max > MAX_DENSITY_N:
        raise BoundExceeded(f"N={n_max} > {MAX_DENSITY_N}")
    if callable(visits):
        flags = np.fromiter((bool(visits(i)) for i in range(n_max)), dtype=bool, count=n_max)
    else:
        flags = np.zeros(n_max, dtype=bool)
        idx = np.asarray(sorted(v for v in visits if 0 <= v < n_max), dtype=np.int64)
        flags[idx] = True
    counts = np.cumsum(flags)
    ns = np.arange(1, n_max + 1)
    lo = n_max // 2
    ratios = counts[lo - 1:] / ns[lo - 1:]
    return float(ratios.min()), float(ratios.max())

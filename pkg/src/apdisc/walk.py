"""Coloring production: the Gram-Schmidt walk, and exact brute force.

The walk rounds a fractional vector to +/-1 along least-squares
directions of the right certificate factor, keeping the signed column
sums subgaussian; feeding it the right factor of a gamma_2 certificate
yields colorings whose discrepancy is bounded by sqrt(log 2m) times the
certificate value in expectation-of-tail terms.  Brute force evaluates
the discrepancy definition exactly on tiny instances.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy import sparse

from .core import (Coloring, OrderingSigma, SetSystem, disc_eval,
                   pdisc_eval, subinterval_max_disc)
from .errors import DomainError, ResourceLimitError, StructuralError

BRUTE_DISC_LIMIT = 26
BRUTE_PDISC_LIMIT = 22
_CLAMP = 1e-12
_RIDGE = 1e-10


@dataclass
class WalkState:
    """Mutable state of one Gram-Schmidt walk run."""

    x: np.ndarray          # fractional vector in [-1, 1]^n
    alive: np.ndarray      # boolean mask, |x_i| < 1
    pivot: int             # current pivot index, -1 when done
    rng: np.random.Generator


class _GramInverse:
    """Inverse of a principal submatrix of a Gram matrix, with removal.

    Supports only removals (the walk never revives a coordinate), each
    one a rank-1 downdate of the stored inverse.  A small ridge keeps
    the submatrix positive definite when certificate columns are
    linearly dependent; the walk's guarantees only need a descent
    direction, so the ridge perturbation is harmless.
    """

    def __init__(self, G: np.ndarray, idx: np.ndarray, ridge: float = _RIDGE):
        self.G = G
        self.ridge = ridge
        self.idx = np.asarray(idx, dtype=np.int64)
        self._recompute()

    def _recompute(self):
        a = self.idx.size
        sub = self.G[np.ix_(self.idx, self.idx)] + self.ridge * np.eye(a)
        self.M = np.linalg.inv(sub) if a else np.zeros((0, 0))

    def direction(self, p: int) -> np.ndarray:
        """Least-squares coefficients u_A = -M G[A, p]."""
        if self.idx.size == 0:
            return np.zeros(0)
        g = self.G[self.idx, p]
        nz = np.flatnonzero(g)
        # Gram matrices of sparse right factors have mostly-zero
        # columns; multiplying only the needed columns of the inverse
        # turns the per-step cost from quadratic into near-linear
        if nz.size * 4 < g.size:
            return -(self.M[:, nz] @ g[nz])
        return -(self.M @ g)

    def remove(self, g: int):
        j = int(np.searchsorted(self.idx, g))
        keep = np.arange(self.idx.size) != j
        mjj = self.M[j, j]
        self.idx = self.idx[keep]
        if mjj < 1e-14:
            self._recompute()
            return
        a = self.M.shape[0]
        col = np.concatenate([self.M[:j, j], self.M[j + 1:, j]])
        Mn = np.empty((a - 1, a - 1))
        Mn[:j, :j] = self.M[:j, :j]
        Mn[:j, j:] = self.M[:j, j + 1:]
        Mn[j:, :j] = self.M[j + 1:, :j]
        Mn[j:, j:] = self.M[j + 1:, j + 1:]
        Mn -= np.outer(col, col / mjj)
        self.M = Mn

def gs_walk(R, seed: int, log: Optional[List[Tuple[float, float, float, int]]] = None
            ) -> np.ndarray:
    """Round the zero vector to signs along least-squares directions.

    R is a k x n matrix with column norms at most 1.  At each step the
    pivot is the largest alive index; the update direction u has
    u_pivot = 1 and minimizes the norm of the signed column combination
    over the remaining alive coordinates; the step size is one of the
    two boundary-hitting magnitudes, chosen with the zero-mean
    probability rule.  The output is exactly +/-1 in every coordinate.

    ``log`` collects (delta_plus, delta_minus, prob_plus, choice) per
    step for martingale audits.
    """
    R = sparse.csr_matrix(R) if not sparse.issparse(R) else R.tocsr()
    if not np.all(np.isfinite(R.data)):
        raise StructuralError("right factor has non-finite entries")
    n = R.shape[1]
    if n == 0:
        return np.zeros(0, dtype=np.int8)
    colsq = np.asarray(R.multiply(R).sum(axis=0)).ravel()
    if colsq.max(initial=0.0) > (1.0 + 1e-9) ** 2:
        raise DomainError("column norms must be at most 1")
    G = (R.T @ R).toarray()
    rng = np.random.Generator(np.random.Philox(seed))
    x = np.zeros(n)
    alive = np.ones(n, dtype=bool)
    pivot = n - 1
    inv = _GramInverse(G, np.arange(n - 1))
    state = WalkState(x=x, alive=alive, pivot=pivot, rng=rng)
    while True:
        u = np.zeros(n)
        u[pivot] = 1.0
        if inv.idx.size:
            u[inv.idx] = inv.direction(pivot)
        # boundary-hitting step sizes in both directions
        live = np.flatnonzero(alive)
        ul = u[live]
        xl = x[live]
        nz = ul != 0
        room_up = np.where(ul[nz] > 0, (1.0 - xl[nz]) / ul[nz],
                           (-1.0 - xl[nz]) / ul[nz])
        room_dn = np.where(ul[nz] > 0, (1.0 + xl[nz]) / ul[nz],
                           -(1.0 - xl[nz]) / ul[nz])
        d_plus = float(room_up.min())
        d_minus = float(room_dn.min())
        if d_plus + d_minus <= 0:
            raise StructuralError("degenerate step; pivot direction vanished")
        p_plus = d_minus / (d_plus + d_minus)
        take_plus = rng.random() < p_plus
        delta = d_plus if take_plus else -d_minus
        if log is not None:
            log.append((d_plus, d_minus, p_plus, 1 if take_plus else -1))
        x[live] += delta * ul
        frozen = live[np.abs(x[live]) >= 1.0 - _CLAMP]
        for g in frozen:
            x[g] = 1.0 if x[g] > 0 else -1.0
            alive[g] = False
            if g != pivot:
                inv.remove(int(g))
        if not alive.any():
            break
        if not alive[pivot]:
            pivot = int(np.flatnonzero(alive).max())
            inv.remove(pivot)
        state.pivot = pivot
    state.pivot = -1
    signs = np.where(x > 0, 1, -1).astype(np.int8)
    return signs


def gamma2_coloring(S: SetSystem, F, seed: int, disc_fn=None):
    """Color via the walk on the certificate's right factor.

    Returns (Coloring, report) where the report records the observed
    discrepancy and its ratio to sqrt(ln 2m) * value.  ``disc_fn``
    overrides the discrepancy evaluation for families too large to
    materialize (it receives the coloring values).
    """
    if F.R is None:
        raise DomainError("coloring needs a materialized right factor")
    if F.R_norm <= 0:
        raise DomainError("zero certificate cannot be normalized")
    signs = gs_walk(F.R * (1.0 / F.R_norm), seed)
    chi = Coloring(values=signs, seed=seed, provenance="gs-walk")
    m = len(S) if S is not None else F.m
    disc = float(disc_fn(chi)) if disc_fn is not None else float(disc_eval(S, chi))
    scale = math.sqrt(math.log(2 * max(m, 1))) * F.value
    report = {
        "disc": disc,
        "sets": m,
        "value": F.value,
        "bound_scale": scale,
        "ratio": disc / scale if scale > 0 else float("inf"),
    }
    return chi, report


@dataclass(frozen=True)
class BruteForceResult:
    """Exact optimum over all colorings (up to global sign)."""

    min_disc: int
    witness: Coloring
    evaluated: int


def _sign_chunk(lo: int, width: int, n: int) -> np.ndarray:
    """Columns lo..lo+width as sign vectors; bit i of the counter drives
    coordinate i+1, coordinate 0 is fixed to +1 by sign symmetry."""
    counters = np.arange(lo, lo + width, dtype=np.uint64)[None, :]
    bits = (counters >> np.arange(n - 1, dtype=np.uint64)[:, None]) & 1
    X = np.empty((n, width), dtype=np.float32)
    X[0] = 1.0
    X[1:] = 1.0 - 2.0 * bits
    return X


def _brute_min_over_rows(A: np.ndarray, n: int) -> Tuple[int, np.ndarray, int]:
    total = 1 << (n - 1)
    chunk = min(total, 1 << 16)
    best = None
    best_x = None
    for lo in range(0, total, chunk):
        width = min(chunk, total - lo)
        X = _sign_chunk(lo, width, n)
        vals = np.abs(A @ X).max(axis=0) if A.shape[0] else np.zeros(width)
        j = int(vals.argmin())
        if best is None or vals[j] < best:
            best = float(vals[j])
            best_x = X[:, j].copy()
    return int(round(best)), best_x.astype(np.int8), total


def brute_force_min_disc(S: SetSystem) -> BruteForceResult:
    """Exact disc(S) by enumeration over all colorings (n <= 26)."""
    n = len(S.universe)
    if n > BRUTE_DISC_LIMIT:
        raise ResourceLimitError("brute force limited to %d points"
                                 % BRUTE_DISC_LIMIT, count=n)
    if n == 0:
        chi = Coloring(values=np.zeros(0, dtype=np.int8), provenance="brute")
        return BruteForceResult(0, chi, 1)
    A = S.incidence_matrix().toarray().astype(np.float32)
    val, x, total = _brute_min_over_rows(A, n)
    chi = Coloring(values=x, provenance="brute")
    return BruteForceResult(val, chi, total)


def brute_force_min_pdisc(S: SetSystem, sigma: OrderingSigma) -> BruteForceResult:
    """Exact prefix discrepancy optimum (n <= 22).

    Every sigma-prefix of every set becomes a row; the minimum of the
    row-max over sign vectors is then the same enumeration as plain
    brute force.
    """
    n = len(S.universe)
    if n > BRUTE_PDISC_LIMIT:
        raise ResourceLimitError("prefix brute force limited to %d points"
                                 % BRUTE_PDISC_LIMIT, count=n)
    rows = []
    rank = sigma.rank
    for i in range(len(S)):
        idx = S.set_indices(i)
        order = idx[np.argsort(rank[idx], kind="stable")]
        for t in range(1, order.size + 1):
            rows.append(order[:t])
    if n == 0 or not rows:
        chi = Coloring(values=np.ones(n, dtype=np.int8), provenance="brute")
        return BruteForceResult(0, chi, 1)
    A = np.zeros((len(rows), n), dtype=np.float32)
    for r, idx in enumerate(rows):
        A[r, idx] = 1.0
    val, x, total = _brute_min_over_rows(A, n)
    chi = Coloring(values=x, provenance="brute")
    return BruteForceResult(val, chi, total)


def ap_family_disc(box, chi: Coloring) -> int:
    """Exact discrepancy of a coloring over every progression in a box.

    Each progression is a contiguous run of its maximal progression
    taken in lexicographic point order, so the maximum over all
    progressions equals the maximum subinterval sum over the maximal
    family.  This avoids materializing the full family.
    """
    from .apgen import enumerate_maximal_aps
    M = enumerate_maximal_aps(box)
    return subinterval_max_disc(M, chi)


def ap_family_size(box) -> int:
    """Number of progressions in the full family of a box.

    Each maximal progression of length L contributes its L*(L+1)/2
    contiguous runs; singleton runs coincide across overlapping maximal
    progressions, so the distinct count keeps one singleton per point.
    """
    from .apgen import enumerate_maximal_aps
    M = enumerate_maximal_aps(box)
    L = np.diff(M.indptr)
    nonsingleton = int((L * (L + 1) // 2 - L).sum())
    return nonsingleton + box.size()

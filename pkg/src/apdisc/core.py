"""Ground sets, set systems and exact discrepancy evaluation.

Points are integer tuples, a universe is an ordered list of distinct
points, and a set system stores its member sets as strictly sorted
index lists in CSR layout (``indptr``/``indices``).  All evaluation
routines work in exact integer arithmetic.
"""

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from .errors import StructuralError

LatticePoint = Tuple[int, ...]


class Universe:
    """Ordered list of distinct lattice points with a point -> rank map."""

    __slots__ = ("points", "index", "dim")

    def __init__(self, points: Sequence[LatticePoint]):
        self.points: List[LatticePoint] = [tuple(int(c) for c in p) for p in points]
        if not self.points:
            self.dim = 0
        else:
            self.dim = len(self.points[0])
            if any(len(p) != self.dim for p in self.points):
                raise StructuralError("points of mixed dimension")
        self.index = {p: i for i, p in enumerate(self.points)}
        if len(self.index) != len(self.points):
            raise StructuralError("duplicate points in universe")

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, p):
        return tuple(p) in self.index

    def rank_of(self, p: LatticePoint) -> int:
        return self.index[tuple(p)]

    def __eq__(self, other):
        return isinstance(other, Universe) and self.points == other.points

    def __repr__(self):
        return "Universe(%d points, dim=%d)" % (len(self), self.dim)


class SetSystem:
    """A family of subsets of a universe, stored CSR-style.

    ``indices`` holds the concatenated, per-set strictly increasing
    universe ranks; ``indptr[i]:indptr[i+1]`` delimits set ``i``.
    ``labels`` optionally carries per-set metadata (e.g. the generating
    AP descriptor).
    """

    __slots__ = ("universe", "indptr", "indices", "labels")

    def __init__(self, universe: Universe, indptr, indices, labels=None,
                 validate: bool = True):
        self.universe = universe
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int32)
        self.labels = labels
        if validate:
            self._validate()

    def _validate(self):
        n = len(self.universe)
        if self.indices.size and (self.indices.min() < 0 or self.indices.max() >= n):
            raise StructuralError("set index out of range for universe")
        if self.indptr[0] != 0 or self.indptr[-1] != self.indices.size:
            raise StructuralError("corrupt indptr")
        if np.any(np.diff(self.indptr) < 0):
            raise StructuralError("indptr not monotone")

    @classmethod
    def from_lists(cls, universe: Universe, sets: Iterable[Sequence[int]],
                   labels=None) -> "SetSystem":
        indptr = [0]
        chunks = []
        for s in sets:
            a = np.asarray(sorted(set(int(i) for i in s)), dtype=np.int32)
            chunks.append(a)
            indptr.append(indptr[-1] + a.size)
        indices = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int32)
        return cls(universe, np.asarray(indptr), indices, labels=labels)

    def __len__(self):
        return len(self.indptr) - 1

    def set_indices(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def sets(self):
        for i in range(len(self)):
            yield self.set_indices(i)

    def sizes(self) -> np.ndarray:
        return np.diff(self.indptr)

    def point_sets(self, i: int) -> List[LatticePoint]:
        return [self.universe.points[j] for j in self.set_indices(i)]

    def incidence_matrix(self) -> sparse.csr_matrix:
        """0/1 incidence matrix, one row per set."""
        data = np.ones(self.indices.size, dtype=np.float64)
        return sparse.csr_matrix(
            (data, self.indices.astype(np.int64), self.indptr),
            shape=(len(self), len(self.universe)))

    def select_rows(self, rows, labels=None) -> "SetSystem":
        rows = np.asarray(rows, dtype=np.int64)
        chunks = [self.set_indices(int(r)) for r in rows]
        indptr = np.zeros(len(chunks) + 1, dtype=np.int64)
        if chunks:
            indptr[1:] = np.cumsum([c.size for c in chunks])
        indices = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int32)
        return SetSystem(self.universe, indptr, indices, labels=labels,
                         validate=False)

    def __repr__(self):
        return "SetSystem(%d sets over %r)" % (len(self), self.universe)


def concat_systems(parts: Sequence[SetSystem]) -> SetSystem:
    """Stack several families over the same universe into one system."""
    if not parts:
        raise StructuralError("nothing to concatenate")
    uni = parts[0].universe
    if any(p.universe is not uni and p.universe != uni for p in parts):
        raise StructuralError("universe mismatch in concat")
    indices = np.concatenate([p.indices for p in parts])
    counts = np.concatenate([np.diff(p.indptr) for p in parts])
    indptr = np.zeros(counts.size + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(counts)
    return SetSystem(uni, indptr, indices, validate=False)


@dataclass
class Coloring:
    """A +-1 assignment over a universe, with provenance and seed."""

    values: np.ndarray
    seed: Optional[int] = None
    provenance: str = "external"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.int8)
        if self.values.size and not np.all(np.abs(self.values) == 1):
            raise StructuralError("coloring entries must be exactly +-1")

    def __len__(self):
        return self.values.size


def random_coloring(n: int, seed: int) -> Coloring:
    rng = np.random.Generator(np.random.Philox(seed))
    vals = rng.integers(0, 2, size=n).astype(np.int8) * 2 - 1
    return Coloring(vals, seed=seed, provenance="random")


@dataclass
class OrderingSigma:
    """Bijection universe-rank -> 1..n (an ordering of the universe)."""

    rank: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self):
        self.rank = np.asarray(self.rank, dtype=np.int64)
        n = self.rank.size
        if n and not np.array_equal(np.sort(self.rank), np.arange(1, n + 1)):
            raise StructuralError("ranks must be a permutation of 1..n")

    @classmethod
    def identity(cls, n: int) -> "OrderingSigma":
        return cls(np.arange(1, n + 1, dtype=np.int64))

    def is_identity(self) -> bool:
        n = self.rank.size
        return bool(np.array_equal(self.rank, np.arange(1, n + 1)))

    def __len__(self):
        return self.rank.size


def _check_match(S: SetSystem, chi: Coloring):
    if len(chi) != len(S.universe):
        raise StructuralError("coloring does not match the set system universe")


def chi_sum(indices, chi: Coloring) -> int:
    """Exact signed sum of a set under a coloring."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size == 0:
        return 0
    if idx.min() < 0 or idx.max() >= len(chi):
        raise StructuralError("set index out of range")
    return int(chi.values[idx].astype(np.int64).sum())


def _set_sums(S: SetSystem, chi: Coloring) -> np.ndarray:
    v = chi.values[S.indices].astype(np.int64)
    ext = np.concatenate([[0], np.cumsum(v)])
    return ext[S.indptr[1:]] - ext[S.indptr[:-1]]


def disc_eval(S: SetSystem, chi: Coloring) -> int:
    """max over sets of |signed sum|; 0 for an empty family."""
    _check_match(S, chi)
    if len(S) == 0:
        return 0
    return int(np.abs(_set_sums(S, chi)).max())


def _sigma_sorted_indices(S: SetSystem, sigma: OrderingSigma) -> np.ndarray:
    """Indices of S reordered so each set is sorted by sigma rank."""
    if sigma.is_identity():
        return S.indices
    sizes = np.diff(S.indptr)
    seg = np.repeat(np.arange(len(S), dtype=np.int64), sizes)
    order = np.lexsort((sigma.rank[S.indices], seg))
    return S.indices[order]


def _prefix_extrema(indices, indptr, chi: Coloring):
    """Per-set (max, min) of running prefix sums, empty prefix included."""
    v = chi.values[indices].astype(np.int64)
    cs = np.cumsum(v)
    starts = indptr[:-1]
    ends = indptr[1:]
    nonempty = ends > starts
    base = np.where(starts > 0, np.concatenate([[0], cs])[starts], 0)
    hi = np.zeros(len(starts), dtype=np.int64)
    lo = np.zeros(len(starts), dtype=np.int64)
    if np.any(nonempty):
        s_ne = starts[nonempty]
        hi_ne = np.maximum.reduceat(cs, s_ne)
        lo_ne = np.minimum.reduceat(cs, s_ne)
        # reduceat segments run to the next start; the final segment runs to
        # the end of cs, which matches because sets are contiguous in CSR.
        hi[nonempty] = hi_ne - base[nonempty]
        lo[nonempty] = lo_ne - base[nonempty]
    hi = np.maximum(hi, 0)
    lo = np.minimum(lo, 0)
    return hi, lo


def pdisc_eval(S: SetSystem, sigma: OrderingSigma, chi: Coloring) -> int:
    """Prefix discrepancy of chi: max over sets and sigma-prefixes of |sum|."""
    _check_match(S, chi)
    if len(sigma) != len(S.universe):
        raise StructuralError("sigma does not match the set system universe")
    if len(S) == 0:
        return 0
    idx = _sigma_sorted_indices(S, sigma)
    hi, lo = _prefix_extrema(idx, S.indptr, chi)
    return int(max(hi.max(initial=0), -lo.min(initial=0)))


def subinterval_max_disc(S_sorted: SetSystem, chi: Coloring) -> int:
    """Max |sum| over all contiguous slices of each (pre-sorted) set.

    With prefix 0 included, a slice sum is a difference of two prefixes,
    so the answer per set is (max prefix) - (min prefix).
    """
    _check_match(S_sorted, chi)
    if len(S_sorted) == 0:
        return 0
    hi, lo = _prefix_extrema(S_sorted.indices, S_sorted.indptr, chi)
    return int((hi - lo).max(initial=0))

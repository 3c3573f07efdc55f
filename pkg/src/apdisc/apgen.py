"""Arithmetic progressions in integer boxes.

Generates the full AP family, maximal APs, prefix-maximal APs, the
lexicographic ordering, and the set of steps whose longest maximal AP
exceeds a threshold.  Enumeration is vectorized per step vector so the
(64,64)-scale instances used by the certificate machinery stay fast.
"""

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .core import LatticePoint, OrderingSigma, SetSystem, Universe
from .errors import DomainError, ResourceLimitError, StructuralError

DEFAULT_SET_GUARD = 5_000_000


@dataclass(frozen=True)
class BoxSpec:
    """An axis-aligned box [1,N_1] x ... x [1,N_d] of integer points."""

    N: Tuple[int, ...]

    def __post_init__(self):
        if not self.N or any(n < 1 for n in self.N):
            raise StructuralError("box sides must be >= 1")

    @property
    def dim(self) -> int:
        return len(self.N)

    def size(self) -> int:
        out = 1
        for n in self.N:
            out *= n
        return out

    def contains(self, p: Sequence[int]) -> bool:
        return len(p) == self.dim and all(1 <= x <= n for x, n in zip(p, self.N))

    def universe(self) -> Universe:
        """Lexicographically ordered integer points of the box."""
        return Universe(list(itertools.product(*(range(1, n + 1) for n in self.N))))


@dataclass(frozen=True)
class APDescriptor:
    """(start, step, length) naming the AP {a + i*b : 0 <= i < ell}."""

    a: LatticePoint
    b: LatticePoint
    ell: int

    def __post_init__(self):
        if self.ell < 1:
            raise StructuralError("AP length must be >= 1")
        if self.ell >= 2 and not any(self.b):
            raise StructuralError("multi-point AP needs a nonzero step")


@dataclass(frozen=True)
class CanonicalAP:
    """An AP in canonical form together with its point set.

    Canonical form: singletons carry b = 0; otherwise the first nonzero
    step coordinate is positive (reversing via a -> a+(ell-1)b, b -> -b).
    Two canonical APs are equal iff their point sets are equal.
    """

    descriptor: APDescriptor
    points: Tuple[LatticePoint, ...]

    def point_set(self):
        return frozenset(self.points)


def ap_points(ap: APDescriptor) -> List[LatticePoint]:
    """[a, a+b, ..., a+(ell-1)b] in order."""
    return [tuple(x + i * s for x, s in zip(ap.a, ap.b)) for i in range(ap.ell)]


def canonicalize(ap: APDescriptor) -> CanonicalAP:
    pts = ap_points(ap)
    if ap.ell == 1:
        d = APDescriptor(pts[0], tuple(0 for _ in ap.a), 1)
        return CanonicalAP(d, tuple(pts))
    b = ap.b
    first = next(c for c in b if c != 0)
    if first < 0:
        a2 = pts[-1]
        b = tuple(-c for c in b)
        pts = pts[::-1]
        return CanonicalAP(APDescriptor(a2, b, ap.ell), tuple(pts))
    return CanonicalAP(ap, tuple(pts))


def canonical_step(b: Sequence[int]) -> Tuple[int, ...]:
    """Flip the sign of b so its first nonzero coordinate is positive."""
    for c in b:
        if c > 0:
            return tuple(b)
        if c < 0:
            return tuple(-x for x in b)
    return tuple(b)


def maximal_ap(a: LatticePoint, b: LatticePoint, box: BoxSpec) -> CanonicalAP:
    """The maximal AP with step b through a inside the box."""
    a = tuple(a)
    if not box.contains(a):
        raise DomainError("start point outside the box")
    if not any(b):
        raise DomainError("maximal AP needs a nonzero step")
    lo = a
    while True:
        prv = tuple(x - s for x, s in zip(lo, b))
        if not box.contains(prv):
            break
        lo = prv
    pts = [lo]
    while True:
        nxt = tuple(x + s for x, s in zip(pts[-1], b))
        if not box.contains(nxt):
            break
        pts.append(nxt)
    return canonicalize(APDescriptor(lo, tuple(b), len(pts)))


def canonical_steps(box: BoxSpec) -> Iterator[Tuple[int, ...]]:
    """Nonzero steps with |b_i| <= N_i - 1 and first nonzero coordinate > 0."""
    ranges = [range(-(n - 1), n) for n in box.N]
    for b in itertools.product(*ranges):
        if any(b) and next(c for c in b if c != 0) > 0:
            yield b


def step_max_length(box: BoxSpec, b: Sequence[int]) -> int:
    """Longest maximal AP with step b, in closed form."""
    if not any(b):
        raise DomainError("zero step")
    return min(1 + (n - 1) // abs(c) for n, c in zip(box.N, b) if c != 0)


class _BoxIndexer:
    """Vectorized coordinate/index arithmetic for a (possibly shifted) box.

    ``global_box``/``global_offset`` define the index space: the linear
    index of a point is its lexicographic rank inside the global box.
    """

    def __init__(self, box: BoxSpec, offset: Optional[Sequence[int]] = None,
                 global_box: Optional[BoxSpec] = None,
                 global_offset: Optional[Sequence[int]] = None):
        self.box = box
        self.d = box.dim
        self.offset = np.asarray(offset if offset is not None else [0] * self.d,
                                 dtype=np.int64)
        gbox = global_box if global_box is not None else box
        self.gN = np.asarray(gbox.N, dtype=np.int64)
        self.goff = np.asarray(global_offset if global_offset is not None
                               else [0] * self.d, dtype=np.int64)
        self.strides = np.ones(self.d, dtype=np.int64)
        for i in range(self.d - 2, -1, -1):
            self.strides[i] = self.strides[i + 1] * self.gN[i + 1]
        lo = self.offset + 1
        grids = np.meshgrid(*(np.arange(lo[i], lo[i] + box.N[i], dtype=np.int64)
                              for i in range(self.d)), indexing="ij")
        self.coords = np.stack([g.ravel() for g in grids], axis=1)

    def in_box(self, C: np.ndarray) -> np.ndarray:
        lo = self.offset + 1
        hi = self.offset + np.asarray(self.box.N, dtype=np.int64)
        return np.all((C >= lo) & (C <= hi), axis=1)

    def lin_index(self, C: np.ndarray) -> np.ndarray:
        return (C - 1 - self.goff) @ self.strides

    def chains_for_step(self, b: Sequence[int]):
        """All maximal-AP chains for step b, as (flat indices, lengths).

        Chains are concatenated in anchor order; within a chain, points
        appear in +b order (global linear indices).
        """
        b = np.asarray(b, dtype=np.int64)
        C = self.coords
        anchors = C[~self.in_box(C - b)]
        if anchors.shape[0] == 0:
            return (np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
        lmax = step_max_length(self.box, [int(x) for x in b])
        cols = []
        masks = []
        for t in range(lmax):
            P = anchors + t * b
            m = self.in_box(P) if t else np.ones(anchors.shape[0], dtype=bool)
            cols.append(self.lin_index(P))
            masks.append(m)
        M = np.stack(masks, axis=1)           # anchors x lmax, prefix-true rows
        lengths = M.sum(axis=1).astype(np.int64)
        I = np.stack(cols, axis=1)
        flat = I[M]
        return flat, lengths


def _assemble(universe: Universe, chunks_idx, chunks_len, labels=None) -> SetSystem:
    indices = (np.concatenate(chunks_idx) if chunks_idx
               else np.zeros(0, dtype=np.int64)).astype(np.int32)
    lengths = (np.concatenate(chunks_len) if chunks_len
               else np.zeros(0, dtype=np.int64))
    indptr = np.zeros(lengths.size + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(lengths)
    return SetSystem(universe, indptr, indices, labels=labels, validate=False)


@dataclass
class StepBlock:
    """Row bookkeeping for one step vector inside an enumerated family."""

    b: Tuple[int, ...]
    row_start: int
    row_end: int
    max_length: int


def enumerate_maximal_aps(box: BoxSpec, universe: Optional[Universe] = None,
                          with_step_info: bool = False,
                          all_singletons: bool = False,
                          indexer: Optional[_BoxIndexer] = None):
    """The family M_N of maximal APs of the box, deduplicated.

    For each canonical nonzero step the maximal APs partition the box;
    sets with >= 2 points are unique to their step, so only singleton
    chains need global deduplication.  ``all_singletons`` additionally
    includes every point as a singleton set (used by the certificate
    recursion, where crossing APs can leave singleton pieces whose step
    is out of range for the sub-box).
    """
    idxr = indexer if indexer is not None else _BoxIndexer(box)
    uni = universe if universe is not None else box.universe()
    n_univ_pts = idxr.coords.shape[0]
    chunks_idx, chunks_len = [], []
    blocks: List[StepBlock] = []
    singleton_seen = np.zeros(int(idxr.strides[0] * idxr.gN[0]), dtype=bool)
    row = 0
    for b in canonical_steps(box):
        flat, lengths = idxr.chains_for_step(b)
        if lengths.size == 0:
            continue
        multi = lengths >= 2
        if not np.all(multi):
            starts = np.zeros(lengths.size, dtype=np.int64)
            starts[1:] = np.cumsum(lengths)[:-1]
            singleton_seen[flat[starts[~multi]]] = True
        if np.any(multi):
            keep = np.repeat(multi, lengths)
            flat2, lengths2 = flat[keep], lengths[multi]
            chunks_idx.append(flat2)
            chunks_len.append(lengths2)
            blocks.append(StepBlock(tuple(b), row, row + lengths2.size,
                                    step_max_length(box, b)))
            row += lengths2.size
    if all_singletons or not blocks:
        # a box with all sides 1 has no steps; its points are their own
        # maximal progressions
        singleton_seen[idxr.lin_index(idxr.coords)] = True
    singles = np.flatnonzero(singleton_seen)
    single_start = row
    if singles.size:
        chunks_idx.append(singles)
        chunks_len.append(np.ones(singles.size, dtype=np.int64))
        row += singles.size
    S = _assemble(uni, chunks_idx, chunks_len)
    del n_univ_pts
    if with_step_info:
        return S, blocks, (single_start, row)
    return S


def enumerate_all_aps(box: BoxSpec, guard: int = DEFAULT_SET_GUARD,
                      universe: Optional[Universe] = None,
                      indexer: Optional[_BoxIndexer] = None) -> SetSystem:
    """The family A_N of all distinct nonempty APs in the box.

    Every AP with >= 2 points is a contiguous slice of a maximal AP and
    determines its (canonical) step, so slices are distinct across steps
    and only singletons need deduplication.
    """
    idxr = indexer if indexer is not None else _BoxIndexer(box)
    uni = universe if universe is not None else box.universe()
    total = idxr.coords.shape[0]  # all singletons
    per_step = []
    for b in canonical_steps(box):
        flat, lengths = idxr.chains_for_step(b)
        cnt = int((lengths * (lengths + 1) // 2 - lengths).sum())  # slices >= 2
        total += cnt
        per_step.append((b, flat, lengths))
    if total > guard:
        raise ResourceLimitError(
            "AP family would have %d sets (guard %d)" % (total, guard), count=total)
    chunks_idx, chunks_len = [], []
    for b, flat, lengths in per_step:
        starts = np.zeros(lengths.size, dtype=np.int64)
        starts[1:] = np.cumsum(lengths)[:-1]
        for s, L in zip(starts, lengths):
            chain = flat[s:s + L]
            for ell in range(2, L + 1):
                for off in range(0, L - ell + 1):
                    chunks_idx.append(chain[off:off + ell])
                    chunks_len.append(np.array([ell], dtype=np.int64))
    pts = idxr.lin_index(idxr.coords)
    chunks_idx.append(np.sort(pts))
    chunks_len.append(np.ones(pts.size, dtype=np.int64))
    return _assemble(uni, chunks_idx, chunks_len)


def enumerate_prefix_maximal(box: BoxSpec, guard: int = DEFAULT_SET_GUARD,
                             universe: Optional[Universe] = None,
                             with_labels: bool = False,
                             indexer: Optional[_BoxIndexer] = None):
    """The family PA_N of backward-inextensible APs, deduplicated.

    For a canonical step b, the prefix-maximal APs are the prefixes of
    each maximal chain (step +b) and its suffixes (step -b); the two
    coincide exactly on full chains.  Singletons are included once.
    """
    idxr = indexer if indexer is not None else _BoxIndexer(box)
    uni = universe if universe is not None else box.universe()
    per_step = []
    total = idxr.coords.shape[0]
    for b in canonical_steps(box):
        flat, lengths = idxr.chains_for_step(b)
        total += int(np.maximum(2 * lengths - 3, 0).sum())
        per_step.append((b, flat, lengths))
    if total > guard:
        raise ResourceLimitError(
            "prefix-maximal family would have %d sets (guard %d)" % (total, guard),
            count=total)
    chunks_idx, chunks_len = [], []
    labels: Optional[List[APDescriptor]] = [] if with_labels else None
    coords_of = None
    if with_labels:
        coords_of = {int(i): tuple(int(c) for c in p)
                     for i, p in zip(idxr.lin_index(idxr.coords), idxr.coords)}
    for b, flat, lengths in per_step:
        starts = np.zeros(lengths.size, dtype=np.int64)
        starts[1:] = np.cumsum(lengths)[:-1]
        nb = tuple(-c for c in b)
        for s, L in zip(starts, lengths):
            chain = flat[s:s + L]
            for ell in range(2, L + 1):           # prefixes, step +b
                chunks_idx.append(chain[:ell])
                chunks_len.append(np.array([ell], dtype=np.int64))
                if with_labels:
                    labels.append(APDescriptor(coords_of[int(chain[0])], tuple(b), int(ell)))
            for ell in range(2, L):               # proper suffixes, step -b
                chunks_idx.append(chain[L - ell:][::-1].copy())
                chunks_len.append(np.array([ell], dtype=np.int64))
                if with_labels:
                    labels.append(APDescriptor(coords_of[int(chain[-1])], nb, int(ell)))
    pts = np.sort(idxr.lin_index(idxr.coords))
    zero = tuple(0 for _ in range(box.dim))
    for p in pts:
        chunks_idx.append(np.array([p], dtype=np.int64))
        chunks_len.append(np.array([1], dtype=np.int64))
        if with_labels:
            labels.append(APDescriptor(coords_of[int(p)], zero, 1))
    return _assemble(uni, chunks_idx, chunks_len, labels=labels)


def lex_order(universe: Universe) -> OrderingSigma:
    """sigma(x) = 1-based rank of x in the lexicographic ordering."""
    order = sorted(range(len(universe)), key=lambda i: universe.points[i])
    rank = np.zeros(len(universe), dtype=np.int64)
    for r, i in enumerate(order):
        rank[i] = r + 1
    return OrderingSigma(rank)


def lex_interval_repr(ap: CanonicalAP, box: BoxSpec):
    """Endpoints (x, y) with AP = {a+ib : i in Z} cap lex-interval [x, y].

    Verified by scanning the residue line inside the box.
    """
    d = ap.descriptor
    if d.ell >= 2:
        first = next(c for c in d.b if c != 0)
        if first <= 0:
            raise DomainError("AP not in canonical form")
    x = d.a
    y = tuple(a + (d.ell - 1) * s for a, s in zip(d.a, d.b))
    if any(d.b):
        member = set(ap.points)
        lo, hi = min(x, y), max(x, y)
        p = d.a
        while box.contains(tuple(u - v for u, v in zip(p, d.b))):
            p = tuple(u - v for u, v in zip(p, d.b))
        while box.contains(p):
            inside = lo <= p <= hi
            if inside != (p in member):
                raise DomainError("lex interval representation failed membership scan")
            p = tuple(u + v for u, v in zip(p, d.b))
    return x, y


@dataclass
class LargeStepSet:
    """Canonical steps whose longest maximal AP strictly exceeds s."""

    s: int
    steps: List[Tuple[int, ...]]
    count_bound: Fraction   # prod(4 N_i / s + 1)

    def __len__(self):
        return len(self.steps)


def _step_grid_max_lengths(box: BoxSpec):
    """(steps array, max chain length per step) over all canonical steps."""
    ranges = [np.arange(-(n - 1), n, dtype=np.int64) for n in box.N]
    grids = np.meshgrid(*ranges, indexing="ij")
    B = np.stack([g.ravel() for g in grids], axis=1)
    nz = np.any(B != 0, axis=1)
    first_nz = np.zeros(B.shape[0], dtype=np.int64)
    found = np.zeros(B.shape[0], dtype=bool)
    for j in range(box.dim):
        sel = ~found & (B[:, j] != 0)
        first_nz[sel] = B[sel, j]
        found |= sel
    B = B[nz & (first_nz > 0)]
    N = np.asarray(box.N, dtype=np.int64)
    L = np.full(B.shape[0], np.iinfo(np.int64).max, dtype=np.int64)
    for j in range(box.dim):
        c = np.abs(B[:, j])
        with np.errstate(divide="ignore"):
            lj = np.where(c > 0, 1 + (N[j] - 1) // np.maximum(c, 1),
                          np.iinfo(np.int64).max)
        L = np.minimum(L, lj)
    return B, L


def count_steps_with_maxlen_at_least(box: BoxSpec, s) -> int:
    """|{canonical b : max_a |MAP(a,b)| >= s}| (exact)."""
    _, L = _step_grid_max_lengths(box)
    return int((L >= s).sum())


def large_step_set(box: BoxSpec, s) -> LargeStepSet:
    """The set B of canonical steps with longest maximal AP > s (strict)."""
    if s < 2:
        raise DomainError("threshold s must be >= 2")
    B, L = _step_grid_max_lengths(box)
    keep = L > s
    steps = [tuple(int(c) for c in row) for row in B[keep]]
    sf = Fraction(s)
    bound = Fraction(1)
    for n in box.N:
        bound *= 4 * Fraction(n) / sf + 1
    return LargeStepSet(s=s, steps=steps, count_bound=bound)

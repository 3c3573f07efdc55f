"""Factorization certificates bounding the gamma_2 norm of AP set systems.

A certificate for a set system with incidence matrix A is a pair of
factors L, R with LR = A; its value ||L||_{2->inf} * ||R||_{1->2} is an
upper bound on gamma_2(A) and hence (up to the sqrt(log) factor used by
the coloring walk) on hereditary discrepancy.  The module provides the
base constructions (size and degree bounds), the composition calculus
(union, triangle, disjoint supports), the threshold certificate for the
maximal-AP family, the halving recursion for the full AP family, and
spectral lower bounds for sandwich tests.

Certificates carry their factors at three levels of materialization:
``full`` (both L and R, validity checkable), ``right`` (R only, enough
to run the coloring walk), and ``value`` (norm bookkeeping only, for
large instances).  Stored certificates are always balanced:
||L|| == ||R|| == sqrt(value).
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from .apgen import (BoxSpec, _BoxIndexer, enumerate_all_aps,
                    enumerate_maximal_aps, enumerate_prefix_maximal)
from .core import SetSystem, Universe, concat_systems
from .errors import ConstructionError, DomainError, ResourceLimitError, StructuralError

FULL_MODE_GUARD = 200_000  # max number of target sets materialized


# ---------------------------------------------------------------------------
# the bound function f(N)

@dataclass(frozen=True)
class FBoundResult:
    """f(N) = max over subsets I of (prod_{i in I} N_i)^(1/(2|I|+2)).

    ``product`` and ``subset_size`` describe the maximizing subset, so
    the threshold s = f(N)^2 = product^(1/(|I|+1)) admits exact integer
    comparisons against AP lengths.
    """

    N: Tuple[int, ...]
    value: float
    argmax_subset: Tuple[int, ...]
    product: int
    subset_size: int

    def length_exceeds_s(self, length: int) -> bool:
        """Exact test ``length > f(N)^2``."""
        return length ** (self.subset_size + 1) > self.product

    @property
    def s(self) -> float:
        return self.value ** 2


def f_of_N(N) -> FBoundResult:
    box = N if isinstance(N, BoxSpec) else BoxSpec(tuple(N))
    d = box.dim
    if d > 20:
        raise ResourceLimitError("dimension %d exceeds subset-scan guard" % d,
                                 count=d)
    best = (1.0, (), 1, 0)
    for mask in range(1 << d):
        prod = 1
        subset = []
        for i in range(d):
            if mask >> i & 1:
                prod *= box.N[i]
                subset.append(i)
        k = len(subset)
        val = prod ** (1.0 / (2 * k + 2))
        # exact tie-break: compare prod^(1/(2k+2)) via integer powers
        if val > best[0] + 1e-15:
            best = (val, tuple(subset), prod, k)
    return FBoundResult(N=box.N, value=best[0], argmax_subset=best[1],
                        product=best[2], subset_size=best[3])


# ---------------------------------------------------------------------------
# certificate container

def _max_row_norm(M) -> float:
    if M is None or M.shape[0] == 0 or M.nnz == 0:
        return 0.0
    sq = np.asarray(M.multiply(M).sum(axis=1)).ravel()
    return math.sqrt(float(sq.max()))


def _max_col_norm(M) -> float:
    if M is None or M.shape[1] == 0 or M.nnz == 0:
        return 0.0
    sq = np.asarray(M.multiply(M).sum(axis=0)).ravel()
    return math.sqrt(float(sq.max()))


@dataclass
class FactorizationCertificate:
    """A bound gamma_2(target) <= value, carried by factors LR = A.

    ``L_norm``/``R_norm`` are certified upper bounds on the factor
    norms; when the corresponding matrix is materialized they are its
    actual norms.  Certificates are balanced on construction.
    """

    m: int
    k: int
    n: int
    L_norm: float
    R_norm: float
    mode: str  # "full" | "right" | "value"
    L: Optional[sparse.csr_matrix] = field(default=None, repr=False)
    R: Optional[sparse.csr_matrix] = field(default=None, repr=False)
    target: Optional[SetSystem] = field(default=None, repr=False)
    provenance: dict = field(default_factory=dict, repr=False)

    @property
    def value(self) -> float:
        return self.L_norm * self.R_norm

    def residual(self, block: int = 100_000) -> float:
        """max |(LR - A)_ij|; requires full mode with a target.

        Computed in row blocks so large sparse certificates never
        materialize a second full product.
        """
        if self.mode != "full" or self.target is None:
            raise ConstructionError("residual needs full mode and a target")
        A = self.target.incidence_matrix()
        worst = 0.0
        for lo in range(0, self.m, block):
            hi = min(lo + block, self.m)
            D = (self.L[lo:hi] @ self.R) - A[lo:hi]
            if D.nnz:
                worst = max(worst, float(abs(D).max()))
        return worst


def _balance(cert: FactorizationCertificate) -> FactorizationCertificate:
    if cert.L_norm > 0 and cert.R_norm > 0:
        a = math.sqrt(cert.R_norm / cert.L_norm)
        if abs(a - 1.0) > 1e-15:
            if cert.L is not None:
                cert.L = cert.L * a
            if cert.R is not None:
                cert.R = cert.R * (1.0 / a)
            root = math.sqrt(cert.L_norm * cert.R_norm)
            cert.L_norm = root
            cert.R_norm = root
    return cert


def _scale_left(cert: FactorizationCertificate, a: float):
    """Return (L', R', L_norm', R_norm') with L scaled by a, R by 1/a."""
    L = cert.L * a if cert.L is not None else None
    R = cert.R * (1.0 / a) if cert.R is not None else None
    return L, R, cert.L_norm * a, cert.R_norm / a


def size_bound_cert(S: SetSystem, mode: str = "full") -> FactorizationCertificate:
    """L = incidence, R = identity; value = sqrt(max set size)."""
    m, n = len(S), len(S.universe)
    t = int(S.sizes().max()) if m else 0
    L = R = None
    if mode == "full":
        L = S.incidence_matrix()
    if mode in ("full", "right"):
        # for an all-empty family the zero factor pair keeps the stored
        # norms equal to the actual matrix norms
        R = sparse.identity(n, format="csr") if t else \
            sparse.csr_matrix((n, n))
    cert = FactorizationCertificate(
        m=m, k=n, n=n, L_norm=math.sqrt(t), R_norm=1.0 if t else 0.0,
        mode=mode, L=L, R=R, target=S,
        provenance={"op": "size-bound", "t": t, "value": math.sqrt(t)})
    return _balance(cert)


def degree_bound_cert(S: SetSystem, mode: str = "full") -> FactorizationCertificate:
    """L = identity, R = incidence; value = sqrt(max point degree)."""
    m, n = len(S), len(S.universe)
    deg = int(np.bincount(S.indices, minlength=n).max()) if S.indices.size else 0
    L = R = None
    if mode == "full":
        L = sparse.identity(m, format="csr") if deg else sparse.csr_matrix((m, m))
    if mode in ("full", "right"):
        R = S.incidence_matrix()
    cert = FactorizationCertificate(
        m=m, k=m, n=n, L_norm=1.0 if deg else 0.0, R_norm=math.sqrt(deg),
        mode=mode, L=L, R=R, target=S,
        provenance={"op": "degree-bound", "t": deg, "value": math.sqrt(deg)})
    return _balance(cert)


def _combine_mode(F1, F2) -> str:
    order = {"value": 0, "right": 1, "full": 2}
    return min((F1.mode, F2.mode), key=lambda x: order[x])


def union_cert(F1: FactorizationCertificate,
               F2: FactorizationCertificate) -> FactorizationCertificate:
    """Stack two families on the same universe; value^2 <= v1^2 + v2^2.

    Each factor is rescaled so its left norm is 1 and its right norm
    carries the full value; the stacked right factor then has column
    norms at most sqrt(v1^2 + v2^2), giving the Pythagorean rule (a
    balanced block-diagonal stacking would only give sqrt(v1*v2*2)-type
    bounds).
    """
    if F1.n != F2.n:
        raise StructuralError("union needs certificates on the same universe")
    mode = _combine_mode(F1, F2)
    vals = (F1.value, F2.value)
    parts = []
    for F in (F1, F2):
        a = 1.0 / F.L_norm if F.L_norm > 0 else 1.0
        parts.append(_scale_left(F, a))
    bound_R = math.sqrt(vals[0] ** 2 + vals[1] ** 2)
    L = R = None
    if mode == "full":
        L = sparse.block_diag([p[0] for p in parts], format="csr")
    if mode in ("full", "right"):
        R = sparse.vstack([p[1] for p in parts], format="csr")
        bound_R = min(bound_R, _max_col_norm(R)) if R.nnz else 0.0
    L_norm = max(p[2] for p in parts)
    if L is not None:
        L_norm = _max_row_norm(L)
    target = None
    if F1.target is not None and F2.target is not None:
        target = concat_systems([F1.target, F2.target])
    cert = FactorizationCertificate(
        m=F1.m + F2.m, k=F1.k + F2.k, n=F1.n, L_norm=L_norm, R_norm=bound_R,
        mode=mode, L=L, R=R, target=target,
        provenance={"op": "union", "children": [F1.provenance, F2.provenance]})
    return _balance(cert)


def _selection_matrix(rows: np.ndarray, m_src: int) -> sparse.csr_matrix:
    rows = np.asarray(rows, dtype=np.int64)
    keep = rows >= 0
    data = np.ones(int(keep.sum()))
    return sparse.csr_matrix((data, (np.flatnonzero(keep), rows[keep])),
                             shape=(rows.size, m_src))


def triangle_cert(F1: FactorizationCertificate, F2: FactorizationCertificate,
                  mode: str = "sum", target: Optional[SetSystem] = None,
                  rows1=None, rows2=None) -> FactorizationCertificate:
    """Row-aligned sum or difference of two targets; value <= v1 + v2.

    Row i of the result equals row rows1[i] of F1 plus (or minus) row
    rows2[i] of F2; -1 denotes a missing part.  The alignment is only
    needed to materialize L; the right factor is the plain stack
    [R1; +/-R2] regardless of alignment.
    """
    if F1.n != F2.n:
        raise StructuralError("triangle needs certificates on the same universe")
    if mode not in ("sum", "difference"):
        raise StructuralError("mode must be 'sum' or 'difference'")
    sgn = 1.0 if mode == "sum" else -1.0
    cmode = _combine_mode(F1, F2)
    if cmode == "full":
        if rows1 is None or rows2 is None or target is None:
            raise ConstructionError("full-mode triangle needs target and row maps")
        P1 = _selection_matrix(rows1, F1.m)
        P2 = _selection_matrix(rows2, F2.m)
        L = sparse.hstack([P1 @ F1.L, P2 @ F2.L], format="csr")
        m_out = len(rows1)
    else:
        L = None
        m_out = len(target) if target is not None else max(F1.m, F2.m)
    R = None
    if cmode in ("full", "right"):
        R = sparse.vstack([F1.R, F2.R * sgn], format="csr")
    L_norm = math.sqrt(F1.L_norm ** 2 + F2.L_norm ** 2)
    if L is not None:
        L_norm = _max_row_norm(L)
    R_norm = math.sqrt(F1.R_norm ** 2 + F2.R_norm ** 2)
    if R is not None:
        R_norm = min(R_norm, _max_col_norm(R))
    cert = FactorizationCertificate(
        m=m_out, k=F1.k + F2.k, n=F1.n, L_norm=L_norm, R_norm=R_norm,
        mode=cmode, L=L, R=R, target=target,
        provenance={"op": "triangle-" + mode,
                    "children": [F1.provenance, F2.provenance]})
    return _balance(cert)


def _embed_cols(R: sparse.csr_matrix, cols: np.ndarray, n: int) -> sparse.csr_matrix:
    cols = np.asarray(cols, dtype=np.int64)
    return sparse.csr_matrix((R.data, cols[R.indices], R.indptr),
                             shape=(R.shape[0], n))


def disjoint_support_cert(F1: FactorizationCertificate,
                          F2: FactorizationCertificate,
                          n: int, cols1, cols2,
                          target: Optional[SetSystem] = None,
                          check_disjoint: bool = True) -> FactorizationCertificate:
    """Combine families on disjoint column supports; value = max(v1, v2).

    ``cols1``/``cols2`` embed each factor's columns into the combined
    index space of size n.
    """
    cols1 = np.asarray(cols1, dtype=np.int64)
    cols2 = np.asarray(cols2, dtype=np.int64)
    if check_disjoint and np.intersect1d(cols1, cols2).size:
        raise StructuralError("column supports overlap")
    mode = _combine_mode(F1, F2)
    L = R = None
    if mode == "full":
        L = sparse.block_diag([F1.L, F2.L], format="csr")
    if mode in ("full", "right"):
        R = sparse.vstack([_embed_cols(F1.R, cols1, n),
                           _embed_cols(F2.R, cols2, n)], format="csr")
    L_norm = max(F1.L_norm, F2.L_norm)
    R_norm = max(F1.R_norm, F2.R_norm)
    cert = FactorizationCertificate(
        m=F1.m + F2.m, k=F1.k + F2.k, n=n, L_norm=L_norm, R_norm=R_norm,
        mode=mode, L=L, R=R, target=target,
        provenance={"op": "disjoint-support",
                    "children": [F1.provenance, F2.provenance]})
    return _balance(cert)


# ---------------------------------------------------------------------------
# the threshold certificate for the maximal-AP family

VALUE_MODE_ENUM_LIMIT = 50_000_000


def _map_cert_from_grid(box: BoxSpec,
                        all_singletons: bool) -> FactorizationCertificate:
    """Value-mode maximal-family certificate without set enumeration.

    Everything needed for the norm bookkeeping comes from the per-step
    grid of longest chain lengths: the size-bound part is capped by the
    largest integer length not exceeding s, and the degree of any point
    in the large part is at most the number of large steps (one chain
    per point per step).  Row counts are the undeduplicated chain
    counts, which only label the certificate.
    """
    from .apgen import _step_grid_max_lengths
    fres = f_of_N(box)
    size = box.size()
    if size == 1:
        return FactorizationCertificate(
            m=1, k=1, n=1, L_norm=1.0, R_norm=1.0, mode="value", target=None,
            provenance={"op": "maximal-family", "N": box.N, "f": fres.value,
                        "s": fres.s, "large_steps": 0, "max_degree": 0,
                        "t_small": 1, "value": 1.0})
    steps, lengths = _step_grid_max_lengths(box)
    exceeds = np.array([fres.length_exceeds_s(int(L))
                        for L in np.unique(lengths)])
    by_len = dict(zip(np.unique(lengths).tolist(), exceeds.tolist()))
    big = np.array([by_len[int(L)] for L in lengths])
    b_count = int(big.sum())
    t_small = int(lengths[~big].max()) if (~big).any() else 1
    if b_count:
        # large steps also contribute short chains to the small part
        cap = int(lengths.max())
        while cap > 1 and fres.length_exceeds_s(cap):
            cap -= 1
        t_small = max(t_small, cap)
    # chains per step: points minus points with an in-box predecessor
    interior = np.ones(len(lengths), dtype=np.int64)
    for i, n in enumerate(box.N):
        interior *= np.maximum(0, n - np.abs(steps[:, i]))
    m = int((size - interior).sum()) + (size if all_singletons else 0)
    val_sq = t_small + b_count
    root = val_sq ** 0.25
    return FactorizationCertificate(
        m=m, k=size, n=size, L_norm=root, R_norm=root, mode="value",
        target=None,
        provenance={"op": "maximal-family", "N": box.N, "f": fres.value,
                    "s": fres.s, "large_steps": b_count,
                    "max_degree": b_count, "t_small": t_small,
                    "value": math.sqrt(val_sq), "rows_estimated": True})


def map_cert(box: BoxSpec, mode: str = "full",
             all_singletons: bool = False,
             indexer: Optional[_BoxIndexer] = None,
             universe: Optional[Universe] = None) -> FactorizationCertificate:
    """Certificate for M_N split at the threshold s = f(N)^2.

    Sets of size <= s get the size bound; larger sets get the degree
    bound, whose degree is at most the number of steps whose longest
    maximal AP exceeds s (each such step contributes one set per point).
    Thresholding compares integer lengths against s exactly.
    """
    if mode == "value":
        n_steps = 1
        for n in box.N:
            n_steps *= 2 * n - 1
        if box.size() * n_steps > VALUE_MODE_ENUM_LIMIT:
            return _map_cert_from_grid(box, all_singletons)
    if mode == "full" and universe is None:
        universe = box.universe()
    S, blocks, _ = enumerate_maximal_aps(box, universe=universe,
                                         with_step_info=True,
                                         all_singletons=all_singletons,
                                         indexer=indexer)
    fres = f_of_N(box)
    sizes = S.sizes()
    big = np.zeros(len(S), dtype=bool)
    for sz in np.unique(sizes):
        if fres.length_exceeds_s(int(sz)):
            big |= sizes == sz
    b_count = sum(1 for blk in blocks if fres.length_exceeds_s(blk.max_length))
    maxdeg = 0
    if big.any():
        keep = np.repeat(big, sizes)
        maxdeg = int(np.bincount(S.indices[keep],
                                 minlength=len(S.universe)).max())
    if maxdeg > b_count:
        raise ConstructionError("degree exceeds the large-step count")
    small_rows = np.flatnonzero(~big)
    big_rows = np.flatnonzero(big)
    t_small = int(sizes[~big].max()) if small_rows.size else 0
    prov = {"op": "maximal-family", "N": box.N, "f": fres.value,
            "s": fres.s, "large_steps": b_count, "max_degree": maxdeg,
            "t_small": t_small}
    if mode == "value":
        val_sq = t_small + maxdeg
        root = val_sq ** 0.25
        prov["value"] = math.sqrt(val_sq)
        return FactorizationCertificate(
            m=len(S), k=len(S.universe) + len(big_rows), n=len(S.universe),
            L_norm=root, R_norm=root, mode="value", target=None,
            provenance=prov)
    F_small = size_bound_cert(S.select_rows(small_rows), mode=mode)
    F_big = degree_bound_cert(S.select_rows(big_rows), mode=mode)
    cert = union_cert(F_small, F_big)
    # report rows in enumeration order via the target of the union;
    # the union target is small rows then big rows
    prov["value"] = cert.value
    prov["children"] = cert.provenance["children"]
    cert.provenance = prov
    return cert


# ---------------------------------------------------------------------------
# the halving recursion for the full AP family

def _next_pow2(n: int) -> int:
    return 1 << (n - 1).bit_length()


def _half_col_maps(shape: Tuple[int, ...], axis: int):
    """Column maps from the two halves of a box into the whole box."""
    sbox = BoxSpec(shape)
    half = list(shape)
    half[axis] //= 2
    hbox = BoxSpec(tuple(half))
    low = _BoxIndexer(hbox, global_box=sbox)
    off = [0] * len(shape)
    off[axis] = shape[axis] // 2
    high = _BoxIndexer(hbox, offset=off, global_box=sbox)
    return (tuple(half),
            low.lin_index(low.coords),
            high.lin_index(high.coords))


def _row_lookup(S: SetSystem) -> Dict[Tuple[int, ...], int]:
    return {tuple(sorted(int(j) for j in S.set_indices(i))): i
            for i in range(len(S))}


def _remap_system(S: SetSystem, colmap: np.ndarray,
                  universe: Universe) -> SetSystem:
    idx = np.asarray(colmap, dtype=np.int64)[S.indices].astype(np.int32)
    return SetSystem(universe, S.indptr.copy(), idx, validate=False)


class _PARecursion:
    """Memoized prefix-maximal-AP certificates over the shape chain."""

    def __init__(self, mode: str, guard: int):
        self.mode = mode
        self.guard = guard
        self.memo: Dict[Tuple[int, ...], FactorizationCertificate] = {}
        self.f_decay: List[dict] = []

    def pa(self, shape: Tuple[int, ...]) -> FactorizationCertificate:
        if shape in self.memo:
            return self.memo[shape]
        sbox = BoxSpec(shape)
        n = sbox.size()
        if n == 1:
            uni = sbox.universe() if self.mode != "value" else None
            target = None
            if uni is not None:
                target = SetSystem.from_lists(uni, [[0]])
            one = sparse.identity(1, format="csr")
            cert = FactorizationCertificate(
                m=1, k=1, n=1, L_norm=1.0, R_norm=1.0, mode=self.mode,
                L=one if self.mode == "full" else None,
                R=one if self.mode in ("full", "right") else None,
                target=target,
                provenance={"op": "prefix-family", "shape": shape, "value": 1.0})
        else:
            cert = self._split(shape, sbox, n)
        self.memo[shape] = cert
        return cert

    def _split(self, shape, sbox, n) -> FactorizationCertificate:
        axis = int(np.argmax(shape))
        half, low_map, high_map = _half_col_maps(shape, axis)
        child = self.pa(half)
        hbox = BoxSpec(half)
        h_uni = hbox.universe() if self.mode != "value" else None
        mc = map_cert(hbox, mode=self.mode, all_singletons=True,
                      universe=h_uni)
        f_big, f_half = f_of_N(sbox), f_of_N(hbox)
        d = sbox.dim
        self.f_decay.append({
            "shape": shape, "half": half, "f": f_big.value,
            "f_half": f_half.value,
            "factor_bound": 2.0 ** (-1.0 / ((2 * d + 2) * (2 * d + 4)))})
        uni = target_pa = None
        rows_m = rows_pa = None
        if self.mode == "full":
            if n * 4 > FULL_MODE_GUARD:
                raise ResourceLimitError(
                    "full-mode recursion too large (n=%d)" % n, count=n)
            uni = sbox.universe()
            t_m = concat_systems([_remap_system(mc.target, low_map, uni),
                                  _remap_system(mc.target, high_map, uni)])
            t_pa = concat_systems([_remap_system(child.target, low_map, uni),
                                   _remap_system(child.target, high_map, uni)])
        else:
            t_m = t_pa = None
        M_pair = disjoint_support_cert(mc, mc, n, low_map, high_map,
                                       target=t_m, check_disjoint=False)
        PA_pair = disjoint_support_cert(child, child, n, low_map, high_map,
                                        target=t_pa, check_disjoint=False)
        if self.mode == "full":
            target_pa = enumerate_prefix_maximal(sbox, universe=uni,
                                                 with_labels=True)
            rows_m, rows_pa = self._align(target_pa, shape, axis, half,
                                          low_map, high_map,
                                          mc.target, child.target)
        cert = triangle_cert(M_pair, PA_pair, mode="sum", target=target_pa,
                             rows1=rows_m, rows2=rows_pa)
        construction = "split"
        direct = self._direct(shape, sbox, n, target_pa)
        if direct.value < cert.value:
            cert = direct
            construction = "size-bound"
        cert.provenance = {"op": "prefix-family", "shape": shape,
                           "construction": construction, "value": cert.value,
                           "children": [mc.provenance, child.provenance]}
        return cert

    def _direct(self, shape, sbox, n, target_pa):
        """Size-bound certificate for the prefix-maximal family.

        The largest prefix-maximal AP is a full side of the box, so the
        value sqrt(max side) needs no enumeration outside full mode.
        This often beats the recursion at desk scales, where sqrt(side)
        is still smaller than the accumulated split values.
        """
        if self.mode == "full":
            return size_bound_cert(target_pa, mode="full")
        t = max(shape)
        root = t ** 0.25
        R = None
        if self.mode == "right":
            # balanced pair: implicit L = A/root, R = root * I
            R = sparse.identity(n, format="csr") * root
        return FactorizationCertificate(
            m=0, k=n, n=n, L_norm=root, R_norm=root, mode=self.mode, R=R,
            provenance={"op": "size-bound", "t": t, "value": math.sqrt(t)})

    def _align(self, target_pa, shape, axis, half, low_map, high_map,
               m_sys, pa_sys):
        """Row maps decomposing each prefix-maximal AP of the box into a
        maximal-AP piece in its first half and a prefix-maximal piece in
        the other half (either piece may be absent)."""
        n = int(np.prod(shape, dtype=np.int64))
        inv_low = np.full(n, -1, dtype=np.int64)
        inv_high = np.full(n, -1, dtype=np.int64)
        inv_low[low_map] = np.arange(low_map.size)
        inv_high[high_map] = np.arange(high_map.size)
        m_rows = _row_lookup(m_sys)
        pa_rows = _row_lookup(pa_sys)
        n_m, n_p = len(m_sys), len(pa_sys)
        mid = half[axis]
        # coordinate along the split axis of each linear index
        stride = 1
        for i in range(axis + 1, len(shape)):
            stride *= shape[i]
        coord = (np.arange(n) // stride) % shape[axis] + 1
        rows_m = np.full(len(target_pa), -1, dtype=np.int64)
        rows_pa = np.full(len(target_pa), -1, dtype=np.int64)
        labels = target_pa.labels
        for i in range(len(target_pa)):
            idx = target_pa.set_indices(i).astype(np.int64)
            in_low = coord[idx] <= mid
            b = labels[i].b
            if in_low.all() or (~in_low).all():
                off = 0 if in_low.all() else n_p
                inv = inv_low if in_low.all() else inv_high
                key = tuple(sorted(int(v) for v in inv[idx]))
                rows_pa[i] = off + pa_rows[key]
                continue
            if b[axis] > 0:
                m_idx, p_idx = idx[in_low], idx[~in_low]
                m_inv, p_inv, m_off, p_off = inv_low, inv_high, 0, n_p
            else:
                m_idx, p_idx = idx[~in_low], idx[in_low]
                m_inv, p_inv, m_off, p_off = inv_high, inv_low, n_m, 0
            rows_m[i] = m_off + m_rows[tuple(sorted(int(v) for v in m_inv[m_idx]))]
            rows_pa[i] = p_off + pa_rows[tuple(sorted(int(v) for v in p_inv[p_idx]))]
        return rows_m, rows_pa


def prefix_ap_cert(box: BoxSpec, mode: str = "full") -> FactorizationCertificate:
    """Certificate for the prefix-maximal family of a power-of-2 box."""
    if any(n != _next_pow2(n) for n in box.N):
        raise DomainError("recursion needs power-of-2 sides")
    rec = _PARecursion(mode, FULL_MODE_GUARD)
    cert = rec.pa(box.N)
    cert.provenance = dict(cert.provenance)
    cert.provenance["f_decay"] = rec.f_decay
    return cert


def ap_cert(box: BoxSpec, mode: str = "full",
            guard: int = 5_000_000) -> FactorizationCertificate:
    """Certificate for the family of all APs in a box.

    Sides are rounded up to powers of 2 for the halving recursion; each
    AP of the true box is the difference of two prefix-maximal APs of
    the rounded box anchored at the same backward-maximal start, giving
    value <= 2 * (prefix-family value).  Columns are then projected back
    to the true universe (column deletion never increases the right
    norm).
    """
    fres = f_of_N(box)
    if box.size() == 1:
        uni = box.universe()
        target = SetSystem.from_lists(uni, [[0]])
        one = sparse.identity(1, format="csr")
        cert = FactorizationCertificate(
            m=1, k=1, n=1, L_norm=1.0, R_norm=1.0, mode=mode,
            L=one if mode == "full" else None,
            R=one if mode in ("full", "right") else None, target=target,
            provenance={"op": "ap-family", "N": box.N, "value": 1.0,
                        "f": fres.value, "ratio": 1.0 / fres.value})
        return cert
    rbox = BoxSpec(tuple(_next_pow2(n) for n in box.N))
    pa = prefix_ap_cert(rbox, mode=mode)
    rows1 = rows2 = target = None
    if mode == "full":
        uni = box.universe()
        target = enumerate_all_aps(box, guard=guard, universe=uni)
        ridx = _BoxIndexer(box, global_box=rbox)
        true_cols = ridx.lin_index(ridx.coords)
        pa_rows = _row_lookup(pa.target)
        rows1 = np.zeros(len(target), dtype=np.int64)
        rows2 = np.full(len(target), -1, dtype=np.int64)
        strides = np.ones(box.dim, dtype=np.int64)
        for i in range(box.dim - 2, -1, -1):
            strides[i] = strides[i + 1] * rbox.N[i + 1]
        for i in range(len(target)):
            idx = sorted(int(v) for v in true_cols[target.set_indices(i)])
            if len(idx) == 1:
                rows1[i] = pa_rows[(idx[0],)]
                continue
            # recover the canonical step from the two smallest points of
            # the ordered chain and extend backward in the rounded box
            pts = _lin_to_coords(np.asarray(idx, dtype=np.int64), rbox)
            bb = _chain_step(pts)
            back = []
            cur = pts[0] - bb
            while np.all(cur >= 1) and np.all(cur <= rbox.N):
                back.append((cur - 1) @ strides)
                cur = cur - bb
            p1 = tuple(sorted(idx + [int(v) for v in back]))
            rows1[i] = pa_rows[p1]
            if back:
                rows2[i] = pa_rows[tuple(sorted(int(v) for v in back))]
    cert = triangle_cert(pa, pa, mode="difference", target=target,
                         rows1=rows1, rows2=rows2)
    if mode in ("full", "right"):
        if mode == "right":
            ridx = _BoxIndexer(box, global_box=rbox)
            true_cols = ridx.lin_index(ridx.coords)
        cert.R = cert.R[:, true_cols].tocsr()
        cert.n = len(true_cols)
        cert.R_norm = min(cert.R_norm, _max_col_norm(cert.R))
        _balance(cert)
    else:
        cert.n = box.size()
    cert.provenance = {"op": "ap-family", "N": box.N, "rounded": rbox.N,
                       "value": cert.value, "f": fres.value,
                       "ratio": cert.value / fres.value,
                       "children": [pa.provenance]}
    return cert


def _lin_to_coords(idx: np.ndarray, box: BoxSpec) -> np.ndarray:
    out = np.zeros((idx.size, box.dim), dtype=np.int64)
    rem = idx.copy()
    for i in range(box.dim - 1, -1, -1):
        out[:, i] = rem % box.N[i] + 1
        rem //= box.N[i]
    return out


def _chain_step(pts: np.ndarray) -> np.ndarray:
    """Common step of an AP given lexicographically sorted points.

    For the sign-canonical step (first nonzero coordinate positive) the
    lexicographic order coincides with the progression order, so the
    step is the gap between the first two points.
    """
    cand = pts[1] - pts[0]
    if not all(np.array_equal(pts[0] + i * cand, pts[i])
               for i in range(pts.shape[0])):
        raise ConstructionError("point set is not an arithmetic progression")
    return cand


# ---------------------------------------------------------------------------
# spectral lower bounds

@dataclass(frozen=True)
class SpectralBounds:
    """SVD-based lower bounds for the gamma_2 sandwich."""

    nuclear_over_sqrt_mn: float
    sigma_min_disc_lb: float


def spectral_lower_bounds(S: SetSystem,
                          guard: int = 10_000_000) -> SpectralBounds:
    """nuclear norm / sqrt(mn) <= gamma_2(A); sigma_min * sqrt(n/m) <= disc."""
    m, n = len(S), len(S.universe)
    if m == 0 or n == 0:
        return SpectralBounds(0.0, 0.0)
    if m * n > guard:
        raise ResourceLimitError("matrix too large for dense SVD (%d)" % (m * n),
                                 count=m * n)
    A = S.incidence_matrix().toarray()
    sv = np.linalg.svd(A, compute_uv=False)
    nuclear = float(sv.sum()) / math.sqrt(m * n)
    smin = float(sv[-1]) if m >= n else 0.0
    return SpectralBounds(nuclear_over_sqrt_mn=nuclear,
                          sigma_min_disc_lb=smin * math.sqrt(n / m))


# ---------------------------------------------------------------------------
# export

def certificate_document(F: FactorizationCertificate) -> dict:
    """Serializable summary: construction tree, dims, value, residual."""
    doc = {
        "value": F.value,
        "left_norm": F.L_norm,
        "right_norm": F.R_norm,
        "rows": F.m,
        "inner_dim": F.k,
        "columns": F.n,
        "mode": F.mode,
        "construction": F.provenance,
    }
    if F.mode == "full" and F.target is not None:
        doc["max_residual"] = F.residual()
    return doc

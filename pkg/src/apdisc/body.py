"""Rational-vertex polytopes, lattice points, and the counting function zeta.

A body K is the convex hull of exact rational vertices.  This module
provides membership (exact LP feasibility), lattice-point enumeration,
the difference body K-K, zeta(t) = |Z^d cap t(K-K)|, the threshold
quantity f(K) = sqrt(s*) with s* = inf{s : s >= zeta(1/s)}, and maximal
arithmetic progressions inside bodies.  No floating point is used in
any membership or counting decision.
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .apgen import CanonicalAP, APDescriptor, canonicalize, canonical_step
from .core import LatticePoint, SetSystem, Universe
from .errors import DomainError, ResourceLimitError, StructuralError
from .simplex import feasible_convex_combination, max_ray_scale

DEFAULT_POINT_GUARD = 2_000_000

_INF = Fraction(10) ** 30  # stand-in for rho(0) = infinity in sort keys


def _frac_vec(v) -> Tuple[Fraction, ...]:
    return tuple(Fraction(x) for x in v)


@dataclass
class Polytope:
    """Convex hull of exact rational vertices (V-representation)."""

    vertices: List[Tuple[Fraction, ...]]
    _rho_cache: Dict[Tuple[int, ...], Fraction] = field(
        default_factory=dict, repr=False, compare=False)

    def __init__(self, vertices: Sequence[Sequence]):
        vs = [_frac_vec(v) for v in vertices]
        if not vs:
            raise StructuralError("polytope needs at least one vertex")
        d = len(vs[0])
        if d < 1 or any(len(v) != d for v in vs):
            raise StructuralError("inconsistent vertex dimensions")
        seen = set()
        uniq = []
        for v in vs:
            if v not in seen:
                seen.add(v)
                uniq.append(v)
        self.vertices = uniq
        self._rho_cache = {}

    @property
    def dim(self) -> int:
        return len(self.vertices[0])

    def bounding_box(self) -> Tuple[Tuple[Fraction, ...], Tuple[Fraction, ...]]:
        lo = tuple(min(v[j] for v in self.vertices) for j in range(self.dim))
        hi = tuple(max(v[j] for v in self.vertices) for j in range(self.dim))
        return lo, hi

    def contains(self, x: Sequence) -> bool:
        x = _frac_vec(x)
        if len(x) != self.dim:
            raise StructuralError("dimension mismatch")
        lo, hi = self.bounding_box()
        if any(xi < l or xi > h for xi, l, h in zip(x, lo, hi)):
            return False
        return feasible_convex_combination(self.vertices, x)

    def is_symmetric(self) -> bool:
        """Whether -v lies in the body for every vertex v."""
        return all(self.contains(tuple(-c for c in v)) for v in self.vertices)

    def ray_scale(self, z: Sequence[int]) -> Fraction:
        """max{t >= 0 : t*z in body}; _INF for z = 0.  Memoized.

        Requires 0 in the body (true for difference bodies).
        """
        z = tuple(int(c) for c in z)
        if not any(z):
            return _INF
        key = canonical_step(z)
        rho = self._rho_cache.get(key)
        if rho is None:
            val = max_ray_scale(self.vertices, key)
            rho = val if val is not None else Fraction(0)
            self._rho_cache[key] = rho
        return rho


@dataclass
class ShiftedBody:
    """The translate v + K of a polytope K."""

    base: Polytope
    shift: Tuple[Fraction, ...]

    def __init__(self, base: Polytope, shift: Optional[Sequence] = None):
        self.base = base
        self.shift = _frac_vec(shift if shift is not None
                               else [0] * base.dim)
        if len(self.shift) != base.dim:
            raise StructuralError("shift dimension mismatch")

    @property
    def dim(self) -> int:
        return self.base.dim

    def contains(self, x: Sequence) -> bool:
        x = _frac_vec(x)
        if len(x) != self.dim:
            raise StructuralError("dimension mismatch")
        return self.base.contains(tuple(a - s for a, s in zip(x, self.shift)))


def contains(body, x) -> bool:
    """Membership oracle for Polytope or ShiftedBody."""
    return body.contains(x)


def _lattice_box(lo: Sequence[Fraction], hi: Sequence[Fraction]):
    """Integer grid covering the rational box [lo, hi]."""
    ranges = [range(math.ceil(l), math.floor(h) + 1) for l, h in zip(lo, hi)]
    return itertools.product(*ranges)


def integer_points(B, guard: int = DEFAULT_POINT_GUARD) -> Universe:
    """All lattice points in the body, in lexicographic order."""
    if isinstance(B, Polytope):
        B = ShiftedBody(B)
    lo, hi = B.base.bounding_box()
    lo = tuple(l + s for l, s in zip(lo, B.shift))
    hi = tuple(h + s for h, s in zip(hi, B.shift))
    total = 1
    for l, h in zip(lo, hi):
        total *= max(0, math.floor(h) - math.ceil(l) + 1)
    if total > guard:
        raise ResourceLimitError(
            "bounding box holds %d lattice points (guard %d)" % (total, guard),
            count=total)
    pts = [p for p in _lattice_box(lo, hi) if B.contains(p)]
    return Universe(pts)


def difference_body(P: Polytope) -> Polytope:
    """K-K, generated by all pairwise vertex differences."""
    gens = [tuple(a - b for a, b in zip(v, w))
            for v in P.vertices for w in P.vertices]
    return Polytope(gens)


@dataclass(frozen=True)
class ZetaEvaluation:
    """zeta(t) = |Z^d cap t(K-K)| at one scale t."""

    t: Fraction
    count: int


def zeta(P_diff: Polytope, t) -> ZetaEvaluation:
    """Exact lattice count in t * P_diff for a symmetric body P_diff.

    A point z is in t(K-K) iff its exit scale rho(z) = max{u: uz in K-K}
    satisfies rho(z) >= 1/t, so counts at many t reuse one exact LP per
    lattice direction.  Symmetry pairs z with -z, so the count is
    1 + 2 * (number of sign-canonical nonzero points inside).
    """
    t = Fraction(t)
    if t < 0:
        raise DomainError("scale t must be >= 0")
    if t == 0:
        return ZetaEvaluation(t, 1)
    lo, hi = P_diff.bounding_box()
    lo = tuple(t * l for l in lo)
    hi = tuple(t * h for h in hi)
    count = 1
    inv = 1 / t
    for z in _lattice_box(lo, hi):
        if any(z) and canonical_step(z) == z and P_diff.ray_scale(z) >= inv:
            count += 2
    return ZetaEvaluation(t, count)


@dataclass(frozen=True)
class FKResult:
    """The threshold s* = inf{s : s >= zeta(1/s)} and f(K) = sqrt(s*).

    ``bracket`` = (s_lo, s_hi): the condition s >= zeta(1/s) fails at
    s_lo and holds at s_hi, with s_lo <= s_star <= s_hi.  When the
    infimum is attained, s_hi == s_star; otherwise s_lo == s_star (the
    condition fails at s_star itself and holds just above).  In the
    degenerate case s_star = 1 with zeta identically 1 there is nothing
    below to fail, and s_lo == s_hi == 1.
    """

    s_star: Fraction
    f_K: float
    bracket: Tuple[Fraction, Fraction]
    attained: bool


def f_K(P: Polytope) -> FKResult:
    """Compute s* exactly by scanning the breakpoints of s -> zeta(1/s).

    zeta(1/s) counts lattice points z with rho(z) >= s, a nonincreasing
    step function whose jumps sit at the rational exit scales rho(z) of
    the lattice points of K-K (only those matter, since s* >= 1).  The
    crossing with the identity is located by an interval scan: it is
    either an integer count value (attained) or a breakpoint (infimum
    not attained).
    """
    diff = difference_body(P)
    # lattice points with rho >= 1, one per +/- pair
    lo, hi = diff.bounding_box()
    rhos: List[Fraction] = []
    for z in _lattice_box(lo, hi):
        if any(z) and canonical_step(z) == z:
            r = diff.ray_scale(z)
            if r >= 1:
                rhos.append(r)
    # g(s) = zeta(1/s) = 1 + 2*#{rho >= s} on s >= 1
    breaks = sorted(set(rhos))

    def g(s: Fraction) -> int:
        return 1 + 2 * sum(1 for r in rhos if r >= s)

    # g is constant on [1, b_1] (value g(1)) and on each (b_k, b_{k+1}]
    # (value 1 + 2*#{rho > b_k}); scan intervals for the identity crossing
    intervals = []
    pts = [Fraction(1)] + [b for b in breaks if b > 1]
    for k, lo_s in enumerate(pts):
        hi_s = pts[k + 1] if k + 1 < len(pts) else None
        if k == 0:
            val = g(Fraction(1))
            closed_lo = True
        else:
            val = 1 + 2 * sum(1 for r in rhos if r > lo_s)
            closed_lo = False
        intervals.append((lo_s, hi_s, val, closed_lo))
    for lo_s, hi_s, val, closed_lo in intervals:
        v = Fraction(val)
        if closed_lo and lo_s >= v:
            s_star = lo_s
            return FKResult(s_star, math.sqrt(s_star), (s_star, s_star), True)
        if not closed_lo and lo_s >= v:
            # condition holds just above lo_s but fails at lo_s
            s_star = lo_s
            return FKResult(s_star, math.sqrt(s_star), (s_star, s_star), False)
        if (hi_s is None or v <= hi_s) and v > lo_s:
            s_star = v
            s_lo = (lo_s + v) / 2 if v > lo_s else lo_s
            return FKResult(s_star, math.sqrt(s_star), (s_lo, s_star), True)
    raise DomainError("threshold scan failed")  # pragma: no cover


def maximal_ap_in_body(a: LatticePoint, b: Sequence[int], B) -> CanonicalAP:
    """Maximal AP with step b through a inside a convex body.

    Convexity makes {i : a+ib in B} an interval of integers, so the
    extension stops at the first exit in each direction.
    """
    if isinstance(B, Polytope):
        B = ShiftedBody(B)
    a = tuple(int(c) for c in a)
    if not B.contains(a):
        raise DomainError("start point outside the body")
    if not any(b):
        raise DomainError("maximal AP needs a nonzero step")
    b = tuple(int(c) for c in b)
    lo = a
    while True:
        prv = tuple(x - s for x, s in zip(lo, b))
        if not B.contains(prv):
            break
        lo = prv
    pts = [lo]
    while True:
        nxt = tuple(x + s for x, s in zip(pts[-1], b))
        if not B.contains(nxt):
            break
        pts.append(nxt)
    return canonicalize(APDescriptor(lo, b, len(pts)))


def enumerate_maximal_aps_in_body(B, guard: int = DEFAULT_POINT_GUARD) -> SetSystem:
    """The family M_K of maximal APs among the lattice points of a body.

    A 2-point AP {x, x+b} forces b in K-K, so step vectors range over the
    sign-canonical nonzero lattice points of the difference body.  Each
    step partitions the lattice points into chains; chains of length one
    contribute a deduplicated pool of singletons.
    """
    if isinstance(B, Polytope):
        B = ShiftedBody(B)
    uni = integer_points(B, guard=guard)
    idx = {p: i for i, p in enumerate(uni.points)}
    diff = difference_body(B.base)
    lo, hi = diff.bounding_box()
    steps = [z for z in _lattice_box(lo, hi)
             if any(z) and canonical_step(z) == z and diff.ray_scale(z) >= 1]
    chains: List[List[int]] = []
    singletons = set()
    for b in steps:
        for p in uni.points:
            prv = tuple(x - s for x, s in zip(p, b))
            if prv in idx:
                continue
            chain = [idx[p]]
            cur = p
            while True:
                nxt = tuple(x + s for x, s in zip(cur, b))
                j = idx.get(nxt)
                if j is None:
                    break
                chain.append(j)
                cur = nxt
            if len(chain) >= 2:
                chains.append(chain)
            else:
                singletons.add(chain[0])
    if not steps:
        singletons = set(range(len(uni)))
    sets = chains + [[i] for i in sorted(singletons)]
    return SetSystem.from_lists(uni, sets)


@dataclass(frozen=True)
class MaxShiftReport:
    """Per-shift lattice counts checked against zeta(1)."""

    zeta1: int
    shift_counts: List[Tuple[Tuple[Fraction, ...], int]]
    max_count: int
    ok: bool
    max_ratio: float  # max count / zeta(1), reported not asserted


def check_zeta_maxshift(P: Polytope, samples: Sequence[Sequence]) -> MaxShiftReport:
    """Check |Z^d cap (v+K)| <= zeta(1) for each sampled shift v."""
    diff = difference_body(P)
    z1 = zeta(diff, 1).count
    rows = []
    mx = 0
    for v in samples:
        cnt = len(integer_points(ShiftedBody(P, v)))
        rows.append((_frac_vec(v), cnt))
        mx = max(mx, cnt)
    return MaxShiftReport(zeta1=z1, shift_counts=rows, max_count=mx,
                          ok=mx <= z1, max_ratio=mx / z1)


@dataclass(frozen=True)
class ScalingReport:
    """zeta monotonicity and the explicit (4t+1)^d scaling bound."""

    t: Fraction
    zeta1: int
    zeta_t: int
    upper: Fraction  # (4t+1)^d * zeta(1)
    ok: bool


def check_zeta_scaling(P_sym: Polytope, t) -> ScalingReport:
    """Check zeta(1) <= zeta(t) <= (4t+1)^d zeta(1) for symmetric bodies."""
    t = Fraction(t)
    if t < 1:
        raise DomainError("scaling check needs t >= 1")
    if not P_sym.is_symmetric():
        raise DomainError("scaling check needs a symmetric body")
    z1 = zeta(P_sym, 1).count
    zt = zeta(P_sym, t).count
    upper = (4 * t + 1) ** P_sym.dim * z1
    ok = z1 <= zt and zt <= upper
    return ScalingReport(t=t, zeta1=z1, zeta_t=zt, upper=upper, ok=ok)


def _parse_fraction(tok: str) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError) as e:
        raise StructuralError("non-rational token %r in polytope file" % tok) from e


def parse_polytope(text: str) -> ShiftedBody:
    """Parse the polytope text format.

    Lines (order free, '#' comments allowed):
        dim d
        vertex c_1 ... c_d      (one line per vertex, exact rationals p/q)
        shift c_1 ... c_d       (optional, defaults to 0)
    """
    dim = None
    verts: List[Tuple[Fraction, ...]] = []
    shift = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kw = parts[0].lower()
        if kw == "dim":
            if len(parts) != 2:
                raise StructuralError("dim line needs one integer")
            dim = int(parts[1])
        elif kw in ("vertex", "shift"):
            vec = tuple(_parse_fraction(p) for p in parts[1:])
            if dim is not None and len(vec) != dim:
                raise StructuralError("coordinate count differs from dim")
            if kw == "vertex":
                verts.append(vec)
            elif shift is None:
                shift = vec
            else:
                raise StructuralError("duplicate shift line")
        else:
            raise StructuralError("unknown keyword %r" % kw)
    if not verts:
        raise StructuralError("polytope file has no vertices")
    return ShiftedBody(Polytope(verts), shift)


def load_polytope(path: str) -> ShiftedBody:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_polytope(fh.read())


def format_polytope(B: ShiftedBody) -> str:
    lines = ["dim %d" % B.dim]
    for v in B.base.vertices:
        lines.append("vertex " + " ".join(str(c) for c in v))
    if any(B.shift):
        lines.append("shift " + " ".join(str(c) for c in B.shift))
    return "\n".join(lines) + "\n"


def box_polytope(N: Sequence[int]) -> Polytope:
    """The box [1,N_1] x ... x [1,N_d] as a polytope."""
    return Polytope(list(itertools.product(*((1, n) if n > 1 else (1,)
                                             for n in N))))

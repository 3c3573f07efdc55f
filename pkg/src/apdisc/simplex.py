"""Exact rational linear programming (dense two-phase simplex).

Small helper used for polytope membership and ray-scaling queries.
Arithmetic is exact: tableau entries are gmpy2 rationals internally,
with `fractions.Fraction` at the API boundary.  Bland's rule guarantees
termination.
"""

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from gmpy2 import mpq

from .errors import DomainError, StructuralError

Status = str  # "optimal" | "infeasible" | "unbounded"


def _to_mpq_matrix(A) -> List[List[mpq]]:
    return [[mpq(x) for x in row] for row in A]


def _pivot(T: List[List[mpq]], basis: List[int], r: int, c: int):
    piv = T[r][c]
    row = T[r]
    inv = 1 / piv
    for j in range(len(row)):
        row[j] *= inv
    for i in range(len(T)):
        if i == r:
            continue
        f = T[i][c]
        if f:
            Ti = T[i]
            for j in range(len(row)):
                Ti[j] -= f * row[j]
    basis[r] = c


def _run_simplex(T: List[List[mpq]], basis: List[int], ncols: int) -> Status:
    """Minimize the objective in the last tableau row (Bland's rule)."""
    m = len(T) - 1
    obj = T[m]
    while True:
        c = next((j for j in range(ncols) if obj[j] < 0), None)
        if c is None:
            return "optimal"
        r, best = None, None
        for i in range(m):
            if T[i][c] > 0:
                ratio = T[i][ncols] / T[i][c]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[r]):
                    r, best = i, ratio
        if r is None:
            return "unbounded"
        _pivot(T, basis, r, c)


def solve_lp(A, b, c) -> Tuple[Status, Optional[Fraction], Optional[List[Fraction]]]:
    """max c.x  s.t.  A x <= b,  x free (split into x+ - x-).

    Returns (status, optimal value, an optimal x) with exact rationals.
    """
    A = _to_mpq_matrix(A)
    bq = [mpq(v) for v in b]
    cq = [mpq(v) for v in c]
    m = len(A)
    if m == 0 or any(len(row) != len(cq) for row in A):
        raise StructuralError("inconsistent LP dimensions")
    n = len(cq)
    # variables: x+ (n), x- (n), slacks (m), then artificials as needed
    for i in range(m):
        if bq[i] < 0:
            A[i] = [-x for x in A[i]]
            bq[i] = -bq[i]
            slack_sign = -1
        else:
            slack_sign = 1
        A[i] = ([x for x in A[i]] + [-x for x in A[i]]
                + [mpq(slack_sign) if j == i else mpq(0) for j in range(m)])
    width = 2 * n + m
    # artificial variable per row whose slack cannot serve as a basis column
    art_cols = {}
    for i in range(m):
        if A[i][2 * n + i] == 1:
            continue
        art_cols[i] = width
        width += 1
    T = []
    for i in range(m):
        row = list(A[i]) + [mpq(0)] * (width - len(A[i])) + [bq[i]]
        if i in art_cols:
            row[art_cols[i]] = mpq(1)
        T.append(row)
    basis = [art_cols.get(i, 2 * n + i) for i in range(m)]
    if art_cols:
        # phase 1: minimize sum of artificials
        obj = [mpq(0)] * (width + 1)
        for col in art_cols.values():
            obj[col] = mpq(1)
        for i in art_cols:
            for j in range(width + 1):
                obj[j] -= T[i][j]
        T.append(obj)
        st = _run_simplex(T, basis, width)
        if st != "optimal" or T[m][width] < 0:
            return "infeasible", None, None
        T.pop()
        # drive any artificial out of the basis
        for i in range(m):
            if basis[i] >= 2 * n + m:
                c2 = next((j for j in range(2 * n + m) if T[i][j] != 0), None)
                if c2 is not None:
                    _pivot(T, basis, i, c2)
        arts = set(art_cols.values())
        keep = [j for j in range(width) if j not in arts] + [width]
        remap = {old: new for new, old in enumerate(keep[:-1])}
        T = [[row[j] for j in keep] for row in T]
        basis = [remap[bcol] for bcol in basis]
        width = 2 * n + m
    # phase 2: minimize -c.x
    obj = [mpq(0)] * (width + 1)
    for j in range(n):
        obj[j] = -cq[j]
        obj[n + j] = cq[j]
    for i in range(m):
        f = obj[basis[i]]
        if f:
            for j in range(width + 1):
                obj[j] -= f * T[i][j]
    T.append(obj)
    st = _run_simplex(T, basis, width)
    if st == "unbounded":
        return "unbounded", None, None
    val = T[m][width]
    x = [mpq(0)] * (2 * n)
    for i in range(m):
        if basis[i] < 2 * n:
            x[basis[i]] = T[i][width]
    sol = [Fraction((x[j] - x[n + j]).numerator, (x[j] - x[n + j]).denominator)
           for j in range(n)]
    return "optimal", Fraction(val.numerator, val.denominator), sol


def feasible_convex_combination(vertices: Sequence[Sequence], target: Sequence,
                                scale=1) -> bool:
    """Is target in scale * conv(vertices)?  Exact rational feasibility."""
    vs = [[Fraction(x) * Fraction(scale) for x in v] for v in vertices]
    if not vs:
        return False
    d = len(vs[0])
    t = [Fraction(x) for x in target]
    if len(t) != d:
        raise StructuralError("dimension mismatch")
    k = len(vs)
    # variables lambda_1..lambda_k >= 0; sum lambda = 1; sum lambda v = t
    # encode as inequalities: +/- equality rows, and -lambda_i <= 0
    A, b = [], []
    for eq_row, rhs in ([[Fraction(1)] * k, Fraction(1)],) + tuple(
            ([v[j] for v in vs], t[j]) for j in range(d)):
        A.append(eq_row)
        b.append(rhs)
        A.append([-x for x in eq_row])
        b.append(-rhs)
    for i in range(k):
        A.append([Fraction(-1) if j == i else Fraction(0) for j in range(k)])
        b.append(Fraction(0))
    status, _, _ = solve_lp(A, b, [Fraction(0)] * k)
    return status == "optimal"


def max_ray_scale(vertices: Sequence[Sequence], z: Sequence) -> Optional[Fraction]:
    """max {t >= 0 : t*z in conv(vertices)}, or None if empty (t=0 excluded).

    Requires 0 in conv(vertices); returns None when no t > 0 works and
    0 itself is outside.  Unbounded directions cannot occur for a
    bounded polytope, but are reported as a DomainError defensively.
    """
    vs = [[Fraction(x) for x in v] for v in vertices]
    if not vs:
        return None
    d = len(vs[0])
    zf = [Fraction(x) for x in z]
    k = len(vs)
    # variables: lambda_1..lambda_k >= 0, t >= 0;  sum lambda = 1;
    # sum lambda v - t z = 0;  maximize t
    A, b = [], []
    ones = [Fraction(1)] * k + [Fraction(0)]
    A.append(ones); b.append(Fraction(1))
    A.append([-x for x in ones]); b.append(Fraction(-1))
    for j in range(d):
        row = [v[j] for v in vs] + [-zf[j]]
        A.append(row); b.append(Fraction(0))
        A.append([-x for x in row]); b.append(Fraction(0))
    for i in range(k + 1):
        A.append([Fraction(-1) if j == i else Fraction(0) for j in range(k + 1)])
        b.append(Fraction(0))
    c = [Fraction(0)] * k + [Fraction(1)]
    status, val, _ = solve_lp(A, b, c)
    if status == "infeasible":
        return None
    if status == "unbounded":
        raise DomainError("ray scaling unbounded; polytope input not bounded")
    return val

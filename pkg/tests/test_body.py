"""Convex bodies: lattice counting, thresholds, progression families."""

from fractions import Fraction

import pytest

from apdisc.body import (Polytope, ShiftedBody, box_polytope,
                         check_zeta_maxshift, check_zeta_scaling,
                         difference_body, enumerate_maximal_aps_in_body, f_K,
                         format_polytope, integer_points, parse_polytope,
                         zeta)
from apdisc.errors import DomainError, StructuralError


def test_polytope_contains_and_symmetry():
    P = Polytope([[-1, 0], [1, 0], [0, -1], [0, 1]])
    assert P.contains((0, 0))
    assert P.contains((Fraction(1, 2), Fraction(1, 2)))
    assert not P.contains((1, 1))
    assert P.is_symmetric()
    assert not Polytope([[0, 0], [1, 0], [0, 1]]).is_symmetric()


def test_integer_points_interval():
    B = ShiftedBody(Polytope([[1], [4]]))
    assert sorted(p[0] for p in integer_points(B).points) == [1, 2, 3, 4]
    # a narrow shifted body with no lattice points
    B2 = ShiftedBody(Polytope([[Fraction(1, 3)], [Fraction(2, 3)]]))
    assert len(integer_points(B2)) == 0


def test_difference_body_symmetric():
    P = Polytope([[0, 0], [3, 0], [0, 2]])
    D = difference_body(P)
    assert D.is_symmetric()
    assert D.contains((3, -2)) and D.contains((-3, 2))


def test_zeta_interval_formula():
    # t(K-K) for K = [1, N] is [-t(N-1), t(N-1)]
    for N in (4, 7, 10):
        D = difference_body(Polytope([[1], [N]]))
        for t in (Fraction(1, 3), Fraction(1), Fraction(5, 2)):
            assert zeta(D, t).count == 2 * int(t * (N - 1)) + 1


def test_f_K_interval_examples():
    r = f_K(Polytope([[1], [4]]))
    assert r.s_star == 3 and r.attained
    assert abs(r.f_K - 3 ** 0.5) < 1e-12
    r = f_K(Polytope([[1], [16]]))
    assert r.s_star == 5 and not r.attained
    r = f_K(Polytope([[2], [2]]))
    assert r.s_star == 1


def test_f_K_tracks_box_threshold():
    # the body threshold uses the symmetrized difference body, so it can
    # exceed the box threshold by a bounded constant but never stray far
    from apdisc.gamma2 import f_of_N
    for N in ((9,), (16,), (5, 4), (8, 8)):
        got = f_K(box_polytope(N)).f_K
        want = f_of_N(N).value
        assert 0.7 * want <= got <= 2.0 * want


def test_maximal_aps_in_body_match_box():
    from apdisc.apgen import BoxSpec, enumerate_maximal_aps
    N = (3, 3)
    B = ShiftedBody(box_polytope(N))
    S_body = enumerate_maximal_aps_in_body(B)
    S_box = enumerate_maximal_aps(BoxSpec(N))
    def rows(S):
        return {frozenset(tuple(int(c) for c in S.universe.points[j])
                          for j in S.set_indices(i)) for i in range(len(S))}
    assert rows(S_body) == rows(S_box)


def test_zeta_maxshift_lemma():
    P = Polytope([[0, 0], [3, 0], [0, 3]])
    shifts = [(0, 0), (Fraction(1, 2), 0), (Fraction(1, 3), Fraction(2, 3))]
    rep = check_zeta_maxshift(P, shifts)
    assert rep.ok
    assert rep.max_count <= rep.zeta1


def test_zeta_scaling_lemma():
    P = Polytope([[-2, 0], [2, 0], [0, -1], [0, 1]])
    for t in (1, 2, Fraction(7, 2)):
        rep = check_zeta_scaling(P, t)
        assert rep.ok
    with pytest.raises(DomainError):
        check_zeta_scaling(P, Fraction(1, 2))
    with pytest.raises(DomainError):
        check_zeta_scaling(Polytope([[0, 0], [1, 0], [0, 1]]), 2)


def test_polytope_file_roundtrip():
    B = ShiftedBody(Polytope([[0, 0], [3, 0], [0, 2]]),
                    (Fraction(1, 2), Fraction(-1, 3)))
    text = format_polytope(B)
    C = parse_polytope(text)
    assert C.base.vertices == B.base.vertices
    assert C.shift == B.shift


def test_polytope_parse_errors():
    with pytest.raises(StructuralError):
        parse_polytope("dim 2\nvertex 0 zebra\n")
    with pytest.raises(StructuralError):
        parse_polytope("dim 2\nvertex 0\n")
    with pytest.raises(StructuralError):
        parse_polytope("dim 1\n")

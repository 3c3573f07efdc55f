"""Set-system container and discrepancy evaluation oracles."""

import numpy as np
import pytest

from apdisc.apgen import BoxSpec, enumerate_maximal_aps, lex_order
from apdisc.core import (Coloring, SetSystem, chi_sum, concat_systems,
                         disc_eval, pdisc_eval, random_coloring,
                         subinterval_max_disc)
from apdisc.errors import StructuralError


def _tiny_system():
    u = BoxSpec((4,)).universe()
    return SetSystem.from_lists(u, [[0, 1], [1, 2, 3], [0, 2]])


def test_from_lists_roundtrip():
    S = _tiny_system()
    assert len(S) == 3
    assert list(S.set_indices(1)) == [1, 2, 3]
    assert sorted(S.sizes()) == [2, 2, 3]


def test_coloring_rejects_non_signs():
    with pytest.raises(StructuralError):
        Coloring(values=np.array([1, 0, -1]))


def test_disc_eval_matches_definition():
    S = _tiny_system()
    rng = np.random.Generator(np.random.Philox(5))
    for _ in range(20):
        chi = Coloring((rng.integers(0, 2, 4) * 2 - 1).astype(np.int8))
        expect = max(abs(int(chi.values[list(S.set_indices(i))].sum()))
                     for i in range(len(S)))
        assert disc_eval(S, chi) == expect


def test_chi_sum_exact():
    chi = Coloring(np.array([1, -1, 1, -1], dtype=np.int8))
    assert chi_sum([0, 2], chi) == 2
    assert chi_sum([0, 1], chi) == 0


def test_pdisc_matches_prefix_scan():
    box = BoxSpec((6,))
    S = enumerate_maximal_aps(box)
    sigma = lex_order(box.universe())
    for seed in range(10):
        chi = random_coloring(box.size(), seed=seed)
        best = 0
        for i in range(len(S)):
            idx = S.set_indices(i)
            order = idx[np.argsort(sigma.rank[idx], kind="stable")]
            run = 0
            for j in order:
                run += int(chi.values[j])
                best = max(best, abs(run))
        assert pdisc_eval(S, sigma, chi) == best


def test_subinterval_max_disc_brute():
    box = BoxSpec((8,))
    S = enumerate_maximal_aps(box)
    for seed in range(10):
        chi = random_coloring(box.size(), seed=seed)
        best = 0
        for i in range(len(S)):
            idx = list(S.set_indices(i))
            for a in range(len(idx)):
                for b in range(a, len(idx)):
                    best = max(best, abs(int(chi.values[idx[a:b + 1]].sum())))
        assert subinterval_max_disc(S, chi) == best


def test_concat_systems_preserves_rows():
    S = _tiny_system()
    T = concat_systems([S, S])
    assert len(T) == 6
    assert list(T.set_indices(4)) == list(S.set_indices(1))


def test_random_coloring_deterministic():
    a = random_coloring(32, seed=9)
    b = random_coloring(32, seed=9)
    assert np.array_equal(a.values, b.values)

"""Walk rounding and exact brute force."""

import math

import numpy as np
import pytest

from apdisc.apgen import BoxSpec, enumerate_all_aps, enumerate_maximal_aps, lex_order
from apdisc.core import disc_eval, pdisc_eval, random_coloring
from apdisc.errors import DomainError, ResourceLimitError, StructuralError
from apdisc.gamma2 import ap_cert
from apdisc.walk import (ap_family_disc, ap_family_size, brute_force_min_disc,
                         brute_force_min_pdisc, gamma2_coloring, gs_walk)


def test_gs_walk_deterministic_and_signed():
    R = np.eye(10) * 0.7
    a = gs_walk(R, seed=3)
    b = gs_walk(R, seed=3)
    assert np.array_equal(a, b)
    assert set(np.unique(a)) <= {-1, 1}


def test_gs_walk_orthonormal_marginals():
    # for orthogonal columns every coordinate is a fair coin
    hits = np.zeros(5)
    for s in range(400):
        hits += gs_walk(np.eye(5), seed=s) == 1
    assert np.all(np.abs(hits / 400 - 0.5) < 0.1)


def test_gs_walk_step_probabilities():
    log = []
    gs_walk(np.random.default_rng(1).random((4, 8)) / 4, seed=2, log=log)
    for d_plus, d_minus, p_plus, choice in log:
        assert d_plus >= 0 and d_minus >= 0
        assert abs(p_plus - d_minus / (d_plus + d_minus)) < 1e-12
        assert choice in (-1, 1)


def test_gs_walk_input_validation():
    with pytest.raises(DomainError):
        gs_walk(np.array([[1.5]]), seed=0)
    with pytest.raises(StructuralError):
        gs_walk(np.array([[np.nan]]), seed=0)


def test_brute_force_box4():
    S = enumerate_all_aps(BoxSpec((4,)))
    r = brute_force_min_disc(S)
    assert r.min_disc == 2
    assert r.evaluated == 8
    assert disc_eval(S, r.witness) == 2


def test_brute_force_respects_limit():
    S = enumerate_all_aps(BoxSpec((27,)))
    with pytest.raises(ResourceLimitError):
        brute_force_min_disc(S)


def test_brute_force_pdisc():
    box = BoxSpec((6,))
    M = enumerate_maximal_aps(box)
    sigma = lex_order(box.universe())
    r = brute_force_min_pdisc(M, sigma)
    assert pdisc_eval(M, sigma, r.witness) == r.min_disc
    # reduction: disc over all APs is at most twice the prefix optimum
    A = enumerate_all_aps(box)
    assert brute_force_min_disc(A).min_disc <= 2 * r.min_disc


def test_ap_family_helpers_match_enumeration():
    for N in ((7,), (4, 3)):
        box = BoxSpec(N)
        S = enumerate_all_aps(box)
        assert ap_family_size(box) == len(S)
        for seed in range(3):
            chi = random_coloring(box.size(), seed=seed)
            assert ap_family_disc(box, chi) == disc_eval(S, chi)


def test_gamma2_coloring_report():
    box = BoxSpec((32,))
    S = enumerate_all_aps(box)
    F = ap_cert(box, mode="right")
    chi, rep = gamma2_coloring(S, F, seed=5)
    assert rep["disc"] == disc_eval(S, chi)
    assert rep["ratio"] == rep["disc"] / rep["bound_scale"]
    chi2, _ = gamma2_coloring(S, F, seed=5)
    assert np.array_equal(chi.values, chi2.values)

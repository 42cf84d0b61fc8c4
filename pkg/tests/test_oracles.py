"""Perturbation-count oracles for intersection multiplicities and Milnor numbers."""

import pytest

from milnorsplit.oracles import (
    CycleFactor,
    halfcomplex_intersection_oracle,
    hopf_from_cycles,
    intersection_mult_analytic,
    local_degree,
    milnor_oracle,
)
from milnorsplit.registry import REGISTRY


@pytest.mark.parametrize("src, mu", [("z^2 + w^3", 2), ("z*w", 1), ("z^3 + w^3", 4), ("z^2 + w^5", 4)])
def test_milnor_numbers(src, mu):
    assert milnor_oracle(src) == mu


@pytest.mark.parametrize("h1, h2, n", [("z", "w", 1), ("2*z", "3*w^2", 2), ("z^2", "w^3", 6),
                                       ("z^2 + w^3", "z^3 + w^2", 4), ("z - w", "z + w", 1)])
def test_intersection_multiplicities(h1, h2, n):
    assert intersection_mult_analytic(h1, h2) == n


def test_off_center_point():
    # (z - 0.1)^2 and w meet with multiplicity 2 at (0.1, 0)
    assert intersection_mult_analytic("(z - 0.1)^2", "w", (0.1, 0, 0, 0)) == 2
    assert intersection_mult_analytic("(z - 0.1)^2", "w", (0, 0, 0, 0)) == 2


def test_local_degree_signs():
    assert local_degree("zb", "w") == -1
    assert local_degree("zb", "wb") == 1
    assert local_degree("zb^2", "w") == -2


def test_analytic_required():
    with pytest.raises(ValueError):
        intersection_mult_analytic("zb", "w")
    with pytest.raises(ValueError):
        milnor_oracle("z*zb + w^2")


def test_non_isolated_pair_counts_nothing():
    # isolation is a precondition: with a common curve {z = 0} the perturbed
    # solutions escape the polydisk and the count is 0
    assert local_degree("z*w", "z") == 0


def test_factor_kinds_checked():
    with pytest.raises(ValueError):
        CycleFactor("zb", "analytic")
    with pytest.raises(ValueError):
        CycleFactor("z", "conjugate-analytic")
    with pytest.raises(ValueError):
        CycleFactor("z", "weird")


def test_conjugate_bookkeeping_matches_local_degree():
    a = [CycleFactor("conj(z^2 + w^3)", "conjugate-analytic")]
    b = [CycleFactor("w")]
    assert halfcomplex_intersection_oracle(a, b) == local_degree("conj(z^2 + w^3)", "w") == -2


def test_disjoint_cycles():
    assert halfcomplex_intersection_oracle([CycleFactor("z - 1")], [CycleFactor("w")]) == 0


def test_trefoil_rho_from_cycles():
    plus = [CycleFactor("conj(3*w^2)", "conjugate-analytic")]
    minus = [CycleFactor("2*z")]
    assert hopf_from_cycles(plus, minus) == 2


def test_ex47_cycles():
    ann = REGISTRY["ex47-F"].oracle_annotations
    assert -hopf_from_cycles(*ann["lambda"]) == 1
    assert hopf_from_cycles(*ann["rho"]) == 2


def test_seed_independence():
    assert milnor_oracle("z^2 + w^3", seed=0) == milnor_oracle("z^2 + w^3", seed=7)

"""Parsing, evaluation and Wirtinger calculus of half-complex polynomial maps."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from milnorsplit.errors import CriticalPoint, ParseError
from milnorsplit.polymap import (
    critical_residual,
    eval_map,
    evaluate_node,
    isolatedness_probe,
    l_field,
    l_frame_route,
    l_star,
    parse_map,
    r_field,
    r_frame_route,
    r_star,
    real_differential,
    real_rows,
    wirtinger_differential,
)
from milnorsplit.quaternion import GRAM_TOL, I, gram_determinant
from milnorsplit.registry import ENTRIES, EX45_F, example47_family

EX47 = "(z^2 + w^3) * conj(z^3 + w^2)"


def random_points(n, seed, radius=2.0):
    rng = np.random.default_rng(seed)
    z = rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)
    w = rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)
    return radius / np.sqrt(2) * z, radius / np.sqrt(2) * w


# -- parsing and evaluation ----------------------------------------------------


def test_parse_examples():
    assert eval_map(parse_map("z^2 + w^3"), 1, 1) == 2
    assert eval_map(parse_map(EX45_F), 0, 0) == 0
    assert eval_map(parse_map(EX47), 1, 0) == 1


def test_eval_examples():
    m = parse_map("z^2+w^3")
    assert eval_map(m, 0, 0) == 0
    assert abs(eval_map(m, 1j, 1)) < 1e-15
    assert eval_map(parse_map("z*zb"), 3 + 4j, 0) == 25


def test_abs2_and_constants():
    m = parse_map("abs2(z - 2*i) + (1 + 2*i)*w")
    assert np.isclose(eval_map(m, 2j, 1), 1 + 2j)
    assert eval_map(parse_map("-z + +w"), 1, 2) == 1
    assert eval_map(parse_map("2.5e1*z"), 1, 0) == 25


@pytest.mark.parametrize(
    "src, pos",
    [("z^", 2), ("z + ", 4), ("(z + w", 6), ("z $ w", 2), ("q + z", 0), ("z^1.5", 2), ("conj z", 5)],
)
def test_parse_errors_have_positions(src, pos):
    with pytest.raises(ParseError) as info:
        parse_map(src)
    assert info.value.position == pos


def test_parse_error_expected_set():
    with pytest.raises(ParseError) as info:
        parse_map("(z + w")
    assert ")" in info.value.expected


def test_compiled_matches_tree_walk():
    z, w = random_points(200, 0)
    for e in ENTRIES:
        m = e.map
        assert np.allclose(m(z, w), evaluate_node(m.root, z, w), rtol=1e-12, atol=1e-12)


@settings(max_examples=30)
@given(st.sampled_from([e.map_src for e in ENTRIES] + ["z*wb - 3*i*zb^2", "abs2(w)*z"]),
       st.complex_numbers(max_magnitude=2), st.complex_numbers(max_magnitude=2))
def test_conj_node_conjugates(src, z, w):
    m = parse_map(src)
    assert np.isclose(m.conj()(z, w), np.conj(m(z, w)), rtol=1e-12, atol=1e-12)


def test_analytic_flag():
    assert parse_map("z^2 + w^3").is_analytic
    assert not parse_map("z*zb").is_analytic
    assert parse_map("conj(zb)").is_analytic


# -- differentials -------------------------------------------------------------


def test_wirtinger_examples():
    d = wirtinger_differential(parse_map("z^2+w^3"), 1, 1)
    assert d.as_tuple() == (2, 0, 3, 0)
    d = wirtinger_differential(parse_map("z*zb"), 2, 0)
    assert d.as_tuple() == (2, 2, 0, 0)


def test_ex47_differential_formula():
    m = parse_map(EX47)
    z, w = random_points(100, 1)
    f, g = z**2 + w**3, z**3 + w**2
    gb = np.conj(g)
    Fz, Fzb, Fw, Fwb = m.partials(z, w)
    assert np.allclose(Fz, 2 * z * gb)
    assert np.allclose(Fzb, 3 * np.conj(z) ** 2 * f)
    assert np.allclose(Fw, 3 * w**2 * gb)
    assert np.allclose(Fwb, 2 * np.conj(w) * f)


def _fd_wirtinger(m, z, w, h=1e-5):
    dx = (m(z + h, w) - m(z - h, w)) / (2 * h)
    dy = (m(z + 1j * h, w) - m(z - 1j * h, w)) / (2 * h)
    du = (m(z, w + h) - m(z, w - h)) / (2 * h)
    dv = (m(z, w + 1j * h) - m(z, w - 1j * h)) / (2 * h)
    return (dx - 1j * dy) / 2, (dx + 1j * dy) / 2, (du - 1j * dv) / 2, (du + 1j * dv) / 2


@pytest.mark.parametrize("src", [e.map_src for e in ENTRIES])
def test_wirtinger_vs_finite_differences(src):
    m = parse_map(src)
    z, w = random_points(1000, 2)
    exact = m.partials(z, w)
    approx = _fd_wirtinger(m, z, w)
    scale = sum(np.abs(e) for e in exact) + 1.0
    for e, a in zip(exact, approx):
        assert np.max(np.abs(e - a) / scale) < 1e-6


def test_real_rows_vs_finite_differences():
    m = parse_map(EX47)
    z, w = random_points(50, 3)
    h = 1e-6
    for zi, wi in zip(z, w):
        R = real_differential(m, zi, wi)
        cols = []
        for dz, dw in ((h, 0), (1j * h, 0), (0, h), (0, 1j * h)):
            d = (m(zi + dz, wi + dw) - m(zi - dz, wi - dw)) / (2 * h)
            cols.append([d.real, d.imag])
        fd = np.array(cols).T
        assert np.allclose(R, fd, rtol=1e-6, atol=1e-6 * np.abs(R).max())


# -- l and r fields ------------------------------------------------------------


def test_analytic_l_is_i():
    m = parse_map("z^2 + w^3")
    z, w = random_points(100, 4)
    for zi, wi in zip(z, w):
        assert l_field(m, zi, wi).isclose(I, tol=1e-12)
    d = wirtinger_differential(m, 0.3, 0.7j)
    assert d.Fzb == 0 and d.Fwb == 0


def test_field_examples():
    assert l_field(parse_map("zb"), 0.2, 0.1).isclose(-I)
    assert r_field(parse_map("zb"), 0.2, 0.1).isclose(-I)
    assert r_field(parse_map("z"), 0.2, 0.1).isclose(I)


def test_critical_point_raises():
    with pytest.raises(CriticalPoint):
        l_field(parse_map("z^2 + w^3"), 0, 0)


@pytest.mark.parametrize("src", [e.map_src for e in ENTRIES] + ["z*wb + 2*zb^2*w - i*w^2"])
def test_dual_route(src):
    m = parse_map(src)
    z, w = random_points(1000, 5)
    D = m.partials(z, w)
    Ls, Rs = l_star(*D), r_star(*D)
    R = real_rows(*D)
    checked = 0
    for k in range(len(z)):
        if gram_determinant(*R[k]) < GRAM_TOL:
            continue  # the frame route refuses these by design
        lv = Ls[k] / np.linalg.norm(Ls[k])
        rv = Rs[k] / np.linalg.norm(Rs[k])
        assert np.allclose(l_frame_route(m, z[k], w[k]).vector, lv, atol=1e-9)
        assert np.allclose(r_frame_route(m, z[k], w[k]).vector, rv, atol=1e-9)
        assert np.allclose(real_differential(m, z[k], w[k]), R[k])
        checked += 1
    assert checked > 900


def test_critical_residual_examples():
    assert critical_residual(parse_map("z^2+w^3"), 0, 0) == 0
    assert critical_residual(parse_map("z"), 0.4, -1j) == 1
    assert critical_residual(parse_map(EX45_F), 0, 0) == 0


# -- isolatedness probe ----------------------------------------------------------


def test_probe_trefoil():
    rep = isolatedness_probe(parse_map("z^2+w^3"), (0, 0, 0, 0), 0.1)
    assert rep.passed and rep.n_points >= 20**4


def test_probe_ex45():
    assert isolatedness_probe(parse_map(EX45_F), (0, 0, 0, 0), 0.05).passed


@pytest.mark.parametrize("abcd, ok", [((2, 3, 3, 2), True), ((2, 2, 2, 2), False), ((3, 2, 3, 2), False)])
def test_probe_ex47_family(abcd, ok):
    rep = isolatedness_probe(parse_map(example47_family(*abcd)), (0, 0, 0, 0), 0.1)
    assert rep.passed is ok


def test_probe_deterministic():
    m = parse_map(example47_family(2, 3, 3, 2))
    a = isolatedness_probe(m, (0, 0, 0, 0), 0.1, seed=0)
    b = isolatedness_probe(m, (0, 0, 0, 0), 0.1, seed=0)
    assert a == b


def test_probe_rejects_bad_radius():
    with pytest.raises(ValueError):
        isolatedness_probe(parse_map("z"), (0, 0, 0, 0), 0.0)

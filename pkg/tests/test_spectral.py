"""Eigensolving and the functional-calculus comparisons."""
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from quecert import spectral
from quecert.errors import DomainError, NumericsError
from quecert.forms import level_pencil
from quecert.models import GASKET, INTERVAL
from quecert.spectral import (
    convergence_table,
    eigensolve,
    eigenvector_comparison,
    hausdorff_distance,
    heat_comparison,
    heat_constant,
    heat_solution_comparison,
    projection_comparison,
    projection_constants,
    resolvent_action,
    resolvent_comparison,
    resolvent_constant,
    resolvent_rough_constant,
)

from conftest import get_pair


def interval_eigenvalue(m, k):
    # closed form for the dyadic path Laplacian
    return 2.0 * 4.0**m * (1.0 - math.cos(k * math.pi / 2**m))


def test_interval_spectrum_closed_form():
    for m in (1, 2, 3, 4):
        dec = eigensolve(level_pencil(INTERVAL, m))
        expect = [interval_eigenvalue(m, k) for k in range(2**m + 1)]
        assert np.allclose(dec.eigenvalues, expect, rtol=1e-11, atol=1e-8)


def test_first_nonzero_eigenvalues_level_one():
    dec = eigensolve(level_pencil(INTERVAL, 1))
    assert dec.eigenvalues[1] == pytest.approx(8.0, abs=1e-10)
    assert dec.eigenvalues[2] == pytest.approx(16.0, abs=1e-10)


def test_mass_orthonormal_vectors():
    p = level_pencil(GASKET, 2)
    dec = eigensolve(p)
    G = dec.vectors.T @ (p.M[:, None] * dec.vectors)
    assert np.allclose(G, np.eye(p.n), atol=1e-12)
    # ground state is the constant function
    v0 = dec.vectors[:, 0]
    assert np.allclose(v0, v0[0], atol=1e-10)
    assert dec.eigenvalues[0] == pytest.approx(0.0, abs=1e-11)


def test_partial_eigensolve_matches_full():
    p = level_pencil(INTERVAL, 4)
    full = eigensolve(p)
    part = eigensolve(p, 4)
    assert np.allclose(part.eigenvalues, full.eigenvalues[:4], atol=1e-9)
    with pytest.raises(DomainError):
        part.heat_operator(1.0)  # needs all eigenpairs
    with pytest.raises(DomainError):
        eigensolve(p, 0)


def test_eigensolve_is_cached():
    p = level_pencil(INTERVAL, 3)
    assert eigensolve(p) is eigensolve(p)


def test_heat_operator_basics():
    p = level_pencil(INTERVAL, 2)
    dec = eigensolve(p)
    assert np.allclose(dec.heat_operator(0.0), np.eye(p.n), atol=1e-12)
    # stochastic in the measure: constants are preserved
    for t in (0.5, 1.0, 2.0):
        assert np.allclose(dec.heat_operator(t) @ np.ones(p.n), 1.0, atol=1e-10)
    with pytest.raises(DomainError):
        dec.heat_operator(-0.5)


@given(st.floats(0.01, 3.0), st.floats(0.01, 3.0))
def test_heat_semigroup_property(t, s):
    dec = eigensolve(level_pencil(GASKET, 1))
    Ht, Hs, Hts = dec.heat_operator(t), dec.heat_operator(s), dec.heat_operator(t + s)
    assert np.allclose(Ht @ Hs, Hts, atol=1e-11)


def test_projection_operator_idempotent():
    dec = eigensolve(level_pencil(INTERVAL, 3))
    P = dec.projection_operator(-0.5, 50.0)
    assert np.allclose(P @ P, P, atol=1e-11)
    tr = np.trace(P)
    inside = np.sum((dec.eigenvalues > -0.5) & (dec.eigenvalues < 50.0))
    assert tr == pytest.approx(inside, abs=1e-9)


def test_resolvent_action_residual():
    p = level_pencil(INTERVAL, 3)
    rng = np.random.default_rng(2)
    B = rng.standard_normal((p.n, 3))
    for z in (-1.0, 1j, 0.5 + 2j):
        X = resolvent_action(p, z, B)
        res = p.L @ X - z * (p.M[:, None] * X) - p.M[:, None] * B
        assert np.max(np.abs(res)) <= 1e-9


def test_resolvent_constants():
    spec = [0.0, 9.87, 39.5]
    assert resolvent_constant(-1.0, spec, spec) == pytest.approx(4.0)
    assert resolvent_constant(-2.0, spec, spec) == pytest.approx(9.0)
    # distance to 0 for z = i
    assert resolvent_constant(1j, spec, spec) == pytest.approx(
        4.0 * (1.0 + math.sqrt(2.0)) ** 2
    )
    with pytest.raises(DomainError):
        resolvent_constant(9.87, spec, spec)


def test_rough_constant():
    assert resolvent_rough_constant(-1.0) == pytest.approx(4.0)
    assert resolvent_rough_constant(1j) == pytest.approx(4.0 * (1 + math.sqrt(2)) ** 2)
    assert resolvent_rough_constant(1.0) == math.inf
    # rough never beats the spectral constant
    spec = np.linspace(0.0, 40.0, 9)
    for z in (-1.5, 2j, 1 + 2j):
        assert resolvent_constant(z, spec, spec) <= resolvent_rough_constant(z) * (1 + 1e-12)


def test_hausdorff_conventions():
    assert hausdorff_distance([], [], (0, 1)) == 0.0
    assert hausdorff_distance([0.5], [], (0, 1)) == math.inf
    assert hausdorff_distance([0.1, 0.9], [0.15, 0.8], (0, 1)) == pytest.approx(0.1)
    # points outside the window are invisible
    assert hausdorff_distance([0.5, 7.0], [0.5], (0, 1)) == 0.0
    with pytest.raises(DomainError):
        hausdorff_distance([0.5], [0.5], (1, 1))


def test_projection_constants_example():
    c_eta, c_eta_prime = projection_constants(1.0, 2.0, 1.0)
    assert c_eta == pytest.approx(44.116, abs=0.05)
    assert c_eta_prime == pytest.approx(5.0 * math.sqrt(3.0) + 3.0 * c_eta)
    with pytest.raises(DomainError):
        projection_constants(-1.0, 2.0, 1.0)
    with pytest.raises(DomainError):
        projection_constants(1.0, 2.0, 0.0)


def test_resolvent_comparison_small_pair():
    pair, cert = get_pair("interval", 2, 7)
    for z in (-1 + 0j, -2 + 0j, 1j, 1 + 2j):
        r = spectral.resolvent_comparison(pair, cert, z)
        assert r["ok"], (z, r)
        assert r["constant"] <= r["rough_constant"] * (1 + 1e-12)
    r = resolvent_comparison(pair, cert, -1 + 0j)
    assert r["constant"] == pytest.approx(4.0)
    assert r["bound"] == pytest.approx(4.0 * cert.delta_total)


def test_projection_comparison_and_window_guard():
    pair, cert = get_pair("interval", 2, 7)
    res = projection_comparison(pair, cert, -0.5, 4.0)
    assert res["ok_intertwine"] and res["ok_sandwich"]
    assert res["eps"] == pytest.approx(0.5)
    with pytest.raises(NumericsError):
        projection_comparison(pair, cert, 0.0, 4.0)  # edge on the spectrum


def test_heat_constant_values():
    assert heat_constant(1.0) == pytest.approx(36.4846, abs=1e-3)
    # scales like 1/t plus the flat part
    assert heat_constant(0.5) == pytest.approx(2 * (heat_constant(1.0) - 5.0) + 5.0)
    with pytest.raises(DomainError):
        heat_constant(0.0)
    with pytest.raises(DomainError):
        heat_constant(1.0, theta=math.pi / 2)


def test_heat_comparison_zero_time_trivial():
    pair, cert = get_pair("interval", 1, 6)
    res = heat_comparison(pair, cert, 0.0)
    assert res["norm"] <= 1e-12
    assert res["constant"] == math.inf and res["ok"]
    with pytest.raises(DomainError):
        heat_comparison(pair, cert, -1.0)


def test_heat_solution_comparison():
    pair, cert = get_pair("interval", 2, 7)
    u0 = np.cos(np.linspace(0.0, math.pi, pair.fine.n))
    res = heat_solution_comparison(pair, cert, u0, [0.5, 2.0])
    assert [r["t"] for r in res["rows"]] == [0.5, 2.0]
    assert all(r["ok"] for r in res["rows"])
    with pytest.raises(DomainError):
        heat_solution_comparison(pair, cert, u0, [0.0])
    with pytest.raises(DomainError):
        heat_solution_comparison(pair, cert, u0[:-1], [1.0])


def test_convergence_table_analytic():
    tab = convergence_table(INTERVAL, [2, 3, 4, 5], 1, reference="analytic")
    assert tab["reference_value"] == pytest.approx(math.pi**2)
    # eigenvalue error decays at the square of the delta rate
    assert tab["slope_log2"] == pytest.approx(-2.0, abs=0.1)
    errs = [r["error"] for r in tab["rows"]]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    with pytest.raises(DomainError):
        convergence_table(GASKET, [1, 2, 3], 1, reference="analytic")


def test_convergence_table_finest_reference():
    tab = convergence_table("gasket", [1, 2, 3], 0, reference="finest")
    assert tab["reference"] == 3
    assert tab["rows"][-1]["error"] == 0.0
    with pytest.raises(DomainError):
        convergence_table(INTERVAL, [1, 2], 40, reference="finest")


def test_eigenvector_comparison_ground_state():
    pair, cert = get_pair("interval", 2, 7)
    res = eigenvector_comparison(pair, cert, 0)
    assert res["error"] <= 1e-5
    assert res["coarse_multiplicity"] == 1
    res1 = eigenvector_comparison(pair, cert, 1)
    assert res1["error"] <= 1.0
    assert res1["gap"] > 0


def test_eigenvector_comparison_guards():
    pair, cert = get_pair("gasket", 1, 4)
    lam = eigensolve(pair.fine).eigenvalues
    # pick a degenerate fine eigenvalue: comparison must refuse
    gaps = np.abs(np.diff(lam))
    k = int(np.argmin(gaps))
    if gaps[k] < 1e-8:
        with pytest.raises(NumericsError):
            eigenvector_comparison(pair, cert, k)
    with pytest.raises(DomainError):
        eigenvector_comparison(pair, cert, pair.fine.n)


def test_min_quadratic_on_sphere():
    # pure eigenvalue case
    A = np.diag([1.0, 2.0])
    val = spectral._min_quadratic_on_sphere(A, np.zeros(2), 0.0)
    assert val == pytest.approx(1.0)
    # hard case: b orthogonal to the bottom eigenvector
    val = spectral._min_quadratic_on_sphere(A, np.array([0.0, 0.1]), 0.0)
    assert val == pytest.approx(0.99)


@given(st.integers(0, 2**32 - 1))
def test_min_quadratic_below_samples(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    B = rng.standard_normal((n, n))
    A = (B + B.T) / 2.0
    b = rng.standard_normal(n) * rng.uniform(0, 2)
    beta = float(rng.uniform(-3, 3))
    val = spectral._min_quadratic_on_sphere(A, b, beta)
    C = rng.standard_normal((400, n))
    C /= np.linalg.norm(C, axis=1, keepdims=True)
    sampled = np.einsum("ij,jk,ik->i", C, A, C) - 2.0 * C @ b + beta
    assert val <= float(np.min(sampled)) + 1e-9

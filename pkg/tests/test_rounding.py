"""Unit tests for the rounding pipeline."""

import numpy as np
import pytest

from syncround import linalg
from syncround.games import k3_game
from syncround.rounding import (
    lemma_report,
    orthogonalize_povm,
    projector_slices,
    round_correlation,
    slice_strategies,
    symmetrize,
    projectivize,
    verify_connes,
)
from syncround.strategies import (
    Povm,
    TracialStrategy,
    correlation,
    embed_tracial,
    entangled_coloring_strategy,
    perturb_strategy,
    random_strategy,
    synchronicity,
)


def random_positive(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return g @ g.conj().T / n


def normalized_sigma(rng, n):
    s = random_positive(rng, n)
    return s / linalg.tau_norm(s)


def noised_pvm(rng, dim, outcomes, weight):
    """Mix a random PVM with the maximally mixed POVM."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q = np.linalg.qr(g)[0]
    cuts = [k * dim // outcomes for k in range(outcomes + 1)]
    elements = []
    for k in range(outcomes):
        cols = q[:, cuts[k] : cuts[k + 1]]
        p = cols @ cols.conj().T
        elements.append((1 - weight) * p + weight * np.eye(dim) / outcomes)
    return Povm(np.array(elements))


# ---------------------------------------------------------------------------
# orthogonalize_povm


def test_orthogonalize_projective_fixed_point():
    rng = np.random.default_rng(0)
    for dim, outcomes in ((4, 2), (6, 3)):
        pvm = noised_pvm(rng, dim, outcomes, 0.0)
        sigma = normalized_sigma(rng, dim)
        out, err = orthogonalize_povm(pvm, sigma)
        assert err <= 1e-12
        np.testing.assert_allclose(out.elements, pvm.elements, atol=1e-9)


def test_orthogonalize_two_outcome_diagonal():
    povm = Povm(np.array([np.diag([0.9, 0.1]), np.diag([0.1, 0.9])]))
    out, err = orthogonalize_povm(povm, np.eye(2))
    np.testing.assert_allclose(out.elements[0], np.diag([1.0, 0.0]), atol=1e-12)
    np.testing.assert_allclose(out.elements[1], np.diag([0.0, 1.0]), atol=1e-12)
    # eps = 1 - tau(A0^2 + A1^2) = 1 - 0.82 = 0.18; error = 2 * tau(0.1^2 I)
    assert err == pytest.approx(0.02)
    assert err <= 9 * 0.18


def brute_force_best_threshold_error(povm, sigma):
    """Best spectral-threshold PVM for a binary POVM {A, I - A}: try every
    eigenvalue cut of A."""
    w = sigma @ sigma.conj().T
    n = povm.dim
    dec = linalg.eig_hermitian(linalg.hermitize(povm.elements[0]))
    best = np.inf
    for k in range(n + 1):
        v = dec.eigenvectors[:, :k]
        p0 = v @ v.conj().T
        p1 = np.eye(n) - p0
        err = 0.0
        for a, p in zip(povm.elements, (p0, p1)):
            d = a - p
            err += float(np.trace(d @ d @ w).real) / n
        best = min(best, err)
    return best


def test_orthogonalize_binary_beats_threshold_oracle():
    rng = np.random.default_rng(1)
    for dim in (2, 3, 4):
        for trial in range(10):
            povm = noised_pvm(rng, dim, 2, float(rng.uniform(0, 0.05)))
            sigma = normalized_sigma(rng, dim)
            out, err = orthogonalize_povm(povm, sigma)
            assert out.validate() == []
            assert out.is_projective(1e-8)
            best = brute_force_best_threshold_error(povm, sigma)
            assert err <= best + 1e-10


def test_orthogonalize_error_bound_random():
    rng = np.random.default_rng(2)
    for _ in range(50):
        dim = int(rng.integers(2, 8))
        outcomes = int(rng.integers(2, min(dim, 4) + 1))
        povm = noised_pvm(rng, dim, outcomes, float(rng.uniform(0, 0.05)))
        sigma = normalized_sigma(rng, dim)
        w = sigma @ sigma.conj().T
        eps = 1.0 - sum(
            float(np.trace(e @ e @ w).real) / dim for e in povm.elements
        )
        out, err = orthogonalize_povm(povm, sigma)
        assert out.validate() == []
        assert err <= 9 * eps + 1e-8


# ---------------------------------------------------------------------------
# verify_connes


def test_connes_identical_inputs():
    rng = np.random.default_rng(3)
    a = random_positive(rng, 4)
    lhs, rhs = verify_connes(a, a)
    assert lhs == pytest.approx(0.0, abs=1e-12)
    assert rhs == pytest.approx(0.0, abs=1e-12)


def test_connes_orthogonal_rank_one_tight():
    lhs, rhs = verify_connes(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
    assert lhs == pytest.approx(1.0, abs=1e-10)
    assert rhs == pytest.approx(1.0, abs=1e-10)


def test_connes_inequality_random():
    rng = np.random.default_rng(4)
    for _ in range(50):
        n = int(rng.integers(2, 9))
        lhs, rhs = verify_connes(random_positive(rng, n), random_positive(rng, n))
        assert lhs <= rhs + 1e-8


# ---------------------------------------------------------------------------
# projector_slices


def test_slices_identity_sigma():
    pieces = projector_slices(np.eye(5))
    assert len(pieces) == 1
    measure, proj = pieces[0]
    assert measure == pytest.approx(1.0)
    np.testing.assert_allclose(proj, np.eye(5), atol=1e-12)


def test_slices_two_level_example():
    sigma = np.diag([1.0, 0.5])
    sigma = sigma / linalg.tau_norm(sigma)  # tau(sigma^2) = 1
    scale = 2.0 / (1.0 + 0.25)
    pieces = projector_slices(sigma)
    assert len(pieces) == 2
    np.testing.assert_allclose(pieces[0][1], np.diag([1.0, 0.0]), atol=1e-12)
    assert pieces[0][0] == pytest.approx(0.75 * scale)
    np.testing.assert_allclose(pieces[1][1], np.eye(2), atol=1e-12)
    assert pieces[1][0] == pytest.approx(0.25 * scale)


def test_slices_rank_one():
    sigma = np.diag([np.sqrt(2.0), 0.0])
    pieces = projector_slices(sigma)
    assert len(pieces) == 1
    assert pieces[0][0] == pytest.approx(2.0)
    np.testing.assert_allclose(pieces[0][1], np.diag([1.0, 0.0]), atol=1e-12)


def test_slices_reconstruct_sigma_squared():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(2, 10))
        sigma = normalized_sigma(rng, n)
        pieces = projector_slices(sigma)
        total = sum(m * p for m, p in pieces)
        np.testing.assert_allclose(total, sigma @ sigma, atol=1e-9)


# ---------------------------------------------------------------------------
# pipeline stages


def test_symmetrize_fixed_point():
    s = embed_tracial(entangled_coloring_strategy(3))
    out, report = symmetrize(s, k3_game())
    assert report["distance"] <= 1e-10
    assert report["delta_out"] <= 1e-10
    np.testing.assert_allclose(out.sigma, s.sigma, atol=1e-10)


def test_symmetrize_bound_on_perturbed_family():
    g = k3_game()
    base = entangled_coloring_strategy(3)
    for eta in (1e-3, 1e-2, 1e-1):
        s = embed_tracial(perturb_strategy(base, eta, 5))
        out, report = symmetrize(s, g)
        assert out.is_symmetric()
        assert report["delta_out"] <= 2 * report["delta_in"] + 1e-8
        # distance envelope ~ sqrt(delta)
        assert report["distance"] <= 20 * np.sqrt(report["delta_in"]) + 1e-8


def test_projectivize_projective_fixed_point():
    g = k3_game()
    s = embed_tracial(entangled_coloring_strategy(3))
    sym, _ = symmetrize(s, g)
    out, report = projectivize(sym, g)
    assert report["distance"] <= 1e-10
    assert report["gamma"] <= 1e-10
    for pvm in out.alice:
        assert pvm.is_projective()


def test_projectivize_noised_input():
    g = k3_game()
    s = embed_tracial(entangled_coloring_strategy(3))
    noised = tuple(
        Povm(0.99 * p.elements + 0.01 * np.eye(3) / 3) for p in s.alice
    )
    noisy = TracialStrategy(3, s.sigma, noised, noised)
    out, report = projectivize(noisy, g)
    for pvm in out.alice:
        assert pvm.is_projective(1e-8)
        assert pvm.validate() == []
    assert np.isfinite(report["delta_out"])
    assert report["distance"] <= 1.0


def test_slice_strategies_flat_spectrum():
    g = k3_game()
    s = embed_tracial(entangled_coloring_strategy(3))
    dec = slice_strategies(s, g)
    assert len(dec.slices) == 1
    sl = dec.slices[0]
    assert sl.weight == pytest.approx(1.0)
    assert sl.sub_dim == 3
    for pvm, orig in zip(sl.pvms, s.alice):
        # corner PVMs live in the slice's eigenbasis; expand before comparing
        expanded = np.array(
            [linalg.expand_corner(e, sl.basis) for e in pvm.elements]
        )
        np.testing.assert_allclose(expanded, orig.elements, atol=1e-9)
    assert dec.diagnostics["slice_residual"] <= 1e-10


def test_slice_strategies_two_level_spectrum():
    g = k3_game()
    # symmetric projective strategy with a two-level sigma spectrum:
    # diagonal PVMs commute with any diagonal sigma
    s = embed_tracial(entangled_coloring_strategy(3))
    sigma = np.diag([1.0, 1.0, 0.5])
    sigma = sigma / linalg.tau_norm(sigma)
    strat = TracialStrategy(3, sigma, s.alice, s.alice)
    dec = slice_strategies(strat, g)
    assert len(dec.slices) == 2
    weights = [sl.weight for sl in dec.slices]
    assert sum(weights) == pytest.approx(1.0, abs=1e-12)
    assert dec.slices[0].sub_dim == 2
    assert dec.slices[1].sub_dim == 3


def test_slice_correlations_synchronous_on_perturbed():
    g = k3_game()
    base = entangled_coloring_strategy(3)
    for seed in range(10):
        s = embed_tracial(perturb_strategy(base, 1e-2, seed))
        sym, _ = symmetrize(s, g)
        proj, _ = projectivize(sym, g)
        dec = slice_strategies(proj, g)
        for c in dec.correlations:
            assert synchronicity(g, c) <= 1e-8
        assert dec.diagnostics["weight_sum"] == pytest.approx(1.0, abs=1e-9)


def test_round_correlation_perfect_strategies():
    g = k3_game()
    for s in (entangled_coloring_strategy(3),):
        dec = round_correlation(g, s)
        assert len(dec.slices) == 1
        assert dec.diagnostics["distance"] <= 1e-8


def test_round_correlation_trend():
    g = k3_game()
    base = entangled_coloring_strategy(3)
    dists = []
    for eta in (1e-1, 1e-2, 1e-3, 1e-4):
        s = perturb_strategy(base, eta, 17)
        dec = round_correlation(g, s)
        dists.append(dec.diagnostics["distance"])
    assert dists[0] > dists[1] > dists[2] > dists[3]
    assert dists[-1] < 1e-3


def test_round_correlation_mixture_is_convex():
    g = k3_game()
    s = perturb_strategy(entangled_coloring_strategy(3), 5e-2, 23)
    dec = round_correlation(g, s)
    weights = np.array([sl.weight for sl in dec.slices])
    assert np.all(weights > 0)
    mixed = sum(w * c.table for w, c in zip(weights, dec.correlations))
    np.testing.assert_allclose(mixed, dec.mixed.table, atol=1e-12)
    assert dec.mixed.validate() == []


# ---------------------------------------------------------------------------
# lemma_report


def test_lemma_report_perfect_strategy():
    g = k3_game()
    rep = lemma_report(g, embed_tracial(entangled_coloring_strategy(3)))
    vienna = rep["theviennalemma"]
    assert vienna["lhs"] == pytest.approx(1.0, abs=1e-10)
    assert vienna["rhs"] == pytest.approx(1.0, abs=1e-10)
    meas = rep["measurementtocoorlation"]
    assert meas["lhs"] == pytest.approx(0.0, abs=1e-10)
    assert meas["slack"] >= -1e-8


def test_lemma_report_random_strategies():
    g = k3_game()
    for seed in range(20):
        d = 2 + seed % 4
        s = embed_tracial(random_strategy((d, d), (3, 3), seed))
        rep = lemma_report(g, s)
        for entry in rep.values():
            assert entry["slack"] >= -1e-8


def test_measurement_substitution_trivial_case():
    # substituting projective measurements for themselves gives lhs = 0
    g = k3_game()
    s = embed_tracial(entangled_coloring_strategy(3))
    rep = lemma_report(g, s)
    assert rep["measurementtocoorlation"]["lhs"] <= 1e-10

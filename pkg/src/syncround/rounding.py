"""The rounding pipeline.

Turns an almost-synchronous strategy into a finite convex combination of
synchronous sub-strategies: symmetrize via the polar decomposition, force
projectivity by spectral rounding, then slice the state's spectrum into
corner algebras where the compressed measurements become exactly
synchronous.  Every stage reports the residual its backing inequality
bounds, and the lambda-integrals are evaluated exactly at eigenvalue
breakpoints (the integrands are piecewise constant at finite dimension).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    BoundViolated,
    MathContractError,
    NotPositive,
    NotNormalized,
    NotSynchronousGame,
)
from .games import Game, is_synchronous_game
from .linalg import CLUSTER_TOL
from .strategies import (
    Correlation,
    Povm,
    TensorStrategy,
    TracialStrategy,
    correlation,
    correlation_distance,
    embed_tracial,
    synchronicity,
)

ORTHO_SLACK = 1e-8


def _weighted_error(povm_elements, pvm_elements, w: np.ndarray) -> float:
    """sum_x tau(sigma* (A_x - P_x)^2 sigma) with w = sigma sigma*."""
    n = w.shape[0]
    total = 0.0
    for a, p in zip(povm_elements, pvm_elements):
        d = a - p
        total += float(np.trace(d @ d @ w).real) / n
    return total


def orthogonalize_povm(povm: Povm, sigma) -> tuple[Povm, float]:
    """Round a POVM to a PVM in the sigma-weighted Hilbert-Schmidt norm.

    Sequential spectral rounding: the element with the largest weighted mass
    is thresholded at 1/2, the rest recurse on the compressed complement and
    the last element takes the remainder.  If the resulting error exceeds
    the 9-epsilon orthogonalization bound, one greedy eigenvector
    reassignment pass is tried; failing that, BoundViolated is raised.
    """
    sig = linalg.as_matrix(sigma)
    n = povm.dim
    w = sig @ sig.conj().T
    eps = 1.0 - sum(
        float(np.trace(e @ e @ w).real) / n for e in povm.elements
    )
    bound = 9.0 * eps + ORTHO_SLACK

    masses = np.array(
        [float(np.trace(e @ w).real) / n for e in povm.elements]
    )
    order = np.argsort(-masses, kind="stable")

    # Labeled orthonormal basis of the whole space, built corner by corner.
    vectors: list[np.ndarray] = []
    labels: list[int] = []
    basis = np.eye(n, dtype=complex)
    for idx, x in enumerate(order):
        if basis.shape[1] == 0:
            break
        if idx == len(order) - 1:
            keep = basis
            rest = basis[:, :0]
        else:
            corner = linalg.hermitize(
                basis.conj().T @ povm.elements[x] @ basis, tol=1e-7
            )
            dec = linalg.eig_hermitian(corner)
            sel = dec.eigenvalues >= 0.5 - CLUSTER_TOL
            keep = basis @ dec.eigenvectors[:, sel]
            rest = basis @ dec.eigenvectors[:, ~sel]
        for k in range(keep.shape[1]):
            vectors.append(keep[:, k])
            labels.append(int(x))
        basis = rest

    def build(labels_now):
        elements = np.zeros((povm.outcomes, n, n), dtype=complex)
        for v, x in zip(vectors, labels_now):
            elements[x] += np.outer(v, v.conj())
        return elements

    elements = build(labels)
    error = _weighted_error(povm.elements, elements, w)
    if error > bound:
        # Greedy reassignment: with the basis fixed, the weighted error is
        # separable over basis vectors, so per-vector argmax is optimal.
        relabeled = []
        for v in vectors:
            scores = [
                float((v.conj() @ w @ e @ v).real) for e in povm.elements
            ]
            relabeled.append(int(np.argmax(scores)))
        candidate = build(relabeled)
        cand_error = _weighted_error(povm.elements, candidate, w)
        if cand_error < error:
            elements, error = candidate, cand_error
    if error > bound:
        raise BoundViolated(
            f"orthogonalization error {error:.3e} exceeds 9*eps bound {bound:.3e}"
        )
    return Povm(elements), error


def _positive_eigs(name: str, m: np.ndarray) -> np.ndarray:
    vals = np.linalg.eigvalsh(linalg.hermitize(m))
    if vals.size and vals[0] < -1e-10:
        raise NotPositive(f"{name} has eigenvalue {vals[0]:.3e}")
    return np.clip(vals, 0.0, None)


def verify_connes(rho, sigma) -> tuple[float, float]:
    """Both sides of the joint-distribution inequality for positive rho, sigma.

    lhs = integral over lambda of ||chi_{>=sqrt(lambda)}(rho) -
    chi_{>=sqrt(lambda)}(sigma)||_2^2, summed exactly over the intervals
    between sorted squared eigenvalues where the integrand is constant;
    rhs = ||rho - sigma||_2 * ||rho + sigma||_2.
    """
    r = linalg.hermitize(rho)
    s = linalg.hermitize(sigma)
    ev_r = _positive_eigs("rho", r)
    ev_s = _positive_eigs("sigma", s)
    breakpoints = np.sort(np.concatenate(([0.0], ev_r**2, ev_s**2)))
    lhs = 0.0
    for lo, hi in zip(breakpoints[:-1], breakpoints[1:]):
        if hi - lo <= CLUSTER_TOL:
            continue
        mid = np.sqrt((lo + hi) / 2.0)
        diff = linalg.chi_geq(r, mid) - linalg.chi_geq(s, mid)
        lhs += (hi - lo) * linalg.tau_norm(diff) ** 2
    rhs = linalg.tau_norm(r - s) * linalg.tau_norm(r + s)
    return lhs, rhs


def _sigma_spectrum(sigma: np.ndarray):
    """Clustered eigensystem of a positive normalized sigma."""
    s = linalg.hermitize(sigma)
    dec = linalg.eig_hermitian(s)
    if dec.eigenvalues[-1] < -1e-10:
        raise NotPositive(f"sigma has eigenvalue {dec.eigenvalues[-1]:.3e}")
    if abs(linalg.tau(s @ s).real - 1.0) > 1e-9:
        raise NotNormalized(f"tau(sigma^2) = {linalg.tau(s @ s).real!r}")
    vals = np.clip(dec.eigenvalues, 0.0, None)
    clusters = linalg.cluster_indices(vals)
    reps = [float(np.mean(vals[idx])) for idx in clusters]
    return dec, clusters, reps


def projector_slices(sigma) -> list[tuple[float, np.ndarray]]:
    """Exact spectral slicing of sigma^2 into (measure, projector) pieces.

    With distinct eigenvalues s_1 > ... > s_k of sigma, piece j carries
    Lebesgue measure s_j^2 - s_{j+1}^2 (s_{k+1} = 0) and projects onto the
    eigenvectors with eigenvalue >= s_j; the measure-weighted sum of the
    projectors reconstructs sigma^2.
    """
    dec, clusters, reps = _sigma_spectrum(sigma)
    pieces = []
    used = 0
    for j, idx in enumerate(clusters):
        used += len(idx)
        s_j = reps[j]
        s_next = reps[j + 1] if j + 1 < len(clusters) else 0.0
        measure = s_j**2 - s_next**2
        if measure <= 0.0:
            continue
        v = dec.eigenvectors[:, :used]
        pieces.append((measure, v @ v.conj().T))
    return pieces


@dataclass(frozen=True)
class Slice:
    weight: float
    measure: float
    projector: np.ndarray
    basis: np.ndarray
    sub_dim: int
    pvms: tuple[Povm, ...]  # per question, on the corner


@dataclass(frozen=True)
class RoundingDecomposition:
    slices: tuple[Slice, ...]
    correlations: tuple[Correlation, ...]
    mixed: Correlation
    diagnostics: dict


def symmetrize(s: TracialStrategy, game: Game):
    """Replace the strategy by the symmetric one (sigma+, {A}).

    Returns the new strategy plus a report with the input/output
    synchronicities and the mu-weighted correlation distance; the factor-2
    synchronicity bound is enforced.
    """
    c_in = correlation(s)
    delta_in = synchronicity(game, c_in)
    sigma_plus = linalg.polar_decompose(s.sigma).positive_part
    out = TracialStrategy(s.dim, sigma_plus, s.alice, s.alice)
    c_out = correlation(out)
    delta_out = synchronicity(game, c_out)
    if delta_out > 2.0 * delta_in + 1e-8:
        raise MathContractError(
            f"symmetrized synchronicity {delta_out:.3e} exceeds "
            f"2*{delta_in:.3e} + 1e-8"
        )
    report = {
        "delta_in": delta_in,
        "delta_out": delta_out,
        "distance": correlation_distance(game, c_in, c_out),
    }
    return out, report


def projectivize(s: TracialStrategy, game: Game):
    """Round each question's POVM to a PVM in the sigma-weighted norm.

    Requires a symmetric strategy with positive sigma; the output is
    symmetric and projective.
    """
    sigma = linalg.hermitize(s.sigma)
    c_in = correlation(s)
    pvms = []
    errors = []
    for povm in s.alice:
        pvm, err = orthogonalize_povm(povm, sigma)
        pvms.append(pvm)
        errors.append(err)
    pvms = tuple(pvms)
    out = TracialStrategy(s.dim, sigma, pvms, pvms)
    c_out = correlation(out)
    report = {
        "delta_in": synchronicity(game, c_in),
        "delta_out": synchronicity(game, c_out),
        "distance": correlation_distance(game, c_in, c_out),
        "gamma": float(np.dot(game.mu_x, errors)),
    }
    return out, report


def slice_strategies(s: TracialStrategy, game: Game) -> RoundingDecomposition:
    """Decompose a symmetric projective strategy into synchronous corners.

    Each spectral slice of sigma hosts a corner sub-strategy whose tracial
    state is the corner identity; compressed measurements are rounded back
    to PVMs there, making every per-slice correlation synchronous.
    """
    dec, clusters, reps = _sigma_spectrum(s.sigma)
    n = s.dim
    slices = []
    correlations = []
    residual = 0.0
    used = 0
    for j, idx in enumerate(clusters):
        used += len(idx)
        s_j = reps[j]
        s_next = reps[j + 1] if j + 1 < len(clusters) else 0.0
        measure = s_j**2 - s_next**2
        if measure <= 0.0:
            continue
        basis = dec.eigenvectors[:, :used].copy()
        rank = used
        projector = basis @ basis.conj().T
        corner_pvms = []
        corner_eye = np.eye(rank, dtype=complex)
        for povm in s.alice:
            compressed = Povm(
                np.array(
                    [
                        linalg.hermitize(basis.conj().T @ e @ basis, tol=1e-7)
                        for e in povm.elements
                    ]
                )
            )
            pvm, _ = orthogonalize_povm(compressed, corner_eye)
            corner_pvms.append(pvm)
        corner_pvms = tuple(corner_pvms)
        for x in range(s.n_questions):
            for a in range(s.n_answers):
                d = s.alice[x].elements[a] - linalg.expand_corner(
                    corner_pvms[x].elements[a], basis
                )
                dp = d @ projector
                residual += (
                    game.mu_x[x] * measure * linalg.tau_norm(dp) ** 2
                )
        weight = measure * rank / n
        sub = TracialStrategy(rank, corner_eye, corner_pvms, corner_pvms)
        c_sub = correlation(sub)
        sync_sub = synchronicity(game, c_sub)
        if sync_sub > 1e-8:
            raise MathContractError(
                f"slice correlation synchronicity {sync_sub:.3e} > 1e-8"
            )
        slices.append(
            Slice(weight, measure, projector, basis, rank, corner_pvms)
        )
        correlations.append(c_sub)
    weights = np.array([sl.weight for sl in slices])
    if abs(weights.sum() - 1.0) > 1e-9:
        raise MathContractError(f"slice weights sum to {weights.sum()!r}")
    mixed = Correlation(
        sum(w * c.table for w, c in zip(weights, correlations))
    )
    diagnostics = {
        "n_slices": float(len(slices)),
        "weight_sum": float(weights.sum()),
        "slice_residual": residual,
    }
    return RoundingDecomposition(
        tuple(slices), tuple(correlations), mixed, diagnostics
    )


def round_correlation(game: Game, s: TensorStrategy) -> RoundingDecomposition:
    """Full pipeline: embed -> symmetrize -> projectivize -> slice.

    The returned diagnostics carry the input synchronicity, every stage's
    residual and the final mu-weighted distance between the input
    correlation and the synchronous mixture.
    """
    if not is_synchronous_game(game):
        raise NotSynchronousGame("rounding requires a synchronous game")
    embedded = embed_tracial(s)
    c_in = correlation(embedded)
    sym, sym_report = symmetrize(embedded, game)
    proj, proj_report = projectivize(sym, game)
    dec = slice_strategies(proj, game)
    diagnostics = dict(dec.diagnostics)
    diagnostics.update(
        {
            "delta_in": sym_report["delta_in"],
            "sym_delta": sym_report["delta_out"],
            "sym_distance": sym_report["distance"],
            "proj_delta": proj_report["delta_out"],
            "proj_distance": proj_report["distance"],
            "proj_gamma": proj_report["gamma"],
            "distance": correlation_distance(game, c_in, dec.mixed),
        }
    )
    return RoundingDecomposition(
        dec.slices, dec.correlations, dec.mixed, diagnostics
    )


def lemma_report(game: Game, s: TracialStrategy) -> dict:
    """Evaluate both sides of the implemented lemma inequalities.

    Returns {lemma: {lhs, rhs, slack}} with slack = rhs - lhs; every slack
    should be >= -1e-8 when the lemmas hold.
    """
    c_s = correlation(s)
    delta = synchronicity(game, c_s)
    sigma = s.sigma
    sigma_plus = linalg.polar_decompose(sigma).positive_part

    # Synchronicity factorization.  Both symmetric strategies are taken at
    # the positive part sigma+: the factorization through the polar isometry
    # only bounds the diagonal mass measured there, and the version with the
    # raw sigma on Alice's side fails numerically for non-normal sigma.
    sym_a = TracialStrategy(s.dim, sigma, s.alice, s.alice)
    delta_a = synchronicity(game, correlation(sym_a))
    sym_a_plus = TracialStrategy(s.dim, sigma_plus, s.alice, s.alice)
    delta_a_plus = synchronicity(game, correlation(sym_a_plus))
    sym_b = TracialStrategy(s.dim, sigma_plus, s.bob_left, s.bob_left)
    delta_b = synchronicity(game, correlation(sym_b))
    vienna = {
        "lhs": 1.0 - delta,
        "rhs": np.sqrt(max(1.0 - delta_a_plus, 0.0))
        * np.sqrt(max(1.0 - delta_b, 0.0)),
    }
    vienna["slack"] = vienna["rhs"] - vienna["lhs"]

    # Measurement substitution: compare correlations of {A} and of the
    # spectrally-rounded {C} inside the same strategy.
    rounded = []
    gamma = 0.0
    for x, povm in enumerate(s.alice):
        pvm, err = orthogonalize_povm(povm, sigma)
        rounded.append(pvm)
        gamma += game.mu_x[x] * err
    swapped = TracialStrategy(s.dim, sigma, tuple(rounded), s.bob_left)
    lhs = correlation_distance(game, c_s, correlation(swapped))
    meas = {
        "lhs": lhs,
        "rhs": 6.0 * (delta_a + np.sqrt(max(gamma, 0.0))),
    }
    meas["slack"] = meas["rhs"] - meas["lhs"]
    return {"theviennalemma": vienna, "measurementtocoorlation": meas}

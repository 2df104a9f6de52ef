"""Strategy representations and correlation evaluation.

Two forms are supported.  A TensorStrategy is the familiar bipartite form:
a unit state on C^{dA} (x) C^{dB} plus local POVMs.  A TracialStrategy is
its standard-form avatar at dimension n: a coefficient matrix sigma with
tau(sigma* sigma) = 1, Alice's POVMs acting by left multiplication and
Bob's stored as left-algebra matrices whose opposite action is right
multiplication, so every correlation entry is tau(sigma* A sigma B).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import AlphabetMismatch, NonRealCorrelation, NotSynchronousGame
from .games import Game, is_synchronous_game

POVM_SUM_TOL = 1e-9
POVM_EIG_FLOOR = -1e-10
PROJECTIVE_TOL = 1e-9
CORR_IMAG_HARD = 1e-7


@dataclass(frozen=True)
class Povm:
    """A family of positive matrices summing to the identity."""

    elements: np.ndarray  # (outcomes, dim, dim)

    def __post_init__(self):
        object.__setattr__(
            self, "elements", np.asarray(self.elements, dtype=complex)
        )

    @property
    def outcomes(self) -> int:
        return self.elements.shape[0]

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    def validate(self) -> list[str]:
        violations = []
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for e in self.elements:
            if linalg.frobenius(e - e.conj().T) > 1e-8 * (1 + linalg.frobenius(e)):
                violations.append("NotHermitian")
            else:
                vals = np.linalg.eigvalsh((e + e.conj().T) / 2)
                if vals.size and vals[0] < POVM_EIG_FLOOR:
                    violations.append("NotPositive")
            total += e
        if np.max(np.abs(total - np.eye(self.dim))) > POVM_SUM_TOL:
            violations.append("SumNotIdentity")
        return violations

    def is_projective(self, tol: float = PROJECTIVE_TOL) -> bool:
        return all(
            linalg.frobenius(e @ e - e) <= tol for e in self.elements
        )


@dataclass(frozen=True)
class TensorStrategy:
    dim_a: int
    dim_b: int
    state: np.ndarray  # unit vector over C^{dim_a * dim_b}
    alice: tuple[Povm, ...]  # one POVM (dim dim_a) per question
    bob: tuple[Povm, ...]  # one POVM (dim dim_b) per question

    def __post_init__(self):
        object.__setattr__(self, "state", np.asarray(self.state, dtype=complex))
        object.__setattr__(self, "alice", tuple(self.alice))
        object.__setattr__(self, "bob", tuple(self.bob))

    @property
    def n_questions(self) -> int:
        return len(self.alice)

    @property
    def n_answers(self) -> int:
        return self.alice[0].outcomes


@dataclass(frozen=True)
class TracialStrategy:
    dim: int
    sigma: np.ndarray
    alice: tuple[Povm, ...]
    bob_left: tuple[Povm, ...]  # Bob's operators as left-algebra matrices

    def __post_init__(self):
        object.__setattr__(self, "sigma", np.asarray(self.sigma, dtype=complex))
        object.__setattr__(self, "alice", tuple(self.alice))
        object.__setattr__(self, "bob_left", tuple(self.bob_left))

    @property
    def n_questions(self) -> int:
        return len(self.alice)

    @property
    def n_answers(self) -> int:
        return self.alice[0].outcomes

    def is_symmetric(self) -> bool:
        return all(
            np.allclose(a.elements, b.elements, atol=1e-12)
            for a, b in zip(self.alice, self.bob_left)
        )


@dataclass(frozen=True)
class Correlation:
    """Joint answer probabilities C[x, y, a, b]."""

    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "table", np.asarray(self.table, dtype=float))

    def validate(self) -> list[str]:
        violations = []
        if self.table.min() < -1e-9 or self.table.max() > 1 + 1e-9:
            violations.append("EntryOutOfRange")
        sums = self.table.sum(axis=(2, 3))
        if np.max(np.abs(sums - 1.0)) > 1e-8:
            violations.append("RowNotNormalized")
        return violations


def opposite(m) -> np.ndarray:
    """The opposite-algebra map at finite dimension: the plain transpose."""
    return np.asarray(m, dtype=complex).T.copy()


def tensor_correlation(s: TensorStrategy) -> Correlation:
    """Direct evaluation <psi| A (x) B |psi>, kept independent of the
    standard-form route so the two can check each other."""
    nq, na = s.n_questions, s.n_answers
    table = np.zeros((nq, nq, na, na))
    psi = s.state
    for x in range(nq):
        for y in range(nq):
            for a in range(na):
                for b in range(na):
                    op = np.kron(s.alice[x].elements[a], s.bob[y].elements[b])
                    table[x, y, a, b] = float((psi.conj() @ op @ psi).real)
    return Correlation(table)


def _pad_povm(povm: Povm, n: int) -> np.ndarray:
    """Zero-pad the elements to dim n; the padding block of the identity is
    assigned entirely to answer 0 so the family stays a POVM."""
    d = povm.dim
    out = np.zeros((povm.outcomes, n, n), dtype=complex)
    out[:, :d, :d] = povm.elements
    out[0, d:, d:] = np.eye(n - d)
    return out


def embed_tracial(s: TensorStrategy) -> TracialStrategy:
    """Rewrite a tensor strategy in standard form at n = max(dim_a, dim_b).

    The state's n x n coefficient matrix Psi (zero-extended on the padding)
    becomes sigma = sqrt(n) * Psi; Bob's operators are transposed.  The
    padding block carries no state mass, so correlations are unchanged.
    """
    n = max(s.dim_a, s.dim_b)
    psi_mat = s.state.reshape(s.dim_a, s.dim_b)
    sigma = np.zeros((n, n), dtype=complex)
    sigma[: s.dim_a, : s.dim_b] = psi_mat * np.sqrt(n)
    alice = tuple(Povm(_pad_povm(p, n)) for p in s.alice)
    bob_left = tuple(
        Povm(np.array([opposite(e) for e in _pad_povm(p, n)])) for p in s.bob
    )
    return TracialStrategy(dim=n, sigma=sigma, alice=alice, bob_left=bob_left)


def correlation(s: TracialStrategy) -> Correlation:
    """C(x,y,a,b) = Re tau(sigma* A_a^x sigma B_b^y) with B stored left."""
    nq, na = s.n_questions, s.n_answers
    table = np.zeros((nq, nq, na, na))
    worst_imag = 0.0
    sig = s.sigma
    left = {
        (x, a): sig.conj().T @ s.alice[x].elements[a] @ sig
        for x in range(nq)
        for a in range(na)
    }
    for x in range(nq):
        for y in range(nq):
            for a in range(na):
                for b in range(na):
                    val = linalg.tau(left[(x, a)] @ s.bob_left[y].elements[b])
                    worst_imag = max(worst_imag, abs(val.imag))
                    table[x, y, a, b] = val.real
    if worst_imag > CORR_IMAG_HARD:
        raise NonRealCorrelation(f"imaginary residue {worst_imag:.3e}")
    return Correlation(table)


def _check_alphabets(game: Game, nq: int, na: int):
    if game.n_questions != nq or game.n_answers != na:
        raise AlphabetMismatch(
            f"game is {game.n_questions}x{game.n_answers}, "
            f"strategy is {nq}x{na}"
        )


def winning_probability_from_correlation(game: Game, c: Correlation) -> float:
    _check_alphabets(game, c.table.shape[0], c.table.shape[2])
    weighted = game.mu[:, :, None, None] * game.win * c.table
    return float(weighted.sum())


def winning_probability(game: Game, s: TracialStrategy) -> float:
    return winning_probability_from_correlation(game, correlation(s))


def synchronicity(game: Game, c: Correlation) -> float:
    """E_{x ~ mu_x} of the off-diagonal answer mass on same-question pairs."""
    if not is_synchronous_game(game):
        raise NotSynchronousGame("synchronicity needs a synchronous game")
    _check_alphabets(game, c.table.shape[0], c.table.shape[2])
    na = c.table.shape[2]
    off = ~np.eye(na, dtype=bool)
    total = 0.0
    for x in range(game.n_questions):
        total += game.mu_x[x] * float(c.table[x, x][off].sum())
    return total


def correlation_distance(game: Game, c1: Correlation, c2: Correlation) -> float:
    """mu-weighted l1 distance E_{(x,y) ~ mu} sum_{a,b} |C1 - C2|."""
    if c1.table.shape != c2.table.shape:
        raise AlphabetMismatch("correlation tables have different shapes")
    _check_alphabets(game, c1.table.shape[0], c1.table.shape[2])
    diff = np.abs(c1.table - c2.table).sum(axis=(2, 3))
    return float((game.mu * diff).sum())


def _haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases


def _block_pvm(u: np.ndarray, outcomes: int) -> Povm:
    """Rank-partitioned PVM: rotate the coordinate blocks by u."""
    dim = u.shape[0]
    cuts = [k * dim // outcomes for k in range(outcomes + 1)]
    elements = []
    for k in range(outcomes):
        cols = u[:, cuts[k] : cuts[k + 1]]
        elements.append(cols @ cols.conj().T)
    return Povm(np.array(elements))


def random_strategy(
    dims: tuple[int, int], alphabets: tuple[int, int], seed: int
) -> TensorStrategy:
    """Seeded random tensor strategy: Haar block-PVMs, Gaussian unit state."""
    n_questions, n_answers = alphabets
    rng = np.random.default_rng(seed)
    dim_a, dim_b = dims
    alice = tuple(
        _block_pvm(_haar_unitary(rng, dim_a), n_answers) for _ in range(n_questions)
    )
    bob = tuple(
        _block_pvm(_haar_unitary(rng, dim_b), n_answers) for _ in range(n_questions)
    )
    state = rng.normal(size=dim_a * dim_b) + 1j * rng.normal(size=dim_a * dim_b)
    state /= np.linalg.norm(state)
    return TensorStrategy(dim_a, dim_b, state, alice, bob)


def perturb_strategy(s: TensorStrategy, eta: float, seed: int) -> TensorStrategy:
    """Conjugate Bob's measurements by exp(i eta H) and add eta state noise.

    Deterministic per seed; eta = 0 returns the input unchanged.
    """
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    if eta == 0:
        return s
    rng = np.random.default_rng(seed)
    bob = []
    for povm in s.bob:
        g = rng.normal(size=(s.dim_b, s.dim_b)) + 1j * rng.normal(
            size=(s.dim_b, s.dim_b)
        )
        h = (g + g.conj().T) / 2
        dec = linalg.eig_hermitian(h)
        u = (dec.eigenvectors * np.exp(1j * eta * dec.eigenvalues)) @ dec.eigenvectors.conj().T
        bob.append(Povm(np.array([u @ e @ u.conj().T for e in povm.elements])))
    noise = rng.normal(size=s.state.size) + 1j * rng.normal(size=s.state.size)
    state = s.state + eta * noise / np.linalg.norm(noise)
    state /= np.linalg.norm(state)
    return TensorStrategy(s.dim_a, s.dim_b, state, s.alice, tuple(bob))


def deterministic_strategy(assignment, n_answers: int) -> TensorStrategy:
    """Classical strategy where both players answer f(x), as a dim-1 tensor
    strategy."""
    nq = len(assignment)
    povms = []
    for x in range(nq):
        elements = np.zeros((n_answers, 1, 1), dtype=complex)
        elements[assignment[x], 0, 0] = 1.0
        povms.append(Povm(elements))
    povms = tuple(povms)
    return TensorStrategy(1, 1, np.array([1.0 + 0j]), povms, povms)


def entangled_coloring_strategy(n: int) -> TensorStrategy:
    """Perfect synchronous strategy for the K_n coloring game with n colors:
    maximally entangled state, cyclically shifted basis PVMs."""
    state = np.eye(n).reshape(-1) / np.sqrt(n)
    alice = []
    bob = []
    for x in range(n):
        elements = np.zeros((n, n, n), dtype=complex)
        for a in range(n):
            k = (a + x) % n
            elements[a, k, k] = 1.0
        alice.append(Povm(elements))
        bob.append(Povm(elements.copy()))  # real diagonal, equals transpose
    return TensorStrategy(n, n, state, tuple(alice), tuple(bob))


def _builtin_k3_classical() -> TensorStrategy:
    return deterministic_strategy([0, 1, 2], 3)


def _builtin_edge2_classical() -> TensorStrategy:
    return deterministic_strategy([0, 1], 2)


BUILTIN_STRATEGIES = {
    "k3-classical": _builtin_k3_classical,
    "k3-entangled": lambda: entangled_coloring_strategy(3),
    "edge2-classical": _builtin_edge2_classical,
}

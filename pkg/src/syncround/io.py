"""JSON interchange for games, strategies, correlations and decompositions.

One diffable format: complex numbers as [re, im] pairs, matrices as
row-major nested arrays, every file carrying a schema tag.  Saving is
canonical (sorted keys, fixed separators), so save(load(f)) is
byte-identical for canonicalized files.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ParseError, SchemaVersionMismatch, ValidationError
from .games import Game, validate_game
from .rounding import RoundingDecomposition
from .strategies import Correlation, Povm, TensorStrategy

GAME_SCHEMA = "syncround.game/1"
STRATEGY_SCHEMA = "syncround.strategy/1"
CORRELATION_SCHEMA = "syncround.correlation/1"
DECOMPOSITION_SCHEMA = "syncround.decomposition/1"
SWEEP_SCHEMA = "syncround.sweep/1"


def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _parse_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc


def _require(obj: dict, field: str):
    if field not in obj:
        raise ParseError(f"missing field {field!r}")
    return obj[field]


def _check_schema(obj: dict, expected: str):
    schema = _require(obj, "schema")
    if schema != expected:
        raise SchemaVersionMismatch(
            f"expected schema {expected!r}, found {schema!r}"
        )


def encode_matrix(m) -> list:
    a = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def decode_matrix(data) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed matrix: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ParseError("matrix entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def encode_vector(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def decode_vector(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ParseError("vector entries must be [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def game_to_dict(game: Game) -> dict:
    return {
        "schema": GAME_SCHEMA,
        "questions": list(game.questions),
        "answers": list(game.answers),
        "mu": [[float(v) for v in row] for row in game.mu],
        "win": game.win.astype(int).tolist(),
    }


def game_from_dict(obj: dict) -> Game:
    _check_schema(obj, GAME_SCHEMA)
    game = Game(
        tuple(_require(obj, "questions")),
        tuple(_require(obj, "answers")),
        np.asarray(_require(obj, "mu"), dtype=float),
        np.asarray(_require(obj, "win"), dtype=bool),
    )
    violations = validate_game(game)
    if violations:
        raise ValidationError("invalid game: " + ", ".join(violations))
    return game


def strategy_to_dict(s: TensorStrategy) -> dict:
    return {
        "schema": STRATEGY_SCHEMA,
        "dim_a": s.dim_a,
        "dim_b": s.dim_b,
        "state": encode_vector(s.state),
        "alice": [[encode_matrix(e) for e in p.elements] for p in s.alice],
        "bob": [[encode_matrix(e) for e in p.elements] for p in s.bob],
    }


def _decode_povms(data, dim: int, side: str) -> tuple[Povm, ...]:
    povms = []
    for qi, mats in enumerate(data):
        elements = np.array([decode_matrix(m) for m in mats])
        povm = Povm(elements)
        if povm.dim != dim:
            raise ValidationError(f"{side}[{qi}] has dim {povm.dim}, expected {dim}")
        violations = povm.validate()
        if violations:
            raise ValidationError(
                f"{side}[{qi}] is not a POVM: " + ", ".join(violations)
            )
        povms.append(povm)
    return tuple(povms)


def strategy_from_dict(obj: dict) -> TensorStrategy:
    _check_schema(obj, STRATEGY_SCHEMA)
    dim_a = int(_require(obj, "dim_a"))
    dim_b = int(_require(obj, "dim_b"))
    state = decode_vector(_require(obj, "state"))
    if state.size != dim_a * dim_b:
        raise ValidationError(
            f"state has {state.size} amplitudes, expected {dim_a * dim_b}"
        )
    if abs(np.linalg.norm(state) - 1.0) > 1e-12:
        raise ValidationError("state is not normalized")
    alice = _decode_povms(_require(obj, "alice"), dim_a, "alice")
    bob = _decode_povms(_require(obj, "bob"), dim_b, "bob")
    if len(alice) != len(bob):
        raise ValidationError("alice and bob have different question counts")
    return TensorStrategy(dim_a, dim_b, state, alice, bob)


def correlation_to_dict(c: Correlation) -> dict:
    return {"schema": CORRELATION_SCHEMA, "table": c.table.tolist()}


def correlation_from_dict(obj: dict) -> Correlation:
    _check_schema(obj, CORRELATION_SCHEMA)
    c = Correlation(np.asarray(_require(obj, "table"), dtype=float))
    violations = c.validate()
    if violations:
        raise ValidationError("invalid correlation: " + ", ".join(violations))
    return c


def decomposition_to_dict(dec: RoundingDecomposition) -> dict:
    return {
        "schema": DECOMPOSITION_SCHEMA,
        "weights": [sl.weight for sl in dec.slices],
        "corner_dims": [sl.sub_dim for sl in dec.slices],
        "correlations": [c.table.tolist() for c in dec.correlations],
        "mixed": dec.mixed.table.tolist(),
        "diagnostics": {k: float(v) for k, v in sorted(dec.diagnostics.items())},
    }


def loads(text: str, kind: str):
    obj = _parse_json(text)
    loaders = {
        "game": game_from_dict,
        "strategy": strategy_from_dict,
        "correlation": correlation_from_dict,
    }
    return loaders[kind](obj)


def load_path(path: str, kind: str):
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read(), kind)


def save_path(path: str, obj: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_dumps(obj))

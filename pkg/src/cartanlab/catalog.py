"""Reference actions and the JSON spec-file format."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .exact_algebra import IntMatrix
from .lyapunov import FunctionalFamily, LinearFunctional
from .toral import CartanActionSpec, element

EXAMPLE_A = IntMatrix.of([[3, 2, 1], [2, 2, 1], [1, 1, 1]])
EXAMPLE_B = IntMatrix.of([[2, 1, 1], [1, 2, 0], [1, 0, 1]])
CAT_MAP = IntMatrix.of([[2, 1], [1, 1]])
CAT_SQUARE_PLUS = IntMatrix.of([[2, 3], [3, 5]])

# Squares of units in Z[C], C the companion matrix of x^4 - 4x^3 - 4x^2 + x + 1.
# All three have irreducible characteristic polynomials with four positive roots.
QUARTIC_GENERATORS = (
    IntMatrix.of([[1, 0, -1, -6], [2, 1, -1, -7], [1, 2, 5, 23], [0, 1, 6, 29]]),
    IntMatrix.of([[1, 0, -4, -12], [-4, 1, -4, -16], [4, -4, 17, 44], [0, 4, 12, 65]]),
    IntMatrix.of([[0, 0, -1, -4], [0, 0, -1, -5], [1, 0, 4, 15], [0, 1, 4, 20]]),
)


class SchemaError(ValueError):
    """Malformed action spec; the message names the offending field."""


def example_action() -> CartanActionSpec:
    """The Z^2 action on T^3 generated by the commuting pair A, B."""
    return CartanActionSpec((EXAMPLE_A, EXAMPLE_B), ("A", "B"))


def quartic_action() -> CartanActionSpec:
    """A rank-3 Cartan action on T^4: 2^4 - 2 = 14 Weyl chambers."""
    return CartanActionSpec(QUARTIC_GENERATORS, ("G1", "G2", "G3"))


def cat_action() -> CartanActionSpec:
    return CartanActionSpec((CAT_MAP,), ("cat",))


def symplectic_family() -> FunctionalFamily:
    """Exponents of (A x I, I x B) on T^2 x T^2 with A, B hyperbolic.

    Each generator has the eigenvalue 1 twice, so the family is written down
    from the two factor spectra instead of a joint eigenframe. Functionals come
    in negatively proportional pairs.
    """
    la = math.log((3 + math.sqrt(5)) / 2)
    lb = math.log((7 + math.sqrt(45)) / 2)
    return FunctionalFamily(
        (
            LinearFunctional([la, 0.0], "a+"),
            LinearFunctional([-la, 0.0], "a-"),
            LinearFunctional([0.0, lb], "b+"),
            LinearFunctional([0.0, -lb], "b-"),
        ),
        det_one=True,
    )


def random_commuting_pairs(count: int, rng: np.random.Generator, max_power: int = 3) -> list[CartanActionSpec]:
    """Pairs (A^a B^b, A^c B^d) with ad - bc != 0, so the pair still has rank 2."""
    base = example_action()
    out = []
    while len(out) < count:
        a, b, c, d = (int(v) for v in rng.integers(-max_power, max_power + 1, 4))
        if a * d - b * c == 0:
            continue
        out.append(CartanActionSpec((element(base, (a, b)), element(base, (c, d))), ("P", "Q")))
    return out


def action_from_json(obj) -> CartanActionSpec:
    if not isinstance(obj, dict):
        raise SchemaError("spec: expected a JSON object")
    if "generators" not in obj:
        raise SchemaError("generators: missing")
    gens = obj["generators"]
    if not isinstance(gens, list) or not gens:
        raise SchemaError("generators: expected a non-empty list of square integer matrices")
    mats = []
    for i, g in enumerate(gens):
        where = f"generators[{i}]"
        if not isinstance(g, list) or not g:
            raise SchemaError(f"{where}: expected a non-empty list of rows")
        for r, row in enumerate(g):
            if not isinstance(row, list) or len(row) != len(g):
                raise SchemaError(f"{where}[{r}]: expected a row of length {len(g)}")
            for c, v in enumerate(row):
                if isinstance(v, bool) or not isinstance(v, int):
                    raise SchemaError(f"{where}[{r}][{c}]: expected an integer, got {v!r}")
        mats.append(IntMatrix.of(g))
    if len({m.dim for m in mats}) != 1:
        raise SchemaError("generators: matrices must share one dimension")
    labels = obj.get("labels", [])
    if not isinstance(labels, list) or not all(isinstance(s, str) for s in labels):
        raise SchemaError("labels: expected a list of strings")
    if labels and len(labels) != len(mats):
        raise SchemaError(f"labels: expected {len(mats)} labels, got {len(labels)}")
    return CartanActionSpec(tuple(mats), tuple(labels))


def load_action(path: str | Path) -> CartanActionSpec:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"spec: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return action_from_json(obj)

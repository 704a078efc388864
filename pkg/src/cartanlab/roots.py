"""Root data of SL(n, R): root subgroups, brackets, Lie closure, KAK and averaging.

Root labels are 1-based pairs (i, j), matching the usual matrix-entry notation.
Functionals on the Cartan subalgebra {t : sum t = 0} are stored in reduced
coordinates (t_1, ..., t_{n-1}) with t_n = -(t_1 + ... + t_{n-1}).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .lyapunov import LinearFunctional, proportionality

TRACE_TOL = 1e-12
RANK_TOL = 1e-8
KAK_DET_TOL = 1e-8

Root = tuple[int, int]


@dataclass(frozen=True)
class CartanElement:
    t: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if abs(t.sum()) >= TRACE_TOL * max(1.0, float(np.abs(t).max(initial=0.0))):
            raise ValueError(f"Cartan element must have zero trace, got sum {t.sum():.3e}")
        object.__setattr__(self, "t", t)

    @classmethod
    def from_diagonal(cls, entries: Sequence[float]) -> "CartanElement":
        t = np.log(np.asarray(entries, dtype=float))
        return cls(t - t.mean())

    @classmethod
    def from_reduced(cls, r: Sequence[float]) -> "CartanElement":
        r = np.asarray(r, dtype=float)
        return cls(np.append(r, -r.sum()))

    @property
    def reduced(self) -> np.ndarray:
        return self.t[:-1]

    def matrix(self) -> np.ndarray:
        return np.diag(np.exp(self.t))

    def __neg__(self) -> "CartanElement":
        return CartanElement(-self.t)


@dataclass(frozen=True)
class RootDatum:
    n: int
    roots: tuple[Root, ...] = ()

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not self.roots:
            rs = tuple((i, j) for i in range(1, self.n + 1) for j in range(1, self.n + 1) if i != j)
            object.__setattr__(self, "roots", rs)

    def check(self, root: Root) -> Root:
        i, j = root
        if i == j:
            raise ValueError(f"({i}, {j}) is not a root: indices must differ")
        if not (1 <= i <= self.n and 1 <= j <= self.n):
            raise ValueError(f"root ({i}, {j}) out of range for n = {self.n}")
        return (i, j)

    def functional(self, root: Root) -> LinearFunctional:
        """t_i - t_j in reduced coordinates."""
        i, j = self.check(root)
        full = np.zeros(self.n)
        full[i - 1] += 1
        full[j - 1] -= 1
        return LinearFunctional(full[:-1] - full[-1], f"beta{i}{j}")

    def reduce_functional(self, full: Sequence[float], label: str = "") -> LinearFunctional:
        """Restrict a functional given on R^n to the trace-zero subspace."""
        full = np.asarray(full, dtype=float)
        return LinearFunctional(full[:-1] - full[-1], label)

    @property
    def dimension(self) -> int:
        return self.n * self.n - 1

    def parabolic_codimension(self) -> int:
        """Codimension of the stabiliser of a line: sl_n minus Cartan, positive roots and the (n-1)-block."""
        n = self.n
        dim_p = (n - 1) + n * (n - 1) // 2 + (n - 1) * (n - 2) // 2
        return self.dimension - dim_p


def root_value(datum: RootDatum, root: Root, a: CartanElement) -> float:
    i, j = datum.check(root)
    if len(a.t) != datum.n:
        raise ValueError("Cartan element has the wrong size")
    return float(a.t[i - 1] - a.t[j - 1])


def _exact(v) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


def unipotent(datum: RootDatum, root: Root, v) -> np.ndarray:
    """Identity plus v in entry (i, j); exact (object dtype) for int/Fraction v."""
    i, j = datum.check(root)
    if _exact(v):
        u = np.array([[Fraction(int(r == c)) for c in range(datum.n)] for r in range(datum.n)], dtype=object)
        u[i - 1, j - 1] = Fraction(v)
    else:
        u = np.eye(datum.n)
        u[i - 1, j - 1] = float(v)
    return u


def conjugation_residual(datum: RootDatum, a: CartanElement, root: Root, v: float) -> float:
    """|| s u(v) s^-1 - u(exp(beta(a)) v) || with s = exp(a)."""
    s = a.matrix()
    sinv = np.diag(np.exp(-a.t))
    lhs = s @ unipotent(datum, root, float(v)) @ sinv
    rhs = unipotent(datum, root, math.exp(root_value(datum, root, a)) * float(v))
    return float(np.max(np.abs(lhs - rhs)))


def group_commutator(datum: RootDatum, r1: Root, r2: Root, s, t) -> np.ndarray:
    u = lambda r, v: unipotent(datum, r, v)  # noqa: E731
    return u(r1, s) @ u(r2, t) @ u(r1, -s) @ u(r2, -t)


@dataclass(frozen=True)
class BracketResult:
    kind: str  # "commute" | "bracket-root" | "cartan-direction"
    root: Root | None = None
    parameter: object = None


def root_bracket(datum: RootDatum, r1: Root, r2: Root, s=Fraction(1), t=Fraction(1)) -> BracketResult:
    """Classify the group commutator u^{r1}(s) u^{r2}(t) u^{r1}(-s) u^{r2}(-t)."""
    (i, j), (k, l) = datum.check(r1), datum.check(r2)
    if (k, l) == (j, i):
        return BracketResult("cartan-direction")
    c = group_commutator(datum, r1, r2, s, t)
    eye = np.eye(datum.n, dtype=object if c.dtype == object else float)
    off = c - eye
    nz = [(p, q) for p in range(datum.n) for q in range(datum.n) if off[p, q] != 0]
    if not nz:
        return BracketResult("commute")
    if len(nz) == 1 and nz[0][0] != nz[0][1]:
        p, q = nz[0]
        return BracketResult("bracket-root", (p + 1, q + 1), off[p, q])
    raise AssertionError(f"unexpected commutator support {nz}")


def _elementary(n: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((n, n))
    e[i - 1, j - 1] = 1.0
    return e


def _cartan_basis(n: int) -> list[np.ndarray]:
    return [_elementary(n, i, i) - _elementary(n, i + 1, i + 1) for i in range(1, n)]


@dataclass
class LieSubalgebraBasis:
    basis: list[np.ndarray]
    n: int

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, x: np.ndarray, tol: float = RANK_TOL) -> bool:
        v = x.ravel()
        for b in self.basis:
            v = v - (b.ravel() @ v) * b.ravel()
        return float(np.linalg.norm(v)) <= tol * max(1.0, float(np.linalg.norm(x)))

    def closure_defect(self) -> float:
        worst = 0.0
        for a, b in itertools.combinations(self.basis, 2):
            br = a @ b - b @ a
            v = br.ravel()
            for e in self.basis:
                v = v - (e.ravel() @ v) * e.ravel()
            worst = max(worst, float(np.linalg.norm(v)))
        return worst


def _orthonormal_add(basis: list[np.ndarray], x: np.ndarray, tol: float) -> bool:
    v = x.ravel().astype(float)
    scale = max(1.0, float(np.linalg.norm(v)))
    for _ in range(2):  # re-orthogonalise once for stability
        for b in basis:
            v = v - (b.ravel() @ v) * b.ravel()
    nv = float(np.linalg.norm(v))
    if nv <= tol * scale:
        return False
    basis.append((v / nv).reshape(x.shape))
    return True


def lie_closure(
    datum: RootDatum, seed: Iterable[Root], include_cartan: bool = False, tol: float = RANK_TOL
) -> LieSubalgebraBasis:
    """Smallest bracket-closed subspace of sl_n containing the seed root vectors."""
    n = datum.n
    basis: list[np.ndarray] = []
    gens = [_elementary(n, *datum.check(r)) for r in seed]
    if include_cartan:
        gens += _cartan_basis(n)
    for g in gens:
        _orthonormal_add(basis, g, tol)
    if not basis:
        raise ValueError("seed must be nonempty")
    done = 0
    while done < len(basis):
        # bracket every new element against everything before it
        size = len(basis)
        for a in range(done, size):
            for b in range(size):
                x = basis[a] @ basis[b] - basis[b] @ basis[a]
                _orthonormal_add(basis, x, tol)
                if len(basis) == datum.dimension:
                    return LieSubalgebraBasis(basis, n)
        done = size
    return LieSubalgebraBasis(basis, n)


@dataclass(frozen=True)
class KAK:
    k1: np.ndarray
    a: np.ndarray  # diagonal entries, positive, descending
    k2: np.ndarray
    residual: float


def kak_decompose(g: np.ndarray) -> KAK:
    """g = k1 diag(a) k2 with k1, k2 in SO(n) and a positive, sorted descending."""
    g = np.asarray(g, dtype=float)
    det = float(np.linalg.det(g))
    if abs(det - 1.0) > KAK_DET_TOL:
        raise ValueError(f"kak_decompose needs det 1 (got {det:.6g}); near-singular or not in SL(n)")
    u, s, vt = np.linalg.svd(g)
    if np.linalg.det(u) < 0:
        # det(u) det(vt) = 1, so both are negative: flip one column/row pair
        u[:, -1] *= -1
        vt[-1, :] *= -1
    res = float(np.max(np.abs(u @ np.diag(s) @ vt - g)))
    return KAK(u, s, vt, res)


def random_sl(n: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        m = rng.normal(size=(n, n))
        d = np.linalg.det(m)
        if abs(d) > 1e-3:
            if d < 0:
                m[0] *= -1
                d = -d
            return m / d ** (1.0 / n)


@dataclass
class ResonanceReport:
    resonant: dict[Root, list[int]]
    nonresonant: list[Root]

    def to_json(self) -> dict:
        return {
            "resonant": {f"{i},{j}": v for (i, j), v in self.resonant.items()},
            "nonresonant": [list(r) for r in self.nonresonant],
        }


def resonance_classify(datum: RootDatum, fiberwise: Sequence[LinearFunctional]) -> ResonanceReport:
    resonant: dict[Root, list[int]] = {}
    nonres: list[Root] = []
    for r in datum.roots:
        beta = datum.functional(r)
        hits = [k for k, f in enumerate(fiberwise) if proportionality(beta, f) == 1]
        if hits:
            resonant[r] = hits
        else:
            nonres.append(r)
    return ResonanceReport(resonant, nonres)


# ---------------------------------------------------------------------------
# SL(3) averaging schedule


@dataclass
class Stage:
    name: str
    element: CartanElement  # oriented so the functional is positive on it
    subgroup: Root
    invariance: list[Root]
    functional_value: float
    commutes: bool  # beta_subgroup(element) == 0

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "element_diag": [float(x) for x in np.exp(self.element.t)],
            "element_log": [float(x) for x in self.element.t],
            "averaged_over": f"U{self.subgroup[0]}{self.subgroup[1]}",
            "functional_value": self.functional_value,
            "commutes_with_element": self.commutes,
            "invariance": ["A"] + [f"U{i}{j}" for i, j in self.invariance],
        }


@dataclass
class AveragingSchedule:
    stages: list[Stage]
    verdict: str
    closure_dim: int
    permutation: tuple[int, ...] = (1, 2, 3)
    trace: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "stages": [s.to_json() for s in self.stages],
            "verdict": self.verdict,
            "closure_dim": self.closure_dim,
            "permutation": list(self.permutation),
        }


_QUARTER = (0.25, 2.0, 2.0)


def _permute_diag(entries: Sequence[float], perm: Sequence[int]) -> tuple[float, ...]:
    # perm maps position k (1-based) to perm[k-1]
    out = [0.0] * 3
    for k, p in enumerate(perm):
        out[p - 1] = entries[k]
    return tuple(out)


def _permute_root(r: Root, perm: Sequence[int]) -> Root:
    return (perm[r[0] - 1], perm[r[1] - 1])


def _commuting_survivors(datum: RootDatum, previous: list[Root], new: Root) -> list[Root]:
    return [r for r in previous if root_bracket(datum, r, new).kind == "commute"]


def _opposites(roots: list[Root]) -> list[Root]:
    out = list(roots)
    for i, j in roots:
        if (j, i) not in out:
            out.append((j, i))
    return out


def averaging_schedule_sl3(lam: LinearFunctional, generic: bool = False) -> AveragingSchedule:
    """Two-stage averaging bookkeeping for a nonzero functional on the SL(3) Cartan.

    Stage 1 evaluates the functional at diag(1/4, 2, 2) and diag(2, 2, 1/4); the
    second case is the first conjugated by the permutation swapping indices 1 and 3.
    The element is oriented so the functional is positive, and the measure is
    averaged over the root subgroup commuting with it. A-invariance plus invariance
    under a root subgroup is promoted to invariance under its opposite. Stage 2
    repeats this with diag(2, 2, 1/4) (Case 1, U12) or diag(2, 1/4, 2) (Case 2, U13),
    keeping only earlier invariances that commute with the new subgroup. The final
    invariance set is fed to the Lie closure; the verdict is Haar iff it spans sl_3.

    With ``generic`` the stage elements are chosen as the candidate (among the three
    diagonal permutations of (1/4, 2, 2)) on which the functional is largest in
    absolute value, instead of the fixed order.
    """
    datum = RootDatum(3)
    if len(lam.coeffs) == 3:
        lam = datum.reduce_functional(lam.coeffs, lam.label)
    if len(lam.coeffs) != 2:
        raise ValueError("functional must live on the SL(3) Cartan (2 reduced or 3 full coordinates)")
    if lam.is_zero():
        raise ValueError("averaging schedule needs a nonzero functional")
    tol = 1e-12 * lam.norm
    value = lambda diag: lam(CartanElement.from_diagonal(diag).reduced)  # noqa: E731
    trace = []

    first = [(0.25, 2.0, 2.0), (2.0, 2.0, 0.25)]
    if generic:
        cands = [(0.25, 2.0, 2.0), (2.0, 0.25, 2.0), (2.0, 2.0, 0.25)]
        first = [max(cands, key=lambda d: abs(value(d)))]
    if abs(value(first[0])) > tol:
        s_diag = first[0]
    else:
        s_diag = first[1]
    if generic:
        # permutation carrying the reference element (1/4, 2, 2) onto s_diag
        perm = next(p for p in itertools.permutations((1, 2, 3)) if _permute_diag(_QUARTER, p) == tuple(s_diag))
    else:
        perm = (1, 2, 3) if tuple(s_diag) == _QUARTER else (3, 2, 1)
    trace.append("stage 1: " + ", ".join(f"lambda{tuple(d)} = {value(d):.6g}" for d in first))

    stages = []

    def run_stage(name: str, diag, subgroup: Root, previous: list[Root]) -> list[Root]:
        el = CartanElement.from_diagonal(diag)
        v = lam(el.reduced)
        if v < 0:
            el = -el
            v = -v
        survivors = _commuting_survivors(datum, previous, subgroup) if previous else []
        inv = _opposites(survivors + [subgroup])
        commutes = abs(root_value(datum, subgroup, el)) <= 1e-12
        stages.append(Stage(name, el, subgroup, inv, float(v), commutes))
        trace.append(
            f"{name}: element diag {tuple(round(float(x), 6) for x in np.exp(el.t))}, lambda = {v:.6g} > 0, "
            f"average over U{subgroup[0]}{subgroup[1]} then A; invariant under A, "
            + ", ".join(f"U{i}{j}" for i, j in inv)
        )
        return inv

    inv1 = run_stage("first averaging", s_diag, _permute_root((2, 3), perm), [])
    case1 = _permute_diag((2.0, 2.0, 0.25), perm)
    case2 = _permute_diag((2.0, 0.25, 2.0), perm)
    if generic:
        pick = max((case1, case2), key=lambda d: abs(value(d)))
        which = 1 if pick == case1 else 2
    else:
        which = 1 if abs(value(case1)) > tol else 2
    if which == 1:
        inv2 = run_stage("second averaging, case 1", case1, _permute_root((1, 2), perm), inv1)
    else:
        inv2 = run_stage("second averaging, case 2", case2, _permute_root((1, 3), perm), inv1)
    closure = lie_closure(datum, inv2, include_cartan=True)
    verdict = "Haar" if closure.dim == datum.dimension else f"invariant subalgebra of dim {closure.dim}"
    trace.append(f"closure of invariance set: dim {closure.dim} -> {verdict}")
    return AveragingSchedule(stages, verdict, closure.dim, tuple(perm), trace)


def verify_schedule(schedule: AveragingSchedule, lam: LinearFunctional) -> bool:
    """Re-evaluate every recorded sign condition of a schedule."""
    datum = RootDatum(3)
    if len(lam.coeffs) == 3:
        lam = datum.reduce_functional(lam.coeffs)
    for st in schedule.stages:
        if not lam(st.element.reduced) > 0:
            return False
        if abs(root_value(datum, st.subgroup, st.element)) > 1e-12:
            return False
    if schedule.verdict == "Haar":
        return lie_closure(datum, schedule.stages[-1].invariance, include_cartan=True).dim == 8
    return True

"""Lyapunov exponent functionals, kernels, sign chambers and coarse classes."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .exact_algebra import JointEigenframe, RealSpectrum

PROPORTIONALITY_TOL = 1e-9
NEUTRAL_TOL = 1e-10
ZERO_SUM_TOL = 1e-10
PERTURBATION_STEPS = 64


class NoSeparatorError(ValueError):
    pass


class SymplecticPairError(ValueError):
    """Some functional has a negatively proportional partner."""

    def __init__(self, index: int, pairs: list[tuple[int, int]]):
        self.index = index
        self.pairs = pairs
        listed = ", ".join(f"({a}, {b})" for a, b in pairs)
        super().__init__(f"functional {index} has a negatively proportional partner; symplectic pairs: {listed}")


@dataclass(frozen=True)
class LinearFunctional:
    coeffs: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))

    def __call__(self, n) -> float:
        return float(np.dot(self.coeffs, np.asarray(n, dtype=float)))

    @property
    def rank(self) -> int:
        return len(self.coeffs)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def is_zero(self) -> bool:
        return self.norm == 0.0

    def scaled(self, c: float) -> "LinearFunctional":
        return LinearFunctional(c * self.coeffs, self.label)

    def to_json(self) -> dict:
        return {"label": self.label, "coeffs": [float(c) for c in self.coeffs]}


@dataclass(frozen=True)
class FunctionalFamily:
    functionals: tuple[LinearFunctional, ...]
    multiplicities: tuple[int, ...] = ()
    det_one: bool = False

    def __post_init__(self):
        fs = tuple(self.functionals)
        mult = tuple(self.multiplicities) or (1,) * len(fs)
        if len(mult) != len(fs) or any(m < 1 for m in mult):
            raise ValueError("multiplicities must be positive, one per functional")
        if len({f.rank for f in fs}) > 1:
            raise ValueError("all functionals must have the same rank")
        object.__setattr__(self, "functionals", fs)
        object.__setattr__(self, "multiplicities", mult)
        if self.det_one and fs and self.weighted_sum_norm() >= ZERO_SUM_TOL:
            raise ValueError(f"det-one family has nonzero exponent sum ({self.weighted_sum_norm():.3e})")

    def __len__(self):
        return len(self.functionals)

    def __getitem__(self, i) -> LinearFunctional:
        return self.functionals[i]

    @property
    def rank(self) -> int:
        return self.functionals[0].rank

    def matrix(self) -> np.ndarray:
        return np.array([f.coeffs for f in self.functionals])

    def weighted_sum(self) -> np.ndarray:
        return sum(m * f.coeffs for m, f in zip(self.multiplicities, self.functionals))

    def weighted_sum_norm(self) -> float:
        return float(np.max(np.abs(self.weighted_sum())))

    def values(self, n) -> np.ndarray:
        return self.matrix() @ np.asarray(n, dtype=float)

    def to_json(self) -> dict:
        return {
            "functionals": [f.to_json() for f in self.functionals],
            "multiplicities": list(self.multiplicities),
            "det_one": self.det_one,
        }


def functionals_from_action(
    frame: JointEigenframe, spectra: Sequence[RealSpectrum], labels: Sequence[str] | None = None
) -> FunctionalFamily:
    """Coefficients of the j-th functional are the logs of the paired eigenvalues."""
    k = len(frame.eigenvalues)
    d = len(frame.eigenvalues[0])
    if len(spectra) != k:
        raise ValueError("one spectrum per generator required")
    ev = np.array(frame.eigenvalues, dtype=float)  # (k, d)
    if np.any(ev <= 0):
        g, j = map(int, np.argwhere(ev <= 0)[0])
        raise ValueError(f"generator {g} has non-positive eigenvalue {ev[g, j]} on column {j}; log undefined")
    labels = list(labels) if labels else [f"lambda{j + 1}" for j in range(d)]
    fs = tuple(LinearFunctional(np.log(ev[:, j]), labels[j]) for j in range(d))
    det_one = all((-1) ** s.poly.degree * s.poly.coeffs[-1] == 1 for s in spectra)
    return FunctionalFamily(fs, (1,) * d, det_one)


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def kernel_element(lam: LinearFunctional) -> np.ndarray:
    """Unit vector spanning ker(lam) for rank-2 functionals."""
    if lam.rank != 2:
        raise ValueError("kernel_element is defined for rank-2 functionals")
    if lam.is_zero():
        raise ValueError("zero functional has no distinguished kernel element")
    c1, c2 = lam.coeffs
    return _unit(np.array([-c2, c1]))


def proportionality(f: LinearFunctional, g: LinearFunctional, tol: float = PROPORTIONALITY_TOL) -> int:
    """+1 if positively proportional, -1 if negatively, 0 otherwise (or either is zero)."""
    if f.is_zero() or g.is_zero():
        return 0
    u, v = f.coeffs / f.norm, g.coeffs / g.norm
    if np.max(np.abs(u - v)) <= tol:
        return 1
    if np.max(np.abs(u + v)) <= tol:
        return -1
    return 0


def separating_element(beta: LinearFunctional, lam: LinearFunctional) -> np.ndarray:
    """Unit s0 with beta(s0) = 0 and lam(s0) > 0: lam projected onto ker(beta)."""
    if beta.is_zero():
        raise NoSeparatorError("beta is zero")
    b = beta.coeffs
    s = lam.coeffs - (lam.coeffs @ b) / (b @ b) * b
    if np.linalg.norm(s) <= PROPORTIONALITY_TOL * max(lam.norm, 1e-300):
        raise NoSeparatorError("functionals are proportional; they share a kernel")
    return _unit(s)


def negative_pairs(fam: FunctionalFamily) -> list[tuple[int, int]]:
    return [
        (a, b)
        for a, b in itertools.combinations(range(len(fam)), 2)
        if proportionality(fam[a], fam[b]) == -1
    ]


@dataclass(frozen=True)
class Perturbation:
    s0: np.ndarray
    s1: np.ndarray
    step: int  # geometric step at which the search succeeded
    values_s0: tuple[float, ...]
    values_s1: tuple[float, ...]


def pipart_perturbation(fam: FunctionalFamily, i: int) -> Perturbation:
    """Find s1 near the kernel of functional i where it turns negative while all
    other functionals keep the sign they have on that kernel.

    Functionals positively proportional to i vanish on the kernel too; they are
    treated as one coarse exponent with i and must also turn negative.
    """
    lam = fam[i]
    if lam.is_zero():
        raise ValueError(f"functional {i} is zero")
    pairs = negative_pairs(fam)
    if any(i in p for p in pairs):
        raise SymplecticPairError(i, pairs)
    s0 = kernel_element(lam)
    v0 = fam.values(s0)
    coarse = {j for j in range(len(fam)) if j == i or proportionality(fam[j], lam) == 1}
    down = -_unit(lam.coeffs)
    theta = math.pi / 4
    for step in range(PERTURBATION_STEPS):
        s1 = math.cos(theta) * s0 + math.sin(theta) * down
        v1 = fam.values(s1)
        ok = all(
            v1[j] < 0 if j in coarse else np.sign(v1[j]) == np.sign(v0[j]) and v0[j] != 0 for j in range(len(fam))
        )
        if ok:
            return Perturbation(s0, s1, step, tuple(map(float, v0)), tuple(map(float, v1)))
        theta /= 2
    raise ValueError(f"no perturbation found for functional {i} in {PERTURBATION_STEPS} steps")


@dataclass(frozen=True)
class Chamber:
    signs: tuple[int, ...]
    point: np.ndarray

    def label(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.signs)


@dataclass(frozen=True)
class ChamberDiagram:
    kernel_directions: tuple[np.ndarray, ...]
    chambers: tuple[Chamber, ...]
    family: FunctionalFamily

    def __len__(self):
        return len(self.chambers)

    def labels(self) -> list[str]:
        return [c.label() for c in self.chambers]

    def to_json(self) -> dict:
        return {
            "count": len(self.chambers),
            "kernel_directions": [[float(x) for x in v] for v in self.kernel_directions],
            "chambers": [
                {"signs": c.label(), "point": [float(x) for x in c.point]} for c in self.chambers
            ],
            "family": self.family.to_json(),
        }


def _sign_vector(fam: FunctionalFamily, p: np.ndarray) -> tuple[int, ...]:
    return tuple(int(np.sign(v)) for v in fam.values(p))


def chamber_diagram(fam: FunctionalFamily) -> ChamberDiagram:
    """Connected components of the complement of the kernels, with sign labels.

    Rank 2 uses an angular sweep over kernel rays; higher rank tests each
    candidate sign vector for realizability with a linear program.
    """
    if any(f.is_zero() for f in fam.functionals):
        raise ValueError("chamber diagram undefined: family contains a zero functional")
    if fam.rank == 2:
        return _chambers_planar(fam)
    return _chambers_lp(fam)


def _chambers_planar(fam: FunctionalFamily) -> ChamberDiagram:
    dirs = []
    angles = []
    for f in fam.functionals:
        s = kernel_element(f)
        a = math.atan2(s[1], s[0]) % math.pi
        if not any(abs(a - b) < PROPORTIONALITY_TOL or abs(abs(a - b) - math.pi) < PROPORTIONALITY_TOL for b in angles):
            angles.append(a)
            dirs.append(np.array([math.cos(a), math.sin(a)]))
    rays = sorted(angles + [a + math.pi for a in angles])
    chambers = []
    for k, a in enumerate(rays):
        b = rays[k + 1] if k + 1 < len(rays) else rays[0] + 2 * math.pi
        mid = (a + b) / 2
        p = np.array([math.cos(mid), math.sin(mid)])
        chambers.append(Chamber(_sign_vector(fam, p), p))
    return ChamberDiagram(tuple(dirs), tuple(chambers), fam)


def _chambers_lp(fam: FunctionalFamily) -> ChamberDiagram:
    L = fam.matrix()
    k = fam.rank
    chambers = []
    for signs in itertools.product((1, -1), repeat=len(fam)):
        # sigma_j * lambda_j(s) >= 1 with s bounded; feasible iff the open cone is nonempty
        res = linprog(
            np.zeros(k),
            A_ub=-(np.array(signs)[:, None] * L),
            b_ub=-np.ones(len(fam)),
            bounds=[(-1e6, 1e6)] * k,
            method="highs",
        )
        if res.status == 0:
            p = _unit(res.x)
            if _sign_vector(fam, p) == signs:
                chambers.append(Chamber(signs, p))
    kernels = tuple(_unit(np.linalg.svd(f.coeffs[None, :])[2][-1]) for f in fam.functionals)
    return ChamberDiagram(kernels, tuple(chambers), fam)


@dataclass(frozen=True)
class CoarseClass:
    member_indices: frozenset[int]
    representative: LinearFunctional
    zero: bool = False


def coarse_classes(fam: FunctionalFamily) -> tuple[list[CoarseClass], list[tuple[int, int]]]:
    classes: list[list[int]] = []
    zeros = [j for j, f in enumerate(fam.functionals) if f.is_zero()]
    for j, f in enumerate(fam.functionals):
        if f.is_zero():
            continue
        for c in classes:
            if proportionality(fam[c[0]], f) == 1:
                c.append(j)
                break
        else:
            classes.append([j])
    out = [CoarseClass(frozenset(c), fam[c[0]]) for c in classes]
    if zeros:
        out.append(CoarseClass(frozenset(zeros), fam[zeros[0]], zero=True))
    return out, negative_pairs(fam)


def invariant_splitting(fam: FunctionalFamily, n, tol: float = NEUTRAL_TOL):
    """(unstable, stable, neutral) index lists for the element n."""
    n = np.asarray(n, dtype=float)
    if not np.any(n):
        raise ValueError("splitting undefined for the zero element")
    unstable, stable, neutral = [], [], []
    for j, f in enumerate(fam.functionals):
        v = f(n)
        if abs(v) <= tol * max(1.0, f.norm * float(np.linalg.norm(n))):
            neutral.append(j)
        elif v > 0:
            unstable.append(j)
        else:
            stable.append(j)
    return unstable, stable, neutral

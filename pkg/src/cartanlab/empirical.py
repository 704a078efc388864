"""Numerical ergodic-theory estimators.

Orbits that must stay faithful for long times are generated exactly: toral
automorphisms act on a fine rational grid (modulus 2**61 - 1) in integer
arithmetic, and expanding circle maps x -> a x are realised as shifts on digit
sequences. Floating point only enters when grid points are converted for distance
computations.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import qmc

from .exact_algebra import IntMatrix, as_int_matrix
from .lyapunov import FunctionalFamily, LinearFunctional
from .toral import TorusPoint, orbit as exact_orbit

GRID_MODULUS = (1 << 61) - 1
BK_RADII = (0.1, 0.05, 0.02, 0.01)
BK_MIN_COUNT = 30
BK_CENTERS = 1000
BK_MAX_STEPS = 40
RELATION_TOL = 1e-10


def worker_count() -> int:
    """Worker cap from CARTANLAB_THREADS (default: 1)."""
    try:
        return max(1, int(os.environ.get("CARTANLAB_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# Maps


@dataclass(frozen=True)
class ToralMap:
    matrix: IntMatrix

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_int_matrix(self.matrix))

    @property
    def dim(self) -> int:
        return self.matrix.dim

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return np.mod(pts @ self.matrix.to_numpy().T, 1.0)

    def describe(self) -> dict:
        return {"kind": "toral", "matrix": [list(r) for r in self.matrix.rows]}


@dataclass(frozen=True)
class CircleMap:
    """x -> factor * x mod 1."""

    factor: int

    dim = 1

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        return np.mod(self.factor * np.asarray(pts, dtype=float), 1.0)

    def describe(self) -> dict:
        return {"kind": "circle", "factor": self.factor}


@dataclass(frozen=True)
class IdentityMap:
    dim: int = 1

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(pts, dtype=float)

    def describe(self) -> dict:
        return {"kind": "identity", "dim": self.dim}


def torus_delta(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = np.abs(a - b)
    return np.minimum(d, 1.0 - d)


# ---------------------------------------------------------------------------
# Samples


@dataclass
class OrbitSample:
    points: np.ndarray  # (N, d) in [0, 1)^d
    map: dict
    seed: int | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if len(pts) < 2:
            raise ValueError("an orbit sample needs at least two points")
        self.points = pts

    def __len__(self):
        return len(self.points)

    def shifted(self, start: int) -> "OrbitSample":
        return OrbitSample(self.points[start:], self.map, self.seed)

    def relation_defect(self, fmap) -> float:
        """Max torus distance between f(p_k) and p_{k+1}."""
        pred = np.asarray(fmap(self.points[:-1])).reshape(self.points[:-1].shape)
        return float(np.max(torus_delta(pred, self.points[1:])))


@dataclass(frozen=True)
class DigitExpansion:
    """A point of the circle given by its base-``base`` digits."""

    base: int
    digits: np.ndarray

    def points(self, n: int) -> np.ndarray:
        return digits_to_points(self.digits, self.base, n)


def _window(base: int) -> int:
    return int(math.ceil(53 / math.log2(base))) + 1


def digits_to_points(digits: np.ndarray, base: int, n: int) -> np.ndarray:
    """p_k = sum_i digits[k + i] base^-(i+1): the shift orbit of the expansion."""
    w = _window(base)
    digits = np.asarray(digits)
    if len(digits) < n + w - 1:
        raise ValueError(f"need {n + w - 1} digits for {n} points, have {len(digits)}")
    acc = np.zeros(n)
    for i in reversed(range(w)):
        acc = (acc + digits[i : i + n]) / base
    return np.minimum(acc, np.nextafter(1.0, 0.0))


def _int_digits(n: int, base: int, count: int) -> list[int]:
    """The lowest ``count`` base-``base`` digits of n, most significant first."""
    if count <= 64:
        out = [0] * count
        for k in range(count - 1, -1, -1):
            n, out[k] = divmod(n, base)
        return out
    half = count // 2
    hi, lo = divmod(n, base**half)
    return _int_digits(hi, base, count - half) + _int_digits(lo, base, half)


def sqrt_expansion(m: int, base: int, count: int) -> DigitExpansion:
    """Digits of frac(sqrt(m)) computed exactly with integer square roots."""
    root = math.isqrt(m * base ** (2 * count))
    frac = root - math.isqrt(m) * base**count
    if base == 2:
        digits = np.frombuffer(bin(frac)[2:].zfill(count).encode(), dtype=np.uint8) - ord("0")
    else:
        digits = np.array(_int_digits(frac, base, count))
    return DigitExpansion(base, digits.astype(np.int64))


def _halton_point(dim: int, seed: int) -> np.ndarray:
    return qmc.Halton(d=dim, scramble=True, seed=seed).random(1)[0]


def _grid_orbit(m: IntMatrix, start: Sequence[int], n: int) -> np.ndarray:
    rows = m.rows
    out = np.empty((n, m.dim))
    x = list(start)
    for k in range(n):
        out[k] = x
        x = [sum(a * c for a, c in zip(r, x)) % GRID_MODULUS for r in rows]
    return out / GRID_MODULUS


def lebesgue_orbit(fmap, n: int, seed: int = 0) -> OrbitSample:
    """Orbit of a Lebesgue-typical point.

    Toral maps start from a scrambled Halton point rounded to the grid
    (1/P) Z^d, P = 2**61 - 1, and iterate exactly there. Circle maps use i.i.d.
    uniform digits.
    """
    if isinstance(fmap, ToralMap):
        x0 = _halton_point(fmap.dim, seed)
        start = [int(v * GRID_MODULUS) for v in x0]
        pts = _grid_orbit(fmap.matrix, start, n)
    elif isinstance(fmap, CircleMap):
        rng = np.random.default_rng(seed)
        digits = rng.integers(0, fmap.factor, n + _window(fmap.factor))
        pts = digits_to_points(digits, fmap.factor, n)
    elif isinstance(fmap, IdentityMap):
        pts = np.tile(_halton_point(fmap.dim, seed), (n, 1))
    else:
        raise TypeError(f"no Lebesgue sampler for {fmap!r}")
    return OrbitSample(pts, fmap.describe(), seed)


def bernoulli_orbit(factor: int, probs: Sequence[float] | float, n: int, seed: int = 0) -> OrbitSample:
    """Orbit of x -> factor*x for a point whose digits are i.i.d. with ``probs``.

    A scalar ``probs`` with factor 2 is the probability of digit 1.
    """
    if np.isscalar(probs):
        if factor != 2:
            raise ValueError("scalar probability only makes sense for factor 2")
        probs = [1 - float(probs), float(probs)]
    probs = np.asarray(probs, dtype=float)
    if len(probs) != factor or abs(probs.sum() - 1) > 1e-12:
        raise ValueError("need one probability per digit, summing to 1")
    rng = np.random.default_rng(seed)
    digits = rng.choice(factor, size=n + _window(factor), p=probs)
    m = CircleMap(factor)
    return OrbitSample(digits_to_points(digits, factor, n), m.describe() | {"digit_probs": probs.tolist()}, seed)


def periodic_orbit(fmap: ToralMap, x: TorusPoint, n: int) -> OrbitSample:
    """n points of the (eventually periodic) exact orbit of a rational point."""
    res = exact_orbit(fmap.matrix, x, n)
    pts = [[float(c) for c in p.coords] for p in res.points]
    if res.period is not None:
        cycle = pts[res.preperiod :]
        while len(pts) < n:
            pts.extend(cycle)
    return OrbitSample(np.array(pts[:n]), fmap.describe() | {"period": res.period}, None)


# ---------------------------------------------------------------------------
# Birkhoff averages and Lyapunov exponents


def _circle_orbit(fmap: CircleMap, x0, n: int) -> np.ndarray:
    if isinstance(x0, DigitExpansion):
        if x0.base != fmap.factor:
            raise ValueError("digit expansion base must match the map")
        return x0.points(n)
    if isinstance(x0, Fraction):
        out, x = [], x0 % 1
        for _ in range(n):
            out.append(float(x))
            x = x * fmap.factor % 1
        return np.array(out)
    out = np.empty(n)
    x = float(x0) % 1.0
    for k in range(n):
        out[k] = x
        x = (fmap.factor * x) % 1.0
    return out


def birkhoff_average(fmap, phi: Callable, x0, n: int) -> float:
    """(1/n) sum_{i<n} phi(f^i x0).

    ``x0`` may be an OrbitSample, a DigitExpansion (exact shift orbit), a rational
    point (exact orbit), or a float point (plain float iteration). ``phi`` is
    vectorised: it receives an (n,) array for one-dimensional maps, (n, d) otherwise.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(x0, OrbitSample):
        pts = x0.points[:n]
    elif isinstance(fmap, CircleMap):
        pts = _circle_orbit(fmap, x0, n)[:, None]
    elif isinstance(fmap, ToralMap) and isinstance(x0, TorusPoint) and x0.exact:
        pts = periodic_orbit(fmap, x0, n).points
    elif isinstance(fmap, IdentityMap):
        pts = np.tile(np.atleast_1d(np.asarray(x0, dtype=float)), (n, 1))
    else:
        x = np.atleast_1d(np.asarray(getattr(x0, "coords", x0), dtype=float))
        pts = np.empty((n, len(x)))
        for k in range(n):
            pts[k] = x
            x = fmap(x)[0]
    vals = phi(pts[:, 0] if pts.shape[1] == 1 else pts)
    return float(np.mean(np.broadcast_to(vals, (len(pts),))))


@dataclass
class CocycleSample:
    """Matrices A_0, A_1, ... along an orbit; the product is A_{n-1} ... A_0."""

    matrices: np.ndarray  # (n, d, d)

    def __post_init__(self):
        m = np.asarray(self.matrices, dtype=float)
        if m.ndim != 3 or m.shape[1] != m.shape[2] or len(m) < 1:
            raise ValueError("cocycle needs shape (n, d, d) with n >= 1")
        if not np.all(np.isfinite(m)):
            raise ValueError("cocycle entries must be finite")
        self.matrices = m

    @classmethod
    def constant(cls, a, n: int) -> "CocycleSample":
        a = a.to_numpy() if isinstance(a, IntMatrix) else np.asarray(a, dtype=float)
        return cls(np.broadcast_to(a, (n, *a.shape)))

    def __len__(self):
        return len(self.matrices)

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    def inverse(self) -> "CocycleSample":
        """The cocycle of the inverse dynamics: A_{n-1}^-1, ..., A_0^-1."""
        return CocycleSample(np.linalg.inv(self.matrices[::-1]))

    def mean_log_det(self) -> float:
        return float(np.mean(np.log(np.abs(np.linalg.det(self.matrices)))))


def subadditive_sequence(cocycle: CocycleSample) -> np.ndarray:
    """a_n = (1/n) log ||A_{n-1} ... A_0|| for every n, with norm renormalisation."""
    d = cocycle.dim
    p = np.eye(d)
    logscale = 0.0
    out = np.empty(len(cocycle))
    for k, a in enumerate(cocycle.matrices):
        p = a @ p
        s = np.linalg.norm(p, 2)
        if s == 0.0 or not np.isfinite(s):
            raise ValueError(f"cocycle product became singular at step {k}")
        p /= s
        logscale += math.log(s)
        out[k] = logscale / (k + 1)
    return out


def top_lyapunov_estimate(cocycle: CocycleSample) -> float:
    if len(cocycle) < 2:
        raise ValueError("need at least two matrices")
    return float(subadditive_sequence(cocycle)[-1])


def qr_oseledec(cocycle: CocycleSample) -> np.ndarray:
    """Lyapunov spectrum from the running QR factorisation, descending."""
    d = cocycle.dim
    if len(cocycle) < d:
        raise ValueError(f"need at least {d} matrices")
    q = np.eye(d)
    sums = np.zeros(d)
    for k, a in enumerate(cocycle.matrices):
        q, r = np.linalg.qr(a @ q)
        diag = np.abs(np.diag(r))
        if np.any(diag == 0.0):
            raise ValueError(f"QR breakdown (zero diagonal) at step {k}")
        sums += np.log(diag)
    return np.sort(sums / len(cocycle))[::-1]


# ---------------------------------------------------------------------------
# Entropy


@dataclass
class EntropyReport:
    estimate: float
    method: str
    sum_positive_exponents: float | None = None
    margulis_ruelle_ok: bool | None = None
    pesin_equality: bool | None = None
    slack: float | None = None
    details: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def strict_inequality(self) -> bool | None:
        if self.margulis_ruelle_ok is None:
            return None
        return self.margulis_ruelle_ok and not self.pesin_equality

    def to_json(self) -> dict:
        return {
            "estimate": self.estimate,
            "method": self.method,
            "sum_positive_exponents": self.sum_positive_exponents,
            "margulis_ruelle_ok": self.margulis_ruelle_ok,
            "pesin_equality": self.pesin_equality,
            "strict_inequality": self.strict_inequality,
            "slack": self.slack,
            "details": self.details,
            "warnings": self.warnings,
        }


def _sup_delta(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Torus sup-norm distance over the last axis (elementwise max beats reduce for small d)."""
    delta = torus_delta(a, b)
    out = delta[..., 0]
    for k in range(1, delta.shape[-1]):
        out = np.maximum(out, delta[..., k])
    return out


def _ball_counts(pts, uniq, tree, centers, r: float, steps: int) -> np.ndarray:
    """counts[c, n-1] = #{k != j : d(p_{j+i}, p_{k+i}) < r for all i < n}.

    Identical sample points have identical futures, so candidates are the distinct
    points (``uniq`` = first index, multiplicity, class of each index). Steps are
    checked in blocks of growing length (1, 1, 2, 4, ...) with dead candidates
    pruned in between.
    """
    first, mult, cls = uniq
    out = np.zeros((len(centers), steps), dtype=np.int64)
    neighbours = tree.query_ball_point(pts[first[cls[centers]]], r, p=np.inf)
    for c, (j, cand) in enumerate(zip(centers, neighbours)):
        cand = np.asarray(cand, dtype=np.int64)
        weight = mult[cand] - (cand == cls[j])  # the center does not count itself
        keep = weight > 0
        cand, weight = first[cand[keep]], weight[keep]
        i0, block = 0, 1
        while i0 < steps and len(cand):
            offs = np.arange(i0, min(i0 + block, steps))
            i0, block = i0 + len(offs), min(2 * len(offs), 16) if i0 else 1
            dist = _sup_delta(pts[cand[None, :] + offs[:, None]], pts[j + offs][:, None, :])
            alive = np.logical_and.accumulate(dist < r, axis=0)
            out[c, offs] = alive.astype(np.int64) @ weight
            cand, weight = cand[alive[-1]], weight[alive[-1]]
    return out


def _slope(ns: np.ndarray, hs: np.ndarray) -> float:
    return float(np.polyfit(ns, hs, 1)[0])


def brin_katok_entropy(
    fmap,
    orbit: OrbitSample,
    radii: Sequence[float] = BK_RADII,
    centers: int = BK_CENTERS,
    max_steps: int = BK_MAX_STEPS,
    min_count: int = BK_MIN_COUNT,
) -> EntropyReport:
    """Local entropy from the decay of dynamical-ball measures along an orbit.

    mu(B_n(x, r)) is the fraction of orbit points that r-shadow x for n steps,
    read off by shifting indices along the orbit. For each radius the mean of
    -log mu(B_n) is fitted linearly in n over the steps whose median count is at
    least ``min_count``. Step n = 1 is left out: the first refinement only
    reshapes the ball. The estimate is the slope at the smallest radius with at
    least three usable steps.
    """
    if len(orbit) < 10_000:
        raise ValueError("Brin-Katok needs at least 10^4 orbit points")
    pts = orbit.points
    steps = min(max_steps, len(pts) // 4)
    n_eff = len(pts) - steps
    _, first, cls, mult = np.unique(pts[:n_eff], axis=0, return_index=True, return_inverse=True, return_counts=True)
    cls = cls.ravel()
    uniq = (first, mult, cls)
    tree = cKDTree(np.minimum(pts[first], np.nextafter(1.0, 0.0)), boxsize=1.0)
    ctr = np.unique(np.linspace(0, n_eff - 1, min(centers, n_eff)).astype(np.int64))
    workers = worker_count()
    per_radius = {}
    warns = []
    for r in sorted(radii, reverse=True):
        if workers > 1:
            chunks = np.array_split(ctr, workers)
            with ThreadPoolExecutor(workers) as ex:
                parts = list(ex.map(lambda c: _ball_counts(pts, uniq, tree, c, r, steps), chunks))
            counts = np.concatenate(parts)
        else:
            counts = _ball_counts(pts, uniq, tree, ctr, r, steps)
        med = np.median(counts, axis=0)
        usable = np.nonzero(med >= min_count)[0] + 1  # step counts n
        with np.errstate(divide="ignore"):
            logs = -np.log(counts[:, usable - 1] / (n_eff - 1))
        logs[~np.isfinite(logs)] = np.nan
        h = np.nanmean(logs, axis=0) if len(usable) else np.zeros(0)
        fit = usable >= 2
        slope = _slope(usable[fit], h[fit]) if fit.sum() >= 3 else None
        per_radius[r] = {
            "usable_steps": [int(v) for v in usable],
            "mean_neg_log_measure": [float(v) for v in h],
            "slope": slope,
        }
        if slope is None:
            warns.append(f"radius {r}: fewer than three steps n >= 2 with median count >= {min_count}; radius widened")
    usable_r = [r for r in sorted(per_radius) if per_radius[r]["slope"] is not None]
    if not usable_r:
        raise ValueError("no radius produced a usable fit; sample too small")
    chosen = usable_r[0]
    slopes = [per_radius[r]["slope"] for r in usable_r]
    diffs = np.diff(slopes)
    monotone = bool(np.all(diffs >= 0) or np.all(diffs <= 0))
    details = {
        "radii": {str(r): per_radius[r] for r in sorted(per_radius)},
        "chosen_radius": chosen,
        "trend_monotone": monotone,
        "centers": int(len(ctr)),
        "samples": int(len(pts)),
        "max_steps": int(steps),
    }
    return EntropyReport(max(0.0, per_radius[chosen]["slope"]), "brin-katok", details=details, warnings=warns)


def _cells(pts: np.ndarray, partition: Sequence[int]) -> np.ndarray:
    bins = np.asarray(partition, dtype=np.int64)
    idx = np.minimum((pts * bins).astype(np.int64), bins - 1)
    code = np.zeros(len(pts), dtype=np.int64)
    for k in range(len(bins)):
        code = code * bins[k] + idx[:, k]
    return code


def _block_entropy(codes: np.ndarray) -> tuple[float, int]:
    _, counts = np.unique(codes, return_counts=True)
    p = counts / counts.sum()
    return float(-(p * np.log(p)).sum()), len(counts)


@dataclass
class PartitionEntropy:
    rate: float
    block_entropies: list[float]
    differences: list[float]
    reliable_depth: int
    samples: int

    def to_json(self) -> dict:
        return {
            "rate": self.rate,
            "block_entropies": self.block_entropies,
            "differences": self.differences,
            "averages": [h / (k + 1) for k, h in enumerate(self.block_entropies)],
            "reliable_depth": self.reliable_depth,
            "samples": self.samples,
        }


def partition_entropy_profile(
    fmap, partition: Sequence[int], depth: int, sample: OrbitSample | None = None, seed: int = 0, n: int = 1 << 20
) -> PartitionEntropy:
    """Block entropies H_k of the itinerary through a box partition, k = 1..depth.

    The partition splits coordinate i into ``partition[i]`` equal bins. Cells with
    no samples contribute 0 log 0 = 0. Depth k is trusted while the number of
    distinct k-blocks observed is at most 1/50 of the sample size; the rate is the
    conditional entropy H_k - H_{k-1} at the deepest trusted k.
    """
    if depth < 2:
        raise ValueError("depth must be >= 2")
    sample = sample or lebesgue_orbit(fmap, n + depth, seed)
    pts = sample.points
    if pts.shape[1] != len(partition):
        raise ValueError("partition needs one bin count per coordinate")
    cells = _cells(pts, partition)
    k_cells = int(np.prod(partition))
    if k_cells**depth >= 2**62:
        raise ValueError("partition too fine for the requested depth")
    m = len(cells) - depth + 1
    codes = np.zeros(m, dtype=np.int64)
    hs, diffs = [], []
    reliable = 1
    prev = 0.0
    for k in range(depth):
        codes = codes * k_cells + cells[k : k + m]
        h, distinct = _block_entropy(codes)
        hs.append(h)
        diffs.append(h - prev)
        prev = h
        if distinct * 50 <= m:
            reliable = k + 1
    return PartitionEntropy(diffs[reliable - 1], hs, diffs, reliable, m)


def partition_entropy_rate(
    fmap, partition: Sequence[int], depth: int, sample: OrbitSample | None = None, seed: int = 0, n: int = 1 << 20
) -> float:
    return partition_entropy_profile(fmap, partition, depth, sample, seed, n).rate


def entropy_inequality_report(estimate, family: FunctionalFamily, n, method: str | None = None) -> EntropyReport:
    """Compare an entropy estimate with the sum of positive exponents at n.

    Slack is max(5% of the sum, 0.02 nats).
    """
    base = estimate if isinstance(estimate, EntropyReport) else EntropyReport(float(estimate), method or "given")
    vals = family.values(n)
    total = float(sum(m * v for m, v in zip(family.multiplicities, vals) if v > 0))
    slack = max(0.05 * total, 0.02)
    mr = base.estimate <= total + slack
    pesin = abs(base.estimate - total) <= slack
    return EntropyReport(
        base.estimate,
        method or base.method,
        total,
        bool(mr or pesin),
        bool(pesin),
        slack,
        dict(base.details),
        list(base.warnings),
    )


def rank_one_family(*log_rates: float) -> FunctionalFamily:
    """Family of a single map with the given exponents (rank-1 functionals)."""
    return FunctionalFamily(tuple(LinearFunctional([v], f"lambda{k + 1}") for k, v in enumerate(log_rates)))


# ---------------------------------------------------------------------------
# Shear groups of measures on R


@dataclass(frozen=True)
class ShearMeasureSpec:
    kind: str  # "atoms" | "exp-density" | "lebesgue"
    atoms: object = None  # list of (location, weight) or callable (lo, hi) -> list
    rate: float = 0.0

    def __post_init__(self):
        if self.kind not in ("atoms", "exp-density", "lebesgue"):
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if self.kind == "atoms" and self.atoms is None:
            raise ValueError("atomic measure needs atoms")

    @classmethod
    def exponential_lattice(cls, rate: float = 1.0, spacing: float = 1.0) -> "ShearMeasureSpec":
        """sum_n exp(rate * n * spacing) delta_{n * spacing}."""

        def atoms(lo: float, hi: float):
            n0, n1 = math.ceil(lo / spacing - 1e-12), math.floor(hi / spacing + 1e-12)
            return [(n * spacing, math.exp(rate * n * spacing)) for n in range(n0, n1 + 1)]

        return cls("atoms", atoms, rate)

    def atoms_in(self, lo: float, hi: float) -> list[tuple[float, float]]:
        if callable(self.atoms):
            pts = self.atoms(lo, hi)
        else:
            pts = [(float(x), float(w)) for x, w in self.atoms]
        tol = 1e-12 * max(1.0, abs(lo), abs(hi))
        out = sorted((x, w) for x, w in pts if lo - tol <= x <= hi + tol)
        if any(w <= 0 for _, w in out):
            raise ValueError("atom weights must be positive")
        return out

    def density(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "exp-density":
            return np.exp(self.rate * x)
        return np.ones_like(x)


@dataclass(frozen=True)
class ShearResult:
    proportional: bool
    constant: float | None
    reason: str

    def to_json(self) -> dict:
        return {"proportional": self.proportional, "constant": self.constant, "reason": self.reason}


def shear_probe(nu: ShearMeasureSpec, t: float, window: tuple[float, float] = (-5.0, 5.0)) -> ShearResult:
    """Is the translate (T_t)_* nu a constant multiple of nu on the window?"""
    lo, hi = window
    if not hi > lo:
        raise ValueError("empty window")
    if nu.kind == "lebesgue":
        return ShearResult(True, 1.0, "translation invariant")
    if nu.kind == "exp-density":
        xs = np.linspace(lo, hi, 101)
        ratio = nu.density(xs - t) / nu.density(xs)
        c = float(np.exp(-nu.rate * t))
        if np.max(np.abs(ratio / c - 1)) > 1e-10:
            return ShearResult(False, None, "density ratio not constant")
        return ShearResult(True, c, "exponential density")
    base = nu.atoms_in(lo, hi)
    if len(base) < 3:
        raise ValueError(f"window [{lo}, {hi}] holds {len(base)} atoms; need at least 3")
    moved = [(x + t, w) for x, w in nu.atoms_in(lo - t, hi - t)]
    tol = 1e-12 * max(1.0, abs(lo), abs(hi))
    moved = [(x, w) for x, w in moved if lo - tol <= x <= hi + tol]
    if len(moved) != len(base) or any(abs(a[0] - b[0]) > tol for a, b in zip(base, moved)):
        return ShearResult(False, None, "supports differ (mutually singular on the window)")
    ratios = np.array([m[1] / b[1] for b, m in zip(base, moved)])
    c = float(ratios[0])
    if np.max(np.abs(ratios / c - 1)) > 1e-10:
        return ShearResult(False, None, "weights not uniformly proportional")
    return ShearResult(True, c, "supports match, uniform weight ratio")


# ---------------------------------------------------------------------------
# Growth


@dataclass(frozen=True)
class GrowthResult:
    subexponential: bool
    rate: float
    epsilon: float

    def to_json(self) -> dict:
        return {"subexponential": self.subexponential, "rate": self.rate, "epsilon": self.epsilon}


def subexp_growth_probe(norms: Sequence[float], eps: float) -> GrowthResult:
    """Least-squares slope of log ||Df^n|| against n over the tail half."""
    norms = np.asarray(norms, dtype=float)
    if len(norms) < 10:
        raise ValueError("need at least 10 norms")
    if np.any(norms <= 0):
        raise ValueError("norms must be positive")
    n = np.arange(1, len(norms) + 1)
    half = len(norms) // 2
    rate = _slope(n[half:], np.log(norms[half:]))
    return GrowthResult(bool(rate <= eps), rate, eps)


def operator_norms(m: IntMatrix, count: int) -> np.ndarray:
    """||M^n||_2 for n = 1..count, from exact integer powers."""
    m = as_int_matrix(m)
    out = np.empty(count)
    p = IntMatrix.identity(m.dim)
    for k in range(count):
        p = p @ m
        out[k] = np.linalg.norm(np.array(p.rows, dtype=float), 2)
    return out

"""Z^k actions by toral automorphisms and the x a, x b circle dynamics."""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .exact_algebra import (
    IntMatrix,
    JointEigenframe,
    RealSpectrum,
    UnsupportedDegreeError,
    as_int_matrix,
    char_poly,
    commute,
    is_irreducible_over_q,
    real_spectrum,
    real_spectrum_and_frame,
)
from .lyapunov import FunctionalFamily, functionals_from_action

DEFAULT_BOUND = 20
DENOMINATOR_CAP = 10**6


@dataclass(frozen=True)
class CartanActionSpec:
    """Commuting integer generators of a Z^k action on T^d."""

    generators: tuple[IntMatrix, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        gens = tuple(as_int_matrix(g) for g in self.generators)
        if not gens:
            raise ValueError("at least one generator required")
        if len({g.dim for g in gens}) != 1:
            raise ValueError("generators must share one dimension")
        labels = tuple(self.labels) or tuple(chr(ord("A") + i) for i in range(len(gens)))
        if len(labels) != len(gens):
            raise ValueError("one label per generator")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "labels", labels)

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def dim(self) -> int:
        return self.generators[0].dim

    @cached_property
    def _spectral(self) -> tuple[list[RealSpectrum], JointEigenframe]:
        return real_spectrum_and_frame(self.generators)

    @property
    def spectra(self) -> list[RealSpectrum]:
        return self._spectral[0]

    @property
    def frame(self) -> JointEigenframe:
        return self._spectral[1]

    @cached_property
    def family(self) -> FunctionalFamily:
        return functionals_from_action(self.frame, self.spectra)

    def to_json(self) -> dict:
        return {"generators": [[list(r) for r in g.rows] for g in self.generators], "labels": list(self.labels)}


def element(spec: CartanActionSpec, n: Sequence[int]) -> IntMatrix:
    """prod_i generator_i ** n_i, exactly (negative powers through the adjugate)."""
    if len(n) != spec.rank:
        raise ValueError(f"element needs {spec.rank} exponents, got {len(n)}")
    out = IntMatrix.identity(spec.dim)
    for g, e in zip(spec.generators, n):
        out = out @ (g ** int(e))
    return out


@dataclass
class ValidationReport:
    det_one: bool
    distinct_real_spectra: bool
    commuting: bool
    genuine: bool
    irreducible_char_polys: bool
    anosov_elements_exist: bool
    bound: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(
            (
                self.det_one,
                self.distinct_real_spectra,
                self.commuting,
                self.genuine,
                self.irreducible_char_polys,
                self.anosov_elements_exist,
            )
        )

    def to_json(self) -> dict:
        return {
            "det_one": self.det_one,
            "distinct_real_spectra": self.distinct_real_spectra,
            "commuting": self.commuting,
            "genuine": self.genuine,
            "irreducible_char_polys": self.irreducible_char_polys,
            "anosov_elements_exist": self.anosov_elements_exist,
            "bound": self.bound,
            "passed": self.passed,
            "diagnostics": self.diagnostics,
        }


def _sign_pattern(mids: Sequence[float]) -> str:
    return "".join(">1" if m > 1 else ("<1" if m > 0 else "<0") for m in mids)


def _find_relation(gens: Sequence[IntMatrix], bound: int) -> tuple[int, ...] | None:
    """Smallest (sup-norm, then lexicographic) nonzero n with prod g_i^n_i = Id.

    Only n with first nonzero entry positive are searched; n and -n are equivalent.
    """
    d = gens[0].dim
    eye = IntMatrix.identity(d)
    powers = [{e: g**e for e in range(-bound, bound + 1)} for g in gens]
    for radius in range(1, bound + 1):
        for n in itertools.product(range(-radius, radius + 1), repeat=len(gens)):
            if max(map(abs, n)) != radius:
                continue
            first = next(v for v in n if v)
            if first < 0:
                continue
            m = eye
            for p, e in zip(powers, n):
                m = m @ p[e]
            if m == eye:
                return n
    return None


def validate_cartan(spec: CartanActionSpec, bound: int = DEFAULT_BOUND) -> ValidationReport:
    diag: dict = {}
    gens = spec.generators
    dets = [g.det() for g in gens]
    diag["determinants"] = dets
    det_one = all(d == 1 for d in dets)

    polys = [char_poly(g) for g in gens]
    diag["char_polys"] = [list(p.coeffs) for p in polys]
    spectra_ok, patterns, spectra = True, [], []
    for g, p in zip(gens, polys):
        try:
            s = real_spectrum(g)
            spectra.append(s)
            patterns.append(_sign_pattern(s.midpoints))
        except ValueError as exc:
            spectra_ok = False
            spectra.append(None)
            patterns.append(str(exc))
    diag["spectra"] = [s.to_json() if s else None for s in spectra]
    diag["sign_patterns"] = patterns

    pairs = [(a, b) for a, b in itertools.combinations(range(len(gens)), 2) if not commute(gens[a], gens[b])]
    commuting = not pairs
    diag["noncommuting_pairs"] = [list(p) for p in pairs]

    irreducible = True
    irr = []
    for p in polys:
        try:
            ok = is_irreducible_over_q(p)
        except UnsupportedDegreeError as exc:
            ok = False
            diag.setdefault("irreducibility_errors", []).append(str(exc))
        irr.append(ok)
        irreducible &= ok
    diag["irreducible"] = irr

    unimodular = all(abs(d) == 1 for d in dets)
    relation = _find_relation(gens, bound) if commuting and unimodular else None
    diag["relation"] = list(relation) if relation else None
    if not unimodular:
        diag["relation_search"] = "skipped: a generator is not invertible over Z"
    genuine = commuting and unimodular and relation is None

    anosov = False
    if commuting and spectra_ok:
        try:
            fam = spec.family
            rank = int(np.linalg.matrix_rank(fam.matrix(), tol=1e-9))
            diag["log_rank"] = rank
            genuine = genuine and rank == spec.rank
            diag["exponents"] = fam.to_json()["functionals"]
            witness = None
            for radius in range(1, bound + 1):
                for n in itertools.product(range(-radius, radius + 1), repeat=spec.rank):
                    if max(map(abs, n)) == radius and np.all(np.abs(fam.values(n)) > 1e-9):
                        witness = list(n)
                        break
                if witness:
                    break
            diag["anosov_witness"] = witness
            anosov = witness is not None
        except ValueError as exc:
            diag["frame_error"] = str(exc)
            genuine = False
    return ValidationReport(det_one, spectra_ok, commuting, genuine, irreducible, anosov, bound, diag)


def lebesgue_entropy(spec_or_family, n) -> float:
    """Sum of the positive exponents at n, weighted by multiplicity (nats)."""
    fam = spec_or_family.family if isinstance(spec_or_family, CartanActionSpec) else spec_or_family
    n = np.asarray(n, dtype=float)
    if not np.any(n):
        raise ValueError("entropy requested for the zero element")
    vals = fam.values(n)
    return float(sum(m * v for m, v in zip(fam.multiplicities, vals) if v > 0))


# ---------------------------------------------------------------------------
# Torus points and orbits


@dataclass(frozen=True)
class TorusPoint:
    coords: tuple

    def __post_init__(self):
        cs = tuple(self.coords)
        if all(isinstance(c, (int, Fraction)) for c in cs):
            cs = tuple(Fraction(c) % 1 for c in cs)
        else:
            cs = tuple(float(c) % 1.0 for c in cs)
        object.__setattr__(self, "coords", cs)

    @property
    def exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.coords)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def denominator(self) -> int:
        return math.lcm(*(c.denominator for c in self.coords)) if self.exact else 0

    def to_json(self):
        return [str(c) if self.exact else c for c in self.coords]


@dataclass
class OrbitResult:
    points: list[TorusPoint]
    period: int | None = None
    preperiod: int | None = None


def apply(m: IntMatrix, x: TorusPoint) -> TorusPoint:
    rows = m.rows
    if x.exact:
        return TorusPoint(tuple(sum(a * c for a, c in zip(r, x.coords)) for r in rows))
    v = np.array(rows, dtype=float) @ np.array(x.coords)
    return TorusPoint(tuple(v))


def orbit(m: IntMatrix, x: TorusPoint, steps: int, denominator_cap: int = DENOMINATOR_CAP) -> OrbitResult:
    """Iterate x under the automorphism; exact points get cycle detection."""
    m = as_int_matrix(m)
    if m.dim != x.dim:
        raise ValueError(f"dimension mismatch: map {m.dim}, point {x.dim}")
    if x.exact and x.denominator() > denominator_cap:
        raise OverflowError(f"denominator {x.denominator()} exceeds cap {denominator_cap}")
    pts = [x]
    seen = {x.coords: 0} if x.exact else None
    for k in range(1, steps + 1):
        y = apply(m, pts[-1])
        if seen is not None:
            if y.denominator() > denominator_cap:
                raise OverflowError(f"denominator {y.denominator()} exceeds cap {denominator_cap}")
            if y.coords in seen:
                start = seen[y.coords]
                return OrbitResult(pts, k - start, start)
            seen[y.coords] = k
        pts.append(y)
    return OrbitResult(pts)


# ---------------------------------------------------------------------------
# x a, x b on the circle


def _factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def multiplicatively_independent(a: int, b: int) -> bool:
    """True iff a and b are not both powers of one integer."""
    if a < 2 or b < 2:
        raise ValueError("a and b must be >= 2")
    fa, fb = _factorize(a), _factorize(b)
    if fa.keys() != fb.keys():
        return True
    ratios = {Fraction(fa[p], fb[p]) for p in fa}
    return len(ratios) > 1


def furstenberg_rational_orbit(a: int, b: int, q: int) -> set[int]:
    """Residues r with r/q in the forward x a, x b orbit of 1/q."""
    if q < 1:
        raise ValueError("q must be >= 1")
    start = 1 % q
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for r in frontier:
            for m in (a, b):
                s = r * m % q
                if s not in seen:
                    seen.add(s)
                    nxt.append(s)
        frontier = nxt
    return seen


def products_up_to(a: int, b: int, n_max: int) -> list[int]:
    """Sorted {a^m b^n <= N}."""
    out = []
    pa = 1
    while pa <= n_max:
        pb = pa
        while pb <= n_max:
            out.append(pb)
            pb *= b
        pa *= a
    return sorted(set(out))


@dataclass
class FurstenbergProfile:
    a: int
    b: int
    n_max: int
    products: list[int]
    ratios: list[float]
    windows: list[dict]
    orbit_gaps: dict = field(default_factory=dict)

    def window_max(self, lo: int, hi: int) -> float:
        return _window_max(self.products, lo, hi)

    def to_json(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "N": self.n_max,
            "count": len(self.products),
            "products": self.products,
            "ratios": self.ratios,
            "windows": self.windows,
            "orbit_gaps": self.orbit_gaps,
        }


def _window_max(products: list[int], lo: int, hi: int) -> float:
    i = bisect.bisect_left(products, lo)
    best = 0.0
    while i + 1 < len(products) and products[i + 1] <= hi:
        best = max(best, products[i + 1] / products[i])
        i += 1
    return best


def gap_ratio_profile(a: int, b: int, n_max: int, x: float | None = None) -> FurstenbergProfile:
    """Consecutive ratios of S = {a^m b^n <= N} with per-decade maxima."""
    if not multiplicatively_independent(a, b):
        raise ValueError(f"({a}, {b}) are powers of a common integer")
    if n_max < a * b:
        raise ValueError("N must be at least a*b")
    s = products_up_to(a, b, n_max)
    ratios = [t / u for u, t in zip(s, s[1:])]
    windows = []
    k = 0
    while 10 ** (k + 1) <= n_max:
        lo, hi = 10**k, 10 ** (k + 1)
        windows.append({"lo": lo, "hi": hi, "max_ratio": _window_max(s, lo, hi)})
        k += 1
    gaps = {}
    if x is not None:
        k = 1
        while 10**k <= n_max:
            gaps[str(10**k)] = density_profile(a, b, x, 10**k)
            k += 1
    return FurstenbergProfile(a, b, n_max, s, ratios, windows, gaps)


def circle_points(a: int, b: int, x, n_max: int) -> list:
    """{s x mod 1 : s in S}; exact for rational x, one float multiply otherwise."""
    s = products_up_to(a, b, n_max)
    if isinstance(x, (int, Fraction)):
        return sorted({Fraction(t) * x % 1 for t in s})
    return sorted({(t * x) % 1.0 for t in s})


def max_circular_gap(points: Sequence) -> float:
    pts = sorted(points)
    if not pts:
        return 1.0
    gaps = [float(v - u) for u, v in zip(pts, pts[1:])]
    gaps.append(float(1 - pts[-1] + pts[0]))
    return max(gaps)


def density_profile(a: int, b: int, x, n_max: int) -> float:
    if not multiplicatively_independent(a, b):
        raise ValueError(f"({a}, {b}) are powers of a common integer")
    return max_circular_gap(circle_points(a, b, x, n_max))

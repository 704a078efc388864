"""Exact integer matrices, characteristic polynomials and certified real spectra.

Everything that can be decided exactly (determinants, commutation, characteristic
polynomials, irreducibility, root isolation) is done over the integers or the
rationals. Floats only appear in the final eigenframe.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

ROOT_WIDTH = Fraction(1, 10**12)
RESIDUAL_TOL = 1e-8


class NotRealSplitError(ValueError):
    """Characteristic polynomial has complex or repeated roots."""


class CommutationError(ValueError):
    pass


class UnsupportedDegreeError(ValueError):
    pass


@dataclass(frozen=True)
class IntMatrix:
    """Square matrix of Python integers (arbitrary precision)."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in r) for r in self.rows)
        if not rows or any(len(r) != len(rows) for r in rows):
            raise ValueError("IntMatrix must be square and non-empty")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def of(cls, entries: Iterable[Iterable[int]]) -> "IntMatrix":
        return cls(tuple(tuple(r) for r in entries))

    @classmethod
    def identity(cls, d: int) -> "IntMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(d)) for i in range(d)))

    @classmethod
    def from_json(cls, obj: dict) -> "IntMatrix":
        """Parse ``{"dim": d, "entries": [[...], ...]}``."""
        if not isinstance(obj, dict):
            raise ValueError("matrix: expected an object with 'dim' and 'entries'")
        if "entries" not in obj:
            raise ValueError("matrix: missing field 'entries'")
        entries = obj["entries"]
        if not isinstance(entries, list) or not all(isinstance(r, list) for r in entries):
            raise ValueError("matrix.entries: expected a list of rows")
        if any(not isinstance(v, int) or isinstance(v, bool) for r in entries for v in r):
            raise ValueError("matrix.entries: entries must be integers")
        dim = obj.get("dim", len(entries))
        if dim != len(entries) or any(len(r) != dim for r in entries):
            raise ValueError(f"matrix.dim: declared {dim} but entries are not {dim}x{dim}")
        return cls.of(entries)

    def to_json(self) -> dict:
        return {"dim": self.dim, "entries": [list(r) for r in self.rows]}

    @property
    def dim(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        cols = list(zip(*other.rows))
        return IntMatrix(tuple(tuple(sum(a * b for a, b in zip(r, c)) for c in cols) for r in self.rows))

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(tuple(tuple(-v for v in r) for r in self.rows))

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        return IntMatrix(tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return self + (-other)

    def scale(self, c: int) -> "IntMatrix":
        return IntMatrix(tuple(tuple(c * v for v in r) for r in self.rows))

    def trace(self) -> int:
        return sum(self.rows[i][i] for i in range(self.dim))

    def transpose(self) -> "IntMatrix":
        return IntMatrix(tuple(zip(*self.rows)))

    def is_identity(self) -> bool:
        return self == IntMatrix.identity(self.dim)

    def det(self) -> int:
        """Bareiss fraction-free elimination."""
        n = self.dim
        a = [list(r) for r in self.rows]
        sign, prev = 1, 1
        for k in range(n - 1):
            if a[k][k] == 0:
                for i in range(k + 1, n):
                    if a[i][k] != 0:
                        a[k], a[i] = a[i], a[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            prev = a[k][k]
        return sign * a[n - 1][n - 1]

    def minor(self, i: int, j: int) -> "IntMatrix":
        return IntMatrix(
            tuple(tuple(v for c, v in enumerate(r) if c != j) for rr, r in enumerate(self.rows) if rr != i)
        )

    def adjugate(self) -> "IntMatrix":
        n = self.dim
        if n == 1:
            return IntMatrix(((1,),))
        cof = [[(-1) ** (i + j) * self.minor(i, j).det() for j in range(n)] for i in range(n)]
        return IntMatrix(tuple(zip(*cof)))

    def inverse(self) -> "IntMatrix":
        """Exact inverse; only defined for unimodular matrices."""
        d = self.det()
        if d not in (1, -1):
            raise ValueError(f"matrix is not unimodular (det = {d}); no integer inverse")
        return self.adjugate().scale(d)

    def __pow__(self, n: int) -> "IntMatrix":
        base = self if n >= 0 else self.inverse()
        n = abs(n)
        result = IntMatrix.identity(self.dim)
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    def to_numpy(self) -> np.ndarray:
        return np.array(self.rows, dtype=float)

    def max_abs(self) -> int:
        return max(abs(v) for r in self.rows for v in r)


def as_int_matrix(m) -> IntMatrix:
    return m if isinstance(m, IntMatrix) else IntMatrix.of(m)


# ---------------------------------------------------------------------------
# Polynomials (coefficients stored highest degree first)


def _strip(p: list) -> list:
    i = 0
    while i < len(p) - 1 and p[i] == 0:
        i += 1
    return p[i:]


def _polyrem(a: list, b: list) -> list:
    a = [Fraction(v) for v in a]
    b = _strip([Fraction(v) for v in b])
    while len(a) >= len(b) and any(a):
        q = a[0] / b[0]
        for k in range(len(b)):
            a[k] -= q * b[k]
        a = a[1:]
    return _strip(a) if a else [Fraction(0)]


def _polyeval(p: Sequence, x):
    acc = 0 * x
    for c in p:
        acc = acc * x + c
    return acc


@dataclass(frozen=True)
class CharPoly:
    """Monic integer polynomial, coefficients highest degree first."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coeffs)
        if len(coeffs) < 2 or coeffs[0] != 1:
            raise ValueError("CharPoly must be monic of degree >= 1")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return _polyeval(self.coeffs, x)

    def derivative(self) -> list[int]:
        n = self.degree
        return [c * (n - k) for k, c in enumerate(self.coeffs[:-1])]

    def evaluate_matrix(self, m: IntMatrix) -> IntMatrix:
        acc = IntMatrix.identity(m.dim).scale(0)
        eye = IntMatrix.identity(m.dim)
        for c in self.coeffs:
            acc = acc @ m + eye.scale(c)
        return acc

    def __str__(self) -> str:
        terms = []
        n = self.degree
        for k, c in enumerate(self.coeffs):
            e = n - k
            if c == 0:
                continue
            mag = abs(c)
            body = ("" if mag == 1 and e else str(mag)) + ("x" if e else "") + (f"^{e}" if e > 1 else "")
            terms.append(("-" if c < 0 else "+") + " " + body)
        s = " ".join(terms)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]


def char_poly(m: IntMatrix) -> CharPoly:
    """det(xI - M) by the Faddeev-LeVerrier recursion (all divisions exact)."""
    m = as_int_matrix(m)
    n = m.dim
    eye = IntMatrix.identity(n)
    coeffs = [1]
    mk = eye.scale(0)
    c = 1
    for k in range(1, n + 1):
        mk = m @ mk + eye.scale(c)
        c = -(m @ mk).trace() // k
        coeffs.append(c)
    return CharPoly(tuple(coeffs))


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def is_irreducible_over_q(p: CharPoly) -> bool:
    """Irreducibility over Q for monic integer polynomials of degree <= 4.

    By Gauss's lemma a monic integer polynomial factors over Q iff it factors into
    monic integer polynomials, so degree 2-3 reduces to the rational root test and
    degree 4 additionally to a finite search for quadratic factors.
    """
    d = p.degree
    if d > 4:
        raise UnsupportedDegreeError(f"irreducibility test supports degree <= 4, got {d}")
    if d == 1:
        return True
    const = p.coeffs[-1]
    if const == 0:
        return False
    if any(p(r) == 0 for q in _divisors(const) for r in (q, -q)):
        return False
    if d < 4:
        return True
    _, p3, p2, p1, p0 = p.coeffs
    # (x^2 + a x + b)(x^2 + c x + e) with b e = p0
    for b in [s * q for q in _divisors(p0) for s in (1, -1)]:
        e = p0 // b
        if e != b:
            num = p1 - b * p3
            if num % (e - b):
                continue
            a = num // (e - b)
            c = p3 - a
            if b + e + a * c == p2:
                return False
        elif p1 == b * p3:
            # a + c = p3, a c = p2 - 2b
            disc = p3 * p3 - 4 * (p2 - 2 * b)
            if disc >= 0 and math.isqrt(disc) ** 2 == disc and (p3 + math.isqrt(disc)) % 2 == 0:
                return False
    return True


def commute(m1: IntMatrix, m2: IntMatrix) -> bool:
    m1, m2 = as_int_matrix(m1), as_int_matrix(m2)
    if m1.dim != m2.dim:
        raise ValueError(f"dimension mismatch: {m1.dim} vs {m2.dim}")
    return m1 @ m2 == m2 @ m1


# ---------------------------------------------------------------------------
# Real root isolation


def _sturm_chain(p: CharPoly) -> list[list[Fraction]]:
    chain = [[Fraction(c) for c in p.coeffs], [Fraction(c) for c in p.derivative()]]
    while len(chain[-1]) > 1 or chain[-1][0] != 0:
        r = _polyrem(chain[-2], chain[-1])
        if len(r) == 1 and r[0] == 0:
            break
        chain.append([-v for v in r])
    return chain


def _sign_changes(chain, x: Fraction) -> int:
    signs = [v for v in (_polyeval(q, x) for q in chain) if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if (a > 0) != (b > 0))


@dataclass(frozen=True)
class RealSpectrum:
    """Certified real roots in descending order."""

    intervals: tuple[tuple[Fraction, Fraction], ...]
    midpoints: tuple[float, ...]
    multiplicities: tuple[int, ...]
    poly: CharPoly

    def __len__(self):
        return len(self.midpoints)

    def certified(self) -> bool:
        return all(
            lo < hi and self.poly(lo) * self.poly(hi) < 0 for lo, hi in self.intervals
        ) and all(self.intervals[k + 1][1] < self.intervals[k][0] for k in range(len(self) - 1))

    def to_json(self) -> dict:
        return {
            "char_poly": list(self.poly.coeffs),
            "intervals": [[str(lo), str(hi)] for lo, hi in self.intervals],
            "midpoints": list(self.midpoints),
            "multiplicities": list(self.multiplicities),
        }


def _split_point(p: CharPoly, lo: Fraction, hi: Fraction) -> Fraction:
    m = (lo + hi) / 2
    k = 3
    while p(m) == 0:
        m = lo + (hi - lo) * Fraction(k, 2 * k + 1)
        k += 1
    return m


def isolate_real_roots(p: CharPoly, width: Fraction = ROOT_WIDTH) -> RealSpectrum:
    """Isolate every real root of a squarefree, real-split polynomial.

    Sturm counts separate the roots; sign-change bisection then shrinks each
    isolating interval below ``width``; a single float Newton step polishes the
    midpoint.
    """
    chain = _sturm_chain(p)
    if len(chain[-1]) > 1:
        raise NotRealSplitError(f"{p} has repeated roots")
    bound = Fraction(1 + max(abs(c) for c in p.coeffs[1:]))
    lo, hi = -bound, bound
    if _sign_changes(chain, lo) - _sign_changes(chain, hi) != p.degree:
        raise NotRealSplitError(f"{p} has non-real roots")
    stack, isolated = [(lo, hi)], []
    while stack:
        a, b = stack.pop()
        count = _sign_changes(chain, a) - _sign_changes(chain, b)
        if count == 0:
            continue
        if count == 1:
            isolated.append((a, b))
            continue
        m = _split_point(p, a, b)
        stack += [(a, m), (m, b)]
    refined = []
    for a, b in isolated:
        fa = p(a)
        while b - a > width:
            m = _split_point(p, a, b)
            fm = p(m)
            if (fm > 0) == (fa > 0):
                a, fa = m, fm
            else:
                b = m
        refined.append((a, b))
    refined.sort(key=lambda ab: ab[0], reverse=True)
    dp = p.derivative()
    mids = []
    for a, b in refined:
        x = float((a + b) / 2)
        slope = _polyeval(dp, x)
        if slope:
            y = x - _polyeval(p.coeffs, x) / slope
            if float(a) <= y <= float(b):
                x = y
        mids.append(x)
    return RealSpectrum(tuple(refined), tuple(mids), (1,) * len(refined), p)


def real_spectrum(m: IntMatrix) -> RealSpectrum:
    return isolate_real_roots(char_poly(as_int_matrix(m)))


# ---------------------------------------------------------------------------
# Joint eigenframe


@dataclass(frozen=True)
class JointEigenframe:
    Q: np.ndarray
    Qinv: np.ndarray
    residuals: tuple[float, ...]
    pairing: tuple[tuple[int, ...], ...]  # pairing[g][j]: root index of generator g on column j
    eigenvalues: tuple[tuple[float, ...], ...] = field(default=())  # eigenvalues[g][j]

    @property
    def max_residual(self) -> float:
        return max(self.residuals)


def _offdiag_residual(qinv: np.ndarray, m: np.ndarray, q: np.ndarray) -> float:
    d = qinv @ m @ q
    return float(np.max(np.abs(d - np.diag(np.diag(d)))))


def _inverse_iteration(m: np.ndarray, shift: float, v: np.ndarray, steps: int = 3) -> np.ndarray:
    n = m.shape[0]
    scale = max(1.0, abs(shift))
    for k in range(steps):
        eps = 0.0
        while True:
            try:
                y = np.linalg.solve(m - (shift + eps) * np.eye(n), v)
                break
            except np.linalg.LinAlgError:
                eps = eps * 2 if eps else 1e-13 * scale
        if not np.all(np.isfinite(y)):
            break
        v = y / np.linalg.norm(y)
    # fix orientation: largest-magnitude component positive
    return v * np.sign(v[np.argmax(np.abs(v))])


def _frame_from(q: np.ndarray, mats: list[np.ndarray]):
    q = q / np.linalg.norm(q, axis=0)
    qinv = np.linalg.inv(q)
    res = tuple(_offdiag_residual(qinv, m, q) for m in mats)
    return q, qinv, res


def real_spectrum_and_frame(
    gens: Sequence[IntMatrix], tol: float = RESIDUAL_TOL
) -> tuple[list[RealSpectrum], JointEigenframe]:
    """Certified spectra of commuting generators plus one shared eigenframe.

    Columns are ordered by decreasing eigenvalue of the first generator; the
    other generators' eigenvalues are paired to columns through the shared
    eigenvectors.
    """
    gens = [as_int_matrix(g) for g in gens]
    if not gens:
        raise ValueError("need at least one generator")
    d = gens[0].dim
    for a, b in itertools.combinations(range(len(gens)), 2):
        if not commute(gens[a], gens[b]):
            raise CommutationError(f"generators {a} and {b} do not commute")
    spectra = [real_spectrum(g) for g in gens]
    mats = [g.to_numpy() for g in gens]

    # eigenvectors from the generator whose roots are best separated
    def gap(s: RealSpectrum) -> float:
        mids = sorted(s.midpoints)
        return min((b - a) / max(1.0, abs(b)) for a, b in zip(mids, mids[1:])) if d > 1 else 1.0

    lead = max(range(len(gens)), key=lambda g: gap(spectra[g]))
    seed = np.linspace(1.0, 2.0, d)
    cols = [_inverse_iteration(mats[lead], mu, seed.copy()) for mu in spectra[lead].midpoints]
    q, qinv, _ = _frame_from(np.column_stack(cols), mats)

    pairing = []
    for g, s in enumerate(spectra):
        diag = np.diag(qinv @ mats[g] @ q)
        mids = np.array(s.midpoints)
        idx = [int(np.argmin(np.abs(mids - v))) for v in diag]
        if sorted(idx) != list(range(d)):
            raise CommutationError(f"generator {g}: eigenvalues cannot be paired to a joint eigenframe")
        pairing.append(idx)
    # reorder columns by decreasing eigenvalue of generator 0
    order = sorted(range(d), key=lambda j: -spectra[0].midpoints[pairing[0][j]])
    q = q[:, order]
    pairing = [tuple(p[j] for j in order) for p in pairing]
    q, qinv, res = _frame_from(q, mats)
    frame = JointEigenframe(
        q,
        qinv,
        res,
        tuple(pairing),
        tuple(tuple(spectra[g].midpoints[i] for i in p) for g, p in enumerate(pairing)),
    )
    frame = refine_frame(frame, gens)
    if frame.max_residual > tol:
        raise NotRealSplitError(f"joint eigenframe residual {frame.max_residual:.3e} exceeds {tol:.1e}")
    return spectra, frame


def refine_frame(frame: JointEigenframe, gens: Sequence[IntMatrix]) -> JointEigenframe:
    """One joint refinement pass; a column update is kept only if the max residual drops."""
    mats = [as_int_matrix(g).to_numpy() for g in gens]
    q = frame.Q.copy()
    best = max(frame.residuals)
    for j in range(q.shape[1]):
        for g, m in enumerate(mats):
            trial = q.copy()
            trial[:, j] = _inverse_iteration(m, frame.eigenvalues[g][j], q[:, j].copy(), steps=1)
            tq, tqinv, tres = _frame_from(trial, mats)
            if max(tres) < best:
                q, best = tq, max(tres)
    q, qinv, res = _frame_from(q, mats)
    if max(res) > max(frame.residuals):
        return frame
    return JointEigenframe(q, qinv, res, frame.pairing, frame.eigenvalues)

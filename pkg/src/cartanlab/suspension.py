"""Algebraic suspension of a Z^2 Cartan action on T^3.

The suspension is a 5-manifold fibred over T^2 whose fibre over t is the twisted
torus R^3 / M^t Z^3, where M^t interpolates the integer action through the
joint eigenframe. Points are stored fibre-first as (t, x).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .toral import CartanActionSpec

CONDITIONING_LIMIT = 1e6


class ConditioningWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class SuspensionSpec:
    base: CartanActionSpec
    Q: np.ndarray
    Qinv: np.ndarray
    exponents: np.ndarray  # (3, 2): row j holds the coefficients of lambda^j

    @classmethod
    def from_action(cls, base: CartanActionSpec) -> "SuspensionSpec":
        if base.rank != 2 or base.dim != 3:
            raise ValueError("suspension is built for Z^2 actions on T^3")
        frame = base.frame
        spec = cls(base, frame.Q, frame.Qinv, base.family.matrix())
        res = spec.reconstruction_residual()
        if res > 1e-8:
            raise ValueError(f"eigenframe reconstruction residual {res:.3e} exceeds 1e-8")
        return spec

    def reconstruction_residual(self) -> float:
        out = 0.0
        for g, e in zip(self.base.generators, np.eye(2)):
            out = max(out, float(np.max(np.abs(interpolation_matrix(self, e) - g.to_numpy()))))
        return out

    def exponent_values(self, t) -> np.ndarray:
        return self.exponents @ np.asarray(t, dtype=float)

    def direction(self, j: int) -> np.ndarray:
        return self.Q[:, j]


def interpolation_matrix(spec: SuspensionSpec, t) -> np.ndarray:
    """M^t = Q diag(exp(lambda^j(t))) Q^{-1}."""
    return (spec.Q * np.exp(spec.exponent_values(t))) @ spec.Qinv


def _inverse_interpolation(spec: SuspensionSpec, t) -> np.ndarray:
    return (spec.Q * np.exp(-spec.exponent_values(t))) @ spec.Qinv


@dataclass(frozen=True)
class TwistedPoint:
    t: np.ndarray  # in [0, 1)^2
    x: np.ndarray  # in the fundamental parallelepiped of M^t Z^3


def _check_conditioning(spec: SuspensionSpec, t) -> None:
    dil = math.exp(float(np.max(np.abs(spec.exponent_values(t)))))
    if dil > CONDITIONING_LIMIT:
        warnings.warn(f"M^t dilates by {dil:.3e}; lattice reduction is ill-conditioned", ConditioningWarning)


def reduce(spec: SuspensionSpec, t, x) -> TwistedPoint:
    """Canonical representative of x + Lambda_t, with t taken mod Z^2.

    Lambda_t only depends on t mod Z^2, so the reduction uses the fractional part
    of t; x is written in lattice coordinates, wrapped to [0, 1)^3 and mapped back.
    """
    t = np.asarray(t, dtype=float)
    _check_conditioning(spec, t)
    tf = t - np.floor(t)
    tf[tf >= 1.0] = 0.0  # t = -tiny rounds up to 1; the lattice is the same
    c = _inverse_interpolation(spec, tf) @ np.asarray(x, dtype=float)
    c = c - np.floor(c)
    c[c >= 1.0] = 0.0
    return TwistedPoint(tf, interpolation_matrix(spec, tf) @ c)


def act(spec: SuspensionSpec, s, p: TwistedPoint) -> TwistedPoint:
    """s . (t, x + Lambda_t) = (s + t, M^s x + Lambda_{s+t})."""
    s = np.asarray(s, dtype=float)
    _check_conditioning(spec, s)
    return reduce(spec, p.t + s, interpolation_matrix(spec, s) @ p.x)


def fibre_displacement(spec: SuspensionSpec, t, x1, x0) -> np.ndarray:
    """Shortest representative of x1 - x0 modulo Lambda_t, in the ambient coordinates."""
    d = np.asarray(x1, dtype=float) - np.asarray(x0, dtype=float)
    c = _inverse_interpolation(spec, t) @ d
    c = c - np.round(c)
    return interpolation_matrix(spec, t) @ c


def fibre_distance(spec: SuspensionSpec, p: TwistedPoint, q: TwistedPoint) -> float:
    """Distance between two points, measured in eigenframe coordinates along the fibre."""
    dt = p.t - q.t
    dt = dt - np.round(dt)
    d = fibre_displacement(spec, p.t, p.x, q.x)
    return float(max(np.max(np.abs(dt)), np.max(np.abs(spec.Qinv @ d))))


def dilation_residual(spec: SuspensionSpec, s, p: TwistedPoint, j: int, v: float) -> float:
    """How far act(s) is from scaling the j-th eigendirection by exp(lambda^j(s))."""
    if abs(v) > 1:
        raise ValueError("|v| must be <= 1")
    e = spec.direction(j)
    moved = act(spec, s, TwistedPoint(p.t, p.x + v * e))
    base = act(spec, s, p)
    expected = math.exp(spec.exponents[j] @ np.asarray(s, dtype=float)) * v * e
    r = fibre_displacement(spec, base.t, moved.x, base.x + expected)
    return float(np.max(np.abs(spec.Qinv @ r)))

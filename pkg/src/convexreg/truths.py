"""Closed-form regression functions used by the simulation harness and
the packing constructions, with analytically known second derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = ["TruthFunction", "TRUTHS", "get_truth", "polynomial_truth"]


@dataclass(frozen=True)
class TruthFunction:
    """A named regression function on [0, 1].

    ``second_derivative_range(a, b)`` returns the exact (min, max) of the
    second derivative over [a, b] when the function is twice
    differentiable there, else None.
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    convex: bool
    concave: bool
    second_derivative_range: Optional[Callable[[float, float], tuple[float, float]]] = None

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))


def _exp_range(a: float, b: float) -> tuple[float, float]:
    return float(np.exp(a)), float(np.exp(b))


def _x4_range(a: float, b: float) -> tuple[float, float]:
    lo = 0.0 if a <= 0.0 <= b else 12.0 * min(a * a, b * b)
    return lo, 12.0 * max(a * a, b * b)


TRUTHS: dict[str, TruthFunction] = {
    "x2": TruthFunction("x2", lambda x: x * x, convex=True, concave=False,
                        second_derivative_range=lambda a, b: (2.0, 2.0)),
    "x4": TruthFunction("x4", lambda x: x ** 4, convex=True, concave=False,
                        second_derivative_range=_x4_range),
    "exp": TruthFunction("exp", np.exp, convex=True, concave=False,
                         second_derivative_range=_exp_range),
    "hinge": TruthFunction("hinge", lambda x: np.maximum(0.0, 2.0 * x - 1.0),
                           convex=True, concave=False),
    "affine": TruthFunction("affine", lambda x: 0.25 + 0.5 * x, convex=True, concave=True,
                            second_derivative_range=lambda a, b: (0.0, 0.0)),
    "concave_parabola": TruthFunction("concave_parabola", lambda x: -((x - 0.5) ** 2),
                                      convex=False, concave=True,
                                      second_derivative_range=lambda a, b: (-2.0, -2.0)),
    "sin3pi": TruthFunction("sin3pi", lambda x: np.sin(3.0 * np.pi * x),
                            convex=False, concave=False),
}


def get_truth(name: str) -> TruthFunction:
    try:
        return TRUTHS[name]
    except KeyError:
        known = ", ".join(sorted(TRUTHS))
        raise ValueError(f"unknown truth {name!r}; known ids: {known}") from None


def polynomial_truth(coefficients, name: str = "polynomial") -> TruthFunction:
    """Truth backed by a polynomial with exact second-derivative range.

    The range over [a, b] is computed from the real critical points of the
    second derivative, so no numerical differentiation is involved.
    """
    poly = np.polynomial.Polynomial(np.asarray(coefficients, dtype=float))
    second = poly.deriv(2)
    third = poly.deriv(3)

    def sd_range(a: float, b: float) -> tuple[float, float]:
        candidates = [a, b]
        if third.degree() >= 1 or third.coef[0] != 0.0:
            roots = third.roots()
            for r in roots:
                if abs(r.imag) < 1e-12 and a <= r.real <= b:
                    candidates.append(float(r.real))
        vals = second(np.asarray(candidates))
        return float(vals.min()), float(vals.max())

    lo, hi = sd_range(0.0, 1.0)
    return TruthFunction(
        name=name,
        fn=lambda x: poly(x),
        convex=lo >= 0.0,
        concave=hi <= 0.0,
        second_derivative_range=sd_range,
    )

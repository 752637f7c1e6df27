"""Closed-form risk envelopes and local minimax lower bounds.

Every function here evaluates a printed formula; the non-constructive
multiplicative constants of the envelope results are exposed through
``EnvelopeParams.constant`` (default 1) so callers can compare shapes and
scaling laws, which do not depend on the constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .affine import adaptation_envelope, candidate_family
from .grid import SampledFunction, l2_loss
from .packing import CurvatureClass

__all__ = [
    "AssouadInputs",
    "LowerBoundReport",
    "EnvelopeParams",
    "kl_gaussian",
    "pinsker_tv_bound",
    "neighborhood_radius",
    "assouad_lower_bound",
    "risk_envelope_worst_case",
    "risk_envelope_adaptive",
    "entropy_integral_bound",
]


@dataclass(frozen=True)
class AssouadInputs:
    kappa1: float
    kappa2: float
    a: float
    b: float
    c1: float
    c2: float
    sigma: float
    n: int


@dataclass(frozen=True)
class LowerBoundReport:
    """Local minimax lower bound value with its validity regime.

    ``valid`` is True when n^2 >= (2 c2)^{5/2} kappa2 / (sigma sqrt(c1));
    the value is computed regardless but only certified in that regime.
    """

    value: float
    valid: bool
    required_n_sq: float
    inputs: AssouadInputs


@dataclass(frozen=True)
class EnvelopeParams:
    """Shared parameters of the risk envelopes.

    ``constant`` stands in for the non-constructive constant of the
    envelope results; ``r_scale`` is max(1, distance of the center from
    affine functions).
    """

    c1: float
    sigma: float
    n: int
    r_scale: float = 1.0
    constant: float = 1.0

    def __post_init__(self):
        if min(self.c1, self.sigma, self.n, self.r_scale, self.constant) <= 0:
            raise ValueError("all envelope parameters must be positive")

    def log_factor(self) -> float:
        return math.log(math.e * self.n / (2.0 * self.c1))


def kl_gaussian(f: SampledFunction, g: SampledFunction, sigma: float) -> float:
    """Kullback-Leibler divergence between the Gaussian observation laws
    centered at f and g: n l2(f, g) / (2 sigma^2)."""
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return f.grid.n * l2_loss(f, g) / (2.0 * sigma * sigma)


def pinsker_tv_bound(kl: float) -> float:
    """Upper bound sqrt(kl / 2) on total variation from Pinsker's inequality."""
    if kl < 0.0:
        raise ValueError(f"KL divergence must be nonnegative, got {kl}")
    return math.sqrt(kl / 2.0)


def neighborhood_radius(kappa2: float, c1: float, sigma: float, n: int) -> float:
    """Sup-norm radius (kappa2 c1^2 / 32)^{1/5} (sigma^2 / n)^{2/5} of the
    shrinking neighborhood entering the local minimax risk."""
    if min(kappa2, c1, sigma, n) <= 0:
        raise ValueError("kappa2, c1, sigma and n must all be positive")
    return (kappa2 * c1 * c1 / 32.0) ** 0.2 * (sigma * sigma / n) ** 0.4


def assouad_lower_bound(
    cls: CurvatureClass, c1: float, c2: float, sigma: float, n: int
) -> LowerBoundReport:
    """Local minimax lower bound for curvature-class centers:

        kappa1^2 / (4096 c2) * (sqrt(c1)/kappa2)^{8/5} * (b-a) * (sigma^2/n)^{4/5}

    certified whenever n^2 >= (2 c2)^{5/2} kappa2 / (sigma sqrt(c1)).
    Out-of-regime parameter choices are flagged, not rejected.
    """
    if min(c1, c2, sigma, n) <= 0:
        raise ValueError("c1, c2, sigma and n must all be positive")
    value = (
        cls.kappa1 ** 2
        / (4096.0 * c2)
        * (math.sqrt(c1) / cls.kappa2) ** 1.6
        * (cls.b - cls.a)
        * (sigma * sigma / n) ** 0.8
    )
    required = (2.0 * c2) ** 2.5 * cls.kappa2 / (sigma * math.sqrt(c1))
    inputs = AssouadInputs(cls.kappa1, cls.kappa2, cls.a, cls.b, c1, c2, sigma, int(n))
    return LowerBoundReport(
        value=value, valid=bool(n * n >= required), required_n_sq=required, inputs=inputs
    )


def risk_envelope_worst_case(p: EnvelopeParams) -> tuple[float, bool]:
    """Global risk envelope C log(en/(2 c1)) (sigma^2 sqrt(r_scale) / n)^{4/5}.

    The boolean reports whether n satisfies the accompanying sample-size
    requirement n >= C (log(en/(2 c1)))^{5/4} sigma^2 / r_scale^2 with the
    same constant.
    """
    log_term = p.log_factor()
    value = p.constant * log_term * (p.sigma ** 2 * math.sqrt(p.r_scale) / p.n) ** 0.8
    condition = p.n >= p.constant * log_term ** 1.25 * p.sigma ** 2 / p.r_scale ** 2
    return value, bool(condition)


def risk_envelope_adaptive(phi0: SampledFunction, p: EnvelopeParams, max_k: int) -> float:
    """Adaptive risk envelope
    C (log(en/(2 c1)))^{5/4} min over alpha of (l2(phi0, alpha) + sigma^2 k^{5/4}/n),
    with the minimum taken over the candidate family, hence an upper bound."""
    _, envelope = adaptation_envelope(phi0, p.sigma, max_k)
    return p.constant * p.log_factor() ** 1.25 * envelope


def entropy_integral_bound(r: float, phi0: SampledFunction, p: EnvelopeParams, max_k: int) -> float:
    """Entropy-integral envelope
    K (log(en/(2 c1)))^{5/8} r^{3/4} min over alpha of k^{5/8} (r^2 + l2)^{1/8}.

    Proportional to r for affine centers; H(r)/r^2 is decreasing in r.
    """
    if not r > 0.0:
        raise ValueError(f"r must be positive, got {r}")
    best = min(
        float(k) ** 0.625 * (r * r + err) ** 0.125 for k, err in candidate_family(phi0, max_k)
    )
    return p.constant * p.log_factor() ** 0.625 * r ** 0.75 * best

"""Rate expressions, sharp constants, and numerical lemma checks.

Every rate expression is evaluated with its absolute constant set to 1;
only orders and ratios are meaningful, never the constants themselves.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import hermite_e
from scipy.integrate import quad

from .approx import C1, derive, geometric_G
from .errors import DomainError, UsageError
from .markov import MBParams
from .measure import (
    LatticeMeasure,
    add,
    char_fn,
    convolve,
    exp_measure,
    identity,
    norm,
    point_mass,
    power,
    scale,
    subtract,
)

THEOREMS = ("T1", "T2", "T3", "T4", "T5", "C1", "C2")

#: Upper integration limit for the Fourier lower-bound functionals; the
#: Gaussian weight makes the discarded tail smaller than e^-800.
QUAD_T_MAX = 40.0


@dataclass(frozen=True)
class RateReport:
    """One distance measurement against a theorem's rate expression."""

    theorem: str
    norm_kind: str
    actual_distance: float
    rate_expression_value: float
    ratio: float

    def csv_row(self, params: MBParams) -> str:
        return (
            f"{self.theorem},{self.norm_kind},{params.p!r},{params.q_bar!r},"
            f"{params.p0!r},{params.n},{self.actual_distance!r},"
            f"{self.rate_expression_value!r},{self.ratio!r}"
        )


def rate_value(theorem: str, norm_kind: str, params: MBParams) -> float:
    """Right-hand side of the named estimate with every constant set to 1."""
    p, qb, n = params.p, params.q_bar, params.n
    nq = n * qb
    tail = (p + qb) * math.exp(-C1 * n)
    key = (theorem, norm_kind)
    if key == ("T1", "tv"):
        return qb * (p + qb) * min(1.0, 1.0 / math.sqrt(nq)) + min(qb, nq * qb) + tail
    if key == ("T1", "local"):
        return qb * (p + qb) * min(1.0, 1.0 / nq) + min(math.sqrt(qb / n), nq * qb) + tail
    if key == ("T1", "wasserstein"):
        return qb * (p + qb) + min(qb * math.sqrt(nq), nq * qb) + tail
    if key == ("T2", "tv"):
        return qb**2 + p * qb * min(1.0, 1.0 / math.sqrt(nq)) + tail
    if key == ("T2", "local"):
        return qb**2 * min(1.0, 1.0 / math.sqrt(nq)) + p * qb * min(1.0, 1.0 / nq) + tail
    if key == ("T2", "wasserstein"):
        return qb**2 * max(1.0, math.sqrt(nq)) + p * qb + tail
    if key == ("T3", "tv"):
        return (p + qb) * (min(qb, math.sqrt(qb / n)) + math.exp(-C1 * n))
    if key == ("T3", "local"):
        return (p + qb) * (min(qb, 1.0 / n) + math.exp(-C1 * n))
    if key == ("T3", "wasserstein"):
        return (p + qb) * (qb + math.exp(-C1 * n))
    if key in (("T4", "tv"), ("T5", "tv")):
        return (p + qb) * (min(qb, 1.0 / n) + math.exp(-C1 * n))
    if key in (("T4", "local"), ("T5", "local")):
        return (p + qb) * (min(qb, 1.0 / (n * math.sqrt(nq))) + math.exp(-C1 * n))
    if key in (("T4", "wasserstein"), ("T5", "wasserstein")):
        return (p + qb) * (min(qb, math.sqrt(qb / n)) + math.exp(-C1 * n))
    if key == ("C1", "tv"):
        return qb
    if key == ("C1", "local"):
        return math.sqrt(qb / n)
    if key == ("C1", "wasserstein"):
        return qb * math.sqrt(nq)
    if key == ("C2", "tv"):
        return qb + p * math.exp(-C1 * n)
    raise UsageError(
        f"no rate expression for theorem {theorem!r} with norm {norm_kind!r}; "
        f"theorems: {', '.join(THEOREMS)}"
    )


def make_report(theorem: str, norm_kind: str, params: MBParams, actual: float) -> RateReport:
    rate = rate_value(theorem, norm_kind, params)
    return RateReport(theorem, norm_kind, actual, rate, actual / rate)


def sharp_constant_regime(params: MBParams) -> bool:
    """Hypotheses of the sharp-constant statement: p <= 1/4, q_bar <= 1/30, n*q_bar >= 1."""
    return params.p <= 0.25 and params.q_bar <= 1.0 / 30.0 and params.n * params.q_bar >= 1.0


def sharp_constants(params: MBParams):
    """Asymptotically sharp leading constants (A11, A12, A13) for the three norms.

    A11 = 4|g2| / (g1 q sqrt(2 pi e)),
    A12 = |g2| / (g1 sqrt(g1) sqrt(2 pi n q)),
    A13 = |g2| sqrt(2n) / (q sqrt(g1 pi q)).

    Evaluation is permitted outside the sharp-constant regime but flagged
    with a warning.
    """
    if not sharp_constant_regime(params):
        warnings.warn(
            "parameters are outside the sharp-constant regime "
            "(p <= 1/4, q_bar <= 1/30, n*q_bar >= 1)",
            RuntimeWarning,
            stacklevel=2,
        )
    d = derive(params)
    q, n = params.q, params.n
    g1, g2 = d.gamma1, abs(d.gamma2)
    a11 = 4.0 * g2 / (g1 * q * math.sqrt(2.0 * math.pi * math.e))
    a12 = g2 / (g1 * math.sqrt(g1) * math.sqrt(2.0 * math.pi * n * q))
    a13 = g2 * math.sqrt(2.0 * n) / (q * math.sqrt(g1 * math.pi * q))
    return a11, a12, a13


def smoothing_check(k: int, t: float, p: float, kind: str = "tv", tol: float = 1e-12):
    """Both sides of the smoothing inequality for ||Y^k exp(tY)||.

    For the total variation norm the bound is (2k/(te))^(k/2), sharpened to
    3/(te) at k = 2, with 0^0 = 1.  For the local norm the bound shape is
    t^-(k+1)/2 with its constant set to 1 (callers fit the constant); the
    local variant requires p <= 1/2.  Returns (lhs, rhs).
    """
    if k < 0:
        raise ValueError("k must be a nonnegative integer")
    if t <= 0:
        raise ValueError("t must be positive")
    if kind == "local" and p > 0.5:
        raise DomainError("local-norm smoothing bound requires p <= 1/2")
    G = geometric_G(p, min(1e-15, tol / (10.0 * (1.0 + t))))
    Y = subtract(G, identity())
    lhs = norm(convolve(power(Y, k), exp_measure(scale(Y, t), tol)), kind)
    if kind == "tv":
        if k == 0:
            rhs = 1.0
        elif k == 2:
            rhs = 3.0 / (t * math.e)
        else:
            rhs = (2.0 * k / (t * math.e)) ** (k / 2.0)
    elif kind == "local":
        rhs = t ** (-(k + 1) / 2.0)
    else:
        raise ValueError(f"smoothing bound exists for kinds 'tv' and 'local', not {kind!r}")
    return lhs, rhs


@functools.lru_cache(maxsize=None)
def gaussian_derivative_norms(k: int):
    """L1 and sup norms of the k-th derivative of the standard normal density.

    phi_k(x) = (1/sqrt(2 pi)) d^k/dx^k e^(-x^2/2) = (-1)^k He_k(x) phi(x)
    with He_k the probabilists' Hermite polynomial.  The L1 norm is adaptive
    quadrature between the real roots of He_k (absolute accuracy 1e-10); the
    sup is attained at a root of He_{k+1}.
    """
    if not 0 <= k <= 6:
        raise DomainError(f"gaussian derivative norms implemented for k <= 6, got {k}")

    def he(j: int):
        return hermite_e.HermiteE([0.0] * j + [1.0])

    hk = he(k)

    def abs_phi_k(x: float) -> float:
        return abs(hk(x)) * math.exp(-x * x / 2.0) / math.sqrt(2.0 * math.pi)

    roots = np.sort(np.real(hk.roots())) if k >= 1 else np.empty(0)
    cuts = [-np.inf, *roots.tolist(), np.inf]
    l1 = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        piece, _ = quad(abs_phi_k, a, b, epsabs=1e-12, limit=200)
        l1 += piece
    crit = np.sort(np.real(he(k + 1).roots()))
    sup = max(abs_phi_k(float(x)) for x in crit)
    return float(l1), float(sup)


def sharpc_check(k: int, t: float, kind: str = "tv", tol: float = 1e-12):
    """Norm of (I_1 - I)^k exp(t(I_1 - I)) against its Gaussian-density limit.

    limit_term is ||phi_k||_1 / t^(k/2) (tv), ||phi_k||_inf / t^((k+1)/2)
    (local), or ||phi_(k-1)||_1 / t^((k-1)/2) (wasserstein, k >= 1).
    Returns (lhs, limit_term, residual); the residual scales like
    t^-((k+1)/2) for large t.
    """
    if t < 1.0:
        raise ValueError("t must be >= 1")
    base = subtract(point_mass(1), identity())
    meas = convolve(power(base, k), exp_measure(scale(base, t), tol))
    lhs = norm(meas, kind)
    if kind == "tv":
        limit_term = gaussian_derivative_norms(k)[0] / t ** (k / 2.0)
    elif kind == "local":
        limit_term = gaussian_derivative_norms(k)[1] / t ** ((k + 1) / 2.0)
    elif kind == "wasserstein":
        if k < 1:
            raise DomainError("Wasserstein variant requires k >= 1")
        limit_term = gaussian_derivative_norms(k - 1)[0] / t ** ((k - 1) / 2.0)
    else:
        raise ValueError(f"unknown norm kind {kind!r}")
    return lhs, limit_term, abs(lhs - limit_term)


def lower_bound_functional(
    m: LatticeMeasure, b: float, alpha: float, weight: str = "gaussian"
) -> float:
    """Weighted Fourier integral |int w(t) m_hat(t/b) e^(-i(t/b)alpha) dt|.

    A constant multiple of this value bounds ||m|| from below for any b > 1;
    ``alpha`` recenters the transform in lattice units (normally the mean of
    the compared laws) so the integrand does not oscillate.  The weight is
    e^(-t^2/2) or its odd companion t e^(-t^2/2); integration is adaptive
    over |t| <= 40, beyond which the weight is below e^-800.
    """
    if b <= 1.0:
        raise DomainError(f"lower-bound functional requires b > 1, got b = {b}")
    if weight not in ("gaussian", "t_gaussian"):
        raise ValueError(f"weight must be 'gaussian' or 't_gaussian', got {weight!r}")
    if m.is_zero:
        return 0.0
    ks = m.lattice_points() - alpha
    coeffs = m.coeffs

    # m real: the integrand at -t is the conjugate of the integrand at t, so
    # only the even (resp. odd) part survives and the integral is real
    # (resp. imaginary).
    if weight == "gaussian":

        def f(t: float) -> float:
            zt = t / b
            return math.exp(-t * t / 2.0) * float(np.dot(coeffs, np.cos(zt * ks)))

    else:

        def f(t: float) -> float:
            zt = t / b
            return -t * math.exp(-t * t / 2.0) * float(np.dot(coeffs, np.sin(zt * ks)))

    val, _ = quad(f, 0.0, QUAD_T_MAX, epsabs=1e-13, epsrel=1e-10, limit=400)
    return abs(2.0 * val)


def charf_residual_grid(params: MBParams, ts, tol: float = 1e-12):
    """Characteristic-function residuals of the signed-CP ingredients.

    For each t: r1 = |exp(n k1 (Y_hat(t) - it/q)) - 1| and
    r2 = |D2n_hat(t) e^(-i t n g1 / q) - 1|, both evaluated through measures
    built from primitives.  Also returns |D2n_hat(t)|, which stays <= 1.
    Requires p <= 1/2, q_bar <= 1/30 and |t| <= pi.
    """
    if not params.satisfies_cond1:
        raise DomainError("residual bounds require p <= 1/2 and q_bar <= 1/30")
    ts = np.asarray(ts, dtype=np.float64)
    if np.any(np.abs(ts) > math.pi + 1e-12):
        raise DomainError("residual bounds are stated for |t| <= pi")
    d = derive(params)
    n, q = params.n, params.q
    coef_scale = n * (abs(d.kappa1) + d.gamma1 + abs(d.gamma2))
    G = geometric_G(params.p, min(1e-15, tol / (10.0 * (1.0 + coef_scale))))
    Y = subtract(G, identity())
    Y2 = convolve(Y, Y)
    exp_k1 = exp_measure(scale(Y, n * d.kappa1), tol)
    d2n = exp_measure(add(scale(Y, n * d.gamma1), scale(Y2, n * d.gamma2)), tol)
    c1v = char_fn(exp_k1, ts) * np.exp(-1j * ts * n * d.kappa1 / q)
    c2v = char_fn(d2n, ts)
    r1 = np.abs(c1v - 1.0)
    r2 = np.abs(c2v * np.exp(-1j * ts * n * d.gamma1 / q) - 1.0)
    return r1, r2, np.abs(c2v)


def charf_residual(params: MBParams, t: float, tol: float = 1e-12):
    """Scalar version of charf_residual_grid; returns (r1, r2)."""
    r1, r2, _ = charf_residual_grid(params, [t], tol)
    return float(r1[0]), float(r2[0])

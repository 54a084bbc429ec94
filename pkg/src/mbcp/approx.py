"""Derived scalar parameters and the named approximating measures.

Every approximant is a convolution product of a short correction factor H,
an exponential of a polynomial in Y = G - I (G geometric on {1, 2, ...}),
and optionally an explicit second or third order correction.  Negative
coefficients in the exponent make some of these signed measures rather
than probability distributions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .markov import MBParams
from .measure import (
    LatticeMeasure,
    add,
    convolve,
    exp_measure,
    identity,
    point_mass,
    power,
    scale,
    subtract,
)

#: Exponential decay rate constant ln(30/19) entering every remainder term.
C1 = math.log(30.0 / 19.0)


@dataclass(frozen=True)
class DerivedParams:
    """All scalar parameters derived from a chain parameter set.

    gamma1..gamma3 are the geometric factorial cumulant coefficients of the
    law of S_n (gamma3 = gamma1^2 * gamma3_tilde); kappa1, kappa2 capture the
    initial-state correction; lam = n - p0; a1..a3 are the matching
    coefficients of the eigenvalue expansion.
    """

    gamma1: float
    gamma2: float
    gamma3: float
    gamma3_tilde: float
    kappa1: float
    kappa2: float
    lam: float
    a1: float
    a2: float
    a3: float
    c1: float = C1


def derive(params: MBParams) -> DerivedParams:
    """Compute every derived scalar; see DerivedParams for meanings."""
    p, qb, p0, n = params.p, params.q_bar, params.p0, params.n
    q = 1.0 - p
    s = q + qb
    g1 = q * qb / s
    g2 = -(q * qb**2 / s**2) * (p + q / s) - g1**2 / 2.0
    g3t = (
        g1 / 3.0
        + (1.0 / (q * s)) * (p**2 * qb + p * q * (2.0 * qb - q) / s + 2.0 * qb * q**2 / s**2)
        + (qb / s) * (p + q / s)
    )
    g3 = g1**2 * g3t
    k1 = g1 * ((qb - p) / s - p0)
    k2 = p0 * p * q / s
    a1 = g1
    a2 = g2 + a1**2 / 2.0
    a3 = g3 + a1 * a2 - a1**3 / 3.0
    d = DerivedParams(
        gamma1=g1,
        gamma2=g2,
        gamma3=g3,
        gamma3_tilde=g3t,
        kappa1=k1,
        kappa2=k2,
        lam=n - p0,
        a1=a1,
        a2=a2,
        a3=a3,
    )
    # g1 = q*qb/s <= s/4 by AM-GM, so g1 <= 1/4 whenever s <= 1 (and always
    # under the small-q_bar regime); the universal bound is 1/2
    assert 0.0 < d.gamma1 <= 0.5
    assert s > 1.0 or d.gamma1 <= 0.25
    assert d.gamma2 < 0.0
    assert 0.0 <= d.kappa2 <= p
    return d


class ApproximantId(enum.Enum):
    """The named approximating measures; values are the CLI spellings."""

    CP_FIRST = "cp1"  # H * exp(lam*g1*Y)
    CP_COMPOUND_BINOMIAL = "cpb"  # H * H1^lam
    CP_SECOND = "cp2"  # H * exp(lam*g1*Y) * (I + n*g2*Y^2)
    SCP_D2 = "scp2"  # H * exp(k1*Y) * exp(n*(g1*Y + g2*Y^2))
    SCP_D2_CORRECTED = "scp2c"  # SCP_D2 * (I + n*g3*Y^3)
    SCP_D3 = "scp3"  # H * exp(k1*Y) * exp(n*(g1*Y + g2*Y^2 + g3*Y^3))

    @classmethod
    def from_name(cls, name: str) -> "ApproximantId":
        for member in cls:
            if member.value == name:
                return member
        valid = ", ".join(m.value for m in cls)
        raise ValueError(f"unknown approximant {name!r}; valid names: {valid}")


def geometric_G(p: float, eps: float) -> LatticeMeasure:
    """Geometric jump law: mass q*p^(k-1) at k >= 1, tail mass <= eps dropped."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    # tail beyond K points is p^K
    K = max(1, math.ceil(math.log(eps) / math.log(p)))
    ks = np.arange(K)
    masses = (1.0 - p) * p**ks
    return LatticeMeasure(1, masses, truncation_budget=p**K)


def _geometric_eps(tol: float, coef_scale: float) -> float:
    # a tail of mass e in G perturbs exp(c*Y) by about |c|*e
    return min(1e-15, tol / (10.0 * (1.0 + coef_scale)))


def build(id: ApproximantId, params: MBParams, tol: float = 1e-12) -> LatticeMeasure:
    """Assemble the named approximant from measure primitives.

    All approximants have total mass 1 up to O(tol): the exponent measures
    carry zero mass and both H and the polynomial corrections preserve mass.
    """
    d = derive(params)
    n = params.n
    coef_scale = (
        abs(d.lam * d.gamma1)
        + abs(d.kappa1)
        + abs(d.kappa2)
        + n * (d.gamma1 + abs(d.gamma2) + abs(d.gamma3))
    )
    G = geometric_G(params.p, _geometric_eps(tol, coef_scale))
    Y = subtract(G, identity())
    H = add(identity(), scale(Y, d.kappa2))

    if id is ApproximantId.CP_FIRST:
        return convolve(H, exp_measure(scale(Y, d.lam * d.gamma1), tol))
    if id is ApproximantId.CP_COMPOUND_BINOMIAL:
        H1 = add(identity(), scale(Y, d.gamma1))
        return convolve(H, power(H1, d.lam, tol))
    if id is ApproximantId.CP_SECOND:
        Y2 = convolve(Y, Y)
        base = convolve(H, exp_measure(scale(Y, d.lam * d.gamma1), tol))
        return convolve(base, add(identity(), scale(Y2, n * d.gamma2)))
    if id is ApproximantId.SCP_D2:
        Y2 = convolve(Y, Y)
        d2n = exp_measure(add(scale(Y, n * d.gamma1), scale(Y2, n * d.gamma2)), tol)
        return convolve(convolve(H, exp_measure(scale(Y, d.kappa1), tol)), d2n)
    if id is ApproximantId.SCP_D2_CORRECTED:
        Y2 = convolve(Y, Y)
        Y3 = convolve(Y2, Y)
        base = build(ApproximantId.SCP_D2, params, tol)
        return convolve(base, add(identity(), scale(Y3, n * d.gamma3)))
    if id is ApproximantId.SCP_D3:
        Y2 = convolve(Y, Y)
        Y3 = convolve(Y2, Y)
        exponent = add(
            add(scale(Y, n * d.gamma1), scale(Y2, n * d.gamma2)), scale(Y3, n * d.gamma3)
        )
        d3n = exp_measure(exponent, tol)
        return convolve(convolve(H, exp_measure(scale(Y, d.kappa1), tol)), d3n)
    raise ValueError(f"unknown approximant id {id!r}")


def inverse_H(params: MBParams, tol: float = 1e-12) -> LatticeMeasure:
    """Convolution inverse of H = I + kappa2*(G - I) as a CP-type exponential.

    H^-1 = exp{-sum_j (p^j - beta^j)/j (I_j - I)} with
    beta = p*(1 - p0*q/(q + q_bar)) / (1 - kappa2); requires the p <= 1/2,
    q_bar <= 1/30 regime where ||H^-1|| <= e^2.
    """
    if not params.satisfies_cond1:
        raise DomainError("inverse of H requires p <= 1/2 and q_bar <= 1/30")
    d = derive(params)
    p, q, qb = params.p, params.q, params.q_bar
    beta = p * (1.0 - params.p0 * q / (q + qb)) / (1.0 - d.kappa2)
    if d.kappa2 == 0.0:
        return identity()
    J = max(1, math.ceil(math.log(tol / 20.0) / math.log(p)))
    coeffs = np.zeros(J + 1)
    for j in range(1, J + 1):
        c = (p**j - beta**j) / j
        coeffs[j] -= c
        coeffs[0] += c
    return exp_measure(LatticeMeasure(0, coeffs), tol)


def geometric_factorial_moments(nu, p: float, m_max: int):
    """Geometric factorial moments from ordinary factorial moments.

    nu[j-1] is the j-th factorial moment of a law F on the nonnegative
    integers; the returned sequence contains the coefficients of the
    expansion of the Fourier transform of F in powers of (G_hat - 1):

        nu_tilde_m / m! = (-p)^m sum_{j=1}^m nu_j/j! (-q/p)^j C(m-1, m-j).
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    if len(nu) < m_max:
        raise ValueError(f"need at least {m_max} factorial moments, got {len(nu)}")
    q = 1.0 - p
    out = []
    for m in range(1, m_max + 1):
        s = math.fsum(
            nu[j - 1] / math.factorial(j) * (-q / p) ** j * math.comb(m - 1, m - j)
            for j in range(1, m + 1)
        )
        out.append(math.factorial(m) * (-p) ** m * s)
    return out

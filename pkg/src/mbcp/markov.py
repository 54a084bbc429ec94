"""Exact Markov binomial laws by three independent routes.

The chain has states {0, 1} with stay probability p in state 1, entry
probability q_bar from state 0, and initial P(state 1) = p0.  The law of
S_n = xi_1 + ... + xi_n is computed by path enumeration (oracle, small n),
a forward dynamic program, and a spectral transfer-matrix route that scales
to n ~ 1e5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResourceLimitError
from .measure import LatticeMeasure

#: Path enumeration is O(2^(n+1)); refuse beyond this.
BRUTE_FORCE_MAX_N = 20

#: Continuation steps used to track the discriminant square-root branch.
BRANCH_GRID_STEPS = 4096

_DEGENERATE_DISC = 1e-14


@dataclass(frozen=True)
class MBParams:
    """Chain parameters (p, q_bar, p0, n) defining a Markov binomial law.

    p = P(xi_i = 1 | xi_{i-1} = 1), q_bar = P(xi_i = 1 | xi_{i-1} = 0),
    p0 = P(xi_0 = 1), and n is the number of summands.
    """

    p: float
    q_bar: float
    p0: float
    n: int

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must lie in (0, 1), got {self.p}")
        if not 0.0 < self.q_bar < 1.0:
            raise ValueError(f"q_bar must lie in (0, 1), got {self.q_bar}")
        if not 0.0 <= self.p0 <= 1.0:
            raise ValueError(f"p0 must lie in [0, 1], got {self.p0}")
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @property
    def p_bar(self) -> float:
        return 1.0 - self.q_bar

    @property
    def satisfies_cond1(self) -> bool:
        """p <= 1/2 and q_bar <= 1/30, the regime most statements assume."""
        return self.p <= 0.5 and self.q_bar <= 1.0 / 30.0


def brute_force(params: MBParams) -> LatticeMeasure:
    """Sum path probabilities over all 2^(n+1) trajectories of (xi_0..xi_n)."""
    n = params.n
    if n > BRUTE_FORCE_MAX_N:
        raise ResourceLimitError(
            f"path enumeration needs 2^{n + 1} trajectories; limit is n <= {BRUTE_FORCE_MAX_N}"
        )
    size = 1 << (n + 1)
    idx = np.arange(size, dtype=np.uint32)
    prev = (idx & 1).astype(np.float64)
    prob = np.where(prev == 1.0, params.p0, 1.0 - params.p0)
    counts = np.zeros(size, dtype=np.int64)
    for i in range(1, n + 1):
        cur = ((idx >> i) & 1).astype(np.float64)
        prob = prob * (
            prev * cur * params.p
            + prev * (1.0 - cur) * params.q
            + (1.0 - prev) * cur * params.q_bar
            + (1.0 - prev) * (1.0 - cur) * params.p_bar
        )
        counts += cur.astype(np.int64)
        prev = cur
    masses = np.bincount(counts, weights=prob, minlength=n + 1)
    return LatticeMeasure(0, masses)


def exact_dp(params: MBParams) -> LatticeMeasure:
    """Forward recursion over (step, chain state, running count); exact."""
    n = params.n
    s0 = np.zeros(n + 1)
    s1 = np.zeros(n + 1)
    s0[0] = 1.0 - params.p0
    s1[0] = params.p0
    p, q, qb, pb = params.p, params.q, params.q_bar, params.p_bar
    for _ in range(n):
        new1 = np.empty(n + 1)
        new1[0] = 0.0
        new1[1:] = s0[:-1] * qb + s1[:-1] * p
        s0 = s0 * pb + s1 * q
        s1 = new1
    return LatticeMeasure(0, s0 + s1)


def exact_spectral(params: MBParams) -> LatticeMeasure:
    """Transfer-matrix powering at N >= n+1 frequencies, then inverse DFT.

    The characteristic function of S_n is a trigonometric polynomial of
    degree n, so sampling at N = 2^ceil(log2(n+1)) equispaced frequencies
    reconstructs the masses without aliasing.  Powering the marked 2x2
    transition matrix avoids any square-root branch issue.
    """
    n = params.n
    N = 1 << n.bit_length()  # smallest power of two >= n + 1
    z = np.exp(2j * np.pi * np.arange(N) / N)
    p, q, qb, pb = params.p, params.q, params.q_bar, params.p_bar

    m00 = np.full(N, pb, dtype=np.complex128)
    m01 = qb * z
    m10 = np.full(N, q, dtype=np.complex128)
    m11 = p * z
    r00 = np.ones(N, dtype=np.complex128)
    r01 = np.zeros(N, dtype=np.complex128)
    r10 = np.zeros(N, dtype=np.complex128)
    r11 = np.ones(N, dtype=np.complex128)
    k = n
    while k:
        if k & 1:
            r00, r01, r10, r11 = (
                r00 * m00 + r01 * m10,
                r00 * m01 + r01 * m11,
                r10 * m00 + r11 * m10,
                r10 * m01 + r11 * m11,
            )
        k >>= 1
        if k:
            m00, m01, m10, m11 = (
                m00 * m00 + m01 * m10,
                m00 * m01 + m01 * m11,
                m10 * m00 + m11 * m10,
                m10 * m01 + m11 * m11,
            )
    fhat = (1.0 - params.p0) * (r00 + r01) + params.p0 * (r10 + r11)
    masses = np.fft.fft(fhat).real / N
    return LatticeMeasure(0, masses[: n + 1])


def mean_formula(params: MBParams) -> float:
    """E S_n = [n*g1 + k1 + k2 - (k1 + k2)(p - q_bar)^n] / q."""
    p, qb, p0, n = params.p, params.q_bar, params.p0, params.n
    q = 1.0 - p
    s = q + qb
    g1 = q * qb / s
    k1 = g1 * ((qb - p) / s - p0)
    k2 = p0 * p * q / s
    return (n * g1 + k1 + k2 - (k1 + k2) * (p - qb) ** n) / q


def _discriminant(params: MBParams, t: np.ndarray) -> np.ndarray:
    z = np.exp(1j * t)
    return (params.p * z + params.p_bar) ** 2 + 4.0 * z * (params.q_bar - params.p)


def _sqrt_disc_grid(params: MBParams, ts: np.ndarray) -> np.ndarray:
    """Square root of the discriminant, branch-continued along ``ts``.

    ``ts[0]`` must be 0, where the root is q + q_bar > 0.  The principal
    square root is sign-corrected wherever continuity would break.
    """
    d = _discriminant(params, ts)
    a = np.abs(d)
    if np.min(a) < _DEGENERATE_DISC:
        bad = float(ts[int(np.argmin(a))])
        raise DomainError(f"degenerate discriminant |D(t)| < {_DEGENERATE_DISC} near t = {bad}")
    w = np.sqrt(d)
    flips = np.where(np.real(w[1:] * np.conj(w[:-1])) < 0.0, -1.0, 1.0)
    w[1:] *= np.cumprod(flips)
    if w[0].real < 0:
        w = -w
    return w


def eigen_components_hat(params: MBParams, t: float):
    """Eigen transforms (L1, L2, W1, W2) of the marked transition matrix at t.

    The branch of the discriminant square root is tracked by continuation
    from 0, where it is fixed so the leading component equals 1 at t = 0.
    Decomposition: char(S_n)(t) = L1^n W1 + L2^n W2.  Only defined on the
    p <= 1/2, q_bar <= 1/30 regime where the decomposition is claimed.
    """
    if not params.satisfies_cond1:
        raise DomainError("eigen decomposition requires p <= 1/2 and q_bar <= 1/30")
    ts = np.linspace(0.0, float(t), BRANCH_GRID_STEPS + 1)
    w = complex(_sqrt_disc_grid(params, ts)[-1])
    return _components_from_root(params, float(t), w)


def _components_from_root(params: MBParams, t: float, w: complex):
    p, q, qb, pb, p0 = params.p, params.q, params.q_bar, params.p_bar, params.p0
    z = np.exp(1j * t)
    lam1 = (p * z + pb + w) / 2.0
    lam2 = (p * z + pb - w) / 2.0
    e = z - 1.0
    u1 = (q + qb + p * e) / w
    u0 = (q + qb + (2.0 * qb - p) * e) / w
    w1 = p0 / 2.0 * (1.0 + u1) + (1.0 - p0) / 2.0 * (1.0 + u0)
    w2 = p0 / 2.0 * (1.0 - u1) + (1.0 - p0) / 2.0 * (1.0 - u0)
    return complex(lam1), complex(lam2), complex(w1), complex(w2)


def eigen_component_measures(params: MBParams, n_freq: int = 2048):
    """Recover (L1, L2, W1, W2) as lattice measures by Fourier inversion.

    The component transforms are sampled on a uniform frequency grid and
    inverted by FFT; the components decay geometrically on the nonnegative
    lattice, so aliasing is negligible for n_freq >= 512.  Raises if the
    square-root branch fails to close around the circle (the components
    would then not be well-defined measures).
    """
    if not params.satisfies_cond1:
        raise DomainError("eigen decomposition requires p <= 1/2 and q_bar <= 1/30")
    ts = 2.0 * np.pi * np.arange(n_freq + 1) / n_freq
    w = _sqrt_disc_grid(params, ts)
    if abs(w[-1] - w[0]) > 1e-8 * abs(w[0]):
        raise DomainError("discriminant square root does not close around the circle")
    vals = [_components_from_root(params, float(t), complex(wi)) for t, wi in zip(ts[:-1], w[:-1])]
    arr = np.asarray(vals, dtype=np.complex128)
    out = []
    for j in range(4):
        masses = np.fft.fft(arr[:, j]).real / n_freq
        out.append(LatticeMeasure(0, masses))
    return tuple(out)

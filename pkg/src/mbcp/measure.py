"""Arithmetic of finite signed measures on the integer lattice.

A measure is stored densely: an integer offset (smallest support point) and
a contiguous block of float64 coefficients.  All operations are pure
functions returning new values; ``LatticeMeasure`` instances are immutable
and safe to share across threads.

Norm accumulation uses exact summation (``math.fsum``) so that total
variation differences of order 1e-6 survive across 1e5-point supports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .errors import DomainError, ResourceLimitError

#: Hard cap on the support length a convolution result may have.
MAX_SUPPORT_LEN = 1 << 22

#: Switch to FFT convolution when len(a) * len(b) exceeds this product.
DIRECT_CONV_LIMIT = 4096 * 4096

#: Relative magnitude below which FFT convolution output is treated as noise.
FFT_CLEAN_REL = 1e-15

#: Largest |total mass| for which the Wasserstein norm converges.
MASS_ZERO_TOL = 1e-9

NORM_KINDS = ("tv", "local", "wasserstein")

_NORM_ALIASES = {
    "tv": "tv",
    "total_variation": "tv",
    "local": "local",
    "sup": "local",
    "wasserstein": "wasserstein",
    "w": "wasserstein",
}


@dataclass(frozen=True, eq=False)
class LatticeMeasure:
    """Finite signed measure on the integers over a dense support window.

    ``coeffs[i]`` is the mass at lattice point ``offset + i``.  Canonical
    form: first and last coefficients nonzero, and the zero measure is the
    empty coefficient block at offset 0.  ``truncation_budget`` accumulates
    the absolute mass deliberately discarded while producing this value; it
    never decreases under composition.
    """

    offset: int
    coeffs: np.ndarray
    truncation_budget: float = 0.0

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=np.float64, copy=True)
        if arr.ndim != 1:
            raise ValueError("coefficients must form a 1-D sequence")
        if arr.size and not np.all(np.isfinite(arr)):
            raise ValueError("coefficients must all be finite")
        nz = np.flatnonzero(arr)
        if nz.size == 0:
            arr = arr[:0]
            object.__setattr__(self, "offset", 0)
        else:
            lo, hi = int(nz[0]), int(nz[-1]) + 1
            object.__setattr__(self, "offset", int(self.offset) + lo)
            arr = np.ascontiguousarray(arr[lo:hi])
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)
        object.__setattr__(self, "truncation_budget", float(self.truncation_budget))

    # -- basic queries ------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 0

    @property
    def min_k(self) -> int:
        if self.is_zero:
            raise ValueError("zero measure has no support")
        return self.offset

    @property
    def max_k(self) -> int:
        if self.is_zero:
            raise ValueError("zero measure has no support")
        return self.offset + self.coeffs.size - 1

    @property
    def total_mass(self) -> float:
        return math.fsum(self.coeffs.tolist())

    def lattice_points(self) -> np.ndarray:
        return self.offset + np.arange(self.coeffs.size)

    def mass_at(self, k: int) -> float:
        i = k - self.offset
        if 0 <= i < self.coeffs.size:
            return float(self.coeffs[i])
        return 0.0

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        if self.is_zero:
            return "LatticeMeasure(zero)"
        return (
            f"LatticeMeasure(offset={self.offset}, len={self.coeffs.size}, "
            f"tv={float(np.sum(np.abs(self.coeffs))):.6g})"
        )

    # -- serialization ------------------------------------------------------
    def to_csv(self) -> str:
        """Serialize as ``k,mass`` lines in increasing k, shortest round-trip."""
        lines = [f"{k},{v!r}" for k, v in zip(self.lattice_points(), self.coeffs.tolist())]
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_csv(cls, text: str) -> "LatticeMeasure":
        ks: list[int] = []
        vs: list[float] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"measure CSV line {lineno}: expected 'k,mass', got {raw!r}")
            try:
                k = int(parts[0])
                v = float(parts[1])
            except ValueError as exc:
                raise ValueError(f"measure CSV line {lineno}: {exc}") from None
            if ks and k <= ks[-1]:
                raise ValueError(f"measure CSV line {lineno}: lattice points must increase")
            ks.append(k)
            vs.append(v)
        if not ks:
            return cls.zero()
        arr = np.zeros(ks[-1] - ks[0] + 1)
        for k, v in zip(ks, vs):
            arr[k - ks[0]] = v
        return cls(ks[0], arr)

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, budget: float = 0.0) -> "LatticeMeasure":
        return cls(0, np.empty(0), budget)

    @classmethod
    def from_items(cls, items) -> "LatticeMeasure":
        items = dict(items)
        if not items:
            return cls.zero()
        lo, hi = min(items), max(items)
        arr = np.zeros(hi - lo + 1)
        for k, v in items.items():
            arr[k - lo] = v
        return cls(lo, arr)


def point_mass(k: int, mass: float = 1.0, budget: float = 0.0) -> LatticeMeasure:
    """The measure with ``mass`` at lattice point ``k`` (I_k for mass 1)."""
    return LatticeMeasure(k, np.array([mass]), budget)


def identity() -> LatticeMeasure:
    """Convolution identity I = I_0."""
    return point_mass(0)


def _canonical_kind(kind: str) -> str:
    try:
        return _NORM_ALIASES[kind]
    except KeyError:
        raise ValueError(f"unknown norm kind {kind!r}; expected one of {NORM_KINDS}") from None


def _aligned(a: LatticeMeasure, b: LatticeMeasure):
    """Common dense window of two measures: (offset, array_a, array_b)."""
    if a.is_zero and b.is_zero:
        return 0, np.zeros(0), np.zeros(0)
    if a.is_zero:
        return b.offset, np.zeros(b.coeffs.size), b.coeffs.copy()
    if b.is_zero:
        return a.offset, a.coeffs.copy(), np.zeros(a.coeffs.size)
    lo = min(a.offset, b.offset)
    hi = max(a.max_k, b.max_k)
    wa = np.zeros(hi - lo + 1)
    wb = np.zeros(hi - lo + 1)
    wa[a.offset - lo : a.offset - lo + a.coeffs.size] = a.coeffs
    wb[b.offset - lo : b.offset - lo + b.coeffs.size] = b.coeffs
    return lo, wa, wb


def add(a: LatticeMeasure, b: LatticeMeasure) -> LatticeMeasure:
    lo, wa, wb = _aligned(a, b)
    return LatticeMeasure(lo, wa + wb, a.truncation_budget + b.truncation_budget)


def subtract(a: LatticeMeasure, b: LatticeMeasure) -> LatticeMeasure:
    lo, wa, wb = _aligned(a, b)
    return LatticeMeasure(lo, wa - wb, a.truncation_budget + b.truncation_budget)


def scale(m: LatticeMeasure, c: float) -> LatticeMeasure:
    if m.is_zero or c == 0.0:
        return LatticeMeasure.zero(abs(c) * m.truncation_budget)
    return LatticeMeasure(m.offset, m.coeffs * c, abs(c) * m.truncation_budget)


def _quick_tv(m: LatticeMeasure) -> float:
    # plain sum; only used for thresholds, not for reported norms
    return float(np.sum(np.abs(m.coeffs)))


def convolve(a: LatticeMeasure, b: LatticeMeasure) -> LatticeMeasure:
    """Exact convolution (a*b){A} = sum_k a{A-k} b{k}.

    Direct O(n*m) below ``DIRECT_CONV_LIMIT``, FFT above it with post-hoc
    cleaning of magnitudes below ``FFT_CLEAN_REL * ||a|| * ||b||``.
    """
    budget = a.truncation_budget + b.truncation_budget
    if a.is_zero or b.is_zero:
        return LatticeMeasure.zero(budget)
    la, lb = a.coeffs.size, b.coeffs.size
    out_len = la + lb - 1
    if out_len > MAX_SUPPORT_LEN:
        raise ResourceLimitError(
            f"convolution support length {out_len} exceeds MAX_SUPPORT_LEN = {MAX_SUPPORT_LEN}"
        )
    if la * lb <= DIRECT_CONV_LIMIT:
        out = np.convolve(a.coeffs, b.coeffs)
    else:
        out = fftconvolve(a.coeffs, b.coeffs)
        thr = FFT_CLEAN_REL * _quick_tv(a) * _quick_tv(b)
        small = np.abs(out) < thr
        if np.any(small):
            budget += float(np.sum(np.abs(out[small])))
            out[small] = 0.0
    return LatticeMeasure(a.offset + b.offset, out, budget)


def norm(m: LatticeMeasure, kind: str = "tv") -> float:
    """Total variation, local (sup), or Wasserstein norm of ``m``.

    The Wasserstein norm sums |M{(-inf, k]}| over k and diverges unless the
    total mass vanishes; inputs must have |total mass| <= MASS_ZERO_TOL.
    """
    k = _canonical_kind(kind)
    if m.is_zero:
        return 0.0
    if k == "tv":
        return math.fsum(np.abs(m.coeffs).tolist())
    if k == "local":
        return float(np.max(np.abs(m.coeffs)))
    total = m.total_mass
    if abs(total) > MASS_ZERO_TOL:
        raise DomainError(
            f"divergent Wasserstein norm: |total mass| = {abs(total):.3e} "
            f"exceeds {MASS_ZERO_TOL:.1e}"
        )
    # Kahan-compensated running partial sums, then exact summation of |.|
    parts = []
    s = 0.0
    c = 0.0
    for v in m.coeffs.tolist():
        y = v - c
        t = s + y
        c = (t - s) - y
        s = t
        parts.append(abs(s))
    return math.fsum(parts)


def distance(a: LatticeMeasure, b: LatticeMeasure, kind: str = "tv") -> float:
    """norm(a - b, kind)."""
    return norm(subtract(a, b), kind)


def char_fn(m: LatticeMeasure, t):
    """Fourier transform sum_k m{k} e^{itk} by direct summation.

    ``t`` may be a scalar or a 1-D array; the return type matches.
    """
    t_arr = np.asarray(t, dtype=np.float64)
    if m.is_zero:
        return 0j if t_arr.ndim == 0 else np.zeros(t_arr.shape, dtype=np.complex128)
    ks = m.lattice_points()
    if t_arr.ndim == 0:
        return complex(np.dot(m.coeffs, np.exp(1j * float(t_arr) * ks)))
    out = np.empty(t_arr.shape, dtype=np.complex128)
    for i, ti in enumerate(t_arr):
        out[i] = np.dot(m.coeffs, np.exp(1j * ti * ks))
    return out


def _exp_series(m: LatticeMeasure, tol: float) -> LatticeMeasure:
    # caller guarantees ||m|| <= 0.5, so terms decay like 0.5^k / k!
    result = identity()
    term = identity()
    for k in range(1, 500):
        term = scale(convolve(term, m), 1.0 / k)
        result = add(result, term)
        if term.is_zero or norm(term, "tv") < tol:
            return result
    raise ResourceLimitError("exponential series did not converge within 500 terms")


def exp_measure(m: LatticeMeasure, tol: float = 1e-12) -> LatticeMeasure:
    """exp(m) = sum_k m^k / k!, with ||result - exp(m)|| = O(tol).

    Computed by scaling and squaring: the plain series overflows and suffers
    catastrophic cancellation once ||m|| reaches a few tens, while
    exp(m) = exp(m / 2^s)^(2^s) with ||m / 2^s|| <= 1/2 stays stable because
    every intermediate square is a near-unit-norm measure.  Each inner stage
    runs at tolerance tol / 2^(s+2) so the squarings cannot amplify the total
    error past tol.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if m.is_zero:
        return point_mass(0, budget=m.truncation_budget)
    tv = norm(m, "tv")
    s = max(0, math.ceil(math.log2(tv / 0.5))) if tv > 0.5 else 0
    inner_tol = tol / 2.0 ** (s + 2)
    r = _exp_series(scale(m, 0.5**s), inner_tol)
    for _ in range(s):
        r = truncate(convolve(r, r), inner_tol)
    return r


def log_measure(m: LatticeMeasure, tol: float = 1e-12) -> LatticeMeasure:
    """ln(m) = sum_k (-1)^(k+1)/k (m - I)^k; requires ||m - I|| < 1 strictly."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = subtract(m, identity())
    nx = norm(x, "tv")
    if nx >= 1.0:
        raise DomainError(f"log series divergent: ||m - I|| = {nx} >= 1")
    if x.is_zero:
        return LatticeMeasure.zero(m.truncation_budget)
    result = LatticeMeasure.zero()
    power_x = identity()
    trunc_eps = tol * 1e-6
    for k in range(1, 100_000):
        power_x = truncate(convolve(power_x, x), trunc_eps)
        term_tv = norm(power_x, "tv") / k
        result = add(result, scale(power_x, (-1.0) ** (k + 1) / k))
        if term_tv < tol:
            return result
    raise ResourceLimitError("log series did not converge within 100000 terms")


def power(m: LatticeMeasure, s, tol: float = 1e-12) -> LatticeMeasure:
    """m^s: binary exponentiation for integer s >= 0, else exp(s * ln(m))."""
    is_int = isinstance(s, (int, np.integer)) or (isinstance(s, float) and s.is_integer())
    if is_int and s >= 0:
        k = int(s)
        result = identity()
        base = m
        while k:
            if k & 1:
                result = convolve(result, base)
            k >>= 1
            if k:
                base = convolve(base, base)
        return result
    return exp_measure(scale(log_measure(m, tol), float(s)), tol)


def truncate(m: LatticeMeasure, eps: float) -> LatticeMeasure:
    """Drop smallest-magnitude end coefficients while total dropped <= eps.

    The dropped absolute mass is added to the truncation budget; the TV norm
    changes by at most eps.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if m.is_zero:
        return m
    c = np.abs(m.coeffs)
    lo, hi = 0, c.size - 1
    removed = 0.0
    while lo <= hi:
        left, right = float(c[lo]), float(c[hi])
        v = left if left <= right else right
        if removed + v > eps:
            break
        removed += v
        if left <= right:
            lo += 1
        else:
            hi -= 1
    if lo > hi:
        return LatticeMeasure.zero(m.truncation_budget + removed)
    return LatticeMeasure(
        m.offset + lo, m.coeffs[lo : hi + 1], m.truncation_budget + removed
    )


def scale_support(m: LatticeMeasure, a: int) -> LatticeMeasure:
    """Pushforward k -> a*k for integer a >= 1; TV norm is unchanged."""
    if not isinstance(a, (int, np.integer)) or a < 1:
        raise ValueError(f"support scale must be an integer >= 1, got {a!r}")
    if a == 1 or m.is_zero:
        return m
    out = np.zeros((m.coeffs.size - 1) * a + 1)
    out[::a] = m.coeffs
    return LatticeMeasure(m.offset * a, out, m.truncation_budget)

"""Individual risk model with Markov-dependent two-point claims.

A portfolio consists of independent homogeneous groups; within a group the
claim indicators follow a two-state chain entered from state 0, and each
claim has a fixed integer size.  The exact aggregate law is a convolution
of support-scaled Markov binomial laws; the compound Poisson approximation
exponentiates the matching geometric jump measures.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple

from .approx import C1, geometric_G
from .errors import ResourceLimitError, UsageError
from .markov import MBParams, exact_dp
from .measure import (
    MAX_SUPPORT_LEN,
    LatticeMeasure,
    add,
    convolve,
    exp_measure,
    identity,
    norm,
    point_mass,
    scale,
    scale_support,
    subtract,
)


@dataclass(frozen=True)
class RiskGroup:
    """Homogeneous group: n risks of claim size a with chain (p, q_bar).

    p is the within-group persistence P(claim | previous risk claimed) and
    must stay below 1/2; the first risk claims with probability q_bar, i.e.
    the chain starts from state 0.
    """

    a: int
    n: int
    p: float
    q_bar: float

    def __post_init__(self):
        if not isinstance(self.a, int) or self.a < 1:
            raise ValueError(f"claim size must be a positive integer, got {self.a!r}")
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"group size must be a positive integer, got {self.n!r}")
        if not 0.0 < self.p < 0.5:
            raise ValueError(f"persistence p must lie in (0, 1/2), got {self.p}")
        if not 0.0 < self.q_bar < 1.0:
            raise ValueError(f"q_bar must lie in (0, 1), got {self.q_bar}")

    def mb_params(self) -> MBParams:
        return MBParams(p=self.p, q_bar=self.q_bar, p0=0.0, n=self.n)


@dataclass(frozen=True)
class Portfolio:
    groups: tuple

    def __post_init__(self):
        groups = tuple(self.groups)
        if not groups:
            raise ValueError("portfolio must contain at least one group")
        object.__setattr__(self, "groups", groups)

    @classmethod
    def from_csv(cls, text: str) -> "Portfolio":
        """Parse 'a,n,p,q_bar' rows; errors carry the offending line number."""
        reader = csv.reader(io.StringIO(text))
        rows = [(lineno, row) for lineno, row in enumerate(reader, start=1) if row]
        if not rows:
            raise UsageError("portfolio CSV is empty")
        header_line, header = rows[0]
        if [h.strip() for h in header] != ["a", "n", "p", "q_bar"]:
            raise UsageError(
                f"portfolio CSV line {header_line}: expected header 'a,n,p,q_bar'"
            )
        groups = []
        for lineno, row in rows[1:]:
            if len(row) != 4:
                raise UsageError(f"portfolio CSV line {lineno}: expected 4 fields, got {len(row)}")
            try:
                group = RiskGroup(
                    a=int(row[0]), n=int(row[1]), p=float(row[2]), q_bar=float(row[3])
                )
            except ValueError as exc:
                raise UsageError(f"portfolio CSV line {lineno}: {exc}") from None
            groups.append(group)
        if not groups:
            raise UsageError("portfolio CSV contains a header but no groups")
        return cls(tuple(groups))


def aggregate_exact(pf: Portfolio) -> LatticeMeasure:
    """Exact aggregate claim law: convolution of support-scaled group laws."""
    support_len = sum(g.n * g.a for g in pf.groups) + 1
    if support_len > MAX_SUPPORT_LEN:
        raise ResourceLimitError(
            f"aggregate support length {support_len} exceeds MAX_SUPPORT_LEN = {MAX_SUPPORT_LEN}"
        )
    total = point_mass(0)
    for g in pf.groups:
        total = convolve(total, scale_support(exact_dp(g.mb_params()), g.a))
    return total


def aggregate_cp(pf: Portfolio, tol: float = 1e-12) -> LatticeMeasure:
    """Compound Poisson approximation of the aggregate claim law.

    Exponentiates sum_m n_m q_m q_bar_m / (q_m + q_bar_m) times the
    support-scaled geometric jump measure of each group.
    """
    exponent = LatticeMeasure.zero()
    lam_total = 0.0
    for g in pf.groups:
        q = 1.0 - g.p
        lam_total += g.n * q * g.q_bar / (q + g.q_bar)
    for g in pf.groups:
        q = 1.0 - g.p
        lam = g.n * q * g.q_bar / (q + g.q_bar)
        G = geometric_G(g.p, min(1e-15, tol / (10.0 * (1.0 + lam_total))))
        Y = subtract(G, identity())
        exponent = add(exponent, scale(scale_support(Y, g.a), lam))
    return exp_measure(exponent, tol)


class CpDistanceReport(NamedTuple):
    distance: float
    bound_sum: float


def cp_distance_report(pf: Portfolio, tol: float = 1e-12) -> CpDistanceReport:
    """TV distance between the exact and CP aggregate laws, and the per-group
    bound sum (constants set to 1)."""
    dist = norm(subtract(aggregate_exact(pf), aggregate_cp(pf, tol)), "tv")
    bound = 0.0
    for g in pf.groups:
        nq = g.n * g.q_bar
        bound += (
            g.q_bar * (g.p + g.q_bar) * min(1.0, 1.0 / math.sqrt(nq))
            + min(g.q_bar, nq * g.q_bar)
            + (g.p + g.q_bar) * math.exp(-C1 * g.n)
        )
    return CpDistanceReport(distance=dist, bound_sum=bound)

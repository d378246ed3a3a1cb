"""Orbifold Riemann surfaces with degree-zero canonical sheaf.

Everything here is exact rational arithmetic: a signature (g; m_1 >= ...)
has orbifold canonical degree 2g - 2 + n - sum(1/m_i), and the flat ones
(degree zero) are enumerated by a complete search.  Each flat signature is
realised as an explicit quotient of a flat torus by a cyclic rotation
group, which ties this module back to the quotient geometry where the
signature can be recomputed from actual fixed points.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

from .quotient import GroupElement, OrbifoldSignature, PeriodData, build_orbifold

__all__ = [
    "OrbifoldSignature",
    "canonical_degree",
    "enumerate_flat",
    "realize",
    "chern_status",
    "ChernStatus",
]


def canonical_degree(sig: OrbifoldSignature) -> Fraction:
    """Exact degree 2g - 2 + n - sum(1/m_i) of the canonical sheaf."""
    n = len(sig.orders)
    return Fraction(2 * sig.genus - 2 + n) - sum(Fraction(1, m) for m in sig.orders)


def _ceil(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def _order_tuples(target: Fraction, slots: int, max_order: int):
    """Non-increasing tuples (m_1 >= ... >= m_slots >= 2) with
    sum(1/m_i) = target, enumerated exactly, largest order first.

    Bounds: the leading (largest) order m satisfies slots/target <= m,
    since the other reciprocals are at least 1/m; and 1/m >= target -
    (slots-1)/2 since the others are at most 1/2 each.  When the latter is
    vacuous the search is capped by max_order.
    """
    if slots == 0:
        if target == 0:
            yield ()
        return
    if target <= 0:
        return
    lo = max(2, _ceil(Fraction(slots) / target))
    slack = target - Fraction(slots - 1, 2)
    hi = max_order if slack <= 0 else min(max_order, int(1 / slack))
    for m in range(lo, hi + 1):
        for tail in _order_tuples(target - Fraction(1, m), slots - 1, m):
            yield (m, *tail)


def enumerate_flat(genus: int) -> list:
    """All signatures with at least one special point and canonical degree
    zero.  The summands 1 - 1/m_i lie in [1/2, 1), which pins down
    n/2 <= 2 - 2g < n; only genus zero with n in {3, 4} survives."""
    if genus < 0:
        raise ValueError("genus must be >= 0")
    rhs = 2 - 2 * genus
    out = []
    if rhs <= 0:
        return out
    for n in range(rhs + 1, 2 * rhs + 1):  # n/2 <= rhs < n
        target = Fraction(n - rhs)  # sum(1/m_i) = n - (2 - 2g)
        for orders in _order_tuples(target, n, max_order=4 * n):
            out.append(OrbifoldSignature(genus, orders))
    return sorted(out)


_TAU_HEX = np.exp(1j * np.pi / 3)

# the four flat signatures and their torus-quotient realisations:
# (period row, lattice-coordinate generator matrix)
_REALIZATIONS = {
    (2, 2, 2, 2): ([1.0, 1.0j], [[-1, 0], [0, -1]]),
    (4, 4, 2): ([1.0, 1.0j], [[0, -1], [1, 0]]),
    (6, 3, 2): ([1.0, _TAU_HEX], [[0, -1], [1, 1]]),
    (3, 3, 3): ([1.0, _TAU_HEX], [[-1, -1], [1, 0]]),
}


def realize(sig: OrbifoldSignature):
    """The explicit torus quotient carrying the given flat signature.

    Period matrices are rescaled to unit covolume so the realisations are
    deterministic and directly usable by the solver.
    """
    if sig.genus != 0 or sig.orders not in _REALIZATIONS:
        raise ValueError(f"{sig} is not a flat (degree-zero) signature")
    row, gen = _REALIZATIONS[sig.orders]
    pi = np.array([row], dtype=complex)
    stacked = np.vstack([pi.real, pi.imag])
    pi = pi / abs(np.linalg.det(stacked)) ** 0.5
    periods = PeriodData(1, pi)
    element = GroupElement(periods, np.array(gen, dtype=np.int64), (0, 0))
    return build_orbifold(periods, [element])


@dataclass(frozen=True)
class ChernStatus:
    real_c1_zero: bool
    integral_c1_zero: bool
    torsion_order: int


def chern_status(sig: OrbifoldSignature) -> ChernStatus:
    """Vanishing of the first Chern class in real and integral cohomology.

    With special points present the integral class never vanishes: it
    restricts to a generator of Z/m_i at each one.  Its lcm(m_i)-multiple
    does vanish, which is the reported torsion order.
    """
    if not sig.orders:
        raise ValueError("chern_status needs at least one special point")
    return ChernStatus(
        real_c1_zero=(canonical_degree(sig) == 0),
        integral_c1_zero=False,
        torsion_order=lcm(*sig.orders),
    )

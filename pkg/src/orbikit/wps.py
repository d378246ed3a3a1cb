"""Exact-arithmetic algebra for weighted projective Calabi-Yau data.

Covers quasi-homogeneity of polynomials given by their exponent matrix,
the Calabi-Yau degree condition on complete intersections, diagonal
symmetry groups (solutions of A.theta = 0 mod 1 via Smith normal form),
the transpose construction on invertible exponent matrices, and stabiliser
orders of monomial-phase points under diagonal group actions.

Phases live in Q/Z and represent Diag(e^{2 pi i theta_0}, ...).  Every
computation is exact: integers, Fractions, no floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

from .exactlinalg import det_int, solve_exact

__all__ = [
    "WeightSystem",
    "ExponentMatrix",
    "PhaseVector",
    "DiagonalGroup",
    "ProjectivePhasePoint",
    "WpsError",
    "WeightSolution",
    "quasihomogeneous_weights",
    "cy_complete_intersection",
    "divisor_class_degree",
    "canonical_class_degree",
    "diagonal_symmetry_group",
    "bhk_transpose",
    "stabilizer_order",
    "smith_normal_form",
    "parse_monomials",
    "ZERO",
]

GROUP_ENUMERATION_CAP = 10_000

# marker for a vanishing homogeneous coordinate in ProjectivePhasePoint
ZERO = None


class WpsError(ValueError):
    """Invalid weighted-projective data or an unsupported (infinite) group."""


@dataclass(frozen=True)
class WeightSystem:
    weights: tuple

    def __post_init__(self):
        w = tuple(int(q) for q in self.weights)
        if not w or any(q <= 0 for q in w):
            raise WpsError("weights must be positive integers")
        if gcd(*w) != 1:
            raise WpsError("weights must have gcd 1")
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True)
class ExponentMatrix:
    """Rows are monomials, columns variables; entry = exponent."""

    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(e) for e in row) for row in self.rows)
        if not rows:
            raise WpsError("exponent matrix needs at least one monomial")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise WpsError("ragged exponent matrix")
        if any(e < 0 for r in rows for e in r):
            raise WpsError("exponents must be nonnegative")
        for j in range(width):
            if all(r[j] == 0 for r in rows):
                raise WpsError(f"variable {j} appears in no monomial")
        object.__setattr__(self, "rows", rows)

    @property
    def num_monomials(self):
        return len(self.rows)

    @property
    def num_variables(self):
        return len(self.rows[0])

    @property
    def is_square(self):
        return self.num_monomials == self.num_variables

    def determinant(self) -> int:
        if not self.is_square:
            raise WpsError("determinant needs a square exponent matrix")
        return det_int(self.rows)

    @property
    def is_invertible_type(self):
        return self.is_square and self.determinant() != 0

    def transpose(self) -> "ExponentMatrix":
        return ExponentMatrix(tuple(zip(*self.rows)))


@dataclass(frozen=True)
class PhaseVector:
    """Element of (Q/Z)^m: the diagonal transformation with phases theta."""

    phases: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "phases", tuple(Fraction(p) % 1 for p in self.phases)
        )

    def __len__(self):
        return len(self.phases)

    def __add__(self, other):
        return PhaseVector(tuple(a + b for a, b in zip(self.phases, other.phases)))

    def __neg__(self):
        return PhaseVector(tuple(-a for a in self.phases))

    def scaled(self, k: int) -> "PhaseVector":
        return PhaseVector(tuple(k * a for a in self.phases))

    @property
    def is_identity(self):
        return all(p == 0 for p in self.phases)

    @property
    def order(self) -> int:
        return lcm(*[p.denominator for p in self.phases]) if self.phases else 1


@dataclass(frozen=True)
class DiagonalGroup:
    """Finite subgroup of the diagonal torus, given by generators."""

    generators: tuple
    order: int
    contains_J: bool = False
    j_element: PhaseVector | None = None
    num_coordinates: int = 0

    def __post_init__(self):
        if self.num_coordinates == 0 and self.generators:
            object.__setattr__(self, "num_coordinates", len(self.generators[0]))

    def elements(self) -> tuple:
        """Full enumeration (closure of the generators under addition)."""
        m = self.num_coordinates
        seen = {PhaseVector((Fraction(0),) * m)}
        frontier = list(seen)
        while frontier:
            new = []
            for el in frontier:
                for gen in self.generators:
                    cand = el + gen
                    if cand not in seen:
                        seen.add(cand)
                        new.append(cand)
                        if len(seen) > GROUP_ENUMERATION_CAP:
                            raise WpsError("group enumeration exceeds cap")
            frontier = new
        return tuple(sorted(seen, key=lambda pv: pv.phases))


# ---------------------------------------------------------------------------
# exact linear algebra helpers


def smith_normal_form(rows):
    """Smith decomposition D = U A V of an integer matrix, with U and V
    unimodular and D diagonal (entries not necessarily in divisibility
    order, which the solver here does not need)."""
    a = [list(map(int, row)) for row in rows]
    m, n = len(a), len(a[0])
    u = [[int(i == j) for j in range(m)] for i in range(m)]
    v = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, q):  # row_dst -= q * row_src
        a[dst] = [x - q * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x - q * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, q):  # col_dst -= q * col_src
        for row in a:
            row[dst] -= q * row[src]
        for row in v:
            row[dst] -= q * row[src]

    for t in range(min(m, n)):
        while True:
            pivot = None
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    if a[i][j] != 0 and (best is None or abs(a[i][j]) < best):
                        best = abs(a[i][j])
                        pivot = (i, j)
            if pivot is None:
                break
            if pivot != (t, t):
                if pivot[0] != t:
                    swap_rows(t, pivot[0])
                if pivot[1] != t:
                    swap_cols(t, pivot[1])
            dirty = False
            for i in range(t + 1, m):
                if a[i][t] != 0:
                    add_row(t, i, a[i][t] // a[t][t])
                    dirty = dirty or a[i][t] != 0
            for j in range(t + 1, n):
                if a[t][j] != 0:
                    add_col(t, j, a[t][j] // a[t][t])
                    dirty = dirty or a[t][j] != 0
            if not dirty:
                break
        if t < m and t < n and a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
    return u, a, v


# ---------------------------------------------------------------------------
# operations


@dataclass(frozen=True)
class WeightSolution:
    """Outcome of the quasi-homogeneity solve: weights is None when no
    valid (positive, unique) solution exists, with reason set."""

    weights: tuple | None
    is_calabi_yau_type: bool = False
    reason: str | None = None


def quasihomogeneous_weights(a: ExponentMatrix) -> WeightSolution:
    """Rational weights c with A.c = (1, ..., 1) and all c_i > 0.

    The weights are unique for invertible square A; rank-deficient
    systems are reported rather than searched.  Calabi-Yau type means
    sum(c_i) = 1.
    """
    status, x = solve_exact([list(r) for r in a.rows], [1] * a.num_monomials)
    if status == "inconsistent":
        return WeightSolution(None, reason="inconsistent degree equations")
    if status == "underdetermined":
        return WeightSolution(None, reason="exponent matrix is rank-deficient")
    if any(c <= 0 for c in x):
        return WeightSolution(None, reason="weight system has non-positive entries")
    return WeightSolution(tuple(x), is_calabi_yau_type=(sum(x) == 1))


def cy_complete_intersection(q: WeightSystem, degrees) -> bool:
    """Degree condition d_1 + ... + d_s = q_0 + ... + q_n, exactly."""
    degs = [int(d) for d in degrees]
    if not degs or any(d <= 0 for d in degs):
        raise WpsError("degrees must be positive")
    return sum(degs) == sum(q.weights)


def divisor_class_degree(coeffs, q: WeightSystem) -> int:
    """Class of sum a_i D_i in the rank-one class group: sum a_i q_i."""
    a = [int(x) for x in coeffs]
    if len(a) != len(q):
        raise WpsError("coefficient/weight length mismatch")
    return sum(x * w for x, w in zip(a, q.weights))


def canonical_class_degree(q: WeightSystem) -> int:
    """Class of the canonical divisor: -(q_0 + ... + q_n)."""
    return -sum(q.weights)


def diagonal_symmetry_group(a: ExponentMatrix) -> DiagonalGroup:
    """Group of diagonal phase transformations fixing every monomial:
    solutions of A.theta = 0 (mod 1), computed by Smith decomposition.

    Rank-deficient A (a positive-dimensional solution torus) is rejected.
    Order equals |det A| for square invertible A.
    """
    _, d, v = smith_normal_form(a.rows)
    n = a.num_variables
    diag = [d[i][i] if i < len(d) else 0 for i in range(n)]
    if any(x == 0 for x in diag):
        raise WpsError("diagonal symmetry group is infinite (rank-deficient exponents)")
    gens = []
    order = 1
    for i, di in enumerate(diag):
        order *= di
        if di > 1:
            gens.append(PhaseVector(tuple(Fraction(v[r][i], di) for r in range(n))))
    sol = quasihomogeneous_weights(a)
    j_el = None
    has_j = False
    if sol.weights is not None:
        j_el = PhaseVector(sol.weights)
        has_j = all(
            sum(Fraction(e) * p for e, p in zip(row, j_el.phases)) % 1 == 0
            for row in a.rows
        )
    return DiagonalGroup(tuple(gens), order, has_j, j_el, num_coordinates=n)


def bhk_transpose(a: ExponentMatrix):
    """Transposed exponent matrix plus its weight data (A^T seeds the
    mirror construction for invertible polynomial types)."""
    if not a.is_invertible_type:
        raise WpsError("transpose construction needs a square invertible exponent matrix")
    at = a.transpose()
    return at, quasihomogeneous_weights(at)


@dataclass(frozen=True)
class ProjectivePhasePoint:
    """Point of weighted projective space whose nonzero coordinates are
    roots of unity, stored as exact phases; ZERO marks vanishing ones."""

    coordinates: tuple
    weights: WeightSystem

    def __post_init__(self):
        coords = tuple(
            None if c is None else Fraction(c) % 1 for c in self.coordinates
        )
        if len(coords) != len(self.weights):
            raise WpsError("coordinate/weight length mismatch")
        if all(c is None for c in coords):
            raise WpsError("projective point cannot be identically zero")
        object.__setattr__(self, "coordinates", coords)

    @property
    def support(self):
        return tuple(i for i, c in enumerate(self.coordinates) if c is not None)


def _fixes_point(theta: PhaseVector, q: WeightSystem, p: ProjectivePhasePoint) -> bool:
    """Whether Diag(theta) fixes [p]: some weighted rescaling mu satisfies
    theta_i = mu q_i (mod 1) on the support of p.  Point phases cancel, so
    only the support pattern matters."""
    support = p.support
    i0 = support[0]
    q0 = q.weights[i0]
    for k in range(q0):
        mu = (theta.phases[i0] + k) / q0
        if all((mu * q.weights[i] - theta.phases[i]) % 1 == 0 for i in support):
            return True
    return False


def _as_group(action) -> DiagonalGroup:
    if isinstance(action, DiagonalGroup):
        return action
    if isinstance(action, PhaseVector):
        gens = (action,)
    else:
        gens = tuple(
            g if isinstance(g, PhaseVector) else PhaseVector(tuple(g)) for g in action
        )
    return DiagonalGroup(gens, len(DiagonalGroup(gens, 0).elements()))


def stabilizer_order(action, q: WeightSystem, p: ProjectivePhasePoint) -> int:
    """Number of group elements fixing [p] in CP[q].

    action may be a DiagonalGroup, a generating PhaseVector, or a sequence
    of generators; the group is enumerated exactly (capped at 10^4).
    """
    group = _as_group(action)
    count = sum(1 for el in group.elements() if _fixes_point(el, q, p))
    return count


# ---------------------------------------------------------------------------
# monomial parsing (CLI front door)


def parse_monomials(text: str):
    """Parse "x^2*y, y^3, x*z^2" into (ExponentMatrix, variable names).

    Variables are ordered by first appearance.  Only `^` powers and `*`
    products are recognised.
    """
    import re

    token = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)(?:\^(\d+))?$")
    variables: list = []
    parsed = []
    for mono in text.split(","):
        mono = mono.strip()
        if not mono:
            raise WpsError("empty monomial in list")
        powers: dict = {}
        for factor in mono.split("*"):
            m = token.match(factor.strip())
            if not m:
                raise WpsError(f"cannot parse monomial factor {factor.strip()!r}")
            name, exp = m.group(1), int(m.group(2) or 1)
            if name not in variables:
                variables.append(name)
            powers[name] = powers.get(name, 0) + exp
        parsed.append(powers)
    rows = tuple(
        tuple(powers.get(name, 0) for name in variables) for powers in parsed
    )
    return ExponentMatrix(rows), tuple(variables)

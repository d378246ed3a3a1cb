"""Flat Kahler orbifolds presented as global torus quotients T^{2n}/Gamma.

Conventions used throughout the package:

* The covering torus is C^n / Lambda.  The lattice Lambda is encoded by an
  n x 2n complex period matrix Pi whose columns are the 2n lattice
  generators, so torus points are z = Pi.u with u in R^{2n}/Z^{2n}.
  All grids, group actions and Fourier modes live in the lattice
  coordinates u; the complex geometry enters only through Pi and the
  constant Hermitian background metric g (n x n, default identity).

* A group element acts on lattice coordinates by u -> M.u + t with M an
  integer unimodular matrix and t a rational translation mod 1.  The
  action is required to be holomorphic (there is a complex matrix A with
  Pi.M = A.Pi) and isometric (A^T g conj(A) = g).

* Functions are sampled on the regular grid u = k/N (componentwise,
  N even per axis).  Group elements must act by exact grid permutations,
  which keeps invariance checks free of interpolation error.

* integrate(f) returns the orbifold integral of f against the volume
  normalisation det(g).|det P| / |Gamma| where P stacks Re Pi over Im Pi,
  i.e. the unit square torus with the identity metric has total volume 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "PeriodData",
    "GroupElement",
    "QuotientTorusOrbifold",
    "SpectralField",
    "OrbifoldSignature",
    "OrbifoldError",
    "build_orbifold",
    "act",
    "project_invariant",
    "integrate",
    "average",
    "fixed_point_data",
    "constant_field",
    "field_from_samples",
    "coordinate_grids",
    "grid_shape",
]

HOLOMORPHY_TOL = 1e-10
ISOMETRY_TOL = 1e-10
DEFAULT_GROUP_BOUND = 1024


class OrbifoldError(ValueError):
    """Invalid orbifold data: bad lattice, non-holomorphic or non-isometric
    action, group closure escaping the configured bound, or a grid that the
    group does not permute."""


def _as_fraction_vector(t, length):
    vec = tuple(Fraction(x) % 1 for x in t)
    if len(vec) != length:
        raise OrbifoldError(f"translation must have length {length}, got {len(vec)}")
    return vec


@dataclass(frozen=True, eq=False)
class PeriodData:
    """Lattice and metric data of the covering torus C^n / Lambda."""

    complex_dim: int
    period_matrix: np.ndarray
    background_metric: np.ndarray | None = None

    def __post_init__(self):
        n = self.complex_dim
        if n < 1:
            raise OrbifoldError("complex_dim must be >= 1")
        pi = np.asarray(self.period_matrix, dtype=complex)
        if pi.shape != (n, 2 * n):
            raise OrbifoldError(f"period matrix must be {n}x{2 * n}, got {pi.shape}")
        g = self.background_metric
        g = np.eye(n, dtype=complex) if g is None else np.asarray(g, dtype=complex)
        if g.shape != (n, n):
            raise OrbifoldError(f"metric must be {n}x{n}, got {g.shape}")
        if not np.allclose(g, g.conj().T, atol=1e-12):
            raise OrbifoldError("background metric is not Hermitian")
        eigs = np.linalg.eigvalsh(g)
        if eigs.min() <= 0:
            raise OrbifoldError("background metric is not positive definite")
        object.__setattr__(self, "period_matrix", pi)
        object.__setattr__(self, "background_metric", g)
        stacked = self.real_stacked
        if abs(np.linalg.det(stacked)) < 1e-12:
            raise OrbifoldError("period columns do not span a full lattice")

    @property
    def real_stacked(self) -> np.ndarray:
        """2n x 2n real matrix sending lattice coordinates u to (Re z, Im z)."""
        return np.vstack([self.period_matrix.real, self.period_matrix.imag])

    @property
    def complex_stacked(self) -> np.ndarray:
        """2n x 2n complex matrix sending u to (z, conj z)."""
        return np.vstack([self.period_matrix, self.period_matrix.conj()])

    @property
    def torus_volume(self) -> float:
        """Volume of the covering torus in the package normalisation."""
        return abs(np.linalg.det(self.real_stacked)) * float(
            np.linalg.det(self.background_metric).real
        )

    def metric_inverse(self) -> np.ndarray:
        return np.linalg.inv(self.background_metric)


def _holomorphic_part(periods: PeriodData, linear: np.ndarray) -> np.ndarray:
    """Complex matrix A with Pi.M = A.Pi, or raise if the action is not
    holomorphic for this lattice."""
    n = periods.complex_dim
    p_real = periods.real_stacked
    b = p_real @ linear @ np.linalg.inv(p_real)
    x, negy = b[:n, :n], b[:n, n:]
    y, x2 = b[n:, :n], b[n:, n:]
    scale = max(1.0, np.abs(b).max())
    if (
        np.abs(x - x2).max() > HOLOMORPHY_TOL * scale
        or np.abs(negy + y).max() > HOLOMORPHY_TOL * scale
    ):
        raise OrbifoldError("linear part does not commute with the complex structure")
    a = x + 1j * y
    resid = np.abs(periods.period_matrix @ linear - a @ periods.period_matrix).max()
    if resid > HOLOMORPHY_TOL * scale:
        raise OrbifoldError("no complex matrix A satisfies Pi.M = A.Pi")
    return a


@dataclass(frozen=True, eq=False)
class GroupElement:
    """Torus automorphism u -> M.u + t in lattice coordinates.

    The holomorphic part A (with Pi.M = A.Pi) is derived on construction;
    building an element whose action is not holomorphic or not isometric
    for the given periods raises OrbifoldError.
    """

    periods: PeriodData
    linear: np.ndarray
    translation: tuple
    holomorphic: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = self.periods.complex_dim
        m = np.asarray(self.linear)
        if m.shape != (2 * n, 2 * n):
            raise OrbifoldError(f"linear part must be {2 * n}x{2 * n}")
        if not np.issubdtype(m.dtype, np.integer):
            mi = np.rint(m).astype(np.int64)
            if np.abs(m - mi).max() > 0:
                raise OrbifoldError("linear part must be an integer matrix")
            m = mi
        else:
            m = m.astype(np.int64)
        if round(abs(np.linalg.det(m.astype(float)))) != 1:
            raise OrbifoldError("linear part must be unimodular (|det M| = 1)")
        object.__setattr__(self, "linear", m)
        object.__setattr__(
            self, "translation", _as_fraction_vector(self.translation, 2 * n)
        )
        a = _holomorphic_part(self.periods, m)
        g = self.periods.background_metric
        if np.abs(a.T @ g @ a.conj() - g).max() > ISOMETRY_TOL * max(1.0, np.abs(g).max()):
            raise OrbifoldError("holomorphic part is not an isometry of the metric")
        object.__setattr__(self, "holomorphic", a)

    def key(self):
        return (
            tuple(map(tuple, self.linear.tolist())),
            self.translation,
        )

    def __eq__(self, other):
        return isinstance(other, GroupElement) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    @property
    def is_identity(self) -> bool:
        n2 = self.linear.shape[0]
        return bool(
            np.array_equal(self.linear, np.eye(n2, dtype=np.int64))
            and all(t == 0 for t in self.translation)
        )

    def compose(self, other: "GroupElement") -> "GroupElement":
        """Element mapping u to self(other(u))."""
        m = self.linear @ other.linear
        t = tuple(
            (sum(Fraction(int(self.linear[i, j])) * other.translation[j]
                 for j in range(len(other.translation)))
             + self.translation[i]) % 1
            for i in range(len(self.translation))
        )
        return GroupElement(self.periods, m, t)

    def inverse(self) -> "GroupElement":
        minv_f = np.linalg.inv(self.linear.astype(float))
        minv = np.rint(minv_f).astype(np.int64)
        t = tuple(
            (-sum(Fraction(int(minv[i, j])) * self.translation[j]
                  for j in range(len(self.translation)))) % 1
            for i in range(len(self.translation))
        )
        return GroupElement(self.periods, minv, t)

    def apply_point(self, u):
        """Exact image of a rational point u (tuple of Fractions), mod 1."""
        return tuple(
            (sum(Fraction(int(self.linear[i, j])) * u[j] for j in range(len(u)))
             + self.translation[i]) % 1
            for i in range(len(u))
        )


@dataclass(frozen=True, eq=False)
class QuotientTorusOrbifold:
    """A covering torus together with a finite group of holomorphic
    isometries acting in lattice coordinates."""

    periods: PeriodData
    group: tuple

    def __post_init__(self):
        object.__setattr__(self, "group", tuple(self.group))
        object.__setattr__(self, "_frames", {})

    @property
    def complex_dim(self) -> int:
        return self.periods.complex_dim

    @property
    def group_order(self) -> int:
        return len(self.group)

    def identity_element(self) -> GroupElement:
        n2 = 2 * self.complex_dim
        return GroupElement(self.periods, np.eye(n2, dtype=np.int64), (0,) * n2)


def build_orbifold(
    periods: PeriodData,
    generators,
    group_bound: int = DEFAULT_GROUP_BOUND,
) -> QuotientTorusOrbifold:
    """Close the generators into a finite group and wrap it as an orbifold.

    Raises OrbifoldError if any generator fails the holomorphy/isometry
    invariants or if the closure exceeds group_bound elements, which
    signals a non-finite action.
    """
    n2 = 2 * periods.complex_dim
    identity = GroupElement(periods, np.eye(n2, dtype=np.int64), (0,) * n2)
    elements = {identity.key(): identity}
    gens = []
    for gen in generators:
        if not isinstance(gen, GroupElement):
            raise OrbifoldError("generators must be GroupElement instances")
        gens.append(gen)
        elements.setdefault(gen.key(), gen)
    frontier = list(elements.values())
    while frontier:
        new_frontier = []
        for el in frontier:
            for gen in gens:
                prod = gen.compose(el)
                if prod.key() not in elements:
                    elements[prod.key()] = prod
                    new_frontier.append(prod)
                    if len(elements) > group_bound:
                        raise OrbifoldError(
                            f"group closure exceeds bound {group_bound}; "
                            "the action does not look finite"
                        )
        frontier = new_frontier
    ordered = sorted(elements.values(), key=lambda e: e.key())
    ordered.remove(identity)
    return QuotientTorusOrbifold(periods, (identity, *ordered))


# ---------------------------------------------------------------------------
# sampled fields


def grid_shape(resolution, complex_dim: int) -> tuple:
    """Normalise a resolution spec (int or per-axis sequence) to a shape."""
    if np.isscalar(resolution):
        shape = (int(resolution),) * (2 * complex_dim)
    else:
        shape = tuple(int(r) for r in resolution)
    if len(shape) != 2 * complex_dim:
        raise OrbifoldError(f"resolution needs {2 * complex_dim} axes, got {len(shape)}")
    for nax in shape:
        if nax < 2 or nax % 2 != 0:
            raise OrbifoldError(f"per-axis sample counts must be even and >= 2, got {nax}")
    return shape


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Samples of a function on the covering torus at u = k/N.

    invariant marks fields known to be Gamma-invariant (exactly, up to
    round-off); it is bookkeeping only and never changes the numerics.
    """

    orbifold: QuotientTorusOrbifold
    samples: np.ndarray
    invariant: bool = False

    def __post_init__(self):
        arr = np.asarray(self.samples)
        expected = grid_shape(arr.shape, self.orbifold.complex_dim)
        if arr.shape != expected:
            raise OrbifoldError("sample array shape is not a valid even grid")
        object.__setattr__(self, "samples", arr)

    @property
    def resolution(self) -> tuple:
        return self.samples.shape

    def with_samples(self, samples, invariant: bool = False) -> "SpectralField":
        return SpectralField(self.orbifold, samples, invariant)

    def is_real(self) -> bool:
        return not np.iscomplexobj(self.samples)


def field_from_samples(orbifold, samples, invariant=False) -> SpectralField:
    return SpectralField(orbifold, samples, invariant)


def constant_field(orbifold, resolution, value=1.0) -> SpectralField:
    shape = grid_shape(resolution, orbifold.complex_dim)
    return SpectralField(orbifold, np.full(shape, value), invariant=True)


def coordinate_grids(orbifold, resolution):
    """Arrays u_1, ..., u_{2n} of lattice coordinates at the grid points."""
    shape = grid_shape(resolution, orbifold.complex_dim)
    axes = [np.arange(nax) / nax for nax in shape]
    return np.meshgrid(*axes, indexing="ij")


@lru_cache(maxsize=64)
def _permutation_indices(gamma: GroupElement, shape):
    """Index arrays realising the pullback by gamma on the grid, or raise
    if gamma does not map the grid bijectively to itself.  Cached: the
    solver replays the same permutations every iteration."""
    dim = len(shape)
    m = gamma.linear
    coef = np.empty((dim, dim), dtype=np.int64)
    for i in range(dim):
        for j in range(dim):
            num = int(m[i, j]) * shape[i]
            if num % shape[j] != 0:
                raise OrbifoldError(
                    "group element mixes axes with incompatible sample counts"
                )
            coef[i, j] = num // shape[j]
    shifts = []
    for i in range(dim):
        s = gamma.translation[i] * shape[i]
        if s.denominator != 1:
            raise OrbifoldError(
                f"translation {gamma.translation[i]} is not resolved by {shape[i]} samples"
            )
        shifts.append(int(s))
    grids = np.meshgrid(*[np.arange(nax, dtype=np.int64) for nax in shape], indexing="ij")
    idx = []
    for i in range(dim):
        acc = np.zeros(shape, dtype=np.int64)
        for j in range(dim):
            if coef[i, j]:
                acc += coef[i, j] * grids[j]
        idx.append((acc + shifts[i]) % shape[i])
    return tuple(idx)


def act(gamma: GroupElement, f: SpectralField) -> SpectralField:
    """Pullback f∘gamma: the output sample at u is f(gamma(u)).

    This is an exact permutation of the sample array; no interpolation.
    """
    idx = _permutation_indices(gamma, f.resolution)
    return f.with_samples(f.samples[idx], invariant=f.invariant)


def project_invariant(f: SpectralField) -> SpectralField:
    """Average the pullbacks over the group: the orthogonal projection onto
    the invariant subspace.  Idempotent; output carries invariant=True."""
    group = f.orbifold.group
    acc = np.zeros_like(np.asarray(f.samples, dtype=np.result_type(f.samples, 1.0)))
    for gamma in group:
        acc += act(gamma, f).samples
    return f.with_samples(acc / len(group), invariant=True)


def average(f: SpectralField) -> float:
    """Orbifold average of f: integrate(f) / integrate(1)."""
    return complex(f.samples.mean()).real if f.is_real() else f.samples.mean()


def integrate(f: SpectralField) -> float:
    """Orbifold integral of f against the background volume form.

    Equals torus_volume / |Gamma| times the grid mean; the mean rule is
    spectrally exact for band-limited integrands on periodic grids.
    """
    orb = f.orbifold
    scale = orb.periods.torus_volume / orb.group_order
    val = f.samples.mean() * scale
    return float(val.real) if not np.iscomplexobj(f.samples) else complex(val)


def max_invariance_defect(f: SpectralField) -> float:
    """Sup deviation of f from its group pullbacks (0 for invariant fields)."""
    worst = 0.0
    for gamma in f.orbifold.group:
        worst = max(worst, float(np.abs(act(gamma, f).samples - f.samples).max()))
    return worst


# ---------------------------------------------------------------------------
# fixed points and signatures (complex dimension 1)


@dataclass(frozen=True, order=True)
class OrbifoldSignature:
    """Genus of the quotient surface plus the descending stabiliser orders
    of its special points."""

    genus: int
    orders: tuple

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(int(m) for m in self.orders))
        if self.genus < 0:
            raise ValueError("genus must be >= 0")
        if any(m < 2 for m in self.orders):
            raise ValueError("stabiliser orders must all be >= 2")
        if list(self.orders) != sorted(self.orders, reverse=True):
            raise ValueError("orders must be sorted descending")


def _solve_2x2_fraction(mat, rhs):
    """Solve an integer 2x2 system exactly; mat must be invertible."""
    a, b = int(mat[0, 0]), int(mat[0, 1])
    c, d = int(mat[1, 0]), int(mat[1, 1])
    det = Fraction(a * d - b * c)
    if det == 0:
        raise ZeroDivisionError
    x = (Fraction(d) * rhs[0] - Fraction(b) * rhs[1]) / det
    y = (-Fraction(c) * rhs[0] + Fraction(a) * rhs[1]) / det
    return (x, y)


def _fixed_points(gamma: GroupElement):
    """All rational solutions of gamma(u) = u on the torus, as exact points."""
    m = gamma.linear - np.eye(2, dtype=np.int64)
    det = int(round(np.linalg.det(m.astype(float))))
    if det == 0:
        # M = I: a pure translation is fixed-point free; any other singular
        # M - I cannot arise from a holomorphic isometry in dimension one.
        if not np.array_equal(gamma.linear, np.eye(2, dtype=np.int64)):
            raise OrbifoldError("unexpected singular M - I for a nontrivial rotation")
        return set()
    bound = [int(np.abs(m[i]).sum()) + 1 for i in range(2)]
    points = set()
    for v0 in range(-bound[0], bound[0] + 1):
        for v1 in range(-bound[1], bound[1] + 1):
            rhs = (Fraction(v0) - gamma.translation[0], Fraction(v1) - gamma.translation[1])
            u = _solve_2x2_fraction(m, rhs)
            u = (u[0] % 1, u[1] % 1)
            if gamma.apply_point(u) == u:
                points.add(u)
    return points


def fixed_point_data(orb: QuotientTorusOrbifold) -> OrbifoldSignature:
    """Signature (g; m_1 >= ... >= m_k) of a one-dimensional quotient.

    Fixed points of all nontrivial elements are solved exactly over Q,
    grouped into orbits, and the genus recovered from the Euler
    characteristic balance chi(T) = 0 of the covering torus.
    """
    if orb.complex_dim != 1:
        raise OrbifoldError("fixed_point_data requires complex dimension 1")
    all_fixed = set()
    for gamma in orb.group:
        if gamma.is_identity:
            continue
        all_fixed |= _fixed_points(gamma)

    def stab_order(u):
        return sum(1 for gamma in orb.group if gamma.apply_point(u) == u)

    seen = set()
    orders = []
    for u in sorted(all_fixed):
        if u in seen:
            continue
        orbit = {gamma.apply_point(u) for gamma in orb.group}
        seen |= orbit
        m = stab_order(u)
        if m < 2:
            raise OrbifoldError("fixed point with trivial stabiliser")
        if len(orbit) * m != orb.group_order:
            raise OrbifoldError("orbit-stabiliser mismatch in fixed point data")
        orders.append(m)
    two_minus_2g = sum(Fraction(m - 1, m) for m in orders)
    genus = 1 - two_minus_2g / 2
    if genus.denominator != 1 or genus < 0:
        raise OrbifoldError(f"inconsistent quotient genus {genus}")
    return OrbifoldSignature(int(genus), tuple(sorted(orders, reverse=True)))

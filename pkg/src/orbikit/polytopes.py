"""Exact lattice-polytope combinatorics: reflexivity, polar duality and
nef-partition duality.

Everything is rational arithmetic on small polytopes (dimension <= 4,
at most 64 vertices).  Facets are enumerated by brute-force supporting
hyperplanes through d affinely independent generating points, which at
this scale is simpler to verify than an incremental hull and has no
degenerate cases.  Half-space descriptions use inward normals:

    P = { x : <x, n_F> >= -c_F  for every facet F }.

A reflexive polytope is one with 0 strictly interior and every facet
offset c_F equal to 1; its polar dual has the facet normals as vertices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .exactlinalg import nullspace_exact, primitive_integer, rank_exact, solve_exact

__all__ = [
    "LatticePolytope",
    "FacetSystem",
    "NefPartition",
    "PolytopeError",
    "facet_system",
    "is_reflexive",
    "polar_dual",
    "lattice_points",
    "interior_lattice_points",
    "nef_partition_check",
    "dual_nef_partition",
]

MAX_DIM = 4
MAX_VERTICES = 64


class PolytopeError(ValueError):
    """Degenerate, oversized or otherwise invalid polytope data."""


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


@dataclass(frozen=True)
class FacetSystem:
    """Inward facet data (normal, offset): P = {x : <x, n> >= -c}."""

    facets: tuple  # ((normal tuple, offset int), ...) sorted by normal

    def __iter__(self):
        return iter(self.facets)

    def __len__(self):
        return len(self.facets)

    def contains(self, point, strict=False) -> bool:
        if strict:
            return all(_dot(point, n) > -c for n, c in self.facets)
        return all(_dot(point, n) >= -c for n, c in self.facets)


def _enumerate_facets(dim, points):
    """Supporting hyperplanes through dim affinely independent points with
    every generating point on one side; these are exactly the facets of
    the (full-dimensional) hull."""
    found = {}
    for subset in itertools.combinations(points, dim):
        base = subset[0]
        diffs = [[p[i] - base[i] for i in range(dim)] for p in subset[1:]]
        null = nullspace_exact(diffs, n_cols=dim)
        if len(null) != 1:
            continue
        normal = primitive_integer(null[0])
        vals = [_dot(p, normal) for p in points]
        v0 = _dot(base, normal)
        if all(v >= v0 for v in vals):
            pass
        elif all(v <= v0 for v in vals):
            normal = tuple(-x for x in normal)
            v0 = -v0
        else:
            continue
        found[normal] = -v0
    return tuple(sorted((n, c) for n, c in found.items()))


@dataclass(frozen=True, eq=False)
class LatticePolytope:
    """Full-dimensional lattice polytope given by its (minimal) vertex set."""

    dim: int
    vertices: tuple

    def __post_init__(self):
        d = int(self.dim)
        if not 1 <= d <= MAX_DIM:
            raise PolytopeError(f"dimension must be 1..{MAX_DIM}, got {d}")
        verts = tuple(tuple(int(x) for x in v) for v in self.vertices)
        if len(verts) > MAX_VERTICES:
            raise PolytopeError(f"at most {MAX_VERTICES} vertices supported")
        if len(set(verts)) != len(verts):
            raise PolytopeError("repeated vertices")
        if any(len(v) != d for v in verts):
            raise PolytopeError("vertex/dimension mismatch")
        base = verts[0]
        diffs = [[v[i] - base[i] for i in range(d)] for v in verts[1:]]
        if rank_exact(diffs) != d:
            raise PolytopeError("polytope is not full-dimensional")
        object.__setattr__(self, "dim", d)
        object.__setattr__(self, "vertices", verts)
        facets = _enumerate_facets(d, verts)
        object.__setattr__(self, "_facets", FacetSystem(facets))
        for v in verts:
            active = [n for n, c in facets if _dot(v, n) == -c]
            if rank_exact(active) != d:
                raise PolytopeError(f"{v} is not a vertex of the hull")

    def __eq__(self, other):
        return (
            isinstance(other, LatticePolytope)
            and self.dim == other.dim
            and sorted(self.vertices) == sorted(other.vertices)
        )

    def __hash__(self):
        return hash((self.dim, tuple(sorted(self.vertices))))


def facet_system(p: LatticePolytope) -> FacetSystem:
    """Irredundant inward facet description, ordered lexicographically by
    primitive normal."""
    return p._facets


def is_reflexive(p: LatticePolytope) -> bool:
    """0 strictly interior and all facets at lattice distance one."""
    return all(c == 1 for _, c in facet_system(p))


def polar_dual(p: LatticePolytope) -> LatticePolytope:
    """Polar dual {n : <v, n> >= -1 for all vertices v}; for reflexive P
    its vertices are exactly the facet normals of P."""
    if not is_reflexive(p):
        raise PolytopeError("polar dual of a non-reflexive polytope is not a lattice polytope")
    return LatticePolytope(p.dim, tuple(n for n, _ in facet_system(p)))


def lattice_points(p: LatticePolytope) -> tuple:
    """All lattice points of P, by bounding box plus facet filtering."""
    facets = facet_system(p)
    lo = [min(v[i] for v in p.vertices) for i in range(p.dim)]
    hi = [max(v[i] for v in p.vertices) for i in range(p.dim)]
    pts = []
    for cand in itertools.product(*[range(a, b + 1) for a, b in zip(lo, hi)]):
        if facets.contains(cand):
            pts.append(cand)
    return tuple(sorted(pts))


def interior_lattice_points(p: LatticePolytope) -> tuple:
    facets = facet_system(p)
    return tuple(x for x in lattice_points(p) if facets.contains(x, strict=True))


# ---------------------------------------------------------------------------
# nef-partitions


@dataclass(frozen=True)
class NefPartition:
    """Partition of a polytope's vertex index set into nonempty parts."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(tuple(sorted(int(i) for i in part)) for part in self.parts)
        if not parts or any(not part for part in parts):
            raise PolytopeError("partition parts must be nonempty")
        object.__setattr__(self, "parts", parts)

    def validate_for(self, p: LatticePolytope):
        seen = [i for part in self.parts for i in part]
        if sorted(seen) != list(range(len(p.vertices))):
            raise PolytopeError(
                "partition indices must cover each vertex index exactly once"
            )

    def indicator(self, p: LatticePolytope, part_index: int):
        """Prescribed vertex values of the part's support function:
        1 on the part's vertices, 0 on the others."""
        values = [0] * len(p.vertices)
        for i in self.parts[part_index]:
            values[i] = 1
        return values


def _facet_vertex_indices(p: LatticePolytope):
    facets = facet_system(p)
    out = []
    for n, c in facets:
        out.append([i for i, v in enumerate(p.vertices) if _dot(v, n) == -c])
    return out


def _cone_linear_extensions(p: LatticePolytope, values):
    """Per maximal cone (over a facet), the linear functional matching the
    prescribed vertex values, or None if the values are not well defined
    or not integral on that cone."""
    exts = []
    for idxs in _facet_vertex_indices(p):
        rows = [list(p.vertices[i]) for i in idxs]
        rhs = [values[i] for i in idxs]
        status, ell = solve_exact(rows, rhs)
        if status != "unique":
            return None
        if any(x.denominator != 1 for x in ell):
            return None
        exts.append(tuple(int(x) for x in ell))
    return exts


def nef_partition_check(p: LatticePolytope, partition: NefPartition) -> bool:
    """Whether each part's indicator values extend to an integral convex
    piecewise-linear function on the face fan of P.

    Well-definedness: on every cone over a facet the prescribed values
    must match a single integral linear functional.  Convexity: each such
    functional must under-estimate the prescribed values globally, which
    for complete fans is equivalent to wall-by-wall convexity.
    """
    if not is_reflexive(p):
        raise PolytopeError("nef-partitions are defined for reflexive polytopes")
    partition.validate_for(p)
    for part_index in range(len(partition.parts)):
        values = partition.indicator(p, part_index)
        exts = _cone_linear_extensions(p, values)
        if exts is None:
            return False
        for ell in exts:
            if any(_dot(ell, v) > values[i] for i, v in enumerate(p.vertices)):
                return False
    return True


def _hpolytope_vertices(normals, offsets):
    """Vertices of {x : <a_i, x> >= b_i} by basic-solution enumeration.
    The polytope must be bounded (true for nef-partition slices)."""
    dim = len(normals[0])
    verts = set()
    for subset in itertools.combinations(range(len(normals)), dim):
        rows = [list(normals[i]) for i in subset]
        rhs = [offsets[i] for i in subset]
        status, x = solve_exact(rows, rhs)
        if status != "unique":
            continue
        if all(_dot(normals[i], x) >= offsets[i] for i in range(len(normals))):
            verts.add(tuple(x))
    return verts


def dual_nef_partition(p: LatticePolytope, partition: NefPartition):
    """Dual pair (P', E'): each slice P'_i = {n : <e_j, n> >= -[e_j in E_i]},
    P' their convex hull, E'_i the vertices of P' lying in P'_i.

    Raises if the hull fails to be reflexive or the slice membership fails
    to partition its vertices; both would signal an invalid nef-partition
    slipping through the check.
    """
    if not nef_partition_check(p, partition):
        raise PolytopeError("not a nef-partition; dual construction undefined")
    normals = [list(v) for v in p.vertices]
    slices = []
    candidates = set()
    for part_index in range(len(partition.parts)):
        values = partition.indicator(p, part_index)
        offsets = [-Fraction(v) for v in values]
        verts = _hpolytope_vertices(normals, offsets)
        slices.append(offsets)
        candidates |= verts
    for v in candidates:
        if any(x.denominator != 1 for x in v):
            raise PolytopeError(f"dual slice vertex {v} is not integral")
    points = sorted(tuple(int(x) for x in v) for v in candidates)
    facets = _enumerate_facets(p.dim, points)
    true_vertices = []
    for v in points:
        active = [n for n, c in facets if _dot(v, n) == -c]
        if rank_exact(active) == p.dim:
            true_vertices.append(v)
    dual = LatticePolytope(p.dim, tuple(true_vertices))
    if not is_reflexive(dual):
        raise PolytopeError("dual hull is not reflexive: invalid nef-partition")
    assignment = []
    for v in dual.vertices:
        hits = [
            i
            for i, offsets in enumerate(slices)
            if all(_dot(normals[j], v) >= offsets[j] for j in range(len(normals)))
        ]
        if len(hits) != 1:
            raise PolytopeError(
                f"dual vertex {v} lies in {len(hits)} slices; expected exactly one"
            )
        assignment.append(hits[0])
    parts = []
    for i in range(len(partition.parts)):
        part = tuple(j for j, hit in enumerate(assignment) if hit == i)
        if not part:
            raise PolytopeError(f"dual partition part {i} is empty")
        parts.append(part)
    return dual, NefPartition(tuple(parts))

"""Weighted-projective symmetry algebra against brute-force enumeration."""

import itertools
from fractions import Fraction

import pytest

from orbikit.wps import (
    ZERO,
    DiagonalGroup,
    ExponentMatrix,
    PhaseVector,
    ProjectivePhasePoint,
    WeightSystem,
    WpsError,
    bhk_transpose,
    canonical_class_degree,
    cy_complete_intersection,
    diagonal_symmetry_group,
    divisor_class_degree,
    parse_monomials,
    quasihomogeneous_weights,
    smith_normal_form,
    stabilizer_order,
)

CUBIC_A = ExponentMatrix(((2, 1, 0), (0, 3, 0), (1, 0, 2)))  # x^2 y + y^3 + x z^2
FERMAT3 = ExponentMatrix(((3, 0, 0), (0, 3, 0), (0, 0, 3)))
CP2 = WeightSystem((1, 1, 1))


def brute_force_group_order(a: ExponentMatrix, modulus: int) -> int:
    """Count solutions of A.theta = 0 mod 1 with denominators dividing
    modulus, by direct enumeration."""
    count = 0
    n = a.num_variables
    for combo in itertools.product(range(modulus), repeat=n):
        theta = [Fraction(k, modulus) for k in combo]
        if all(sum(e * t for e, t in zip(row, theta)) % 1 == 0 for row in a.rows):
            count += 1
    return count


def test_weights_cubic_third_third_third():
    sol = quasihomogeneous_weights(CUBIC_A)
    assert sol.weights == (Fraction(1, 3), Fraction(1, 3), Fraction(1, 3))
    assert sol.is_calabi_yau_type


def test_weights_fermat_and_diagonal():
    sol = quasihomogeneous_weights(FERMAT3)
    assert sol.weights == (Fraction(1, 3),) * 3
    assert sol.is_calabi_yau_type
    sol2 = quasihomogeneous_weights(ExponentMatrix(((2, 0), (0, 2))))
    assert sol2.weights == (Fraction(1, 2), Fraction(1, 2))
    assert sol2.is_calabi_yau_type


def test_weights_failure_modes():
    # x^2 and x^3 cannot both have weighted degree 1
    bad = ExponentMatrix(((2, 1), (3, 1), (0, 2)))
    sol = quasihomogeneous_weights(bad)
    assert sol.weights is None and sol.reason is not None


def test_cy_complete_intersection():
    assert cy_complete_intersection(CP2, (3,))
    assert cy_complete_intersection(WeightSystem((1, 1, 1, 1, 1)), (5,))
    assert not cy_complete_intersection(WeightSystem((1, 1, 1, 1)), (2, 3))
    perm = cy_complete_intersection(WeightSystem((1, 2, 3)), (2, 4))
    assert perm == cy_complete_intersection(WeightSystem((3, 2, 1)), (4, 2))


def test_divisor_class_degrees():
    assert divisor_class_degree((1, 1, 1), CP2) == 3
    assert canonical_class_degree(WeightSystem((1, 2, 3))) == -6
    assert divisor_class_degree((0, 0, 0), CP2) == 0


def test_smith_normal_form_factorisation():
    import numpy as np

    rng = np.random.default_rng(0)
    for _ in range(30):
        shape = rng.integers(1, 5, size=2)
        a = rng.integers(-6, 7, size=shape).tolist()
        u, d, v = smith_normal_form(a)
        ua = np.array(u) @ np.array(a) @ np.array(v)
        assert np.array_equal(ua, np.array(d))
        assert abs(round(np.linalg.det(np.array(u, dtype=float)))) == 1
        assert abs(round(np.linalg.det(np.array(v, dtype=float)))) == 1
        for i in range(len(d)):
            for j in range(len(d[0])):
                if i != j:
                    assert d[i][j] == 0


def test_group_order_fermat_27():
    g = diagonal_symmetry_group(FERMAT3)
    assert g.order == 27
    assert g.contains_J
    assert len(g.elements()) == 27
    assert brute_force_group_order(FERMAT3, 3) == 27


def test_group_order_cubic_12():
    g = diagonal_symmetry_group(CUBIC_A)
    assert g.order == 12 == abs(CUBIC_A.determinant())
    assert g.contains_J
    assert len(g.elements()) == 12
    assert brute_force_group_order(CUBIC_A, 12) == 12


def test_group_single_variable_trivial():
    g = diagonal_symmetry_group(ExponentMatrix(((1,),)))
    assert g.order == 1
    assert g.elements() == (PhaseVector((0,)),)


def test_group_order_matches_det_randomised():
    import numpy as np

    rng = np.random.default_rng(1)
    found = 0
    while found < 8:
        a = rng.integers(0, 4, size=(3, 3))
        try:
            em = ExponentMatrix(tuple(map(tuple, a.tolist())))
        except WpsError:
            continue
        det = em.determinant()
        if det == 0 or abs(det) > 40:
            continue
        g = diagonal_symmetry_group(em)
        assert g.order == abs(det)
        assert g.order == len(g.elements())
        assert g.order == brute_force_group_order(em, abs(det))
        found += 1


def test_group_rejects_rank_deficient():
    with pytest.raises(WpsError):
        diagonal_symmetry_group(ExponentMatrix(((1, 1), (2, 2))))


def test_j_membership_modular_identity():
    for a in (CUBIC_A, FERMAT3, ExponentMatrix(((3, 1, 0), (0, 3, 1), (1, 0, 3)))):
        sol = quasihomogeneous_weights(a)
        if sol.weights is None:
            continue
        g = diagonal_symmetry_group(a)
        assert g.contains_J
        # direct membership: A . c is a vector of ones, hence 0 mod 1
        assert all(
            sum(Fraction(e) * c for e, c in zip(row, sol.weights)) % 1 == 0
            for row in a.rows
        )


def test_bhk_transpose():
    at, sol = bhk_transpose(CUBIC_A)
    assert at.rows == ((2, 0, 1), (1, 3, 0), (0, 0, 2))
    assert sol.weights is not None
    ft, _ = bhk_transpose(FERMAT3)
    assert ft.rows == FERMAT3.rows
    back, _ = bhk_transpose(at)
    assert back.rows == CUBIC_A.rows
    with pytest.raises(WpsError):
        bhk_transpose(ExponentMatrix(((1, 1),)))


def cyclic(*phases):
    return PhaseVector(tuple(Fraction(p) for p in phases))


def test_stabilizers_442_action():
    # Z4 acting by [xi^2 x, y, xi z] on the x^2 y + y^3 + x z^2 cubic
    gen = cyclic("1/2", 0, "1/4")
    pts = [
        ProjectivePhasePoint((0, ZERO, ZERO), CP2),      # [1, 0, 0]
        ProjectivePhasePoint((ZERO, ZERO, 0), CP2),      # [0, 0, 1]
        ProjectivePhasePoint((0, Fraction(1, 4), ZERO), CP2),  # [1, i, 0]
    ]
    orders = sorted((stabilizer_order(gen, CP2, p) for p in pts), reverse=True)
    assert orders == [4, 4, 2]


def test_stabilizers_632_action():
    # Z6 acting by [xi^4 x, y, xi z] on x^3 + y^3 + x z^2
    gen = cyclic("2/3", 0, "1/6")
    pts = [
        ProjectivePhasePoint((ZERO, ZERO, 0), CP2),           # [0, 0, 1]
        ProjectivePhasePoint((0, ZERO, Fraction(1, 4)), CP2),  # [1, 0, i]
        ProjectivePhasePoint((Fraction(1, 3), Fraction(1, 2), ZERO), CP2),  # [zeta3, -1, 0]
    ]
    orders = sorted((stabilizer_order(gen, CP2, p) for p in pts), reverse=True)
    assert orders == [6, 3, 2]


def test_stabilizers_333_action():
    # Z3 x Z3 acting by [x, xi1 y, xi2 z] on the Fermat cubic
    gens = [cyclic(0, "1/3", 0), cyclic(0, 0, "1/3")]
    pts = [
        ProjectivePhasePoint((Fraction(1, 2), ZERO, Fraction(1, 3)), CP2),  # [-1, 0, zeta3]
        ProjectivePhasePoint((ZERO, Fraction(1, 2), Fraction(2, 3)), CP2),  # [0, -1, zeta3^2]
        ProjectivePhasePoint((Fraction(1, 2), Fraction(1, 3), ZERO), CP2),  # [-1, zeta3, 0]
    ]
    orders = [stabilizer_order(gens, CP2, p) for p in pts]
    assert orders == [3, 3, 3]


def test_stabilizer_divides_group_order_and_identity_counts():
    gen = cyclic("1/2", 0, "1/4")
    group_order = 4
    for coords in [(0, ZERO, ZERO), (0, 0, 0), (ZERO, 0, Fraction(1, 3))]:
        p = ProjectivePhasePoint(coords, CP2)
        s = stabilizer_order(gen, CP2, p)
        assert s >= 1
        assert group_order % s == 0


def test_stabilizer_brute_force_cross_check():
    # compare the rescaling criterion against explicit root-of-unity orbits
    import numpy as np

    gen = cyclic("1/2", 0, "1/4")
    p = ProjectivePhasePoint((0, Fraction(1, 4), ZERO), CP2)  # [1, i, 0]
    z = np.array([1.0, 1.0j, 0.0])
    count = 0
    for k in range(4):
        gz = np.array([np.exp(2j * np.pi * (k * t)) for t in gen.phases]) * z
        # [gz] == [z] in CP^2 iff gz = lambda * z for some scalar lambda
        ratios = [gz[i] / z[i] for i in range(3) if z[i] != 0]
        if all(abs(r - ratios[0]) < 1e-12 for r in ratios):
            count += 1
    assert count == stabilizer_order(gen, CP2, p) == 2


def test_parse_monomials():
    a, names = parse_monomials("x^2*y, y^3, x*z^2")
    assert names == ("x", "y", "z")
    assert a.rows == CUBIC_A.rows
    with pytest.raises(WpsError):
        parse_monomials("x^2*, y")


def test_weight_system_validation():
    with pytest.raises(WpsError):
        WeightSystem((2, 4))
    with pytest.raises(WpsError):
        WeightSystem((0, 1))
    with pytest.raises(WpsError):
        ExponentMatrix(((1, 0), (2, 0)))

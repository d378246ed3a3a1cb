"""Named orbifold presets and the JSON description format.

JSON schema for an orbifold description:

    {
      "complex_dim": 1,
      "period_matrix": [[1, 0], [0, 1]],        // row-major, entries [re, im]
      "metric": [[1]],                          // optional, entries number or [re, im]
      "generators": [
        {"linear": [[-1, 0], [0, -1]], "translation": ["0", "0"]}
      ]
    }

Translations are exact rationals written as strings "p/q" (plain integers
also accepted).  The named presets cover the torus quotients used across
the test-suite; hexagonal lattices keep a rectangular index grid and carry
the skew entirely in the period matrix.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .quotient import (
    GroupElement,
    OrbifoldError,
    PeriodData,
    QuotientTorusOrbifold,
    build_orbifold,
)

__all__ = ["orbifold_preset", "orbifold_from_json", "PRESET_NAMES"]


def _unit_covolume(period_matrix: np.ndarray) -> np.ndarray:
    stacked = np.vstack([period_matrix.real, period_matrix.imag])
    return period_matrix / abs(np.linalg.det(stacked)) ** (1.0 / stacked.shape[0])


def _torus(period_row, generators_linear):
    pi = np.array([period_row], dtype=complex)
    periods = PeriodData(1, _unit_covolume(pi))
    gens = [
        GroupElement(periods, np.array(m, dtype=np.int64), (Fraction(0), Fraction(0)))
        for m in generators_linear
    ]
    return build_orbifold(periods, gens)


def _t4(generators_linear):
    pi = np.array([[1, 1j, 0, 0], [0, 0, 1, 1j]], dtype=complex)
    periods = PeriodData(2, pi)
    zero = (Fraction(0),) * 4
    gens = [
        GroupElement(periods, np.array(m, dtype=np.int64), zero)
        for m in generators_linear
    ]
    return build_orbifold(periods, gens)


_TAU_HEX = np.exp(1j * np.pi / 3)

_BUILDERS = {
    "torus_square": lambda: _torus([1, 1j], []),
    "pillowcase": lambda: _torus([1, 1j], [[[-1, 0], [0, -1]]]),
    "P1_442": lambda: _torus([1, 1j], [[[0, -1], [1, 0]]]),
    "P1_632": lambda: _torus([1, _TAU_HEX], [[[0, -1], [1, 1]]]),
    "P1_333": lambda: _torus([1, _TAU_HEX], [[[-1, -1], [1, 0]]]),
    "T4": lambda: _t4([]),
    "T4_Z2": lambda: _t4([[[-1, 0, 0, 0], [0, -1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1]]]),
}

PRESET_NAMES = tuple(sorted(_BUILDERS))


def orbifold_preset(name: str) -> QuotientTorusOrbifold:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise OrbifoldError(
            f"unknown preset {name!r}; known presets: {', '.join(PRESET_NAMES)}"
        ) from None
    return builder()


def _complex_entry(value):
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise OrbifoldError(f"complex entries are [re, im]; got {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(float(value))


def orbifold_from_json(obj) -> QuotientTorusOrbifold:
    """Build an orbifold from a parsed JSON document (see module docstring)."""
    if isinstance(obj, str):
        return orbifold_preset(obj)
    if not isinstance(obj, dict):
        raise OrbifoldError("orbifold description must be a preset name or an object")
    try:
        n = int(obj["complex_dim"])
        rows = obj["period_matrix"]
    except KeyError as missing:
        raise OrbifoldError(f"orbifold description lacks field {missing}") from None
    flat = [_complex_entry(e) for row in rows for e in (row if isinstance(row[0], (list, tuple)) else [row])]
    if len(flat) != 2 * n * n:
        raise OrbifoldError(
            f"period_matrix needs {n}x{2 * n} = {2 * n * n} entries, got {len(flat)}"
        )
    pi = np.array(flat, dtype=complex).reshape(n, 2 * n)
    metric = None
    if obj.get("metric") is not None:
        metric = np.array(
            [[_complex_entry(e) for e in row] for row in obj["metric"]], dtype=complex
        )
    periods = PeriodData(n, pi, metric)
    gens = []
    for gen in obj.get("generators", []):
        linear = np.array(gen["linear"], dtype=np.int64)
        translation = tuple(Fraction(str(t)) for t in gen.get("translation", [0] * 2 * n))
        gens.append(GroupElement(periods, linear, translation))
    return build_orbifold(periods, gens)

"""Difference operators on finite boxes of N^d.

A field carries a valid region: the sites whose value does not depend on
anything beyond the top of the box.  Operators that look upward shrink it,
and the value at index -1 is a ghost zero.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

METRIC = np.diag([1.0, 1.0, 1.0, -1.0])


@dataclass(frozen=True)
class LatticeBox:
    extents: tuple[int, ...]

    def __post_init__(self):
        if len(self.extents) not in (1, 3, 4):
            raise ValueError("box dimension must be 1, 3 or 4")
        if any(int(e) < 2 for e in self.extents):
            raise ValueError("every extent must be at least 2")

    @property
    def dim(self) -> int:
        return len(self.extents)

    @classmethod
    def cube(cls, n: int, dim: int = 3) -> "LatticeBox":
        return cls((n,) * dim)

    def grids(self):
        return np.meshgrid(*[np.arange(e) for e in self.extents], indexing="ij")


@dataclass(frozen=True)
class LatticeField:
    """Values on a box, optionally matrix valued (trailing axes).

    ``valid[mu]`` is the number of leading sites along axis mu whose values are
    trustworthy.
    """

    box: LatticeBox
    values: np.ndarray
    valid: tuple[int, ...]

    @classmethod
    def from_values(cls, values, dim: int | None = None) -> "LatticeField":
        values = np.asarray(values, dtype=complex)
        dim = values.ndim if dim is None else dim
        box = LatticeBox(tuple(values.shape[:dim]))
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        return cls(box, values, tuple(box.extents))

    @classmethod
    def from_function(cls, box: LatticeBox, fn) -> "LatticeField":
        return cls.from_values(fn(*box.grids()), box.dim)

    @property
    def dim(self) -> int:
        return self.box.dim

    def interior(self) -> np.ndarray:
        return self.values[tuple(slice(0, v) for v in self.valid)]

    def with_values(self, values, valid=None) -> "LatticeField":
        return LatticeField(self.box, values, self.valid if valid is None else tuple(valid))

    def __add__(self, other: "LatticeField") -> "LatticeField":
        valid = tuple(min(a, b) for a, b in zip(self.valid, other.valid))
        return self.with_values(self.values + other.values, valid)

    def __sub__(self, other: "LatticeField") -> "LatticeField":
        return self + other.scale(-1.0)

    def scale(self, c) -> "LatticeField":
        return self.with_values(c * self.values)

    def to_json(self) -> str:
        flat = self.values.reshape(-1)
        return json.dumps({
            "extents": list(self.box.extents),
            "matrix_shape": list(self.values.shape[self.dim:]),
            "valid": list(self.valid),
            "re": flat.real.tolist(),
            "im": flat.imag.tolist(),
        })

    @classmethod
    def from_json(cls, text: str) -> "LatticeField":
        d = json.loads(text)
        shape = tuple(d["extents"]) + tuple(d["matrix_shape"])
        vals = (np.array(d["re"]) + 1j * np.array(d["im"])).reshape(shape)
        box = LatticeBox(tuple(d["extents"]))
        return cls(box, vals, tuple(d["valid"]))


def _check_axis(field: LatticeField, axis: int):
    if not 0 <= axis < field.dim:
        raise IndexError(f"axis {axis} out of range for a {field.dim}-dimensional box")


def _shift(values: np.ndarray, axis: int, step: int) -> np.ndarray:
    """values(n + step e_axis), ghost zero outside the array."""
    out = np.zeros_like(values)
    n = values.shape[axis]
    src = [slice(None)] * values.ndim
    dst = [slice(None)] * values.ndim
    if step > 0:
        src[axis], dst[axis] = slice(step, n), slice(0, n - step)
    else:
        src[axis], dst[axis] = slice(0, n + step), slice(-step, n)
    out[tuple(dst)] = values[tuple(src)]
    return out


def _site_index(field: LatticeField, axis: int) -> np.ndarray:
    n = field.box.extents[axis]
    shape = [1] * field.values.ndim
    shape[axis] = n
    return np.arange(n, dtype=float).reshape(shape)


def _shrink(field: LatticeField, axis: int) -> tuple[int, ...]:
    valid = list(field.valid)
    valid[axis] = max(valid[axis] - 1, 0)
    return tuple(valid)


def delta_right(field: LatticeField, axis: int) -> LatticeField:
    """f(n + e_axis) - f(n)."""
    _check_axis(field, axis)
    out = _shift(field.values, axis, 1) - field.values
    return field.with_values(out, _shrink(field, axis))


def delta_left(field: LatticeField, axis: int) -> LatticeField:
    """f(n) - f(n - e_axis), with f(-1) = 0."""
    _check_axis(field, axis)
    return field.with_values(field.values - _shift(field.values, axis, -1))


def delta_sharp(field: LatticeField, axis: int) -> LatticeField:
    """Weighted mean difference (sqrt(n+1) f(n+1) - sqrt(n) f(n-1)) / sqrt(2)."""
    _check_axis(field, axis)
    n = _site_index(field, axis)
    v = field.values
    out = (np.sqrt(n + 1.0) * _shift(v, axis, 1) - np.sqrt(n) * _shift(v, axis, -1)) / np.sqrt(2.0)
    return field.with_values(out, _shrink(field, axis))


def laplacian_spatial(field: LatticeField) -> LatticeField:
    """sum_a delta_sharp_a delta_sharp_a on a three-dimensional box."""
    if field.dim != 3:
        raise ValueError("laplacian_spatial needs a 3-dimensional box")
    out = None
    for a in range(3):
        term = delta_sharp(delta_sharp(field, a), a)
        out = term if out is None else out + term
    return out


def dalembertian_discrete(field: LatticeField, mu2: float) -> LatticeField:
    """eta^{mu nu} d#_mu d#_nu f - mu^2 f with eta = diag(1, 1, 1, -1)."""
    if field.dim != 4:
        raise ValueError("dalembertian_discrete needs a 4-dimensional box")
    out = field.scale(-mu2)
    for a in range(4):
        out = out + delta_sharp(delta_sharp(field, a), a).scale(METRIC[a, a])
    return out

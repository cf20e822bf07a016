"""Periodic grids on the flat torus [0, 2pi)^d and the field types living on them.

Scalar, vector, one-form and symmetric 2-tensor fields are thin immutable
wrappers around float64 arrays whose last ``dim`` axes are the grid axes.
Symmetric tensors store only the independent components i <= j, in
lexicographic order; a variance flag distinguishes covariant from
contravariant tensors.  Metrics are covariant symmetric tensors that are
checked to be pointwise positive-definite at construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import DegenerateMetricError, GridMismatchError, VarianceMismatchError

Variance = Literal["covariant", "contravariant"]


def sym_pairs(dim: int) -> tuple[tuple[int, int], ...]:
    """Index pairs (i, j), i <= j, in storage order."""
    return tuple((i, j) for i in range(dim) for j in range(i, dim))


def sym_index(dim: int, i: int, j: int) -> int:
    """Storage slot of component (i, j) of a symmetric tensor."""
    if i > j:
        i, j = j, i
    return i * dim - i * (i - 1) // 2 + (j - i)


def sym_multiplicity(dim: int) -> np.ndarray:
    """Number of (i, j) index orderings per stored slot: 1 on the diagonal, 2 off."""
    return np.array([1.0 if i == j else 2.0 for i, j in sym_pairs(dim)])


@dataclass(frozen=True)
class TorusGrid:
    """Uniform periodic grid on the torus [0, 2pi)^d, d in {2, 3}.

    ``n_per_axis`` must be even so the real spectral derivative has a
    well-defined (zeroed) Nyquist mode.  ``cell_weight`` is the quadrature
    weight of the trapezoid/uniform rule, which is spectrally accurate for
    periodic integrands; the weights sum to (2pi)^d exactly.
    """

    dim: int
    n_per_axis: int

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.n_per_axis < 8 or self.n_per_axis % 2 != 0:
            raise ValueError(f"n_per_axis must be even and >= 8, got {self.n_per_axis}")

    @property
    def spacing(self) -> float:
        return 2.0 * np.pi / self.n_per_axis

    @property
    def cell_weight(self) -> float:
        return self.spacing**self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_per_axis,) * self.dim

    @property
    def n_points(self) -> int:
        return self.n_per_axis**self.dim

    @property
    def n_sym_components(self) -> int:
        return self.dim * (self.dim + 1) // 2

    def axis_coordinates(self) -> np.ndarray:
        return np.arange(self.n_per_axis) * self.spacing

    def coordinate_fields(self) -> tuple[np.ndarray, ...]:
        """Meshgrid coordinate arrays x^0, ..., x^{d-1}, each of grid shape."""
        axes = [self.axis_coordinates()] * self.dim
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def wavenumbers(self, axis: int) -> np.ndarray:
        """Integer frequencies along one axis, Nyquist zeroed, shaped to broadcast."""
        n = self.n_per_axis
        k = np.fft.fftfreq(n, 1.0 / n)
        k[n // 2] = 0.0  # odd-derivative Nyquist mode carries no usable phase
        shape = [1] * self.dim
        shape[axis] = n
        return k.reshape(shape)


def _freeze(values: np.ndarray, expected_shape: tuple[int, ...]) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape != expected_shape:
        raise ValueError(f"expected array of shape {expected_shape}, got {arr.shape}")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


def check_same_grid(*objs) -> TorusGrid:
    grid = objs[0].grid
    for other in objs[1:]:
        if other.grid != grid:
            raise GridMismatchError(f"grids differ: {grid} vs {other.grid}")
    return grid


@dataclass(frozen=True)
class ScalarField:
    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values, self.grid.shape))

    @classmethod
    def zeros(cls, grid: TorusGrid) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def constant(cls, grid: TorusGrid, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def from_function(cls, grid: TorusGrid, fn) -> "ScalarField":
        return cls(grid, fn(*grid.coordinate_fields()))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class VectorField:
    """Contravariant vector field, components X^i stacked on the leading axis."""

    grid: TorusGrid
    components: np.ndarray

    def __post_init__(self):
        shape = (self.grid.dim,) + self.grid.shape
        object.__setattr__(self, "components", _freeze(self.components, shape))

    @classmethod
    def zeros(cls, grid: TorusGrid) -> "VectorField":
        return cls(grid, np.zeros((grid.dim,) + grid.shape))

    @classmethod
    def from_functions(cls, grid: TorusGrid, fns) -> "VectorField":
        coords = grid.coordinate_fields()
        return cls(grid, np.stack([fn(*coords) for fn in fns]))

    def component(self, i: int) -> ScalarField:
        return ScalarField(self.grid, self.components[i])

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.components)))


@dataclass(frozen=True)
class OneFormField:
    """Covariant vector field, components u_i stacked on the leading axis."""

    grid: TorusGrid
    components: np.ndarray

    def __post_init__(self):
        shape = (self.grid.dim,) + self.grid.shape
        object.__setattr__(self, "components", _freeze(self.components, shape))

    @classmethod
    def zeros(cls, grid: TorusGrid) -> "OneFormField":
        return cls(grid, np.zeros((grid.dim,) + grid.shape))

    def component(self, i: int) -> ScalarField:
        return ScalarField(self.grid, self.components[i])

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.components)))


@dataclass(frozen=True)
class SymTensorField:
    """Symmetric 2-tensor field storing the d(d+1)/2 components T_ij, i <= j."""

    grid: TorusGrid
    components: np.ndarray
    variance: Variance = "covariant"

    def __post_init__(self):
        shape = (self.grid.n_sym_components,) + self.grid.shape
        object.__setattr__(self, "components", _freeze(self.components, shape))
        if self.variance not in ("covariant", "contravariant"):
            raise VarianceMismatchError(f"unknown variance {self.variance!r}")

    @classmethod
    def zeros(cls, grid: TorusGrid, variance: Variance = "covariant") -> "SymTensorField":
        return cls(grid, np.zeros((grid.n_sym_components,) + grid.shape), variance)

    @classmethod
    def identity(cls, grid: TorusGrid, variance: Variance = "covariant") -> "SymTensorField":
        comps = np.zeros((grid.n_sym_components,) + grid.shape)
        for i in range(grid.dim):
            comps[sym_index(grid.dim, i, i)] = 1.0
        return cls(grid, comps, variance)

    def component(self, i: int, j: int) -> ScalarField:
        return ScalarField(self.grid, self.components[sym_index(self.grid.dim, i, j)])

    def require_variance(self, variance: Variance) -> "SymTensorField":
        if self.variance != variance:
            raise VarianceMismatchError(f"expected {variance} tensor, got {self.variance}")
        return self

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.components)))


def leading_minors(components: np.ndarray, dim: int) -> list[np.ndarray]:
    """Leading principal minors of a packed symmetric matrix field (batched)."""
    c = components

    def at(i, j):
        return np.take(c, sym_index(dim, i, j), axis=-dim - 1)

    m1 = at(0, 0)
    minors = [m1]
    if dim >= 2:
        m2 = at(0, 0) * at(1, 1) - at(0, 1) ** 2
        minors.append(m2)
    if dim == 3:
        m3 = (
            at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) ** 2)
            - at(0, 1) * (at(0, 1) * at(2, 2) - at(1, 2) * at(0, 2))
            + at(0, 2) * (at(0, 1) * at(1, 2) - at(1, 1) * at(0, 2))
        )
        minors.append(m3)
    return minors


@dataclass(frozen=True)
class MetricField:
    """Riemannian metric: covariant symmetric 2-tensor, pointwise positive-definite."""

    tensor: SymTensorField = field()

    def __post_init__(self):
        self.tensor.require_variance("covariant")
        for k, minor in enumerate(leading_minors(self.tensor.components, self.dim), start=1):
            if not np.all(minor > 0.0):
                raise DegenerateMetricError(
                    f"leading principal minor {k} is non-positive somewhere "
                    f"(min {float(np.min(minor)):.3e})"
                )

    @classmethod
    def euclidean(cls, grid: TorusGrid) -> "MetricField":
        return cls(SymTensorField.identity(grid))

    @classmethod
    def from_components(cls, grid: TorusGrid, components: np.ndarray) -> "MetricField":
        return cls(SymTensorField(grid, components, "covariant"))

    @property
    def grid(self) -> TorusGrid:
        return self.tensor.grid

    @property
    def dim(self) -> int:
        return self.tensor.grid.dim

    @property
    def components(self) -> np.ndarray:
        return self.tensor.components

    def component(self, i: int, j: int) -> ScalarField:
        return self.tensor.component(i, j)


@dataclass(frozen=True)
class ChristoffelField:
    """Connection coefficients Gamma^k_ij, symmetric in the lower pair.

    Stored with the upper index k on the leading axis and the packed lower
    pair (i <= j) on the next one.
    """

    grid: TorusGrid
    components: np.ndarray

    def __post_init__(self):
        shape = (self.grid.dim, self.grid.n_sym_components) + self.grid.shape
        object.__setattr__(self, "components", _freeze(self.components, shape))

    def component(self, k: int, i: int, j: int) -> ScalarField:
        return ScalarField(self.grid, self.components[k, sym_index(self.grid.dim, i, j)])

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.components)))
